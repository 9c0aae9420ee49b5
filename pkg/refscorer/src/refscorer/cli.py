"""CLI: finetune a scorer checkpoint, serve it over HTTP."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .model import ModelConfig, load_checkpoint
from .server import serve
from .train import TrainConfig, finetune


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="refscorer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("finetune", help="train a scorer on a JSONL corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", default="faq", choices=["faq", "match"])
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="checkpoint directory")

    p = sub.add_parser("serve", help="serve /score from checkpoints")
    p.add_argument("--checkpoint", help="FAQ-mode checkpoint directory")
    p.add_argument("--match-checkpoint", help="match-mode checkpoint directory")
    p.add_argument("--bind", default="127.0.0.1:8500")

    return parser


def _cmd_finetune(args) -> int:
    model, losses = finetune(
        args.corpus, args.mode,
        model_config=ModelConfig(),
        train_config=TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                                 learning_rate=args.lr, seed=args.seed),
    )
    model.save(args.out, losses=losses)
    for epoch, loss in enumerate(losses, start=1):
        print(f"epoch {epoch}: loss {loss:.6f}")
    print(f"saved {args.mode} checkpoint ({model.config.fingerprint()}) -> {args.out}")
    return 0


def _cmd_serve(args) -> int:
    if not args.checkpoint and not args.match_checkpoint:
        raise ValueError("pass --checkpoint and/or --match-checkpoint")
    faq_model = load_checkpoint(args.checkpoint) if args.checkpoint else None
    match_model = load_checkpoint(args.match_checkpoint) if args.match_checkpoint else None
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"--bind must be HOST:PORT, got {args.bind!r}")
    loaded = [m.mode for m in (faq_model, match_model) if m]
    print(f"serving {'+'.join(loaded)} on http://{args.bind}")
    serve(faq_model, match_model, host, int(port))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return {"finetune": _cmd_finetune, "serve": _cmd_serve}[args.command](args)
    except Exception as e:
        print(f"refscorer {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
