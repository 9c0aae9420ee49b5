"""HTTP face of the scorer: the /score wire protocol.

One process can host a FAQ-mode model, a match-mode model, or both; a
request whose mode has no backing model gets a 400, as does any payload
that violates the protocol schema.  Model weights are read-only at serve
time, so the threading server needs no locking.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .model import ScorerModel


class SchemaError(Exception):
    pass


def _check_injected(obj, field: str):
    if obj is None:
        return
    if not isinstance(obj, dict):
        raise SchemaError(f"'{field}' must be an object or null")
    for key in ("tokens", "soft_positions", "visible", "trunk_mask"):
        if key not in obj or not isinstance(obj[key], list):
            raise SchemaError(f"'{field}.{key}' must be a list")
    n = len(obj["tokens"])
    if n == 0:
        raise SchemaError(f"'{field}.tokens' must be non-empty")
    if len(obj["soft_positions"]) != n or len(obj["trunk_mask"]) != n or len(obj["visible"]) != n:
        raise SchemaError(f"'{field}' lists disagree on the sequence length")
    if any(not isinstance(row, list) or len(row) != n for row in obj["visible"]):
        raise SchemaError(f"'{field}.visible' must be an {n}x{n} 0/1 matrix")


def _score_response(body: dict, faq_model: Optional[ScorerModel],
                    match_model: Optional[ScorerModel]) -> dict:
    if not isinstance(body, dict):
        raise SchemaError("request body must be a JSON object")
    mode = body.get("mode")
    if mode == "faq":
        if faq_model is None:
            raise SchemaError("no FAQ-mode model is loaded")
        query = body.get("query")
        answer_ids = body.get("answer_ids")
        if not isinstance(query, str) or not query.strip():
            raise SchemaError("'query' must be a non-empty string")
        if not isinstance(answer_ids, list) or not answer_ids or \
                not all(isinstance(a, str) for a in answer_ids):
            raise SchemaError("'answer_ids' must be a non-empty list of strings")
        if len(set(answer_ids)) != len(answer_ids):
            raise SchemaError("'answer_ids' must not repeat")
        _check_injected(body.get("injected"), "injected")
        probs = faq_model.score_answers(query, answer_ids, body.get("injected"))
        return {"probs": probs}
    if mode == "match":
        if match_model is None:
            raise SchemaError("no match-mode model is loaded")
        left, right = body.get("left"), body.get("right")
        if not isinstance(left, str) or not left.strip() or \
                not isinstance(right, str) or not right.strip():
            raise SchemaError("'left' and 'right' must be non-empty strings")
        _check_injected(body.get("injected_left"), "injected_left")
        _check_injected(body.get("injected_right"), "injected_right")
        sim = match_model.similarity(left, right, body.get("injected_left"), body.get("injected_right"))
        return {"similarity": sim}
    raise SchemaError("'mode' must be 'faq' or 'match'")


def make_handler(faq_model: Optional[ScorerModel], match_model: Optional[ScorerModel]) -> type:
    tags = [m.config.encoder_tag + ":" + m.mode for m in (faq_model, match_model) if m is not None]

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):
            pass

        def _send(self, status: int, payload: dict) -> None:
            data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):
            if self.path == "/health":
                self._send(200, {"status": "ok", "model": "+".join(tags)})
            else:
                self._send(404, {"error": f"unknown path {self.path}"})

        def do_POST(self):
            if self.path != "/score":
                self._send(404, {"error": f"unknown path {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length).decode("utf-8"))
                self._send(200, _score_response(body, faq_model, match_model))
            except (json.JSONDecodeError, UnicodeDecodeError):
                self._send(400, {"error": "request body is not valid JSON"})
            except SchemaError as e:
                self._send(400, {"error": str(e)})
            except Exception as e:
                self._send(500, {"error": f"{type(e).__name__}: {e}"})

    return Handler


def create_server(faq_model: Optional[ScorerModel] = None,
                  match_model: Optional[ScorerModel] = None,
                  host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    if faq_model is None and match_model is None:
        raise ValueError("at least one model is required")
    return ThreadingHTTPServer((host, port), make_handler(faq_model, match_model))


def serve(faq_model: Optional[ScorerModel], match_model: Optional[ScorerModel],
          host: str, port: int) -> None:
    server = create_server(faq_model, match_model, host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
