import json
import os
import pathlib
import threading

import pytest

from refscorer.model import ModelConfig
from refscorer.server import create_server
from refscorer.train import TrainConfig, finetune


def fixtures_dir() -> pathlib.Path:
    override = os.environ.get("REFSCORER_FIXTURES")
    if override:
        return pathlib.Path(override)
    # shared goldens live in the retrieval package one level up
    return pathlib.Path(__file__).resolve().parent.parent.parent / "tests" / "fixtures"


@pytest.fixture(scope="session")
def toy_corpus_path() -> str:
    return str(fixtures_dir() / "toy_corpus.jsonl")


@pytest.fixture(scope="session")
def protocol_fixtures() -> dict:
    return json.loads((fixtures_dir() / "score_protocol.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def faq_model(toy_corpus_path):
    model, losses = finetune(toy_corpus_path, "faq", model_config=ModelConfig(),
                             train_config=TrainConfig(epochs=3, seed=0))
    model.losses = losses
    return model


@pytest.fixture(scope="session")
def match_model(toy_corpus_path):
    model, _ = finetune(toy_corpus_path, "match", model_config=ModelConfig(),
                        train_config=TrainConfig(epochs=2, seed=0))
    return model


@pytest.fixture(scope="session")
def served(faq_model, match_model):
    server = create_server(faq_model, match_model, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address
    yield f"http://{host}:{port}"
    server.shutdown()
    server.server_close()
