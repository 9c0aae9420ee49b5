"""HTTP retrieval service over an assembled pipeline.

Stateless per request; the pipeline is immutable, so concurrent requests
share it safely.  Reloading a config means restarting the process.

  POST /retrieve  {"query": "...", "top_k": 5}
  POST /match     {"left": "...", "right": "..."}
  GET  /health
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import __version__
from .ranking import Pipeline, match, retrieve
from .scorer import ScorerError


class BadRequest(Exception):
    pass


def _retrieve_payload(pipeline: Pipeline, body: dict) -> dict:
    query = body.get("query")
    if not isinstance(query, str) or not query.strip():
        raise BadRequest("'query' must be a non-empty string")
    top_k = body.get("top_k", 5)
    if not isinstance(top_k, int) or isinstance(top_k, bool) or top_k < 1:
        raise BadRequest("'top_k' must be a positive integer")
    ranked = retrieve(pipeline, query, top_k=top_k)
    entries = []
    for e in ranked.entries[:top_k]:
        pair = pipeline.corpus.pairs[e.pair_index]
        entries.append({
            "question": pair.question,
            "answer": pipeline.corpus.answers[e.answer_id],
            "bm25_norm": e.bm25_norm,
            "relevance": e.relevance,
            "rs": e.rs,
        })
    return {
        "answer": pipeline.corpus.answers[ranked.chosen_answer],
        "vote_applied": ranked.vote_applied,
        "ranked": entries,
    }


def _match_payload(pipeline: Pipeline, body: dict) -> dict:
    left, right = body.get("left"), body.get("right")
    if not isinstance(left, str) or not left.strip() or not isinstance(right, str) or not right.strip():
        raise BadRequest("'left' and 'right' must be non-empty strings")
    score, label = match(pipeline, left, right)
    return {"score": score, "label": label}


def make_handler(pipeline: Pipeline) -> type:
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):  # quiet by default
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
                self._send(200, {"status": "ok", "component": "faqfuse", "version": __version__})
            else:
                self._send(404, {"error": f"unknown path {self.path}"})

        def do_POST(self):
            if self.path not in ("/retrieve", "/match"):
                self._send(404, {"error": f"unknown path {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length).decode("utf-8"))
                if not isinstance(body, dict):
                    raise BadRequest("request body must be a JSON object")
                if self.path == "/retrieve":
                    self._send(200, _retrieve_payload(pipeline, body))
                else:
                    self._send(200, _match_payload(pipeline, body))
            except (json.JSONDecodeError, UnicodeDecodeError):
                self._send(400, {"error": "request body is not valid JSON"})
            except (BadRequest, ValueError) as e:
                self._send(400, {"error": str(e)})
            except ScorerError as e:
                self._send(502, {"error": f"relevance scorer failed: {e}"})
            except Exception as e:
                self._send(500, {"error": f"{type(e).__name__}: {e}"})

    return Handler


def serve(pipeline: Pipeline, host: str = "127.0.0.1", port: int = 8080) -> None:
    """Serve until interrupted.  Readiness is gated on pipeline assembly,
    which the caller has already done."""
    server = create_server(pipeline, host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def create_server(pipeline: Pipeline, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bound but not yet serving; port 0 picks a free port (server.server_address)."""
    return ThreadingHTTPServer((host, port), make_handler(pipeline))
