"""Minimal inference endpoint speaking the engine's remote-provider wire
format: POST newline-delimited JSON strings, answer one JSON probability
vector per line."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np


def make_handler(pipeline):
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("content-length", "0"))
            body = self.rfile.read(length).decode("utf-8")
            try:
                texts = [json.loads(line) for line in body.splitlines() if line.strip()]
                probs = np.asarray(pipeline.predict_proba([str(t) for t in texts]))
                lines = [
                    json.dumps([float(np.float32(v)) for v in row]) for row in probs
                ]
            except Exception as exc:  # malformed request
                payload = json.dumps({"error": str(exc)}).encode("utf-8")
                self.send_response(400)
                self.send_header("content-length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)
                return
            payload = ("\n".join(lines) + "\n").encode("utf-8")
            self.send_response(200)
            self.send_header("content-type", "application/x-ndjson")
            self.send_header("content-length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, *args):
            pass

    return Handler


def serve_provider(pipeline, host: str, port: int, background: bool = False):
    """Run the endpoint; returns the server (with .server_port) when
    backgrounded."""
    server = ThreadingHTTPServer((host, port), make_handler(pipeline))
    if background:
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        return server
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return server
