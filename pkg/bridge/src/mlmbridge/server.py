"""Request dispatch and serve loops.

A :class:`Bridge` owns the model backend plus the optional classifier and
answers one decoded request at a time.  The serve loops feed it from stdio
or TCP; malformed input of any kind becomes an in-band error reply, never
a crash of the loop.
"""

from __future__ import annotations

import json
import logging
import socket
import sys
import threading
from pathlib import PurePath
from typing import Any, IO, Iterable

from mlmbridge.classifiers import load_classifier
from mlmbridge.config import BridgeConfig
from mlmbridge.model import BridgeError, MaskedLmBackend
from mlmbridge.protocol import ENGINE_MASK, PROTOCOL_VERSION

log = logging.getLogger(__name__)

BRIDGE_NAME = "mlm-bridge"

# Decimal places kept on serialized scores; enough to preserve ordering,
# few enough that recorded transcripts stay byte-stable across runs.
SCORE_DECIMALS = 12


class Bridge:
    """Answer decoded protocol requests for one model/classifier pair."""

    def __init__(self, config: BridgeConfig) -> None:
        self.config = config
        self.backend = MaskedLmBackend(config.model)
        self.classifier = (
            load_classifier(config.classifier) if config.classifier else None
        )
        # Requests are handled one at a time even when connections arrive
        # concurrently; the ping reply advertises exactly that.
        self._lock = threading.Lock()

    def handle(self, request: Any) -> dict[str, Any]:
        """Answer one request; failures become error replies."""
        with self._lock:
            op = request.get("op") if isinstance(request, dict) else None
            try:
                if not isinstance(request, dict):
                    raise BridgeError("request must be a JSON object")
                if op == "ping":
                    return self._ping()
                if op == "predict":
                    return self._predict(request)
                if op == "fill_mask":
                    return self._fill_mask(request)
                raise BridgeError(f"unknown op: {op!r}")
            except (BridgeError, ValueError) as exc:
                return {"error": str(exc), "op": op if isinstance(op, str) else None}
            except Exception as exc:  # noqa: BLE001 - the loop must survive
                log.exception("internal error handling %r", op)
                return {
                    "error": f"internal error: {exc}",
                    "op": op if isinstance(op, str) else None,
                }

    def _ping(self) -> dict[str, Any]:
        # Only the model's basename goes over the wire so that transcripts
        # recorded from one checkout replay anywhere.
        return {
            "ok": True,
            "protocol": PROTOCOL_VERSION,
            "serial": True,
            "name": BRIDGE_NAME,
            "model": PurePath(self.config.model).name or self.config.model,
        }

    def _predict(self, request: dict[str, Any]) -> dict[str, Any]:
        if self.classifier is None:
            raise BridgeError("no classifier configured; predict is unavailable")
        tokens = _token_list(request, "tokens")
        label, score = self.classifier.predict(tokens)
        return {"label": bool(label), "score": round(float(score), SCORE_DECIMALS)}

    def _fill_mask(self, request: dict[str, Any]) -> dict[str, Any]:
        tokens = _token_list(request, "tokens")
        positions = request.get("mask_positions")
        if (
            not isinstance(positions, list)
            or not positions
            or not all(isinstance(p, int) and not isinstance(p, bool) for p in positions)
        ):
            raise BridgeError("mask_positions must be a non-empty list of integers")
        if any(p < 0 or p >= len(tokens) for p in positions):
            raise BridgeError("mask_positions out of range")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise BridgeError("mask_positions must be strictly increasing")
        if any(tokens[p] != ENGINE_MASK for p in positions):
            raise BridgeError(f"masked positions must hold the {ENGINE_MASK} sentinel")
        if len(positions) > self.config.max_batch:
            raise BridgeError(
                f"{len(positions)} mask positions exceed max_batch="
                f"{self.config.max_batch}"
            )
        k = request.get("k")
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise BridgeError("k must be a positive integer")
        originals = request.get("originals")
        if originals is not None:
            if not isinstance(originals, list) or not all(
                isinstance(t, str) for t in originals
            ):
                raise BridgeError("originals must be a list of strings")
            if len(originals) != len(positions):
                raise BridgeError("originals must match mask_positions in length")
        joints = self.backend.fill(tokens, positions, k, originals)
        return {
            "candidates": [
                {
                    "replacements": list(texts),
                    "likelihood": round(likelihood, SCORE_DECIMALS),
                }
                for texts, likelihood in joints
            ]
        }


def _token_list(request: dict[str, Any], field: str) -> list[str]:
    value = request.get(field)
    if (
        not isinstance(value, list)
        or not value
        or not all(isinstance(t, str) for t in value)
    ):
        raise BridgeError(f"{field} must be a non-empty list of strings")
    return value


def serve_stream(bridge: Bridge, lines: Iterable[str], out: IO[str]) -> None:
    """Serve newline-delimited JSON requests from ``lines`` onto ``out``."""
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        try:
            request: Any = json.loads(raw)
        except json.JSONDecodeError as exc:
            reply: dict[str, Any] = {"error": f"invalid JSON: {exc}", "op": None}
        else:
            reply = bridge.handle(request)
        out.write(json.dumps(reply, sort_keys=True) + "\n")
        out.flush()


def _serve_tcp(bridge: Bridge, port: int) -> None:
    server = socket.create_server(("127.0.0.1", port))
    actual = server.getsockname()[1]
    print(f"PORT {actual}", flush=True)
    log.info("listening on 127.0.0.1:%d", actual)

    def session(conn: socket.socket) -> None:
        with conn, conn.makefile("r", encoding="utf-8") as rx, conn.makefile(
            "w", encoding="utf-8"
        ) as tx:
            serve_stream(bridge, rx, tx)

    with server:
        while True:
            conn, _ = server.accept()
            threading.Thread(target=session, args=(conn,), daemon=True).start()


def serve(config: BridgeConfig) -> None:
    """Load the model and serve requests until EOF (stdio) or interrupt."""
    bridge = Bridge(config)
    if config.transport == "tcp":
        _serve_tcp(bridge, config.port)
    else:
        serve_stream(bridge, sys.stdin, sys.stdout)
