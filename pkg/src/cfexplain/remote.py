"""Wire clients for external model servers.

Protocol: newline-delimited JSON, one request per line, one response per
request, over a child process's stdio or a TCP connection.

    {"op": "ping"}                                   -> {"ok": true, ...}
    {"op": "predict", "tokens": [...]}               -> {"label": bool, "score": float}
    {"op": "fill_mask", "tokens": [...],
     "mask_positions": [...], "k": int,
     "originals": [...]}                             -> {"candidates": [
                                                          {"replacements": [...],
                                                           "likelihood": float}, ...]}

Servers answer {"error": "...", "op": ...} for requests they reject and may
add fields of their own; unknown response fields are ignored here. A reply
missing a required field, or carrying one of the wrong shape, raises
MalformedResponse. Transport failures raise AdapterUnavailable.

The fill_mask client re-enforces the filler contract locally (drops
sentinel/whitespace replacements and the original joint assignment,
dedupes, sorts by likelihood, truncates to k) so the engine gets the same
guarantees from any server. "originals" is an optional extension field;
servers that ignore it still work.
"""

from __future__ import annotations

import json
import logging
import shlex
import socket
import subprocess
from typing import Protocol

from .adapters import MASK_SENTINEL, FillCandidate, FillRequest, Prediction
from .errors import AdapterUnavailable, MalformedResponse
from .program import TokenizedProgram

log = logging.getLogger(__name__)


class WireTransport(Protocol):
    name: str

    def request(self, payload: dict) -> dict: ...
    def close(self) -> None: ...


def _decode(line: str, name: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedResponse(f"{name}: reply is not JSON: {line[:200]!r}") from exc
    if not isinstance(obj, dict):
        raise MalformedResponse(f"{name}: reply is not an object")
    return obj


class ProcTransport:
    """Talks to `command` over its stdin/stdout; stderr passes through."""

    def __init__(self, command: str) -> None:
        self.name = f"proc:{command}"
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise AdapterUnavailable(f"{self.name}: {exc}") from exc

    def request(self, payload: dict) -> dict:
        if self._proc.poll() is not None:
            raise AdapterUnavailable(f"{self.name}: server exited with {self._proc.returncode}")
        try:
            self._proc.stdin.write(json.dumps(payload) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise AdapterUnavailable(f"{self.name}: {exc}") from exc
        if not line:
            raise AdapterUnavailable(f"{self.name}: server closed its stdout")
        return _decode(line, self.name)

    def close(self) -> None:
        try:
            if self._proc.poll() is None:
                self._proc.stdin.close()
                self._proc.terminate()
            self._proc.wait(timeout=5)
        except OSError:
            pass


class TcpTransport:
    def __init__(self, host: str, port: int, *, timeout: float = 60.0) -> None:
        self.name = f"tcp:{host}:{port}"
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
            self._file = self._sock.makefile("rw", encoding="utf-8", newline="\n")
        except OSError as exc:
            raise AdapterUnavailable(f"{self.name}: {exc}") from exc

    def request(self, payload: dict) -> dict:
        try:
            self._file.write(json.dumps(payload) + "\n")
            self._file.flush()
            line = self._file.readline()
        except OSError as exc:
            raise AdapterUnavailable(f"{self.name}: {exc}") from exc
        if not line:
            raise AdapterUnavailable(f"{self.name}: server closed the connection")
        return _decode(line, self.name)

    def close(self) -> None:
        try:
            self._file.close()
            self._sock.close()
        except OSError:
            pass


def ping(transport: WireTransport) -> dict:
    """Handshake; returns the server's capability fields."""
    reply = transport.request({"op": "ping"})
    if reply.get("ok") is not True:
        raise MalformedResponse(f"{transport.name}: ping not acknowledged: {reply}")
    return reply


def _reject(transport: WireTransport, reply: dict) -> None:
    if "error" in reply:
        raise MalformedResponse(f"{transport.name}: server error: {reply['error']}")


class RemoteClassifier:
    def __init__(self, transport: WireTransport) -> None:
        self.transport = transport
        self.capabilities = ping(transport)

    def predict(self, program: TokenizedProgram) -> Prediction:
        reply = self.transport.request({
            "op": "predict",
            "tokens": list(program.token_texts),
        })
        _reject(self.transport, reply)
        if "label" not in reply or "score" not in reply:
            raise MalformedResponse(f"{self.transport.name}: predict reply missing label/score")
        label, score = reply["label"], reply["score"]
        if not isinstance(label, bool) or isinstance(score, bool) or not isinstance(score, (int, float)):
            raise MalformedResponse(f"{self.transport.name}: predict reply has wrong types")
        if not 0.0 <= float(score) <= 1.0:
            raise MalformedResponse(f"{self.transport.name}: score outside [0,1]: {score}")
        return Prediction(label, float(score))


class RemoteFiller:
    def __init__(self, transport: WireTransport) -> None:
        self.transport = transport
        self.capabilities = ping(transport)

    def fill_mask(self, request: FillRequest) -> list[FillCandidate]:
        payload = {
            "op": "fill_mask",
            "tokens": list(request.tokens),
            "mask_positions": list(request.mask_positions),
            "k": request.k,
        }
        if request.originals is not None:
            payload["originals"] = list(request.originals)
        reply = self.transport.request(payload)
        _reject(self.transport, reply)
        if "candidates" not in reply or not isinstance(reply["candidates"], list):
            raise MalformedResponse(f"{self.transport.name}: fill_mask reply missing candidates")
        width = len(request.mask_positions)
        cleaned: list[FillCandidate] = []
        seen: set[tuple[str, ...]] = set()
        for raw in reply["candidates"]:
            if not isinstance(raw, dict) or "replacements" not in raw or "likelihood" not in raw:
                raise MalformedResponse(f"{self.transport.name}: candidate missing fields: {raw!r}")
            reps, likelihood = raw["replacements"], raw["likelihood"]
            if (not isinstance(reps, list) or len(reps) != width
                    or not all(isinstance(r, str) for r in reps)
                    or isinstance(likelihood, bool)
                    or not isinstance(likelihood, (int, float))
                    or not 0.0 <= float(likelihood) <= 1.0):
                raise MalformedResponse(f"{self.transport.name}: bad candidate shape: {raw!r}")
            reps = tuple(reps)
            if any(not r or r == MASK_SENTINEL or any(c.isspace() for c in r) for r in reps):
                log.debug("dropping unusable candidate from %s: %r", self.transport.name, reps)
                continue
            if request.originals is not None and reps == request.originals:
                continue
            if reps in seen:
                continue
            seen.add(reps)
            cleaned.append(FillCandidate(reps, float(likelihood)))
        cleaned.sort(key=lambda c: (-c.likelihood, c.replacements))
        return cleaned[:request.k]
