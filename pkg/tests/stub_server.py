"""Minimal wire-protocol model server used by the test suite.

Speaks newline-delimited JSON over stdio (default) or a single TCP
connection (--tcp). Deliberately does not import the package under test so
the tests exercise the protocol from an independent implementation.

Behavior knobs:
    --trigger WORD      predict positive when any trigger word is present
    --propose WORD      fill_mask candidate vocabulary (repeatable)
    --log FILE          append every raw request line to FILE
    --mode MODE         reply shaping for failure-path tests (see MODES)
"""

import argparse
import json
import socket
import sys

MODES = (
    "ok",              # well-formed replies
    "error",           # {"error": ...} for predict/fill_mask
    "garbage",         # reply line is not JSON
    "array",           # reply is a JSON array, not an object
    "missing-fields",  # predict reply lacks label/score
    "bad-score",       # predict score outside [0, 1]
    "int-label",       # predict label is 1 instead of true
    "messy-candidates",  # fill_mask reply needs client-side cleanup
    "close-after-ping",  # exit right after acknowledging ping
    "no-ok",           # ping reply without ok: true
)


def predict_reply(msg, triggers):
    hits = sum(1 for t in msg.get("tokens", []) if t in triggers)
    return {"label": hits > 0, "score": hits / (hits + 1.0)}


def fill_reply(msg, propose):
    width = len(msg.get("mask_positions", []))
    k = msg.get("k", 1)
    candidates = [
        {"replacements": [word] * width, "likelihood": 1.0 / (rank + 2)}
        for rank, word in enumerate(propose[:k])
    ]
    return {"candidates": candidates}


def messy_fill_reply(msg):
    width = len(msg.get("mask_positions", []))
    originals = msg.get("originals")

    def cand(word, likelihood):
        return {"replacements": [word] * width, "likelihood": likelihood}

    candidates = [
        cand("low", 0.1),               # out of order on purpose
        cand("has space", 0.9),         # whitespace: dropped by the client
        cand("[MASK]", 0.9),            # sentinel: dropped by the client
        cand("", 0.9),                  # empty: dropped by the client
        cand("best", 0.8),
        cand("best", 0.8),              # duplicate: dropped by the client
        cand("tied_b", 0.4),
        cand("tied_a", 0.4),            # ties sort by text
    ]
    if originals:
        candidates.append({"replacements": list(originals), "likelihood": 0.95})
    return {"candidates": candidates}


def handle(msg, args):
    op = msg.get("op")
    if op == "ping":
        if args.mode == "no-ok":
            return {"pong": True}
        return {"ok": True, "protocol": 1, "serial": True, "name": "stub"}
    if args.mode == "error":
        return {"error": "refused by mode", "op": op}
    if args.mode == "missing-fields":
        return {"op": op}
    if args.mode == "bad-score":
        return {"label": True, "score": 1.5}
    if args.mode == "int-label":
        return {"label": 1, "score": 0.5}
    if op == "predict":
        return predict_reply(msg, set(args.trigger))
    if op == "fill_mask":
        if args.mode == "messy-candidates":
            return messy_fill_reply(msg)
        return fill_reply(msg, args.propose)
    return {"error": f"unknown op {op!r}"}


def serve(lines, out, args):
    log_file = open(args.log, "a") if args.log else None
    try:
        for line in lines:
            if not line.strip():
                continue
            if log_file:
                log_file.write(line.rstrip("\n") + "\n")
                log_file.flush()
            msg = json.loads(line)
            if args.mode == "garbage" and msg.get("op") != "ping":
                out.write("this is not json\n")
                out.flush()
                continue
            if args.mode == "array" and msg.get("op") != "ping":
                out.write("[1, 2, 3]\n")
                out.flush()
                continue
            reply = handle(msg, args)
            out.write(json.dumps(reply) + "\n")
            out.flush()
            if args.mode == "close-after-ping" and msg.get("op") == "ping":
                return
    finally:
        if log_file:
            log_file.close()


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trigger", action="append", default=[])
    parser.add_argument("--propose", action="append", default=None)
    parser.add_argument("--log")
    parser.add_argument("--mode", choices=MODES, default="ok")
    parser.add_argument("--tcp", action="store_true")
    args = parser.parse_args()
    if args.propose is None:
        args.propose = ["alpha", "beta"]

    if args.tcp:
        server = socket.create_server(("127.0.0.1", 0))
        print(f"PORT {server.getsockname()[1]}", flush=True)
        conn, _ = server.accept()
        with conn, conn.makefile("rw", encoding="utf-8", newline="\n") as stream:
            serve(stream, stream, args)
        server.close()
    else:
        serve(sys.stdin, sys.stdout, args)


if __name__ == "__main__":
    main()
