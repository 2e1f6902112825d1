"""Record the golden protocol transcript for the replay test.

Feeds every raw line of tests/fixtures/requests.jsonl through a bridge
configured exactly like the replay test (tiny-mlm fixture, trigger-list
classifier, max_batch=2) and stores the line/reply pairs in
tests/fixtures/transcript.jsonl.

Rerun after intentionally changing the protocol, the backend's candidate
selection, or the fixture model:

    python3 tools/record_transcript.py
"""

from __future__ import annotations

import io
import json
import sys
from pathlib import Path

from mlmbridge.config import BridgeConfig
from mlmbridge.server import Bridge, serve_stream

BRIDGE_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = BRIDGE_ROOT / "tests" / "fixtures"

# Must stay in sync with the replay test's bridge configuration.
MAX_BATCH = 2


def main() -> int:
    config = BridgeConfig(
        model=str(FIXTURES / "tiny-mlm"),
        classifier=f"triggers:{FIXTURES / 'triggers.txt'}",
        max_batch=MAX_BATCH,
    )
    bridge = Bridge(config)

    lines = (FIXTURES / "requests.jsonl").read_text(encoding="utf-8").splitlines()
    out = io.StringIO()
    serve_stream(bridge, lines, out)
    replies = out.getvalue().splitlines()
    if len(replies) != len(lines):
        raise SystemExit(
            f"expected one reply per request line, got {len(replies)} "
            f"for {len(lines)}"
        )

    transcript_path = FIXTURES / "transcript.jsonl"
    with transcript_path.open("w", encoding="utf-8") as fh:
        for line, reply in zip(lines, replies):
            record = {"line": line, "reply": json.loads(reply)}
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    print(f"wrote {len(lines)} request/reply pairs to {transcript_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
