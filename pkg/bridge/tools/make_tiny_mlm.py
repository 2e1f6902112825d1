"""Regenerate the tiny fill-mask model fixture used by the test suite.

The fixture is a randomly initialized (seeded, so reproducible) BERT-style
masked LM with a 30-word vocabulary, small enough (~100 KB) to commit to
the repository.  Tests load the committed artifacts; this script only needs
rerunning if the fixture is ever lost or intentionally changed.

Usage:
    python3 tools/make_tiny_mlm.py [OUTPUT_DIR]

Default output: tests/fixtures/tiny-mlm (relative to the bridge package root).
"""

from __future__ import annotations

import sys
from pathlib import Path

import torch
from transformers import BertConfig, BertForMaskedLM, BertTokenizerFast

SEED = 0

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]

WORDS = [
    "the", "cat", "sat", "on", "mat", "dog", "ran", "code", "diff", "line",
    "token", "word", "fast", "slow", "gen", "handle", "store", "render",
    "simple", "cached", "page", "node", "unit", "alpha", "beta", "gamma",
    "delta", "quiet", "calm", "tidy",
]


def build(out_dir: Path) -> None:
    vocab = SPECIALS + WORDS
    torch.manual_seed(SEED)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    model = BertForMaskedLM(config)
    model.eval()

    tokenizer = BertTokenizerFast(vocab={word: i for i, word in enumerate(vocab)})

    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    print(f"wrote fixture to {out_dir}")
    for path in sorted(out_dir.iterdir()):
        print(f"  {path.name} ({path.stat().st_size} bytes)")


def main(argv: list[str]) -> int:
    default = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "tiny-mlm"
    out_dir = Path(argv[1]) if len(argv) > 1 else default
    build(out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
