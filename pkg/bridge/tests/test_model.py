"""Backend inference behavior on the committed tiny model."""

import pytest

from conftest import MODEL_DIR, MODEL_WORDS
from mlmbridge.model import BridgeError, MaskedLmBackend, _best_first_joints
from mlmbridge.protocol import ENGINE_MASK

SPECIALS = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"}


def likelihoods(joints):
    return [likelihood for _, likelihood in joints]


class TestSingleMask:
    def test_returns_at_most_k(self, backend):
        joints = backend.fill(["the", ENGINE_MASK, "sat"], [1], 3)
        assert 0 < len(joints) <= 3

    def test_replacement_shape(self, backend):
        joints = backend.fill(["the", ENGINE_MASK, "sat"], [1], 5)
        for texts, likelihood in joints:
            assert isinstance(texts, tuple) and len(texts) == 1
            assert isinstance(texts[0], str) and texts[0]
            assert isinstance(likelihood, float)

    def test_likelihoods_are_probabilities(self, backend):
        joints = backend.fill(["the", ENGINE_MASK, "sat"], [1], 10)
        for like in likelihoods(joints):
            assert 0.0 <= like <= 1.0

    def test_likelihoods_nonincreasing(self, backend):
        likes = likelihoods(backend.fill(["the", ENGINE_MASK, "sat"], [1], 10))
        assert all(a >= b for a, b in zip(likes, likes[1:]))

    def test_proposals_come_from_word_vocabulary(self, backend):
        joints = backend.fill(["the", ENGINE_MASK, "sat"], [1], 50)
        proposed = {texts[0] for texts, _ in joints}
        assert proposed <= MODEL_WORDS
        assert not proposed & SPECIALS
        assert not any(word.startswith("##") for word in proposed)

    def test_proposals_are_distinct(self, backend):
        joints = backend.fill(["the", ENGINE_MASK, "sat"], [1], 50)
        seen = [texts for texts, _ in joints]
        assert len(seen) == len(set(seen))

    def test_k_beyond_vocabulary_is_capped(self, backend):
        joints = backend.fill(["the", ENGINE_MASK, "sat"], [1], 500)
        assert len(joints) <= len(MODEL_WORDS)

    def test_original_joint_filtered(self, backend):
        tokens = ["the", ENGINE_MASK, "sat"]
        unfiltered = backend.fill(tokens, [1], 50)
        assert ("cat",) in {texts for texts, _ in unfiltered}
        filtered = backend.fill(tokens, [1], 50, originals=["cat"])
        assert ("cat",) not in {texts for texts, _ in filtered}
        assert len(filtered) == len(unfiltered) - 1

    def test_original_filter_does_not_starve_k(self, backend):
        # Even when the original is the model's top pick somewhere, k
        # candidates must come back as long as the vocabulary allows it.
        joints = backend.fill(["the", ENGINE_MASK, "sat"], [1], 4, originals=["cat"])
        assert len(joints) == 4


class TestMultiMask:
    def test_joint_shape(self, backend):
        joints = backend.fill([ENGINE_MASK, "dog", ENGINE_MASK], [0, 2], 4)
        assert 0 < len(joints) <= 4
        for texts, _ in joints:
            assert len(texts) == 2

    def test_joint_likelihoods_nonincreasing(self, backend):
        likes = likelihoods(
            backend.fill([ENGINE_MASK, "dog", ENGINE_MASK], [0, 2], 12)
        )
        assert all(a >= b for a, b in zip(likes, likes[1:]))

    def test_joint_original_filtered(self, backend):
        tokens = [ENGINE_MASK, "dog", ENGINE_MASK]
        wide = backend.fill(tokens, [0, 2], 40)
        target = wide[0][0]
        filtered = backend.fill(tokens, [0, 2], 40, originals=list(target))
        assert target not in {texts for texts, _ in filtered}

    def test_deterministic_across_instances(self, backend):
        tokens = ["the", ENGINE_MASK, "sat", "on", ENGINE_MASK, "mat"]
        first = backend.fill(tokens, [1, 4], 8)
        fresh = MaskedLmBackend(str(MODEL_DIR))
        assert fresh.fill(tokens, [1, 4], 8) == first

    def test_repeat_call_identical(self, backend):
        tokens = [ENGINE_MASK, "dog", ENGINE_MASK]
        assert backend.fill(tokens, [0, 2], 6) == backend.fill(tokens, [0, 2], 6)


class TestRequestLimits:
    def test_empty_positions_rejected(self, backend):
        with pytest.raises(BridgeError, match="non-empty"):
            backend.fill(["the", "cat"], [], 3)

    def test_context_overflow_rejected(self, backend):
        tokens = ["the"] * 69 + [ENGINE_MASK]
        with pytest.raises(BridgeError, match="model positions"):
            backend.fill(tokens, [69], 3)

    def test_context_limit_is_models(self, backend):
        assert backend.model_max_positions == 64

    def test_stray_mask_marker_detected(self, backend):
        # A program token that happens to equal the model's own mask marker
        # would make per-position attribution ambiguous.
        tokens = [ENGINE_MASK, "the", ENGINE_MASK]
        with pytest.raises(BridgeError, match="mismatch"):
            backend.fill(tokens, [0], 3)


class TestBestFirstMerge:
    def test_products_and_order(self):
        per_position = [
            [("a", 0.5), ("b", 0.4)],
            [("x", 0.6), ("y", 0.3)],
        ]
        joints = _best_first_joints(per_position, 10)
        # [DERIVED] products: ax=.30, bx=.24, ay=.15, by=.12
        assert joints == [
            (("a", "x"), pytest.approx(0.30)),
            (("b", "x"), pytest.approx(0.24)),
            (("a", "y"), pytest.approx(0.15)),
            (("b", "y"), pytest.approx(0.12)),
        ]

    def test_limit_respected(self):
        per_position = [[("a", 0.5), ("b", 0.4)], [("x", 0.6), ("y", 0.3)]]
        assert len(_best_first_joints(per_position, 3)) == 3

    def test_frontier_ties_break_by_text(self):
        # All four joints tie at 0.25; once (a, x) is popped the frontier
        # holds (a, y) and (b, x) together and text order decides.
        per_position = [
            [("a", 0.5), ("b", 0.5)],
            [("x", 0.5), ("y", 0.5)],
        ]
        joints = _best_first_joints(per_position, 4)
        assert [texts for texts, _ in joints] == [
            ("a", "x"),
            ("a", "y"),
            ("b", "x"),
            ("b", "y"),
        ]

    def test_empty_axis_yields_nothing(self):
        assert _best_first_joints([[("a", 1.0)], []], 5) == []

    def test_single_axis_passthrough(self):
        per_position = [[("a", 0.7), ("b", 0.2)]]
        joints = _best_first_joints(per_position, 5)
        assert joints == [(("a",), 0.7), (("b",), 0.2)]
