import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfexplain.evaluation import (
    MethodStats,
    Rationale,
    Verdict,
    alignment,
    decide_win,
    report_table,
)
from cfexplain.ranking import RankedExplanations
from cfexplain.search import Explanation
from cfexplain.sedc import RemovalExplanation


def expl(indices, size=None, score=0.2):
    indices = frozenset(indices)
    return Explanation(
        substitution={i: (f"t{i}", f"r{i}") for i in sorted(indices)},
        flipped_score=score,
        size=size if size is not None else len(indices),
        token_indices=indices,
    )


def removal(indices, size=None, score=0.2):
    indices = frozenset(indices)
    return RemovalExplanation(
        removed={i: f"t{i}" for i in sorted(indices)},
        flipped_score=score,
        size=size if size is not None else len(indices),
        token_indices=indices,
    )


def ranked(*explanations):
    return RankedExplanations(tuple(explanations), truncated_to=max(len(explanations), 1))


def rationale(indices, diff_id="d1"):
    return Rationale(diff_id, frozenset(indices))


class TestAlignment:
    def test_full_overlap(self):
        assert alignment(expl({1, 2}), rationale({1, 2, 3}))

    def test_exact_half_counts(self):
        # 2 of 4 touched tokens inside the rationale: boundary inclusive
        assert alignment(expl({1, 2, 8, 9}), rationale({1, 2}))

    def test_below_half_fails(self):
        assert not alignment(expl({1, 8, 9}), rationale({1}))

    def test_no_overlap_fails(self):
        assert not alignment(expl({5, 6}), rationale({1, 2}))

    def test_rationale_denominator(self):
        e = expl({1})
        r = rationale({1, 2})
        assert alignment(e, r, denominator="rationale")        # 2*1 >= 2
        assert not alignment(e, rationale({1, 2, 3}), denominator="rationale")

    def test_empty_denominator_is_false(self):
        assert not alignment(expl({1}), rationale(set()), denominator="rationale")

    def test_unknown_denominator_rejected(self):
        with pytest.raises(ValueError):
            alignment(expl({1}), rationale({1}), denominator="union")

    @settings(max_examples=60, deadline=None)
    @given(
        touched=st.frozensets(st.integers(0, 15), min_size=1, max_size=8),
        attributed=st.frozensets(st.integers(0, 15), max_size=8),
    )
    def test_matches_integer_inequality(self, touched, attributed):
        got = alignment(expl(touched), rationale(attributed))
        assert got == (2 * len(touched & attributed) >= len(touched))


class TestDecideWin:
    def test_alignment_beats_size(self):
        # SEDC is smaller but unaligned; CFEX aligned wins
        cfex = ranked(expl({1, 2}, size=2))
        sedc = ranked(removal({9}, size=1))
        outcome = decide_win(cfex, sedc, rationale({1, 2}))
        assert outcome.verdicts == {"CFEX": Verdict.WIN, "SEDC": Verdict.LOSS}
        assert outcome.aligned == {"CFEX": True, "SEDC": False}

    def test_smaller_aligned_side_wins(self):
        cfex = ranked(expl({1}, size=1))
        sedc = ranked(removal({1, 2}, size=2))
        outcome = decide_win(cfex, sedc, rationale({1, 2}))
        assert outcome.verdicts["CFEX"] is Verdict.WIN
        assert outcome.verdicts["SEDC"] is Verdict.LOSS

    def test_equal_aligned_sizes_tie(self):
        cfex = ranked(expl({1}, size=1))
        sedc = ranked(removal({2}, size=1))
        outcome = decide_win(cfex, sedc, rationale({1, 2}))
        assert outcome.verdicts == {"CFEX": Verdict.TIE, "SEDC": Verdict.TIE}

    def test_neither_aligned_is_double_loss(self):
        cfex = ranked(expl({8}))
        sedc = ranked(removal({9}))
        outcome = decide_win(cfex, sedc, rationale({1}))
        assert outcome.verdicts == {"CFEX": Verdict.LOSS, "SEDC": Verdict.LOSS}

    def test_empty_side_loses_to_aligned_side(self):
        cfex = RankedExplanations((), truncated_to=5)
        sedc = ranked(removal({1}))
        outcome = decide_win(cfex, sedc, rationale({1}))
        assert outcome.verdicts == {"CFEX": Verdict.LOSS, "SEDC": Verdict.WIN}

    def test_best_aligned_size_is_minimum_over_top(self):
        cfex = ranked(expl({9}, size=1), expl({1, 2}, size=2))  # only size 2 aligned
        sedc = ranked(removal({1}, size=1))
        outcome = decide_win(cfex, sedc, rationale({1, 2}))
        assert outcome.verdicts["SEDC"] is Verdict.WIN

    def test_symmetry(self):
        a = ranked(expl({1}, size=1))
        b = ranked(removal({1, 2}, size=2))
        r = rationale({1, 2})
        forward = decide_win(a, b, r)
        backward = decide_win(b, a, r)
        assert forward.verdicts["CFEX"] == backward.verdicts["SEDC"]
        assert forward.verdicts["SEDC"] == backward.verdicts["CFEX"]

    def test_stats_use_full_lists_when_given(self):
        cfex_all = [expl({1}), expl({2, 3}), expl({4, 5, 6})]
        cfex = ranked(cfex_all[0])
        sedc = ranked(removal({1}))
        outcome = decide_win(
            cfex, sedc, rationale({1}),
            diff_id="d9", diff_size=40,
            cfex_all=cfex_all, sedc_all=[removal({1})],
        )
        assert outcome.diff_id == "d9"
        assert outcome.stats["CFEX"] == MethodStats(
            count=3, diff_size=40, avg_size=2.0, min_size=1, max_size=3)
        assert outcome.stats["SEDC"].count == 1

    def test_denominator_passes_through(self):
        cfex = ranked(expl({1}))
        sedc = ranked(removal({2, 9}))
        r = rationale({1, 2})
        strict = decide_win(cfex, sedc, r, denominator="rationale")
        assert strict.verdicts["CFEX"] is Verdict.WIN


class TestMethodStats:
    def test_empty(self):
        st_ = MethodStats.from_explanations([], 12)
        assert st_ == MethodStats(0, 12, None, None, None)

    def test_aggregates(self):
        st_ = MethodStats.from_explanations(
            [expl({1}), expl({2, 3}), expl({4, 5, 6, 7})], 30)
        assert (st_.count, st_.avg_size, st_.min_size, st_.max_size) == (3, 7 / 3, 1, 4)


class TestReportTable:
    def outcome(self, diff_id, cfex_items, sedc_items, rat):
        return decide_win(
            ranked(*cfex_items) if cfex_items else RankedExplanations((), 5),
            ranked(*sedc_items) if sedc_items else RankedExplanations((), 5),
            rat, diff_id=diff_id, diff_size=10,
        )

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            report_table([])

    def test_row_and_summary_shape(self):
        outcomes = [
            self.outcome("d1", [expl({1})], [removal({1, 2})], rationale({1, 2})),
            self.outcome("d2", [expl({5})], [removal({5})], rationale({5})),
        ]
        report = report_table(outcomes)
        lines = report.markdown.splitlines()
        assert lines[0] == "| Diff | Method | # Exp | Size | Avg | Min | Max | Wins |"
        assert lines[1].startswith("| --- |")
        assert lines[2] == "| d1 | CFEX | 1 | 10 | 1 | 1 | 1 | x |"
        assert lines[3] == "| d1 | SEDC | 1 | 10 | 2 | 2 | 2 |  |"
        assert "CFEX wins-or-ties 2/2" in report.markdown
        assert "SEDC wins-or-ties 1/2" in report.markdown
        assert report.data["summary"]["CFEX"] == {
            "wins_or_ties": 2, "total": 2, "wins": 1, "ties": 1, "losses": 0}

    def test_missing_method_renders_dash(self):
        outcomes = [self.outcome("d1", [], [removal({1})], rationale({1}))]
        report = report_table(outcomes)
        cfex_row = next(
            line for line in report.markdown.splitlines() if "| CFEX |" in line)
        assert "| - |" in cfex_row

    def test_avg_formatting_trims_zeros(self):
        outcomes = [
            self.outcome("d1", [expl({1}), expl({2, 3}, size=2)],
                         [removal({9})], rationale({1, 2, 3})),
        ]
        report = report_table(outcomes)
        cfex_row = next(
            line for line in report.markdown.splitlines() if "| CFEX |" in line)
        assert "| 1.5 |" in cfex_row

    def test_tie_marks_both(self):
        outcomes = [
            self.outcome("d1", [expl({1})], [removal({2})], rationale({1, 2})),
        ]
        report = report_table(outcomes)
        marked = [line for line in report.markdown.splitlines() if line.endswith("| x |")]
        assert len(marked) == 2

    def test_data_rows_mirror_markdown(self):
        outcomes = [
            self.outcome("d1", [expl({1})], [removal({1})], rationale({1})),
        ]
        data = report_table(outcomes).data
        assert [r["method"] for r in data["rows"]] == ["CFEX", "SEDC"]
        assert all(r["verdict"] == "Tie" for r in data["rows"])
