import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peakfdr.multitest import BHResult, PValueSeries, bh_reject
from peakfdr.oracles import bh_oracle, brute_force_bh


def _series(pvals):
    return PValueSeries(tuple(range(len(pvals))), np.asarray(pvals, dtype=np.float64))


class TestBhReject:
    def test_worked_example(self):
        # thresholds k*alpha/m are 0.0125, 0.025, 0.0375, 0.05; largest
        # passing k is 2, so the two smallest are rejected
        result = bh_reject(_series([0.01, 0.02, 0.04, 0.20]), 0.05)
        assert result.rejected == frozenset({0, 1})
        assert result.threshold == 0.02

    def test_all_ones_rejects_none(self):
        result = bh_reject(_series([1.0, 1.0, 1.0]), 0.05)
        assert result.rejected == frozenset()
        assert result.threshold is None

    def test_single_pvalue_is_plain_alpha_test(self):
        assert bh_reject(_series([0.04]), 0.05).rejected == frozenset({0})
        assert bh_reject(_series([0.06]), 0.05).rejected == frozenset()

    def test_ties_rejected_together(self):
        result = bh_reject(_series([0.01, 0.01, 0.5]), 0.05)
        assert result.rejected == frozenset({0, 1})

    def test_zero_pvalues_sort_first(self):
        result = bh_reject(_series([0.0, 0.9, 0.0]), 0.05)
        assert {0, 2} <= set(result.rejected)

    def test_empty_series(self):
        result = bh_reject(_series([]), 0.05)
        assert result == BHResult(frozenset(), None)

    def test_input_order_irrelevant(self):
        ids = tuple("abcdef")
        pvals = np.array([0.03, 0.001, 0.2, 0.011, 0.8, 0.04])
        base = bh_reject(PValueSeries(ids, pvals), 0.1)
        perm = [4, 2, 0, 5, 1, 3]
        shuffled = bh_reject(
            PValueSeries(tuple(ids[i] for i in perm), pvals[perm]), 0.1
        )
        assert base.rejected == shuffled.rejected
        assert base.threshold == shuffled.threshold

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            bh_reject(_series([0.01]), 0.0)
        with pytest.raises(ValueError):
            bh_reject(_series([0.01]), 1.0)

    def test_pvalue_validation(self):
        with pytest.raises(ValueError):
            _series([0.5, 1.2])
        with pytest.raises(ValueError):
            _series([-0.1])

    @settings(max_examples=300, deadline=None)
    @given(
        st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50),
        st.floats(0.01, 0.5),
    )
    def test_matches_brute_force(self, pvals, alpha):
        arr = np.asarray(pvals)
        got = bh_reject(_series(pvals), alpha)
        want_set, want_thr = brute_force_bh(arr, alpha)
        assert set(got.rejected) == want_set
        assert got.threshold == want_thr

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.floats(0.001, 1.0), min_size=2, max_size=30),
        st.integers(0, 29),
        st.floats(0.02, 0.3),
    )
    def test_lowering_a_pvalue_never_shrinks_rejections(self, pvals, pos, alpha):
        pos = pos % len(pvals)
        base = bh_reject(_series(pvals), alpha)
        lowered = list(pvals)
        lowered[pos] = lowered[pos] / 2.0
        more = bh_reject(_series(lowered), alpha)
        # every originally rejected id (other than the lowered one) stays
        assert set(base.rejected) - {pos} <= set(more.rejected)

    def test_brute_force_oracle_batch(self):
        report = bh_oracle(n_instances=1_000, seed=1212)
        assert report.passed, report.line()
