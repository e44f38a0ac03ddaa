import pytest
from hypothesis import given, strategies as st

from seqnet.matching import SegmentMatch, expand_candidate
from seqnet.segmentation import (SegmentationParams, WindowRef, extract_query_segments,
                                 partition_windows, segment_count)
from seqnet.sequence import Sequence, Span


def seq(n):
    return Sequence.from_values([0.0] * n, id="x")


class TestParams:
    def test_window_is_half_lambda(self):
        assert SegmentationParams(20).window == 10
        assert SegmentationParams(21).window == 10

    @pytest.mark.parametrize("lam,shift", [(1, 0), (20, 10), (20, -1), (3, 1)])
    def test_invalid(self, lam, shift):
        with pytest.raises(ValueError):
            SegmentationParams(lam, shift)


class TestPartition:
    def test_exact_division(self):
        ws = partition_windows(seq(100), SegmentationParams(20))
        assert [w.start for w in ws] == list(range(1, 92, 10))

    def test_short_sequence(self):
        assert partition_windows(seq(9), SegmentationParams(20)) == []

    def test_remainder_dropped(self):
        ws = partition_windows(seq(25), SegmentationParams(20))
        assert [(w.start, w.end) for w in ws] == [(1, 10), (11, 20)]

    def test_optional_tail_window(self):
        ws = partition_windows(seq(25), SegmentationParams(20), tail=True)
        assert (ws[-1].start, ws[-1].end) == (16, 25)
        assert len(partition_windows(seq(20), SegmentationParams(20), tail=True)) == 2

    @given(st.integers(0, 200), st.integers(2, 40))
    def test_tiling(self, n, lam):
        p = SegmentationParams(lam)
        ws = partition_windows(seq(n), p)
        assert len(ws) == n // p.window
        covered = [i for w in ws for i in range(w.start, w.end + 1)]
        assert covered == list(range(1, len(ws) * p.window + 1))


@pytest.mark.parametrize("lam", [2, 3, 4, 7, 10, 21])
def test_every_long_span_contains_a_window(lam):
    # exhaustive over |X| <= 200: a span of length >= lam always holds a whole window,
    # even near the dropped remainder
    p = SegmentationParams(lam)
    for n in range(lam, 201, 7):
        ws = partition_windows(seq(n), p)
        for s in range(1, n - lam + 2):
            e = s + lam - 1
            assert any(s <= w.start and w.end <= e for w in ws), (n, s, e)


class TestSegments:
    def test_count_example(self):
        p = SegmentationParams(20, 2)
        segs = extract_query_segments(seq(50), p)
        assert len(segs) == 43 + 42 + 41 + 40 + 39 == 205
        assert len(segs) <= 5 * 50
        assert {s.length for s in segs} == set(range(8, 13))

    def test_no_shift_is_a_sliding_window(self):
        segs = extract_query_segments(seq(30), SegmentationParams(20))
        assert [(s.start, s.length) for s in segs] == [(i, 10) for i in range(1, 22)]

    def test_single_minimal_segment(self):
        segs = extract_query_segments(seq(8), SegmentationParams(20, 2))
        assert len(segs) == 1 and segs[0].length == 8

    def test_too_short(self):
        assert extract_query_segments(seq(7), SegmentationParams(20, 2)) == []

    @given(st.integers(0, 80), st.integers(2, 30), st.data())
    def test_count_formula_and_order(self, n, lam, data):
        p = SegmentationParams(lam, data.draw(st.integers(0, lam // 2 - 1)))
        segs = extract_query_segments(seq(n), p)
        assert len(segs) == segment_count(n, p) <= (2 * p.max_shift + 1) * n
        keys = [(s.start, s.length) for s in segs]
        assert keys == sorted(set(keys))
        brute = {(s, L) for s in range(1, n + 1) for L in range(p.window - p.max_shift,
                                                                 p.window + p.max_shift + 1)
                 if s + L - 1 <= n}
        assert set(keys) == brute


class TestExpandCandidate:
    def _m(self, a, b, c, l):
        return SegmentMatch(Span("q", a, b), WindowRef("x", c, l), 0.0)

    def test_worked_example(self):
        sqs, sqe, sxs, sxe = expand_candidate(self._m(11, 20, 21, 10), SegmentationParams(20),
                                              query_length=100, db_length=100)
        assert (sqs[0], sqs[-1]) == (1, 11)
        assert (sqe[0], sqe[-1]) == (20, 30)
        assert (sxs[0], sxs[-1]) == (11, 21)
        assert (sxe[0], sxe[-1]) == (31, 41)

    def test_clamped_to_sequences(self):
        sqs, sqe, sxs, sxe = expand_candidate(self._m(2, 11, 1, 10), SegmentationParams(20),
                                              query_length=15, db_length=25)
        assert sqs[0] == 1 and sqe[-1] == 15
        assert sxs[0] == 1 and sxe[-1] == 21
        sqs, sqe, sxs, sxe = expand_candidate(self._m(2, 11, 11, 10), SegmentationParams(20),
                                              query_length=15, db_length=25)
        assert sxe[-1] == 25

    def test_shift_widens_query_ranges(self):
        base = expand_candidate(self._m(31, 40, 21, 10), SegmentationParams(20), 100, 100)
        wide = expand_candidate(self._m(31, 40, 21, 10), SegmentationParams(20, 2), 100, 100)
        assert wide[0][0] == base[0][0] - 2 == 19
        assert wide[1][-1] == base[1][-1] + 2
        assert wide[2] == base[2] and wide[3] == base[3]
