"""Subsequence matching on top of the reference net.

Database windows are indexed once. A query is cut into segments, each
segment is range-queried against the windows, and every hit is expanded
into full subsequence pairs that are verified with the real distance.

Segment lengths come from one of two coverage policies:

``"shift"``
    lengths ``l - λ₀ .. l + λ₀`` only. This is the classic filter; it is
    complete for equal-length distances but can miss pairs under distances
    that let a window match a much shorter or longer piece of the query.
``"complete"`` (default)
    every length a window could be matched to within ``ε``: just ``l`` for
    equal-length distances, a band around ``l`` whose width is bounded by the
    cheapest gap for the edit family, and every length for DFD. With it all
    three query types are exact.
"""

from __future__ import annotations

import csv
import io
import math
import shlex
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .distances import COUPLING_KINDS, DistanceSpec
from .errors import BudgetExceededError, EmptyIndexError, IndexFormatError, KindMismatchError
from .refnet import NetConfig, ReferenceNet
from .segmentation import SegmentationParams, WindowRef, partition_windows
from .sequence import SYMBOL, Dataset, Sequence, Span

SHIFT = "shift"
COMPLETE = "complete"
COVERAGES = (SHIFT, COMPLETE)

ORACLE_BUDGET = 5_000_000
CSV_HEADER = ("query_id", "db_seq_id", "sq_start", "sq_end", "sx_start", "sx_end", "distance")


@dataclass(frozen=True, order=True)
class SubsequencePair:
    """Query span ``sq``, database span ``sx`` and their distance."""

    sx: Span
    sq: Span
    distance: float = field(compare=False)

    @property
    def length(self) -> int:
        """The quantity maximized by longest-match queries: ``min(|SQ|, |SX|)``."""
        return min(self.sq.length, self.sx.length)

    def key(self) -> tuple:
        return (self.sx.seq_id, self.sq.start, self.sq.end, self.sx.start, self.sx.end)


@dataclass(frozen=True)
class SegmentMatch:
    """A (query segment, window) pair within ``ε``.

    ``segment`` is ``None`` for the empty segment (edit-family distances at
    large ``ε``). ``distance`` is ``None`` when the net accepted the window
    from a bound without computing it.
    """

    segment: Span | None
    window: WindowRef
    distance: float | None


@dataclass(frozen=True)
class NearestMatch:
    """Minimum-distance pairs and the radius tier at which they were verified."""

    pairs: list
    epsilon: float

    @property
    def distance(self) -> float:
        return self.pairs[0].distance if self.pairs else math.inf


@dataclass
class SubseqIndex:
    dataset: Dataset
    params: SegmentationParams
    distance: DistanceSpec
    net: ReferenceNet
    windows: dict = field(default_factory=dict)   # net id -> WindowRef

    @property
    def build_computations(self) -> int:
        return self.net.build_computations

    def sequence(self, seq_id: str) -> Sequence:
        return self.dataset[seq_id]

    def window_ids(self) -> list:
        return sorted(self.windows)

    def window_array(self, ids: Iterable | None = None) -> np.ndarray:
        """Window payloads stacked as ``(N, l, dim)`` in ``ids`` order."""
        ids = self.window_ids() if ids is None else list(ids)
        l, dim = self.params.window, self.dataset.dim
        if not ids:
            return np.empty((0, l, dim))
        return np.ascontiguousarray(np.stack([self.net.payload(i) for i in ids]))


def _check_compatible(d: DistanceSpec, kind: str) -> None:
    if (kind == SYMBOL) != d.symbolic:
        raise KindMismatchError(f"{d.kind} (symbolic={d.symbolic}) used on {kind} data")


def _window_payloads(ds: Dataset, p: SegmentationParams):
    nid = 0
    for x in ds:
        for w in partition_windows(x, p):
            yield nid, w, x.data[w.start - 1:w.end]
            nid += 1


def build_index(ds: Dataset, p: SegmentationParams, d: DistanceSpec,
                c: NetConfig | None = None) -> SubseqIndex:
    """Partition every sequence into windows and insert them all into a new net."""
    if len(ds):
        _check_compatible(d, ds.kind)
    net = ReferenceNet(d, c)
    idx = SubseqIndex(ds, p, d, net)
    for nid, w, payload in _window_payloads(ds, p):
        net.insert(nid, payload)
        idx.windows[nid] = w
    return idx


# -- filter -------------------------------------------------------------------

def _min_gap_cost(d: DistanceSpec, arrays: Iterable[np.ndarray]) -> float:
    if d.kind == "levenshtein":
        return 1.0
    best = math.inf
    for a in arrays:
        if a.shape[0] == 0:
            continue
        g = d.gap_array(a.shape[1])
        if d.symbolic:
            cost = float(np.min(a[:, 0] != g[0]))
        else:
            cost = float(np.min(np.sqrt(((a - g) ** 2).sum(axis=1))))
        best = min(best, cost)
    return best


def segment_lengths(idx: SubseqIndex, q: Sequence, eps: float, max_shift: int,
                    coverage: str = COMPLETE) -> list[int]:
    """Query segment lengths searched by the filter (0 denotes the empty segment)."""
    if coverage not in COVERAGES:
        raise ValueError(f"coverage must be one of {COVERAGES}")
    l, n = idx.params.window, len(q)
    d = idx.distance
    if d.equal_length:
        return [l] if l <= n else []
    lengths = set(range(max(1, l - max_shift), l + max_shift + 1))
    if coverage == COMPLETE:
        if d.kind in COUPLING_KINDS:
            lengths.update(range(1, n + 1))
        else:
            # k unmatched elements cost at least k times the cheapest gap
            cmin = _min_gap_cost(d, [q.data] + [x.data for x in idx.dataset])
            k = n if cmin == 0 else min(n, math.floor(eps / cmin + 1e-9))
            lengths.update(range(max(0, l - k), l + k + 1))
    return sorted(L for L in lengths if L <= n)


def filter_segments(idx: SubseqIndex, q: Sequence, eps: float, max_shift: int | None = None,
                    coverage: str = COMPLETE) -> tuple[list[SegmentMatch], int]:
    """Range-query every segment; returns the hits and the distance computations spent."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    shift = idx.params.max_shift if max_shift is None else max_shift
    SegmentationParams(idx.params.min_length, shift)  # validates the shift
    if not idx.windows:
        return [], 0
    _check_compatible(idx.distance, q.kind)
    if q.dim != idx.dataset.dim:
        raise KindMismatchError(f"query dimension {q.dim}, index {idx.dataset.dim}")
    out, work = [], 0
    data = q.data
    for L in segment_lengths(idx, q, eps, shift, coverage):
        starts = [1] if L == 0 else range(1, len(q) - L + 2)
        for s in starts:
            res = idx.net.range_query(data[s - 1:s - 1 + L], eps)
            work += res.computations
            span = None if L == 0 else Span(q.id, s, s + L - 1)
            for wid in res.ids:
                out.append(SegmentMatch(span, idx.windows[wid], res.distances.get(wid)))
    return out, work


def candidate_pairs(idx: SubseqIndex, q: Sequence, eps: float, max_shift: int | None = None,
                    coverage: str = COMPLETE) -> list[SegmentMatch]:
    """All (segment, window) pairs within ``eps``."""
    return filter_segments(idx, q, eps, max_shift, coverage)[0]


def expand_candidate(m: SegmentMatch, p: SegmentationParams, query_length: int,
                     db_length: int) -> tuple[range, range, range, range]:
    """Local span ranges around one hit: (SQ starts, SQ ends, SX starts, SX ends).

    All bounds are clamped to the sequences. The query ranges reach one
    window plus the shift past the segment, the database ranges one window
    before the window start and up to ``λ`` after it.
    """
    l, s, lam = p.window, p.max_shift, p.min_length
    c = m.window.start
    if m.segment is None:
        a, b = 1, 0
    else:
        a, b = m.segment.start, m.segment.end
    sq_starts = range(max(1, a - l - s), max(1, a) + 1)
    sq_ends = range(min(max(b, 1), query_length), min(query_length, b + l + s) + 1)
    sx_starts = range(max(1, c - l), c + 1)
    sx_ends = range(min(c + l, db_length), min(db_length, c + lam) + 1)
    return sq_starts, sq_ends, sx_starts, sx_ends


# -- verification ---------------------------------------------------------------

def _hits_by_sequence(matches: Iterable[SegmentMatch], qlen: int) -> dict:
    by_seq: dict = {}
    for m in matches:
        if m.segment is None:
            qa, qb = qlen + 1, 0   # the empty segment sits inside every span
        else:
            qa, qb = m.segment.start, m.segment.end
        by_seq.setdefault(m.window.seq_id, set()).add((qa, qb, m.window.start, m.window.end))
    return by_seq


def _regions(x_len: int, windows: list[WindowRef], hit_starts: set) -> list[tuple[int, int]]:
    """Maximal database intervals that contain a hit window and no other window."""
    regions = set()
    for h in windows:
        if h.start not in hit_starts:
            continue
        lo, hi = 1, x_len
        for w in windows:
            if w.start in hit_starts:
                continue
            if w.start < h.start:
                lo = max(lo, w.start + 1)
            elif w.start > h.start:
                hi = min(hi, w.end - 1)
        regions.add((lo, hi))
    return sorted(regions)


def _verify(idx: SubseqIndex, q: Sequence, matches: list[SegmentMatch], eps: float, shift: int,
            max_length: int | None = None, longest: bool = False, restrict: bool = False):
    """Verify every pair implied by the hits.

    A pair is a candidate when its SX contains a hit window whose hit segment
    lies inside SQ. With ``longest`` only pairs of maximal ``min(|SQ|, |SX|)``
    are kept and start pairs that cannot beat the best are skipped; with
    ``restrict`` SX must also avoid every window that produced no hit.
    """
    d = idx.distance
    lam = idx.params.min_length
    qd, qlen = q.data, len(q)
    found: list = []
    best_len = 0
    for seq_id, hits in sorted(_hits_by_sequence(matches, qlen).items()):
        x = idx.sequence(seq_id)
        xd, xlen = x.data, len(x)
        hits = sorted(hits)
        if restrict:
            hit_starts = {h[2] for h in hits}
            regions = _regions(xlen, partition_windows(x, idx.params), hit_starts)
        else:
            regions = [(1, xlen)]
        for lo, hi in regions:
            starts = []
            for sa in range(1, qlen - lam + 2):
                for xs in range(lo, hi - lam + 2):
                    cap = min(qlen - sa + 1, hi - xs + 1)
                    starts.append((cap, sa, xs))
            if longest:
                starts.sort(key=lambda t: (-t[0], t[1], t[2]))
            for cap, sa, xs in starts:
                if longest and cap < best_len:
                    break
                rel = [h for h in hits if h[0] >= sa and h[2] >= xs and h[3] <= hi]
                if not rel:
                    continue
                # earliest SX end that covers a hit, per SQ end
                need = np.full(qlen + 2, np.inf)
                for qa, qb, xc, xe in rel:
                    k = max(qb, sa)
                    if xe < need[k]:
                        need[k] = xe
                need = np.minimum.accumulate(need)
                x_hi = hi if max_length is None else min(hi, xs + max_length - 1)
                M = d.prefix_matrix(qd[sa - 1:], xd[xs - 1:x_hi])
                qe = np.arange(sa, qlen + 1)[:, None]
                xe = np.arange(xs, x_hi + 1)[None, :]
                lq, lx = qe - sa + 1, xe - xs + 1
                ok = ((M <= eps) & (lq >= lam) & (lx >= lam) & (np.abs(lq - lx) <= shift)
                      & (xe >= need[qe]))
                if longest:
                    if not ok.any():
                        continue
                    v = np.where(ok, np.minimum(lq, lx), 0)
                    top = int(v.max())
                    if top < best_len:
                        continue
                    if top > best_len:
                        best_len, found = top, []
                    ok &= v == top
                for i, j in zip(*np.nonzero(ok)):
                    found.append(SubsequencePair(Span(seq_id, xs, xs + int(j)),
                                                 Span(q.id, sa, sa + int(i)), float(M[i, j])))
    unique = {p.key(): p for p in found}
    return [unique[k] for k in sorted(unique)]


def _shift_of(idx, max_shift):
    shift = idx.params.max_shift if max_shift is None else max_shift
    SegmentationParams(idx.params.min_length, shift)
    return shift


def query_type1(idx: SubseqIndex, q: Sequence, eps: float, max_shift: int | None = None,
                coverage: str = COMPLETE, max_length: int | None = None) -> list[SubsequencePair]:
    """All similar pairs: ``|SQ|, |SX| >= λ``, ``||SQ| - |SX|| <= λ₀``, distance ``<= eps``.

    ``max_length`` optionally caps ``|SX|``; by default pairs of any length
    are returned, which can be a very large set.
    """
    shift = _shift_of(idx, max_shift)
    matches, _ = filter_segments(idx, q, eps, shift, coverage)
    if not matches:
        return []
    return _verify(idx, q, matches, eps, shift, max_length)


def query_type2(idx: SubseqIndex, q: Sequence, eps: float, max_shift: int | None = None,
                coverage: str = COMPLETE) -> list[SubsequencePair]:
    """Similar pairs of maximal ``min(|SQ|, |SX|)``; empty when none exist.

    SX is confined to stretches of the database sequence free of windows that
    missed the filter: under a consistent distance every window inside a
    similar SX produces a hit. Longer start pairs are verified first.
    """
    shift = _shift_of(idx, max_shift)
    matches, _ = filter_segments(idx, q, eps, shift, coverage)
    if not matches:
        return []
    return _verify(idx, q, matches, eps, shift, longest=True, restrict=True)


def sample_window_distances(idx: SubseqIndex, pairs: int = 1000, seed: int = 0) -> np.ndarray:
    """Distances between ``pairs`` random window pairs (seeded)."""
    ids = idx.window_ids()
    if len(ids) < 2:
        return np.zeros(0)
    rng = np.random.default_rng(seed)
    a = rng.integers(0, len(ids), pairs)
    b = rng.integers(0, len(ids), pairs)
    raw = idx.distance.raw
    return np.array([raw(idx.net.payload(ids[i]), idx.net.payload(ids[j])) for i, j in zip(a, b)])


def default_eps_inc(idx: SubseqIndex, seed: int = 0) -> float:
    """5% of the smallest nonzero sampled window distance (1.0 if all are zero)."""
    dist = sample_window_distances(idx, seed=seed)
    nz = dist[dist > 0]
    return 0.05 * float(nz.min()) if nz.size else 1.0


def query_type3(idx: SubseqIndex, q: Sequence, eps_inc: float | None = None,
                eps_hint: float | None = None, max_shift: int | None = None,
                coverage: str = COMPLETE, seed: int = 0) -> NearestMatch:
    """Minimum-distance pairs under the length constraints.

    Binary search finds the smallest radius (to within ``eps_inc``) at which
    the filter reports a hit. The radius then grows in tiers, the step
    starting at ``eps_inc`` and doubling, until some pair verifies; all pairs
    at the minimum verified distance are returned with the tier radius.
    """
    if not idx.windows:
        raise EmptyIndexError("the index holds no windows")
    lam = idx.params.min_length
    if len(q) < lam or all(len(x) < lam for x in idx.dataset):
        raise ValueError(f"no subsequence pair of length >= {lam} exists")
    shift = _shift_of(idx, max_shift)
    if eps_inc is None:
        eps_inc = default_eps_inc(idx, seed)
    if not eps_inc > 0:
        raise ValueError("eps_inc must be positive")

    def hits(e):
        return filter_segments(idx, q, e, shift, coverage)[0]

    hi = eps_hint
    if hi is None:
        sample = sample_window_distances(idx, seed=seed)
        hi = float(sample.max()) if sample.size else 0.0
    hi = max(hi, eps_inc)
    while not hits(hi):
        hi *= 2
    lo = 0.0
    if hits(lo):
        hi = lo
    while hi - lo > eps_inc:
        mid = (lo + hi) / 2
        if hits(mid):
            hi = mid
        else:
            lo = mid
    eps, step = hi, eps_inc
    while True:
        matches = hits(eps)
        pairs = _verify(idx, q, matches, eps, shift) if matches else []
        if pairs:
            best = min(p.distance for p in pairs)
            return NearestMatch([p for p in pairs if p.distance == best], eps)
        eps += step
        step *= 2


# -- brute force ------------------------------------------------------------------

def _oracle_cost(ds: Dataset, qlen: int, lam: int) -> int:
    nq = max(0, qlen - lam + 1)
    return sum(nq * nq * max(0, len(x) - lam + 1) ** 2 for x in ds)


def brute_force_oracle(ds: Dataset, q: Sequence, eps: float | None, lam: int, max_shift: int,
                       qtype: int, d: DistanceSpec, budget: int = ORACLE_BUDGET):
    """Answer a query by evaluating every admissible (SQ, SX) pair directly.

    ``qtype`` 1 returns all similar pairs, 2 the pairs of maximal
    ``min(|SQ|, |SX|)``, 3 a :class:`NearestMatch` (``eps`` ignored).
    Raises :class:`BudgetExceededError` above ``budget`` pair evaluations.
    """
    if qtype not in (1, 2, 3):
        raise ValueError("qtype must be 1, 2 or 3")
    cost = _oracle_cost(ds, len(q), lam)
    if cost > budget:
        raise BudgetExceededError(f"about {cost} pair evaluations exceed the budget of {budget}")
    if len(ds):
        _check_compatible(d, ds.kind)
    qd, qlen = q.data, len(q)
    pairs = []
    for x in ds:
        xd, xlen = x.data, len(x)
        for sa in range(1, qlen + 1):
            for qe in range(sa + lam - 1, qlen + 1):
                lq = qe - sa + 1
                sq = qd[sa - 1:qe]
                for lx in range(max(lam, lq - max_shift), lq + max_shift + 1):
                    if d.equal_length and lx != lq:
                        continue
                    for xs in range(1, xlen - lx + 2):
                        v = d.raw(sq, xd[xs - 1:xs - 1 + lx])
                        if qtype == 3 or v <= eps:
                            pairs.append(SubsequencePair(Span(x.id, xs, xs + lx - 1),
                                                         Span(q.id, sa, qe), v))
    pairs.sort(key=SubsequencePair.key)
    if qtype == 1:
        return pairs
    if qtype == 2:
        if not pairs:
            return []
        top = max(p.length for p in pairs)
        return [p for p in pairs if p.length == top]
    if not pairs:
        return NearestMatch([], math.inf)
    best = min(p.distance for p in pairs)
    return NearestMatch([p for p in pairs if p.distance == best], best)


# -- serialization ---------------------------------------------------------------

def write_pairs_csv(pairs: Iterable[SubsequencePair], query_id: str, fh=None) -> str:
    """Write result rows (with header) to ``fh``; also returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in pairs:
        w.writerow([query_id, p.sx.seq_id, p.sq.start, p.sq.end, p.sx.start, p.sx.end,
                    repr(float(p.distance))])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def index_to_text(idx: SubseqIndex, dataset_path: str, fmt: str) -> str:
    """Serialize the net; the payload line records how to reload the windows."""
    ref = shlex.join([f"lambda={idx.params.min_length}", f"shift={idx.params.max_shift}",
                      f"format={fmt}", f"dims={idx.dataset.dim}", f"dataset={dataset_path}"])
    return idx.net.to_text(ref)


def payload_fields(text: str) -> dict:
    """Parse the payload line of a serialized index."""
    for line in reversed(text.splitlines()):
        if line.startswith("payload"):
            try:
                return dict(tok.split("=", 1) for tok in shlex.split(line[len("payload"):]))
            except ValueError as exc:
                raise IndexFormatError(f"bad payload line: {exc}") from exc
    raise IndexFormatError("missing payload line")


def index_from_text(text: str, ds: Dataset, d: DistanceSpec) -> SubseqIndex:
    """Rebuild an index over ``ds``; the net is re-validated before use."""
    fields_ = payload_fields(text)
    try:
        p = SegmentationParams(int(fields_["lambda"]), int(fields_.get("shift", 0)))
    except (KeyError, ValueError) as exc:
        raise IndexFormatError(f"bad segmentation fields: {exc}") from exc
    if len(ds):
        _check_compatible(d, ds.kind)
    windows, payloads = {}, {}
    for nid, w, payload in _window_payloads(ds, p):
        windows[nid] = w
        payloads[nid] = payload
    try:
        net, _ = ReferenceNet.from_text(text, d, payloads)
    except KeyError as exc:
        raise IndexFormatError(f"index names window {exc} missing from the dataset") from exc
    if set(net.ids()) != set(windows):
        raise IndexFormatError("index windows do not match the dataset")
    return SubseqIndex(ds, p, d, net, windows)
