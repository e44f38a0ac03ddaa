"""Acceptance suite.

Each test checks one acceptance criterion and records a one-line verdict,
printed in the terminal summary (and to stdout when run with ``-s``).
"""

import itertools
import numpy as np
import pytest

import conftest
from oracles import all_sequences, oracle_matrix
from seqnet.baselines import build_mv_index, compare_pruning, space_matched_k
from seqnet.cli import main
from seqnet.distances import (KINDS, METRIC_KINDS, check_consistency, check_metric_axioms,
                              dtw, make_distance)
from seqnet.matching import brute_force_oracle, build_index, candidate_pairs
from seqnet.matching import query_type1, query_type2, query_type3
from seqnet.refnet import NetConfig, ReferenceNet
from seqnet.segmentation import SegmentationParams
from seqnet.sequence import Sequence
from seqnet.synthetic import clustered_windows, plant_motif, random_strings, random_walks

pytestmark = pytest.mark.slow

METRICS = sorted(METRIC_KINDS)
SYMBOLIC = {"hamming", "levenshtein"}


@pytest.fixture
def verdict(request):
    """Call with (number, name, ok, detail); records the line and returns ``ok``."""
    def record(number, name, ok, detail=""):
        line = f"[{number:>2}] {name}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def _series(rng, n, symbolic):
    if symbolic:
        return Sequence.from_string("".join(rng.choice(list("abc"), n)))
    return Sequence.from_values(rng.integers(0, 4, n).astype(float))


def _windows(kind, n, l, seed):
    if kind in SYMBOLIC:
        ds = random_strings(n, l, "ACGT", seed)
        return np.ascontiguousarray(np.stack([s.data for s in ds]))
    return clustered_windows(n, l, seed=seed)


# -- distances ----------------------------------------------------------------------

def test_01_consistency(verdict):
    rng = np.random.default_rng(1)
    details, ok = [], True
    for kind in KINDS:
        d = make_distance(kind, symbolic=kind in SYMBOLIC)
        lo = 1 if kind in ("dfd", "dtw") else 0
        found = 0
        for _ in range(1000):
            n = int(rng.integers(lo, 13))
            m = n if d.equal_length else int(rng.integers(lo, 13))
            found += len(check_consistency(d, _series(rng, n, d.symbolic),
                                           _series(rng, m, d.symbolic)))
        ok &= found == 0
        details.append(f"{kind}={found}")
    assert verdict(1, "consistency, 1000 pairs per distance", ok,
                   "violations " + " ".join(details))


def test_02_metric_axioms(verdict):
    rng = np.random.default_rng(2)
    details, ok = [], True
    for kind in METRICS:
        d = make_distance(kind)
        trips = []
        for _ in range(10_000):
            lo = 1 if kind == "dfd" else 0
            lens = [int(rng.integers(1, 7))] * 3 if d.equal_length else rng.integers(lo, 7, 3)
            trips.append([Sequence.from_values(rng.normal(size=int(n))) for n in lens])
        found = len(check_metric_axioms(d, trips))
        ok &= found == 0
        details.append(f"{kind}={found}")
    d = make_distance("dtw")
    trials = 0
    witness = None
    while trials < 100_000 and witness is None:
        trials += 1
        trip = [Sequence.from_values(rng.integers(0, 4, int(rng.integers(1, 5))).astype(float))
                for _ in range(3)]
        tri = [v for v in check_metric_axioms(d, [trip]) if v.kind == "triangle"]
        witness = tri[0] if tri else None
    ok &= witness is not None and witness.replay(d)
    assert verdict(2, "metric axioms", ok,
                   "violations " + " ".join(details) + f"; dtw triangle break after {trials} trials")


def test_03_dp_matches_exhaustive_oracle(verdict):
    groups = {False: all_sequences((0.0, 1.0, 2.0), 5),
              True: all_sequences((97.0, 98.0, 99.0), 5)}
    worst, pairs = 0.0, 0
    for kind in KINDS:
        for symbolic, by_len in groups.items():
            d = make_distance(kind, symbolic)
            for n, m in itertools.product(by_len, repeat=2):
                if d.equal_length and n != m:
                    continue
                if kind in ("dfd", "dtw") and (n == 0 or m == 0):
                    continue
                A = by_len[n][:, :, None]
                B = by_len[m][:, :, None]
                want = oracle_matrix(kind, A, B, symbolic)
                got = np.array([d.one_to_many(a, B) if m else [d.raw(a, b) for b in B]
                                for a in A]).reshape(want.shape)
                err = np.abs(got - want)
                if kind in ("hamming", "levenshtein") or symbolic:
                    assert np.array_equal(got, want), (kind, symbolic, n, m)
                worst = max(worst, float(err.max()))
                pairs += want.size
    ok = worst <= 1e-9
    assert verdict(3, "DP equals exhaustive oracle", ok,
                   f"{pairs} pairs, max abs error {worst:.1e}")


def test_04_dtw_anecdote(verdict):
    v = dtw(Sequence.from_string("111222333"), Sequence.from_string("123"))
    assert verdict(4, "dtw('111222333', '123') == 0", v == 0.0, f"got {v!r}")


# -- reference net ------------------------------------------------------------------

class _Pooled:
    """Distance over indices into a precomputed matrix of a real distance."""

    declared_metric = True

    def __init__(self, kind, matrix):
        self.kind = kind
        self.matrix = matrix

    def __call__(self, i, j):
        return float(self.matrix[i, j])

    raw = __call__


def test_05_net_exactness(verdict):
    rng = np.random.default_rng(5)
    details, ok = [], True
    for kind in METRICS:
        d = make_distance(kind, symbolic=kind in SYMBOLIC)
        w = _windows(kind, 5000, 8, seed=50)
        net = ReferenceNet(d)
        for i, x in enumerate(w):
            net.insert(i, x)
        ok &= net.validate().ok
        agree = 0
        for _ in range(1000):
            base = w[int(rng.integers(len(w)))]
            if d.symbolic:
                q = base.copy()
                q[rng.integers(8)] = float(rng.choice([65, 67, 71, 84]))
            else:
                q = base + rng.normal(0, 0.1, base.shape)
            dist = d.one_to_many(q, w)
            eps = float(rng.uniform(0, 0.3) * dist.max())
            if d.symbolic:
                eps = float(np.floor(eps))
            agree += net.range_query(q, eps).ids == [int(i) for i in np.nonzero(dist <= eps)[0]]
        ok &= agree == 1000

        # churn: 10,000 inserts and deletes over a pool, validating after each
        pool = _windows(kind, 200, 8, seed=51)
        matrix = np.array([d.one_to_many(x, pool) for x in pool])
        churn = ReferenceNet(_Pooled(kind, matrix), NetConfig(1.0, 5))
        live, ops, clean = set(), 0, 0
        while ops < 10_000:
            if not live or rng.random() < 1 - len(live) / 120:
                c = int(rng.integers(len(pool)))
                if c in live:
                    continue
                churn.insert(c, c)
                live.add(c)
            else:
                c = sorted(live)[int(rng.integers(len(live)))]
                churn.delete(c)
                live.discard(c)
            ops += 1
            clean += churn.validate().ok
        ok &= clean == ops
        details.append(f"{kind} {agree}/1000 queries, {clean}/{ops} validations")
    assert verdict(5, "reference net exactness", ok, "; ".join(details))


def test_06_space_linearity(verdict):
    ds = random_walks(1, 10_000 * 8, seed=6)
    w = ds.sequences[0].data.reshape(-1, 8, 1)
    w = np.ascontiguousarray(w - w.mean(axis=1, keepdims=True))
    d = make_distance("euclidean")
    net = ReferenceNet(d, NetConfig(1.0, 5))
    sizes, entries, nodes, parents = (1000, 5000, 10_000), [], [], []
    for i, x in enumerate(w):
        net.insert(i, x)
        if i + 1 in sizes:
            s = net.stats()
            entries.append(s.entries)
            nodes.append(s.nodes)
            parents.append(s.avg_parents)
    x = np.array(sizes, dtype=float)
    y = np.array(entries, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    ratios = y / (slope * x + intercept)
    origin = y / (float((x * y).sum() / (x * x).sum()) * x)
    ok = (nodes == list(sizes) and bool(np.all(ratios <= 1.15)) and bool(np.all(ratios >= 1 / 1.15))
          and max(parents) <= 5)
    assert verdict(6, "space linearity", ok,
                   f"entries {entries}, least-squares fit ratios {np.round(ratios, 3).tolist()} "
                   f"(through origin {np.round(origin, 3).tolist()}), "
                   f"avg parents {np.round(parents, 2).tolist()}")


def test_07_pruning(verdict):
    details, ok = [], True
    for kind in ("euclidean", "erp", "dfd"):
        d = make_distance(kind)
        all_w = clustered_windows(10_050, 16, seed=70)
        w, queries = np.ascontiguousarray(all_w[:10_000]), list(all_w[10_000:])
        net = ReferenceNet(d)
        for i, x in enumerate(w):
            net.insert(i, x)
        mv = build_mv_index(w, space_matched_k(net, len(w)), d, seed=7)
        top = max(float(d.one_to_many(q, w).max()) for q in queries)
        radii = [f * top for f in (0.01, 0.02, 0.05, 0.1)]
        rows = compare_pruning(w, queries, radii, d, net, mv)   # raises on any mismatch
        frac = {(r.radius, r.method): 1 - r.alpha for r in rows}
        for r in radii:
            ok &= frac[(r, "refnet")] < 0.5 and frac[(r, "refnet")] < frac[(r, "mv")]
        details.append(f"{kind} k={mv.k} net/mv " + " ".join(
            f"{frac[(r, 'refnet')]:.3f}/{frac[(r, 'mv')]:.3f}" for r in radii))
    assert verdict(7, "pruning at radii up to 10% of max", ok, "; ".join(details))


# -- matching ------------------------------------------------------------------------

def test_08_filter_completeness(verdict):
    lam = 16
    details, ok = [], True
    for kind in METRICS:
        d = make_distance(kind, symbolic=kind in SYMBOLIC)
        eps = 4.0 if d.symbolic else 2.0
        covered = 0
        for seed in range(200):
            inst = plant_motif(d, lam, eps, seed=seed)
            qs, xs = inst.query_span, inst.db_span
            hits = candidate_pairs(build_index(inst.dataset, SegmentationParams(lam), d),
                                   inst.query, eps, 0)
            covered += any(m.window.seq_id == xs.seq_id and xs.start <= m.window.start
                           and m.window.end <= xs.end and m.segment is not None
                           and qs.start <= m.segment.start and m.segment.end <= qs.end
                           for m in hits)
        ok &= covered == 200
        details.append(f"{kind} {covered}/200")
    assert verdict(8, "filter finds every planted motif", ok, ", ".join(details))


def _small_instance(kind, rng):
    n_x = int(rng.integers(1, 3))
    qlen = int(rng.integers(8, 41))
    if kind in SYMBOLIC:
        ds = random_strings(n_x, (8, 40), "ab", int(rng.integers(1 << 30)))
        q = Sequence.from_string("".join(rng.choice(list("ab"), qlen)), "q")
        return ds, q, make_distance(kind, symbolic=True)
    ds = random_walks(n_x, (8, 40), seed=int(rng.integers(1 << 30)))
    q = Sequence.from_values(np.cumsum(rng.normal(size=qlen)), "q")
    return ds, q, make_distance(kind)


def test_09_query_types(verdict):
    rng = np.random.default_rng(9)
    agree = {1: 0, 2: 0, 3: 0}
    n = 100
    for t in range(n):
        kind = METRICS[t % len(METRICS)]
        shift = t % 3
        ds, q, d = _small_instance(kind, rng)
        p = SegmentationParams(8, shift)
        idx = build_index(ds, p, d)
        nearest = brute_force_oracle(ds, q, None, 8, shift, 3, d)
        near = nearest.distance
        # a radius with a moderate number of hits
        eps = near + (0 if d.symbolic else 0.5) + (2 if d.symbolic else 0)
        want1 = brute_force_oracle(ds, q, eps, 8, shift, 1, d)
        got1 = query_type1(idx, q, eps, shift)
        agree[1] += [g.key() for g in got1] == [w.key() for w in want1]
        want2 = brute_force_oracle(ds, q, eps, 8, shift, 2, d)
        got2 = query_type2(idx, q, eps, shift)
        agree[2] += (got2[0].length if got2 else 0) == (want2[0].length if want2 else 0)
        eps_inc = 0.25 if d.symbolic else 0.05
        got3 = query_type3(idx, q, eps_inc, max_shift=shift)
        agree[3] += abs(got3.distance - near) <= eps_inc and got3.distance >= near - 1e-12
    ok = all(v == n for v in agree.values())
    assert verdict(9, "query types against brute force", ok,
                   f"type I {agree[1]}/{n}, type II {agree[2]}/{n}, type III {agree[3]}/{n}")


# -- bench ----------------------------------------------------------------------------

@pytest.fixture(scope="module")
def bench_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("bench")
    data = root / "walks.csv"
    assert main(["generate", "walks", "--count", "12", "--length", "160", "--clusters", "3",
                 "--seed", "11", "--out", str(data)]) == 0
    outs = []
    for name in ("first", "second"):
        out = root / name
        assert main(["bench", "--dataset", str(data), "--format", "timeseries",
                     "--distance", "erp", "--lam", "16", "--queries", "20", "--seed", "3",
                     "--out-dir", str(out)]) == 0
        outs.append(out)
    return outs


def test_10_bench_boundaries(verdict, bench_runs):
    lines = (bench_runs[0] / "consecutive.csv").read_text().splitlines()[2:]
    rows = [tuple(float(v) for v in line.split(",")) for line in lines]
    top = max(rows)
    ok = top[1] == 1.0 and all(c <= u for _, u, c in rows)
    assert verdict(10, "unique and consecutive window fractions", ok,
                   f"unique at max radius {top[1]}, rows {len(rows)}")


def test_11_bench_determinism(verdict, bench_runs):
    names = ("pruning.csv", "histogram.csv", "consecutive.csv")
    same = [(bench_runs[0] / f).read_bytes() == (bench_runs[1] / f).read_bytes() for f in names]
    assert verdict(11, "bench output is byte-identical across runs", all(same),
                   ", ".join(f"{f} {'same' if s else 'differs'}" for f, s in zip(names, same)))
