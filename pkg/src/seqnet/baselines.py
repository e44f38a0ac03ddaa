"""Linear scan and Maximum-Variance reference indexing, with pruning accounting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence as Seq

import numpy as np

from .distances import INTEGER_KINDS, DistanceSpec
from .errors import ResultMismatchError
from .refnet import ReferenceNet


@dataclass
class WorkCounter:
    """Distance computations spent on one query against ``total`` windows."""

    computations: int = 0
    total: int = 0

    @property
    def alpha(self) -> float:
        """Pruning ratio: fraction of windows never compared with the query."""
        return 1.0 - self.computations / self.total if self.total else 0.0


def linear_scan_range(windows: np.ndarray, q: np.ndarray, eps: float,
                      d: DistanceSpec) -> tuple[list, WorkCounter]:
    """Ids (row indices) of every window within ``eps`` of ``q``."""
    n = len(windows)
    if n == 0:
        return [], WorkCounter(0, 0)
    dist = d.one_to_many(q, windows)
    return [int(i) for i in np.nonzero(dist <= eps)[0]], WorkCounter(n, n)


@dataclass
class MVIndex:
    """``k`` reference windows and the full window-to-reference distance table."""

    references: list          # row indices into ``windows``
    table: np.ndarray         # (N, k)
    windows: np.ndarray
    distance: DistanceSpec

    @property
    def k(self) -> int:
        return len(self.references)


def mv_select_references(windows: np.ndarray, k: int, d: DistanceSpec, sample_size: int = 1000,
                         seed: int = 0, pool_size: int = 2000) -> list[int]:
    """Greedy maximum-variance reference selection.

    Each candidate's variance is measured over its distances to a seeded
    random sample of windows. Candidates are taken in decreasing variance,
    skipping any within a near-duplicate radius (a small quantile of the
    sampled distances) of a reference already chosen. ``k == len(windows)``
    returns every window.
    """
    n = len(windows)
    if k > n:
        raise ValueError(f"k = {k} exceeds the {n} available windows")
    if k == n:
        return list(range(n))
    if k <= 0:
        return []
    rng = np.random.default_rng(seed)
    sample = rng.choice(n, size=min(sample_size, n), replace=False)
    pool = np.arange(n) if n <= pool_size else np.sort(rng.choice(n, size=pool_size, replace=False))
    sw = np.ascontiguousarray(windows[sample])
    var = np.empty(len(pool))
    sampled = []
    for t, c in enumerate(pool):
        dist = d.one_to_many(windows[c], sw)
        var[t] = dist.var()
        sampled.append(dist)
    allv = np.concatenate(sampled)
    nz = allv[allv > 0]
    near = float(np.quantile(nz, 0.01)) if nz.size else 0.0
    order = sorted(range(len(pool)), key=lambda t: (-var[t], int(pool[t])))
    chosen: list[int] = []
    skipped: list[int] = []
    for t in order:
        c = int(pool[t])
        if chosen:
            dc = d.one_to_many(windows[c], np.ascontiguousarray(windows[chosen]))
            if float(dc.min()) <= near:
                skipped.append(c)
                continue
        chosen.append(c)
        if len(chosen) == k:
            return chosen
    # not enough well-separated candidates: fill with the best skipped, then the rest
    in_pool = set(pool.tolist())
    rest = skipped + [i for i in range(n) if i not in in_pool]
    for c in rest:
        if c not in chosen:
            chosen.append(c)
            if len(chosen) == k:
                break
    return chosen


def build_mv_index(windows: np.ndarray, k: int, d: DistanceSpec, sample_size: int = 1000,
                   seed: int = 0) -> MVIndex:
    windows = np.ascontiguousarray(windows)
    refs = mv_select_references(windows, k, d, sample_size, seed)
    table = np.empty((len(windows), len(refs)))
    for j, r in enumerate(refs):
        table[:, j] = d.one_to_many(windows[r], windows)
    return MVIndex(refs, table, windows, d)


def space_matched_k(net: ReferenceNet, n_windows: int) -> int:
    """``k`` with ``k * n_windows`` table entries closest to the net's list entries."""
    if n_windows == 0:
        return 0
    return max(1, min(n_windows, round(net.stats().entries / n_windows)))


def mv_range_query(mv: MVIndex, q: np.ndarray, eps: float) -> tuple[list, WorkCounter]:
    """Exact range query: triangle bounds from the references, then verification."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    n = len(mv.windows)
    if n == 0:
        return [], WorkCounter(0, 0)
    d = mv.distance
    if mv.k:
        dq = d.one_to_many(q, np.ascontiguousarray(mv.windows[mv.references]))
        lower = np.abs(mv.table - dq).max(axis=1)
        upper = (mv.table + dq).min(axis=1)
    else:
        lower = np.zeros(n)
        upper = np.full(n, np.inf)
    # bounds only decide clear cases; float noise at the boundary is verified
    slack = 0.0 if d.kind in INTEGER_KINDS else 1e-9
    accept = upper <= eps - slack
    survivors = np.nonzero(~accept & ~(lower > eps + slack))[0]
    inside = set(np.nonzero(accept)[0].tolist())
    if survivors.size:
        dist = d.one_to_many(q, np.ascontiguousarray(mv.windows[survivors]))
        inside.update(survivors[dist <= eps].tolist())
    return sorted(int(i) for i in inside), WorkCounter(mv.k + int(survivors.size), n)


@dataclass(frozen=True)
class PruningRow:
    radius: float
    method: str
    alpha: float
    mean_computations: float


def compare_pruning(windows: np.ndarray, queries: Seq[np.ndarray], radii: Seq[float],
                    d: DistanceSpec, net: ReferenceNet, mv: MVIndex) -> list[PruningRow]:
    """Mean pruning ratio per radius for the net, MV and linear scan.

    ``net`` must hold window ``i`` under id ``i``. Every result set is checked
    against the linear scan; a difference raises :class:`ResultMismatchError`.
    """
    n = len(windows)
    rows = []
    for eps in radii:
        work = {"refnet": 0, "mv": 0, "linear": 0}
        for qi, q in enumerate(queries):
            truth, lc = linear_scan_range(windows, q, eps, d)
            res = net.range_query(q, eps)
            mids, mc = mv_range_query(mv, q, eps)
            if sorted(res.ids) != truth:
                raise ResultMismatchError(f"reference net differs from linear scan "
                                          f"(query {qi}, radius {eps})")
            if mids != truth:
                raise ResultMismatchError(f"MV index differs from linear scan "
                                          f"(query {qi}, radius {eps})")
            work["refnet"] += res.computations
            work["mv"] += mc.computations
            work["linear"] += lc.computations
        for method in ("refnet", "mv", "linear"):
            mean = work[method] / len(queries) if queries else 0.0
            rows.append(PruningRow(float(eps), method, 1.0 - mean / n if n else 0.0, mean))
    return rows


def pruning_csv(rows: Seq[PruningRow]) -> str:
    lines = ["radius,method,alpha,mean_computations"]
    for r in rows:
        lines.append(f"{r.radius!r},{r.method},{r.alpha!r},{r.mean_computations!r}")
    return "\n".join(lines) + "\n"
