"""Sequence distances and empirical checkers for metric axioms and consistency.

The six distances share the element ground distance from
:mod:`seqnet.sequence`. The dynamic programs live in the kernel backend
(:mod:`seqnet.kernels`); this module validates inputs and wraps results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import (BudgetExceededError, EmptySequenceError, KindMismatchError,
                     LengthMismatchError)
from .sequence import SYMBOL, Sequence

KINDS = ("euclidean", "hamming", "levenshtein", "erp", "dfd", "dtw")
METRIC_KINDS = frozenset({"euclidean", "hamming", "levenshtein", "erp", "dfd"})
EQUAL_LENGTH_KINDS = frozenset({"euclidean", "hamming"})
COUPLING_KINDS = frozenset({"dfd", "dtw"})
INTEGER_KINDS = frozenset({"hamming", "levenshtein"})

TOL = 1e-9
CONSISTENCY_MAX_LEN = 14

# Gap symbol for symbolic ERP: never equal to a code point, so every gap costs 1.
NEUTRAL_SYMBOL = -1.0


@lru_cache(maxsize=None)
def _default_gap(symbolic: bool, dim: int) -> np.ndarray:
    g = np.full(dim, NEUTRAL_SYMBOL) if symbolic else np.zeros(dim)
    g.setflags(write=False)
    return g


def _array(s) -> np.ndarray:
    return s.data if isinstance(s, Sequence) else s


@dataclass(frozen=True)
class DistanceSpec:
    """A configured sequence distance.

    Calling it on two :class:`Sequence` objects (or two raw ``(n, dim)``
    arrays) returns the distance. ``gap`` is the ERP gap element; ``None``
    selects the zero vector, or a symbol equal to no code point.
    """

    kind: str
    symbolic: bool = False
    gap: tuple | None = None
    _kcode: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distance {self.kind!r}; choose from {KINDS}")
        if self.gap is not None:
            object.__setattr__(self, "gap", tuple(float(v) for v in self.gap))
        object.__setattr__(self, "_kcode", kernels.KIND_CODES[self.kind])

    @property
    def declared_metric(self) -> bool:
        return self.kind in METRIC_KINDS

    @property
    def declared_consistent(self) -> bool:
        return True

    @property
    def equal_length(self) -> bool:
        return self.kind in EQUAL_LENGTH_KINDS

    def gap_array(self, dim: int) -> np.ndarray:
        if self.gap is None:
            return _default_gap(self.symbolic, dim)
        if len(self.gap) != dim:
            raise KindMismatchError(f"gap element has dimension {len(self.gap)}, data has {dim}")
        return np.asarray(self.gap, dtype=np.float64)

    def check(self, q, x) -> None:
        """Raise the typed error if ``(q, x)`` is outside this distance's domain."""
        if isinstance(q, Sequence) and isinstance(x, Sequence):
            if q.kind != x.kind:
                raise KindMismatchError(f"{q.kind} vs {x.kind}")
            if (q.kind == SYMBOL) != self.symbolic:
                raise KindMismatchError(f"{self} used on {q.kind} sequences")
        a, b = _array(q), _array(x)
        if a.shape[1] != b.shape[1]:
            raise KindMismatchError(f"dimension {a.shape[1]} vs {b.shape[1]}")
        if self.kind in EQUAL_LENGTH_KINDS and a.shape[0] != b.shape[0]:
            raise LengthMismatchError(f"{self.kind} needs equal lengths, got {a.shape[0]} and {b.shape[0]}")
        if self.kind in COUPLING_KINDS and (a.shape[0] == 0 or b.shape[0] == 0):
            raise EmptySequenceError(f"{self.kind} is undefined for empty sequences")

    def __call__(self, q, x) -> float:
        self.check(q, x)
        a, b = _array(q), _array(x)
        return kernels.distance(self._kcode, a, b, self.gap_array(a.shape[1]), self.symbolic)

    def raw(self, a: np.ndarray, b: np.ndarray) -> float:
        """Unchecked call on raw arrays; callers guarantee the domain."""
        return kernels.distance(self._kcode, a, b, self.gap_array(a.shape[1]), self.symbolic)

    def prefix_matrix(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """``out[i, j] == raw(a[:i+1], b[:j+1])``; ``inf`` off the diagonal for equal-length kinds."""
        return kernels.prefix_matrix(self._kcode, a, b, self.gap_array(a.shape[1]), self.symbolic)

    def one_to_many(self, q: np.ndarray, windows: np.ndarray) -> np.ndarray:
        """Distances from ``q`` to every ``windows[k]`` of a stacked ``(N, l, dim)`` array."""
        q = _array(q)
        return kernels.one_to_many(self._kcode, np.ascontiguousarray(q),
                                   np.ascontiguousarray(windows),
                                   self.gap_array(q.shape[1]), self.symbolic)


def make_distance(kind: str, symbolic: bool = False, gap=None) -> DistanceSpec:
    return DistanceSpec(kind, symbolic, gap)


def _spec_for(kind: str, q) -> DistanceSpec:
    return DistanceSpec(kind, isinstance(q, Sequence) and q.kind == SYMBOL)


def euclidean(q: Sequence, x: Sequence) -> float:
    return _spec_for("euclidean", q)(q, x)


def hamming(q: Sequence, x: Sequence) -> int:
    return int(_spec_for("hamming", q)(q, x))


def levenshtein(q: Sequence, x: Sequence) -> int:
    return int(_spec_for("levenshtein", q)(q, x))


def erp(q: Sequence, x: Sequence, gap=None) -> float:
    spec = DistanceSpec("erp", isinstance(q, Sequence) and q.kind == SYMBOL, gap)
    return spec(q, x)


def dfd(q: Sequence, x: Sequence) -> float:
    return _spec_for("dfd", q)(q, x)


def dtw(q: Sequence, x: Sequence) -> float:
    return _spec_for("dtw", q)(q, x)


@dataclass(frozen=True)
class Violation:
    """A replayable witness that a distance broke a property.

    ``kind`` is one of ``triangle``, ``symmetry``, ``identity`` or
    ``consistency``; ``values`` holds the measured distances.
    """

    kind: str
    witnesses: tuple
    values: tuple

    def replay(self, d: DistanceSpec) -> bool:
        """Recompute the distances and report whether the violation still holds."""
        return _violates(self.kind, d, self.witnesses)


def _violates(kind, d, w) -> bool:
    if kind == "triangle":
        a, b, c = w
        return d(a, c) > d(a, b) + d(b, c) + TOL
    if kind == "symmetry":
        a, b = w
        return abs(d(a, b) - d(b, a)) > TOL
    if kind == "identity":
        a, = w
        return d(a, a) > TOL
    if kind == "consistency":
        q, x, sx = w
        d.check(q, x)
        return _best_subsequence(d, _array(q), _array(sx)) > d(q, x) + TOL
    raise ValueError(kind)


def _best_subsequence(d: DistanceSpec, q: np.ndarray, sx: np.ndarray) -> float:
    """Smallest ``d(SQ, sx)`` over contiguous SQ of ``q``."""
    # edit-family distances may couple all of SX to gaps, i.e. an empty SQ
    best = d.raw(q[:0], sx) if d.kind in ("levenshtein", "erp") else math.inf
    for i in range(q.shape[0]):
        # last column: every SQ starting at i against the whole of sx
        col = d.prefix_matrix(q[i:], sx)[:, -1]
        best = min(best, float(col.min()))
    return best


def check_consistency(d: DistanceSpec, q: Sequence, x: Sequence) -> list[Violation]:
    """Brute-force check of consistency on one pair.

    For every contiguous non-empty subsequence ``SX`` of ``x`` searches all
    contiguous subsequences ``SQ`` of ``q`` and records a violation when the
    best ``d(SQ, SX)`` exceeds ``d(q, x)`` by more than the tolerance.
    """
    if len(q) > CONSISTENCY_MAX_LEN or len(x) > CONSISTENCY_MAX_LEN:
        raise BudgetExceededError(
            f"consistency check is limited to length {CONSISTENCY_MAX_LEN}")
    whole = d(q, x)
    found = []
    xa = _array(x)
    for i in range(xa.shape[0]):
        for j in range(i + 1, xa.shape[0] + 1):
            best = _best_subsequence(d, _array(q), xa[i:j])
            if best > whole + TOL:
                found.append(Violation("consistency", (q, x, x.sub(i + 1, j)), (whole, best)))
    return found


def check_metric_axioms(d: DistanceSpec, triples) -> list[Violation]:
    """Report identity, symmetry and triangle violations over ``triples``."""
    found = []
    for a, b, c in triples:
        for s in (a, b, c):
            v = d(s, s)
            if v > TOL:
                found.append(Violation("identity", (s,), (v,)))
        for s, t in ((a, b), (b, c), (a, c)):
            st, ts = d(s, t), d(t, s)
            if abs(st - ts) > TOL:
                found.append(Violation("symmetry", (s, t), (st, ts)))
        ab, bc, ac = d(a, b), d(b, c), d(a, c)
        for (p, r, s), (x1, x2, x3) in (((a, b, c), (ab, bc, ac)),
                                        ((b, a, c), (ab, ac, bc)),
                                        ((a, c, b), (ac, bc, ab))):
            # x3 is d(p, s) and must not exceed d(p, r) + d(r, s)
            if x3 > x1 + x2 + TOL:
                found.append(Violation("triangle", (p, r, s), (x1, x2, x3)))
    return found
