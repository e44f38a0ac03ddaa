"""Seeded synthetic datasets: random strings, clustered random walks, planted motifs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distances import DistanceSpec
from .sequence import SYMBOL, VECTOR, Dataset, Sequence, Span


def random_strings(n_seqs: int, length: int | tuple, alphabet: str = "ACGT", seed: int = 0,
                   prefix: str = "s") -> Dataset:
    """Uniform random strings; ``length`` may be an inclusive ``(lo, hi)`` range."""
    rng = np.random.default_rng(seed)
    letters = np.array(list(alphabet))
    seqs = []
    for i in range(n_seqs):
        n = int(rng.integers(length[0], length[1] + 1)) if isinstance(length, tuple) else length
        seqs.append(Sequence.from_string("".join(rng.choice(letters, n)), f"{prefix}{i}"))
    return Dataset(tuple(seqs), SYMBOL, 1)


def random_walks(n_seqs: int, length: int | tuple, dims: int = 1, clusters: int = 0,
                 spread: float = 0.1, seed: int = 0, prefix: str = "t") -> Dataset:
    """Gaussian random walks.

    With ``clusters > 0`` every sequence follows one of ``clusters`` prototype
    walks plus its own small walk scaled by ``spread``.
    """
    rng = np.random.default_rng(seed)
    lo, hi = length if isinstance(length, tuple) else (length, length)
    protos = [np.cumsum(rng.normal(size=(hi, dims)), axis=0) for _ in range(clusters)]
    seqs = []
    for i in range(n_seqs):
        n = int(rng.integers(lo, hi + 1))
        walk = np.cumsum(rng.normal(size=(n, dims)), axis=0)
        if clusters:
            walk = protos[int(rng.integers(clusters))][:n] + spread * walk
        seqs.append(Sequence.from_values(walk, f"{prefix}{i}", dims))
    return Dataset(tuple(seqs), VECTOR, dims)


def clustered_windows(n_windows: int, l: int, dims: int = 1, clusters: int = 20,
                      spread: float = 0.05, seed: int = 0) -> np.ndarray:
    """``(n_windows, l, dims)`` windows drawn around ``clusters`` random-walk centres."""
    rng = np.random.default_rng(seed)
    centres = np.cumsum(rng.normal(size=(clusters, l, dims)), axis=1)
    centres -= centres.mean(axis=1, keepdims=True)
    centres *= 3.0
    pick = rng.integers(clusters, size=n_windows)
    noise = spread * np.cumsum(rng.normal(size=(n_windows, l, dims)), axis=1)
    return np.ascontiguousarray(centres[pick] + noise)


@dataclass(frozen=True)
class PlantedInstance:
    dataset: Dataset
    query: Sequence
    query_span: Span
    db_span: Span
    noise: float      # bound on the distance of each copy to the clean motif


def _noisy_symbols(motif: np.ndarray, budget: float, alphabet: np.ndarray, rng) -> np.ndarray:
    out = motif.copy()
    k = int(np.floor(budget))
    for pos in rng.choice(len(motif), size=min(k, len(motif)), replace=False):
        choices = alphabet[alphabet != motif[pos, 0]]
        out[pos, 0] = rng.choice(choices)
    return out


def _noisy_values(motif: np.ndarray, budget: float, kind: str, rng) -> np.ndarray:
    noise = rng.normal(size=motif.shape)
    r = np.sqrt((noise ** 2).sum(axis=1))
    # the cost of the diagonal coupling bounds every supported distance
    size = {"euclidean": np.sqrt((r ** 2).sum()), "dfd": r.max()}.get(kind, r.sum())
    if size > 0:
        noise *= budget * rng.uniform(0.2, 1.0) / size
    return motif + noise


def plant_motif(d: DistanceSpec, lam: int, eps: float, seed: int = 0, query_length: int = 60,
                db_length: int = 80, n_seqs: int = 4, alphabet: str = "ACGT",
                dims: int = 1) -> PlantedInstance:
    """Plant one motif of length ``lam`` in the query and in one database sequence.

    Each copy differs from the clean motif by at most ``eps / 2`` under the
    diagonal coupling, so the two copies, and any aligned pieces of them,
    are within ``eps``.
    """
    rng = np.random.default_rng(seed)
    budget = eps / 2
    if d.symbolic:
        letters = np.array([float(ord(c)) for c in alphabet])
        background = lambda n: rng.choice(letters, size=(n, 1))
        motif = background(lam)
        noisy = lambda: _noisy_symbols(motif, budget, letters, rng)
        make = lambda data, sid: Sequence(sid, SYMBOL, data)
    else:
        background = lambda n: np.cumsum(rng.normal(size=(n, dims)), axis=0) + 10 * rng.normal()
        motif = background(lam)
        noisy = lambda: _noisy_values(motif, budget, d.kind, rng)
        make = lambda data, sid: Sequence(sid, VECTOR, data)

    host = int(rng.integers(n_seqs))
    seqs = []
    db_span = None
    for i in range(n_seqs):
        data = background(db_length)
        if i == host:
            at = int(rng.integers(0, db_length - lam + 1))
            data[at:at + lam] = noisy()
            db_span = Span(f"x{i}", at + 1, at + lam)
        seqs.append(make(data, f"x{i}"))
    qdata = background(query_length)
    qa = int(rng.integers(0, query_length - lam + 1))
    qdata[qa:qa + lam] = noisy()
    query = make(qdata, "q")
    ds = Dataset(tuple(seqs), seqs[0].kind, seqs[0].dim)
    return PlantedInstance(ds, query, Span("q", qa + 1, qa + lam), db_span, budget)
