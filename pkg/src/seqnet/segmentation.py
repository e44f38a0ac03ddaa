"""Database windows and query segments.

Database sequences are cut into disjoint windows of length ``l = λ // 2``;
queries contribute every contiguous segment whose length lies within
``λ₀`` of ``l``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .sequence import Sequence, Span


@dataclass(frozen=True)
class SegmentationParams:
    """Minimum match length ``min_length`` (λ) and length shift ``max_shift`` (λ₀)."""

    min_length: int
    max_shift: int = 0

    def __post_init__(self):
        if self.min_length < 2:
            raise ValueError("min_length (lambda) must be at least 2")
        if not 0 <= self.max_shift < self.window:
            raise ValueError(
                f"max_shift (lambda0) must be in [0, {self.window}) for window length {self.window}")

    @property
    def window(self) -> int:
        return self.min_length // 2

    def with_shift(self, max_shift: int) -> "SegmentationParams":
        return SegmentationParams(self.min_length, max_shift)


@dataclass(frozen=True, order=True)
class WindowRef:
    """Window of ``length`` elements of sequence ``seq_id`` starting at ``start`` (1-based)."""

    seq_id: str
    start: int
    length: int

    @property
    def end(self) -> int:
        return self.start + self.length - 1

    @property
    def span(self) -> Span:
        return Span(self.seq_id, self.start, self.end)


@dataclass(frozen=True, order=True)
class QuerySegment:
    span: Span

    @property
    def length(self) -> int:
        return self.span.length

    @property
    def start(self) -> int:
        return self.span.start

    @property
    def end(self) -> int:
        return self.span.end


def partition_windows(x: Sequence, p: SegmentationParams, tail: bool = False) -> list[WindowRef]:
    """Disjoint windows at offsets ``1, 1+l, 1+2l, ...``; a remainder shorter than ``l`` is dropped.

    With ``tail`` set, one extra window ``[|X|-l+1, |X|]`` is appended when
    ``l`` does not divide ``|X|`` (and ``|X| >= l``).
    """
    l = p.window
    n = len(x)
    out = [WindowRef(x.id, k * l + 1, l) for k in range(n // l)]
    if tail and n >= l and n % l:
        out.append(WindowRef(x.id, n - l + 1, l))
    return out


def segment_count(query_length: int, p: SegmentationParams) -> int:
    l, s = p.window, p.max_shift
    return sum(max(0, query_length - k + 1) for k in range(l - s, l + s + 1))


def extract_query_segments(q: Sequence, p: SegmentationParams) -> list[QuerySegment]:
    """Every span of ``q`` with length in ``[l-λ₀, l+λ₀]``, ordered by (start, length)."""
    l, s = p.window, p.max_shift
    n = len(q)
    out = []
    for start in range(1, n + 1):
        for length in range(l - s, l + s + 1):
            end = start + length - 1
            if end > n:
                break
            out.append(QuerySegment(Span(q.id, start, end)))
    return out
