"""Sequence data model, ground distance and dataset ingestion.

Sequences of either kind are stored as read-only ``(n, dim)`` float64 arrays.
Symbol sequences use ``dim == 1`` and hold Unicode code points. All public
positions are 1-based and inclusive.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import KindMismatchError, ParseError

SYMBOL = "symbol"
VECTOR = "vector"
MAX_DIM = 3


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Element:
    """A single sequence element: a symbol code point or a real vector."""

    kind: str
    value: tuple

    @classmethod
    def symbol(cls, s: str | int) -> "Element":
        code = ord(s) if isinstance(s, str) else int(s)
        return cls(SYMBOL, (code,))

    @classmethod
    def vector(cls, *coords: float) -> "Element":
        if len(coords) == 1 and isinstance(coords[0], (tuple, list, np.ndarray)):
            coords = tuple(coords[0])
        values = tuple(float(c) for c in coords)
        if not 1 <= len(values) <= MAX_DIM:
            raise ValueError(f"vector elements need 1..{MAX_DIM} coordinates")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("vector coordinates must be finite")
        return cls(VECTOR, values)

    @property
    def dim(self) -> int:
        return len(self.value)


def element_distance(a: Element, b: Element) -> float:
    """Ground distance: 0/1 for symbols, Euclidean norm for vectors."""
    if a.kind != b.kind or a.dim != b.dim:
        raise KindMismatchError(f"cannot compare {a.kind}/{a.dim} with {b.kind}/{b.dim}")
    if a.kind == SYMBOL:
        return 0.0 if a.value == b.value else 1.0
    return math.dist(a.value, b.value)


@dataclass(frozen=True)
class Span:
    """1-based inclusive range ``start..end`` of sequence ``seq_id``."""

    seq_id: str
    start: int
    end: int

    def __post_init__(self):
        if self.start < 1 or self.end < self.start:
            raise ValueError(f"invalid span {self.start}..{self.end}")

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def contains(self, other: "Span") -> bool:
        return (self.seq_id == other.seq_id and self.start <= other.start
                and other.end <= self.end)


@dataclass(frozen=True, eq=False)
class Sequence:
    """An immutable sequence of elements of one kind and dimension."""

    id: str
    kind: str
    data: np.ndarray

    def __post_init__(self):
        if self.kind not in (SYMBOL, VECTOR):
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError("sequence data must be a 2-D (n, dim) array")
        if self.kind == SYMBOL and data.shape[1] != 1:
            raise ValueError("symbol sequences have dim 1")
        if not 1 <= data.shape[1] <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}")
        if not np.all(np.isfinite(data)):
            raise ValueError("sequence values must be finite")
        object.__setattr__(self, "data", _frozen(data))

    @classmethod
    def from_string(cls, text: str, id: str = "0") -> "Sequence":
        codes = np.fromiter((ord(c) for c in text), dtype=np.float64, count=len(text))
        return cls(str(id), SYMBOL, codes.reshape(-1, 1))

    @classmethod
    def from_values(cls, values, id: str = "0", dim: int | None = None) -> "Sequence":
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(-1, dim)
        if dim is not None and arr.shape[1] != dim:
            raise ValueError(f"expected dimension {dim}, got {arr.shape[1]}")
        if arr.size == 0:
            arr = np.empty((0, dim or 1))
        return cls(str(id), VECTOR, arr)

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.data.shape[0]

    def __iter__(self) -> Iterator[Element]:
        for i in range(1, len(self) + 1):
            yield self.element(i)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sequence):
            return NotImplemented
        return (self.id == other.id and self.kind == other.kind
                and self.data.shape == other.data.shape
                and bool(np.array_equal(self.data, other.data)))

    def __hash__(self) -> int:
        return hash((self.id, self.kind, self.data.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        body = repr(self.text()) if self.kind == SYMBOL else f"dim={self.dim}"
        return f"Sequence(id={self.id!r}, {self.kind}, len={len(self)}, {body})"

    def element(self, i: int) -> Element:
        """Element at 1-based position ``i``."""
        if not 1 <= i <= len(self):
            raise IndexError(i)
        row = self.data[i - 1]
        if self.kind == SYMBOL:
            return Element(SYMBOL, (int(row[0]),))
        return Element(VECTOR, tuple(float(v) for v in row))

    def sub(self, start: int, end: int) -> "Sequence":
        """Subsequence ``start..end`` (1-based, inclusive), sharing memory."""
        if start < 1 or end > len(self) or end < start - 1:
            raise IndexError(f"{start}..{end} outside 1..{len(self)}")
        return Sequence(self.id, self.kind, self.data[start - 1:end])

    def span(self, span: Span) -> "Sequence":
        return self.sub(span.start, span.end)

    def text(self) -> str:
        if self.kind != SYMBOL:
            raise KindMismatchError("only symbol sequences have text")
        return "".join(chr(int(c)) for c in self.data[:, 0])


@dataclass(frozen=True)
class Dataset:
    """A collection of sequences sharing one alphabet (kind and dimension)."""

    sequences: tuple
    kind: str = SYMBOL
    dim: int = 1

    def __post_init__(self):
        seqs = tuple(self.sequences)
        object.__setattr__(self, "sequences", seqs)
        ids = set()
        for s in seqs:
            if s.kind != self.kind or s.dim != self.dim:
                raise KindMismatchError(
                    f"sequence {s.id!r} is {s.kind}/{s.dim}, dataset is {self.kind}/{self.dim}")
            if s.id in ids:
                raise ValueError(f"duplicate sequence id {s.id!r}")
            ids.add(s.id)

    @classmethod
    def of(cls, sequences: Iterable[Sequence]) -> "Dataset":
        seqs = tuple(sequences)
        if not seqs:
            return cls(())
        return cls(seqs, seqs[0].kind, seqs[0].dim)

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self) -> Iterator[Sequence]:
        return iter(self.sequences)

    def __getitem__(self, seq_id: str) -> Sequence:
        for s in self.sequences:
            if s.id == seq_id:
                return s
        raise KeyError(seq_id)


def _check_text(line: str, lineno: int) -> None:
    for ch in line:
        o = ord(ch)
        if o < 32 or 127 <= o < 160:
            raise ParseError(f"control character U+{o:04X}", lineno)


def parse_string_dataset(text: str) -> Dataset:
    """Parse FASTA-style or one-sequence-per-line text into symbol sequences.

    The FASTA form is used when any non-blank line starts with ``>``; the
    first whitespace-delimited token of a header is the sequence id. In the
    plain form ids are ``"0"``, ``"1"``, ... in order. Blank lines are
    ignored in both forms.
    """
    lines = text.splitlines()
    fasta = any(line.lstrip().startswith(">") for line in lines)
    seqs = []
    if not fasta:
        for lineno, raw in enumerate(lines, 1):
            line = raw.strip()
            if not line:
                continue
            _check_text(line, lineno)
            seqs.append(Sequence.from_string(line, str(len(seqs))))
        return Dataset(tuple(seqs), SYMBOL, 1)

    current_id, parts = None, []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        _check_text(line, lineno)
        if line.startswith(">"):
            if current_id is not None:
                seqs.append(Sequence.from_string("".join(parts), current_id))
            header = line[1:].split()
            current_id = header[0] if header else str(len(seqs))
            parts = []
        elif current_id is None:
            raise ParseError("sequence data before the first '>' header", lineno)
        else:
            parts.append(line)
    if current_id is not None:
        seqs.append(Sequence.from_string("".join(parts), current_id))
    try:
        return Dataset(tuple(seqs), SYMBOL, 1)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def serialize_string_dataset(ds: Dataset) -> str:
    """FASTA text that :func:`parse_string_dataset` reads back identically."""
    out = io.StringIO()
    for s in ds:
        out.write(f">{s.id}\n")
        if len(s):
            out.write(s.text() + "\n")
    return out.getvalue()


def parse_timeseries_dataset(text: str, dims: int) -> Dataset:
    """Parse ``seq_id,v1[,v2[,v3]]`` rows into vector sequences.

    Rows of one id must be consecutive; row numbers in errors are 1-based.
    """
    if not 1 <= dims <= MAX_DIM:
        raise ValueError(f"dims must be in 1..{MAX_DIM}")
    order: list[str] = []
    rows: dict[str, list] = {}
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != dims + 1:
            raise ParseError(f"expected {dims + 1} columns, got {len(row)}", lineno)
        sid = row[0].strip()
        try:
            coords = [float(c) for c in row[1:]]
        except ValueError:
            raise ParseError(f"non-numeric value in {row[1:]!r}", lineno) from None
        if not all(math.isfinite(c) for c in coords):
            raise ParseError("non-finite value", lineno)
        if sid not in rows:
            order.append(sid)
            rows[sid] = []
        elif order[-1] != sid:
            raise ParseError(f"rows of sequence {sid!r} are not consecutive", lineno)
        rows[sid].append(coords)
    seqs = tuple(Sequence.from_values(np.array(rows[s]).reshape(-1, dims), s, dims)
                 for s in order)
    return Dataset(seqs, VECTOR, dims)


def serialize_timeseries_dataset(ds: Dataset) -> str:
    """CSV text that :func:`parse_timeseries_dataset` reads back identically."""
    out = io.StringIO()
    for s in ds:
        for row in s.data:
            out.write(",".join([s.id] + [repr(float(v)) for v in row]) + "\n")
    return out.getvalue()


def load_dataset(path, fmt: str = "strings", dims: int = 1) -> Dataset:
    """Read a dataset file; ``fmt`` is ``strings`` or ``timeseries``."""
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    if fmt not in ("strings", "timeseries"):
        raise ValueError(f"unknown dataset format {fmt!r}")
    try:
        if fmt == "strings":
            return parse_string_dataset(text)
        return parse_timeseries_dataset(text, dims)
    except ParseError as exc:
        exc.args = (f"{path}: {exc}",)
        raise


def dump_dataset(ds: Dataset) -> str:
    if ds.kind == SYMBOL:
        return serialize_string_dataset(ds)
    return serialize_timeseries_dataset(ds)
