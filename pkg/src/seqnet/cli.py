"""Command-line front end.

Subcommands: ``build``, ``query``, ``bench``, ``selftest`` and ``generate``.
Every run-configuration flag may also come from a ``key=value`` file given
with ``--config``; flags on the command line win.

Exit codes: 0 success, 1 query found nothing, 2 validation failure,
3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import baselines, matching, synthetic
from .distances import (KINDS, METRIC_KINDS, DistanceSpec, check_consistency,
                        check_metric_axioms, make_distance)
from .errors import IndexFormatError, NotMetricError, ParseError, SeqNetError
from .refnet import NetConfig, ReferenceNet
from .segmentation import SegmentationParams
from .sequence import SYMBOL, Dataset, Sequence, dump_dataset, load_dataset

EXIT_OK, EXIT_EMPTY, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3


class ValidationFailure(SeqNetError):
    """A check or configuration failed; maps to exit code 2."""


@dataclass
class RunConfig:
    dataset: str = ""
    format: str = "strings"
    dims: int = 1
    distance: str = "levenshtein"
    gap: str = ""
    lam: int = 20
    shift: int = 0
    base_radius: float = 1.0
    num_max: int = 5          # 0 means unlimited
    seed: int = 0
    out_dir: str = "."

    def validate(self) -> None:
        try:
            self.params()
            self.net_config()
            self.distance_spec()
        except (ValueError, TypeError) as exc:
            raise ValidationFailure(f"invalid configuration: {exc}") from exc
        if self.format not in ("strings", "timeseries"):
            raise ValidationFailure(f"unknown format {self.format!r}")

    def params(self) -> SegmentationParams:
        return SegmentationParams(self.lam, self.shift)

    def net_config(self) -> NetConfig:
        return NetConfig(self.base_radius, self.num_max or None)

    def distance_spec(self) -> DistanceSpec:
        gap = tuple(float(v) for v in self.gap.split(",")) if self.gap else None
        return make_distance(self.distance, self.format == "strings", gap)

    def digest(self, extra: dict | None = None) -> str:
        items = sorted({**asdict(self), **(extra or {})}.items())
        blob = "\n".join(f"{k}={v}" for k, v in items if k != "out_dir")
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def read_config_file(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError(f"expected key=value, got {line!r}", lineno)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def make_config(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    cfg = RunConfig()
    for f in fields(RunConfig):
        raw = getattr(args, f.name, None)
        if raw is None:
            raw = values.get(f.name)
        if raw is None:
            continue
        try:
            setattr(cfg, f.name, type(getattr(cfg, f.name))(raw))
        except ValueError as exc:
            raise ValidationFailure(f"bad value for {f.name}: {raw!r}") from exc
    cfg.validate()
    return cfg


def _load(cfg: RunConfig) -> Dataset:
    if not cfg.dataset:
        raise ValidationFailure("no dataset given")
    return load_dataset(cfg.dataset, cfg.format, cfg.dims)


# -- build / query ------------------------------------------------------------

def _stats_lines(idx: matching.SubseqIndex) -> list[str]:
    st = idx.net.stats()
    return [
        f"windows={len(idx.windows)}",
        f"nodes={st.nodes}",
        f"references={st.references}",
        f"levels={st.levels}",
        f"lists={st.lists}",
        f"entries={st.entries}",
        f"avg_parents={st.avg_parents:.4f}",
        f"avg_list_size={st.avg_list_size:.4f}",
        f"est_bytes={st.est_bytes}",
        f"build_computations={idx.build_computations}",
    ]


def cmd_build(cfg: RunConfig, out_path: str) -> int:
    ds = _load(cfg)
    d = cfg.distance_spec()
    if d.kind not in METRIC_KINDS:
        raise NotMetricError(f"{d.kind} violates the triangle inequality, so the net cannot "
                             "prune with it; choose one of " + ", ".join(sorted(METRIC_KINDS)))
    idx = matching.build_index(ds, cfg.params(), d, cfg.net_config())
    text = matching.index_to_text(idx, os.path.abspath(cfg.dataset), cfg.format)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    print("\n".join(_stats_lines(idx)))
    return EXIT_OK


def _header(text: str) -> dict:
    out = {}
    for line in text.splitlines()[1:]:
        key, _, value = line.partition(" ")
        out[key] = value
        if key == "nodes":
            break
    return out


def load_index(path: str, expect: dict | None = None) -> matching.SubseqIndex:
    """Read an index file and its dataset.

    ``expect`` may name a ``distance`` and ``lam`` the caller asked for; a
    mismatch with the index is a validation failure.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    head = _header(text)
    info = matching.payload_fields(text)
    try:
        kind = head["distance"]
        gap = None if head.get("gap", "none") == "none" else tuple(
            float(v) for v in head["gap"].split(","))
        d = make_distance(kind, head.get("symbolic") == "1", gap)
        lam = int(info["lambda"])
    except (KeyError, ValueError) as exc:
        raise IndexFormatError(f"bad index header: {exc}") from exc
    expect = expect or {}
    if expect.get("distance", kind) != kind:
        raise ValidationFailure(f"index uses {kind}, request asks for {expect['distance']}")
    if int(expect.get("lam", lam)) != lam:
        raise ValidationFailure(f"index built with lambda={lam}, request asks for {expect['lam']}")
    ds = load_dataset(info["dataset"], info.get("format", "strings"), int(info.get("dims", 1)))
    return matching.index_from_text(text, ds, d)


def cmd_query(expect: dict, index_path: str, query_path: str, qtype: int,
              eps: float | None, eps_inc: float | None, out_path: str | None,
              max_shift: int | None) -> int:
    idx = load_index(index_path, expect)
    fmt = "strings" if idx.dataset.kind == SYMBOL else "timeseries"
    queries = load_dataset(query_path, fmt, idx.dataset.dim)
    shift = idx.params.max_shift if max_shift is None else max_shift
    rows = []
    for q in queries:
        if qtype == 1:
            pairs = matching.query_type1(idx, q, _need(eps), shift)
        elif qtype == 2:
            pairs = matching.query_type2(idx, q, _need(eps), shift)
        else:
            if len(q) < idx.params.min_length:
                continue
            nm = matching.query_type3(idx, q, eps_inc, eps, shift)
            print(f"# {q.id}: tier epsilon {nm.epsilon!r}", file=sys.stderr)
            pairs = nm.pairs
        rows.append((q.id, pairs))
    lines = [",".join(matching.CSV_HEADER)]
    for qid, pairs in rows:
        lines.extend(matching.write_pairs_csv(pairs, qid).splitlines()[1:])
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if any(p for _, p in rows) else EXIT_EMPTY


def _need(eps):
    if eps is None:
        raise ValidationFailure("--eps is required for query types 1 and 2")
    return eps


# -- bench --------------------------------------------------------------------

def _bench_queries(ds: Dataset, l: int, count: int, rng) -> list[np.ndarray]:
    pool = [x for x in ds if len(x) >= l]
    out = []
    for _ in range(count if pool else 0):
        x = pool[int(rng.integers(len(pool)))]
        s = int(rng.integers(0, len(x) - l + 1))
        out.append(np.ascontiguousarray(x.data[s:s + l]))
    return out


def distance_histogram(sample: np.ndarray, bins: int = 20) -> list[tuple]:
    if sample.size == 0:
        return []
    top = float(sample.max()) or 1.0
    counts, edges = np.histogram(sample, bins=bins, range=(0.0, top))
    return [(float(edges[i]), float(edges[i + 1]), int(c), float(c) / sample.size)
            for i, c in enumerate(counts)]


def consecutive_counts(idx: matching.SubseqIndex, queries: list[Sequence],
                       radii: list[float], max_shift: int) -> list[tuple]:
    """Per radius: fraction of windows hit by some query segment, and the
    fraction lying in runs of two or more consecutive hit windows."""
    total = len(idx.windows)
    by_seq = {}
    for wid in idx.window_ids():
        w = idx.windows[wid]
        by_seq.setdefault(w.seq_id, []).append(w.start)
    rows = []
    for eps in radii:
        hit = set()
        for q in queries:
            for m in matching.candidate_pairs(idx, q, eps, max_shift, matching.SHIFT):
                hit.add((m.window.seq_id, m.window.start))
        in_runs = 0
        l = idx.params.window
        for sid, starts in by_seq.items():
            for s in starts:
                if (sid, s) in hit and ((sid, s - l) in hit or (sid, s + l) in hit):
                    in_runs += 1
        rows.append((float(eps), len(hit) / total if total else 0.0,
                     in_runs / total if total else 0.0))
    return rows


def _csv(path: str, digest: str, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config {digest}\n{header}\n")
        for r in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in r) + "\n")


def cmd_bench(cfg: RunConfig, radii: list[float] | None, n_queries: int) -> int:
    ds = _load(cfg)
    d = cfg.distance_spec()
    idx = matching.build_index(ds, cfg.params(), d, cfg.net_config())
    rng = np.random.default_rng(cfg.seed)
    l = cfg.params().window
    ids = idx.window_ids()
    windows = idx.window_array(ids)
    if ids != list(range(len(ids))):
        raise AssertionError("window ids must be dense")
    sample = matching.sample_window_distances(idx, 1000, cfg.seed)
    queries = _bench_queries(ds, l, n_queries, rng)
    # exact largest query-to-window distance, so the top radius returns everything
    qmax = max((float(d.one_to_many(q, windows).max()) for q in queries), default=0.0)
    if radii is None:
        radii = [f * qmax for f in (0.0, 0.02, 0.05, 0.1, 0.2, 0.5)] + [qmax]
    extra = {"radii": ",".join(repr(r) for r in radii), "queries": n_queries}
    digest = cfg.digest(extra)
    os.makedirs(cfg.out_dir, exist_ok=True)

    mv = baselines.build_mv_index(windows, baselines.space_matched_k(idx.net, len(ids)), d,
                                  seed=cfg.seed)
    prune = baselines.compare_pruning(windows, queries, radii, d, idx.net, mv)
    _csv(os.path.join(cfg.out_dir, "pruning.csv"), digest,
         "radius,method,alpha,mean_computations",
         [(r.radius, r.method, r.alpha, r.mean_computations) for r in prune])
    _csv(os.path.join(cfg.out_dir, "histogram.csv"), digest, "bin_lo,bin_hi,count,fraction",
         distance_histogram(sample))

    qseqs = [Sequence(f"q{i}", ds.kind, q) for i, q in enumerate(queries[:min(5, len(queries))])]
    cons = consecutive_counts(idx, qseqs, radii, cfg.shift)
    _csv(os.path.join(cfg.out_dir, "consecutive.csv"), digest,
         "radius,unique_fraction,consecutive_fraction", cons)
    print(f"config {digest}: wrote pruning.csv, histogram.csv, consecutive.csv to {cfg.out_dir}")
    return EXIT_OK


# -- selftest -------------------------------------------------------------------

def _random_seq(rng, n: int, sid: str, symbolic: bool) -> Sequence:
    if symbolic:
        return Sequence.from_string("".join(rng.choice(list("abc"), n)), sid)
    return Sequence.from_values(rng.integers(0, 4, n).astype(float), sid)


def _witness(v) -> str:
    parts = []
    for w in v.witnesses:
        parts.append(w.text() if w.kind == SYMBOL else ",".join(f"{x:g}" for x in w.data.ravel()))
    return f"{v.kind} violation: witnesses {parts}, distances {list(v.values)}"


def cmd_selftest(cfg: RunConfig, index_path: str | None, explicit_distance: bool) -> int:
    rng = np.random.default_rng(cfg.seed)
    failures: list[str] = []
    kinds = [cfg.distance] if explicit_distance else sorted(METRIC_KINDS)
    symbolic = cfg.format == "strings"

    for kind in kinds:
        d = make_distance(kind, symbolic)
        found = []
        for _ in range(200):
            a, b = (_random_seq(rng, int(rng.integers(1, 7)), "p", symbolic)
                    for _ in range(2))
            if d.equal_length:
                b = _random_seq(rng, len(a), "x", symbolic)
            found += check_consistency(d, a, b)
        # metric axioms on short integer series, the setting where violations are easiest
        for _ in range(20000 if kind not in METRIC_KINDS else 2000):
            n = int(rng.integers(1, 5))
            trip = [_random_seq(rng, n if d.equal_length else int(rng.integers(1, 5)),
                                "m", symbolic) for _ in range(3)]
            found += check_metric_axioms(d, [trip])
            if found:
                break
        print(f"{kind}: {'ok' if not found else 'FAIL'}")
        failures += [f"{kind}: {_witness(v)}" for v in found[:3]]

        if kind in METRIC_KINDS and not found:
            net = ReferenceNet(d, cfg.net_config())
            objs = {}
            for i in range(150):
                objs[i] = _random_seq(rng, 6, str(i), symbolic).data
                net.insert(i, objs[i])
            rep = net.validate()
            if not rep.ok:
                failures.append(f"{kind}: net invariants broken: {rep}")
            for _ in range(50):
                q = _random_seq(rng, 6, "q", symbolic).data
                eps = float(rng.uniform(0, 4))
                truth = sorted(k for k, v in objs.items() if d.raw(q, v) <= eps)
                if net.range_query(q, eps).ids != truth:
                    failures.append(f"{kind}: range query differs from linear scan at eps={eps}")
                    break
            q = _random_seq(rng, 14, "q", symbolic)
            ds = Dataset.of([_random_seq(rng, 14, "x0", symbolic)])
            p = SegmentationParams(4, 0)
            idx = matching.build_index(ds, p, d, cfg.net_config())
            eps = 2.0
            got = matching.query_type1(idx, q, eps)
            want = matching.brute_force_oracle(ds, q, eps, 4, 0, 1, d)
            if [g.key() for g in got] != [w.key() for w in want]:
                failures.append(f"{kind}: subsequence query differs from brute force")

    if index_path:
        try:
            load_index(index_path)
            print("index: ok")
        except (IndexFormatError, SeqNetError, OSError) as exc:
            failures.append(f"index {index_path}: {exc}")
            print("index: FAIL")

    if failures:
        print("\n".join(failures))
        return EXIT_INVALID
    print("selftest passed")
    return EXIT_OK


# -- generate -------------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.kind == "strings":
        ds = synthetic.random_strings(args.count, (args.min_length, args.length),
                                      args.alphabet, args.seed)
    else:
        ds = synthetic.random_walks(args.count, (args.min_length, args.length), args.dims,
                                    args.clusters, args.spread, args.seed)
    text = dump_dataset(ds)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------

def _config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file with run settings")
    p.add_argument("--dataset")
    p.add_argument("--format", choices=("strings", "timeseries"))
    p.add_argument("--dims", type=int)
    p.add_argument("--distance", choices=KINDS)
    p.add_argument("--gap", help="ERP gap element, comma separated")
    p.add_argument("--lam", type=int, help="minimum match length (lambda)")
    p.add_argument("--shift", type=int, help="maximum length difference (lambda0)")
    p.add_argument("--base-radius", dest="base_radius", type=float)
    p.add_argument("--num-max", dest="num_max", type=int, help="0 for unlimited")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seqnet", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="index a dataset")
    _config_flags(b)
    b.add_argument("--out", required=True, help="index file to write")

    q = sub.add_parser("query", help="run subsequence queries against an index")
    _config_flags(q)
    q.add_argument("--index", required=True)
    q.add_argument("--queries", required=True, help="query file in the dataset format")
    q.add_argument("--type", type=int, choices=(1, 2, 3), default=1)
    q.add_argument("--eps", type=float, help="radius (type 3: binary-search upper bound)")
    q.add_argument("--eps-inc", dest="eps_inc", type=float)
    q.add_argument("--out", help="CSV output (default stdout)")

    be = sub.add_parser("bench", help="pruning, histogram and consecutive-window CSVs")
    _config_flags(be)
    be.add_argument("--radii", help="comma-separated radii (default: fractions of the max)")
    be.add_argument("--queries", type=int, default=50)

    s = sub.add_parser("selftest", help="property checks at desk scale")
    _config_flags(s)
    s.add_argument("--index", help="also load and validate this index file")

    g = sub.add_parser("generate", help="write a synthetic dataset")
    g.add_argument("kind", choices=("strings", "walks"))
    g.add_argument("--count", type=int, default=20)
    g.add_argument("--length", type=int, default=200)
    g.add_argument("--min-length", dest="min_length", type=int, default=None)
    g.add_argument("--alphabet", default="ACGT")
    g.add_argument("--dims", type=int, default=1)
    g.add_argument("--clusters", type=int, default=0)
    g.add_argument("--spread", type=float, default=0.1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    return ap


def _dispatch(args) -> int:
    if args.command == "generate":
        if args.min_length is None:
            args.min_length = args.length
        return cmd_generate(args)
    if args.command == "query":
        expect = read_config_file(args.config) if args.config else {}
        expect = {k: expect[k] for k in ("distance", "lam") if k in expect}
        for k in ("distance", "lam"):
            if getattr(args, k) is not None:
                expect[k] = getattr(args, k)
        return cmd_query(expect, args.index, args.queries, args.type, args.eps, args.eps_inc,
                         args.out, args.shift)
    cfg = make_config(args)
    if args.command == "build":
        return cmd_build(cfg, args.out)
    if args.command == "bench":
        radii = None if not args.radii else [float(v) for v in args.radii.split(",")]
        return cmd_bench(cfg, radii, args.queries)
    explicit = args.distance is not None or (
        args.config is not None and "distance" in read_config_file(args.config))
    return cmd_selftest(cfg, args.index, explicit)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ParseError, OSError) as exc:
        print(f"seqnet: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationFailure, NotMetricError, IndexFormatError, SeqNetError,
            ValueError, TypeError) as exc:
        print(f"seqnet: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
