"""Compare the compiled and pure-Python distance kernels.

Run from the repository root::

    python3 benchmarks/bench_kernels.py [--length 32] [--windows 2000]

Prints microseconds per single distance call and milliseconds per
one-to-many batch for every backend that imports.
"""

import argparse
import timeit

import numpy as np

from seqnet import kernels
from seqnet.distances import KINDS, make_distance


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--length", type=int, default=32)
    ap.add_argument("--windows", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    a = rng.normal(size=(args.length, 1))
    b = rng.normal(size=(args.length, 1))
    many = np.ascontiguousarray(rng.normal(size=(args.windows, args.length, 1)))
    mods = kernels.backends()
    print(f"length {args.length}, batch of {args.windows}; active backend: {kernels.BACKEND}")
    print(f"{'kind':<12}" + "".join(f"{m.BACKEND + ' us/call':>20}{m.BACKEND + ' ms/batch':>20}"
                                    for m in mods) + f"{'speedup':>10}")
    for kind in KINDS:
        d = make_distance(kind)
        gap = d.gap_array(1)
        row, per_call = f"{kind:<12}", []
        for m in mods:
            n = 20 if m.BACKEND == "python" else 2000
            t1 = timeit.timeit(lambda: m.distance(d._kcode, a, b, gap, False), number=n) / n
            reps = 1 if m.BACKEND == "python" else 5
            batch = many if m.BACKEND != "python" else many[: max(1, args.windows // 20)]
            tb = timeit.timeit(lambda: m.one_to_many(d._kcode, a, batch, gap, False),
                               number=reps) / reps * (len(many) / len(batch))
            row += f"{t1 * 1e6:>20.2f}{tb * 1e3:>20.2f}"
            per_call.append(t1)
        if len(per_call) == 2:
            row += f"{per_call[0] / per_call[1]:>9.0f}x"
        print(row)


if __name__ == "__main__":
    main()
