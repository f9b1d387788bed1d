#!/usr/bin/env python3
"""Compare the compiled kernels against their pure-numpy twins.

Both implementations always import (`kernels.NUMPY_IMPLS` holds the numpy
table, `kernels.ACTIVE_IMPLS` whatever the env flag selected), so one
process times the pair fairly: same inputs, warm-up call first so JIT
compilation never pollutes a measurement.

    python3 benchmarks/bench_kernels.py --dims 480x640 --repeats 7
    UAVMOTION_DISABLE_NUMBA=1 python3 benchmarks/bench_kernels.py  # numpy only
"""

from __future__ import annotations

import argparse
import sys

from uavmotion.bench import format_benchmark, run_benchmark
from uavmotion.io import write_report


def _dims(text: str) -> tuple[int, int]:
    h, w = (int(v) for v in text.lower().split("x"))
    return (h, w)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dims", type=_dims, default=(480, 640))
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--report", help="also write the results as JSON")
    args = parser.parse_args(argv)

    report = run_benchmark(dims=args.dims, repeats=args.repeats)
    print(format_benchmark(report))
    if args.report:
        write_report(args.report, report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
