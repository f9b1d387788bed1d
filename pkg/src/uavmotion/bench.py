"""Kernel benchmark: pure-numpy implementations vs. the compiled ones.

Both variants are importable side by side (`kernels.NUMPY_IMPLS` vs.
`kernels.ACTIVE_IMPLS`), so a single process can time the pair. When
UAVMOTION_DISABLE_NUMBA=1 the active table IS the numpy table and only
one column is reported.
"""

from __future__ import annotations

import time

import numpy as np

from . import kernels
from ._brief_pairs import BRIEF_PAIRS
from .motion import gauss5_taps

_WARP_H = np.array(
    [[0.999, 0.012, 2.3], [-0.012, 0.999, -1.7], [1e-6, -1e-6, 1.0]],
    dtype=np.float64,
)


def _bench_inputs(dims: tuple[int, int], seed: int = 7) -> dict:
    h, w = dims
    rng = np.random.default_rng(seed)
    gray = rng.uniform(0.0, 255.0, size=(h, w)).astype(np.float32)
    mask = (rng.uniform(size=(h, w)) < 0.2).astype(np.uint8)
    margin = 20
    n_pts = 300
    xs = rng.integers(margin, w - margin, size=n_pts).astype(np.int64)
    ys = rng.integers(margin, h - margin, size=n_pts).astype(np.int64)
    angles = rng.uniform(-np.pi, np.pi, size=n_pts).astype(np.float64)
    desc_a = rng.integers(0, 256, size=(400, 32), dtype=np.uint8)
    desc_b = rng.integers(0, 256, size=(400, 32), dtype=np.uint8)
    return {
        "gray": gray,
        "mask": mask,
        "xs": xs,
        "ys": ys,
        "angles": angles,
        "desc_a": desc_a,
        "desc_b": desc_b,
        "taps": gauss5_taps(1.1),
    }


def _cases(inp: dict, dims: tuple[int, int]) -> dict:
    h, w = dims
    return {
        "warp_bilinear": (inp["gray"], _WARP_H, h, w),
        "separable5": (inp["gray"], inp["taps"]),
        "erode": (inp["mask"], 3),
        "dilate": (inp["mask"], 7),
        "fast_scores": (inp["gray"], 20.0),
        "orientation_angles": (inp["gray"], inp["xs"], inp["ys"]),
        "brief_descriptors": (inp["gray"], inp["xs"], inp["ys"], inp["angles"], BRIEF_PAIRS),
        "hamming_matrix": (inp["desc_a"], inp["desc_b"]),
    }


def _time_call(fn, args, repeats: int) -> float:
    fn(*args)  # warm-up (includes any JIT compilation)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best * 1000.0


def run_benchmark(
    dims: tuple[int, int] = (480, 640), repeats: int = 5
) -> dict:
    """Time every kernel under both backends; returns a report dict."""
    inp = _bench_inputs(dims)
    cases = _cases(inp, dims)
    compiled_available = kernels.USE_NUMBA
    out: dict = {
        "dims": list(dims),
        "repeats": repeats,
        "active_backend": "numba" if compiled_available else "numpy",
        "kernels": {},
    }
    for name, args in cases.items():
        entry: dict = {
            "numpy_ms": _time_call(kernels.NUMPY_IMPLS[name], args, repeats)
        }
        if compiled_available:
            entry["numba_ms"] = _time_call(kernels.ACTIVE_IMPLS[name], args, repeats)
            entry["speedup"] = (
                entry["numpy_ms"] / entry["numba_ms"] if entry["numba_ms"] > 0 else float("inf")
            )
        else:
            entry["numba_ms"] = None
            entry["speedup"] = None
        out["kernels"][name] = entry
    return out


def format_benchmark(report: dict) -> str:
    lines = [
        f"kernel benchmark  dims={tuple(report['dims'])}  repeats={report['repeats']}"
        f"  active={report['active_backend']}",
        f"{'kernel':<20} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}",
    ]
    for name, entry in report["kernels"].items():
        numba_ms = entry["numba_ms"]
        lines.append(
            f"{name:<20} {entry['numpy_ms']:>10.3f} "
            + (f"{numba_ms:>10.3f}" if numba_ms is not None else f"{'-':>10}")
            + (
                f" {entry['speedup']:>7.1f}x"
                if entry["speedup"] is not None
                else f" {'-':>8}"
            )
        )
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    import argparse
    import json

    parser = argparse.ArgumentParser(
        prog="uavmotion.bench",
        description="Time every hot kernel under the numpy and compiled backends.",
    )
    parser.add_argument("--dims", default="480x640", help="raster dims, HxW")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--json", action="store_true", help="emit the report as JSON")
    args = parser.parse_args(argv)
    h, w = (int(v) for v in args.dims.lower().split("x"))
    report = run_benchmark(dims=(h, w), repeats=args.repeats)
    print(json.dumps(report, indent=2) if args.json else format_benchmark(report))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
