"""Compare the compiled and pure-numpy kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``. For each workload the
script reports the best wall time of several repeats for both backends,
the speed-up, and the largest relative difference of the results.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from vdwbody import _kernels
from vdwbody.greens import LayerStack
from vdwbody.materials import MaterialModel


def _best(fn, repeats):
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads():
    dl = MaterialModel.drude_lorentz(3.0, 1.0, 0.001)
    film = LayerStack.from_layers(MaterialModel.constant(4.0, 1.0),
                                  [(MaterialModel.drude_lorentz(0.0, 1.0, 0.0, 3.0, 1.0, 0.001), 0.05)])
    xs = np.linspace(0.0, 80.0, 200_000)
    yield "bessel J0-J2, 2e5 points", lambda be: be.bessel_j012(xs)
    for name, stack, u, x, zp in (
        ("half space, X = 0", LayerStack.half_space(dl), 1.0, 0.0, 0.02),
        ("half space, X/Z+ = 50", LayerStack.half_space(dl), 1.0, 0.5, 0.01),
        ("half space, X/Z+ = 500", LayerStack.half_space(dl), 0.5, 5.0, 0.01),
        ("coated substrate, X/Z+ = 5", film, 2.0, 0.1, 0.02),
    ):
        eps, mu, thick, kind = stack.kernel_arrays(u)

        def run(be, eps=eps, mu=mu, thick=thick, kind=kind, u=u, x=x, zp=zp):
            return be.scattering_u2g(u, x, zp, eps, mu, thick, kind, 1e-10, 0.0, 4000)[0]

        yield f"scattering {name}", run


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels.compiled is None:
        print("compiled extension not built; only the numpy backend is available")
        return 1
    print(f"{'workload':40s} {'cython [s]':>11s} {'numpy [s]':>11s} {'speed-up':>9s} {'max rel diff':>13s}")
    for name, fn in workloads():
        tc, rc = _best(lambda: fn(_kernels.compiled), args.repeats)
        tp, rp = _best(lambda: fn(_kernels.pure), args.repeats)
        rc = np.asarray(rc, dtype=float)
        rp = np.asarray(rp, dtype=float)
        diff = float(np.max(np.abs(rc - rp)) / max(np.max(np.abs(rp)), 1e-300))
        print(f"{name:40s} {tc:11.5f} {tp:11.5f} {tp / tc:9.1f} {diff:13.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
