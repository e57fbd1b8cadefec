"""Timing comparison of the compiled and numpy time-step kernels.

Builds a realistic dressed-basis generator for a handful of cutoffs and
times `advance` over enough steps to smooth scheduler noise.  Run it
from the repository root:

    python3 benchmarks/bench_kernels.py [--steps N] [--repeats R]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from rabisim import _kernels
from rabisim._kernels import numpy_backend
from rabisim.dynamics import BathSpec, QuenchProtocol, build_generator, build_propagator, relaxation_coefficients
from rabisim.operators import FockCutoff, ModelParams, annihilation, lift_cavity, lift_qubit, qubit_operators
from rabisim.spectrum import diagonalize_model


def make_propagator(n_max: int, dt: float = 1e-3):
    params = ModelParams(0.1, 10.0, 0.65, constrained=True)
    cut = FockCutoff(n_max)
    es = diagonalize_model(params, cut)
    rates = [
        relaxation_coefficients(es, lift_cavity(annihilation(cut)), 1e-3, 0.1),
        relaxation_coefficients(es, lift_qubit(qubit_operators()["sigma_minus"], cut), 1e-3, 0.1),
    ]
    gen = build_generator(es, rates, 0.0)
    coh, pop = build_propagator(gen, dt)
    rho = np.zeros((es.dim, es.dim), dtype=np.complex128)
    rho[1, 1] = 0.6
    rho[2, 2] = 0.4
    rho[1, 2] = rho[2, 1] = 0.3
    return rho, coh, pop


def time_backend(advance, rho0, coh, pop, steps: int, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        rho = np.array(rho0, copy=True)
        t0 = time.perf_counter()
        advance(rho, coh, pop, steps)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--cutoffs", type=int, nargs="+", default=[20, 50, 100])
    args = parser.parse_args()

    backends = [("numpy", numpy_backend.advance)]
    try:
        from rabisim._kernels import _core
        backends.append(("cython", _core.advance))
    except ImportError:
        print("compiled kernel unavailable; timing the numpy fallback only")

    print(f"active backend at import: {_kernels.BACKEND}")
    print(f"{'n_max':>6} {'dim':>5}", *(f"{name:>12}" for name, _ in backends),
          "speedup" if len(backends) == 2 else "")
    for n_max in args.cutoffs:
        rho, coh, pop = make_propagator(n_max)
        row = [f"{n_max:>6} {rho.shape[0]:>5}"]
        times = []
        for name, advance in backends:
            t = time_backend(advance, rho, coh, pop, args.steps, args.repeats)
            times.append(t)
            row.append(f"{t * 1e3 / args.steps:>9.4f} ms")
        if len(times) == 2:
            row.append(f"{times[0] / times[1]:>6.2f}x")
        print(" ".join(row))

    if len(backends) == 2:
        rho, coh, pop = make_propagator(30)
        a = np.array(rho, copy=True)
        b = np.array(rho, copy=True)
        backends[0][1](a, coh, pop, 500)
        backends[1][1](b, coh, pop, 500)
        print(f"backend agreement after 500 steps: max |delta| = {np.max(np.abs(a - b)):.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
