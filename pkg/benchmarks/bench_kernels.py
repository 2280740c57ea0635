"""Compare the numba-compiled kernels with their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--sizes 64 128 256] [--repeat 20]

The first numba call (compilation, or loading from the on-disk cache) is
excluded from the timings. Run with ``JCSIM_THREADS=1`` to compare
single-threaded throughput.
"""
import argparse
import timeit

import numpy as np

from jcsim import kernels
from jcsim._accel import HAVE_NUMBA, set_threads


def _inputs(n, rng):
    w = np.linspace(-10.0, 10.0, n)
    phi = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    phi = phi + phi.T
    xg = rng.normal(size=n) + 1j * rng.normal(size=n)
    return w, phi, xg


def _cases(n, rng):
    w, phi, xg = _inputs(n, rng)
    out = np.empty_like(phi)
    wts = np.full(n, w[1] - w[0])
    inel = (w, 2.0 - 0.25j, -2.0 - 0.25j, 2.8 - 0.75j, -2.8 - 0.75j, 0.3, 4.0, 0.2, 0.17, 2.0 - 0.1j)
    return {
        "phi_rhs": (lambda: kernels.phi_rhs_numpy(w, phi, xg, 0.4, out),
                    lambda: kernels.phi_rhs_numba(w, phi, xg, 0.4, out)),
        "inelastic": (lambda: kernels.inelastic_numpy(*inel),
                      lambda: kernels.inelastic_numba(*inel)),
        "schmidt_kernel": (lambda: kernels.schmidt_kernel_numpy(phi, wts),
                           lambda: kernels.schmidt_kernel_numba(phi, wts)),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba unavailable (or JCSIM_DISABLE_NUMBA set): nothing to compare")
        return 0
    set_threads()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'n':>6}{'numpy [ms]':>13}{'numba [ms]':>13}{'speedup':>10}")
    for n in args.sizes:
        for name, (np_fn, nb_fn) in _cases(n, rng).items():
            nb_fn()  # compile / load cache
            np.testing.assert_allclose(nb_fn(), np_fn(), rtol=1e-10, atol=1e-12)
            t_np = min(timeit.repeat(np_fn, number=1, repeat=args.repeat)) * 1e3
            t_nb = min(timeit.repeat(nb_fn, number=1, repeat=args.repeat)) * 1e3
            print(f"{name:<16}{n:>6}{t_np:>13.3f}{t_nb:>13.3f}{t_np / t_nb:>10.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
