"""Hot O(n^2) kernels.

Each kernel exists as a loop implementation compiled by numba and as a
vectorised numpy implementation. :data:`BACKEND` selects which one the public
wrappers call; both stay importable so the benchmark and the tests can
compare them directly.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit, numba

BACKEND = "numba" if HAVE_NUMBA else "numpy"

_prange = numba.prange if HAVE_NUMBA else range
_jit_parallel = njit(parallel=True, fastmath=False) if HAVE_NUMBA else (lambda fn: fn)


# --- two-photon amplitude derivative -------------------------------------

def phi_rhs_numpy(w, phi, xg, coupling, out):
    """out = -i [ (w_j + w_k) phi_jk + coupling (xg_j + xg_k) ]"""
    src = xg[:, None] + xg[None, :]
    np.multiply(w[:, None] + w[None, :], phi, out=out)
    out += coupling * src
    out *= -1j
    return out


@_jit_parallel
def _phi_rhs_loops(w, phi, xg, coupling, out):
    n = w.shape[0]
    for j in _prange(n):
        wj = w[j]
        xj = xg[j]
        for k in range(n):
            v = (wj + w[k]) * phi[j, k] + coupling * (xj + xg[k])
            out[j, k] = complex(v.imag, -v.real)
    return out


def phi_rhs_numba(w, phi, xg, coupling, out):
    return _phi_rhs_loops(w, phi, xg, complex(coupling), out)


# --- inelastic part of the scattered two-photon amplitude ----------------

def inelastic_numpy(w, e1p, e1m, e2p, e2m, prefactor, shift, greg, xi_amp, xi_pole):
    """Inelastic two-photon amplitude on the grid ``w x w``.

    ``xi_amp / (z - xi_pole)`` is the analytically continued pulse amplitude.
    """
    W = w[:, None] + w[None, :]
    single = 1.0 / ((w - e1p) * (w - e1m))
    bracket = 0.5 + (W - e1p - e1m) / (W - shift + 1j * greg)
    pair = 1.0 / ((W - e2p) * (W - e2m))
    xi_p = xi_amp / (W - e1p - xi_pole)
    xi_m = xi_amp / (W - e1m - xi_pole)
    return prefactor * bracket * pair * np.outer(single, single) * xi_p * xi_m


@_jit_parallel
def _inelastic_loops(w, e1p, e1m, e2p, e2m, prefactor, shift, greg, xi_amp, xi_pole, out):
    n = w.shape[0]
    single = np.empty(n, dtype=np.complex128)
    for j in range(n):
        single[j] = 1.0 / ((w[j] - e1p) * (w[j] - e1m))
    for j in _prange(n):
        for k in range(j, n):
            W = w[j] + w[k]
            bracket = 0.5 + (W - e1p - e1m) / (W - shift + 1j * greg)
            pair = 1.0 / ((W - e2p) * (W - e2m))
            xi_p = xi_amp / (W - e1p - xi_pole)
            xi_m = xi_amp / (W - e1m - xi_pole)
            v = prefactor * bracket * pair * single[j] * single[k] * xi_p * xi_m
            out[j, k] = v
            out[k, j] = v
    return out


def inelastic_numba(w, e1p, e1m, e2p, e2m, prefactor, shift, greg, xi_amp, xi_pole):
    out = np.empty((w.shape[0], w.shape[0]), dtype=np.complex128)
    return _inelastic_loops(
        w, complex(e1p), complex(e1m), complex(e2p), complex(e2m), complex(prefactor),
        float(shift), float(greg), complex(xi_amp), complex(xi_pole), out,
    )


# --- Hermitian kernel for the Schmidt analysis ---------------------------

def schmidt_kernel_numpy(sdf, weights):
    """K[a, b] = sum_c conj(sdf[a, c]) sdf[b, c] weights[c]"""
    return np.conj(sdf) @ (sdf * weights[None, :]).T


@_jit_parallel
def _schmidt_kernel_loops(sdf, weights, out):
    n = sdf.shape[0]
    m = sdf.shape[1]
    for a in _prange(n):
        for b in range(a, n):
            acc = 0j
            for c in range(m):
                acc += np.conj(sdf[a, c]) * sdf[b, c] * weights[c]
            out[a, b] = acc
            out[b, a] = np.conj(acc)
    return out


def schmidt_kernel_numba(sdf, weights):
    sdf = np.ascontiguousarray(sdf, dtype=np.complex128)
    out = np.empty((sdf.shape[0], sdf.shape[0]), dtype=np.complex128)
    return _schmidt_kernel_loops(sdf, np.ascontiguousarray(weights, dtype=np.float64), out)


if BACKEND == "numba":
    phi_rhs = phi_rhs_numba
    inelastic = inelastic_numba
else:
    phi_rhs = phi_rhs_numpy
    inelastic = inelastic_numpy

# The Schmidt kernel is a plain matrix product, where BLAS beats the compiled
# loops by 5-10x (see benchmarks/bench_kernels.py), so numpy is always used.
schmidt_kernel = schmidt_kernel_numpy
