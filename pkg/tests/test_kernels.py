import os
import subprocess
import sys

import numpy as np
import pytest

from jcsim import kernels
from jcsim._accel import HAVE_NUMBA

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


def _data(n=33, seed=0):
    rng = np.random.default_rng(seed)
    w = np.sort(rng.uniform(-5, 5, n))
    phi = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    phi = phi + phi.T
    xg = rng.normal(size=n) + 1j * rng.normal(size=n)
    return w, phi, xg


@needs_numba
def test_phi_rhs_backends_agree():
    w, phi, xg = _data()
    a = kernels.phi_rhs_numpy(w, phi, xg, 0.37 + 0.1j, np.empty_like(phi))
    b = kernels.phi_rhs_numba(w, phi, xg, 0.37 + 0.1j, np.empty_like(phi))
    assert np.max(np.abs(a - b)) < 1e-13 * np.max(np.abs(a))


@needs_numba
def test_inelastic_backends_agree():
    w, _, _ = _data()
    args = (w, 2.0 - 0.25j, -2.0 - 0.25j, 2.8 - 0.75j, -2.8 - 0.75j, 0.3, 4.0, 0.2, 0.17, 2.0 - 0.1j)
    a = kernels.inelastic_numpy(*args)
    b = kernels.inelastic_numba(*args)
    assert np.max(np.abs(a - b)) < 1e-13 * np.max(np.abs(a))


@needs_numba
def test_schmidt_kernel_backends_agree():
    _, phi, _ = _data()
    wts = np.full(phi.shape[0], 0.1)
    a = kernels.schmidt_kernel_numpy(phi, wts)
    b = kernels.schmidt_kernel_numba(phi, wts)
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(a))


def test_env_flag_selects_numpy():
    env = dict(os.environ, JCSIM_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from jcsim import kernels; print(kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "numpy"
