"""Schmidt decomposition of the scattered two-photon amplitude."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .analytic import ScatteredSDF
from .dynamics import FrequencyGrid
from .errors import NumericalError

__all__ = ["SchmidtResult", "build_kernel", "schmidt", "entropy", "schmidt_of_sdf"]

NEGATIVE_TOL = 1e-10
ENTROPY_CUTOFF = 1e-14


@dataclass
class SchmidtResult:
    """Schmidt coefficients and mode functions of a symmetric two-photon amplitude.

    Attributes
    ----------
    lambdas : ndarray
        All coefficients, descending, summing to one.
    modes : ndarray, shape (n, m)
        The ``m`` retained mode functions as columns, each with unit
        trapezoidal norm. Columns are phased so that the amplitude is
        ``sum_j sqrt(norm * lambda_j) phi_j(w) phi_j(w')`` (Takagi form).
    entropy : float
        Von Neumann entropy in bits.
    norm : float
        Two-photon norm before the coefficients were normalised.
    """

    lambdas: np.ndarray
    modes: np.ndarray
    entropy: float
    grid: FrequencyGrid
    norm: float = 1.0

    def reconstruct(self, n_terms: int | None = None) -> np.ndarray:
        m = self.modes.shape[1] if n_terms is None else min(n_terms, self.modes.shape[1])
        amp = np.sqrt(self.norm * self.lambdas[:m])
        return (self.modes[:, :m] * amp) @ self.modes[:, :m].T


def build_kernel(sdf: ScatteredSDF | np.ndarray, grid: FrequencyGrid | None = None) -> np.ndarray:
    """``K[a, b] = sum_c conj(phi[a, c]) phi[b, c] dw_c`` for the total amplitude.

    The amplitude is symmetric, so the kernels over either photon coincide
    and only one is built.
    """
    if isinstance(sdf, ScatteredSDF):
        amp, grid = sdf.total, sdf.grid
    else:
        if grid is None:
            raise ValueError("a grid is required with a bare amplitude array")
        amp = np.asarray(sdf, dtype=complex)
    return kernels.schmidt_kernel(amp, grid.weights)


def entropy(lambdas) -> float:
    """Von Neumann entropy ``-sum l log2 l`` in bits, with ``0 log 0 = 0``."""
    lam = np.asarray(lambdas, dtype=float)
    lam = lam[lam >= ENTROPY_CUTOFF]
    return float(-np.sum(lam * np.log2(lam))) + 0.0


def schmidt(kernel: np.ndarray, grid: FrequencyGrid, n_modes: int = 5,
            amplitude: np.ndarray | None = None) -> SchmidtResult:
    """Solve the quadrature-weighted eigenproblem of a Schmidt kernel.

    The kernel is symmetrised with the square roots of the trapezoidal
    weights, ``D^1/2 K^T D^1/2``, so eigenvalues do not depend on the grid
    resolution and eigenvectors map to L2-orthonormal mode functions.

    Parameters
    ----------
    kernel : ndarray
        Hermitian kernel from :func:`build_kernel`.
    grid : FrequencyGrid
    n_modes : int
        Number of mode functions to keep.
    amplitude : ndarray, optional
        The two-photon amplitude the kernel was built from. When given, each
        mode's phase is fixed so that :meth:`SchmidtResult.reconstruct`
        reproduces it.

    Raises
    ------
    NumericalError
        If the eigensolver fails or an eigenvalue is below ``-1e-10`` (the
        kernel is positive semidefinite by construction).
    """
    n_modes = int(n_modes)
    if n_modes < 1:
        raise ValueError("n_modes must be ≥ 1")
    sq = np.sqrt(grid.weights)
    # K[a, b] = sum_c conj(phi_ac) phi_bc w_c; its eigenvectors over the first
    # index are conj of the mode functions, so diagonalise K^T = conj(K)
    mat = sq[:, None] * np.conj(kernel) * sq[None, :]
    mat = 0.5 * (mat + mat.conj().T)
    try:
        vals, vecs = scipy.linalg.eigh(mat)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Schmidt eigensolver failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    total = float(np.sum(vals))
    if not total > 0:
        raise NumericalError("Schmidt kernel has zero trace")
    lam = vals / total
    if lam.min() < -NEGATIVE_TOL:
        raise NumericalError(f"Schmidt kernel not positive semidefinite (lambda = {lam.min():.3g})")
    lam = np.clip(lam, 0.0, None)
    lam = lam / lam.sum()
    m = min(n_modes, grid.n)
    modes = vecs[:, :m] / sq[:, None]
    if amplitude is not None:
        wts = grid.weights
        for j in range(m):
            u = modes[:, j]
            proj = np.conj(u * wts) @ amplitude @ np.conj(u * wts)
            if abs(proj) > 0:
                modes[:, j] = u * np.exp(0.5j * np.angle(proj))
    return SchmidtResult(lam, modes, entropy(lam), grid, norm=total)


def schmidt_of_sdf(sdf: ScatteredSDF, n_modes: int = 5) -> SchmidtResult:
    """Convenience wrapper: kernel, eigensolve and phase fixing in one call."""
    return schmidt(build_kernel(sdf), sdf.grid, n_modes, amplitude=sdf.total)
