"""Truncated Fock-space oracle for single-mode Gaussian states.

Brute-force density matrices in the number basis, used to validate the
phase-space machinery (fidelities, photon statistics) independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .gaussian import GaussianState

DEFAULT_CUTOFF = 60
HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-8
TAIL_TOL = 1e-6


@dataclass(frozen=True)
class FockOperator:
    """Complex D x D matrix in the number basis with its cutoff D."""

    matrix: np.ndarray
    cutoff: int = 0

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("Fock operator must be a square matrix")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "cutoff", mat.shape[0])
        self.matrix.setflags(write=False)

    def trace(self):
        return complex(np.trace(self.matrix))

    def photon_distribution(self):
        return np.real(np.diag(self.matrix))

    def mean_photon_number(self):
        return float(np.arange(self.cutoff) @ self.photon_distribution())


def annihilation(cutoff):
    return np.diag(np.sqrt(np.arange(1, cutoff)), k=1).astype(complex)


def displacement_operator(beta, cutoff):
    a = annihilation(cutoff)
    return expm(beta * a.conj().T - np.conj(beta) * a)


def squeeze_operator(r, cutoff):
    """Squeezes x for r > 0: Var(x) on vacuum becomes exp(-2r)/4."""
    a = annihilation(cutoff)
    return expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))


def rotation_operator(theta, cutoff):
    """exp(-i theta n): rotates quadratures by R_theta = [[c, s], [-s, c]]."""
    n = np.arange(cutoff)
    return np.diag(np.exp(-1j * theta * n))


def thermal_density(nbar, cutoff):
    if nbar < 0:
        raise ValueError("thermal occupation must be nonnegative")
    if nbar == 0:
        probs = np.zeros(cutoff)
        probs[0] = 1.0
    else:
        ratio = nbar / (nbar + 1.0)
        probs = ratio ** np.arange(cutoff) / (nbar + 1.0)
    return np.diag(probs).astype(complex)


def _validate_density(mat, trace_tol, tail_tol=TAIL_TOL):
    if np.abs(mat - mat.conj().T).max() > HERMITICITY_TOL:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(mat).real - 1.0) > trace_tol:
        raise ValueError(
            f"trace deficit {abs(np.trace(mat).real - 1.0):.3e} exceeds "
            "tolerance; increase the Fock cutoff"
        )
    # Truncated exponentials of anti-Hermitian generators stay exactly
    # unitary, so the trace alone cannot detect an undersized basis; the
    # population pushed against the truncation edge can.  A tail of t
    # perturbs downstream fidelities by O(t), hence the looser threshold.
    tail = float(np.real(mat[-1, -1]))
    if tail > tail_tol:
        raise ValueError(
            f"top-level occupancy {tail:.3e} exceeds tolerance; "
            "increase the Fock cutoff"
        )
    min_eig = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T)).min()
    if min_eig < -PSD_TOL:
        raise ValueError(f"density matrix is not PSD (min eig {min_eig:.3e})")


def gaussian_to_fock(state, cutoff=DEFAULT_CUTOFF, trace_tol=TRACE_TOL):
    """Number-basis density matrix of a single-mode Gaussian state.

    Built as D(beta) R(theta) S(r) rho_thermal S^dag R^dag D^dag from the
    covariance eigendecomposition.  Raises when the truncation leaks more
    than trace_tol of probability.
    """
    if state.num_modes != 1:
        raise ValueError("Fock oracle handles single-mode states only")
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    cov = state.cov
    eigvals, eigvecs = np.linalg.eigh(cov)
    lam1, lam2 = eigvals  # ascending: lam1 = nu*exp(-2r)/4, lam2 = nu*exp(2r)/4
    nu = 4.0 * np.sqrt(lam1 * lam2)  # symplectic eigenvalue scaled to 1 for pure
    nbar = max(0.0, (nu - 1.0) / 2.0)
    r = 0.25 * np.log(lam2 / lam1)
    v1 = eigvecs[:, 0]
    theta = float(np.arctan2(-v1[1], v1[0]))
    beta = state.mean[0] + 1j * state.mean[1]

    rho = thermal_density(nbar, cutoff)
    u = displacement_operator(beta, cutoff) @ rotation_operator(theta, cutoff) \
        @ squeeze_operator(r, cutoff)
    rho = u @ rho @ u.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    _validate_density(rho, trace_tol)
    return FockOperator(rho)


EIG_FLOOR = 1e-14


def _psd_sqrt(mat):
    eigvals, eigvecs = np.linalg.eigh(mat)
    if eigvals.min() < -PSD_TOL:
        raise ValueError(f"operator is not PSD (min eig {eigvals.min():.3e})")
    # Zero the roundoff-level eigenvalues: sqrt amplifies 1e-16 noise to
    # 1e-8 per level, which would dominate the fidelity error budget.
    eigvals = np.where(eigvals < EIG_FLOOR, 0.0, eigvals)
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.conj().T


def fock_fidelity(a, b):
    """Uhlmann fidelity [Tr sqrt(sqrt(a) b sqrt(a))]^2 via eigendecompositions."""
    if a.cutoff != b.cutoff:
        raise ValueError("operators must share a cutoff")
    sqrt_a = _psd_sqrt(0.5 * (a.matrix + a.matrix.conj().T))
    inner = sqrt_a @ (0.5 * (b.matrix + b.matrix.conj().T)) @ sqrt_a
    inner = 0.5 * (inner + inner.conj().T)
    eigvals = np.linalg.eigvalsh(inner)
    if eigvals.min() < -PSD_TOL:
        raise ValueError("fidelity inner operator is not PSD")
    eigvals = np.where(eigvals < EIG_FLOOR, 0.0, eigvals)
    return float(np.sum(np.sqrt(eigvals)) ** 2)
