"""Gaussian-state engine for multimode quadrature optics.

Conventions: quadrature ordering is xxpp (all x's, then all p's), the
symplectic form is Omega = [[0, I], [-I, 0]], and the vacuum covariance
is I/4 (so x = Re(a), p = Im(a) and Var_vac(x) = 1/4).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SYMMETRY_RTOL = 1e-12
SYMPLECTIC_TOL = 1e-10
UNCERTAINTY_TOL = 1e-10
EIGENVALUE_FLOOR = 1e-14
GRAM_SCHMIDT_TOL = 1e-8


def symplectic_form(num_modes):
    """Omega = [[0, I], [-I, 0]] in xxpp ordering."""
    ident = np.eye(num_modes)
    zero = np.zeros((num_modes, num_modes))
    return np.block([[zero, ident], [-ident, zero]])


@dataclass(frozen=True)
class GaussianState:
    """M-mode Gaussian state: mean vector (length 2M) and covariance (2M x 2M)."""

    mean: np.ndarray
    cov: np.ndarray
    num_modes: int = field(default=0)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.ndim != 1 or mean.size % 2 != 0:
            raise ValueError("mean must be a flat vector of even length")
        m = mean.size // 2
        if cov.shape != (2 * m, 2 * m):
            raise ValueError("covariance shape does not match mean length")
        scale = max(1.0, np.abs(cov).max())
        if np.abs(cov - cov.T).max() > SYMMETRY_RTOL * scale:
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        # Uncertainty principle: cov + (i/4) Omega >= 0.
        herm = cov + 0.25j * symplectic_form(m)
        min_eig = np.linalg.eigvalsh(herm).min()
        if min_eig < -UNCERTAINTY_TOL:
            raise ValueError(
                f"covariance violates the uncertainty principle (min eig {min_eig:.3e})"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "num_modes", m)
        self.mean.setflags(write=False)
        self.cov.setflags(write=False)

    # -- views ------------------------------------------------------------

    def mean_block(self, quadrature):
        m = self.num_modes
        return self.mean[:m] if quadrature == "x" else self.mean[m:]

    def cov_block(self, quadrature):
        m = self.num_modes
        if quadrature == "x":
            return self.cov[:m, :m]
        return self.cov[m:, m:]

    def mean_photon_number(self):
        """Total mean photon number, sum over modes of <x^2>+<p^2> - 1/2."""
        return float(np.trace(self.cov) + self.mean @ self.mean - self.num_modes / 2)

    def to_dict(self):
        return {
            "num_modes": self.num_modes,
            "mean": self.mean.tolist(),
            "cov": self.cov.flatten().tolist(),
        }

    @staticmethod
    def from_dict(data):
        m = int(data["num_modes"])
        mean = np.asarray(data["mean"], dtype=float)
        cov = np.asarray(data["cov"], dtype=float).reshape(2 * m, 2 * m)
        return GaussianState(mean, cov)


@dataclass(frozen=True)
class SymplecticTransform:
    """Linear-optics/squeezing map: mean -> S mean + d, cov -> S cov S^T."""

    matrix: np.ndarray
    displacement: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        disp = np.asarray(self.displacement, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2 != 0:
            raise ValueError("transform matrix must be square with even dimension")
        if disp.shape != (mat.shape[0],):
            raise ValueError("displacement length does not match matrix dimension")
        m = mat.shape[0] // 2
        omega = symplectic_form(m)
        if np.abs(mat @ omega @ mat.T - omega).max() > SYMPLECTIC_TOL:
            raise ValueError("matrix is not symplectic")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "displacement", disp)
        self.matrix.setflags(write=False)
        self.displacement.setflags(write=False)

    @property
    def num_modes(self):
        return self.matrix.shape[0] // 2


@dataclass(frozen=True)
class LossChannel:
    """Pure-loss channels with per-mode transmissivities in (0, 1]."""

    transmissivities: np.ndarray

    def __post_init__(self):
        etas = np.atleast_1d(np.asarray(self.transmissivities, dtype=float))
        if np.any(etas <= 0.0) or np.any(etas > 1.0):
            raise ValueError("transmissivities must lie in (0, 1]")
        object.__setattr__(self, "transmissivities", etas)
        self.transmissivities.setflags(write=False)


# -- state constructors ---------------------------------------------------


def vacuum_state(num_modes):
    if num_modes < 1:
        raise ValueError("number of modes must be >= 1")
    return GaussianState(np.zeros(2 * num_modes), 0.25 * np.eye(2 * num_modes))


def squeeze_parameter(n_photons):
    """r with sinh^2(r) = n_photons, so Var(x) = exp(-2r)/4 for squeeze-x."""
    if n_photons < 0:
        raise ValueError("mean photon number must be nonnegative")
    return float(np.arcsinh(np.sqrt(n_photons)))


def squeezed_vacuum(n_photons, axis="x"):
    """Single-mode squeezed vacuum with mean photon number n_photons.

    axis selects which quadrature carries the reduced noise exp(-2r)/4.
    """
    if axis not in ("x", "p"):
        raise ValueError("axis must be 'x' or 'p'")
    r = squeeze_parameter(n_photons)
    lo = np.exp(-2.0 * r) / 4.0
    hi = np.exp(2.0 * r) / 4.0
    if axis == "x":
        cov = np.diag([lo, hi])
    else:
        cov = np.diag([hi, lo])
    return GaussianState(np.zeros(2), cov)


def coherent_state(x_mean, p_mean=0.0):
    return GaussianState(np.array([x_mean, p_mean]), 0.25 * np.eye(2))


def tensor(*states):
    """Tensor product in the common xxpp ordering."""
    total = sum(s.num_modes for s in states)
    mean = np.zeros(2 * total)
    cov = np.zeros((2 * total, 2 * total))
    offset = 0
    for s in states:
        m = s.num_modes
        sl_x = slice(offset, offset + m)
        sl_p = slice(total + offset, total + offset + m)
        mean[sl_x] = s.mean[:m]
        mean[sl_p] = s.mean[m:]
        cov[sl_x, sl_x] = s.cov[:m, :m]
        cov[sl_x, sl_p] = s.cov[:m, m:]
        cov[sl_p, sl_x] = s.cov[m:, :m]
        cov[sl_p, sl_p] = s.cov[m:, m:]
        offset += m
    return GaussianState(mean, cov)


# -- transform constructors -----------------------------------------------


def complete_orthogonal(first_row, tol=GRAM_SCHMIDT_TOL):
    """Orthogonal matrix whose first row is first_row normalized.

    Remaining rows come from Gram-Schmidt over the standard basis in index
    order, skipping near-parallel candidates.
    """
    u = np.asarray(first_row, dtype=float)
    norm = np.linalg.norm(u)
    if norm == 0.0:
        raise ValueError("first row must be a nonzero vector")
    m = u.size
    rows = [u / norm]
    for i in range(m):
        if len(rows) == m:
            break
        v = np.zeros(m)
        v[i] = 1.0
        for row in rows:
            v -= (row @ v) * row
        nv = np.linalg.norm(v)
        if nv > tol:
            rows.append(v / nv)
    if len(rows) != m:
        raise ValueError("orthogonal completion failed")
    return np.array(rows)


def transform_from_mode_matrix(mode_matrix):
    """Symplectic transform for outputs a = O^T b with O real orthogonal.

    With O's first row u, the inputs satisfy b_1 = sum_m u_m a_m, i.e. the
    first input mode is spread over the outputs with coefficients u.
    """
    o = np.asarray(mode_matrix, dtype=float)
    m = o.shape[0]
    s = np.zeros((2 * m, 2 * m))
    s[:m, :m] = o.T
    s[m:, m:] = o.T
    return SymplecticTransform(s, np.zeros(2 * m))


def balanced_splitter(num_modes):
    """M-port splitter distributing input mode 1 evenly, b_1 = sum_m a_m / sqrt(M)."""
    if num_modes < 1:
        raise ValueError("number of modes must be >= 1")
    return transform_from_mode_matrix(complete_orthogonal(np.ones(num_modes)))


def unbalanced_splitter(coeffs):
    """Splitter whose first input spreads with the given (normalized) coefficients."""
    return transform_from_mode_matrix(complete_orthogonal(coeffs))


def passive_transform(unitary):
    """Symplectic matrix of a complex mode unitary U = X + iY (lossless optics)."""
    u = np.asarray(unitary, dtype=complex)
    x, y = u.real, u.imag
    return SymplecticTransform(
        np.block([[x, -y], [y, x]]), np.zeros(2 * u.shape[0])
    )


def displacement_transform(displacement):
    d = np.asarray(displacement, dtype=float)
    return SymplecticTransform(np.eye(d.size), d)


# -- channels and measurements --------------------------------------------


def apply_symplectic(state, transform):
    if transform.num_modes != state.num_modes:
        raise ValueError("transform and state mode counts differ")
    s = transform.matrix
    return GaussianState(s @ state.mean + transform.displacement, s @ state.cov @ s.T)


def apply_loss(state, channel):
    """Pure loss: mean *= sqrt(eta), cov -> D cov D + (I - D^2)/4."""
    if not isinstance(channel, LossChannel):
        channel = LossChannel(np.asarray(channel, dtype=float))
    etas = channel.transmissivities
    if etas.size == 1 and state.num_modes > 1:
        etas = np.full(state.num_modes, etas[0])
    if etas.size != state.num_modes:
        raise ValueError("channel length does not match state mode count")
    d = np.concatenate([np.sqrt(etas), np.sqrt(etas)])
    cov = state.cov * np.outer(d, d) + np.diag((1.0 - d * d) / 4.0)
    return GaussianState(d * state.mean, cov)


def displace_all(state, alpha):
    """Shift every mode's x quadrature by the same real alpha."""
    mean = state.mean.copy()
    mean[: state.num_modes] += alpha
    return GaussianState(mean, state.cov)


def _sampling_factor(cov_block):
    eigvals, eigvecs = np.linalg.eigh(cov_block)
    if eigvals.min() < -EIGENVALUE_FLOOR:
        raise ValueError(
            f"quadrature covariance block is not PSD (min eig {eigvals.min():.3e})"
        )
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def homodyne_samples(state, quadrature, num_samples, rng):
    """num_samples joint homodyne outcomes, shape (num_samples, M).

    Outcomes are draws from the Gaussian marginal of the selected
    quadrature block; reproducible given the caller's rng.
    """
    if quadrature not in ("x", "p"):
        raise ValueError("quadrature must be 'x' or 'p'")
    factor = _sampling_factor(state.cov_block(quadrature))
    z = rng.standard_normal((num_samples, state.num_modes))
    return state.mean_block(quadrature) + z @ factor.T


def homodyne_sample(state, quadrature, rng):
    """One joint homodyne outcome across all M modes."""
    return homodyne_samples(state, quadrature, 1, rng)[0]
