"""Weighted-sum sensing over heterogeneous networks.

Closed-form entangled performance, numerical photon allocation for the
product scheme (KKT/water-filling via nested bisection), and weight
optimization for both schemes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

WEIGHT_SUM_TOL = 1e-12
KKT_TOL = 1e-8
MAX_BISECTIONS = 200
MAX_ALTERNATIONS = 500
ALLOC_FLOOR = 1e-12


@dataclass(frozen=True)
class WeightedNetwork:
    """M nodes with estimator weights, per-node transmissivities and a photon budget."""

    num_nodes: int
    weights: np.ndarray
    etas: np.ndarray
    total_photons: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        etas = np.asarray(self.etas, dtype=float)
        if w.size != self.num_nodes or etas.size != self.num_nodes:
            raise ValueError("weights and etas must have length num_nodes")
        if np.any(w < 0.0) or abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")
        # eta = 0 is excluded; model a dead node with weight 0 instead.
        if np.any(etas <= 0.0) or np.any(etas > 1.0):
            raise ValueError("transmissivities must lie in (0, 1]")
        if self.total_photons < 0:
            raise ValueError("photon budget must be nonnegative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "etas", etas)
        self.weights.setflags(write=False)
        self.etas.setflags(write=False)


@dataclass
class AllocationResult:
    """Per-node photon numbers with the achieved rms error and KKT diagnostics."""

    photons: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int


def _inv_scale(n):
    """1/(sqrt(N+1)+sqrt(N))^2 = (sqrt(N+1)-sqrt(N))^2, the squeezed-noise factor."""
    n = np.asarray(n, dtype=float)
    return (np.sqrt(n + 1.0) - np.sqrt(n)) ** 2


def _inv_scale_deriv(n):
    """d/dN of _inv_scale; tends to -inf as N -> 0+."""
    n = np.asarray(n, dtype=float)
    return -_inv_scale(n) / np.sqrt(n * (n + 1.0))


def weighted_entangled_rms(net):
    """Closed-form rms error of the weighted entangled estimator."""
    w2 = net.weights**2
    terms = net.etas * _inv_scale(net.total_photons) + 1.0 - net.etas
    return float(0.5 * np.sqrt(w2 @ terms))


def product_objective(net, photons):
    """rms error of the weighted product scheme at a given allocation."""
    photons = np.asarray(photons, dtype=float)
    terms = net.etas * _inv_scale(photons) + 1.0 - net.etas
    return float(0.5 * np.sqrt(net.weights**2 @ terms))


def allocate_photons_product(net):
    """Optimal photon split for the product scheme by water-filling.

    Every node with w_m^2 eta_m > 0 receives photons (the marginal gain
    diverges at zero); the Lagrange level is found by bisection with a
    per-node monotone inversion.
    """
    if net.total_photons <= 0:
        raise ValueError("photon budget must be positive")
    m = net.num_nodes
    gain = net.weights**2 * net.etas  # coefficient of the N-dependent term
    active = gain > 0.0
    photons = np.zeros(m)
    if not np.any(active):
        return AllocationResult(photons, product_objective(net, photons), 0.0, 0)

    budget = net.total_photons
    idx = np.flatnonzero(active)

    def marginal(k, n):
        # -d/dN of the k-th objective term; strictly decreasing in N.
        return -gain[k] * _inv_scale_deriv(n)

    def node_photons(k, level):
        if marginal(k, budget) >= level:
            return budget
        return brentq(
            lambda n: marginal(k, n) - level, ALLOC_FLOOR, budget, xtol=1e-14
        )

    def total(level):
        return sum(node_photons(k, level) for k in idx)

    lo = min(marginal(k, budget) for k in idx)   # total(lo) >= budget
    hi = max(marginal(k, budget / idx.size) for k in idx)
    it = 0
    while total(hi) > budget:
        hi *= 2.0
        it += 1
        if it > 60:
            raise RuntimeError("failed to bracket the allocation level")
    for it in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if total(mid) > budget:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
    level = 0.5 * (lo + hi)
    for k in idx:
        photons[k] = node_photons(k, level)
    # Stationarity residual over strictly positive allocations.
    residual = max(
        abs(marginal(k, photons[k]) - level) / level for k in idx if photons[k] > 0
    )
    # Repair any bisection slack so the budget constraint holds exactly.
    photons[idx] *= budget / photons[idx].sum()
    return AllocationResult(photons, product_objective(net, photons), float(residual), it + 1)


def optimal_weights_entangled(etas, total_photons):
    """Weights minimizing the entangled rms at a common displacement.

    The quadratic-over-simplex minimum is w_m proportional to 1/c_m with
    c_m the per-node noise coefficient (all positive, so feasible as is).
    """
    etas = np.asarray(etas, dtype=float)
    if np.any(etas <= 0.0) or np.any(etas > 1.0):
        raise ValueError("transmissivities must lie in (0, 1]")
    coeffs = etas * _inv_scale(total_photons) + 1.0 - etas
    inv = 1.0 / coeffs
    return inv / inv.sum()


def optimal_weights_product(etas, total_photons, tol=1e-12):
    """Jointly optimized weights and photon split for the product scheme.

    Alternates the closed-form weight update with the water-filling
    allocation until the objective stalls.
    """
    etas = np.asarray(etas, dtype=float)
    m = etas.size
    weights = np.full(m, 1.0 / m)
    net = WeightedNetwork(m, weights, etas, total_photons)
    result = allocate_photons_product(net)
    best = result.objective
    for _ in range(MAX_ALTERNATIONS):
        coeffs = etas * _inv_scale(result.photons) + 1.0 - etas
        inv = 1.0 / coeffs
        weights = inv / inv.sum()
        net = WeightedNetwork(m, weights, etas, total_photons)
        result = allocate_photons_product(net)
        if best - result.objective < tol:
            break
        best = result.objective
    else:
        raise RuntimeError("weight/allocation alternation did not converge")
    return weights, result
