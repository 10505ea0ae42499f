"""Closed-form random-matrix predictions for the linear generative model.

All quantities are asymptotic (``n, d -> inf`` at fixed load ``gamma = n/d``)
and computed from the Marchenko-Pastur law by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

QUAD_ATOL = 1e-9


class DivergenceError(ValueError):
    """The requested quantity is infinite (e.g. KL with sigma=0 below gamma=1)."""


@dataclass(frozen=True)
class MPLaw:
    gamma: float
    lambda_minus: float
    lambda_plus: float
    atom_mass: float


def mp_law(gamma: float) -> MPLaw:
    """Marchenko-Pastur law of ``(1/n) sum x x^T`` for isotropic data at load ``gamma``."""
    gamma = float(gamma)
    if not gamma > 0 or not math.isfinite(gamma):
        raise ValueError(f"gamma must be finite and > 0, got {gamma}")
    r = gamma ** -0.5
    return MPLaw(gamma, (1.0 - r) ** 2, (1.0 + r) ** 2, max(0.0, 1.0 - gamma))


def mp_density(x, gamma: float):
    """Bulk density (the atom at zero is not included)."""
    law = mp_law(gamma)
    x = np.asarray(x, dtype=float)
    inside = (x >= law.lambda_minus) & (x <= law.lambda_plus) & (x > 0)
    xs = np.where(inside, x, 1.0)
    prod = np.clip((law.lambda_plus - xs) * (xs - law.lambda_minus), 0.0, None)
    out = np.where(inside, gamma * np.sqrt(prod) / (2 * np.pi * xs), 0.0)
    return float(out) if out.ndim == 0 else out


def mp_expectation(f: Callable[[float], float], gamma: float, atol: float = QUAD_ATOL) -> float:
    """``E[f(lambda)]`` under the MP law at load ``gamma``, atom included.

    The bulk integral uses ``x = lambda_- + (lambda_+ - lambda_-) sin^2(t)``,
    under which the density times ``dx`` becomes
    ``gamma (lambda_+ - lambda_-)^2 sin^2(t) cos^2(t) / (pi x) dt`` on
    ``[0, pi/2]`` with no edge singularities.
    """
    law = mp_law(gamma)
    total = 0.0
    if law.atom_mass > 0:
        f0 = f(0.0)
        if not math.isfinite(f0):
            raise DivergenceError("integrand is not finite at the atom lambda=0 (gamma < 1)")
        total += law.atom_mass * f0
    width = law.lambda_plus - law.lambda_minus
    lm = law.lambda_minus
    pref = gamma * width**2 / math.pi

    def integrand(t):
        s2 = math.sin(t) ** 2
        c2 = math.cos(t) ** 2
        x = lm + width * s2
        if x <= 0.0:
            # gamma == 1 edge: weight ~ 4 cos^2 t (finite); f(0) may be -inf but has measure zero
            return 0.0
        return pref * s2 * c2 / x * f(x)

    # split at the midpoint so endpoint behaviour is resolved independently
    parts = [(0.0, math.pi / 4), (math.pi / 4, math.pi / 2)]
    for a, b in parts:
        val, _err = integrate.quad(integrand, a, b, epsabs=atol / 4, epsrel=1e-12, limit=500)
        total += val
    return total


def q_analytical(gamma: float, sigma_reg: float = 0.0) -> float:
    """Convergence overlap ``(E sqrt(lambda + s^2))^2 / (1 + s^2)``."""
    s2 = float(sigma_reg) ** 2
    e = mp_expectation(lambda x: math.sqrt(x + s2), gamma)
    return min(1.0, e * e / (1.0 + s2))


def m_asymptotic(n: int, sigma_reg: float = 0.0) -> float:
    """Large-``n`` memorisation overlap ``sqrt(2 log n / (n (1 + s^2)))``."""
    if n < 2:
        raise ValueError(f"the asymptotic memorisation formula needs n >= 2, got {n}")
    return math.sqrt(2.0 * math.log(n) / (n * (1.0 + float(sigma_reg) ** 2)))


@dataclass(frozen=True)
class BBPResult:
    gamma_c: float
    delta: float
    q_theory: float
    no_spike: bool = False


def bbp_overlap(beta: float, gamma: float) -> BBPResult:
    """Top-eigenvector/spike overlap ``delta`` and the predicted ``Q = delta^2``.

    ``beta = 0`` has no spike: the threshold is infinite and ``delta = 0``,
    reported with ``no_spike=True``.
    """
    beta, gamma = float(beta), float(gamma)
    if beta < 0 or not math.isfinite(beta):
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if beta == 0:
        return BBPResult(math.inf, 0.0, 0.0, no_spike=True)
    gamma_c = beta**-2
    if gamma < gamma_c:
        return BBPResult(gamma_c, 0.0, 0.0)
    q = max(0.0, (beta * beta * gamma - 1.0) / (beta * (1.0 + beta * gamma)))
    return BBPResult(gamma_c, math.sqrt(q), q)


def rescale_eigenvalue(lam, sigma_reg: float):
    s2 = float(sigma_reg) ** 2
    return (lam + s2) / (1.0 + s2)


@dataclass(frozen=True)
class KLResult:
    gamma: float
    sigma_reg: float
    d_exact: float
    lower: float
    upper: float
    upper_refined: Optional[float]


def kl_divergence(gamma: float, sigma_reg: float) -> KLResult:
    """Rescaled excess KL divergence ``-1/2 E log nu`` and its bounds in terms of ``q``.

    ``upper`` holds for every load; ``upper_refined`` uses the lower MP edge and
    is only defined for ``gamma >= 1``.  Infinite bounds (``sigma = 0``) are
    returned as ``inf``.
    """
    gamma, s = float(gamma), float(sigma_reg)
    if s < 0:
        raise ValueError(f"sigma_reg must be >= 0, got {s}")
    if s == 0 and gamma < 1:
        raise DivergenceError("KL divergence is infinite for sigma=0 and gamma<1 (atom at zero)")
    s2 = s * s

    def log_nu(x):
        nu = (x + s2) / (1.0 + s2)
        return math.log(nu) if nu > 0 else -math.inf

    d_exact = -0.5 * mp_expectation(log_nu, gamma)
    q = q_analytical(gamma, s)
    lower = -0.5 * math.log(q)
    gap = 1.0 - q
    upper = 2.0 * (1.0 + math.log1p(1.0 / s2)) * gap if s > 0 else math.inf
    refined = None
    if gamma >= 1:
        floor = (mp_law(gamma).lambda_minus + s2) / (1.0 + s2)
        refined = 2.0 * (1.0 - math.log(floor)) * gap if floor > 0 else math.inf
    return KLResult(gamma, s, d_exact, lower, upper, refined)


@dataclass(frozen=True)
class MSResult:
    beta: float
    gamma: float
    lambda_bulk: float
    lambda_spike: Optional[float]
    beta_threshold: float
    d_ms: float

    @property
    def spike_branch(self) -> bool:
        return self.lambda_spike is not None


def lambda_bulk(gamma: float) -> float:
    return 1.0 / gamma + 2.0 / math.sqrt(gamma)


def lambda_spike(beta: float, gamma: float) -> float:
    return (1.0 + beta) / (2.0 * beta * gamma) * (1.0 + math.sqrt(1.0 + 4.0 * beta * gamma))


def ms_distance(beta: float, gamma: float) -> MSResult:
    """Asymptotic max-sliced distance ``1/2 ||Sigma* - Sigma_hat||_op``.

    Bulk branch below ``beta = 1 + gamma^-1/2``, spike branch at or above it.
    """
    beta, gamma = float(beta), float(gamma)
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    bulk = lambda_bulk(gamma)
    threshold = 1.0 + gamma**-0.5
    if beta >= threshold:
        spike = lambda_spike(beta, gamma)
        return MSResult(beta, gamma, bulk, spike, threshold, 0.5 * spike)
    return MSResult(beta, gamma, bulk, None, threshold, 0.5 * bulk)


def ms_asymptotic(beta: float, Q: float) -> float:
    """Leading behaviour ``1/2 sqrt(beta (1 + beta)) sqrt(1 - Q)`` as ``Q -> 1``."""
    if not 0.0 <= Q <= 1.0:
        raise ValueError(f"Q must lie in [0, 1], got {Q}")
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    return 0.5 * math.sqrt(beta * (1.0 + beta)) * math.sqrt(1.0 - Q)
