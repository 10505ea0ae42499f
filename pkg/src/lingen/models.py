"""Ground-truth data distributions: spiked Gaussian and power-law model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Union

import numpy as np
from scipy import optimize

from lingen.rng import as_generator


@dataclass(frozen=True)
class Dataset:
    """``n x d`` sample matrix, rows are inputs."""

    samples: np.ndarray
    provenance: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.samples)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError(f"samples must be an n x d matrix with n >= 1, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("samples contain non-finite entries")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]


def _unit_vector(u, d: int) -> np.ndarray:
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape != (d,):
        raise ValueError(f"spike must have length {d}, got {u.shape[0]}")
    norm = np.linalg.norm(u)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError("spike vector must have finite non-zero norm")
    return u / norm


def random_direction(d: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.standard_normal(d)
    return u / np.linalg.norm(u)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not np.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    return beta


@dataclass(frozen=True)
class SpikedModel:
    """``N(0, I + beta u u^T)``."""

    d: int
    beta: float
    u: np.ndarray

    @property
    def spike_scale(self) -> float:
        # sqrt(1 + beta) - 1, the rank-one coefficient of the square root
        return float(np.sqrt(1.0 + self.beta) - 1.0)

    @property
    def covariance(self) -> np.ndarray:
        return np.eye(self.d) + self.beta * np.outer(self.u, self.u)

    @property
    def sqrt_covariance(self) -> np.ndarray:
        return np.eye(self.d) + self.spike_scale * np.outer(self.u, self.u)

    def transform(self, z: np.ndarray) -> np.ndarray:
        """Map rows of standard normals to rows distributed as the model."""
        return z + self.spike_scale * np.outer(z @ self.u, self.u)


@dataclass(frozen=True)
class PowerLawModel:
    """``F^T D (I + beta u u^T) D F`` with power-law amplitudes on the diagonal of ``D``."""

    d: int
    alpha: float
    beta: float
    u: np.ndarray
    F: np.ndarray
    amplitudes: np.ndarray

    @property
    def spike_scale(self) -> float:
        return float(np.sqrt(1.0 + self.beta) - 1.0)

    @property
    def rotated_covariance(self) -> np.ndarray:
        """Covariance in the ``F`` basis, ``D (I + beta u u^T) D``."""
        s = self.amplitudes
        return np.diag(s**2) + self.beta * np.outer(s * self.u, s * self.u)

    @property
    def covariance(self) -> np.ndarray:
        return self.F.T @ self.rotated_covariance @ self.F

    def transform(self, z: np.ndarray) -> np.ndarray:
        # row form of x = F^T D (I + a u u^T) z
        y = (z + self.spike_scale * np.outer(z @ self.u, self.u)) * self.amplitudes
        return y @ self.F

    def leading_eigenpair(self) -> tuple[float, np.ndarray]:
        """Top eigenpair of the population covariance from the secular equation.

        The top eigenvalue solves ``1 = beta * sum_i s_i^2 u_i^2 / (lam - s_i^2)``
        above ``max s_i^2``; in the ``F`` basis the eigenvector has components
        ``s_i u_i / (lam - s_i^2)``.  Returns the eigenvector in the original
        coordinates (``F^T`` applied), unit norm, unnormalised sign.
        """
        if self.beta <= 0:
            raise ValueError("the secular-equation route needs beta > 0")
        s2 = self.amplitudes**2
        w = self.beta * s2 * self.u**2
        top = s2.max()
        if w[np.argmax(s2)] == 0.0:
            raise ValueError("spike is orthogonal to the leading amplitude; eigenvalue is degenerate")

        def secular(lam):
            return 1.0 - np.sum(w / (lam - s2))

        hi = top + w.sum()
        lo = top + np.finfo(float).eps * max(top, 1.0)
        while secular(lo) > 0:  # pragma: no cover - only for near-zero gaps
            lo = top + (lo - top) / 2
        lam = optimize.brentq(secular, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        v_rot = self.amplitudes * self.u / (lam - s2)
        v = self.F.T @ v_rot
        return float(lam), v / np.linalg.norm(v)


Model = Union[SpikedModel, PowerLawModel]


def make_spiked_model(d: int, beta: float, spike=None) -> SpikedModel:
    """Build a spiked model.

    ``spike`` is either a vector (normalised here) or a seed from which a
    direction uniform on the sphere is drawn.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    beta = _check_beta(beta)
    if spike is None:
        raise ValueError("pass a spike vector or a seed for it")
    if isinstance(spike, (int, np.integer, np.random.Generator, np.random.SeedSequence)):
        u = random_direction(d, as_generator(spike))
    else:
        u = _unit_vector(spike, d)
    u.setflags(write=False)
    return SpikedModel(d=int(d), beta=beta, u=u)


def powerlaw_amplitudes(d: int, alpha: float) -> np.ndarray:
    """``s_k ~ k^-alpha`` for ``k = 1..d``, normalised so that ``sum s_k^2 = 1``."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    s = np.arange(1, d + 1, dtype=float) ** (-float(alpha))
    return s / np.sqrt(np.sum(s**2))


def haar_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed)."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def make_powerlaw_model(d: int, alpha: float, beta: float, basis: str = "haar", seed=None, spike=None) -> PowerLawModel:
    """Power-law model with a Haar or identity basis.

    The basis and (unless ``spike`` is given) the spike direction are drawn
    from ``seed``; the basis is drawn first.
    """
    beta = _check_beta(beta)
    amps = powerlaw_amplitudes(d, alpha)
    if basis not in ("haar", "identity"):
        raise ValueError(f"basis must be 'haar' or 'identity', got {basis!r}")
    rng = as_generator(seed) if (basis == "haar" or spike is None) else None
    F = haar_orthogonal(d, rng) if basis == "haar" else np.eye(d)
    u = random_direction(d, rng) if spike is None else _unit_vector(spike, d)
    for a in (amps, F, u):
        a.setflags(write=False)
    return PowerLawModel(d=int(d), alpha=float(alpha), beta=beta, u=u, F=F, amplitudes=amps)


def sample_dataset(model: Model, n: int, seed) -> Dataset:
    """Draw ``n`` i.i.d. rows from the model (zero mean, no centering)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = as_generator(seed)
    z = rng.standard_normal((int(n), model.d))
    kind = "spiked" if isinstance(model, SpikedModel) else "powerlaw"
    return Dataset(model.transform(z), provenance={"model": kind, "d": model.d, "beta": model.beta, "n": int(n)})


def phase_randomize(coefficients: np.ndarray, seed) -> np.ndarray:
    """Multiply every entry by an independent uniform phase on ``[-pi, pi]``."""
    x = np.asarray(coefficients)
    theta = as_generator(seed).uniform(-np.pi, np.pi, size=x.shape)
    return x * np.exp(1j * theta)
