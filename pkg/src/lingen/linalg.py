"""Dense symmetric/Hermitian kernels used by the estimators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lingen.models import Dataset

SYMMETRY_TOL = 1e-10
CLAMP_TOL = 1e-10


class DegenerateCoordinateError(ValueError):
    """A column has (numerically) zero second moment."""

    def __init__(self, columns):
        self.columns = np.asarray(columns, dtype=int)
        super().__init__(f"zero-variance coordinate(s) at column(s) {self.columns.tolist()[:10]}")


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray


def _as_samples(dataset) -> np.ndarray:
    x = dataset.samples if isinstance(dataset, Dataset) else np.asarray(dataset)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"expected an n x d sample matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite entries")
    return x


def _check_hermitian(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise ValueError("matrix has dimension 0")
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(a - a.conj().T)) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric/Hermitian within tolerance")
    return a


def normalise_phase(v: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component real and positive."""
    k = int(np.argmax(np.abs(v)))
    pivot = v[k]
    if np.iscomplexobj(v):
        return v * (np.conj(pivot) / np.abs(pivot))
    return v if pivot > 0 else -v


def _sqrt_from_eigh(w: np.ndarray, V: np.ndarray) -> np.ndarray:
    lam_max = max(np.max(np.abs(w)), np.finfo(float).tiny)
    if np.min(w) < -CLAMP_TOL * lam_max:
        raise ValueError(f"matrix is not PSD: eigenvalue {np.min(w):.3e} below -{CLAMP_TOL:g} * lambda_max")
    root = np.sqrt(np.clip(w, 0.0, None))
    s = (V * root) @ V.conj().T
    return (s + s.conj().T) / 2


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues in ``[-1e-10 * lambda_max, 0)`` are treated as rounding noise
    and clamped to zero; anything more negative raises.
    """
    a = _check_hermitian(a)
    w, V = np.linalg.eigh(a)
    return _sqrt_from_eigh(w, V)


def leading_eigenpair(a: np.ndarray) -> EigenPair:
    a = _check_hermitian(a)
    w, V = np.linalg.eigh(a)
    return EigenPair(float(w[-1]), normalise_phase(V[:, -1]))


def spectral_norm(a: np.ndarray) -> float:
    a = _check_hermitian(a)
    return float(np.max(np.abs(np.linalg.eigvalsh(a))))


@dataclass(frozen=True)
class GenerativeModel:
    """Gaussian generator ``x = sqrt(sigma_hat) z`` fitted to a dataset.

    ``sigma_hat`` is the uncentred second-moment matrix plus ``sigma_reg**2 I``.
    The square root and the top eigenpair come from one eigendecomposition done
    at construction.
    """

    sigma_hat: np.ndarray
    sigma_reg: float
    sqrt_sigma_hat: np.ndarray
    top: EigenPair

    @property
    def d(self) -> int:
        return self.sigma_hat.shape[0]

    def generate(self, latents: np.ndarray) -> np.ndarray:
        """Columns of ``latents`` (d x L) mapped to generated samples (d x L)."""
        return self.sqrt_sigma_hat @ latents

    def draw_latents(self, n_latents: int, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal((self.d, n_latents))


def from_covariance(sigma_hat: np.ndarray, sigma_reg: float = 0.0) -> GenerativeModel:
    sigma_hat = np.array(_check_hermitian(sigma_hat))
    w, V = np.linalg.eigh(sigma_hat)
    root = _sqrt_from_eigh(w, V)
    top = EigenPair(float(w[-1]), normalise_phase(V[:, -1]))
    for a in (sigma_hat, root, top.vector):
        a.setflags(write=False)
    return GenerativeModel(sigma_hat=sigma_hat, sigma_reg=float(sigma_reg), sqrt_sigma_hat=root, top=top)


def empirical_covariance(dataset, sigma_reg: float = 0.0) -> GenerativeModel:
    """``(1/n) sum_mu x_mu x_mu^H + sigma_reg^2 I``; no mean subtraction, divisor ``n``."""
    if not sigma_reg >= 0:
        raise ValueError(f"sigma_reg must be >= 0, got {sigma_reg}")
    x = _as_samples(dataset)
    n, d = x.shape
    s = (x.T @ x.conj()) / n
    s = (s + s.conj().T) / 2
    s[np.diag_indices(d)] += sigma_reg**2
    return from_covariance(s, sigma_reg)


def correlation_matrix(samples, center: bool = False, min_moment: float = 1e-12) -> np.ndarray:
    """Hermitian correlation matrix ``E[x_k conj(x_l)] / sqrt(E|x_k|^2 E|x_l|^2)``.

    With ``center`` the column means are removed first.  The diagonal is set to
    exactly one.
    """
    x = _as_samples(samples)
    if center:
        x = x - x.mean(axis=0)
    n = x.shape[0]
    moments = np.sum(np.abs(x) ** 2, axis=0) / n
    bad = np.flatnonzero(~(moments > min_moment))
    if bad.size:
        raise DegenerateCoordinateError(bad)
    c = (x.T @ x.conj()) / n
    scale = 1.0 / np.sqrt(moments)
    c = c * np.outer(scale, scale)
    c = (c + c.conj().T) / 2
    c[np.diag_indices_from(c)] = 1.0
    return c
