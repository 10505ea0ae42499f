"""Monte-Carlo estimators for the order parameters m, q, Q and Q*."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from lingen.linalg import GenerativeModel, _as_samples, correlation_matrix, leading_eigenpair
from lingen.rng import as_generator

KINDS = ("m", "q", "Q", "Qstar")


@dataclass(frozen=True)
class OverlapEstimate:
    kind: str
    mean: float
    std_err: float
    n_latents: int
    n_trials: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown overlap kind {self.kind!r}")
        if not (-1e-12 <= self.mean <= 1 + 1e-12):
            raise ValueError(f"overlap {self.kind}={self.mean} outside [0, 1]")
        if not math.isfinite(self.std_err):
            raise ValueError("std_err must be finite")


def _latent_estimate(kind: str, values: np.ndarray) -> OverlapEstimate:
    n = values.size
    err = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return OverlapEstimate(kind, math.fsum(values.tolist()) / n, err, n_latents=n, n_trials=1)


def combine_trials(estimates: Sequence[OverlapEstimate]) -> OverlapEstimate:
    """Average per-trial estimates; ``std_err`` from the trial-to-trial spread.

    Summation runs in the given order with exact rounding (``math.fsum``), so
    the result does not depend on how the trials were scheduled.
    """
    if not estimates:
        raise ValueError("no estimates to combine")
    kinds = {e.kind for e in estimates}
    if len(kinds) != 1:
        raise ValueError(f"cannot combine different kinds {sorted(kinds)}")
    means = [e.mean for e in estimates]
    t = len(means)
    mean = math.fsum(means) / t
    if t > 1:
        var = math.fsum((m - mean) ** 2 for m in means) / (t - 1)
        err = math.sqrt(var / t)
    else:
        err = estimates[0].std_err
    return OverlapEstimate(kinds.pop(), mean, err, n_latents=estimates[0].n_latents, n_trials=t)


def _check_pair(a: GenerativeModel, b: GenerativeModel):
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")


def memorisation_overlap(
    model: GenerativeModel,
    train,
    n_latents: int = 64,
    seed=None,
    subtract_baseline: bool = False,
) -> OverlapEstimate:
    """Latent-averaged max cosine similarity between a generated sample and the training rows.

    With ``subtract_baseline`` the chance level ``sqrt(2 log n / d)`` is removed
    from every latent's maximum (clipped at zero); off by default.
    """
    if n_latents < 1:
        raise ValueError("n_latents must be >= 1")
    x = _as_samples(train)
    n, d = x.shape
    if d != model.d:
        raise ValueError(f"dimension mismatch: model {model.d}, data {d}")
    z = model.draw_latents(n_latents, as_generator(seed))
    gen = model.generate(z)
    gen_norm = np.linalg.norm(gen, axis=0)
    if np.any(gen_norm == 0):
        raise ValueError("generated sample has zero norm (sigma_hat = 0?)")
    row_norm = np.linalg.norm(x, axis=1)
    # zero training rows cannot be matched; their cosine is taken as 0
    safe = np.where(row_norm > 0, row_norm, 1.0)
    cos = np.abs(x.conj() @ gen) / safe[:, None] / gen_norm[None, :]
    cos[row_norm == 0] = 0.0
    best = cos.max(axis=0)
    if subtract_baseline and n > 1:
        best = np.clip(best - math.sqrt(2.0 * math.log(n) / d), 0.0, None)
    return _latent_estimate("m", np.minimum(best, 1.0))


def convergence_overlap(
    model_a: GenerativeModel,
    model_b: GenerativeModel,
    n_latents: int = 64,
    seed=None,
) -> OverlapEstimate:
    """Latent-averaged cosine similarity of the two models' outputs for shared latents."""
    _check_pair(model_a, model_b)
    if n_latents < 1:
        raise ValueError("n_latents must be >= 1")
    z = model_a.draw_latents(n_latents, as_generator(seed))
    ga, gb = model_a.generate(z), model_b.generate(z)
    num = np.abs(np.sum(ga.conj() * gb, axis=0))
    den = np.linalg.norm(ga, axis=0) * np.linalg.norm(gb, axis=0)
    if np.any(den == 0):
        raise ValueError("generated sample has zero norm")
    return _latent_estimate("q", np.minimum(num / den, 1.0))


def subspace_overlap(model_a: GenerativeModel, model_b: GenerativeModel) -> OverlapEstimate:
    """``|<v_max(a), v_max(b)>|`` for the two fitted covariances."""
    _check_pair(model_a, model_b)
    value = abs(np.vdot(model_a.top.vector, model_b.top.vector))
    return OverlapEstimate("Q", min(float(value), 1.0), 0.0, n_latents=0)


Basis = Union[None, np.ndarray, Callable[[np.ndarray], np.ndarray]]


def rotate(samples: np.ndarray, basis: Basis) -> np.ndarray:
    """Apply ``y = B x`` to every row; ``basis`` is a matrix, a callable or None."""
    if basis is None:
        return samples
    if callable(basis):
        return basis(samples)
    b = np.asarray(basis)
    if b.shape != (samples.shape[1], samples.shape[1]):
        raise ValueError(f"basis shape {b.shape} does not match d={samples.shape[1]}")
    return samples @ b.T


def rotated_subspace_overlap(samples_a, samples_b, basis: Basis = None, center: bool = False) -> OverlapEstimate:
    """Overlap of the top eigenvectors of the correlation matrices after rotation.

    Complex-valued rotated samples give Hermitian correlation matrices and the
    modulus of the complex inner product.
    """
    xa, xb = _as_samples(samples_a), _as_samples(samples_b)
    if xa.shape[1] != xb.shape[1]:
        raise ValueError(f"dimension mismatch: {xa.shape[1]} vs {xb.shape[1]}")
    va = leading_eigenpair(correlation_matrix(rotate(xa, basis), center=center)).vector
    vb = leading_eigenpair(correlation_matrix(rotate(xb, basis), center=center)).vector
    return OverlapEstimate("Qstar", min(float(abs(np.vdot(va, vb))), 1.0), 0.0, n_latents=0)


def finite_n_memorisation_oracle(
    n: int,
    sigma_reg: float = 0.0,
    n_mc: int = 200_000,
    seed=0,
    return_stderr: bool = False,
    chunk: int = 20_000,
):
    """``E[max_mu |z_mu| / sqrt(n s^2 + sum_mu z_mu^2)]`` for ``n`` standard normals.

    This is the ``d -> inf`` limit of the memorisation overlap at fixed ``n``,
    estimated by plain Monte Carlo.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = as_generator(seed)
    s2 = float(sigma_reg) ** 2
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_mc:
        m = min(chunk, n_mc - done)
        z = rng.standard_normal((m, n))
        den = np.sqrt(n * s2 + np.sum(z * z, axis=1))
        val = np.abs(z).max(axis=1) / den
        total += math.fsum(val.tolist())
        total_sq += math.fsum((val * val).tolist())
        done += m
    mean = total / n_mc
    if not return_stderr:
        return mean
    var = max(total_sq / n_mc - mean * mean, 0.0) * n_mc / max(n_mc - 1, 1)
    return mean, math.sqrt(var / n_mc)
