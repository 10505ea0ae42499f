"""Dataset container I/O and the Fourier-domain analysis path.

Container layout (``MGDM1``)::

    b"MGDM1 <n> <h> <w>\\n"   ASCII header, decimal sizes
    n*h*w float64 values      little-endian, row-major, sample by sample

Real image corpora are converted to this format externally (grayscale, crop,
rescale); nothing here decodes image files.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from lingen.linalg import _as_samples, correlation_matrix
from lingen import models
from lingen.models import Dataset
from lingen.overlaps import OverlapEstimate, rotated_subspace_overlap
from lingen.rng import as_generator

MAGIC = b"MGDM1"
_MAX_HEADER = 128


class ContainerError(ValueError):
    pass


def write_container(dataset, h: int, w: int, path) -> None:
    x = np.ascontiguousarray(_as_samples(dataset), dtype="<f8")
    n, d = x.shape
    if d != h * w:
        raise ValueError(f"d={d} does not equal h*w={h}*{w}")
    header = MAGIC + f" {n} {h} {w}\n".encode("ascii")
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(x.tobytes(order="C"))
    os.replace(tmp, path)


def read_header(fh) -> tuple[int, int, int]:
    line = fh.readline(_MAX_HEADER)
    if not line.startswith(MAGIC + b" "):
        raise ContainerError(f"bad magic: expected {MAGIC!r}")
    if not line.endswith(b"\n"):
        raise ContainerError("header is not newline-terminated")
    parts = line[len(MAGIC):].split()
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        raise ContainerError(f"malformed header {line!r}")
    n, h, w = (int(p) for p in parts)
    if n < 1 or h < 1 or w < 1:
        raise ContainerError(f"sizes must be positive, got n={n} h={h} w={w}")
    return n, h, w


def read_container(path) -> Dataset:
    """Load a container; the image shape is kept in ``provenance``."""
    with open(path, "rb") as fh:
        n, h, w = read_header(fh)
        payload = fh.read()
    expected = 8 * n * h * w
    if len(payload) != expected:
        raise ContainerError(f"size mismatch: header declares {expected} payload bytes, file has {len(payload)}")
    x = np.frombuffer(payload, dtype="<f8").reshape(n, h * w).astype(float)
    if not np.all(np.isfinite(x)):
        raise ContainerError("payload contains non-finite values")
    return Dataset(x, provenance={"path": os.fspath(path), "h": h, "w": w})


@dataclass(frozen=True)
class FourierCorpus:
    coefficients: np.ndarray  # n x d complex
    freq_index: np.ndarray  # d x 2 integer frequencies (k1, k2), signed
    h: int
    w: int

    @property
    def n(self) -> int:
        return self.coefficients.shape[0]

    def inverse(self) -> np.ndarray:
        """Inverse unitary DFT, flattened back to ``n x d`` (complex)."""
        c = self.coefficients.reshape(self.n, self.h, self.w)
        return np.fft.ifft2(c, norm="ortho").reshape(self.n, -1)


def frequency_index(h: int, w: int) -> np.ndarray:
    k1 = np.rint(np.fft.fftfreq(h) * h).astype(int)
    k2 = np.rint(np.fft.fftfreq(w) * w).astype(int)
    g1, g2 = np.meshgrid(k1, k2, indexing="ij")
    return np.stack([g1.ravel(), g2.ravel()], axis=1)


def dft2(samples: np.ndarray, h: int, w: int) -> np.ndarray:
    """Row-wise unitary 2-D DFT of flattened ``h x w`` samples."""
    n, d = samples.shape
    if d != h * w:
        raise ValueError(f"d={d} does not equal h*w={h}*{w}")
    return np.fft.fft2(samples.reshape(n, h, w), norm="ortho").reshape(n, d)


def to_fourier(dataset, h: int, w: int) -> FourierCorpus:
    x = _as_samples(dataset)
    return FourierCorpus(dft2(x, h, w), frequency_index(h, w), int(h), int(w))


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray  # descending
    variances: np.ndarray  # per kept frequency, before standardisation
    freq_index: np.ndarray  # kept frequencies
    dropped: np.ndarray  # flat indices removed before the eigensolve

    def write_csv(self, path, width: Optional[int] = None) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["rank", "eigenvalue", "eigenvalue_over_w"])
            for i, lam in enumerate(self.eigenvalues.tolist(), start=1):
                wr.writerow([i, repr(lam), repr(lam / width) if width else ""])

    def write_variances_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["k1", "k2", "variance"])
            for (k1, k2), v in zip(self.freq_index.tolist(), self.variances.tolist()):
                wr.writerow([k1, k2, repr(v)])


def _select_columns(coefficients, freq_index, center, drop_dc):
    if drop_dc is None:
        drop_dc = center
    keep = np.ones(coefficients.shape[1], dtype=bool)
    if drop_dc:
        keep &= ~np.all(freq_index == 0, axis=1)
    return keep


def fourier_spectrum_report(corpus: FourierCorpus, center: bool = False, drop_dc: Optional[bool] = None) -> SpectrumReport:
    """Eigenvalues of the Fourier-coefficient correlation matrix plus the variance profile.

    ``drop_dc`` defaults to ``center``: after centering, the zero frequency of
    spatially-centred patches carries no variance.
    """
    keep = _select_columns(corpus.coefficients, corpus.freq_index, center, drop_dc)
    x = corpus.coefficients[:, keep]
    xc = x - x.mean(axis=0) if center else x
    variances = np.mean(np.abs(xc) ** 2, axis=0)
    rho = correlation_matrix(x, center=center)
    eig = np.linalg.eigvalsh(rho)[::-1].copy()
    return SpectrumReport(eig, variances, corpus.freq_index[keep], np.flatnonzero(~keep))


def qstar_on_corpora(
    corpus_a,
    corpus_b,
    h: int,
    w: int,
    phase_randomize: bool = False,
    seed=None,
    center: bool = False,
    drop_dc: Optional[bool] = None,
) -> OverlapEstimate:
    """Rotated subspace overlap of two image corpora in the Fourier basis.

    With ``phase_randomize`` every coefficient of every image gets an
    independent uniform phase before the correlation matrices are formed
    (independent child streams of ``seed`` for the two corpora).
    """
    fa, fb = to_fourier(corpus_a, h, w), to_fourier(corpus_b, h, w)
    xa, xb = fa.coefficients, fb.coefficients
    if xa.shape[1] != xb.shape[1]:
        raise ValueError("corpora have different dimensions")
    if phase_randomize:
        ga, gb = as_generator(seed).spawn(2)
        xa, xb = models.phase_randomize(xa, ga), models.phase_randomize(xb, gb)
    keep = _select_columns(xa, fa.freq_index, center, drop_dc)
    return rotated_subspace_overlap(xa[:, keep], xb[:, keep], basis=None, center=center)


def radial_powerlaw_amplitudes(h: int, w: int, alpha: float) -> np.ndarray:
    """Amplitude per frequency, ``(1 + |k|)^-alpha`` normalised to unit energy.

    Symmetric under ``k -> -k`` so that real images stay real.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    idx = frequency_index(h, w)
    radius = np.hypot(idx[:, 0], idx[:, 1])
    s = (1.0 + radius) ** (-float(alpha))
    return s / np.sqrt(np.sum(s**2))


def fourier_powerlaw_images(n: int, h: int, w: int, alpha: float, beta: float, seed, spike_seed=None) -> Dataset:
    """Real images whose Fourier coefficients follow the power-law model.

    Coefficients are ``D (I + a u u^H) Z`` with ``Z`` the unitary DFT of white
    noise, ``a = sqrt(1 + beta) - 1`` and ``u`` the normalised DFT of a real
    Gaussian vector.  Both ``D`` and ``u`` respect the conjugate symmetry of
    real signals, so ``u^H Z`` is real and the inverse transform is real.
    The spike direction is drawn from ``spike_seed`` (defaults to ``seed``) so
    that disjoint corpora can share it.
    """
    rng = as_generator(seed)
    srng = as_generator(spike_seed) if spike_seed is not None else rng
    d = h * w
    v = srng.standard_normal((1, d))
    u = dft2(v, h, w)[0]
    u /= np.linalg.norm(u)
    amps = radial_powerlaw_amplitudes(h, w, alpha)
    a = np.sqrt(1.0 + float(beta)) - 1.0
    z = dft2(rng.standard_normal((n, d)), h, w)
    proj = (z @ u.conj()).real
    y = (z + a * np.outer(proj, u)) * amps
    x = np.fft.ifft2(y.reshape(n, h, w), norm="ortho").reshape(n, d).real
    return Dataset(x, provenance={"model": "fourier-powerlaw", "h": h, "w": w, "alpha": alpha, "beta": beta})
