"""Discrete Fourier transform, periodogram, Dirichlet/Fejer kernels and exact
DFT covariances.

Conventions: d_j = (2 pi n)^(-1/2) sum_{t=1}^n X_t exp(-i t x_j) with
x_j = 2 pi j / n, I_j = |d_j|^2. The FFT sums from t = 0, so its output is
multiplied by exp(-i x_j).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DomainError


@dataclass(frozen=True)
class Periodogram:
    n: int
    freqs: np.ndarray
    ordinates: np.ndarray

    def __len__(self):
        return len(self.ordinates)


def _values(path):
    return np.asarray(getattr(path, "values", path), dtype=float)


def fourier_frequencies(n, full=False):
    j = np.arange(0 if full else 1, (n if full else n // 2 + 1))
    return j, 2 * math.pi * j / n


def dft(path, full=False):
    """d_j for j = 1..floor(n/2) (or j = 0..n-1 with ``full``), along the last axis."""
    x = _values(path)
    n = x.shape[-1]
    if n < 2:
        raise DomainError("need at least two observations")
    j, xj = fourier_frequencies(n, full)
    F = np.fft.fft(x, axis=-1)[..., j]
    return F * np.exp(-1j * xj) / math.sqrt(2 * math.pi * n)


def dft_direct(path, j):
    """O(n^2) direct summation of d_j (reference implementation)."""
    x = _values(path)
    n = x.shape[-1]
    t = np.arange(1, n + 1)
    xj = 2 * math.pi * np.asarray(j)[..., None] / n
    return (np.exp(-1j * t * xj) @ x) / math.sqrt(2 * math.pi * n)


def periodogram(path):
    x = _values(path)
    d = dft(x)
    n = x.shape[-1]
    _, xj = fourier_frequencies(n)
    return Periodogram(n, xj, np.abs(d) ** 2)


def log_periodogram(paths, m=None):
    """log I_j for j = 1..m over a (reps, n) array (vectorised helper)."""
    d = dft(paths)
    if m is not None:
        d = d[..., :m]
    return np.log(np.abs(d) ** 2)


def dirichlet(n, x):
    """D_n(x) = (2 pi n)^(-1/2) sum_{t=1}^n exp(-i t x)."""
    x = np.asarray(x, dtype=float)
    q = np.round(x / (2 * math.pi))
    eps = x - 2 * math.pi * q
    sign = np.where(((n - 1) * q.astype(np.int64)) % 2 == 0, 1.0, -1.0)
    small = np.abs(eps) < 1e-5
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(small,
                         n * (1 - (n * n - 1) * eps ** 2 / 24),
                         np.sin(n * eps / 2) / np.sin(eps / 2))
    out = sign * ratio * np.exp(-1j * (n + 1) * x / 2) / math.sqrt(2 * math.pi * n)
    return out if out.ndim else complex(out)


def fejer(n, x):
    """F_n(x) = |D_n(x)|^2."""
    out = np.abs(dirichlet(n, x)) ** 2
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class DftCovariancePair:
    """cov_dd = E[d_k d_j]; cov_dconj = E[d_k conj(d_j)]."""

    k: int
    j: int
    cov_dd: complex
    cov_dconj: complex


def _dft_vectors(n, idx):
    t = np.arange(1, n + 1)[:, None]
    xj = 2 * math.pi * np.asarray(idx)[None, :] / n
    return np.exp(-1j * t * xj) / math.sqrt(2 * math.pi * n)


def dft_covariance_matrices(gamma, n, indices):
    """E[d_k d_j] and E[d_k conj d_j] for all k, j in ``indices``.

    Exact quadratic forms with the n x n Toeplitz matrix of ``gamma``.
    """
    g = np.asarray(getattr(gamma, "gamma", gamma), dtype=float)
    if len(g) < n:
        raise DomainError(f"need autocovariances up to lag {n - 1}")
    idx = np.asarray(indices)
    if np.any(idx < 1) or np.any(idx > n // 2):
        raise DomainError("indices must lie in 1..floor(n/2)")
    W = _dft_vectors(n, idx)
    G = linalg.toeplitz(g[:n]) @ W
    return W.T @ G, W.T @ np.conj(G)


def exact_dft_covariance(gamma, n, k, j):
    cdd, cconj = dft_covariance_matrices(gamma, n, [k, j])
    return DftCovariancePair(k, j, complex(cdd[0, 1]), complex(cconj[0, 1]))


def covariance_bound_ratio(gamma, f, n, kmin=2, kmax=None):
    """Largest ratio of the DFT covariance deviations to the log(j)/k bound.

    For kmin <= k <= j <= kmax (default kmax = n/2 - 1, excluding Nyquist where
    d_{n/2} is real and E d d = f by construction):

        (|E d_k d_j| + |E d_k conj d_j - f(x_k) 1{k=j}|)
            / (sqrt(f(x_k) f(x_j)) log(j) / k)

    ``f`` is a callable spectral density. Returns (max ratio, ratio matrix).
    """
    if kmax is None:
        kmax = n // 2 - 1
    idx = np.arange(kmin, kmax + 1)
    cdd, cconj = dft_covariance_matrices(gamma, n, idx)
    fx = np.asarray(f(2 * math.pi * idx / n), dtype=float)
    dev = np.abs(cdd) + np.abs(cconj - np.diag(fx))
    K, Jm = np.meshgrid(idx, idx, indexing="ij")
    bound = np.sqrt(np.outer(fx, fx)) * np.log(Jm) / K
    ratio = np.where(K <= Jm, dev / bound, np.nan)
    return float(np.nanmax(ratio)), ratio
