"""Exact stationary Gaussian simulation by circulant embedding.

Replicate ``r`` is driven by a Philox counter-based stream keyed on
``(seed, r // 2)``; each complex FFT yields two independent real paths, the
real part for even ``r`` and the imaginary part for odd ``r``. A replicate's
values therefore do not depend on how many replicates are requested.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmbeddingError

CLIP_TOL = 1e-6


@dataclass(frozen=True)
class CirculantEmbedding:
    size: int
    eigenvalues: np.ndarray
    clip_mass: float
    n: int


@dataclass(frozen=True)
class SamplePath:
    values: np.ndarray
    seed: int
    model_id: str = ""
    replicate: int = 0

    def __len__(self):
        return len(self.values)


def embedding_size(n, pad=False):
    size = max(2 * (n - 1), 1)
    if pad:
        size = 1 << int(math.ceil(math.log2(size))) if size > 1 else 1
    return size


def build_embedding(gamma, n, pad=False, tol=CLIP_TOL):
    """Circulant embedding of the n x n Toeplitz covariance.

    The first row is (g0, ..., g_{M/2}, g_{M/2-1}, ..., g1) with M = 2(n-1),
    or the next power of two when ``pad`` is set (the extra lags must then be
    present in ``gamma``). Negative eigenvalues are clipped to 0 when their
    total mass is at most ``tol`` times the total absolute mass.
    """
    g = np.asarray(getattr(gamma, "gamma", gamma), dtype=float)
    n = int(n)
    if n < 1:
        raise DomainError("n must be positive")
    M = embedding_size(n, pad)
    half = M // 2
    if len(g) < max(n, half + 1):
        raise DomainError(f"need autocovariances up to lag {max(n - 1, half)}, got {len(g) - 1}")
    if M == 1:
        row = g[:1]
    else:
        row = np.concatenate([g[:half + 1], g[half - 1:0:-1]])
    lam = np.fft.fft(row).real
    neg = -lam[lam < 0].sum()
    total = np.abs(lam).sum()
    if total == 0:
        raise EmbeddingError("autocovariance is identically zero", 0.0)
    if neg / total > tol:
        raise EmbeddingError(
            f"circulant embedding not positive semidefinite: negative mass "
            f"{neg:.3g} ({neg / total:.2e} of total) exceeds tolerance {tol:g}", neg)
    return CirculantEmbedding(M, np.maximum(lam, 0.0), float(neg), n)


def _stream(seed, index):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def _pair_block(emb, n, seed, pairs):
    M = emb.size
    scale = np.sqrt(emb.eigenvalues / M)
    out = np.empty((2 * len(pairs), n))
    for i, p in enumerate(pairs):
        rng = _stream(seed, p)
        z = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        y = np.fft.fft(scale * z)[:n]
        out[2 * i] = y.real
        out[2 * i + 1] = y.imag
    return out


def sample_array(emb, n, seed, reps, start=0, workers=1):
    """Replicates start..start+reps-1 as a (reps, n) array."""
    n, reps = int(n), int(reps)
    if n > emb.n:
        raise DomainError(f"embedding built for n={emb.n}, asked for {n}")
    if seed < 0:
        raise DomainError("seed must be non-negative")
    if reps <= 0:
        return np.empty((0, n))
    first, last = start // 2, (start + reps - 1) // 2
    pairs = list(range(first, last + 1))
    if workers > 1 and len(pairs) > 1:
        chunks = [pairs[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(workers) as ex:
            blocks = list(ex.map(lambda c: _pair_block(emb, n, seed, c), chunks))
        allp = np.empty((2 * len(pairs), n))
        for c, b in zip(chunks, blocks):
            for i, p in enumerate(c):
                allp[2 * (p - first):2 * (p - first) + 2] = b[2 * i:2 * i + 2]
    else:
        allp = _pair_block(emb, n, seed, pairs)
    off = start - 2 * first
    return allp[off:off + reps]


def sample(emb, n, seed, reps=1, model_id="", workers=1):
    """Exact Gaussian sample paths as :class:`SamplePath` objects."""
    arr = sample_array(emb, n, seed, reps, workers=workers)
    return [SamplePath(row, int(seed), model_id, r) for r, row in enumerate(arr)]


def simulate_model(model, n, seed, reps=1, workers=1):
    """Autocovariance, embedding and sampling for a model in one call."""
    from .models import autocovariance

    gamma = autocovariance(model, max(n - 1, 0))
    emb = build_embedding(gamma, n)
    return sample_array(emb, n, seed, reps, workers=workers)
