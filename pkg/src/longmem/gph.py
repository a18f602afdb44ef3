"""Log-periodogram (GPH) regression estimator of the memory parameter."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

Z95 = 1.959963984540054
LOG_EXP_VAR = math.pi ** 2 / 6  # variance of log of a standard exponential


@dataclass(frozen=True)
class GphWeights:
    m: int
    nu: np.ndarray
    s2: float


def weights(m):
    """nu_k = log k - mean(log 1..m) and s2 = sum nu_k^2 for k = 1..m."""
    m = int(m)
    if m < 2:
        raise DomainError("bandwidth m must be at least 2")
    logk = np.log(np.arange(1, m + 1, dtype=float))
    nu = logk - logk.mean()
    return GphWeights(m, nu, float(nu @ nu))


def ci_halfwidth(s2):
    """Asymptotic 95% half-width for d = alpha/2 given s_m^2."""
    return Z95 * math.sqrt(LOG_EXP_VAR) / (2.0 * math.sqrt(s2))


@dataclass(frozen=True)
class GphFit:
    m: int
    alpha_hat: float
    n: int
    s2: float

    @property
    def d_hat(self):
        return self.alpha_hat / 2

    @property
    def ci_halfwidth(self):
        return ci_halfwidth(self.s2)

    @property
    def ci_low(self):
        return self.d_hat - self.ci_halfwidth

    @property
    def ci_high(self):
        return self.d_hat + self.ci_halfwidth


def _ordinates(I):
    """Return (n, ordinates) from a Periodogram or a plain array (n = None)."""
    if hasattr(I, "ordinates"):
        return I.n, np.asarray(I.ordinates, dtype=float)
    return None, np.asarray(I, dtype=float)


def _log_ordinates(ords, m):
    head = ords[..., :m]
    bad = np.argwhere(~(head > 0))
    if bad.size:
        k = int(bad[0][-1]) + 1
        raise DomainError(f"periodogram ordinate I_{k} is not positive; log-regression undefined")
    return np.log(head)


def estimate(I, m):
    """GPH estimate alpha_hat(m) = -s_m^-2 sum nu_k log I_k."""
    n, ords = _ordinates(I)
    m = int(m)
    if m < 2 or m > ords.shape[-1]:
        raise DomainError(f"bandwidth m={m} outside [2, {ords.shape[-1]}]")
    w = weights(m)
    alpha = -float(w.nu @ _log_ordinates(ords, m)) / w.s2
    return GphFit(m, alpha, n if n is not None else 2 * ords.shape[-1], w.s2)


def estimate_many(log_ordinates, m):
    """Vectorised alpha_hat(m) over the leading axes of a log-periodogram array."""
    w = weights(m)
    return -(np.asarray(log_ordinates)[..., :m] @ w.nu) / w.s2


@dataclass
class BandwidthScan:
    fits: list
    model_id: str = ""
    seed: int | None = None
    n: int | None = None

    def __len__(self):
        return len(self.fits)

    @property
    def m(self):
        return np.array([f.m for f in self.fits])

    @property
    def alpha_hat(self):
        return np.array([f.alpha_hat for f in self.fits])

    @property
    def d_hat(self):
        return self.alpha_hat / 2

    @property
    def halfwidth(self):
        return np.array([f.ci_halfwidth for f in self.fits])


def scan(I, m_min, m_max, step=1, model_id="", seed=None):
    """GPH fits for m = m_min, m_min+step, ..., <= m_max from one periodogram.

    Uses running sums of log k, (log k)^2, log I_k and log k * log I_k, so the
    whole scan costs O(m_max).
    """
    n, ords = _ordinates(I)
    m_min, m_max, step = int(m_min), int(m_max), int(step)
    if not 2 <= m_min <= m_max <= ords.shape[-1]:
        raise DomainError(f"bandwidth range [{m_min}, {m_max}] outside [2, {ords.shape[-1]}]")
    if step < 1:
        raise DomainError("step must be positive")
    y = _log_ordinates(ords, m_max)
    x = np.log(np.arange(1, m_max + 1, dtype=float))
    sx, sxx = np.cumsum(x), np.cumsum(x * x)
    sy, sxy = np.cumsum(y), np.cumsum(x * y)
    fits = []
    for m in range(m_min, m_max + 1, step):
        i = m - 1
        s2 = sxx[i] - sx[i] ** 2 / m
        cov = sxy[i] - sx[i] * sy[i] / m
        fits.append(GphFit(m, -cov / s2, n if n is not None else 2 * ords.shape[-1], s2))
    return BandwidthScan(fits, model_id=model_id, seed=seed, n=n)
