"""Rate calculus: the critical scale t_n, bandwidth conditions, bias bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import DomainError, NoRootError
from .gph import weights

T_FLOOR = 1e-30


@dataclass(frozen=True)
class RatePoint:
    n: float
    t_n: float
    rate: float

    @property
    def residual(self):
        return self.rate * math.sqrt(self.n * self.t_n) - 1.0


def critical_function(envelope, n, t):
    """g(t) = eta_star(t) * sqrt(n t); the critical scale solves g = 1."""
    return float(envelope(t)) * math.sqrt(n * t)


def solve_tn(envelope, n, tol=1e-10, max_iter=400):
    """Solve eta_star(t) sqrt(n t) = 1 for t in (1e-30, pi] by bisection in log t.

    g is increasing because eta_star is non-decreasing, so the root is unique.
    """
    if not n > 0:
        raise DomainError("sample size must be positive")
    g_hi = critical_function(envelope, n, math.pi)
    if abs(g_hi - 1.0) <= tol:
        return RatePoint(n, math.pi, float(envelope(math.pi)))
    if g_hi < 1.0:
        raise NoRootError(f"eta_star(pi) * sqrt(n pi) = {g_hi:.6g} < 1: n={n:g} too small "
                          "for this envelope")
    if critical_function(envelope, n, T_FLOOR) >= 1.0:
        raise NoRootError("critical scale lies below 1e-30")
    lo, hi = math.log(T_FLOOR), math.log(math.pi)
    best = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        t = math.exp(mid)
        r = critical_function(envelope, n, t) - 1.0
        if best is None or abs(r) < abs(best[1]):
            best = (t, r)
        if abs(r) <= tol or mid in (lo, hi):
            break
        if r < 0:
            lo = mid
        else:
            hi = mid
    t = best[0]
    return RatePoint(n, t, float(envelope(t)))


def suggested_bandwidth(envelope, n, rate=None):
    """Heuristic m = ceil(log(n) / rate^2), clipped to [2, n/2].

    Then sqrt(m) * rate = sqrt(log n) diverges and m/n = t_n log(n), so the
    ratio eta_star(t_n) / eta_star(m/n) tends to 1 for slowly varying
    envelopes.
    """
    if rate is None:
        rate = solve_tn(envelope, n).rate
    m = math.ceil(math.log(n) / rate ** 2)
    return int(min(max(m, 2), n // 2))


@dataclass
class BandwidthReport:
    n: int
    m: int
    cond_stochastic: float
    cond_ratio: float
    cond_technical: float
    ladder: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(v in ("diverging", "converging") for v in self.verdicts.values())


def _conditions(envelope, n, m):
    rp = solve_tn(envelope, n)
    x = m / n
    ex = float(envelope(x))
    stoch = math.sqrt(m) * rp.rate
    ratio = rp.rate / ex
    tech = math.log(m) * float(envelope.hstar(x)) / (m * ex)
    return stoch, ratio, tech


def check_bandwidth(envelope, n, m: Union[int, Callable], rungs=4):
    """Evaluate the bandwidth conditions along n, 2n, 4n, 8n.

    ``m`` is either a fixed integer or a rule ``m(n)``. The verdicts are
    trend diagnostics over the ladder, since the conditions are limits.
    """
    rule = m if callable(m) else (lambda _n, m=m: m)
    rows = []
    for i in range(rungs):
        ni = n * 2 ** i
        mi = int(rule(ni))
        if not 2 <= mi <= ni / 2:
            raise DomainError(f"bandwidth m={mi} outside [2, n/2] at n={ni}")
        rows.append((ni, mi, *_conditions(envelope, ni, mi)))
    arr = np.array([r[2:] for r in rows])
    verdicts = {
        "stochastic": "diverging" if np.all(np.diff(arr[:, 0]) > 0) else "fail",
        "ratio": "converging" if np.all(np.diff(np.abs(arr[:, 1] - 1)) < 0) else "fail",
        "technical": "converging" if np.all(np.diff(arr[:, 2]) < 0) else "fail",
    }
    n0, m0, s, r, t = rows[0]
    return BandwidthReport(n0, m0, s, r, t, rows, verdicts)


@dataclass(frozen=True)
class BiasTerm:
    """sum nu_k log L(x_k) against the bound m eta*(x_m) + c * correction."""

    value: float
    leading: float
    correction: float

    @property
    def c_empirical(self):
        """Smallest c for which the bound holds at this (n, m)."""
        return max(0.0, (abs(self.value) - self.leading) / self.correction)

    @property
    def bound(self):
        return self.leading + self.c_empirical * self.correction

    @property
    def ratio(self):
        return abs(self.value) / self.leading


def bias_term(L, n, m):
    """Deterministic part of the GPH deviation for the slowly varying factor L.

    ``value`` = sum_k nu_{m,k} log L(x_k) with x_k = 2 pi k / n;
    ``leading`` = m eta*(x_m); ``correction`` = log^2(m) eta*(x_m) + log(m) h*(x_m).
    """
    m = int(m)
    if not 2 <= m <= n / 2:
        raise DomainError("need 2 <= m <= n/2")
    w = weights(m)
    xk = 2 * math.pi * np.arange(1, m + 1) / n
    logl = L.log(xk)
    # sum nu = 0, so subtracting log L(x_1) changes nothing but the rounding
    value = float(w.nu @ (logl - logl[0]))
    env = L.eta.envelope
    xm = xk[-1]
    em = float(env(xm))
    corr = math.log(m) ** 2 * em + math.log(m) * float(env.hstar(xm))
    return BiasTerm(value, m * em, corr)


def bias_sum(eta, n, m):
    """sum_k nu_{m,k} h(x_k) for a member eta (the quantity bounded by m eta*(x_m))."""
    from .svclass import h_values

    w = weights(m)
    xk = 2 * math.pi * np.arange(1, m + 1) / n
    return float(w.nu @ h_values(eta, xk))


@dataclass(frozen=True)
class RateRow:
    n: float
    t_n: float | None
    rate: float | None
    m: int | None
    cond_stochastic: float | None = None
    cond_ratio: float | None = None
    cond_technical: float | None = None
    error: str = ""


def rate_table(envelope, ns):
    """One row per n; rows whose root does not exist carry the error message."""
    rows = []
    for n in ns:
        try:
            rp = solve_tn(envelope, n)
            m = suggested_bandwidth(envelope, n, rp.rate)
            if m >= 2 and m <= n / 2:
                s, r, t = _conditions(envelope, n, m)
            else:
                s = r = t = None
            rows.append(RateRow(n, rp.t_n, rp.rate, m, s, r, t))
        except NoRootError as exc:
            rows.append(RateRow(n, None, None, None, error=str(exc)))
    return rows
