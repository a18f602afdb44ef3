"""Normalised (Zygmund-class) slowly varying functions.

A slowly varying factor is represented as

    L(x) = L(x0) * exp(-int_x^x0 eta(s)/s ds),   |eta| <= eta_star,

with a non-decreasing envelope ``eta_star`` that vanishes at 0. The
normalisation point ``x0`` defaults to pi.

The two logarithmic envelope kinds are only non-decreasing and finite on an
initial segment, so they are continued by a constant beyond a cap point:

* ``log_inverse``:    rho / log(1/s)                    for s <= 1/e, rho after;
* ``loglog_inverse``: 1 / (log(1/s) * log log(1/s))     for s <= exp(-e), 1/e after.

Both continuations are continuous at the cap and keep the envelope monotone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError

LOG_INVERSE_CAP = math.exp(-1.0)
LOGLOG_CAP = math.exp(-math.e)
QUAD_RTOL = 1e-10
GRID_FLOOR = 1e-12

ENVELOPE_KINDS = ("power", "log_inverse", "loglog_inverse", "custom")

# Gauss-Legendre rule for the vectorised cumulative integrals.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_GL_PANEL = 0.25  # max panel width in log(s)


@dataclass(frozen=True)
class Envelope:
    """Non-decreasing envelope eta_star on (0, pi] with eta_star(0+) = 0.

    Use the constructors :meth:`power`, :meth:`log_inverse`,
    :meth:`loglog_inverse` and :meth:`custom` rather than the raw fields.
    """

    kind: str
    c: float = 1.0
    beta: float = 1.0
    rho: float = 1.0
    fn: Optional[Callable] = field(default=None, compare=False, repr=False)
    custom_index: float = 0.0

    def __post_init__(self):
        if self.kind not in ENVELOPE_KINDS:
            raise DomainError(f"unknown envelope kind {self.kind!r}")
        if self.kind == "power" and (self.c <= 0 or self.beta <= 0):
            raise DomainError("power envelope needs c > 0 and beta > 0")
        if self.kind == "log_inverse" and self.rho <= 0:
            raise DomainError("log_inverse envelope needs rho > 0")
        if self.kind == "custom" and self.fn is None:
            raise DomainError("custom envelope needs a callable")

    @classmethod
    def power(cls, c=1.0, beta=1.0):
        return cls("power", c=float(c), beta=float(beta))

    @classmethod
    def log_inverse(cls, rho=1.0):
        return cls("log_inverse", rho=float(rho))

    @classmethod
    def loglog_inverse(cls):
        return cls("loglog_inverse")

    @classmethod
    def custom(cls, fn, rv_index=0.0):
        return cls("custom", fn=fn, custom_index=float(rv_index))

    @property
    def rv_index(self):
        """Index of regular variation at 0."""
        if self.kind == "power":
            return self.beta
        if self.kind == "custom":
            return self.custom_index
        return 0.0

    @property
    def has_closed_form(self):
        return self.kind != "custom"

    @property
    def kinks(self):
        """Points where eta_star is continuous but not smooth."""
        if self.kind == "log_inverse":
            return (LOG_INVERSE_CAP,)
        if self.kind == "loglog_inverse":
            return (LOGLOG_CAP,)
        return ()

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power":
            out = self.c * s ** self.beta
        elif self.kind == "log_inverse":
            out = self.rho / np.log(1.0 / np.minimum(s, LOG_INVERSE_CAP))
        elif self.kind == "loglog_inverse":
            u = np.log(1.0 / np.minimum(s, LOGLOG_CAP))
            out = 1.0 / (u * np.log(u))
        else:
            out = np.asarray(self.fn(s), dtype=float)
        return out if out.ndim else float(out)

    def primitive(self, s):
        """Closed-form antiderivative of eta_star(s)/s (up to a constant)."""
        s = np.asarray(s, dtype=float)
        if self.kind == "power":
            out = self.c / self.beta * s ** self.beta
        elif self.kind == "log_inverse":
            lo = np.minimum(s, LOG_INVERSE_CAP)
            out = np.where(s <= LOG_INVERSE_CAP,
                           -self.rho * np.log(np.log(1.0 / lo)),
                           self.rho * (np.log(np.maximum(s, LOG_INVERSE_CAP)) + 1.0))
        elif self.kind == "loglog_inverse":
            lo = np.minimum(s, LOGLOG_CAP)
            out = np.where(s <= LOGLOG_CAP,
                           -np.log(np.log(np.log(1.0 / lo))),
                           np.log(np.maximum(s, LOGLOG_CAP)) / math.e + 1.0)
        else:
            raise DomainError("custom envelopes have no closed-form primitive")
        return out if out.ndim else float(out)

    def hstar(self, x, upper=math.pi):
        """h*(x) = int_x^upper eta_star(s)/s ds."""
        if self.has_closed_form:
            return self.primitive(upper) - self.primitive(x)
        x = np.asarray(x, dtype=float)
        if x.ndim:
            return np.array([_log_integral(self, xi, upper) for xi in x])
        return _log_integral(self, float(x), upper)

    def to_record(self):
        rec = {"kind": self.kind}
        if self.kind == "power":
            rec.update(c=self.c, beta=self.beta)
        elif self.kind == "log_inverse":
            rec.update(rho=self.rho)
        return rec

    @classmethod
    def from_record(cls, rec):
        """Build from a key-value record such as ``{"kind": "power", "c": "1"}``."""
        kind = str(rec.get("kind", "")).strip()
        if kind == "power":
            return cls.power(float(rec.get("c", 1.0)), float(rec.get("beta", 1.0)))
        if kind == "log_inverse":
            return cls.log_inverse(float(rec.get("rho", 1.0)))
        if kind == "loglog_inverse":
            return cls.loglog_inverse()
        raise DomainError(f"cannot build envelope of kind {kind!r} from a record")


@dataclass(frozen=True)
class EtaFunction:
    """A member eta with |eta| <= eta_star.

    Either ``scale`` is set (eta = scale * eta_star, closed forms available)
    or ``fn`` is a vectorised callable. ``breakpoints`` lists points where
    eta jumps, so quadrature can split there.
    """

    envelope: Envelope
    fn: Optional[Callable] = field(default=None, compare=False, repr=False)
    scale: Optional[float] = None
    breakpoints: tuple = ()
    label: str = ""

    def __post_init__(self):
        if (self.fn is None) == (self.scale is None):
            raise DomainError("give exactly one of fn or scale")

    @classmethod
    def scaled(cls, envelope, scale):
        return cls(envelope, scale=float(scale), label=f"{float(scale):g}*envelope")

    @property
    def has_closed_form(self):
        return self.scale is not None and self.envelope.has_closed_form

    def __call__(self, s):
        if self.scale is not None:
            return self.scale * self.envelope(s)
        out = np.asarray(self.fn(np.asarray(s, dtype=float)), dtype=float)
        return out if out.ndim else float(out)


def step_eta(envelope, threshold, level):
    """eta(s) = 0 on (0, threshold] and ``level`` on (threshold, pi]."""
    def fn(s):
        return np.where(np.asarray(s) > threshold, level, 0.0)
    return EtaFunction(envelope, fn=fn, breakpoints=(float(threshold),),
                       label=f"step({threshold:g},{level:g})")


def random_member(envelope, rng, n_terms=3, max_freq=3.0):
    """Random smooth member eta = eta_star * g(log s) with |g| <= 1."""
    amps = rng.dirichlet(np.ones(n_terms)) * rng.uniform(0.5, 1.0)
    amps *= rng.choice([-1.0, 1.0], size=n_terms)
    freqs = rng.uniform(0.0, max_freq, size=n_terms)
    phases = rng.uniform(0.0, 2 * np.pi, size=n_terms)

    def fn(s):
        u = np.log(s)[..., None]
        g = np.sum(amps * np.sin(freqs * u + phases), axis=-1)
        return g * envelope(s)

    return EtaFunction(envelope, fn=fn, label="random")


@dataclass(frozen=True)
class SlowlyVaryingL:
    """L(x) = l_pi * exp(-int_x^upper eta(s)/s ds).

    ``l_pi`` is the value at the normalisation point ``upper`` (pi unless
    stated otherwise).
    """

    eta: EtaFunction
    l_pi: float = 1.0
    upper: float = math.pi

    def __post_init__(self):
        if not self.l_pi > 0:
            raise DomainError("L at the normalisation point must be positive")
        if not 0 < self.upper <= math.pi:
            raise DomainError("normalisation point must lie in (0, pi]")

    @property
    def closed_form(self):
        """Tag of the analytic formula used, or None."""
        if self.eta.has_closed_form:
            return f"{self.eta.envelope.kind}^{self.eta.scale:g}"
        return None

    def log(self, x):
        """Vectorised log L(x)."""
        return math.log(self.l_pi) + h_values(self.eta, x, self.upper)

    def __call__(self, x):
        out = np.exp(self.log(x))
        return out if np.ndim(out) else float(out)


def _log_integral(fn, a, b, points=()):
    """int_a^b fn(s)/s ds by adaptive quadrature in u = log s."""
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    la, lb = math.log(a), math.log(b)
    cuts = sorted(math.log(p) for p in points if a < p < b)
    edges = [la, *cuts, lb]
    total = 0.0
    for u0, u1 in zip(edges[:-1], edges[1:]):
        val, err, info = _quad(lambda u: float(fn(math.exp(u))), u0, u1)
        total += val
    return sign * total


def _quad(func, a, b, rtol=QUAD_RTOL, limit=400):
    out = integrate.quad(func, a, b, epsabs=1e-15, epsrel=rtol, limit=limit,
                         full_output=1)
    val, err, info = out[0], out[1], out[2]
    if len(out) > 3 and out[3]:
        ier_msg = out[3]
        # ier=2 (roundoff) is accepted when the error estimate is tiny anyway.
        if not (err <= max(1e-14, 10 * rtol * abs(val))):
            raise QuadratureError(f"quadrature on [{a:g}, {b:g}] failed: {ier_msg}")
    return val, err, info


def _check_x(x, upper=math.pi):
    if not (0 < x <= math.pi):
        raise DomainError(f"frequency {x!r} outside (0, pi]")


def h_and_hstar(eta, x, upper=math.pi, method="auto"):
    """Return (h(x), h*(x)).

    h(x) = -int_x^upper eta(s)/s ds and h*(x) = int_x^upper eta_star(s)/s ds.
    ``method`` is "auto" (closed form when available), "quad" or "closed".
    """
    x = float(x)
    _check_x(x)
    env = eta.envelope
    use_closed = method == "closed" or (method == "auto" and eta.has_closed_form)
    if use_closed:
        if not eta.has_closed_form:
            raise DomainError("no closed form for this eta")
        hstar = float(env.hstar(x, upper))
        return -eta.scale * hstar, hstar
    h = -_log_integral(eta, x, upper, (*eta.breakpoints, *env.kinks))
    hstar = float(env.hstar(x, upper)) if env.has_closed_form else _log_integral(env, x, upper)
    return h, hstar


def eval_L(L, x, method="auto"):
    """L(x) for a single frequency 0 < x <= pi."""
    h, _ = h_and_hstar(L.eta, x, L.upper, method=method)
    return L.l_pi * math.exp(h)


def h_values(eta, x, upper=math.pi):
    """Vectorised h(x) = -int_x^upper eta(s)/s ds over an array of x.

    Closed form when available; otherwise composite Gauss-Legendre panels in
    log(s), accumulated along the sorted grid of requested points.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(x > math.pi):
        raise DomainError("frequencies must lie in (0, pi]")
    if eta.has_closed_form:
        return -eta.scale * eta.envelope.hstar(x, upper)
    flat = x.ravel()
    split = (*eta.breakpoints, *eta.envelope.kinks)
    knots = np.unique(np.concatenate([flat, [upper],
                                      [p for p in split if flat.min() < p < max(upper, flat.max())]]))
    cum = np.concatenate([[0.0], np.cumsum(_segment_integrals(eta, knots))])
    at = dict(zip(knots.tolist(), cum.tolist()))
    idx = np.searchsorted(knots, flat)
    out = cum[idx] - at[float(upper)]
    return out.reshape(x.shape) if x.ndim else float(out[0])


def _segment_integrals(fn, knots):
    """int over [knots[i], knots[i+1]] of fn(s)/s ds for sorted knots."""
    lk = np.log(knots)
    widths = np.diff(lk)
    npan = np.maximum(1, np.ceil(widths / _GL_PANEL).astype(int))
    seg = np.repeat(np.arange(len(widths)), npan)
    start = np.repeat(np.concatenate([[0], np.cumsum(npan)[:-1]]), npan)
    j = np.arange(seg.size) - start
    hw = (widths / npan)[seg]
    a = lk[:-1][seg] + j * hw
    u = a[:, None] + 0.5 * hw[:, None] * (_GL_X + 1.0)
    vals = np.asarray(fn(np.exp(u)), dtype=float)
    panel = 0.5 * hw * (vals @ _GL_W)
    return np.bincount(seg, weights=panel, minlength=len(widths))


@dataclass
class MembershipReport:
    ok: bool
    grid_size: int
    violations: list

    def __bool__(self):
        return self.ok


def verification_grid(grid_size=512, lo=GRID_FLOOR, hi=math.pi):
    """Log-spaced nodes on [lo, hi], nudged away from s = 1."""
    grid = np.geomspace(lo, hi, grid_size)
    near = np.abs(grid - 1.0) < 1e-9
    grid[near] = 1.0 - 1e-6
    return grid


def verify_membership(eta, grid_size=512):
    """Check |eta| <= eta_star on a log-spaced grid over [1e-12, pi]."""
    if grid_size < 2:
        raise DomainError("grid_size must be at least 2")
    s = verification_grid(grid_size)
    e = np.abs(np.asarray(eta(s), dtype=float))
    env = np.asarray(eta.envelope(s), dtype=float)
    bad = ~(e <= env * (1 + 1e-12) + 1e-300)
    violations = [(float(si), float(ei), float(vi))
                  for si, ei, vi in zip(s[bad], e[bad], env[bad])]
    return MembershipReport(not violations, grid_size, violations)


def check_envelope(envelope, grid_size=512):
    """Grid check of the envelope invariants; returns a list of problems."""
    s = verification_grid(grid_size)
    v = np.asarray(envelope(s), dtype=float)
    problems = []
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        problems.append("non-finite or negative values")
    if np.any(np.diff(v) < -1e-12 * np.abs(v[1:])):
        problems.append("not non-decreasing")
    if not v[0] < v[-1]:
        problems.append("does not decrease towards 0")
    if envelope.kind != "custom" and not float(envelope(1e-12)) < 0.1:
        problems.append("eta_star(1e-12) >= 0.1")
    return problems
