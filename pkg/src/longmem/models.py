"""Spectral density models f(x) = x^(-alpha) L(x) and their autocovariances.

Kinds
-----
``arfima0d0``    sigma2/(2 pi) |1 - e^{ix}|^(-2d), alpha = 2d
``arfima_noise`` the same plus flat observation noise tau2/(2 pi)
``generic_sv``   |x|^(-alpha) L(|x|) with L from :mod:`longmem.svclass`
``lower_minus``  (T/x)^a on (0, T], 1 on (T, pi]
``lower_plus``   reciprocal of ``lower_minus``
``horror``       autocovariance 1/(k+1)

Autocovariances follow gamma(k) = int_{-pi}^{pi} f(x) e^{ikx} dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import fft as sfft
from scipy import integrate, linalg, special

from .errors import DomainError, QuadratureError
from .svclass import (Envelope, EtaFunction, SlowlyVaryingL, _quad,
                      step_eta, verify_membership)

# log-frequency floor for integrals down to 0; exp(-700) is still a normal double
U_FLOOR = -700.0

MODEL_KINDS = ("arfima0d0", "arfima_noise", "generic_sv", "lower_minus",
               "lower_plus", "horror")


@dataclass(frozen=True)
class SpectralModel:
    """A spectral density with its memory parameter.

    Build instances with the module-level constructors (:func:`arfima`,
    :func:`arfima_noise`, :func:`generic_sv`, :func:`horror`, ...).
    """

    kind: str
    alpha: float
    d: float = 0.0
    sigma2: float = 1.0
    tau2: float = 0.0
    L: Optional[SlowlyVaryingL] = field(default=None, compare=False)
    T: float = 0.0
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise DomainError(f"unknown model kind {self.kind!r}")
        if not -1 < self.alpha < 1:
            raise DomainError("memory parameter must lie in (-1, 1)")

    @property
    def breakpoints(self):
        """Frequencies in (0, pi) where f is not smooth."""
        if self.kind in ("lower_minus", "lower_plus") and 0 < self.T < math.pi:
            return (self.T,)
        if self.L is not None:
            return tuple(self.L.eta.breakpoints)
        return ()

    @property
    def model_id(self):
        if self.kind == "arfima0d0":
            return f"arfima0d0(d={self.d:g},sigma2={self.sigma2:g})"
        if self.kind == "arfima_noise":
            return f"arfima_noise(d={self.d:g},sigma2={self.sigma2:g},tau2={self.tau2:g})"
        if self.kind == "generic_sv":
            tag = self.L.closed_form or self.L.eta.label or "custom"
            return f"generic_sv(alpha={self.alpha:g},L={tag})"
        if self.kind in ("lower_minus", "lower_plus"):
            return f"{self.kind}(T={self.T:.6g},a={self.a:.6g})"
        return "horror"

    def __call__(self, x):
        return spectral_eval(self, x)


def _check_d(d):
    if not abs(d) < 0.5:
        raise DomainError(f"ARFIMA memory requires |d| < 1/2, got d={d}")


def arfima(d, sigma2=1.0):
    _check_d(d)
    return SpectralModel("arfima0d0", alpha=2 * d, d=float(d), sigma2=float(sigma2))


def arfima_noise(d, sigma2=1.0, tau2=1.0):
    _check_d(d)
    if tau2 < 0:
        raise DomainError("noise variance must be non-negative")
    return SpectralModel("arfima_noise", alpha=2 * d, d=float(d),
                         sigma2=float(sigma2), tau2=float(tau2))


def generic_sv(alpha, L):
    return SpectralModel("generic_sv", alpha=float(alpha), L=L)


def log_power_L(rho=1.0):
    """L(x) proportional to log^rho(1/x) near 0, normalised to 1 at 1/e.

    Beyond 1/e the continuation of the log_inverse envelope gives
    L(x) = (e x)^(-rho).
    """
    eta = EtaFunction.scaled(Envelope.log_inverse(rho), -1.0)
    l_pi = (math.e * math.pi) ** (-rho)
    return SlowlyVaryingL(eta, l_pi=l_pi)


def horror():
    return SpectralModel("horror", alpha=0.0)


def lower_minus(T, a):
    return SpectralModel("lower_minus", alpha=float(a), T=float(T), a=float(a))


def lower_plus(T, a):
    return SpectralModel("lower_plus", alpha=-float(a), T=float(T), a=float(a))


def spectral_eval(model, x):
    """Evaluate f(|x|) for 0 < |x| <= pi (vectorised)."""
    xa = np.abs(np.asarray(x, dtype=float))
    if np.any(xa == 0) or np.any(xa > math.pi):
        raise DomainError("spectral density evaluated outside (-pi, pi] \\ {0}")
    out = _density(model, xa)
    return out if out.ndim else float(out)


def _density(model, x):
    k = model.kind
    if k in ("arfima0d0", "arfima_noise"):
        base = model.sigma2 / (2 * math.pi) * (2 * np.sin(x / 2)) ** (-2 * model.d)
        return base + model.tau2 / (2 * math.pi) if k == "arfima_noise" else base
    if k == "generic_sv":
        return np.exp(-model.alpha * np.log(x) + model.L.log(x))
    if k == "lower_minus":
        return np.where(x <= model.T, (model.T / x) ** model.a, 1.0)
    if k == "lower_plus":
        return np.where(x <= model.T, (x / model.T) ** model.a, 1.0)
    # horror: f = (1/2pi) sum_k gamma(|k|) e^{-ikx} with gamma(k) = 1/(k+1),
    # summed in closed form through -log(1 - e^{ix}).
    return (-1.0 - 2 * np.cos(x) * np.log(2 * np.sin(x / 2))
            - np.sin(x) * (x - math.pi)) / (2 * math.pi)


@dataclass(frozen=True)
class AutocovarianceSequence:
    gamma: np.ndarray
    source: str

    def __len__(self):
        return len(self.gamma)

    def __getitem__(self, k):
        return self.gamma[k]

    @property
    def max_lag(self):
        return len(self.gamma) - 1

    def check(self, block=64):
        """Return a list of violated invariants (empty when all hold)."""
        g = self.gamma
        problems = []
        if not g[0] > 0:
            problems.append("gamma(0) <= 0")
        if np.any(np.abs(g) > g[0] * (1 + 1e-12)):
            problems.append("|gamma(k)| > gamma(0)")
        b = min(block, len(g))
        try:
            linalg.cholesky(linalg.toeplitz(g[:b]), lower=True)
        except linalg.LinAlgError:
            problems.append(f"leading {b}x{b} Toeplitz block not positive definite")
        return problems


def arfima_autocovariance(d, sigma2, max_lag):
    """Exact ARFIMA(0, d, 0) autocovariance via the Gamma-ratio recursion."""
    _check_d(d)
    g0 = sigma2 * special.gamma(1 - 2 * d) / special.gamma(1 - d) ** 2
    k = np.arange(1, max_lag + 1, dtype=float)
    ratios = (k - 1 + d) / (k - d)
    return g0 * np.concatenate([[1.0], np.cumprod(ratios)])


def autocovariance(model, max_lag, method="auto"):
    """gamma(0..max_lag) for ``model``.

    ``method``: "auto" uses the closed form for ARFIMA kinds and the direct
    definition for ``horror``; "quadrature" forces the cosine-transform
    quadrature; "adaptive" integrates each lag separately (slow, used as a
    cross-check).
    """
    if max_lag < 0:
        raise DomainError("max_lag must be non-negative")
    if method == "auto":
        if model.kind == "arfima0d0":
            return AutocovarianceSequence(
                arfima_autocovariance(model.d, model.sigma2, max_lag), "closed_form")
        if model.kind == "arfima_noise":
            g = arfima_autocovariance(model.d, model.sigma2, max_lag)
            g[0] += model.tau2
            return AutocovarianceSequence(g, "closed_form")
        if model.kind == "horror":
            return AutocovarianceSequence(1.0 / np.arange(1.0, max_lag + 2.0), "direct")
        method = "quadrature"
    if method == "quadrature":
        g = cosine_transform(lambda x: _density(model, x), max_lag, model.breakpoints)
        return AutocovarianceSequence(g, "quadrature")
    if method == "adaptive":
        g = np.array([adaptive_lag(model, k) for k in range(max_lag + 1)])
        return AutocovarianceSequence(g, "quadrature")
    raise DomainError(f"unknown autocovariance method {method!r}")


def _next_pow2(v):
    return 1 << max(0, int(math.ceil(math.log2(max(v, 1)))))


def _half_hat(k, h):
    """A(k) = int_0^h (1 - u/h) e^{iku} du for an array of k."""
    z = 1j * k * h
    out = np.empty(k.shape, dtype=complex)
    small = np.abs(z) < 0.1
    zs = z[small]
    # (e^z - 1 - z)/z^2 = sum z^p/(p+2)!
    series = np.zeros_like(zs)
    term = np.full_like(zs, 0.5)
    for p in range(12):
        series += term
        term = term * zs / (p + 3)
    out[small] = series
    zl = z[~small]
    out[~small] = (np.expm1(zl) - zl) / zl ** 2
    return h * out


def cosine_transform(f, max_lag, breakpoints=(), inner_nodes=64, terms=14):
    """gamma(k) = 2 int_0^pi f(x) cos(kx) dx for k = 0..max_lag.

    The integrable singularity at 0 is split off: on [0, x1] with
    x1 ~ 1/max_lag, cos(kx) is expanded in its Taylor series and the moments
    int f(x) x^(2p) dx are computed by adaptive quadrature in u = log x. On
    [x1, pi] f is replaced by its piecewise-linear interpolant on a uniform
    grid and integrated against cos(kx) exactly (Filon), which reduces to a
    type-I DCT for all lags at once.
    """
    K = max(int(max_lag), 1)
    x1_target = min(1.0 / K, math.pi / 16)
    N = max(2 ** 20, _next_pow2(math.pi * inner_nodes / x1_target))
    h = math.pi / N
    J = max(1, int(round(x1_target / h)))
    x1 = J * h
    k = np.arange(max_lag + 1, dtype=float)

    # left piece: moments of f on [0, x1]
    bps = sorted(b for b in breakpoints if 0 < b < x1)
    edges_u = [U_FLOOR, *[math.log(b) for b in bps], math.log(x1)]
    left = np.zeros(max_lag + 1)
    kx = k * x1
    for p in range(terms):
        mom = 0.0
        for u0, u1 in zip(edges_u[:-1], edges_u[1:]):
            val, _, _ = _quad(
                lambda u, p=p: float(f(np.array(math.exp(u)))) * (math.exp(u) / x1) ** (2 * p) * math.exp(u),
                u0, u1, rtol=1e-12)
            mom += val
        coef = (-1) ** p * kx ** (2 * p) / math.factorial(2 * p)
        left += coef * mom

    # right piece: Filon with linear interpolation, nodes j = J..N
    xs = h * np.arange(J, N + 1, dtype=float)
    fv = np.asarray(f(xs), dtype=float)
    a = np.zeros(N + 1)
    a[J + 1:N] = fv[1:-1]
    del xs
    y = sfft.dct(a, type=1)[: max_lag + 1]
    del a
    kh2 = k * h / 2
    sinc2 = np.ones_like(kh2)
    nz = kh2 != 0
    sinc2[nz] = (np.sin(kh2[nz]) / kh2[nz]) ** 2
    right = 0.5 * y * h * sinc2
    A = _half_hat(k, h)
    right += fv[0] * np.real(np.exp(1j * k * x1) * A)
    right += fv[-1] * np.real(np.exp(1j * k * math.pi) * np.conj(A))
    return 2.0 * (left + right)


def adaptive_lag(model, k, x1=None):
    """gamma(k) by adaptive quadrature of a single lag (cross-check route)."""
    f = lambda x: float(_density(model, np.array(x)))
    if x1 is None:
        x1 = min(0.05, 1.0 / (k + 1))
    bps = [b for b in model.breakpoints]
    val = 0.0
    # [0, x1] in log scale
    cuts = [U_FLOOR, *sorted(math.log(b) for b in bps if b < x1), math.log(x1)]
    for u0, u1 in zip(cuts[:-1], cuts[1:]):
        v, _, _ = _quad(lambda u: f(math.exp(u)) * math.cos(k * math.exp(u)) * math.exp(u),
                        u0, u1, rtol=1e-12)
        val += v
    # [x1, pi] with oscillatory weight
    edges = [x1, *sorted(b for b in bps if x1 < b < math.pi), math.pi]
    for a, b in zip(edges[:-1], edges[1:]):
        if k == 0:
            v, _, _ = _quad(f, a, b, rtol=1e-12)
        else:
            v, err = integrate.quad(f, a, b, weight="cos", wvar=k, epsabs=1e-14,
                                    epsrel=1e-12, limit=2000)
            if not err <= max(1e-11, 1e-8 * abs(v)):
                raise QuadratureError(f"oscillatory quadrature failed at lag {k}")
        val += v
    return 2.0 * val


@dataclass(frozen=True)
class LowerBoundPair:
    """The two hypotheses f_minus, f_plus = 1/f_minus of the two-point bound."""

    n: float
    ell: float
    t_n: float
    alpha_n: float
    f_minus: SpectralModel
    f_plus: SpectralModel
    L_n: SlowlyVaryingL

    @property
    def T(self):
        return self.ell * self.t_n


def make_lower_bound_pair(n, ell, envelope):
    """Build f_minus, f_plus at scale T = ell * t_n with alpha_n = eta_star(T)."""
    from .rates import solve_tn

    if not ell > 0:
        raise DomainError("ell must be positive")
    rp = solve_tn(envelope, n)
    T = ell * rp.t_n
    if T > math.pi:
        raise DomainError(f"ell * t_n = {T:g} exceeds pi")
    a = float(envelope(T))
    eta_n = step_eta(envelope, T, a)
    report = verify_membership(eta_n)
    if not report.ok:
        raise DomainError(f"step function leaves SV(eta*): {report.violations[:3]}")
    L_n = SlowlyVaryingL(eta_n, l_pi=math.pi ** a)
    return LowerBoundPair(n=n, ell=float(ell), t_n=rp.t_n, alpha_n=a,
                          f_minus=lower_minus(T, a), f_plus=lower_plus(T, a), L_n=L_n)


@dataclass(frozen=True)
class L2Gap:
    numeric: float
    closed_form: float
    asymptotic: float  # 8 ell / n


def l2_gap(pair):
    """int_0^pi (f_minus - f_plus)^2 dx, by quadrature and in closed form."""
    T, a = pair.T, pair.alpha_n
    closed = 8 * T * a * a / (1 - 4 * a * a)

    def sq(x):
        x = np.asarray(x, dtype=float)
        return (_density(pair.f_minus, x) - _density(pair.f_plus, x)) ** 2

    if a == 0:
        numeric = 0.0
    else:
        # log substitution on (0, T]; the difference vanishes on (T, pi]
        lo, _, _ = _quad(lambda u: float(sq(math.exp(u))) * math.exp(u),
                         U_FLOOR, math.log(T), rtol=1e-12)
        hi = 0.0
        if T < math.pi:
            hi, _, _ = _quad(lambda x: float(sq(x)), T, math.pi, rtol=1e-12)
        numeric = lo + hi
    return L2Gap(numeric, closed, 8 * pair.ell / pair.n)


def model_from_record(rec):
    """Build a model from key-value fields (``kind``, ``d``, ``sigma2``, ...)."""
    kind = str(rec.get("kind", rec.get("model", ""))).strip()
    if kind in ("arfima0d0", "arfima", "good"):
        return arfima(float(rec.get("d", 0.4)), float(rec.get("sigma2", 1.0)))
    if kind in ("arfima_noise", "medium"):
        return arfima_noise(float(rec.get("d", 0.4)), float(rec.get("sigma2", 1.0)),
                            float(rec.get("tau2", 1.0)))
    if kind == "horror":
        return horror()
    if kind == "generic_sv":
        return generic_sv(float(rec.get("alpha", 0.0)), log_power_L(float(rec.get("rho", 1.0))))
    raise DomainError(f"cannot build model of kind {kind!r} from a record")
