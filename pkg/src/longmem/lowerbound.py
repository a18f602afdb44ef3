"""Two-point experiment: exact Gaussian likelihood ratios between the
hypotheses f_minus and f_plus, and the risk floor they induce.

Under P_minus the memory parameter is +alpha_n (f_minus has a pole of order
alpha_n at 0); under P_plus it is -alpha_n. The likelihood ratio is
Lambda = log(dP_plus / dP_minus), so E_minus[Lambda] = -KL(P_minus, P_plus).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from . import gph, spectral
from .errors import DomainError, FactorizationError
from .models import (LowerBoundPair, autocovariance,
                     lower_minus, lower_plus)
from .simulate import _stream
from .svclass import Envelope, SlowlyVaryingL, step_eta

MAX_N = 4096


@dataclass(frozen=True)
class TwoPointExperiment:
    pair: LowerBoundPair
    n: int
    reps: int
    seed: int = 0
    tau: float = 0.5

    def __post_init__(self):
        if not 2 <= self.n <= MAX_N:
            raise DomainError(f"n must lie in [2, {MAX_N}] for dense likelihoods, got {self.n}")
        if self.reps < 1:
            raise DomainError("reps must be at least 1")
        if not 0 < self.tau < 1:
            raise DomainError("tau must lie in (0, 1)")
        if self.seed < 0:
            raise DomainError("seed must be non-negative")


@dataclass
class ExperimentReport:
    n: int
    ell: float
    tau: float
    reps: int
    m: int
    alpha_n: float
    mean_lambda: float
    var_lambda: float
    second_moment: float
    p_accept: float
    risk_floor: float
    gph_risk: float
    gph_risk_minus: float
    gph_risk_plus: float
    se_mean_lambda: float
    se_p_accept: float
    se_gph_risk: float
    lambdas: np.ndarray = field(default=None, repr=False)

    @property
    def se_risk_floor(self):
        return self.tau * self.alpha_n * self.se_p_accept

    @property
    def gph_risk_max(self):
        return max(self.gph_risk_minus, self.gph_risk_plus)

    def to_row(self):
        keys = ("n", "ell", "tau", "reps", "m", "alpha_n", "mean_lambda", "var_lambda",
                "second_moment", "p_accept", "risk_floor", "gph_risk", "gph_risk_minus",
                "gph_risk_plus", "se_mean_lambda", "se_p_accept", "se_gph_risk")
        return {k: getattr(self, k) for k in keys}


def _cholesky(gamma, n, label):
    g = np.asarray(getattr(gamma, "gamma", gamma), dtype=float)
    if len(g) < n:
        raise DomainError(f"{label}: need autocovariances up to lag {n - 1}")
    c, info = lapack.dpotrf(linalg.toeplitz(g[:n]), lower=1, clean=1)
    if info != 0:
        raise FactorizationError(
            f"{label}: Toeplitz covariance not positive definite "
            f"(leading minor of order {info})", minor=int(info))
    return c


class GaussianPair:
    """Cholesky factors of Sigma_minus and Sigma_plus, computed once and shared."""

    def __init__(self, gamma_minus, gamma_plus, n):
        self.n = int(n)
        self.chol_minus = _cholesky(gamma_minus, self.n, "gamma_minus")
        self.chol_plus = _cholesky(gamma_plus, self.n, "gamma_plus")
        self.logdet_minus = 2 * float(np.log(np.diag(self.chol_minus)).sum())
        self.logdet_plus = 2 * float(np.log(np.diag(self.chol_plus)).sum())

    @staticmethod
    def _quad(chol, X):
        Z = linalg.solve_triangular(chol, X.T, lower=True, check_finite=False)
        return np.einsum("ij,ij->j", Z, Z)

    def llr(self, X):
        """Lambda for each row of X (or a single path)."""
        X = np.atleast_2d(np.asarray(getattr(X, "values", X), dtype=float))
        if X.shape[-1] != self.n:
            raise DomainError(f"path length {X.shape[-1]} != {self.n}")
        qm = self._quad(self.chol_minus, X)
        qp = self._quad(self.chol_plus, X)
        # grouped so that swapping the hypotheses negates the result exactly
        return 0.5 * ((self.logdet_minus - self.logdet_plus) + (qm - qp))

    def swapped(self):
        out = object.__new__(GaussianPair)
        out.n = self.n
        out.chol_minus, out.chol_plus = self.chol_plus, self.chol_minus
        out.logdet_minus, out.logdet_plus = self.logdet_plus, self.logdet_minus
        return out

    def sample(self, which, seed, reps, start=0):
        """Exact Gaussian paths L z with z from per-replicate Philox streams."""
        chol = self.chol_minus if which == "minus" else self.chol_plus
        tag = 0 if which == "minus" else 1
        Z = np.empty((reps, self.n))
        for i in range(reps):
            Z[i] = _stream(seed, 2 * (start + i) + tag).standard_normal(self.n)
        return Z @ chol.T


def log_likelihood_ratio(path, gamma_minus, gamma_plus):
    """Lambda = log(dP_plus/dP_minus)(x) for one path."""
    x = np.asarray(getattr(path, "values", path), dtype=float)
    return float(GaussianPair(gamma_minus, gamma_plus, len(x)).llr(x)[0])


def degenerate_pair(n, T=0.1):
    """A pair with alpha_n = 0: both hypotheses are white noise."""
    L = SlowlyVaryingL(step_eta(Envelope.power(1.0, 1.0), T, 0.0), l_pi=1.0)
    return LowerBoundPair(n=n, ell=1.0, t_n=T, alpha_n=0.0,
                          f_minus=lower_minus(T, 0.0), f_plus=lower_plus(T, 0.0), L_n=L)


def pair_covariances(pair, n):
    gm = autocovariance(pair.f_minus, n - 1)
    gp = autocovariance(pair.f_plus, n - 1)
    return gm, gp


def run_experiment(exp: TwoPointExperiment, m, keep_lambdas=False):
    """Monte Carlo moments of Lambda under P_minus, acceptance probability of
    {Lambda >= log tau}, the floor tau * alpha_n * p_accept, and the GPH risk
    under both hypotheses."""
    n, reps = exp.n, exp.reps
    m = int(m)
    if not 2 <= m <= n // 2:
        raise DomainError(f"bandwidth m={m} outside [2, {n // 2}]")
    a = exp.pair.alpha_n
    gm, gp = pair_covariances(exp.pair, n)
    gpair = GaussianPair(gm, gp, n)

    Xm = gpair.sample("minus", exp.seed, reps)
    lam = gpair.llr(Xm)
    Xp = gpair.sample("plus", exp.seed, reps)
    ahat_m = gph.estimate_many(spectral.log_periodogram(Xm, m), m)
    ahat_p = gph.estimate_many(spectral.log_periodogram(Xp, m), m)
    err_m = np.abs(ahat_m - a)
    err_p = np.abs(ahat_p + a)

    accept = lam >= math.log(exp.tau)
    p = float(accept.mean())
    var = float(lam.var(ddof=1)) if reps > 1 else 0.0
    risk = 0.5 * (err_m + err_p)
    se = (lambda v: float(v.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0)
    return ExperimentReport(
        n=n, ell=exp.pair.ell, tau=exp.tau, reps=reps, m=m, alpha_n=a,
        mean_lambda=float(lam.mean()), var_lambda=var,
        second_moment=float(np.mean(lam ** 2)), p_accept=p,
        risk_floor=exp.tau * a * p,
        gph_risk=float(risk.mean()), gph_risk_minus=float(err_m.mean()),
        gph_risk_plus=float(err_p.mean()),
        se_mean_lambda=se(lam), se_p_accept=math.sqrt(p * (1 - p) / reps),
        se_gph_risk=se(risk),
        lambdas=lam if keep_lambdas else None)


@dataclass(frozen=True)
class ExactMoments:
    mean: float
    var: float


def exact_moments(gpair: GaussianPair):
    """Closed-form mean and variance of Lambda under P_minus.

    With W = chol_plus^-1 chol_minus and B = W^T W (similar to
    Sigma_plus^-1 Sigma_minus): mean = (logdet_minus - logdet_plus + n - tr B)/2
    and var = tr(B^2)/2 - tr(B) + n/2.
    """
    W = linalg.solve_triangular(gpair.chol_plus, gpair.chol_minus, lower=True)
    B = W.T @ W
    trB = float(np.trace(B))
    trB2 = float(np.sum(B * B))
    n = gpair.n
    mean = 0.5 * (gpair.logdet_minus - gpair.logdet_plus + n - trB)
    return ExactMoments(mean, 0.5 * trB2 - trB + 0.5 * n)
