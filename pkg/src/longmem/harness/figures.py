"""Bandwidth scans under the three reference models (good, medium, horror)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import gph, models, simulate, spectral
from ..errors import DomainError
from . import csvio, svg

FIGURES = ("good", "medium", "horror")


def figure_model(name, d=0.4, sigma2=1.0, tau2=1.0):
    if name == "good":
        return models.arfima(d, sigma2)
    if name == "medium":
        # noise variance is not pinned down by the source; tau2 = sigma2 = 1
        return models.arfima_noise(d, sigma2, tau2)
    if name == "horror":
        return models.horror()
    raise DomainError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")


@dataclass
class FigureBundle:
    name: str
    scan: gph.BandwidthScan
    csv_text: str
    svg_text: str | None
    metadata: dict


def scan_paths(model, n, seeds, m_min=10, m_max=500, step=1):
    """One bandwidth scan per seed (replicate 0 of each seed)."""
    gamma = models.autocovariance(model, n - 1)
    emb = simulate.build_embedding(gamma, n)
    out = []
    for s in seeds:
        x = simulate.sample_array(emb, n, s, 1)[0]
        out.append(gph.scan(spectral.periodogram(x), m_min, m_max, step,
                            model_id=model.model_id, seed=s))
    return out


def scan_columns(sc: gph.BandwidthScan, with_ci=True):
    cols = ["m", "alpha_hat", "d_hat"]
    if with_ci:
        cols += ["ci_low", "ci_high"]
    rows = []
    for f in sc.fits:
        r = [f.m, float(f.alpha_hat), float(f.d_hat)]
        if with_ci:
            r += [float(f.ci_low), float(f.ci_high)]
        rows.append(r)
    return cols, rows


def make_figure(name, n=1000, seed=0, m_min=10, m_max=500, step=1, svg_out=True,
                d=0.4, sigma2=1.0, tau2=1.0):
    model = figure_model(name, d, sigma2, tau2)
    if not 2 <= m_min <= m_max <= n // 2:
        raise DomainError(f"bandwidth range [{m_min}, {m_max}] outside [2, {n // 2}]")
    sc = scan_paths(model, n, [seed], m_min, m_max, step)[0]
    # confidence lines are meaningless under the horror model and are left out
    with_ci = name != "horror"
    meta = {"figure": name, "model": model.model_id, "n": n, "seed": seed,
            "m_min": m_min, "m_max": m_max, "m_step": step}
    cols, rows = scan_columns(sc, with_ci)
    text = csvio.render(cols, rows, csvio.provenance(meta, seed))
    picture = None
    if svg_out:
        series = [("d_hat", sc.d_hat, False)]
        if with_ci:
            series += [("ci_low", sc.d_hat - sc.halfwidth, True),
                       ("ci_high", sc.d_hat + sc.halfwidth, True)]
        picture = svg.line_chart(sc.m, series, title=f"{name}: {model.model_id}, n={n}",
                                 xlabel="m", ylabel="d_hat",
                                 hline=model.d if name != "horror" else 0.0)
    return FigureBundle(name, sc, text, picture, meta)


# qualitative checks used by the acceptance suite

def good_fraction(sc, d=0.4, lo=50, hi=300):
    """Fraction of m in [lo, hi] whose CI covers d."""
    sel = (sc.m >= lo) & (sc.m <= hi)
    cover = np.abs(sc.d_hat[sel] - d) <= sc.halfwidth[sel]
    return float(cover.mean())


def medium_drop(sc, low=(50, 100), high=(300, 500)):
    """mean d_hat over the high band minus mean over the low band."""
    m = sc.m
    a = sc.d_hat[(m >= low[0]) & (m <= low[1])].mean()
    b = sc.d_hat[(m >= high[0]) & (m <= high[1])].mean()
    return float(b - a)


def horror_fraction(sc, lo=100, hi=500):
    """Fraction of m in [lo, hi] with |d_hat| > 2 * CI half-width."""
    sel = (sc.m >= lo) & (sc.m <= hi)
    return float(np.mean(np.abs(sc.d_hat[sel]) > 2 * sc.halfwidth[sel]))
