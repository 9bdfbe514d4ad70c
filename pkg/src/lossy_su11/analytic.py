"""Closed-form low-gain model of the lossy SU(1,1) interferometer.

Every quantity here is built from three numbers per observable: the
incoherent background ``s = a + g2**2`` (with ``a`` the stage-one term that
reaches the detector), the fringe amplitude ``c = 2*sqrt(T_A*T_B)*g1*g2``
and an efficiency prefactor.  The array-level helpers broadcast over numpy
inputs; the config-level functions wrap them for single operating points.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize_scalar

from .model import (
    ClickProbabilities,
    FisherReport,
    InterferometerConfig,
    ModelOutOfRegime,
    Observable,
    VisibilityTriple,
    require_zero_theta,
)

# click probabilities above this mean the single-pair picture is being abused
REGIME_CEILING = 0.1
ROUNDING_FLOOR = -1e-15

PHI_GRID_POINTS = 721
PHI_XTOL = 1e-10


def _terms(g1, g2, T_A, T_B, eta_A, eta_B, observable):
    """Return (efficiency, stage-one background, fringe amplitude, g2**2)."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    T_A = np.asarray(T_A, dtype=float)
    T_B = np.asarray(T_B, dtype=float)
    g1sq = g1 * g1
    obs = Observable.coerce(observable)
    if obs is Observable.SINGLES_A:
        eff, a = np.asarray(eta_A, dtype=float), T_A * g1sq
    elif obs is Observable.SINGLES_B:
        eff, a = np.asarray(eta_B, dtype=float), T_B * g1sq
    else:
        eff, a = np.asarray(eta_A, dtype=float) * eta_B, T_A * T_B * g1sq
    c = 2.0 * np.sqrt(T_A * T_B) * g1 * g2
    return eff, a, c, g2 * g2


def click_probability(g1, g2, T_A, T_B, eta_A, eta_B, phi, observable):
    """Low-gain click probability of one observable (broadcasting)."""
    eff, a, c, g2sq = _terms(g1, g2, T_A, T_B, eta_A, eta_B, observable)
    return eff * (a + g2sq + c * np.cos(phi))


def visibility(g1, g2, T_A, T_B, observable):
    """Fringe visibility; 0 where the background vanishes."""
    _, a, c, g2sq = _terms(g1, g2, T_A, T_B, 1.0, 1.0, observable)
    s = a + g2sq
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(s > 0.0, c / np.where(s > 0.0, s, 1.0), 0.0)
    return v


def fisher_information(g1, g2, T_A, T_B, eta_A, eta_B, phi, observable):
    """Phase-resolved Fisher information with the ``(dp)^2 / p`` denominator."""
    eff, a, c, g2sq = _terms(g1, g2, T_A, T_B, eta_A, eta_B, observable)
    den = a + g2sq + c * np.cos(phi)
    num = eff * c * c * np.sin(phi) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        fi = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    return fi


def max_fisher(g1, g2, T_A, T_B, eta_A, eta_B, observable):
    """Maximum over phase of :func:`fisher_information`.

    Evaluates ``2*eff*(s - sqrt(s**2 - c**2))`` in the cancellation-free form
    ``2*eff*c**2 / (s + sqrt(s**2 - c**2))``.  For coincidences
    ``s**2 - c**2`` is a perfect square and the piecewise form
    ``4*eff*min(T_A*T_B*g1**2, g2**2)`` is used directly.
    """
    obs = Observable.coerce(observable)
    eff, a, c, g2sq = _terms(g1, g2, T_A, T_B, eta_A, eta_B, obs)
    if obs is Observable.COINCIDENCES:
        return 4.0 * eff * np.minimum(a, g2sq)
    s = a + g2sq
    r = np.sqrt(np.maximum(s * s - c * c, 0.0))
    den = s + r
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0.0, 2.0 * eff * c * c / np.where(den > 0.0, den, 1.0), 0.0)


def optimal_phase(g1, g2, T_A, T_B, observable):
    """Closed-form argmax in ``[pi/2, pi]``: ``cos(phi*) = (r - s) / c``."""
    _, a, c, g2sq = _terms(g1, g2, T_A, T_B, 1.0, 1.0, observable)
    s = a + g2sq
    r = np.sqrt(np.maximum(s * s - c * c, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(c > 0.0, -(c / np.where(c > 0.0, s + r, 1.0)), 0.0)
    return np.arccos(np.clip(x, -1.0, 1.0))


def loss_balanced_g2(g1: float, T_A: float, T_B: float) -> float:
    """Second-stage gain at which the coincidence visibility reaches 1."""
    if g1 < 0 or not (0 <= T_A <= 1) or not (0 <= T_B <= 1):
        raise ValueError("need g1 >= 0 and transmissions in [0, 1]")
    return g1 * math.sqrt(T_A * T_B)


def _args(config: InterferometerConfig):
    return (config.g1, config.g2, config.T_A, config.T_B, config.eta_A, config.eta_B)


def click_probabilities(config: InterferometerConfig) -> ClickProbabilities:
    require_zero_theta(config)
    values = []
    for obs in Observable:
        p = float(click_probability(*_args(config), config.phi, obs))
        if p < ROUNDING_FLOOR or p > REGIME_CEILING:
            raise ModelOutOfRegime(
                f"{obs.value} probability {p:.3g} outside the low-gain regime "
                f"[0, {REGIME_CEILING}]"
            )
        values.append(min(max(p, 0.0), 1.0))
    return ClickProbabilities(*values, engine="analytic")


def visibilities(config: InterferometerConfig) -> VisibilityTriple:
    out, flags = [], []
    for obs in Observable:
        _, a, _, g2sq = _terms(config.g1, config.g2, config.T_A, config.T_B, 1, 1, obs)
        flags.append(bool(a + g2sq > 0.0))
        out.append(float(visibility(config.g1, config.g2, config.T_A, config.T_B, obs)))
    return VisibilityTriple(*out, *flags)


def _locate_phi_star(config: InterferometerConfig, obs: Observable) -> float:
    """Grid search on [0, pi], then bounded Brent (golden-section) refinement."""
    args = _args(config)
    grid = np.linspace(0.0, math.pi, PHI_GRID_POINTS)
    values = fisher_information(*args, grid, obs)
    k = int(np.argmax(values))
    if values[k] <= 0.0:
        return 0.0
    step = grid[1] - grid[0]
    lo, hi = max(grid[k] - step, 0.0), min(grid[k] + step, math.pi)
    if k == 0 or k == PHI_GRID_POINTS - 1:
        return float(grid[k])

    def neg(phi):
        return -float(fisher_information(*args, phi, obs))

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": PHI_XTOL})
    if -res.fun < values[k]:
        return float(grid[k])
    return float(min(max(res.x, 0.0), math.pi))


def fisher_at_phase(config: InterferometerConfig, observable) -> FisherReport:
    """Fisher information at ``config.phi`` together with its phase maximum.

    ``fi_max`` and ``phi_star`` come from :func:`fisher_max`, so the report
    satisfies ``fi_at_phi <= fi_max``.
    """
    obs = Observable.coerce(observable)
    report = fisher_max(config, obs)
    eff, a, c, g2sq = _terms(*_args(config), obs)
    den = float(a + g2sq + c * math.cos(config.phi))
    fi = float(fisher_information(*_args(config), config.phi, obs))
    # sin^2 / (1 + cos) -> 2 at a perfect null, so fi can equal fi_max; guard rounding
    fi = min(fi, report.fi_max) if report.fi_max > 0 else fi
    return FisherReport(obs, fi, report.fi_max, report.phi_star, defined=den > 0.0)


def fisher_max(config: InterferometerConfig, observable) -> FisherReport:
    """Closed-form phase maximum; ``phi_star`` from a numerical search on [0, pi]."""
    obs = Observable.coerce(observable)
    fi_max = float(max_fisher(*_args(config), obs))
    phi_star = _locate_phi_star(config, obs) if fi_max > 0.0 else 0.0
    fi = float(fisher_information(*_args(config), config.phi, obs))
    return FisherReport(obs, min(fi, fi_max), fi_max, phi_star)


def upper_bound(config: InterferometerConfig) -> float:
    """Largest Fisher information any click observable can reach: ``4*eta_max*g1^2*T_A*T_B``."""
    return 4.0 * config.eta_max * config.g1**2 * config.T_A * config.T_B
