"""Classical SU(2) reference and the SU(1,1)-versus-SU(2) advantage logic.

Resources are counted as photons through the sample: an SU(1,1) with
first-stage gain ``g1`` is compared against a Mach-Zehnder fed with a weak
coherent state of ``|alpha|^2 = 2*g1**2``.  Both Fisher informations use the
``(dp)^2 / p`` low-probability form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Optional

import numpy as np

from . import analytic
from .model import (
    ClickProbabilities,
    FisherReport,
    InterferometerConfig,
    Observable,
    OutOfRange,
    _check_finite,
    _check_unit,
    reduce_phase,
)

# above this mean photon number the weak-coherent-state picture is suspect
HIGH_POWER_ALPHA_SQ = 0.1


class DegenerateTransmissions(ValueError):
    """Both internal transmissions vanish; no reflectivity is optimal."""


class EfficiencyOne(ValueError):
    """The singles/coincidence bounds are undefined at unit efficiency.

    ``limit`` carries the classification approached as the efficiency
    tends to 1: ``"never"`` when the other arm is lossy and ``"always"``
    (the two informations coincide) when it is lossless.
    """

    def __init__(self, message: str, limit: str):
        super().__init__(message)
        self.limit = limit


class AdvantageKind(str, Enum):
    CONDITIONAL = "conditional"
    UNCONDITIONAL = "unconditional"


@dataclass(frozen=True)
class Su2Config:
    """Lossy Mach-Zehnder with a 50:50 input splitter and output reflectivity ``R``."""

    alpha_sq: float
    R: float = 0.5
    T_A: float = 1.0
    T_B: float = 1.0
    eta_A: float = 1.0
    eta_B: float = 1.0
    phi: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "alpha_sq":
                value = _check_finite(f.name, value)
                if value < 0.0:
                    raise OutOfRange(f.name, value, ">= 0")
            elif f.name == "phi":
                value = reduce_phase(_check_finite(f.name, value))
            else:
                value = _check_unit(f.name, value)
            object.__setattr__(self, f.name, value)

    @property
    def high_power(self) -> bool:
        return self.alpha_sq > HIGH_POWER_ALPHA_SQ

    @property
    def eta_max(self) -> float:
        return max(self.eta_A, self.eta_B)

    @classmethod
    def matching(cls, config: InterferometerConfig, R: Optional[float] = None) -> "Su2Config":
        """Same losses and sample photon number as ``config``; optimal ``R`` by default."""
        if R is None:
            mode = "A" if config.eta_A >= config.eta_B else "B"
            R = su2_optimal_reflectivity(config.T_A, config.T_B, mode)
        return cls(
            alpha_sq=equal_resource_alpha_sq(config.g1),
            R=R,
            T_A=config.T_A,
            T_B=config.T_B,
            eta_A=config.eta_A,
            eta_B=config.eta_B,
            phi=config.phi,
        )


def equal_resource_alpha_sq(g1: float) -> float:
    return 2.0 * g1 * g1


def _su2_terms(cfg: Su2Config, observable: Observable):
    """(prefactor, background, signed fringe amplitude) for one output port."""
    R, T_A, T_B = cfg.R, cfg.T_A, cfg.T_B
    c = 2.0 * math.sqrt((1.0 - R) * R * T_A * T_B)
    if observable is Observable.SINGLES_A:
        return cfg.eta_A * cfg.alpha_sq / 2.0, (1.0 - R) * T_A + R * T_B, -c
    if observable is Observable.SINGLES_B:
        return cfg.eta_B * cfg.alpha_sq / 2.0, (1.0 - R) * T_B + R * T_A, c
    raise ValueError("the weak-coherent SU(2) model has no coincidence observable")


def su2_click_probabilities(cfg: Su2Config) -> ClickProbabilities:
    """Singles of the two output ports; coincidences are second order and set to 0.

    The two ports carry opposite fringes so that, without loss, the total
    photon number does not depend on ``phi``.
    """
    out = []
    for obs in (Observable.SINGLES_A, Observable.SINGLES_B):
        k, s, c = _su2_terms(cfg, obs)
        out.append(min(max(k * (s + c * math.cos(cfg.phi)), 0.0), 1.0))
    return ClickProbabilities(out[0], out[1], 0.0, engine="analytic")


def su2_optimal_reflectivity(T_A: float, T_B: float, mode: str = "A") -> float:
    """Reflectivity giving unit visibility on the chosen output port."""
    if T_A + T_B <= 0.0:
        raise DegenerateTransmissions("T_A = T_B = 0: no light reaches the output splitter")
    if mode == "A":
        return T_A / (T_A + T_B)
    if mode == "B":
        return T_B / (T_A + T_B)
    raise ValueError(f"mode must be 'A' or 'B', got {mode!r}")


def su2_max_fisher(alpha_sq, R, T_A, T_B, eta, mode: str = "A"):
    """Phase-maximised information of one port (broadcasting over numpy inputs)."""
    R = np.asarray(R, dtype=float)
    s = (1.0 - R) * T_A + R * T_B if mode == "A" else (1.0 - R) * T_B + R * T_A
    c2 = 4.0 * (1.0 - R) * R * T_A * T_B
    den = s + np.sqrt(np.maximum(s * s - c2, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0.0, 2.0 * c2 / np.where(den > 0.0, den, 1.0), 0.0)
    return eta * alpha_sq / 2.0 * out


def su2_fisher(cfg: Su2Config, observable) -> FisherReport:
    """Fisher information of one port at ``cfg.phi`` and maximised over phase, at fixed ``R``."""
    obs = Observable.coerce(observable)
    k, s, c = _su2_terms(cfg, obs)
    p = s + c * math.cos(cfg.phi)
    fi = k * c * c * math.sin(cfg.phi) ** 2 / p if p > 0.0 else 0.0
    r = math.sqrt(max(s * s - c * c, 0.0))
    fi_max = 2.0 * k * c * c / (s + r) if s + r > 0.0 else 0.0
    # stationary point of sin^2 / (s + c cos): cos(phi*) = -c / (s + r)
    phi_star = math.acos(max(-1.0, min(1.0, -c / (s + r)))) if s + r > 0.0 else 0.0
    return FisherReport(obs, min(fi, fi_max), fi_max, phi_star, defined=p > 0.0)


def su2_fisher_max(cfg: Su2Config) -> FisherReport:
    """Best single port with its reflectivity re-optimised: ``2*eta_max*|alpha|^2*T_A*T_B/(T_A+T_B)``."""
    mode = "A" if cfg.eta_A >= cfg.eta_B else "B"
    if cfg.T_A + cfg.T_B == 0.0:
        return FisherReport(Observable.coerce(mode), 0.0, 0.0, 0.0, defined=False)
    R = su2_optimal_reflectivity(cfg.T_A, cfg.T_B, mode)
    tuned = Su2Config(cfg.alpha_sq, R, cfg.T_A, cfg.T_B, cfg.eta_A, cfg.eta_B, cfg.phi)
    report = su2_fisher(tuned, Observable.coerce(mode))
    closed = 2.0 * cfg.eta_max * cfg.alpha_sq * cfg.T_A * cfg.T_B / (cfg.T_A + cfg.T_B)
    return FisherReport(report.observable, min(report.fi_at_phi, closed), closed, report.phi_star)


def resource_ratio(T_A: float, T_B: float) -> float:
    """Factor by which an SU(2) needs more sample photons (or efficiency) to match an SU(1,1)."""
    return T_A + T_B


# --- singles versus coincidences ----------------------------------------------


@dataclass(frozen=True)
class RegionVerdict:
    mode: str
    case: str  # "beta_only", "alpha_or_beta" or "always"
    alpha: Optional[float]
    beta: Optional[float]

    def singles_win(self, gain_ratio: float) -> bool:
        """Whether the singles information is at least the coincidence one at ``g2^2/g1^2``."""
        if self.case == "always":
            return True
        if self.case == "beta_only":
            return gain_ratio >= self.beta
        return gain_ratio <= self.alpha or gain_ratio >= self.beta


def _swap(config: InterferometerConfig, mode: str):
    if mode == "A":
        return config.T_A, config.T_B, config.eta_B
    if mode == "B":
        return config.T_B, config.T_A, config.eta_A
    raise ValueError(f"mode must be 'A' or 'B', got {mode!r}")


def singles_vs_coincidence_region(config: InterferometerConfig, mode: str = "A") -> RegionVerdict:
    """Where the singles of ``mode`` carry at least as much information as the coincidences.

    Only the transmission and efficiency of the *other* arm decide the
    case; the efficiency of ``mode`` itself cancels.
    """
    T_s, T_o, eta_o = _swap(config, mode)
    if eta_o == 1.0:
        limit = "always" if T_o == 1.0 else "never"
        raise EfficiencyOne(
            "the other arm has unit efficiency; the bounds diverge", limit=limit
        )
    if eta_o == 0.0:
        # no coincidences are ever recorded
        return RegionVerdict(mode, "always", None, 0.0)
    alpha = T_s * (T_o - eta_o) / (eta_o * (1.0 - eta_o))
    beta = eta_o * T_s * (1.0 - eta_o * T_o) / (1.0 - eta_o)
    if T_o < eta_o:
        case = "beta_only"
    elif T_o <= eta_o / (1.0 - eta_o + eta_o * eta_o):
        case = "alpha_or_beta"
    else:
        case = "always"
    return RegionVerdict(mode, case, alpha, beta)


# --- advantage over SU(2) ----------------------------------------------------------


@dataclass(frozen=True)
class AdvantageVerdict:
    kind: AdvantageKind
    observable: Observable
    holds: bool
    threshold_gain_ratio: Optional[float]
    condition: str
    condition_met: bool
    fi_su11: float
    fi_su2: float
    asymptotic_conditional: bool
    asymptotic_unconditional: bool

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "observable": self.observable.value,
            "holds": self.holds,
            "threshold_gain_ratio": self.threshold_gain_ratio,
            "condition": self.condition,
            "condition_met": self.condition_met,
            "fi_su11": self.fi_su11,
            "fi_su2": self.fi_su2,
            "asymptotic_conditional": self.asymptotic_conditional,
            "asymptotic_unconditional": self.asymptotic_unconditional,
        }


def asymptotic_conditional(T_A: float, T_B: float) -> bool:
    return T_A + T_B > 1.0


def asymptotic_unconditional(T_A: float, T_B: float, eta_max: float = 1.0) -> bool:
    return 2.0 * eta_max * T_A * T_B > 1.0


def su2_reference_fisher(config: InterferometerConfig, kind, su2_eta_max: Optional[float] = None) -> float:
    """Optimised SU(2) information at equal resources.

    Conditional: same internal transmissions, efficiency ``su2_eta_max``
    (default the better SU(1,1) detector).  Unconditional: lossless
    interior, efficiency ``su2_eta_max`` (default 1).
    """
    kind = AdvantageKind(kind)
    if kind is AdvantageKind.CONDITIONAL:
        eta = config.eta_max if su2_eta_max is None else su2_eta_max
        T_A, T_B = config.T_A, config.T_B
    else:
        eta = 1.0 if su2_eta_max is None else su2_eta_max
        T_A = T_B = 1.0
    if T_A + T_B == 0.0:
        return 0.0
    return 4.0 * eta * config.g1**2 * T_A * T_B / (T_A + T_B)


def _threshold(config: InterferometerConfig, obs: Observable, kind: AdvantageKind, eta_max: float):
    """(condition text, condition met, minimum g2^2/g1^2 or None)."""
    T_A, T_B, eta_A, eta_B = config.T_A, config.T_B, config.eta_A, config.eta_B
    if obs is Observable.COINCIDENCES:
        ee = eta_A * eta_B
        if kind is AdvantageKind.CONDITIONAL:
            met = ee > 0.0 and T_A + T_B > eta_max / ee
            thr = eta_max * T_A * T_B / (ee * (T_A + T_B)) if met else None
            return "T_A+T_B > eta_max/(eta_A*eta_B)", met, thr
        met = ee > 0.0 and T_A * T_B > eta_max / (2.0 * ee)
        thr = eta_max / (2.0 * ee) if met else None
        return "T_A*T_B > eta_max/(2*eta_A*eta_B)", met, thr

    if obs is Observable.SINGLES_B:
        T_A, T_B, eta_A = T_B, T_A, eta_B
        label = "B"
    else:
        label = "A"
    S = T_A + T_B
    if kind is AdvantageKind.CONDITIONAL:
        met = eta_A > 0.0 and S > eta_max / eta_A
        thr = None
        if met:
            thr = (T_A * eta_max * (eta_max * T_B - eta_A * S)) / (
                eta_A * S * (eta_max - eta_A * S)
            )
        return f"T_A+T_B > eta_max/eta_{label}", met, thr
    met = eta_A > 0.0 and T_A * T_B > eta_max / (2.0 * eta_A)
    thr = None
    if met:
        thr = eta_max * (eta_max - 2.0 * T_A * eta_A) / (
            2.0 * eta_A * (eta_max - 2.0 * T_A * T_B * eta_A)
        )
    return f"T_A*T_B > eta_max/(2*eta_{label})", met, thr


def advantage_threshold(
    config: InterferometerConfig,
    observable,
    kind,
    su2_eta_max: Optional[float] = None,
) -> AdvantageVerdict:
    """Minimum ``g2^2/g1^2`` at which ``observable`` beats the SU(2) reference.

    ``holds`` reports whether the configured gains already reach it; ties
    count as an advantage.  A negative closed-form threshold means every
    gain ratio works and is reported as 0.
    """
    obs = Observable.coerce(observable)
    kind = AdvantageKind(kind)
    if su2_eta_max is None:
        eta_max = config.eta_max if kind is AdvantageKind.CONDITIONAL else 1.0
    else:
        eta_max = _check_unit("su2_eta_max", su2_eta_max)
    condition, met, thr = _threshold(config, obs, kind, eta_max)
    if thr is not None:
        thr = max(thr, 0.0)
    fi11 = float(analytic.max_fisher(*analytic._args(config), obs))
    fi2 = su2_reference_fisher(config, kind, eta_max)
    holds = False
    if thr is not None and config.g1 > 0.0:
        holds = config.g2**2 / config.g1**2 >= thr
    return AdvantageVerdict(
        kind=kind,
        observable=obs,
        holds=bool(holds),
        threshold_gain_ratio=thr,
        condition=condition,
        condition_met=bool(met),
        fi_su11=fi11,
        fi_su2=fi2,
        asymptotic_conditional=asymptotic_conditional(config.T_A, config.T_B),
        asymptotic_unconditional=asymptotic_unconditional(config.T_A, config.T_B, config.eta_max),
    )
