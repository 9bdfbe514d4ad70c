"""Experimental characterisation: detector efficiencies, internal transmissions, g2 choice.

The visibility fit follows the scikit-learn estimator conventions so that it
can be dropped into model-selection tooling: ``X`` is a single column of
second-stage gains and ``y`` holds the measured ``(V_A, V_B, V_CC)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import analytic
from .model import InterferometerConfig, Observable

DEFAULT_RESIDUAL_CEILING = 0.05
SEED_POINTS = 41
MIN_SWEEP_POINTS = 3
NO_SIGNAL = 1e-12


class InvalidCounts(ValueError):
    pass


class ZeroCounts(ZeroDivisionError):
    pass


class FitDiverged(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class CountRecord:
    """Singles and coincidence counts (raw or expected) from one integration window."""

    singles_A: float
    singles_B: float
    coincidences: float
    label: str = ""

    def __post_init__(self):
        for name in ("singles_A", "singles_B", "coincidences"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.number)) and math.isfinite(v) and v >= 0):
                raise InvalidCounts(f"{name}={v!r} must be a finite count >= 0")
        if self.coincidences > min(self.singles_A, self.singles_B):
            raise InvalidCounts(
                f"coincidences ({self.coincidences}) exceed the singles "
                f"({self.singles_A}, {self.singles_B})"
            )


@dataclass(frozen=True)
class CalibrationResult:
    eta_A: Optional[float] = None
    eta_B: Optional[float] = None
    T_A: Optional[float] = None
    T_B: Optional[float] = None
    residual: float = 0.0
    method: str = "klyshko"

    def __post_init__(self):
        for name in ("eta_A", "eta_B", "T_A", "T_B"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if not self.residual >= 0.0:
            raise ValueError("residual must be >= 0")

    def as_dict(self) -> dict:
        return {
            "eta_A": self.eta_A,
            "eta_B": self.eta_B,
            "T_A": self.T_A,
            "T_B": self.T_B,
            "residual": self.residual,
            "method": self.method,
        }


def klyshko_efficiencies(counts: CountRecord) -> tuple[float, float]:
    """Efficiencies from a run with only the second stage pumped.

    With ``g1 = 0`` each detector sees ``eta * g2^2`` and the pair rate is
    ``eta_A * eta_B * g2^2``, so each efficiency is the coincidence count
    over the singles of the *other* arm.
    """
    if counts.singles_A == 0 or counts.singles_B == 0:
        raise ZeroCounts("Klyshko ratio needs nonzero singles in both arms")
    return counts.coincidences / counts.singles_B, counts.coincidences / counts.singles_A


def transmissions_at_loss_balance(V_A: float, V_B: float) -> tuple[float, float]:
    """Invert the singles visibilities at ``g2^2 = g1^2 T_A T_B``.

    There ``V_A = 2 T_B / (1 + T_B)`` and ``V_B = 2 T_A / (1 + T_A)``.
    """
    for name, v in (("V_A", V_A), ("V_B", V_B)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name}={v} outside [0, 1]")
    return V_B / (2.0 - V_B), V_A / (2.0 - V_A)


def _model_visibilities(g1: float, g2: np.ndarray, T_A: float, T_B: float) -> np.ndarray:
    return np.stack(
        [analytic.visibility(g1, g2, T_A, T_B, obs) for obs in Observable], axis=-1
    )


class TransmissionEstimator(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``(T_A, T_B)`` to visibility-versus-g2 data.

    The objective is the unweighted sum of squared residuals over all three
    visibilities.  A grid over ``[0, 1]^2`` seeds a bounded trust-region
    least-squares refinement.

    Parameters
    ----------
    g1 : float
        First-stage gain used while recording the sweep.
    residual_ceiling : float
        RMS residual above which :class:`FitDiverged` is raised.
    """

    def __init__(self, g1: float = 0.05, residual_ceiling: float = DEFAULT_RESIDUAL_CEILING):
        self.g1 = g1
        self.residual_ceiling = residual_ceiling

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        if X.shape[1] != 1 or y.ndim != 2 or y.shape[1] != 3:
            raise ValueError("expected X of shape (n, 1) and y of shape (n, 3)")
        if X.shape[0] < MIN_SWEEP_POINTS:
            raise ValueError(f"need at least {MIN_SWEEP_POINTS} sweep points")
        if np.any(y < 0.0) or np.any(y > 1.0):
            raise ValueError("visibilities must lie in [0, 1]")
        g2 = X[:, 0]
        if np.max(y) < NO_SIGNAL:
            raise FitDiverged("no interference signal in the sweep", residual=float("nan"))

        def residuals(t):
            return (_model_visibilities(self.g1, g2, t[0], t[1]) - y).ravel()

        seeds = np.linspace(0.0, 1.0, SEED_POINTS)
        ta, tb = np.meshgrid(seeds, seeds, indexing="ij")
        model = _model_visibilities(self.g1, g2[None, None, :], ta[..., None], tb[..., None])
        k = np.unravel_index(int(np.argmin(np.sum((model - y) ** 2, axis=(2, 3)))), ta.shape)
        res = least_squares(
            residuals,
            x0=np.array([ta[k], tb[k]]),
            bounds=([0.0, 0.0], [1.0, 1.0]),
            method="trf",
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
        )
        t = np.clip(res.x, 0.0, 1.0)
        rms = math.sqrt(float(np.sum(residuals(t) ** 2)) / y.size)
        if not rms <= self.residual_ceiling:
            raise FitDiverged(
                f"RMS visibility residual {rms:.3g} exceeds {self.residual_ceiling:g}",
                residual=rms,
            )
        self.T_A_, self.T_B_ = float(t[0]), float(t[1])
        self.residual_ = rms
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, ("T_A_", "T_B_"))
        X = check_array(X)
        return _model_visibilities(self.g1, X[:, 0], self.T_A_, self.T_B_)


def fit_transmissions_from_visibility_sweep(
    g1: float,
    g2_grid,
    visibilities,
    eta: Optional[tuple[float, float]] = None,
    residual_ceiling: float = DEFAULT_RESIDUAL_CEILING,
) -> CalibrationResult:
    """Fit the internal transmissions; ``eta`` (from Klyshko) is carried along."""
    X = np.asarray(g2_grid, dtype=float).reshape(-1, 1)
    est = TransmissionEstimator(g1=g1, residual_ceiling=residual_ceiling).fit(X, visibilities)
    eta_A, eta_B = eta if eta is not None else (None, None)
    return CalibrationResult(eta_A, eta_B, est.T_A_, est.T_B_, est.residual_, "visibility-fit")


# --- strategy ----------------------------------------------------------------------

STRATEGY_GRID_POINTS = 1001
UNCONSTRAINED_GAIN_FACTOR = 10.0


@dataclass(frozen=True)
class Recommendation:
    observable: Observable
    g2: float
    fi: float
    rationale: str

    def as_dict(self) -> dict:
        return {
            "observable": self.observable.value,
            "g2": self.g2,
            "fi": self.fi,
            "rationale": self.rationale,
        }


def recommend_strategy(config: InterferometerConfig, g2_max: Optional[float] = None) -> Recommendation:
    """Observable and second-stage gain that maximise the low-gain Fisher information.

    Without a gain limit the singles of the better detector at
    ``g2 = 10*g1`` are returned: far above the loss-balanced point they
    match or beat the coincidences.  With a limit, every observable is
    scanned on a uniform grid over ``[0, g2_max]`` and the best point wins;
    ties go to the smaller gain, then to the earlier observable.
    """
    args = (config.g1, config.T_A, config.T_B, config.eta_A, config.eta_B)
    if g2_max is None:
        obs = Observable.SINGLES_A if config.eta_A >= config.eta_B else Observable.SINGLES_B
        g2 = UNCONSTRAINED_GAIN_FACTOR * config.g1
        fi = float(analytic.max_fisher(args[0], g2, *args[1:], obs))
        return Recommendation(obs, g2, fi, "unconstrained: singles at g2 >> g1")
    if not (math.isfinite(g2_max) and g2_max >= 0.0):
        raise ValueError("g2_max must be a finite gain >= 0")
    grid = np.linspace(0.0, g2_max, STRATEGY_GRID_POINTS)
    table = np.stack([analytic.max_fisher(args[0], grid, *args[1:], obs) for obs in Observable])
    best = table.max()
    # first maximum scanning gains in ascending order
    j, i = np.argwhere(table.T == best)[0]
    obs = list(Observable)[i]
    return Recommendation(obs, float(grid[j]), float(best), "constrained: grid maximum")
