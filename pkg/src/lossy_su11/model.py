"""Domain types shared by every engine.

All containers are frozen dataclasses; phases are stored reduced to
``[0, 2*pi)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum

TWO_PI = 2.0 * math.pi

# tolerance on the single-arm visibility bound V_A <= sqrt(T_B)
VISIBILITY_BOUND_EPS = 1e-12


class OutOfRange(ValueError):
    """A configuration field violates its declared bound."""

    def __init__(self, field: str, value, bound: str):
        self.field = field
        self.value = value
        self.bound = bound
        super().__init__(f"{field}={value!r} out of range (expected {bound})")


class ModelOutOfRegime(ValueError):
    """The low-gain closed forms are being evaluated outside their validity."""


class Observable(str, Enum):
    SINGLES_A = "singles_A"
    SINGLES_B = "singles_B"
    COINCIDENCES = "coincidences"

    @classmethod
    def coerce(cls, value) -> "Observable":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            aliases = {"A": cls.SINGLES_A, "B": cls.SINGLES_B, "CC": cls.COINCIDENCES}
            if value in aliases:
                return aliases[value]
            raise


def reduce_phase(phi: float) -> float:
    r = math.fmod(phi, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod of values just below a multiple of 2*pi can round up to 2*pi
    return 0.0 if r >= TWO_PI else r


def _check_finite(name, value):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise OutOfRange(name, value, "a real number") from None
    if not math.isfinite(v):
        raise OutOfRange(name, value, "a finite number")
    return v


def _check_unit(name, value):
    v = _check_finite(name, value)
    if not 0.0 <= v <= 1.0:
        raise OutOfRange(name, value, "[0, 1]")
    return v


def _check_gain(name, value):
    v = _check_finite(name, value)
    if v < 0.0:
        raise OutOfRange(name, value, ">= 0")
    return v


_CHECKS = {
    "g1": _check_gain,
    "g2": _check_gain,
    "T_A": _check_unit,
    "T_B": _check_unit,
    "eta_A": _check_unit,
    "eta_B": _check_unit,
    "phi": _check_finite,
    "theta": _check_finite,
}


@dataclass(frozen=True)
class InterferometerConfig:
    """Parameters of a lossy SU(1,1) interferometer.

    ``g1``/``g2`` are the stage gains, ``T_A``/``T_B`` the internal power
    transmissions, ``eta_A``/``eta_B`` the detection efficiencies, ``phi``
    the sample phase on mode A and ``theta`` the pump phase of stage two.

    Construction validates every field in declaration order and raises
    :class:`OutOfRange` for the first offending one.
    """

    g1: float
    g2: float
    T_A: float = 1.0
    T_B: float = 1.0
    eta_A: float = 1.0
    eta_B: float = 1.0
    phi: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = _CHECKS[f.name](f.name, getattr(self, f.name))
            if f.name in ("phi", "theta"):
                value = reduce_phase(value)
            object.__setattr__(self, f.name, value)

    @property
    def eta_max(self) -> float:
        return max(self.eta_A, self.eta_B)

    def replace(self, **changes) -> "InterferometerConfig":
        params = {f.name: getattr(self, f.name) for f in fields(self)}
        params.update(changes)
        return InterferometerConfig(**params)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def validate(config: InterferometerConfig) -> InterferometerConfig:
    """Re-check every invariant and return ``config`` unchanged."""
    for f in fields(InterferometerConfig):
        _CHECKS[f.name](f.name, getattr(config, f.name))
    return config


def require_zero_theta(config: InterferometerConfig) -> None:
    if config.theta != 0.0:
        raise ModelOutOfRegime(
            f"closed-form low-gain model assumes theta = 0, got {config.theta}"
        )


@dataclass(frozen=True)
class ClickProbabilities:
    p_A: float
    p_B: float
    p_CC: float
    engine: str

    def __post_init__(self):
        for name in ("p_A", "p_B", "p_CC"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise OutOfRange(name, v, "[0, 1]")
        if self.engine == "fock" and self.p_CC > min(self.p_A, self.p_B) + 1e-12:
            raise OutOfRange("p_CC", self.p_CC, "<= min(p_A, p_B)")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_A, self.p_B, self.p_CC)


@dataclass(frozen=True)
class VisibilityTriple:
    V_A: float
    V_B: float
    V_CC: float
    defined_A: bool = True
    defined_B: bool = True
    defined_CC: bool = True


@dataclass(frozen=True)
class FisherReport:
    observable: Observable
    fi_at_phi: float
    fi_max: float
    phi_star: float
    # False when the defining denominator vanished and 0 was reported instead
    defined: bool = True

    def as_dict(self) -> dict:
        return {
            "observable": self.observable.value,
            "fi_at_phi": self.fi_at_phi,
            "fi_max": self.fi_max,
            "phi_star": self.phi_star,
            "defined": self.defined,
        }
