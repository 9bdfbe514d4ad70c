import math

import pytest
from hypothesis import given, strategies as st

from lossy_su11.model import (
    ClickProbabilities,
    InterferometerConfig,
    ModelOutOfRegime,
    Observable,
    OutOfRange,
    reduce_phase,
    require_zero_theta,
    validate,
)


def test_defaults_accepted():
    cfg = InterferometerConfig(0.05, 0.03)
    assert (cfg.T_A, cfg.T_B, cfg.eta_A, cfg.eta_B, cfg.phi, cfg.theta) == (1, 1, 1, 1, 0, 0)
    assert validate(cfg) is cfg


@pytest.mark.parametrize(
    "field, value",
    [("T_A", 1.2), ("T_B", -0.1), ("eta_A", 1.0001), ("eta_B", -1e-9), ("g1", -0.01), ("g2", -1.0)],
)
def test_out_of_range_names_field(field, value):
    params = dict(g1=0.05, g2=0.03)
    params[field] = value
    with pytest.raises(OutOfRange) as err:
        InterferometerConfig(**params)
    assert err.value.field == field


@pytest.mark.parametrize("value", [math.nan, math.inf, -math.inf, "x"])
def test_non_finite_rejected(value):
    with pytest.raises(OutOfRange):
        InterferometerConfig(0.05, 0.03, phi=value)


@given(st.floats(-50.0, 50.0, allow_nan=False))
def test_phase_reduction_range(phi):
    r = reduce_phase(phi)
    assert 0.0 <= r < 2 * math.pi
    assert math.isclose(math.cos(r), math.cos(phi), abs_tol=1e-9)


@given(
    st.floats(0, 2), st.floats(0, 2), st.floats(-0.5, 1.5), st.floats(-0.5, 1.5),
    st.floats(-0.5, 1.5), st.floats(-0.5, 1.5),
)
def test_validation_total(g1, g2, ta, tb, ea, eb):
    inside = all(0.0 <= v <= 1.0 for v in (ta, tb, ea, eb))
    try:
        InterferometerConfig(g1, g2, ta, tb, ea, eb)
    except OutOfRange:
        assert not inside
    else:
        assert inside


def test_replace_revalidates():
    cfg = InterferometerConfig(0.05, 0.03)
    assert cfg.replace(g2=0.1).g2 == 0.1
    with pytest.raises(OutOfRange):
        cfg.replace(T_A=2.0)


def test_require_zero_theta():
    require_zero_theta(InterferometerConfig(0.05, 0.03))
    with pytest.raises(ModelOutOfRegime):
        require_zero_theta(InterferometerConfig(0.05, 0.03, theta=0.2))


@pytest.mark.parametrize("alias, obs", [("A", Observable.SINGLES_A), ("B", Observable.SINGLES_B),
                                        ("CC", Observable.COINCIDENCES),
                                        ("coincidences", Observable.COINCIDENCES)])
def test_observable_aliases(alias, obs):
    assert Observable.coerce(alias) is obs


def test_click_probability_invariants():
    with pytest.raises(OutOfRange):
        ClickProbabilities(1.2, 0.1, 0.0, "analytic")
    with pytest.raises(OutOfRange):
        ClickProbabilities(0.1, 0.2, 0.3, "fock")
