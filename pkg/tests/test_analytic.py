import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lossy_su11 import analytic
from lossy_su11.model import InterferometerConfig, ModelOutOfRegime, Observable

# high-precision evaluation of the low-gain expression, frozen
P_A_LOSSY = 3.6202474944289641741e-3
LOSS_BALANCED_LOSSY = 0.037416573867739413856

OBS = list(Observable)


def test_stage_one_only():
    p = analytic.click_probabilities(InterferometerConfig(0.05, 0.0, phi=1.234))
    assert p.as_tuple() == pytest.approx((2.5e-3,) * 3, abs=1e-15)


@pytest.mark.parametrize("g", [0.01, 0.05, 0.2])
def test_destructive_point(g):
    p = analytic.click_probabilities(InterferometerConfig(g, g, phi=math.pi))
    assert max(p.as_tuple()) <= 1e-15


def test_lossy_singles_value(lossy_config):
    p = analytic.click_probabilities(lossy_config)
    assert p.p_A == pytest.approx(P_A_LOSSY, rel=1e-13)


def test_regime_ceiling():
    with pytest.raises(ModelOutOfRegime):
        analytic.click_probabilities(InterferometerConfig(0.3, 0.3))
    with pytest.raises(ModelOutOfRegime):
        analytic.click_probabilities(InterferometerConfig(0.05, 0.03, theta=0.1))


def test_lossless_balanced_visibilities():
    v = analytic.visibilities(InterferometerConfig(0.07, 0.07))
    assert (v.V_A, v.V_B, v.V_CC) == pytest.approx((1, 1, 1), abs=1e-15)


def test_unit_coincidence_visibility_at_loss_balance():
    g2 = 0.05 * math.sqrt(0.56)
    v = analytic.visibilities(InterferometerConfig(0.05, g2, 0.8, 0.7))
    assert v.V_CC == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("obs", OBS)
def test_visibility_matches_phase_sweep(obs):
    cfg = InterferometerConfig(0.05, 0.05, 0.8, 0.7)
    phi = np.linspace(0, 2 * math.pi, 20001)
    p = analytic.click_probability(*analytic._args(cfg), phi, obs)
    fringe = (p.max() - p.min()) / (p.max() + p.min())
    assert analytic.visibility(0.05, 0.05, 0.8, 0.7, obs) == pytest.approx(fringe, rel=1e-7)


def test_fisher_lossless_quadrature():
    g = 0.04
    fi = analytic.fisher_information(g, g, 1, 1, 1, 1, math.pi / 2, Observable.COINCIDENCES)
    assert fi == pytest.approx(2 * g * g, rel=1e-13)


def test_fisher_singles_closed_form_against_finite_difference():
    g1, g2 = 0.05, 0.02
    args = (g1, g2, 0.8, 0.7, 0.9, 1.0)
    expected = 4 * 0.9 * 0.56 * g1**2 * g2**2 / (0.8 * g1**2 + g2**2)
    fi = analytic.fisher_information(*args, math.pi / 2, Observable.SINGLES_A)
    assert fi == pytest.approx(expected, rel=1e-13)
    h = 1e-5
    p = [analytic.click_probability(*args, math.pi / 2 + s * h, Observable.SINGLES_A) for s in (1, -1)]
    p0 = analytic.click_probability(*args, math.pi / 2, Observable.SINGLES_A)
    assert ((p[0] - p[1]) / (2 * h)) ** 2 / p0 == pytest.approx(expected, rel=1e-8)


def test_max_fisher_second_branch():
    fi = analytic.max_fisher(0.05, 0.1, 1, 1, 1, 1, Observable.COINCIDENCES)
    assert fi == pytest.approx(0.01, rel=1e-13)


@pytest.mark.parametrize("g1, g2", [(0.05, 0.03), (0.02, 0.08), (0.1, 0.1)])
def test_lossless_observables_identical(g1, g2):
    vals = [float(analytic.max_fisher(g1, g2, 1, 1, 1, 1, o)) for o in OBS]
    assert vals == pytest.approx([vals[0]] * 3, rel=1e-13)


@pytest.mark.parametrize("T_A, T_B", [(0.95, 0.9), (0.6, 0.55), (0.2, 0.22)])
def test_max_fisher_against_phase_grid(T_A, T_B):
    phi = np.linspace(0, math.pi, 200001)
    for g2 in (0.01, 0.03, 0.2):
        for obs in OBS:
            args = (0.05, g2, T_A, T_B, 0.9, 0.8)
            brute = analytic.fisher_information(*args, phi, obs).max()
            assert analytic.max_fisher(*args, obs) == pytest.approx(brute, rel=1e-6)


def test_coincidence_knee_value():
    # above the loss-balanced gain the coincidence maximum is flat
    g = np.linspace(0.04, 1.0, 50)
    fi = analytic.max_fisher(0.05, g, 0.2, 0.22, 0.9, 0.8, Observable.COINCIDENCES)
    assert np.allclose(fi, 4 * 0.72 * 0.044 * 0.0025, rtol=1e-12)


@pytest.mark.parametrize(
    "g1, T_A, T_B, expected", [(0.05, 1, 1, 0.05), (0.05, 0.8, 0.7, LOSS_BALANCED_LOSSY), (0.0, 0.3, 0.9, 0.0)]
)
def test_loss_balanced_gain(g1, T_A, T_B, expected):
    assert analytic.loss_balanced_g2(g1, T_A, T_B) == pytest.approx(expected, rel=1e-15)


def test_fisher_report_consistency(lossy_config):
    for obs in OBS:
        rep = analytic.fisher_at_phase(lossy_config, obs)
        assert rep.fi_at_phi <= rep.fi_max
        at_star = analytic.fisher_information(*analytic._args(lossy_config), rep.phi_star, obs)
        assert at_star == pytest.approx(rep.fi_max, rel=1e-9)


def test_upper_bound_dominates(lossy_config):
    bound = analytic.upper_bound(lossy_config)
    for g2 in np.linspace(0, 0.3, 31):
        cfg = lossy_config.replace(g2=float(g2))
        assert max(analytic.fisher_max(cfg, o).fi_max for o in OBS) <= bound * (1 + 1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 0.3), st.floats(0, 0.3), st.floats(0, 1), st.floats(0, 1))
def test_coincidences_dominate_with_ideal_detectors(g1, g2, T_A, T_B):
    args = (g1, g2, T_A, T_B, 1.0, 1.0)
    cc = analytic.max_fisher(*args, Observable.COINCIDENCES)
    assert cc >= max(analytic.max_fisher(*args, o) for o in OBS[:2]) - 1e-12


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 0.3), st.floats(0, 0.3), st.floats(0, 1), st.floats(0, 1))
def test_singles_visibility_bound(g1, g2, T_A, T_B):
    assert analytic.visibility(g1, g2, T_A, T_B, Observable.SINGLES_A) <= math.sqrt(T_B) + 1e-12
    assert analytic.visibility(g1, g2, T_A, T_B, Observable.SINGLES_B) <= math.sqrt(T_A) + 1e-12


def test_blocked_mode_b_kills_singles_a_fringe():
    assert analytic.visibility(0.05, 0.04, 0.9, 0.0, Observable.SINGLES_A) == 0.0
    assert analytic.max_fisher(0.05, 0.04, 0.9, 0.0, 1, 1, Observable.SINGLES_A) == 0.0
