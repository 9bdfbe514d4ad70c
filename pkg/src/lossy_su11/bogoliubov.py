"""Exact vacuum-input moments from the 6x6 Bogoliubov transfer matrix.

Modes are ordered ``(d_A, l_A, a, b^dag, l_B^dag, d_B^dag)``: the first three
slots carry annihilation operators, the last three creation operators.  A
transfer matrix ``M`` therefore preserves the commutators iff
``M @ SIGMA @ M^dag == SIGMA``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ClickProbabilities, InterferometerConfig, ModelOutOfRegime, require_zero_theta

SIGMA = np.diag([1.0, 1.0, 1.0, -1.0, -1.0, -1.0]).astype(complex)

D_A, L_A, A, B, L_B, D_B = range(6)


@dataclass(frozen=True)
class StageMatrices:
    pdc1: np.ndarray
    pdc2: np.ndarray
    phase: np.ndarray
    loss: np.ndarray
    det: np.ndarray


@dataclass(frozen=True)
class MomentSet:
    n_a: float
    n_b: float
    n_ab: float


def stage_matrices(config: InterferometerConfig) -> StageMatrices:
    C1, S1 = np.cosh(config.g1), np.sinh(config.g1)
    C2, S2 = np.cosh(config.g2), np.sinh(config.g2)
    alpha_A, alpha_B = 1.0 - config.T_A, 1.0 - config.T_B
    eta_A, eta_B = config.eta_A, config.eta_B
    eth = np.exp(1j * config.theta)

    pdc1 = np.eye(6, dtype=complex)
    pdc1[A, A], pdc1[A, B] = C1, S1
    pdc1[B, A], pdc1[B, B] = S1, C1

    pdc2 = np.eye(6, dtype=complex)
    pdc2[A, A], pdc2[A, B] = C2, np.conj(eth) * S2
    pdc2[B, A], pdc2[B, B] = eth * S2, C2

    phase = np.eye(6, dtype=complex)
    phase[A, A] = np.exp(1j * config.phi)

    loss = np.eye(6, dtype=complex)
    loss[L_A, L_A], loss[L_A, A] = np.sqrt(1 - alpha_A), np.sqrt(alpha_A)
    loss[A, L_A], loss[A, A] = -np.sqrt(alpha_A), np.sqrt(1 - alpha_A)
    loss[B, B], loss[B, L_B] = np.sqrt(1 - alpha_B), -np.sqrt(alpha_B)
    loss[L_B, B], loss[L_B, L_B] = np.sqrt(alpha_B), np.sqrt(1 - alpha_B)

    det = np.eye(6, dtype=complex)
    det[D_A, D_A], det[D_A, A] = np.sqrt(eta_A), np.sqrt(1 - eta_A)
    det[A, D_A], det[A, A] = -np.sqrt(1 - eta_A), np.sqrt(eta_A)
    det[B, B], det[B, D_B] = np.sqrt(eta_B), -np.sqrt(1 - eta_B)
    det[D_B, B], det[D_B, D_B] = np.sqrt(1 - eta_B), np.sqrt(eta_B)

    return StageMatrices(pdc1, pdc2, phase, loss, det)


def compose(config: InterferometerConfig) -> np.ndarray:
    """``Det . PDC2 . Loss . P . PDC1``, multiplied strictly left to right."""
    st = stage_matrices(config)
    m = st.det @ st.pdc2
    m = m @ st.loss
    m = m @ st.phase
    m = m @ st.pdc1
    return m


def pseudo_unitarity_defect(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix @ SIGMA @ matrix.conj().T - SIGMA)))


def closed_form_matrix(config: InterferometerConfig) -> np.ndarray:
    """The composed transfer matrix written out entry by entry."""
    C1, S1 = np.cosh(config.g1), np.sinh(config.g1)
    C2, S2 = np.cosh(config.g2), np.sinh(config.g2)
    aA, aB = 1.0 - config.T_A, 1.0 - config.T_B
    eA, eB = config.eta_A, config.eta_B
    phi, th = config.phi, config.theta
    sqrt = np.sqrt
    e = lambda x: np.exp(1j * x)  # noqa: E731

    cA = e(phi) * (sqrt(1 - aA) * C1 * C2 + sqrt(1 - aB) * e(-(th + phi)) * S1 * S2)
    cB = e(phi) * (sqrt(1 - aA) * S1 * C2 + sqrt(1 - aB) * C1 * S2 * e(-(th + phi)))
    cC = sqrt(1 - aA) * C1 * S2 * e(th + phi) + sqrt(1 - aB) * S1 * C2
    cD = sqrt(1 - aA) * S1 * S2 * e(th + phi) + sqrt(1 - aB) * C1 * C2

    t = np.zeros((6, 6), dtype=complex)
    t[0] = [sqrt(eA), -C2 * sqrt(aA) * sqrt(1 - eA), cA * sqrt(1 - eA),
            cB * sqrt(1 - eA), -e(-th) * S2 * sqrt(aB) * sqrt(1 - eA), 0]
    t[1] = [0, sqrt(1 - aA), C1 * e(phi) * sqrt(aA), e(phi) * S1 * sqrt(aA), 0, 0]
    t[2] = [-sqrt(1 - eA), -C2 * sqrt(aA) * sqrt(eA), cA * sqrt(eA),
            cB * sqrt(eA), -e(-th) * S2 * sqrt(aB) * sqrt(eA), 0]
    t[3] = [0, -e(th) * S2 * sqrt(aA) * sqrt(eB), cC * sqrt(eB),
            cD * sqrt(eB), -C2 * sqrt(aB) * sqrt(eB), -sqrt(1 - eB)]
    t[4] = [0, 0, S1 * sqrt(aB), C1 * sqrt(aB), sqrt(1 - aB), 0]
    t[5] = [0, -e(th) * S2 * sqrt(aA) * sqrt(1 - eB), cC * sqrt(1 - eB),
            cD * sqrt(1 - eB), -C2 * sqrt(aB) * sqrt(1 - eB), sqrt(eB)]
    return t


def moments_from_matrix(t: np.ndarray) -> MomentSet:
    """Vacuum expectation values of ``n_a``, ``n_b`` and ``n_a n_b``.

    Row ``A`` of ``t`` expands ``a_out`` and row ``B`` expands ``b_out^dag``.
    Only creation operators acting on the vacuum survive in ``a_out^dag a_out``,
    so ``n_a`` is the weight of row ``A`` on the creation slots and ``n_b``
    the weight of row ``B`` on the annihilation slots.  The cross moment
    follows from Wick's theorem; the only non-vanishing pairing beyond
    ``n_a n_b`` is ``|<a_out b_out>|^2``.
    """
    row_a, row_b = t[A], t[B]
    n_a = np.sum(np.abs(row_a[3:]) ** 2)
    n_b = np.sum(np.abs(row_b[:3]) ** 2)
    pair = np.sum(row_a[:3] * np.conj(row_b[:3]))
    n_ab = n_a * n_b + abs(pair) ** 2
    return MomentSet(float(n_a), float(n_b), float(n_ab))


def moments(config: InterferometerConfig) -> MomentSet:
    return moments_from_matrix(compose(config))


def closed_form_moments(config: InterferometerConfig) -> MomentSet:
    """Moments written directly in terms of gains, losses and phases.

    The cross moment uses the coefficient decomposition
    ``n_a n_b + (L_A Lt_A^* + A At^*)(B Bt^* + L_B Lt_B^*)`` with each
    coefficient taken from :func:`closed_form_matrix`.
    """
    C1, S1 = np.cosh(config.g1), np.sinh(config.g1)
    C2, S2 = np.cosh(config.g2), np.sinh(config.g2)
    T_A, T_B = config.T_A, config.T_B
    cross = 2 * S1 * S2 * C1 * C2 * np.sqrt(T_A * T_B) * np.cos(config.theta + config.phi)
    n_a = config.eta_A * (S1**2 * C2**2 * T_A + C1**2 * S2**2 * T_B + S2**2 * (1 - T_B) + cross)
    n_b = config.eta_B * (S1**2 * C2**2 * T_B + C1**2 * S2**2 * T_A + S2**2 * (1 - T_A) + cross)

    t = closed_form_matrix(config)
    # a_out = D_A d_A + L_A l_A + A a + B^* b^dag + L_B^* l_B^dag
    LA, AA, Bc, LBc = t[2, 1], t[2, 2], t[2, 3], t[2, 4]
    # b_out^dag = Lt_A l_A + At a + Bt^* b^dag + Lt_B^* l_B^dag + D_B^* d_B^dag
    LtA, AtA, Btc, LtBc = t[3, 1], t[3, 2], t[3, 3], t[3, 4]
    B_, LB = np.conj(Bc), np.conj(LBc)
    Bt, LtB = np.conj(Btc), np.conj(LtBc)
    extra = (LA * np.conj(LtA) + AA * np.conj(AtA)) * (B_ * np.conj(Bt) + LB * np.conj(LtB))
    n_ab = n_a * n_b + extra
    return MomentSet(float(n_a), float(n_b), float(np.real(n_ab)))


def lowgain_click_probabilities(config: InterferometerConfig) -> ClickProbabilities:
    """Exact moments relabelled as click probabilities.

    Only meaningful in the single-pair regime, where they agree with the
    closed-form low-gain probabilities up to fourth order in the gains.
    """
    require_zero_theta(config)
    m = moments(config)
    if max(m.n_a, m.n_b, m.n_ab) > 1.0:
        raise ModelOutOfRegime("moments exceed 1; not interpretable as click probabilities")
    clip = lambda v: min(max(v, 0.0), 1.0)  # noqa: E731
    return ClickProbabilities(clip(m.n_a), clip(m.n_b), clip(m.n_ab), engine="bogoliubov-lowgain")
