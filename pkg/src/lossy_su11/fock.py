"""Truncated two-mode Fock-space simulation of the lossy SU(1,1) interferometer.

States live on ``C^d (x) C^d`` (mode A first) and are stored as ``d^2 x d^2``
matrices; internally the channels work on the ``(d, d, d, d)`` tensor view
``rho[a, b, a', b']``.

The two-mode squeezer is built from its normal-ordered (disentangled) form,
which makes every retained matrix element exact.  Whatever weight it pushes
above the cutoff shows up as a trace deficit (``leakage``) instead of being
folded back into the truncated space.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import comb
from scipy.optimize import minimize_scalar

from .model import ClickProbabilities, FisherReport, InterferometerConfig, Observable

DEFAULT_CUTOFF = 10
DEFAULT_PHI_STEP = 1e-4
LEAKAGE_WARN = 1e-6
# p is a difference of O(1) traces, so below ~1e-12 its relative roundoff exceeds 1e-4
P_FLOOR = 1e-12
DERIVATIVE_RTOL = 1e-4
PHI_GRID_POINTS = 721
PHI_XTOL = 1e-10


class TruncationWarning(UserWarning):
    """The Fock cutoff discards more than the tolerated probability weight."""


class DerivativeUnstable(ArithmeticError):
    """Central finite difference failed its step-halving consistency check."""


@dataclass(frozen=True)
class TwoModeDensityMatrix:
    data: np.ndarray
    cutoff: int
    leakage: float = 0.0

    @classmethod
    def from_array(cls, data, cutoff: int) -> "TwoModeDensityMatrix":
        data = np.asarray(data, dtype=complex).reshape(cutoff**2, cutoff**2)
        leakage = max(0.0, 1.0 - float(np.real(np.trace(data))))
        return cls(data, cutoff, leakage)

    @classmethod
    def vacuum(cls, cutoff: int = DEFAULT_CUTOFF) -> "TwoModeDensityMatrix":
        data = np.zeros((cutoff**2, cutoff**2), dtype=complex)
        data[0, 0] = 1.0
        return cls(data, cutoff, 0.0)

    @classmethod
    def fock(cls, n_a: int, n_b: int, cutoff: int = DEFAULT_CUTOFF) -> "TwoModeDensityMatrix":
        data = np.zeros((cutoff**2, cutoff**2), dtype=complex)
        k = n_a * cutoff + n_b
        data[k, k] = 1.0
        return cls(data, cutoff, 0.0)

    @property
    def tensor(self) -> np.ndarray:
        d = self.cutoff
        return self.data.reshape(d, d, d, d)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.data)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.data + self.data.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def reduced(self, mode: str) -> np.ndarray:
        t = self.tensor
        return np.einsum("abcb->ac", t) if mode == "A" else np.einsum("abad->bd", t)


def _check_mode(mode: str) -> str:
    if mode not in ("A", "B"):
        raise ValueError(f"mode must be 'A' or 'B', got {mode!r}")
    return mode


# --- squeezer ----------------------------------------------------------------


def vacuum_leakage(g: float, d: int) -> float:
    """Weight of a two-mode squeezed vacuum above the per-mode cutoff: ``tanh(g)^(2d)``."""
    return float(np.tanh(g) ** (2 * d))


@lru_cache(maxsize=None)
def _pair_raising(d: int) -> np.ndarray:
    """``a^dag b^dag`` on the truncated space (nilpotent)."""
    a = np.diag(np.sqrt(np.arange(1.0, d)), 1)
    return np.kron(a.T, a.T)


@lru_cache(maxsize=None)
def _pair_raising_powers(d: int) -> np.ndarray:
    """``(a^dag b^dag)^k / k!`` for ``k < d``; higher powers vanish on the block."""
    kp = _pair_raising(d)
    out = np.empty((d, d * d, d * d))
    out[0] = np.eye(d * d)
    for k in range(1, d):
        out[k] = out[k - 1] @ kp / k
    out.setflags(write=False)
    return out


@lru_cache(maxsize=256)
def _squeezer_cached(g: float, theta: float, d: int) -> np.ndarray:
    # exp(tau K+) cosh(g)^-(n_a+n_b+1) exp(-tau^* K-): the lowering factor acts
    # first, so every intermediate state stays below the cutoff and the
    # truncated block is exact
    if g == 0.0:
        return np.eye(d * d, dtype=complex)
    powers = _pair_raising_powers(d)
    tau = np.exp(-1j * theta) * np.tanh(g)
    n = np.arange(d)
    total = np.add.outer(n, n).ravel()
    damp = np.cosh(g) ** (-(total + 1.0))
    k = np.arange(d)
    raise_ = np.tensordot(tau**k, powers, axes=1)
    lower = np.tensordot((-np.conj(tau)) ** k, powers, axes=1).T
    u = raise_ @ (damp[:, None] * lower)
    u.setflags(write=False)
    return u


def two_mode_squeezer(g: float, theta: float = 0.0, d: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Matrix of the two-mode squeezer restricted to the ``d x d`` Fock block.

    Heisenberg action ``a -> cosh(g) a + exp(-1j*theta) sinh(g) b^dag``, i.e.
    generator ``g*(exp(-1j*theta) a^dag b^dag - exp(1j*theta) a b)``.
    """
    if g < 0:
        raise ValueError("gain must be >= 0")
    if d < 2:
        raise ValueError("cutoff must be >= 2")
    leak = vacuum_leakage(g, d)
    if leak > LEAKAGE_WARN:
        warnings.warn(
            f"two-mode squeezer g={g:.4g} at cutoff {d} leaks {leak:.2e} of the vacuum weight",
            TruncationWarning,
            stacklevel=2,
        )
    return _squeezer_cached(float(g), float(theta), int(d))


# --- channels on raw tensors -------------------------------------------------


@lru_cache(maxsize=256)
def loss_kraus(T: float, d: int) -> np.ndarray:
    """Kraus operators ``K[k, n-k, n] = sqrt(C(n,k) T^(n-k) (1-T)^k)`` of a pure-loss channel."""
    if not 0.0 <= T <= 1.0:
        raise ValueError("transmission must be in [0, 1]")
    K = np.zeros((d, d, d))
    for k in range(d):
        for n in range(k, d):
            K[k, n - k, n] = math.sqrt(comb(n, k, exact=True) * T ** (n - k) * (1.0 - T) ** k)
    K.setflags(write=False)
    return K


def _loss_tensor(t: np.ndarray, T: float, mode: str, adjoint: bool = False) -> np.ndarray:
    if T == 1.0:
        return t
    K = loss_kraus(float(T), t.shape[-1])
    if adjoint:
        if mode == "A":
            return np.einsum("kmi,...mbnc,knj->...ibjc", K, t, K, optimize=True)
        return np.einsum("kmi,...ambn,knj->...aibj", K, t, K, optimize=True)
    if mode == "A":
        return np.einsum("kmi,...ibjc,knj->...mbnc", K, t, K, optimize=True)
    return np.einsum("kmi,...aibj,knj->...ambn", K, t, K, optimize=True)


def _unitary_tensor(t: np.ndarray, u: np.ndarray, adjoint: bool = False) -> np.ndarray:
    d = t.shape[-1]
    m = t.reshape(t.shape[:-4] + (d * d, d * d))
    m = u.conj().T @ m @ u if adjoint else u @ m @ u.conj().T
    return m.reshape(t.shape)


def _phase_tensor(t: np.ndarray, phi: float, mode: str) -> np.ndarray:
    d = t.shape[-1]
    n = np.arange(d)
    ph = np.exp(1j * phi * (n[:, None] - n[None, :]))
    if mode == "A":
        return t * ph[:, None, :, None]
    return t * ph[None, :, None, :]


# --- public channels ---------------------------------------------------------


def loss_channel(rho: TwoModeDensityMatrix, mode: str, T: float) -> TwoModeDensityMatrix:
    """Pure-loss channel with power transmission ``T`` on one mode."""
    out = _loss_tensor(rho.tensor, T, _check_mode(mode))
    return TwoModeDensityMatrix.from_array(out, rho.cutoff)


def phase_shift(rho: TwoModeDensityMatrix, mode: str, phi: float) -> TwoModeDensityMatrix:
    out = _phase_tensor(rho.tensor, phi, _check_mode(mode))
    return TwoModeDensityMatrix.from_array(out, rho.cutoff)


def apply_squeezer(rho: TwoModeDensityMatrix, g: float, theta: float = 0.0) -> TwoModeDensityMatrix:
    u = two_mode_squeezer(g, theta, rho.cutoff)
    return TwoModeDensityMatrix.from_array(_unitary_tensor(rho.tensor, u), rho.cutoff)


def run_interferometer(config: InterferometerConfig, d: int = DEFAULT_CUTOFF) -> TwoModeDensityMatrix:
    """Propagate the vacuum through both stages, the sample, losses and detectors."""
    rho = TwoModeDensityMatrix.vacuum(d)
    rho = apply_squeezer(rho, config.g1, 0.0)
    rho = phase_shift(rho, "A", config.phi)
    rho = loss_channel(rho, "A", config.T_A)
    rho = loss_channel(rho, "B", config.T_B)
    rho = apply_squeezer(rho, config.g2, config.theta)
    rho = loss_channel(rho, "A", config.eta_A)
    rho = loss_channel(rho, "B", config.eta_B)
    return rho


# --- detection ---------------------------------------------------------------


def click_povm(d: int) -> dict[str, np.ndarray]:
    """The four joint click outcomes ``(A, B)`` as ``d^2 x d^2`` operators."""
    p0 = np.zeros((d, d))
    p0[0, 0] = 1.0
    p1 = np.eye(d) - p0
    return {
        "no/no": np.kron(p0, p0),
        "click/no": np.kron(p1, p0),
        "no/click": np.kron(p0, p1),
        "click/click": np.kron(p1, p1),
    }


def _clip(p: float) -> float:
    return min(max(p, 0.0), 1.0)


def click_probabilities_numeric(rho: TwoModeDensityMatrix) -> ClickProbabilities:
    """Binary-detector probabilities; weight lost to truncation counts as a click."""
    t = rho.tensor
    q_a = float(np.real(np.trace(t[0, :, 0, :])))
    q_b = float(np.real(np.trace(t[:, 0, :, 0])))
    q_00 = float(np.real(t[0, 0, 0, 0]))
    p_a = _clip(1.0 - q_a)
    p_b = _clip(1.0 - q_b)
    p_cc = _clip(rho.trace - q_a - q_b + q_00)
    p_cc = min(p_cc, p_a, p_b)
    return ClickProbabilities(p_a, p_b, p_cc, engine="fock")


def photon_number_distribution(rho: TwoModeDensityMatrix, mode: str) -> np.ndarray:
    return np.real(np.diag(rho.reduced(_check_mode(mode))))


def mean_photon_number(rho: TwoModeDensityMatrix, mode: str) -> float:
    p = photon_number_distribution(rho, mode)
    return float(np.arange(rho.cutoff) @ p)


def mean_pair_moment(rho: TwoModeDensityMatrix) -> float:
    """``<n_A n_B>`` of the truncated state."""
    d = rho.cutoff
    n = np.arange(d)
    diag = np.real(np.diag(rho.data)).reshape(d, d)
    return float(n @ diag @ n)


# --- phase response and Fisher information -----------------------------------


class PhaseResponse:
    """Click probabilities of one configuration as exact functions of ``phi``.

    The sample phase multiplies the ``(a, a')`` block of the stage-one state
    by ``exp(1j*(a - a')*phi)`` and everything downstream is linear, so each
    probability is a trigonometric polynomial of degree ``d - 1``.  Its
    coefficients are obtained by pulling the detector projectors back through
    the downstream channels (Heisenberg picture) and pairing them with the
    stage-one state.
    """

    def __init__(self, config: InterferometerConfig, d: int = DEFAULT_CUTOFF):
        self.config = config
        self.cutoff = d
        rho1 = apply_squeezer(TwoModeDensityMatrix.vacuum(d), config.g1, 0.0).tensor
        u2 = two_mode_squeezer(config.g2, config.theta, d)

        ops = np.zeros((4, d, d, d, d), dtype=complex)
        eye = np.eye(d)
        ops[0] = np.einsum("ac,bd->abcd", eye, eye)
        ops[1, 0, :, 0, :] = eye  # |0><0|_A (x) I
        ops[2, :, 0, :, 0] = eye  # I (x) |0><0|_B
        ops[3, 0, 0, 0, 0] = 1.0
        ops = _loss_tensor(ops, config.eta_B, "B", adjoint=True)
        ops = _loss_tensor(ops, config.eta_A, "A", adjoint=True)
        ops = _unitary_tensor(ops, u2, adjoint=True)
        ops = _loss_tensor(ops, config.T_B, "B", adjoint=True)
        ops = _loss_tensor(ops, config.T_A, "A", adjoint=True)

        # w[k, a, a'] = sum_{b,b'} rho1[a,b,a',b'] * op_k[a',b',a,b]
        w = np.einsum("abcd,kcdab->kac", rho1, ops)
        self._deltas = np.arange(-(d - 1), d)
        coeffs = np.zeros((4, 2 * d - 1), dtype=complex)
        for i, delta in enumerate(self._deltas):
            coeffs[:, i] = np.trace(w, offset=-delta, axis1=1, axis2=2)
        self._coeffs = coeffs
        one = (self._deltas == 0).astype(complex)
        tr, q_a, q_b, q_00 = coeffs
        # rows follow Observable order: singles_A, singles_B, coincidences
        self._obs_coeffs = np.stack([one - q_a, one - q_b, tr - q_a - q_b + q_00])

    def _basis(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return np.exp(1j * np.multiply.outer(phi, self._deltas))

    def _expect(self, phi) -> np.ndarray:
        return np.real(self._basis(phi) @ self._coeffs.T)  # (..., 4)

    def probabilities(self, phi) -> np.ndarray:
        """Array ``(..., 3)`` of ``(p_A, p_B, p_CC)``."""
        return np.real(self._basis(phi) @ self._obs_coeffs.T)

    def outcome_probabilities(self, phi) -> np.ndarray:
        """Array ``(..., 4)`` of joint outcomes ``(no/no, click/no, no/click, click/click)``."""
        q = self._expect(phi)
        tr, q_a, q_b, q_00 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
        cc = tr - q_a - q_b + q_00
        return np.stack([q_00, q_b - q_00, q_a - q_00, cc], axis=-1)

    def probability(self, phi, observable) -> np.ndarray:
        col = list(Observable).index(Observable.coerce(observable))
        return np.real(self._basis(phi) @ self._obs_coeffs[col])


def _check_derivative(d1, d2, scale):
    # step-doubling estimate of the O(h^2) truncation error of d1
    err = np.abs(d2 - d1) / 3.0
    bad = err > DERIVATIVE_RTOL * np.abs(d1) + 1e-15 * scale
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DerivativeUnstable(
            f"finite-difference derivative error estimate {np.ravel(err)[i]:.3e} exceeds "
            f"{DERIVATIVE_RTOL:g} relative"
        )


def _stencil(h: float) -> np.ndarray:
    return np.array([0.0, h, -h, 2.0 * h, -2.0 * h])


@lru_cache(maxsize=16)
def _grid_basis(hi: float, h: float, d: int) -> tuple[np.ndarray, np.ndarray]:
    grid = np.linspace(0.0, hi, PHI_GRID_POINTS)
    deltas = np.arange(-(d - 1), d)
    basis = np.exp(1j * np.multiply.outer(grid[:, None] + _stencil(h), deltas))
    basis.setflags(write=False)
    return grid, basis


def _fisher_from_stencil(v: np.ndarray, h: float) -> np.ndarray:
    p = v[..., 0]
    d1 = (v[..., 1] - v[..., 2]) / (2.0 * h)
    d2 = (v[..., 3] - v[..., 4]) / (4.0 * h)
    _check_derivative(d1, d2, max(float(np.max(np.abs(p))), 1e-300))
    q = p * (1.0 - p)
    ok = (p > P_FLOOR) & (1.0 - p > P_FLOOR)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(ok, d1 * d1 / np.where(ok, q, 1.0), 0.0)


def binary_fisher(response: PhaseResponse, phi, observable, h: float = DEFAULT_PHI_STEP):
    """``(dp)^2 / (p (1 - p))`` of one binary observable, derivative by central difference.

    A step-doubled difference estimates the derivative error; above
    ``DERIVATIVE_RTOL`` relative, :class:`DerivativeUnstable` is raised.
    """
    phi = np.asarray(phi, dtype=float)
    v = response.probability(phi[..., None] + _stencil(h), observable)
    return _fisher_from_stencil(v, h)


def joint_fisher(response: PhaseResponse, phi, h: float = DEFAULT_PHI_STEP):
    """Fisher information of the full four-outcome click pattern (diagnostic)."""
    phi = np.asarray(phi, dtype=float)
    p = response.outcome_probabilities(phi)
    dp = (response.outcome_probabilities(phi + h) - response.outcome_probabilities(phi - h)) / (2 * h)
    ok = p > P_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(ok, dp * dp / np.where(ok, p, 1.0), 0.0)
    return terms.sum(axis=-1)


def _maximize(fun, grid: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    k = int(np.argmax(values))
    if values[k] <= 0.0:
        return 0.0, 0.0
    if k == 0 or k == len(grid) - 1:
        return float(values[k]), float(grid[k])
    res = minimize_scalar(
        lambda x: -float(fun(x)),
        bounds=(grid[k - 1], grid[k + 1]),
        method="bounded",
        options={"xatol": PHI_XTOL},
    )
    x = float(min(max(res.x, grid[k - 1]), grid[k + 1]))
    best = float(fun(x))
    if best < values[k]:
        return float(values[k]), float(grid[k])
    return best, x


def fisher_from_response(response: PhaseResponse, observable, h: float = DEFAULT_PHI_STEP) -> FisherReport:
    """Binary Fisher information at ``config.phi`` and its maximum over phase.

    The maximum comes from a 721-point grid followed by bounded Brent
    refinement; with ``theta = 0`` the response is even in ``phi`` and the
    search covers ``[0, pi]``, otherwise the full circle.
    """
    obs = Observable.coerce(observable)
    config = response.config
    fun = lambda x: binary_fisher(response, x, obs, h)  # noqa: E731
    at_phi = float(fun(config.phi))
    hi = math.pi if config.theta == 0.0 else 2.0 * math.pi * (1 - 1 / PHI_GRID_POINTS)
    grid, basis = _grid_basis(hi, float(h), response.cutoff)
    col = list(Observable).index(obs)
    values = _fisher_from_stencil(np.real(basis @ response._obs_coeffs[col]), h)
    fi_max, phi_star = _maximize(fun, grid, values)
    if at_phi > fi_max:
        fi_max, phi_star = at_phi, config.phi
    return FisherReport(obs, at_phi, fi_max, phi_star % (2.0 * math.pi))


def fisher_numeric(
    config: InterferometerConfig,
    d: int = DEFAULT_CUTOFF,
    observable=Observable.COINCIDENCES,
    phi_step: float = DEFAULT_PHI_STEP,
) -> FisherReport:
    """Exact-denominator binary Fisher information from the truncated simulation."""
    if not 0.0 < phi_step <= 1e-2:
        raise ValueError("phi_step must lie in (0, 1e-2]")
    return fisher_from_response(PhaseResponse(config, d), observable, phi_step)
