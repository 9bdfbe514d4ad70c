"""Second-stage gain sweeps across engines, written as deterministic CSV."""
from __future__ import annotations

import math
import os
import tempfile
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array

from . import analytic, bogoliubov, fock
from .model import InterferometerConfig, Observable

ENGINES = ("analytic", "bogoliubov", "fock")

ANALYTIC_COLUMNS = (
    "p_A", "p_B", "p_CC", "V_A", "V_B", "V_CC", "FI_A_max", "FI_B_max", "FI_CC_max",
)
BOGOLIUBOV_COLUMNS = ("n_a", "n_b", "n_ab")
FOCK_COLUMNS = (
    "p_A_num", "p_B_num", "p_CC_num", "FI_A_num", "FI_B_num", "FI_CC_num", "leakage_num",
)
FLOAT_FORMAT = "%.17e"


@dataclass(frozen=True)
class SweepSpec:
    g2_min: float = 1e-3
    g2_max: float = 1.0
    points: int = 200
    spacing: str = "log"

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 2:
            raise ValueError("sweep needs at least 2 points")
        if self.spacing not in ("log", "linear"):
            raise ValueError(f"spacing must be 'log' or 'linear', got {self.spacing!r}")
        if not (math.isfinite(self.g2_min) and math.isfinite(self.g2_max)):
            raise ValueError("sweep bounds must be finite")
        if self.g2_min < 0 or not self.g2_max > self.g2_min:
            raise ValueError("need 0 <= g2_min < g2_max")
        if self.spacing == "log" and self.g2_min <= 0:
            raise ValueError("log sweeps need g2_min > 0")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(math.log10(self.g2_min), math.log10(self.g2_max), int(self.points))
        return np.linspace(self.g2_min, self.g2_max, int(self.points))


def columns_for(engines) -> tuple[str, ...]:
    cols = ["g2"]
    if "analytic" in engines:
        cols += ANALYTIC_COLUMNS
    if "bogoliubov" in engines:
        cols += BOGOLIUBOV_COLUMNS
    if "fock" in engines:
        cols += FOCK_COLUMNS
    return tuple(cols) + ("loss_balanced",)


def parse_engines(engines) -> tuple[str, ...]:
    if isinstance(engines, str):
        engines = [e.strip() for e in engines.split(",") if e.strip()]
    unknown = set(engines) - set(ENGINES)
    if unknown or not engines:
        raise ValueError(f"engines must be a non-empty subset of {ENGINES}, got {list(engines)}")
    # canonical order keeps the column layout independent of how the list was typed
    return tuple(e for e in ENGINES if e in engines)


def loss_balanced_index(grid: np.ndarray, g1: float, T_A: float, T_B: float):
    """Index of the grid point nearest the loss-balanced gain, or None if it lies off the grid.

    The target counts as on the grid when it is within half a local step of
    the first or last point.
    """
    target = analytic.loss_balanced_g2(g1, T_A, T_B)
    if target <= 0.0:
        return None
    k = int(np.argmin(np.abs(grid - target)))
    lo = grid[0] - 0.5 * (grid[1] - grid[0])
    hi = grid[-1] + 0.5 * (grid[-1] - grid[-2])
    return k if lo <= target <= hi else None


@dataclass
class SweepRow:
    g2: float
    values: dict = field(default_factory=dict)
    loss_balanced: bool = False

    def as_list(self, columns) -> list:
        out = []
        for c in columns:
            if c == "g2":
                out.append(self.g2)
            elif c == "loss_balanced":
                out.append(int(self.loss_balanced))
            else:
                out.append(self.values[c])
        return out


def evaluate_row(config: InterferometerConfig, engines, cutoff: int, phi_step: float) -> SweepRow:
    row = SweepRow(config.g2)
    v = row.values
    args = analytic._args(config)
    if "analytic" in engines:
        # closed-form values, reported even where the low-gain picture has broken down
        for name, obs in zip(("p_A", "p_B", "p_CC"), Observable):
            v[name] = float(analytic.click_probability(*args, config.phi, obs))
        vis = analytic.visibilities(config)
        v["V_A"], v["V_B"], v["V_CC"] = vis.V_A, vis.V_B, vis.V_CC
        for name, obs in zip(("FI_A_max", "FI_B_max", "FI_CC_max"), Observable):
            v[name] = float(analytic.max_fisher(*args, obs))
    if "bogoliubov" in engines:
        m = bogoliubov.moments(config)
        v["n_a"], v["n_b"], v["n_ab"] = m.n_a, m.n_b, m.n_ab
    if "fock" in engines:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", fock.TruncationWarning)
            resp = fock.PhaseResponse(config, cutoff)
        p = resp.probabilities(config.phi)
        v["p_A_num"], v["p_B_num"], v["p_CC_num"] = (float(x) for x in p)
        for name, obs in zip(("FI_A_num", "FI_B_num", "FI_CC_num"), Observable):
            v[name] = fock.fisher_from_response(resp, obs, phi_step).fi_max
        v["leakage_num"] = max(0.0, 1.0 - float(resp._expect(config.phi)[0]))
    return row


class SweepTransformer(TransformerMixin, BaseEstimator):
    """Maps a column of ``g2`` values to one row of engine outputs each.

    Every other parameter comes from ``config``.  ``transform`` returns a
    float array whose columns are named by :meth:`get_feature_names_out`;
    rows are evaluated in input order and do not depend on one another.
    """

    def __init__(self, config=None, engines=("analytic",), cutoff=fock.DEFAULT_CUTOFF,
                 phi_step=fock.DEFAULT_PHI_STEP):
        self.config = config
        self.engines = engines
        self.cutoff = cutoff
        self.phi_step = phi_step

    def fit(self, X, y=None):
        X = check_array(X)
        if X.shape[1] != 1:
            raise ValueError("expected a single column of g2 values")
        self.engines_ = parse_engines(self.engines)
        self.config_ = self.config if self.config is not None else InterferometerConfig(0.05, 0.0)
        self.n_features_in_ = 1
        return self

    def rows(self, X) -> list[SweepRow]:
        X = check_array(X)
        g2 = X[:, 0]
        cfg = self.config_
        k = loss_balanced_index(g2, cfg.g1, cfg.T_A, cfg.T_B) if len(g2) > 1 else None
        out = []
        for i, g in enumerate(g2):
            row = evaluate_row(cfg.replace(g2=float(g)), self.engines_, self.cutoff, self.phi_step)
            row.loss_balanced = i == k
            out.append(row)
        return out

    def transform(self, X):
        cols = self.get_feature_names_out()
        return np.array([r.as_list(cols) for r in self.rows(X)], dtype=float)

    def get_feature_names_out(self, input_features=None):
        return np.array(columns_for(self.engines_), dtype=object)


def run_sweep(config: InterferometerConfig, spec: SweepSpec, engines=("analytic",),
              cutoff: int = fock.DEFAULT_CUTOFF, phi_step: float = fock.DEFAULT_PHI_STEP):
    """Return (column names, rows) for the sweep."""
    grid = spec.grid()
    tr = SweepTransformer(config, engines, cutoff, phi_step).fit(grid.reshape(-1, 1))
    return tuple(tr.get_feature_names_out()), tr.rows(grid.reshape(-1, 1))


def format_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for r in rows:
        cells = []
        for c, x in zip(columns, r.as_list(columns)):
            cells.append(str(x) if c == "loss_balanced" else FLOAT_FORMAT % x)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a sibling temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
