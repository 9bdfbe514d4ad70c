"""Command-line entry point: ``lossy-su11 {probe,sweep,compare,calibrate,validate}``.

Exit codes: 0 success, 1 property failure, 2 configuration or data error,
3 calibration fit failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings

import yaml

from . import analytic, bogoliubov, calibration, comparison, fock, sweep, validation
from .model import InterferometerConfig, ModelOutOfRegime, Observable, OutOfRange

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_CONFIG = 2
EXIT_FIT = 3


class ConfigError(Exception):
    pass


# --- config files -------------------------------------------------------------------


def _number(value, where):
    # YAML 1.1 reads "1e-3" (no dot) as a string
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"{where}: expected a number, got {value!r}")


def load_document(path: str) -> dict:
    """Read a YAML (or JSON) mapping."""
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path} is not valid YAML/JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def _section(doc: dict, key: str, required: bool = True) -> dict:
    sec = doc.get(key)
    if sec is None:
        if required:
            raise ConfigError(f"missing section '{key}'")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section '{key}' must be a mapping")
    return sec


def _only_keys(sec: dict, allowed, where: str):
    extra = sorted(set(sec) - set(allowed))
    if extra:
        raise ConfigError(f"{where}: unknown keys {extra}")


_CONFIG_KEYS = ("g1", "g2", "T_A", "T_B", "eta_A", "eta_B", "phi", "theta")


def parse_interferometer(doc: dict) -> InterferometerConfig:
    sec = _section(doc, "interferometer")
    _only_keys(sec, _CONFIG_KEYS, "interferometer")
    for key in ("g1", "g2"):
        if key not in sec and not (key == "g2" and "sweep" in doc):
            raise ConfigError(f"interferometer: missing '{key}'")
    params = {k: _number(v, f"interferometer.{k}") for k, v in sec.items()}
    params.setdefault("g2", 0.0)
    try:
        return InterferometerConfig(**params)
    except OutOfRange as exc:
        raise ConfigError(f"interferometer.{exc.field}: {exc}") from None


def parse_sweep(doc: dict) -> sweep.SweepSpec:
    sec = _section(doc, "sweep", required=False)
    _only_keys(sec, ("g2_min", "g2_max", "points", "spacing"), "sweep")
    kw = {}
    for key in ("g2_min", "g2_max"):
        if key in sec:
            kw[key] = float(_number(sec[key], f"sweep.{key}"))
    if "points" in sec:
        pts = _number(sec["points"], "sweep.points")
        if pts != int(pts):
            raise ConfigError("sweep.points must be an integer")
        kw["points"] = int(pts)
    if "spacing" in sec:
        kw["spacing"] = sec["spacing"]
    try:
        return sweep.SweepSpec(**kw)
    except ValueError as exc:
        raise ConfigError(f"sweep: {exc}") from None


def _engines(doc: dict, override, default):
    raw = override if override is not None else doc.get("engines", default)
    try:
        return sweep.parse_engines(raw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cutoff(doc: dict, override) -> int:
    d = override if override is not None else doc.get("cutoff", fock.DEFAULT_CUTOFF)
    d = _number(d, "cutoff")
    if d != int(d) or d < 2:
        raise ConfigError("cutoff must be an integer >= 2")
    return int(d)


def _phi_step(doc: dict) -> float:
    h = float(_number(doc.get("phi_step", fock.DEFAULT_PHI_STEP), "phi_step"))
    if not 0.0 < h <= 1e-2:
        raise ConfigError("phi_step must lie in (0, 1e-2]")
    return h


# --- output ----------------------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _emit(text: str, out):
    if out:
        sweep.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _require_json(fmt, verb):
    if fmt not in (None, "json"):
        raise ConfigError(f"{verb} writes JSON only")


def _probs(p) -> dict:
    return {"p_A": p.p_A, "p_B": p.p_B, "p_CC": p.p_CC}


# --- verbs -------------------------------------------------------------------------


def cmd_probe(args) -> int:
    _require_json(args.format, "probe")
    doc = load_document(args.config)
    cfg = parse_interferometer(doc)
    engines = _engines(doc, args.engines, "analytic,bogoliubov,fock")
    d = _cutoff(doc, args.cutoff)
    h = _phi_step(doc)

    report = {"config": cfg.as_dict(), "engines": {}, "deltas": {}}
    probs = {}
    if "analytic" in engines:
        sec = {}
        try:
            p = analytic.click_probabilities(cfg)
            probs["analytic"] = p
            sec["click_probabilities"] = _probs(p)
        except ModelOutOfRegime as exc:
            sec["click_probabilities"] = None
            sec["out_of_regime"] = str(exc)
        v = analytic.visibilities(cfg)
        sec["visibilities"] = {"V_A": v.V_A, "V_B": v.V_B, "V_CC": v.V_CC,
                               "defined": [v.defined_A, v.defined_B, v.defined_CC]}
        if cfg.theta == 0.0:
            sec["fisher"] = {o.value: analytic.fisher_at_phase(cfg, o).as_dict() for o in Observable}
            sec["upper_bound"] = analytic.upper_bound(cfg)
        report["engines"]["analytic"] = sec
    if "bogoliubov" in engines:
        m = bogoliubov.moments(cfg)
        sec = {"moments": {"n_a": m.n_a, "n_b": m.n_b, "n_ab": m.n_ab},
               "pseudo_unitarity_defect": bogoliubov.pseudo_unitarity_defect(bogoliubov.compose(cfg))}
        try:
            p = bogoliubov.lowgain_click_probabilities(cfg)
            probs["bogoliubov"] = p
            sec["lowgain_click_probabilities"] = _probs(p)
        except ModelOutOfRegime as exc:
            sec["lowgain_click_probabilities"] = None
            sec["out_of_regime"] = str(exc)
        report["engines"]["bogoliubov"] = sec
    if "fock" in engines:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", fock.TruncationWarning)
            rho = fock.run_interferometer(cfg, d)
            resp = fock.PhaseResponse(cfg, d)
        p = fock.click_probabilities_numeric(rho)
        probs["fock"] = p
        report["engines"]["fock"] = {
            "cutoff": d,
            "leakage": rho.leakage,
            "truncation_warnings": sorted({str(w.message) for w in caught}),
            "click_probabilities": _probs(p),
            "mean_photon_numbers": {"n_a": fock.mean_photon_number(rho, "A"),
                                    "n_b": fock.mean_photon_number(rho, "B")},
            "fisher": {o.value: fock.fisher_from_response(resp, o, h).as_dict() for o in Observable},
        }
    for name in ("bogoliubov", "fock"):
        if name in probs and "analytic" in probs:
            a, b = probs["analytic"], probs[name]
            report["deltas"][f"{name}-analytic"] = {
                k: getattr(b, k) - getattr(a, k) for k in ("p_A", "p_B", "p_CC")
            }
    _emit(_dumps(report), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    fmt = args.format or "csv"
    if fmt not in ("csv", "json"):
        raise ConfigError("sweep writes csv or json")
    doc = load_document(args.config)
    cfg = parse_interferometer(doc)
    spec = parse_sweep(doc)
    engines = _engines(doc, args.engines, "analytic,fock")
    d = _cutoff(doc, args.cutoff)
    h = _phi_step(doc)
    if cfg.theta != 0.0 and "analytic" in engines:
        raise ConfigError("the analytic engine requires theta = 0")
    columns, rows = sweep.run_sweep(cfg, spec, engines, d, h)
    if fmt == "csv":
        text = sweep.format_csv(columns, rows)
    else:
        text = _dumps({"config": cfg.as_dict(), "columns": list(columns),
                       "rows": [dict(zip(columns, r.as_list(columns))) for r in rows]})
    out = args.out or doc.get("output")
    _emit(text, out)
    return EXIT_OK


def cmd_compare(args) -> int:
    _require_json(args.format, "compare")
    doc = load_document(args.config)
    cfg = parse_interferometer(doc)
    sec = _section(doc, "compare", required=False)
    _only_keys(sec, ("su2_eta_max_conditional", "su2_eta_max_unconditional"), "compare")
    overrides = {
        "conditional": sec.get("su2_eta_max_conditional"),
        "unconditional": sec.get("su2_eta_max_unconditional"),
    }
    verdicts = []
    for kind in comparison.AdvantageKind:
        eta = overrides[kind.value]
        if eta is not None:
            eta = _number(eta, f"compare.su2_eta_max_{kind.value}")
        for obs in Observable:
            try:
                verdicts.append(comparison.advantage_threshold(cfg, obs, kind, eta).as_dict())
            except OutOfRange as exc:
                raise ConfigError(str(exc)) from None

    su2_doc = _section(doc, "su2", required=False)
    try:
        if su2_doc:
            params = {k: _number(v, f"su2.{k}") for k, v in su2_doc.items()}
            su2 = comparison.Su2Config(**params)
        else:
            su2 = comparison.Su2Config.matching(cfg)
    except (OutOfRange, TypeError) as exc:
        raise ConfigError(f"su2: {exc}") from None
    except comparison.DegenerateTransmissions as exc:
        raise ConfigError(str(exc)) from None

    regions = {}
    for mode in ("A", "B"):
        try:
            r = comparison.singles_vs_coincidence_region(cfg, mode)
            regions[mode] = {"case": r.case, "alpha": r.alpha, "beta": r.beta}
        except comparison.EfficiencyOne as exc:
            regions[mode] = {"case": None, "limit": exc.limit, "note": str(exc)}

    report = {
        "config": cfg.as_dict(),
        "asymptotic": {
            "conditional": comparison.asymptotic_conditional(cfg.T_A, cfg.T_B),
            "unconditional": comparison.asymptotic_unconditional(cfg.T_A, cfg.T_B, cfg.eta_max),
        },
        "resource_ratio": comparison.resource_ratio(cfg.T_A, cfg.T_B),
        "verdicts": verdicts,
        "singles_vs_coincidences": regions,
        "su2": {
            "config": {k: getattr(su2, k) for k in ("alpha_sq", "R", "T_A", "T_B", "eta_A", "eta_B", "phi")},
            "high_power": su2.high_power,
            "click_probabilities": _probs(comparison.su2_click_probabilities(su2)),
            "fisher_max": comparison.su2_fisher_max(su2).as_dict(),
        },
    }
    _emit(_dumps(report), args.out)
    return EXIT_OK


def _float_list(values, where):
    if not isinstance(values, list):
        raise ConfigError(f"{where} must be a list")
    return [float(_number(v, where)) for v in values]


def cmd_calibrate(args) -> int:
    _require_json(args.format, "calibrate")
    doc = load_document(args.config)
    _only_keys(doc, ("klyshko", "visibility_sweep", "loss_balanced"), "calibration data")
    if not doc:
        raise ConfigError("calibration data needs klyshko, visibility_sweep or loss_balanced")

    eta = None
    if "klyshko" in doc:
        sec = _section(doc, "klyshko")
        try:
            counts = calibration.CountRecord(
                *(float(_number(sec.get(k), f"klyshko.{k}"))
                  for k in ("singles_A", "singles_B", "coincidences")),
                label=str(sec.get("label", "")),
            )
            eta = calibration.klyshko_efficiencies(counts)
        except (calibration.InvalidCounts, calibration.ZeroCounts) as exc:
            raise ConfigError(f"klyshko: {exc}") from None

    result = None
    if "visibility_sweep" in doc:
        sec = _section(doc, "visibility_sweep")
        g1 = float(_number(sec.get("g1"), "visibility_sweep.g1"))
        g2 = _float_list(sec.get("g2"), "visibility_sweep.g2")
        cols = [_float_list(sec.get(k), f"visibility_sweep.{k}") for k in ("V_A", "V_B", "V_CC")]
        if any(len(c) != len(g2) for c in cols):
            raise ConfigError("visibility_sweep: g2, V_A, V_B and V_CC must have equal length")
        ceiling = float(_number(sec.get("residual_ceiling", calibration.DEFAULT_RESIDUAL_CEILING),
                                "visibility_sweep.residual_ceiling"))
        try:
            result = calibration.fit_transmissions_from_visibility_sweep(
                g1, g2, list(zip(*cols)), eta=eta, residual_ceiling=ceiling
            )
        except calibration.FitDiverged as exc:
            sys.stdout.write(_dumps({"error": "fit diverged", "message": str(exc),
                                     "residual": exc.residual}))
            return EXIT_FIT
        except ValueError as exc:
            raise ConfigError(f"visibility_sweep: {exc}") from None
    elif "loss_balanced" in doc:
        sec = _section(doc, "loss_balanced")
        try:
            T_A, T_B = calibration.transmissions_at_loss_balance(
                float(_number(sec.get("V_A"), "loss_balanced.V_A")),
                float(_number(sec.get("V_B"), "loss_balanced.V_B")),
            )
        except ValueError as exc:
            raise ConfigError(f"loss_balanced: {exc}") from None
        eta_A, eta_B = eta if eta is not None else (None, None)
        result = calibration.CalibrationResult(eta_A, eta_B, T_A, T_B, 0.0, "loss-balanced-inversion")
    else:
        result = calibration.CalibrationResult(eta[0], eta[1], None, None, 0.0, "klyshko")

    _emit(_dumps(result.as_dict()), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    _require_json(args.format, "validate")
    results = validation.run_suite(args.level, seed=args.seed)
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.module:<12} {r.name:<30} {r.cases:>7} cases {r.seconds:7.2f} s",
              file=sys.stderr)
    # timings stay on stderr so the JSON report is reproducible
    report = {
        "level": args.level,
        "seed": args.seed,
        "passed": not failed,
        "properties": [
            {k: v for k, v in r.as_dict().items() if k != "seconds"} for r in results
        ],
        "first_failure": (
            {"name": failed[0].name, "module": failed[0].module,
             "counterexample": failed[0].counterexample} if failed else None
        ),
    }
    _emit(_dumps(report), args.out)
    return EXIT_PROPERTY if failed else EXIT_OK


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lossy-su11",
        description="Lossy SU(1,1) interferometer models, sweeps and calibration.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, config=True, engines=False):
        if config:
            p.add_argument("--config", required=True, metavar="PATH",
                           help="YAML or JSON input file")
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        if engines:
            p.add_argument("--engines", metavar="LIST",
                           help="comma-separated subset of analytic,bogoliubov,fock")
            p.add_argument("--cutoff", type=int, metavar="N", help="Fock cutoff per mode")

    common(sub.add_parser("probe", help="evaluate one operating point on every engine"), engines=True)
    common(sub.add_parser("sweep", help="sweep the second-stage gain"), engines=True)
    common(sub.add_parser("compare", help="advantage over a classical interferometer"))
    common(sub.add_parser("calibrate", help="efficiencies and transmissions from data"))
    p = sub.add_parser("validate", help="run the cross-engine property suite")
    common(p, config=False)
    lvl = p.add_mutually_exclusive_group()
    lvl.add_argument("--level", choices=validation.LEVELS, default="fast")
    lvl.add_argument("--fast", dest="level", action="store_const", const="fast",
                     help="shorthand for --level fast")
    lvl.add_argument("--full", dest="level", action="store_const", const="full",
                     help="shorthand for --level full")
    p.add_argument("--seed", type=int, default=0)
    return parser


_VERBS = {
    "probe": cmd_probe,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "calibrate": cmd_calibrate,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which matches the config-error code
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return _VERBS[args.verb](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
