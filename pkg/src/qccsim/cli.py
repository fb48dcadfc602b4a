"""Command-line entry point: one reproducible scenario per invocation.

Parameters come from flags, or from a flat JSON config file with flags
taking precedence. Every run echoes its resolved config in the JSON
record it prints, so a record can be re-run bit-exactly.

Exit codes: 0 success, 2 config parse error, 3 validation error,
4 capacity error, 5 numerical error (orthogonal postselection or a
negative inference radicand).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    CapacityError,
    NegativeRadicand,
    NumericalError,
    SimulationError,
    ValidationError,
)
from .montecarlo import estimate_weak_value, sample_intensity_experiment, sample_trials
from .neutron import (
    AbsorberConfig,
    MagneticConfig,
    infer_projector_weak_value,
    infer_spin_weak_value_modulus,
    intensity_absorber,
    intensity_magnetic,
    systematic_term_report,
)
from .pointer import GRID_HALF_WIDTHS, make_gaussian, norm_sq, to_grid
from .qcc import (
    OBSERVABLE_TAGS,
    QccConfig,
    arm_observable,
    build_prepost,
    run_ideal_qcc,
    run_joint_pointers,
)
from .qstate import SIGMA_X, StateVector
from .serialize import (
    dumps_json,
    estimator_report_dict,
    intensity_counts_dict,
    intensity_report_dict,
    qcc_report_dict,
    systematic_report_dict,
    weak_measurement_dict,
    write_grid_csv,
    write_sweep_csv,
    write_trials_csv,
)
from .weakmeas import (
    Observable,
    PrePostContext,
    couple_and_postselect,
    linear_response_report,
    make_observable,
    validity_margin,
    weak_value,
)

OUTDIR_ENV = "QCCSIM_OUTDIR"

SCENARIOS = (
    "weak-value",
    "qcc",
    "qcc-joint",
    "neutron-absorber",
    "neutron-magnetic",
    "montecarlo",
    "sweep",
)

CONTEXT_NAMES = (
    "spin-trivial",
    "path-null",
    "orthogonal",
    "anomalous",
    "qcc-pi-I",
    "qcc-sigma-I",
    "qcc-pi-II",
    "qcc-sigma-II",
)

SWEEP_SCENARIOS = ("qcc", "neutron-absorber", "neutron-magnetic")
MC_MODES = ("pointer", "intensity-absorber", "intensity-magnetic")

QCC_SWEEP_HEADER = (
    "g",
    "wv_pi_I_re",
    "wv_sigma_I_re",
    "wv_pi_II_re",
    "wv_sigma_II_re",
    "shift_I",
    "shift_II",
    "postselect_prob",
)
NEUTRON_SWEEP_HEADER = ("param", "ratio_exact", "ratio_predicted", "inferred_wv", "expansion_error")


def build_context(
    name: str, tan_theta: float = 3.0, swap_spin_labels: bool = False
) -> tuple[PrePostContext, Observable]:
    """Named pre/postselection scenarios used by weak-value and montecarlo runs."""
    from .qstate import identity_operator

    if name.startswith("qcc-"):
        arm = "I" if name.endswith("-I") else "II"
        tag = "projector" if "-pi-" in name else "sigma_x"
        return build_prepost(swap_spin_labels), arm_observable(arm, tag)
    ident = identity_operator((2,))
    if name == "spin-trivial":
        psi = StateVector((2,), ("spin",), [1.0, 0.0])
        chi = StateVector((2,), ("spin",), [1.0, 0.0])
        obs = make_observable(SIGMA_X, ("spin",))
    elif name == "orthogonal":
        psi = StateVector((2,), ("spin",), [1.0, 0.0])
        chi = StateVector((2,), ("spin",), [0.0, 1.0])
        obs = make_observable(SIGMA_X, ("spin",))
    elif name == "path-null":
        r = 1.0 / math.sqrt(2.0)
        psi = StateVector((2,), ("path",), [r, r])
        chi = StateVector((2,), ("path",), [0.0, 1.0])
        obs = make_observable(np.diag([1.0, 0.0]), ("path",))
    elif name == "anomalous":
        theta = math.atan(float(tan_theta))
        psi = StateVector((2,), ("spin",), [1.0, 0.0])
        chi = StateVector((2,), ("spin",), [math.cos(theta), math.sin(theta)])
        obs = make_observable(SIGMA_X, ("spin",))
    else:
        raise ValidationError(f"unknown context {name!r}; choose from {CONTEXT_NAMES}")
    return PrePostContext(psi, ident, ident, chi), obs


def parse_range(text: str) -> np.ndarray:
    """Inclusive sweep grid from a start:stop:count spec."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValidationError(f"range must be start:stop:count, got {text!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise ValidationError(f"bad range {text!r}: {exc}") from None
    if count < 1:
        raise ValidationError(f"range count must be >= 1, got {count}")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ValidationError(f"range endpoints must be finite, got {text!r}")
    return np.linspace(start, stop, count)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qccsim",
        description="Exact simulator for pre/postselected weak measurements "
        "and intensity-based interferometer experiments.",
    )
    parser.add_argument("--version", action="version", version=f"qccsim {__version__}")
    sub = parser.add_subparsers(dest="scenario", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat JSON config file; flags override its values")
        p.add_argument("--json", dest="json_path", help="also write the run record to this file")
        p.add_argument("--csv", dest="csv_path", help="write the scenario's CSV artifact here")
        p.add_argument("--out", help=f"output directory (default ${OUTDIR_ENV} or .)")
        p.add_argument(
            "--validate-only",
            action="store_true",
            help="report precondition violations and exit without computing",
        )

    p = sub.add_parser("weak-value", help="single weak measurement on a named context")
    p.add_argument("--context", choices=CONTEXT_NAMES)
    p.add_argument("--tan-theta", type=float, dest="tan_theta")
    p.add_argument("--g", type=float)
    p.add_argument("--pointer-width", type=float, dest="pointer_width")
    p.add_argument("--grid-xmin", type=float, dest="grid_xmin")
    p.add_argument("--grid-xmax", type=float, dest="grid_xmax")
    p.add_argument("--grid-points", type=int, dest="grid_points")
    add_common(p)

    for name in ("qcc", "qcc-joint"):
        p = sub.add_parser(name, help=f"Cheshire Cat run ({name})")
        p.add_argument("--g", type=float, help="coupling for both arms")
        p.add_argument("--g-I", type=float, dest="g_I")
        p.add_argument("--g-II", type=float, dest="g_II")
        p.add_argument("--observable-I", choices=OBSERVABLE_TAGS, dest="observable_I")
        p.add_argument("--observable-II", choices=OBSERVABLE_TAGS, dest="observable_II")
        p.add_argument("--pointer-width", type=float, dest="pointer_width")
        p.add_argument("--swap-spin-labels", action="store_true", dest="swap_spin_labels")
        add_common(p)

    p = sub.add_parser("neutron-absorber", help="arm absorber intensity experiment")
    p.add_argument("--arm", choices=("I", "II"))
    p.add_argument("--M", type=float)
    add_common(p)

    p = sub.add_parser("neutron-magnetic", help="arm spin-rotation intensity experiment")
    p.add_argument("--arm", choices=("I", "II"))
    p.add_argument("--alpha", type=float)
    add_common(p)

    p = sub.add_parser("montecarlo", help="finite-statistics sampling")
    p.add_argument("--mode", choices=MC_MODES)
    p.add_argument("--context", choices=CONTEXT_NAMES)
    p.add_argument("--tan-theta", type=float, dest="tan_theta")
    p.add_argument("--g", type=float)
    p.add_argument("--pointer-width", type=float, dest="pointer_width")
    p.add_argument("--arm", choices=("I", "II"))
    p.add_argument("--M", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    add_common(p)

    p = sub.add_parser("sweep", help="parameter sweep emitting a CSV table")
    p.add_argument("--scenario", choices=SWEEP_SCENARIOS, dest="sweep_scenario")
    p.add_argument("--g", help="qcc sweep grid, start:stop:count")
    p.add_argument("--M", help="absorber sweep grid, start:stop:count")
    p.add_argument("--alpha", help="rotation sweep grid, start:stop:count")
    p.add_argument("--arm", choices=("I", "II"))
    p.add_argument("--observable-I", choices=OBSERVABLE_TAGS, dest="observable_I")
    p.add_argument("--observable-II", choices=OBSERVABLE_TAGS, dest="observable_II")
    p.add_argument("--pointer-width", type=float, dest="pointer_width")
    add_common(p)

    return parser


DEFAULTS: dict[str, dict] = {
    "weak-value": {
        "context": "qcc-pi-I",
        "tan_theta": 3.0,
        "g": 0.01,
        "pointer_width": 1.0,
        "grid_xmin": None,
        "grid_xmax": None,
        "grid_points": 1024,
    },
    "qcc": {
        "g": 0.02,
        "g_I": None,
        "g_II": None,
        "observable_I": "projector",
        "observable_II": "sigma_x",
        "pointer_width": 1.0,
        "swap_spin_labels": False,
    },
    "neutron-absorber": {"arm": "I", "M": 0.1},
    "neutron-magnetic": {"arm": "I", "alpha": 0.2},
    "montecarlo": {
        "mode": "pointer",
        "context": "qcc-pi-I",
        "tan_theta": 3.0,
        "g": 0.05,
        "pointer_width": 1.0,
        "arm": "I",
        "M": 0.1,
        "alpha": 0.2,
        "n": 100000,
        "seed": 12345,
        "workers": 1,
    },
    "sweep": {
        "sweep_scenario": None,
        "g": None,
        "M": None,
        "alpha": None,
        "arm": "I",
        "observable_I": "projector",
        "observable_II": "sigma_x",
        "pointer_width": 1.0,
    },
}
DEFAULTS["qcc-joint"] = dict(DEFAULTS["qcc"])


class ConfigParseError(SimulationError):
    """The config file is not a flat JSON object."""


def load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config file {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigParseError(f"config file {path} must hold a JSON object")
    return data


def resolve_params(scenario: str, args: argparse.Namespace) -> tuple[dict, list[str]]:
    """Merge defaults, config file, and explicit flags; collect violations."""
    params = dict(DEFAULTS[scenario])
    violations: list[str] = []
    if args.config:
        for key, value in load_config_file(args.config).items():
            if key in params:
                params[key] = value
            else:
                violations.append(f"{key}: unknown parameter for scenario {scenario}")
    for key in params:
        flag_value = getattr(args, key, None)
        if flag_value is not None and flag_value is not False:
            params[key] = flag_value
    return params, violations


def _check_finite(violations: list[str], params: dict, name: str) -> float | None:
    value = params.get(name)
    try:
        value = float(value)
    except (TypeError, ValueError):
        violations.append(f"{name}: must be a number, got {params.get(name)!r}")
        return None
    if not math.isfinite(value):
        violations.append(f"{name}: must be finite, got {value!r}")
        return None
    params[name] = value
    return value


def _check_int(violations: list[str], params: dict, name: str, minimum: int) -> int | None:
    value = params.get(name)
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int) or isinstance(value, bool):
        violations.append(f"{name}: must be an integer, got {params.get(name)!r}")
        return None
    if value < minimum:
        violations.append(f"{name}: must be >= {minimum}, got {value}")
        return None
    params[name] = value
    return value


def _check_choice(violations: list[str], params: dict, name: str, choices) -> None:
    if params.get(name) not in choices:
        violations.append(f"{name}: must be one of {tuple(choices)}, got {params.get(name)!r}")


def validate_params(scenario: str, params: dict) -> list[str]:
    """Every violated precondition, one message per violation."""
    v: list[str] = []
    if scenario == "weak-value":
        _check_choice(v, params, "context", CONTEXT_NAMES)
        _check_finite(v, params, "tan_theta")
        _check_finite(v, params, "g")
        width = _check_finite(v, params, "pointer_width")
        if width is not None and width <= 0.0:
            v.append(f"pointer_width: must be > 0, got {width}")
        _check_int(v, params, "grid_points", 2)
        for key in ("grid_xmin", "grid_xmax"):
            if params.get(key) is not None:
                _check_finite(v, params, key)
    elif scenario in ("qcc", "qcc-joint"):
        _check_choice(v, params, "observable_I", OBSERVABLE_TAGS)
        _check_choice(v, params, "observable_II", OBSERVABLE_TAGS)
        _check_finite(v, params, "g")
        for key in ("g_I", "g_II"):
            if params.get(key) is not None:
                _check_finite(v, params, key)
        width = _check_finite(v, params, "pointer_width")
        if width is not None and width <= 0.0:
            v.append(f"pointer_width: must be > 0, got {width}")
    elif scenario == "neutron-absorber":
        _check_choice(v, params, "arm", ("I", "II"))
        m = _check_finite(v, params, "M")
        if m is not None and m < 0.0:
            v.append(f"M: must be >= 0, got {m}")
    elif scenario == "neutron-magnetic":
        _check_choice(v, params, "arm", ("I", "II"))
        alpha = _check_finite(v, params, "alpha")
        if alpha is not None and abs(alpha) > math.pi:
            v.append(f"alpha: must satisfy |alpha| <= pi, got {alpha}")
    elif scenario == "montecarlo":
        _check_choice(v, params, "mode", MC_MODES)
        _check_int(v, params, "n", 1)
        _check_int(v, params, "seed", 0)
        _check_int(v, params, "workers", 1)
        if params.get("mode") == "pointer":
            _check_choice(v, params, "context", CONTEXT_NAMES)
            _check_finite(v, params, "tan_theta")
            g = _check_finite(v, params, "g")
            if g == 0.0:
                v.append("g: weak-value estimation needs a nonzero coupling")
            width = _check_finite(v, params, "pointer_width")
            if width is not None and width <= 0.0:
                v.append(f"pointer_width: must be > 0, got {width}")
        elif params.get("mode") == "intensity-absorber":
            _check_choice(v, params, "arm", ("I", "II"))
            m = _check_finite(v, params, "M")
            if m is not None and m < 0.0:
                v.append(f"M: must be >= 0, got {m}")
        elif params.get("mode") == "intensity-magnetic":
            _check_choice(v, params, "arm", ("I", "II"))
            alpha = _check_finite(v, params, "alpha")
            if alpha is not None and abs(alpha) > math.pi:
                v.append(f"alpha: must satisfy |alpha| <= pi, got {alpha}")
    elif scenario == "sweep":
        _check_choice(v, params, "sweep_scenario", SWEEP_SCENARIOS)
        ranges = {"qcc": "g", "neutron-absorber": "M", "neutron-magnetic": "alpha"}
        key = ranges.get(params.get("sweep_scenario"))
        if key is not None:
            if params.get(key) is None:
                v.append(f"{key}: sweep over {params['sweep_scenario']} needs --{key} start:stop:count")
            else:
                try:
                    values = parse_range(params[key])
                except ValidationError as exc:
                    v.append(f"{key}: {exc}")
                else:
                    if key == "M" and np.any(values < 0.0):
                        v.append("M: sweep values must be >= 0")
                    if key == "alpha" and np.any(np.abs(values) > math.pi):
                        v.append("alpha: sweep values must satisfy |alpha| <= pi")
        _check_choice(v, params, "arm", ("I", "II"))
        _check_choice(v, params, "observable_I", OBSERVABLE_TAGS)
        _check_choice(v, params, "observable_II", OBSERVABLE_TAGS)
        width = _check_finite(v, params, "pointer_width")
        if width is not None and width <= 0.0:
            v.append(f"pointer_width: must be > 0, got {width}")
    return v


def _qcc_config(params: dict) -> QccConfig:
    g_i = params["g_I"] if params["g_I"] is not None else params["g"]
    g_ii = params["g_II"] if params["g_II"] is not None else params["g"]
    return QccConfig(
        observable_I=params["observable_I"],
        observable_II=params["observable_II"],
        g_I=g_i,
        g_II=g_ii,
        pointer_width=params["pointer_width"],
    )


def run_weak_value(params: dict, csv_path: Path | None) -> dict:
    ctx, obs = build_context(params["context"], params["tan_theta"])
    phi0 = make_gaussian(0.0, params["pointer_width"])
    result = couple_and_postselect(ctx, obs, phi0, params["g"])
    linear = linear_response_report(ctx, obs, phi0, params["g"])
    validity = validity_margin(ctx, obs, phi0, params["g"])
    out = {"context": params["context"]}
    out.update(weak_measurement_dict(result, linear, validity))
    if csv_path is not None:
        w = result.pointer_final.width
        centers = [c.center for c in result.pointer_final.components]
        xmin = params["grid_xmin"]
        xmax = params["grid_xmax"]
        if xmin is None:
            xmin = min(centers) - GRID_HALF_WIDTHS * w
        if xmax is None:
            xmax = max(centers) + GRID_HALF_WIDTHS * w
        grid = to_grid(result.pointer_final, xmin, xmax, params["grid_points"])
        write_grid_csv(grid, csv_path)
        out["grid_csv"] = str(csv_path)
    return out


def run_qcc_scenario(params: dict, joint: bool) -> dict:
    cfg = _qcc_config(params)
    runner = run_joint_pointers if joint else run_ideal_qcc
    report = runner(cfg, swap_spin_labels=bool(params["swap_spin_labels"]))
    return qcc_report_dict(report)


def run_neutron_absorber(params: dict) -> dict:
    return intensity_report_dict(intensity_absorber(AbsorberConfig(params["arm"], params["M"])))


def run_neutron_magnetic(params: dict) -> dict:
    report = intensity_magnetic(MagneticConfig(params["arm"], params["alpha"]))
    return {
        "intensity": intensity_report_dict(report),
        "systematic": systematic_report_dict(systematic_term_report(params["alpha"])),
    }


def run_montecarlo(params: dict, csv_path: Path | None) -> dict:
    n, seed = params["n"], params["seed"]
    if params["mode"] == "pointer":
        ctx, obs = build_context(params["context"], params["tan_theta"])
        phi0 = make_gaussian(0.0, params["pointer_width"])
        batch = sample_trials(ctx, obs, phi0, params["g"], n, seed, workers=params["workers"])
        estimator = estimate_weak_value(batch, phi0, params["g"])
        exact = couple_and_postselect(ctx, obs, phi0, params["g"])
        out = {
            "mode": "pointer",
            "context": params["context"],
            "estimator": estimator_report_dict(estimator),
            "exact_weak_value_re": weak_value(ctx, obs).real,
            "exact_postselect_prob": norm_sq(exact.pointer_final),
        }
        if csv_path is not None:
            write_trials_csv(batch, csv_path)
            out["trials_csv"] = str(csv_path)
        return out
    if params["mode"] == "intensity-absorber":
        cfg = AbsorberConfig(params["arm"], params["M"])
        exact_report = intensity_absorber(cfg)
    else:
        cfg = MagneticConfig(params["arm"], params["alpha"])
        exact_report = intensity_magnetic(cfg)
    counts = sample_intensity_experiment(cfg, n, seed)
    inferred = None
    if isinstance(cfg, AbsorberConfig):
        if cfg.M > 0.0:
            inferred = infer_projector_weak_value(cfg.arm, cfg.M, counts.ratio)
    else:
        pi_w = 1.0 if cfg.arm == "I" else 0.0
        try:
            inferred = infer_spin_weak_value_modulus(cfg.arm, cfg.alpha, counts.ratio, pi_w)
        except NegativeRadicand:
            inferred = None  # sampled ratio below the reachable band
    return {
        "mode": params["mode"],
        "counts": intensity_counts_dict(counts),
        "exact": intensity_report_dict(exact_report),
        "inferred_from_counts": inferred,
    }


def run_sweep(params: dict, csv_path: Path | None) -> dict:
    scenario = params["sweep_scenario"]
    rows: list[tuple] = []
    if scenario == "qcc":
        values = parse_range(params["g"])
        header = QCC_SWEEP_HEADER
        for g in values:
            cfg = QccConfig(
                observable_I=params["observable_I"],
                observable_II=params["observable_II"],
                g_I=float(g),
                g_II=float(g),
                pointer_width=params["pointer_width"],
            )
            rep = run_ideal_qcc(cfg)
            rows.append(
                (
                    float(g),
                    rep.wv_pi_I.real,
                    rep.wv_sigma_I.real,
                    rep.wv_pi_II.real,
                    rep.wv_sigma_II.real,
                    rep.shift_I,
                    rep.shift_II,
                    rep.postselect_prob,
                )
            )
    else:
        header = NEUTRON_SWEEP_HEADER
        magnetic = scenario == "neutron-magnetic"
        values = parse_range(params["alpha"] if magnetic else params["M"])
        for value in values:
            if magnetic:
                rep = intensity_magnetic(MagneticConfig(params["arm"], float(value)))
                predicted = rep.second_order_prediction
            else:
                rep = intensity_absorber(AbsorberConfig(params["arm"], float(value)))
                predicted = rep.first_order_prediction
            rows.append((float(value), rep.ratio, predicted, rep.inferred_weak_value, rep.expansion_error))
    if csv_path is not None:
        write_sweep_csv(csv_path, header, rows)
    out = {
        "swept_scenario": scenario,
        "columns": list(header),
        "rows": [dict(zip(header, row)) for row in rows],
    }
    if csv_path is not None:
        out["sweep_csv"] = str(csv_path)
    return out


def _resolve_out_path(raw: str | None, out_dir: Path) -> Path | None:
    if raw is None:
        return None
    path = Path(raw)
    if not path.is_absolute():
        path = out_dir / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


CSV_SCENARIOS = ("weak-value", "montecarlo", "sweep")


def run(args: argparse.Namespace) -> int:
    scenario = args.scenario
    params, violations = resolve_params(scenario, args)
    violations += validate_params(scenario, params)
    if args.csv_path is not None and scenario not in CSV_SCENARIOS:
        violations.append(f"csv: no CSV artifact defined for scenario {scenario}")
    if args.validate_only:
        sys.stdout.write(dumps_json({"scenario": scenario, "violations": violations}))
        return 0 if not violations else 3
    if violations:
        raise ValidationError("; ".join(violations))

    out_dir = Path(args.out or os.environ.get(OUTDIR_ENV) or ".")
    csv_path = _resolve_out_path(args.csv_path, out_dir)
    json_path = _resolve_out_path(args.json_path, out_dir)

    if scenario == "weak-value":
        results = run_weak_value(params, csv_path)
    elif scenario in ("qcc", "qcc-joint"):
        results = run_qcc_scenario(params, joint=scenario == "qcc-joint")
    elif scenario == "neutron-absorber":
        results = run_neutron_absorber(params)
    elif scenario == "neutron-magnetic":
        results = run_neutron_magnetic(params)
    elif scenario == "montecarlo":
        results = run_montecarlo(params, csv_path)
    else:
        results = run_sweep(params, csv_path)

    record = {
        "artifact": "qccsim",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "scenario": scenario,
        "config": params,
        "results": results,
    }
    text = dumps_json(record)
    sys.stdout.write(text)
    if json_path is not None:
        json_path.write_text(text)
    return 0


def _error_object(exc: Exception) -> str:
    return dumps_json({"error": {"type": type(exc).__name__, "message": str(exc)}})


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except ConfigParseError as exc:
        sys.stderr.write(_error_object(exc))
        return 2
    except ValidationError as exc:
        sys.stderr.write(_error_object(exc))
        return 3
    except CapacityError as exc:
        sys.stderr.write(_error_object(exc))
        return 4
    except NumericalError as exc:
        sys.stderr.write(_error_object(exc))
        return 5


if __name__ == "__main__":
    sys.exit(main())
