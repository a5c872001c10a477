"""Command-line front end: scenario presets, batch analysis, CSV/JSON/SVG output.

Exit codes: 0 success, 2 configuration error, 3 divergence (partial CSV is
flushed), 4 unsupported graph structure, 5 canard run under a non-critical
perturbation (advisory; outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import (
    build_graph,
    build_initial,
    build_integrator,
    build_system,
    validate_config,
)
from .dynamics import Trajectory, integrate
from .errors import (
    AlfError,
    ConfigError,
    DivergenceError,
    SymmetryViolationError,
    UnsupportedStructureError,
)
from .precision import ScalarContext, exact
from .presets import PRESET_NAMES, get_preset
from .response import ResponseFunction
from .slowfast import (
    PlaneSystem,
    analyze_singularity,
    find_singular_points,
    is_critical_perturbation,
    plane_reduce,
    sample_manifold,
    slow_divergence_exact,
    slow_divergence_integral,
)
from .svg import timeseries_svg

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_STRUCTURE = 4
EXIT_NONCRITICAL = 5

CANARD_TUBE_FACTOR = 10.0  # tube half-width in plane coordinates is 10*epsilon


# choice-style sections are replaced wholesale when overridden; merging two
# alternatives of a union would yield an invalid hybrid
_REPLACE_SECTIONS = frozenset({"graph", "response", "perturbation", "initial", "tspan"})


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if (
            key not in _REPLACE_SECTIONS
            and isinstance(value, dict)
            and isinstance(out.get(key), dict)
        ):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def load_scenario(preset: str | None, config_path: str | None) -> dict:
    """Preset and/or config file, merged (file overrides preset), validated."""
    cfg: dict = {}
    if preset:
        cfg = get_preset(preset)
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError([f"cannot read config {config_path}: {err}"])
        cfg = _deep_merge(cfg, file_cfg)
    if not cfg:
        raise ConfigError(["provide --preset and/or --config"])
    env_digits = os.environ.get("ALF_DIGITS")
    if env_digits:
        try:
            digits = int(env_digits)
        except ValueError:
            raise ConfigError([f"ALF_DIGITS must be an integer, got {env_digits!r}"])
        cfg.setdefault("integrator", {})["digits"] = digits
    return validate_config(cfg)


def _require(cfg: dict, *sections: str) -> None:
    missing = [s for s in sections if s not in cfg]
    if missing:
        raise ConfigError([f"{s}: section is required for this command" for s in missing])


def _analysis(cfg: dict, *keys: str) -> list:
    block = cfg.get("analysis") or {}
    missing = [k for k in keys if k not in block]
    if missing:
        raise ConfigError([f"analysis/{k}: required for this command" for k in missing])
    return [block[k] for k in keys]


def _eliminated_index(cfg: dict, n: int) -> int:
    l = (cfg.get("analysis") or {}).get("eliminate", n)
    if not 1 <= l <= n:
        raise ConfigError([f"analysis/eliminate: must be in 1..{n}"])
    return l


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_trajectory(traj: Trajectory, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        traj.write_csv(fh)


def _write_json(payload, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit(path: Path) -> None:
    print(path)


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args) -> int:
    cfg = load_scenario(args.preset, args.config)
    _require(cfg, "initial", "tspan")
    sys_ = build_system(cfg)
    icfg = build_integrator(cfg.get("integrator"))
    x0 = build_initial(cfg["initial"], sys_.n)
    out = _out_dir(args)
    csv_path = out / "trajectory.csv"
    code = EXIT_OK
    try:
        traj = integrate(sys_, x0, tuple(cfg["tspan"]), icfg)
    except DivergenceError as err:
        traj = err.trajectory
        code = EXIT_DIVERGENCE
        print(f"divergence at t={err.last_time}; partial trajectory flushed", file=sys.stderr)
    _write_trajectory(traj, csv_path)
    _emit(csv_path)
    if args.svg:
        series = [[state[i] for state in traj.states] for i in range(sys_.n)]
        svg = timeseries_svg(traj.times, series, traj.labels, log_time=args.log_time,
                             title=cfg.get("name", "trajectory"))
        svg_path = out / "trajectory.svg"
        svg_path.write_text(svg, encoding="utf-8")
        _emit(svg_path)
    return code


def _plane_from_config(cfg: dict):
    sys_ = build_system(cfg)
    l = _eliminated_index(cfg, sys_.n)
    return sys_, plane_reduce(sys_, l)


def _write_manifold_csv(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,x,branch_id,stability\n")
        for p in rows:
            fh.write(f"{p.k!r},{p.x!r},{p.branch},{p.stability}\n")


def cmd_manifold(args) -> int:
    cfg = load_scenario(args.preset, args.config)
    _, ps = _plane_from_config(cfg)
    k_range, x_range, grid, residual_tol = _analysis(cfg, "k_range", "x_range", "grid", "residual_tol")
    sample = sample_manifold(ps, k_range, x_range, tuple(grid), residual_tol)
    out = _out_dir(args)
    path = out / "manifold.csv"
    _write_manifold_csv(path, sample.points)
    _emit(path)
    return EXIT_OK


def cmd_singularities(args) -> int:
    cfg = load_scenario(args.preset, args.config)
    _, ps = _plane_from_config(cfg)
    (x_range,) = _analysis(cfg, "x_range")
    scan_points = (cfg.get("analysis") or {}).get("scan_points", 2001)
    xs = find_singular_points(ps.f, float(x_range[0]), float(x_range[1]), samples=scan_points)
    reports = sorted((analyze_singularity(ps, x) for x in xs), key=lambda r: float(r.k_s))
    out = _out_dir(args)
    path = out / "singularities.json"
    _write_json([r.to_json() for r in reports], path)
    _emit(path)
    return EXIT_OK


def canard_metrics(traj: Trajectory, n: int, k_star: float, epsilon: float) -> dict:
    """Tube occupancy around the singular crossing plus the departure point.

    The tube is |x - k/n| <= 10*epsilon; reported times are slow times
    (epsilon * t) spent inside the tube before and after the crossing.
    """
    tube = CANARD_TUBE_FACTOR * epsilon
    ts = [float(t) for t in traj.times]
    xs = [float(state[0]) for state in traj.states]
    ks = [float(k) for k in traj.k_series]
    in_tube = [abs(x - k / n) <= tube for x, k in zip(xs, ks)]
    direction = -1.0 if ks[-1] < ks[0] else 1.0
    cross_idx = next(
        (i for i in range(1, len(ks)) if (ks[i] - k_star) * direction >= 0),
        None,
    )
    metrics = {
        "tube_width": tube,
        "k_star": k_star,
        "epsilon": epsilon,
        "crossed": cross_idx is not None,
        "slow_time_before": None,
        "slow_time_after": None,
        "departure_k": None,
    }
    if cross_idx is None:
        return metrics
    entry_idx = cross_idx
    while entry_idx > 0 and in_tube[entry_idx - 1]:
        entry_idx -= 1
    exit_idx = None
    for i in range(cross_idx, len(ks)):
        if not in_tube[i]:
            exit_idx = i
            break
    t_cross = ts[cross_idx]
    metrics["slow_time_before"] = epsilon * (t_cross - ts[entry_idx])
    if exit_idx is not None:
        metrics["slow_time_after"] = epsilon * (ts[exit_idx] - t_cross)
        metrics["departure_k"] = ks[exit_idx]
    else:
        metrics["slow_time_after"] = epsilon * (ts[-1] - t_cross)
    return metrics


def cmd_canard(args) -> int:
    cfg = load_scenario(args.preset, args.config)
    _require(cfg, "initial", "tspan")
    if "plane" not in cfg["initial"]:
        raise ConfigError(["initial: canard runs need the plane form {\"plane\": {...}}"])
    sys_, ps = _plane_from_config(cfg)
    n = sys_.n
    epsilon = float(sys_.epsilon)
    if epsilon <= 0:
        raise ConfigError(["epsilon: canard tracking needs epsilon > 0"])
    (x_range,) = _analysis(cfg, "x_range")
    icfg = build_integrator(cfg.get("integrator"))

    plane_ic = cfg["initial"]["plane"]
    k0 = exact(plane_ic["k0"])
    ctx = ScalarContext(icfg.digits)
    with ctx.workprec():
        k0_s = ctx.scalar(k0)
        x0_s = k0_s / n if plane_ic.get("x0") is None else ctx.scalar(exact(plane_ic["x0"]))

    xs = find_singular_points(ps.f, float(x_range[0]), float(x_range[1]))
    slow_sign = 1.0 if float(ps.slow_rhs_factor(float(x0_s), float(k0))) > 0 else -1.0
    k_star = None
    x_star = None
    for x_s in sorted(xs, key=lambda x: slow_sign * (n * x - float(k0))):
        k_s = n * x_s
        if (k_s - float(k0)) * slow_sign <= 0:
            continue
        if analyze_singularity(ps, x_s).sing_type == "type-1":
            k_star = k_s
            x_star = x_s
            break
    if k_star is None:
        raise ConfigError(["no type-1 singular point lies ahead of the initial condition in the scan range"])

    critical = is_critical_perturbation(sys_.perturbation, x_star, n)
    tube = CANARD_TUBE_FACTOR * epsilon

    def stop(t, y):
        x, k = float(y[0]), float(y[1])
        return abs(x - k / n) > 3.0 * tube or abs(x) > 100.0

    out = _out_dir(args)
    csv_path = out / "canard_trajectory.csv"
    code = EXIT_OK
    try:
        traj = integrate(ps, [x0_s, k0_s], tuple(cfg["tspan"]), icfg, stop_condition=stop)
    except DivergenceError as err:
        traj = err.trajectory
        code = EXIT_DIVERGENCE
        print(f"divergence at t={err.last_time}; partial trajectory flushed", file=sys.stderr)
    _write_trajectory(traj, csv_path)
    _emit(csv_path)

    report = analyze_singularity(ps, x_star)
    metrics = canard_metrics(traj, n, k_star, epsilon)
    metrics.update({
        "critical_perturbation": critical,
        "lambda": None if report.lam is None else float(report.lam),
        "type": report.sing_type,
        "digits": icfg.digits,
    })
    metrics_path = out / "canard_metrics.json"
    _write_json(metrics, metrics_path)
    _emit(metrics_path)

    if code == EXIT_OK and not critical:
        print("advisory: perturbation is not critical at the singular point; no canard expected",
              file=sys.stderr)
        return EXIT_NONCRITICAL
    return code


def cmd_bifurcation(args) -> int:
    cfg = load_scenario(args.preset, args.config)
    _require(cfg, "graph", "response")
    family = cfg["response"].get("family")
    if family is None:
        raise ConfigError(["response: bifurcation sweeps need a family response"])
    graph = build_graph(cfg["graph"])
    if not graph.is_complete():
        raise UnsupportedStructureError("bifurcation diagrams are defined for complete graphs")
    n = graph.n
    k_range, x_range, grid, residual_tol = _analysis(cfg, "k_range", "x_range", "grid", "residual_tol")
    (lambda_values,) = _analysis(cfg, "lambda_values")
    out = _out_dir(args)
    path = out / "bifurcation.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("family,lambda,k,x,branch_id,stability\n")
        for lam in lambda_values:
            f = ResponseFunction.family(family, lam)
            ps = PlaneSystem(n=n, f=f)
            sample = sample_manifold(ps, k_range, x_range, tuple(grid), residual_tol)
            for p in sample.points:
                fh.write(f"{family},{float(lam)!r},{p.k!r},{p.x!r},{p.branch},{p.stability}\n")
    _emit(path)
    return EXIT_OK


def cmd_divergence(args) -> int:
    cfg = load_scenario(args.preset, args.config)
    _, ps = _plane_from_config(cfg)
    (k_range,) = _analysis(cfg, "k_range")
    k1, k2 = float(k_range[0]), float(k_range[1])
    quad = slow_divergence_integral(ps, k1, k2)
    exact_val = slow_divergence_exact(ps, k1, k2)
    out = _out_dir(args)
    path = out / "divergence.json"
    _write_json({"integral": quad, "exact": float(exact_val)}, path)
    _emit(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point

_COMMANDS = {
    "simulate": cmd_simulate,
    "manifold": cmd_manifold,
    "singularities": cmd_singularities,
    "canard": cmd_canard,
    "bifurcation": cmd_bifurcation,
    "divergence": cmd_divergence,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alf",
        description="Numerical laboratory for absolute Laplacian flows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "integrate the full system and emit a trajectory CSV"),
        ("manifold", "sample the critical set on the (x, k)-plane"),
        ("singularities", "classify singular consensus points"),
        ("canard", "track a trajectory through the first type-1 point"),
        ("bifurcation", "stack critical-set samples over a lambda sweep"),
        ("divergence", "slow-divergence integral over a k window"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="scenario JSON file")
        p.add_argument("--preset", help=f"built-in scenario: {', '.join(PRESET_NAMES)}")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--svg", action="store_true", help="emit an SVG plot where supported")
        p.add_argument("--log-time", action="store_true", help="logarithmic time axis in SVG output")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    command = _COMMANDS[args.command]
    try:
        return command(args)
    except ConfigError as err:
        print(json.dumps({"error": "config", "details": err.details}, sort_keys=True), file=sys.stderr)
        return EXIT_CONFIG
    except (UnsupportedStructureError, SymmetryViolationError) as err:
        print(json.dumps({"error": "unsupported-structure", "details": [str(err)]}, sort_keys=True),
              file=sys.stderr)
        return EXIT_STRUCTURE
    except DivergenceError as err:
        print(json.dumps({"error": "divergence", "details": [str(err)]}, sort_keys=True), file=sys.stderr)
        return EXIT_DIVERGENCE
    except AlfError as err:
        print(json.dumps({"error": type(err).__name__, "details": [str(err)]}, sort_keys=True),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
