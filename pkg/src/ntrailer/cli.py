"""Command-line drivers: simulation, censuses, sweeps and verification.

Each run is described by a single JSON config file; a few top-level fields
(seed, output, plot) can be overridden by flags so committed configs stay
reproducible.  Report commands write delimited data (CSV or JSON) and, by
default, a rendered PNG figure next to it.

Exit codes: 0 success, 1 config/validation error, 2 numerical-check
failure.  The environment variable ``NTRAILER_LOG`` controls log verbosity
only.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import equilibria as eq
from . import model, nonholonomy, reduced_dynamics, single_trailer
from . import verification
from .model import ReducedState, TorusCoords, VehicleParams

log = logging.getLogger("ntrailer")


class ConfigError(Exception):
    """Invalid configuration; maps to exit code 1."""


_TOP_KEYS = {"params", "seed", "output", "plot", "simulate", "equilibria",
             "portrait", "period", "holonomy", "brackets", "verify"}


def _check_keys(block: dict, allowed: set, path: str) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"{path}: expected an object")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")


def _require(block: dict, key: str, path: str):
    if key not in block:
        raise ConfigError(f"{path}: missing required key '{key}'")
    return block[key]


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"{path}: line {err.lineno}, column {err.colno}: {err.msg}")
    _check_keys(cfg, _TOP_KEYS, "config")
    return cfg


def _build_context(args) -> dict:
    cfg = _load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.output is not None:
        cfg["output"] = args.output
    if args.plot is not None:
        cfg["plot"] = args.plot
    params = None
    if "params" in cfg:
        try:
            params = VehicleParams.from_dict(cfg["params"])
        except (ValueError, TypeError) as err:
            raise ConfigError(f"config.params: {err}")
    return {
        "cfg": cfg,
        "params": params,
        "seed": int(cfg.get("seed", 0)),
        "plot": bool(cfg.get("plot", True)),
        "prefix": cfg.get("output", args.command),
        "block": cfg.get(args.command, {}),
    }


def _need_params(ctx) -> VehicleParams:
    if ctx["params"] is None:
        raise ConfigError("config: missing required key 'params'")
    return ctx["params"]


def _out(ctx, suffix: str) -> Path:
    path = Path(str(ctx["prefix"]) + suffix)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _integrator_config(block: dict, path: str) -> reduced_dynamics.IntegratorConfig:
    _check_keys(block, {"method", "rtol", "atol", "step", "max_steps"}, path)
    try:
        return reduced_dynamics.IntegratorConfig(
            method=block.get("method", "rk45_adaptive"),
            rtol=float(block.get("rtol", 1e-10)),
            atol=float(block.get("atol", 1e-10)),
            step=float(block.get("step", 1e-3)),
            max_steps=int(block.get("max_steps", 10_000_000)))
    except ValueError as err:
        raise ConfigError(f"{path}: {err}")


def _fmt_row(values) -> str:
    return ",".join("%.17g" % v for v in values)


def cmd_simulate(ctx) -> int:
    params = _need_params(ctx)
    block = ctx["block"]
    _check_keys(block, {"initial", "t_span", "samples", "integrator",
                        "reconstruct", "initial_pose"}, "config.simulate")
    init = _require(block, "initial", "config.simulate")
    _check_keys(init, {"u", "omega", "alpha"}, "config.simulate.initial")
    alpha = np.asarray(init.get("alpha", []), dtype=float)
    if alpha.size != params.n:
        raise ConfigError(
            f"config.simulate.initial.alpha: length {alpha.size}, "
            f"expected n = {params.n}")
    state = ReducedState(u=float(_require(init, "u", "config.simulate.initial")),
                         omega=float(_require(init, "omega",
                                              "config.simulate.initial")),
                         alpha=alpha)
    t_span = tuple(block.get("t_span", (0.0, 100.0)))
    samples = int(block.get("samples", 1001))
    config = _integrator_config(block.get("integrator", {}),
                                "config.simulate.integrator")
    t_eval = np.linspace(t_span[0], t_span[1], samples)

    traj = reduced_dynamics.integrate_reduced(params, state, t_span, config,
                                              t_eval=t_eval)
    if block.get("reconstruct", False):
        pose = tuple(block.get("initial_pose", (0.0, 0.0, 0.0)))
        traj = reduced_dynamics.reconstruct(params, traj, pose)

    csv_path = _out(ctx, ".csv")
    reduced_dynamics.write_trajectory_csv(traj, csv_path)
    summary = {
        "params": params.to_dict(),
        "method": config.method,
        "t_span": list(t_span),
        "samples": samples,
        "energy_initial": model.energy(params, state),
        "energy_drift": traj.energy_drift,
        "omega_drift": traj.omega_drift,
        "constraint_residual": traj.constraint_residual,
    }
    _out(ctx, "_summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n")
    if ctx["plot"]:
        from . import plotting
        plotting.trajectory_figure(traj, _out(ctx, ".png"))
    log.info("simulate: wrote %s (energy drift %.3e)", csv_path,
             traj.energy_drift)
    return 0


def cmd_equilibria(ctx) -> int:
    params = _need_params(ctx)
    block = ctx["block"]
    _check_keys(block, {"energy"}, "config.equilibria")
    E = float(_require(block, "energy", "config.equilibria"))
    try:
        points = eq.enumerate_equilibria(params, E)
    except ValueError as err:
        raise ConfigError(f"config.equilibria: {err}")
    _out(ctx, ".json").write_text(eq.equilibria_report_json(points) + "\n")
    if ctx["plot"]:
        from . import plotting
        plotting.equilibria_figure(points, _out(ctx, ".png"))
    log.info("equilibria: %d points", len(points))
    return 0


def cmd_portrait(ctx) -> int:
    params = _need_params(ctx)
    block = ctx["block"]
    _check_keys(block, {"energy", "grid", "t_span", "samples"},
                "config.portrait")
    E = float(_require(block, "energy", "config.portrait"))
    if E <= 0:
        raise ConfigError("config.portrait.energy must be positive")
    n_beta, n_alpha = block.get("grid", (8, 8))
    t_span = tuple(block.get("t_span", (0.0, 30.0)))
    samples = int(block.get("samples", 301))
    t_eval = np.linspace(t_span[0], t_span[1], samples)

    betas = -math.pi + 2.0 * math.pi * (np.arange(n_beta) + 0.5) / n_beta
    if params.n >= 1:
        alphas = -math.pi + 2.0 * math.pi * (np.arange(n_alpha) + 0.5) / n_alpha
    else:
        alphas = np.array([0.0])
    runs = []
    for beta in betas:
        for a1 in alphas:
            alpha0 = np.zeros(params.n)
            if params.n >= 1:
                alpha0[0] = a1
            tc = TorusCoords(E=E, beta=float(beta), alpha=alpha0)
            runs.append(reduced_dynamics.integrate_torus(
                params, E, tc, t_span, t_eval=t_eval))

    cols = ["traj_id", "t", "beta"] + [f"alpha{i}"
                                       for i in range(1, params.n + 1)]
    lines = [",".join(cols)]
    for tid, tt in enumerate(runs):
        for i, t in enumerate(tt.times):
            lines.append(str(tid) + "," + _fmt_row([t, *tt.angles[i]]))
    _out(ctx, ".csv").write_text("\n".join(lines) + "\n")
    if ctx["plot"]:
        from . import plotting
        points = eq.enumerate_equilibria(params, E) if params.a > 0 else []
        plotting.portrait_figure(runs, points, _out(ctx, ".png"))
    log.info("portrait: %d trajectories", len(runs))
    return 0


def cmd_period(ctx) -> int:
    params = _need_params(ctx)
    block = ctx["block"]
    _check_keys(block, {"omega0", "energies"}, "config.period")
    if params.n != 1 or params.a != 0.0:
        raise ConfigError("config.period requires params with n = 1 and a = 0")
    omega0 = float(_require(block, "omega0", "config.period"))
    requested = _require(block, "energies", "config.period")
    if isinstance(requested, dict):
        path = "config.period.energies"
        _check_keys(requested, {"min", "max", "count"}, path)
        energies = np.linspace(float(_require(requested, "min", path)),
                               float(_require(requested, "max", path)),
                               int(_require(requested, "count", path)))
    else:
        energies = np.asarray(requested, dtype=float)
    e_c = single_trailer.critical_energy(params, omega0)
    rows = []
    for E in energies:
        try:
            regime = single_trailer.classify_regime(params, omega0, float(E))
        except ValueError as err:
            raise ConfigError(f"config.period: {err}")
        if regime != "subcritical":
            raise ConfigError(
                f"config.period: energy {E:.17g} is not below the critical "
                f"energy E_c = {e_c:.17g}")
        rows.append((float(E), single_trailer.period(params, omega0, float(E)),
                     regime))
    lines = ["E,T,regime"]
    lines += [f"{_fmt_row([E, T])},{regime}" for E, T, regime in rows]
    _out(ctx, ".csv").write_text("\n".join(lines) + "\n")
    if ctx["plot"]:
        from . import plotting
        plotting.period_figure([r[0] for r in rows], [r[1] for r in rows],
                               e_c, _out(ctx, ".png"))
    log.info("period: %d energies, E_c = %.6g", len(rows), e_c)
    return 0


def cmd_holonomy(ctx) -> int:
    params = _need_params(ctx)
    block = ctx["block"]
    _check_keys(block, {"omega0", "energy", "figure_periods"},
                "config.holonomy")
    if params.n != 1 or params.a != 0.0:
        raise ConfigError("config.holonomy requires params with n = 1 and a = 0")
    omega0 = float(_require(block, "omega0", "config.holonomy"))
    E = float(_require(block, "energy", "config.holonomy"))
    try:
        hol = single_trailer.holonomy(params, omega0, E)
    except ValueError as err:
        raise ConfigError(f"config.holonomy: {err}")
    _out(ctx, ".json").write_text(
        json.dumps(hol.to_dict(), sort_keys=True, indent=2) + "\n")
    if ctx["plot"]:
        from . import plotting
        n_periods = int(block.get("figure_periods", 8))
        k = math.sqrt(2.0 * E - params.J0 * omega0**2)
        u0 = k / math.sqrt(model.coeff_R(params, [0.0]))
        state = ReducedState(u=u0, omega=omega0, alpha=[0.0])
        t1 = n_periods * hol.period
        traj = reduced_dynamics.integrate_reduced(
            params, state, (0.0, t1), t_eval=np.linspace(0.0, t1, 2001))
        traj = reduced_dynamics.reconstruct(params, traj)
        plotting.holonomy_figure(traj.poses, _out(ctx, ".png"))
    log.info("holonomy: dtheta = %.6g, |dz| = %.6g", hol.dtheta,
             math.hypot(hol.dx, hol.dy))
    return 0


def cmd_brackets(ctx) -> int:
    params = _need_params(ctx)
    block = ctx["block"]
    _check_keys(block, {"grid_resolution"}, "config.brackets")
    if params.n < 1:
        raise ConfigError("config.brackets requires at least one trailer")
    resolution = int(block.get("grid_resolution", 32))
    reports = nonholonomy.find_singular(params, resolution)
    _out(ctx, ".csv").write_text(
        nonholonomy.singular_scan_csv(params, reports))
    if ctx["plot"]:
        from . import plotting
        plotting.degree_figure(params, reports, resolution, _out(ctx, ".png"))
    n_sing = sum(bool(r.singular) for r in reports)
    log.info("brackets: %d/%d singular grid points", n_sing, len(reports))
    return 0


def cmd_verify(ctx) -> int:
    block = ctx["block"]
    _check_keys(block, {"oracle_samples"}, "config.verify")
    samples = int(block.get("oracle_samples", 1000))
    results = verification.run_checks(seed=ctx["seed"],
                                      oracle_samples=samples,
                                      params=ctx["params"])
    text = verification.report_text(results)
    sys.stdout.write(text)
    _out(ctx, ".txt").write_text(text)
    return 0 if all(r.passed for r in results) else 2


_COMMANDS = {
    "simulate": cmd_simulate,
    "equilibria": cmd_equilibria,
    "portrait": cmd_portrait,
    "period": cmd_period,
    "holonomy": cmd_holonomy,
    "brackets": cmd_brackets,
    "verify": cmd_verify,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ntrailer",
        description="Inertial dynamics of an articulated n-trailer vehicle.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "integrate the reduced system, optionally reconstruct"
                     " the planar motion"),
        ("equilibria", "enumerate and classify equilibria on an energy level"),
        ("portrait", "phase portrait of the flow on the energy torus"),
        ("period", "period sweep of the one-trailer hitch oscillation"),
        ("holonomy", "per-period rigid motion of the leading car"),
        ("brackets", "degree-of-nonholonomy scan over hitch angles"),
        ("verify", "run the oracle residual battery"),
    ]:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("-c", "--config", default=None,
                        help="JSON run configuration")
        sp.add_argument("-o", "--output", default=None,
                        help="output path prefix (overrides config)")
        sp.add_argument("--seed", type=int, default=None,
                        help="seed for randomized checks (overrides config)")
        group = sp.add_mutually_exclusive_group()
        group.add_argument("--plot", dest="plot", action="store_true",
                           default=None, help="render figures (default)")
        group.add_argument("--no-plot", dest="plot", action="store_false",
                           help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    level = os.environ.get("NTRAILER_LOG", "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        ctx = _build_context(args)
        return _COMMANDS[args.command](ctx)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except RuntimeError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
