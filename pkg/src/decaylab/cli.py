"""Command line front end.

Every flag mirrors a config field; a --config file supplies whatever
the flags leave out, and flags win when both are given.  Exit codes:
0 all checks passed, 1 a check failed, 2 invalid arguments or config,
3 numerics broke down.  The only environment variable consulted is
DECAYLAB_WORKERS.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import (
    GEOMETRY_POWERS,
    TOLERANCE_DEFAULTS,
    ExperimentConfig,
    GridSpec,
    read_config,
    validate_config,
)
from .control import control_profile
from .damping import DampingFunctionSpec
from .dilation import verify_dilation
from .errors import DecayLabError, InvalidArgumentError
from .evolution import decay_curve, energy_trajectory, fit_decay_law, random_state
from .reporting import CheckRecord, ScenarioReport, emit_report, read_verdict
from .resolvent import assemble_generator, resolvent_sweep
from .scenarios import SCENARIOS, run_scenario
from .spectral import build_circle_model, describe_model, power_model

__all__ = ["main", "build_parser"]

_DAMPING_KINDS = ("constant", "indicator", "smooth-bump", "power-singular")


def _config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="config file supplying unset flags")
    g = parser.add_argument_group("model")
    g.add_argument("--geometry", choices=sorted(GEOMETRY_POWERS))
    g.add_argument("--cutoff", type=int, metavar="K")
    g = parser.add_argument_group("damping")
    g.add_argument("--damping-kind", choices=_DAMPING_KINDS)
    g.add_argument("--damping-interval", nargs=2, type=float, metavar=("LO", "HI"))
    g.add_argument("--damping-amplitude", type=float, metavar="A")
    g.add_argument("--damping-beta", type=float, metavar="B")
    g.add_argument("--fractional-s", type=float, metavar="S")
    g.add_argument("--structural-kind", choices=_DAMPING_KINDS)
    g.add_argument("--structural-interval", nargs=2, type=float, metavar=("LO", "HI"))
    g.add_argument("--structural-amplitude", type=float, metavar="A")
    g = parser.add_argument_group("propagator")
    g.add_argument("--alpha", type=float)
    for prefix in ("lambda", "t"):
        g = parser.add_argument_group(f"{prefix} grid")
        g.add_argument(f"--{prefix}-min", type=float, metavar="LO")
        g.add_argument(f"--{prefix}-max", type=float, metavar="HI")
        g.add_argument(f"--{prefix}-points", type=int, metavar="N")
        g.add_argument(f"--{prefix}-spacing", choices=("log", "linear"))
    g = parser.add_argument_group("weights and run")
    g.add_argument("--mu", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--output", metavar="PATH")
    g.add_argument(
        "--tolerance",
        action="append",
        metavar="NAME=VALUE",
        help=f"override one of {', '.join(sorted(TOLERANCE_DEFAULTS))}; repeatable",
    )


def _build_config(args, default_scenario: str) -> ExperimentConfig:
    base = read_config(args.config) if args.config is not None else None

    def pick(value, base_value, flag):
        if value is not None:
            return value
        if base is not None:
            return base_value
        raise InvalidArgumentError(f"missing {flag} and no --config to supply it")

    def opt(value, base_value):
        if value is not None:
            return value
        return base_value if base is not None else None

    damping = DampingFunctionSpec(
        kind=pick(args.damping_kind, base.damping.kind if base else None, "--damping-kind"),
        interval=tuple(
            pick(args.damping_interval, base.damping.interval if base else None, "--damping-interval")
        ),
        beta=args.damping_beta
        if args.damping_beta is not None
        else (base.damping.beta if base else 0.0),
        amplitude=pick(
            args.damping_amplitude, base.damping.amplitude if base else None, "--damping-amplitude"
        ),
    )
    structural = base.structural if base is not None else None
    if (
        args.structural_kind is not None
        or args.structural_interval is not None
        or args.structural_amplitude is not None
    ):
        prev = structural
        kind = args.structural_kind or (prev.kind if prev else None)
        if kind is None:
            raise InvalidArgumentError("structural flags given without --structural-kind")
        interval = args.structural_interval or (prev.interval if prev else None)
        if interval is None:
            raise InvalidArgumentError("structural flags given without --structural-interval")
        amplitude = (
            args.structural_amplitude
            if args.structural_amplitude is not None
            else (prev.amplitude if prev else None)
        )
        if amplitude is None:
            raise InvalidArgumentError("structural flags given without --structural-amplitude")
        structural = DampingFunctionSpec(kind=kind, interval=tuple(interval), amplitude=amplitude)

    def grid(prefix, base_grid):
        def g(attr, field, flag):
            value = getattr(args, f"{prefix}_{attr}")
            if value is not None:
                return value
            if base_grid is not None:
                return getattr(base_grid, field)
            raise InvalidArgumentError(f"missing --{prefix}-{flag} and no --config to supply it")

        return GridSpec(
            lo=g("min", "lo", "min"),
            hi=g("max", "hi", "max"),
            points=g("points", "points", "points"),
            spacing=g("spacing", "spacing", "spacing"),
        )

    tolerances = dict(base.tolerances) if base is not None else {}
    for item in args.tolerance or ():
        name, sep, text = item.partition("=")
        if not sep or name not in TOLERANCE_DEFAULTS:
            raise InvalidArgumentError(
                f"--tolerance takes NAME=VALUE with NAME one of "
                f"{', '.join(sorted(TOLERANCE_DEFAULTS))}, got {item!r}"
            )
        try:
            tolerances[name] = float(text)
        except ValueError as exc:
            raise InvalidArgumentError(f"bad --tolerance {name}: {exc}") from exc

    config = ExperimentConfig(
        scenario=base.scenario if base is not None else default_scenario,
        geometry=pick(args.geometry, base.geometry if base else None, "--geometry"),
        cutoff=pick(args.cutoff, base.cutoff if base else None, "--cutoff"),
        damping=damping,
        fractional_s=opt(args.fractional_s, base.fractional_s if base else None),
        structural=structural,
        alpha=opt(args.alpha, base.alpha if base else None),
        lambda_grid=grid("lambda", base.lambda_grid if base else None),
        t_grid=grid("t", base.t_grid if base else None),
        mu=pick(args.mu, base.mu if base else None, "--mu"),
        gamma=pick(args.gamma, base.gamma if base else None, "--gamma"),
        seed=pick(args.seed, base.seed if base else None, "--seed"),
        output=pick(args.output, base.output if base else None, "--output"),
        tolerances=tolerances,
    )
    errors = validate_config(config)
    if errors:
        raise InvalidArgumentError("; ".join(errors))
    return config


def _emit(report: ScenarioReport, output: str) -> int:
    paths = emit_report(report, output)
    for check in report.checks:
        print(check.line())
    for path in paths:
        print(f"wrote {path}")
    return 0 if report.passed else 1


def _cmd_model(args) -> int:
    if args.config is not None:
        cfg = read_config(args.config)
        geometry = args.geometry or cfg.geometry
        cutoff = args.cutoff if args.cutoff is not None else cfg.cutoff
    else:
        if args.geometry is None or args.cutoff is None:
            raise InvalidArgumentError("model needs --geometry and --cutoff (or --config)")
        geometry, cutoff = args.geometry, args.cutoff
    model = build_circle_model(cutoff)
    power = GEOMETRY_POWERS[geometry]
    if power != 1.0:
        model = power_model(model, power)
    desc = describe_model(model)
    print(f"geometry: {geometry}")
    for key in ("cutoff", "dim", "kernel_dim"):
        print(f"{key}: {desc[key]}")
    print(f"rho_max: {model.rho_max:g}")
    print(f"ceiling: {model.ceiling():g}")
    return 0


def _cmd_sweep(args) -> int:
    config = _build_config(args, "sweep")
    model = config.model()
    q = config.observation(model)
    sweep = resolvent_sweep(model, q, config.lambda_grid.build())
    report = ScenarioReport(
        scenario=config.scenario,
        config_hash=config.config_hash(),
        seed=config.seed,
        tables={
            "sweep": (
                ("lambda_re", "lambda_im", "pencil_norm", "generator_norm"),
                list(sweep.rows()),
            )
        },
        fits={
            "resolvent": {
                "slope": sweep.fit[0],
                "intercept": sweep.fit[1],
                "r2": sweep.fit[2],
            }
        },
    )
    return _emit(report, config.output)


def _cmd_control(args) -> int:
    config = _build_config(args, "control")
    model = config.model()
    q = config.observation(model)
    profile = control_profile(
        model, q, config.lambda_grid.build(), config.mu, config.gamma, seed=config.seed
    )
    fits = {}
    if profile.fit is not None:
        fits["control"] = {
            "slope": profile.fit[0],
            "intercept": profile.fit[1],
            "r2": profile.fit[2],
        }
    report = ScenarioReport(
        scenario=config.scenario,
        config_hash=config.config_hash(),
        seed=config.seed,
        tables={"profile": (("lambda", "K", "M", "m"), list(profile.rows()))},
        fits=fits,
    )
    return _emit(report, config.output)


def _cmd_dilate(args) -> int:
    config = _build_config(args, "dilate")
    if config.alpha is None:
        raise InvalidArgumentError("dilate needs --alpha (or [propagator] alpha in the config)")
    model = config.model()
    q = config.observation(model)
    cmp = verify_dilation(
        model, q, config.alpha, config.mu, config.gamma, config.lambda_grid.build()
    )
    check = CheckRecord(
        name="dilated-envelope",
        passed=cmp.passed,
        value=float(np.min(cmp.slack)),
        tolerance=0.0,
        detail=f"alpha={config.alpha:g} calibrated C={cmp.constant:.6g}",
    )
    report = ScenarioReport(
        scenario=config.scenario,
        config_hash=config.config_hash(),
        seed=config.seed,
        checks=(check,),
        tables={
            "dilation": (
                ("tilde_lambda", "predicted_M", "predicted_m", "measured_K", "slack"),
                list(cmp.rows()),
            )
        },
    )
    return _emit(report, config.output)


def _cmd_evolve(args) -> int:
    config = _build_config(args, "evolve")
    model = config.model()
    q = config.observation(model)
    times = config.t_grid.build()
    curve = decay_curve(assemble_generator(model, q, quotient=True), times)
    u0, v0 = random_state(model, config.seed)
    trajectory = energy_trajectory(assemble_generator(model, q), u0, v0, times)
    fits = {"dissipation": {"residual": trajectory.dissipation_residual(q)}}
    try:
        law = fit_decay_law(curve)
    except InvalidArgumentError:
        law = None  # t ladder too short for a defensible fit
    if law is not None:
        fits[f"decay-{law.kind}"] = {
            **law.parameters,
            "r2": law.r2,
            "window_lo": law.window[0],
            "window_hi": law.window[1],
        }
    report = ScenarioReport(
        scenario=config.scenario,
        config_hash=config.config_hash(),
        seed=config.seed,
        tables={
            "decay": (("t", "N"), list(curve.rows())),
            "energy": (("t", "E"), list(trajectory.rows())),
        },
        fits=fits,
    )
    return _emit(report, config.output)


def _cmd_scenario(args) -> int:
    config = _build_config(args, args.name or "scenario")
    name = args.name or config.scenario
    if name not in SCENARIOS:
        known = ", ".join(sorted(SCENARIOS))
        raise InvalidArgumentError(f"unknown scenario {name!r}; known scenarios: {known}")
    report = run_scenario(name, config)
    code = _emit(report, config.output)
    print(f"verdict: {'PASS' if report.passed else 'FAIL'}")
    return code


def _cmd_report(args) -> int:
    path = Path(args.summary)
    sys.stdout.write(path.read_text(encoding="utf-8"))
    return 0 if read_verdict(path) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decaylab",
        description="finite-truncation laboratory for damped wave decay laws",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", help="print the spectral model a config describes")
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--geometry", choices=sorted(GEOMETRY_POWERS))
    p.add_argument("--cutoff", type=int, metavar="K")
    p.set_defaults(func=_cmd_model)

    p = sub.add_parser("sweep", help="resolvent norms over the lambda grid")
    _config_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("control", help="control constants over the lambda grid")
    _config_flags(p)
    p.set_defaults(func=_cmd_control)

    p = sub.add_parser("dilate", help="dilated control envelope against measurement")
    _config_flags(p)
    p.set_defaults(func=_cmd_dilate)

    p = sub.add_parser("evolve", help="decay proxy and energy along the t grid")
    _config_flags(p)
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("scenario", help="run a named scenario end to end")
    p.add_argument("name", nargs="?", help=f"one of {', '.join(sorted(SCENARIOS))}")
    _config_flags(p)
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("report", help="print a summary file and exit by its verdict")
    p.add_argument("summary", help="path to a <run>.txt summary")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DecayLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
