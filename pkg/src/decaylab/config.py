"""Experiment configuration: structured text in, validated record out.

The file format is INI-style with a fixed section vocabulary.  Physical
parameters (geometry, damping, grids, weights, seed) have no defaults
and must be written out; only [tolerances] may be omitted.  Angles are
radians.  Every config serializes to a canonical text whose SHA-256
prefix is the reproducibility key stamped into all outputs.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from .damping import (
    DampingFunctionSpec,
    ObservationOperator,
    compose_fractional,
    multiplier_observation,
    structural_observation,
)
from .errors import InvalidArgumentError
from .spectral import SpectralModel, build_circle_model, power_model

__all__ = [
    "GridSpec",
    "ExperimentConfig",
    "parse_config",
    "read_config",
    "serialize_config",
    "validate_config",
]

GEOMETRY_POWERS = {"circle": 1.0, "water-wave": 0.5, "plate": 2.0}

TOLERANCE_DEFAULTS = {
    "slack": 1e-9,
    "decomposition": 1e-8,
    "r2_floor": 0.95,
    "flatness": 0.1,
}

_SECTIONS = (
    "scenario",
    "model",
    "damping",
    "propagator",
    "lambda_grid",
    "t_grid",
    "weights",
    "tolerances",
    "run",
)


@dataclass(frozen=True)
class GridSpec:
    """Ladder description: endpoints, point count, log or linear spacing."""

    lo: float
    hi: float
    points: int
    spacing: str

    def __post_init__(self):
        if self.spacing not in ("log", "linear"):
            raise InvalidArgumentError(f"spacing must be 'log' or 'linear', got {self.spacing!r}")
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.lo >= self.hi:
            raise InvalidArgumentError(f"grid needs finite lo < hi, got [{self.lo}, {self.hi}]")
        if self.points < 2:
            raise InvalidArgumentError(f"grid needs at least 2 points, got {self.points}")
        if self.spacing == "log" and self.lo <= 0.0:
            raise InvalidArgumentError("log spacing needs a positive lower endpoint")

    def build(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs, in one validated record."""

    scenario: str
    geometry: str
    cutoff: int
    damping: DampingFunctionSpec
    fractional_s: float | None
    structural: DampingFunctionSpec | None
    alpha: float | None
    lambda_grid: GridSpec
    t_grid: GridSpec
    mu: float
    gamma: float
    seed: int
    output: str
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = dict(TOLERANCE_DEFAULTS)
        merged.update(self.tolerances)
        object.__setattr__(self, "tolerances", merged)

    def model(self) -> SpectralModel:
        base = build_circle_model(self.cutoff)
        power = GEOMETRY_POWERS[self.geometry]
        return base if power == 1.0 else power_model(base, power)

    def observation(self, model: SpectralModel) -> ObservationOperator:
        if self.structural is not None:
            return structural_observation(model, self.damping, self.structural)
        q = multiplier_observation(model, self.damping)
        if self.fractional_s is not None:
            q = compose_fractional(q, model, self.fractional_s)
        return q

    def config_hash(self) -> str:
        return hashlib.sha256(serialize_config(self).encode("utf-8")).hexdigest()[:12]


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical text form; fixed section and key order, 17 digits."""
    cp = configparser.ConfigParser()
    cp["scenario"] = {"name": config.scenario}
    cp["model"] = {"geometry": config.geometry, "cutoff": str(config.cutoff)}
    damp = {
        "kind": config.damping.kind,
        "interval": f"{_fmt(config.damping.interval[0])} {_fmt(config.damping.interval[1])}",
        "amplitude": _fmt(config.damping.amplitude),
    }
    if config.damping.kind == "power-singular":
        damp["beta"] = _fmt(config.damping.beta)
    if config.fractional_s is not None:
        damp["fractional_s"] = _fmt(config.fractional_s)
    if config.structural is not None:
        damp["structural_kind"] = config.structural.kind
        damp["structural_interval"] = (
            f"{_fmt(config.structural.interval[0])} {_fmt(config.structural.interval[1])}"
        )
        damp["structural_amplitude"] = _fmt(config.structural.amplitude)
    cp["damping"] = damp
    if config.alpha is not None:
        cp["propagator"] = {"alpha": _fmt(config.alpha)}
    for name, grid in (("lambda_grid", config.lambda_grid), ("t_grid", config.t_grid)):
        cp[name] = {
            "min": _fmt(grid.lo),
            "max": _fmt(grid.hi),
            "points": str(grid.points),
            "spacing": grid.spacing,
        }
    cp["weights"] = {"mu": _fmt(config.mu), "gamma": _fmt(config.gamma)}
    cp["tolerances"] = {k: _fmt(config.tolerances[k]) for k in sorted(config.tolerances)}
    cp["run"] = {"seed": str(config.seed), "output": config.output}
    out = io.StringIO()
    cp.write(out)
    return out.getvalue()


class _Section:
    """Field-level access with 'missing [section] key' error messages."""

    def __init__(self, cp, name):
        self.name = name
        self.raw = dict(cp[name]) if cp.has_section(name) else None

    def require(self):
        if self.raw is None:
            raise InvalidArgumentError(f"missing [{self.name}] section")
        return self

    def get(self, key, cast=str, required=True, default=None):
        if self.raw is None or key not in self.raw:
            if required:
                raise InvalidArgumentError(f"missing [{self.name}] {key}")
            return default
        text = self.raw.pop(key)
        try:
            return cast(text)
        except (TypeError, ValueError) as exc:
            raise InvalidArgumentError(f"bad [{self.name}] {key}: {exc}") from exc

    def finish(self):
        if self.raw:
            extra = ", ".join(sorted(self.raw))
            raise InvalidArgumentError(f"unknown keys in [{self.name}]: {extra}")


def _interval(text: str) -> tuple[float, float]:
    parts = text.split()
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises InvalidArgumentError with field names."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InvalidArgumentError(f"config syntax error: {exc}") from exc
    unknown = set(cp.sections()) - set(_SECTIONS)
    if unknown:
        raise InvalidArgumentError(f"unknown sections: {', '.join(sorted(unknown))}")

    scenario = _Section(cp, "scenario").require().get("name")
    model_sec = _Section(cp, "model").require()
    geometry = model_sec.get("geometry")
    if geometry not in GEOMETRY_POWERS:
        raise InvalidArgumentError(
            f"bad [model] geometry: {geometry!r} is not one of {sorted(GEOMETRY_POWERS)}"
        )
    cutoff = model_sec.get("cutoff", int)
    model_sec.finish()

    damp_sec = _Section(cp, "damping").require()
    kind = damp_sec.get("kind")
    interval = damp_sec.get("interval", _interval)
    amplitude = damp_sec.get("amplitude", float)
    if kind != "power-singular" and damp_sec.raw is not None and "beta" in damp_sec.raw:
        raise InvalidArgumentError("[damping] beta only applies to the power-singular kind")
    beta = damp_sec.get("beta", float, required=(kind == "power-singular"), default=0.0)
    damping = DampingFunctionSpec(kind=kind, interval=interval, beta=beta, amplitude=amplitude)
    fractional_s = damp_sec.get("fractional_s", float, required=False)
    structural = None
    structural_kind = damp_sec.get("structural_kind", required=False)
    if structural_kind is not None:
        structural = DampingFunctionSpec(
            kind=structural_kind,
            interval=damp_sec.get("structural_interval", _interval),
            amplitude=damp_sec.get("structural_amplitude", float),
        )
    damp_sec.finish()

    prop_sec = _Section(cp, "propagator")
    alpha = prop_sec.get("alpha", float, required=False) if prop_sec.raw is not None else None
    if prop_sec.raw is not None:
        prop_sec.finish()

    grids = {}
    for name in ("lambda_grid", "t_grid"):
        sec = _Section(cp, name).require()
        grids[name] = GridSpec(
            lo=sec.get("min", float),
            hi=sec.get("max", float),
            points=sec.get("points", int),
            spacing=sec.get("spacing"),
        )
        sec.finish()

    weights = _Section(cp, "weights").require()
    mu = weights.get("mu", float)
    gamma = weights.get("gamma", float)
    weights.finish()

    tol_sec = _Section(cp, "tolerances")
    tolerances = {}
    if tol_sec.raw is not None:
        for key in list(tol_sec.raw):
            if key not in TOLERANCE_DEFAULTS:
                raise InvalidArgumentError(f"unknown tolerance {key!r}")
            tolerances[key] = tol_sec.get(key, float)
        tol_sec.finish()

    run_sec = _Section(cp, "run").require()
    seed = run_sec.get("seed", int)
    output = run_sec.get("output")
    run_sec.finish()

    config = ExperimentConfig(
        scenario=scenario,
        geometry=geometry,
        cutoff=cutoff,
        damping=damping,
        fractional_s=fractional_s,
        structural=structural,
        alpha=alpha,
        lambda_grid=grids["lambda_grid"],
        t_grid=grids["t_grid"],
        mu=mu,
        gamma=gamma,
        seed=seed,
        output=output,
        tolerances=tolerances,
    )
    errors = validate_config(config)
    if errors:
        raise InvalidArgumentError("; ".join(errors))
    return config


def read_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def validate_config(config: ExperimentConfig) -> list[str]:
    """Cross-field checks; empty list means valid."""
    errors = []
    if config.cutoff < 1:
        errors.append(f"cutoff must be >= 1, got {config.cutoff}")
        return errors
    model = config.model()
    # a declared propagator moves the lambda grid to the dilated scale
    scale = model if config.alpha is None else power_model(model, config.alpha)
    ceiling = scale.ceiling()
    if config.lambda_grid.hi > ceiling * (1.0 + 1e-12):
        rho_max = float(np.max(scale.frequencies))
        errors.append(
            f"lambda_max {config.lambda_grid.hi:g} exceeds the truncation ceiling "
            f"{ceiling:g} (rho_max {rho_max:g})"
        )
    if config.t_grid.lo < 0.0:
        errors.append(f"t_min must be nonnegative, got {config.t_grid.lo:g}")
    if not (0.0 <= config.mu <= 1.0):
        errors.append(f"mu must lie in [0, 1], got {config.mu:g}")
    if not (0.0 <= config.gamma <= 0.5):
        errors.append(f"gamma must lie in [0, 1/2], got {config.gamma:g}")
    if config.fractional_s is not None and not (0.0 <= config.fractional_s <= 0.5):
        errors.append(f"fractional_s must lie in [0, 1/2], got {config.fractional_s:g}")
    if config.alpha is not None and config.alpha <= 0.0:
        errors.append(f"alpha must be positive, got {config.alpha:g}")
    if config.seed < 0:
        errors.append(f"seed must be nonnegative, got {config.seed}")
    if not config.output:
        errors.append("output path must be nonempty")
    for key, value in config.tolerances.items():
        if not (np.isfinite(value) and value > 0.0):
            errors.append(f"tolerance {key} must be positive and finite, got {value!r}")
    return errors
