"""Time-domain laboratory: exponentials of the block generator.

Everything stationary in this package has a time-domain shadow, and this
module computes it exactly: matrix exponentials with a halved-step
consistency certificate, the semigroup decomposition against the zero
group projector, the decay proxy N(t) = ||e^{tA} A^{-1}|| on the
quotient, energy trajectories with the dissipation identity, and the
translation of control-constant growth laws into decay laws.

Finite truncations are eventually exponential at their spectral gap no
matter what the infinite model predicts, so power-law decay only shows
up in a pre-asymptotic window.  The fitting routine searches for that
window instead of regressing over the whole ladder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, solve, svdvals

from .control import (
    ControlProfile,
    control_to_resolvent_prediction,
    resolvent_to_control_prediction,
)
from .damping import ObservationOperator
from .errors import CheckFailure, InvalidArgumentError, NumericError
from .linalg import fit_linear, fit_log_linear, operator_norm
from .resolvent import GeneratorAssembly, assemble_generator, generator_resolvent_norm
from .spectral import SpectralModel

__all__ = [
    "semigroup_matrix",
    "decomposition_check",
    "DecayCurve",
    "DecayFit",
    "decay_curve",
    "fit_decay_law",
    "EnergyTrajectory",
    "energy_trajectory",
    "random_state",
    "RateTranslation",
    "rate_translate",
    "WeakMonotonicityReport",
    "weak_monotonicity_experiment",
    "BackwardUniquenessProbe",
    "backward_uniqueness_probe",
    "spectral_abscissa",
]

_CONSISTENCY_TOL = 1e-9
_DECOMPOSITION_TOL = 1e-8
_MONOTONE_TOL = 1e-9
_MIN_FIT_POINTS = 10
_MIN_FIT_DECADES = 1.5


def _time_grid(times, positive: bool = False) -> np.ndarray:
    t = np.array(times, dtype=float)
    if t.ndim != 1 or t.size == 0 or not np.all(np.isfinite(t)):
        raise InvalidArgumentError("times must be a nonempty finite 1d vector")
    if np.any(np.diff(t) <= 0.0):
        raise InvalidArgumentError("times must be strictly ascending")
    if positive:
        if t[0] <= 0.0:
            raise InvalidArgumentError("times must be strictly positive")
    elif t[0] < 0.0:
        raise InvalidArgumentError("times must be nonnegative")
    t.setflags(write=False)
    return t


def _expm_checked(a: np.ndarray, t: float) -> np.ndarray:
    if t == 0.0:
        return np.eye(a.shape[0], dtype=complex)
    full = expm(a * t)
    half = expm(a * (0.5 * t))
    drift = operator_norm(full - half @ half)
    scale = operator_norm(full)
    if not np.isfinite(scale) or drift > _CONSISTENCY_TOL * max(scale, 1e-300):
        # diagnose before giving up: a wild eigenbasis is the usual culprit
        try:
            basis_cond = float(np.linalg.cond(np.linalg.eig(a)[1]))
        except np.linalg.LinAlgError:
            basis_cond = np.inf
        raise NumericError(
            "matrix exponential failed the halved-step consistency check",
            t=float(t),
            drift=float(drift),
            norm=float(scale),
            generator_norm=float(operator_norm(a)),
            eigenbasis_condition=basis_cond,
        )
    return full


def semigroup_matrix(assembly: GeneratorAssembly, t: float) -> np.ndarray:
    """e^{tA} in the assembly's coordinates, certified to 1e-9.

    Certification compares against the squared half-step exponential;
    disagreement raises with condition diagnostics instead of returning
    an uncertified matrix.  t = 0 short-circuits to the identity.
    """
    t = float(t)
    if not np.isfinite(t) or t < 0.0:
        raise InvalidArgumentError(f"t must be finite and nonnegative, got {t!r}")
    return _expm_checked(assembly.matrix, t)


def _nonkernel_rows(assembly: GeneratorAssembly) -> np.ndarray:
    # kernel position coordinates sit at the front of the position block
    freqs = assembly.model.frequencies[assembly.position_modes]
    drop = np.nonzero(freqs == 0.0)[0]
    return np.setdiff1d(np.arange(assembly.dim), drop)


def decomposition_check(assembly: GeneratorAssembly, projector: np.ndarray, t_list) -> float:
    """Max over t of ||e^{tA} - (e^{tA_dot} Pi_bullet + Pi)||.

    The quotient exponential acts on the kernel-free block (the full
    matrix with kernel position rows and columns removed) and is pushed
    back through Pi_bullet = Id - Pi.  Exceeding 1e-8 raises with the
    worst t; the value returned is the worst residual observed.
    """
    if assembly.quotiented:
        raise InvalidArgumentError("decomposition check needs the full-space assembly")
    pi = np.asarray(projector, dtype=complex)
    if pi.shape != (assembly.dim, assembly.dim):
        raise InvalidArgumentError(
            f"projector shape {pi.shape} does not match the assembly dimension {assembly.dim}"
        )
    if operator_norm(pi @ pi - pi) > _DECOMPOSITION_TOL:
        raise InvalidArgumentError("projector is not idempotent to 1e-8; pass riesz_projector output")
    t = _time_grid(t_list)
    keep = _nonkernel_rows(assembly)
    quotient_block = assembly.matrix[np.ix_(keep, keep)]
    bullet = np.eye(assembly.dim, dtype=complex) - pi
    worst = -np.inf
    worst_t = t[0]
    for tt in t:
        full = _expm_checked(assembly.matrix, tt)
        lifted = np.zeros_like(full)
        lifted[np.ix_(keep, keep)] = _expm_checked(quotient_block, tt)
        residual = operator_norm(full - (bullet @ lifted + pi))
        if residual > worst:
            worst, worst_t = residual, tt
    if worst > _DECOMPOSITION_TOL:
        raise CheckFailure(
            f"semigroup decomposition fails at t={worst_t:g}",
            residual=float(worst),
            tolerance=_DECOMPOSITION_TOL,
        )
    return float(worst)


@dataclass(frozen=True)
class DecayFit:
    """Model-selection record for a decay curve.

    kind is the winning family; candidates holds the records of all
    three (exponential, power, log-power) so a report can quote the
    losing fits as well.  window is the time interval the winning fit
    actually used: power fits may stop at the pre-asymptotic elbow.
    """

    kind: str
    parameters: dict
    r2: float
    window: tuple
    candidates: dict


@dataclass(frozen=True)
class DecayCurve:
    """N(t) = ||e^{tA_dot} A_dot^{-1}|| sampled on a time ladder.

    A contraction composed with a fixed operator cannot grow, so raw
    values rising beyond 1e-9 of N(0) indicate broken numerics and are
    rejected; sub-tolerance fluctuation is tolerated and the monotone
    upper envelope is available alongside the raw values.
    """

    times: np.ndarray
    values: np.ndarray
    fit: DecayFit | None = None

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size == 0:
            raise InvalidArgumentError("times and values must be matching 1d vectors")
        if np.any(t < 0.0) or np.any(np.diff(t) <= 0.0):
            raise InvalidArgumentError("times must be ascending and nonnegative")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise InvalidArgumentError("decay values must be positive and finite")
        rise = np.diff(v)
        if rise.size and float(np.max(rise)) > _MONOTONE_TOL * v[0]:
            raise NumericError(
                "decay proxy increased beyond the contraction tolerance",
                worst_rise=float(np.max(rise)),
                tolerance=_MONOTONE_TOL * v[0],
            )
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def envelope(self) -> np.ndarray:
        """Smallest nonincreasing majorant of the raw values."""
        return np.maximum.accumulate(self.values[::-1])[::-1]

    @property
    def fluctuated(self) -> bool:
        return bool(np.any(np.diff(self.values) > 0.0))

    def rows(self):
        """CSV rows (t, N)."""
        for tt, vv in zip(self.times, self.values):
            yield float(tt), float(vv)


def decay_curve(assembly: GeneratorAssembly, times) -> DecayCurve:
    """Sample the decay proxy N(t) on the quotient assembly.

    Unique continuation is pre-checked on the undamped frequency grid:
    a standing wave invisible to the damping, or a singular quotient
    generator, means N(t) cannot decay and the curve is refused.
    """
    if not assembly.quotiented:
        raise InvalidArgumentError(
            "decay_curve needs the quotient assembly; pass assemble_generator(..., quotient=True)"
        )
    t = _time_grid(times)
    model = assembly.model
    a = assembly.matrix
    npos = assembly.position_modes.size
    gram = -a[npos:, npos:]
    for lam in np.unique(model.frequencies[model.frequencies > 0.0]):
        pencil = (-1j * float(lam)) * gram
        np.fill_diagonal(pencil, pencil.diagonal() + model.eigenvalues - float(lam) ** 2)
        sig = svdvals(pencil)
        scale = float(np.max(np.abs(pencil)))
        if sig[-1] <= 1e-10 * scale:
            raise CheckFailure(
                f"unique continuation fails at lambda={float(lam):g}: a standing wave is "
                "invisible to the damping and N(t) stays constant instead of decaying",
                lam=float(lam),
                sigma_min=float(sig[-1]),
                scale=scale,
            )
    sv = svdvals(a)
    if sv[-1] <= 1e-12 * sv[0]:
        raise CheckFailure(
            "quotient generator is singular: an undamped kernel velocity blocks decay "
            "(unique continuation fails at frequency zero)",
            sigma_min=float(sv[-1]),
            sigma_max=float(sv[0]),
        )
    ainv = solve(a, np.eye(assembly.dim, dtype=complex))
    values = np.array([operator_norm(_expm_checked(a, tt) @ ainv) for tt in t])
    return DecayCurve(times=t, values=values)


def fit_decay_law(curve: DecayCurve) -> DecayFit:
    """Best of exponential, power and log-power decay by R^2.

    Exponential and log-power regress over the whole positive-time
    ladder.  The power candidate scans prefixes of at least 10 points
    and keeps the longest window whose log-log fit is best, which is
    where a curvature change from the truncation's spectral gap would
    otherwise poison the exponent.
    """
    mask = curve.times > 0.0
    t = curve.times[mask]
    v = curve.values[mask]
    if t.size < _MIN_FIT_POINTS or np.log10(t[-1] / t[0]) < _MIN_FIT_DECADES - 1e-12:
        raise InvalidArgumentError(
            f"decay-law fit needs at least {_MIN_FIT_POINTS} positive times spanning "
            f"{_MIN_FIT_DECADES} decades, got {t.size} over "
            f"{np.log10(t[-1] / t[0]) if t.size else 0.0:.2f}"
        )
    rate, lna, r2_exp = fit_log_linear(t, v)
    lt = np.log(t)
    lv = np.log(v)
    prefix_r2 = np.array(
        [fit_linear(lt[:j], lv[:j])[2] for j in range(_MIN_FIT_POINTS, t.size + 1)]
    )
    # last prefix within ties of the best keeps the longest usable window
    j_best = _MIN_FIT_POINTS + int(np.nonzero(prefix_r2 >= prefix_r2.max() - 1e-12)[0][-1])
    p_slope, p_lna, r2_pow = fit_linear(lt[:j_best], lv[:j_best])
    q_slope, q_lna, r2_log = fit_linear(np.log(np.log(2.0 + t)), lv)
    candidates = {
        "exponential": {"rate": -rate, "amplitude": float(np.exp(lna)), "r2": r2_exp},
        "power": {
            "exponent": p_slope,
            "amplitude": float(np.exp(p_lna)),
            "r2": r2_pow,
            "window": (float(t[0]), float(t[j_best - 1])),
        },
        "log-power": {"exponent": q_slope, "amplitude": float(np.exp(q_lna)), "r2": r2_log},
    }
    kind = max(candidates, key=lambda k: candidates[k]["r2"])
    chosen = candidates[kind]
    window = chosen.get("window", (float(t[0]), float(t[-1])))
    parameters = {k: v for k, v in chosen.items() if k not in ("r2", "window")}
    return DecayFit(kind=kind, parameters=parameters, r2=chosen["r2"], window=window, candidates=candidates)


@dataclass(frozen=True)
class EnergyTrajectory:
    """E(t) = ||e^{tA}(u0, v0)||^2 in the energy seminorm, with states.

    states holds the full coordinate vectors, one row per time, so the
    dissipation identity can be audited against any observation.
    """

    times: np.ndarray
    energies: np.ndarray
    states: np.ndarray
    assembly: GeneratorAssembly

    def __post_init__(self):
        for name in ("times", "energies", "states"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def velocities(self) -> np.ndarray:
        """Velocity mode coefficients, one row per time."""
        return self.states[:, self.assembly.position_modes.size :]

    def dissipation_residual(self, Q: ObservationOperator) -> float:
        """Max |dE/dt + 2||Q v||^2| over the peak dissipation.

        dE/dt by second-order central differences on the sampling grid;
        the denominator is the largest dissipation seen, so the result
        is the relative accuracy of the energy identity.
        """
        if self.times.size < 3:
            raise InvalidArgumentError("need at least three samples to differentiate")
        qv = (Q.matrix @ self.velocities.T).T
        dissipation = 2.0 * np.sum(np.abs(qv) ** 2, axis=1)
        de = np.gradient(self.energies, self.times, edge_order=2)
        scale = max(float(np.max(dissipation)), 1e-300)
        return float(np.max(np.abs(de + dissipation)) / scale)

    def rows(self):
        """CSV rows (t, E)."""
        for tt, ee in zip(self.times, self.energies):
            yield float(tt), float(ee)


def energy_trajectory(assembly: GeneratorAssembly, u0, v0, times) -> EnergyTrajectory:
    """Propagate (u0, v0) and record the energy along the way.

    u0 and v0 are mode coefficient vectors on the assembly's model; the
    kernel component of u0 carries no energy and only shears, so it
    never shows up in E(t).
    """
    model = assembly.model
    u0 = np.asarray(u0, dtype=complex)
    v0 = np.asarray(v0, dtype=complex)
    if u0.shape != (model.dim,) or v0.shape != (model.dim,):
        raise InvalidArgumentError(
            f"initial data must be mode vectors of length {model.dim}"
        )
    t = _time_grid(times)
    freqs = model.frequencies[assembly.position_modes]
    weights = np.where(freqs == 0.0, 1.0, freqs)
    x0 = np.concatenate([weights * u0[assembly.position_modes], v0])
    energy_mask = np.ones(assembly.dim, dtype=bool)
    energy_mask[np.nonzero(freqs == 0.0)[0]] = False
    states = np.array([_expm_checked(assembly.matrix, tt) @ x0 for tt in t])
    energies = np.sum(np.abs(states[:, energy_mask]) ** 2, axis=1)
    return EnergyTrajectory(times=t, energies=energies, states=states, assembly=assembly)


def random_state(model: SpectralModel, seed: int):
    """Unit-energy random initial data (u0, v0), kernel part removed."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(model.dim) + 1j * rng.standard_normal(model.dim)
    v = rng.standard_normal(model.dim) + 1j * rng.standard_normal(model.dim)
    u[model.frequencies == 0.0] = 0.0
    energy = float(np.sum(model.frequencies**2 * np.abs(u) ** 2) + np.sum(np.abs(v) ** 2))
    return u / np.sqrt(energy), v / np.sqrt(energy)


@dataclass(frozen=True)
class RateTranslation:
    """Decay forecast from a control-constant growth law."""

    kind: str
    value: float | None


def rate_translate(growth: dict, t: float) -> RateTranslation:
    """Translate K-growth into the decay value 1/K^{-1}(t).

    growth is {"kind": "power", "p": ...}, {"kind": "exp", "c": ...} or
    {"kind": "constant"}.  Power growth K = lambda^p decays like
    t^{-1/p}; exponential growth K = e^{c lambda} decays like c/log t
    and needs t > 1; constant K flags outright exponential decay with
    no finite value to report.
    """
    if not isinstance(growth, dict) or "kind" not in growth:
        raise InvalidArgumentError("growth law must be a dict with a 'kind' entry")
    kind = growth["kind"]
    t = float(t)
    if not np.isfinite(t):
        raise InvalidArgumentError("t must be finite")
    if kind == "power":
        p = float(growth.get("p", 0.0))
        if p <= 0.0:
            raise InvalidArgumentError("power growth needs p > 0")
        if t <= 0.0:
            raise InvalidArgumentError(f"t={t:g} is outside the range t > 0 of the power translation")
        return RateTranslation(kind="power", value=float(t ** (-1.0 / p)))
    if kind == "exp":
        c = float(growth.get("c", 0.0))
        if c <= 0.0:
            raise InvalidArgumentError("exponential growth needs c > 0")
        if t <= 1.0:
            raise InvalidArgumentError(f"t={t:g} is outside the range t > 1 of the log translation")
        return RateTranslation(kind="log", value=float(c / np.log(t)))
    if kind == "constant":
        return RateTranslation(kind="exponential", value=None)
    raise InvalidArgumentError(f"unknown growth kind {kind!r}")


@dataclass(frozen=True)
class WeakMonotonicityReport:
    """Outcome of the damping-domination pipeline Q1 -> Q2.

    predicted_q2 is the resolvent envelope produced by chaining the
    converse control estimate for Q1, the transfer through C0 and the
    forward resolvent bound, all with theorem constants kept at one;
    slack is predicted/measured - 1 pointwise.
    """

    c0: float
    max_ratio: float
    lambda_grid: np.ndarray
    measured_q1: np.ndarray
    transferred_K: np.ndarray
    predicted_q2: np.ndarray
    measured_q2: np.ndarray
    slack: np.ndarray
    dominated: bool
    curve_q1: DecayCurve
    curve_q2: DecayCurve

    def __post_init__(self):
        grid = np.asarray(self.lambda_grid, dtype=float)
        for name in ("lambda_grid", "measured_q1", "transferred_K", "predicted_q2", "measured_q2", "slack"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != grid.shape:
                raise InvalidArgumentError(f"{name} must match the lambda grid")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def rows(self):
        """CSV rows (lambda, measured_q1, transferred_K, predicted_q2, measured_q2, slack)."""
        for vals in zip(
            self.lambda_grid,
            self.measured_q1,
            self.transferred_K,
            self.predicted_q2,
            self.measured_q2,
            self.slack,
        ):
            yield tuple(float(x) for x in vals)


def weak_monotonicity_experiment(
    model: SpectralModel,
    q1: ObservationOperator,
    q2: ObservationOperator,
    lambda_grid,
    times,
    trials: int = 100,
    seed: int = 0,
) -> WeakMonotonicityReport:
    """Stronger damping cannot decay slower: run the proof numerically.

    Requires ||Q1 u|| <= C0 ||Q2 u|| away from ker P, with C0 measured
    as a generalized singular value and verified on `trials` random
    states.  The measured resolvent of the Q1 generator is converted to
    a control estimate (converse route, mu=0), transferred to Q2 via
    C0, and pushed back to a predicted resolvent envelope for the Q2
    generator, which is compared pointwise against measurement.  Decay
    curves for both dampings ride along.
    """
    for name, q in (("Q1", q1), ("Q2", q2)):
        if not isinstance(q, ObservationOperator):
            raise InvalidArgumentError(f"{name} must be an ObservationOperator")
        if q.matrix.shape[1] != model.dim:
            raise InvalidArgumentError(f"{name} does not act on the model's {model.dim} modes")
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0) or grid[0] <= 0:
        raise InvalidArgumentError("lambda grid must be ascending, positive, with >= 2 points")
    if grid[-1] > model.ceiling() * (1.0 + 1e-12):
        raise InvalidArgumentError(
            f"grid top {grid[-1]:.4g} exceeds the truncation ceiling {model.ceiling():.4g}"
        )
    oscillating = model.frequencies > 0.0
    a1 = q1.matrix[:, oscillating]
    a2 = q2.matrix[:, oscillating]
    _, s2, v2h = np.linalg.svd(a2, full_matrices=True)
    scale2 = float(s2[0]) if s2.size else 0.0
    rank = int(np.sum(s2 > 1e-12 * max(scale2, 1e-300)))
    norm1 = operator_norm(a1)
    if rank == 0 or norm1 == 0.0:
        raise InvalidArgumentError("domination is vacuous: an observation vanishes on the oscillating modes")
    if rank < v2h.shape[0]:
        null = v2h[rank:].conj().T
        leak = operator_norm(a1 @ null)
        if leak > 1e-3 * norm1:
            raise InvalidArgumentError(
                "domination fails: Q1 observes directions Q2 misses, no finite C0 exists"
            )
        if leak > 1e-10 * norm1:
            # both observations are exponentially small on the unresolved
            # directions; the ratio there is roundoff, not a constant
            raise NumericError(
                "domination constant is not certifiable: the dominating gram is "
                "numerically rank-deficient where Q1 keeps mass",
                leak=float(leak / norm1),
                rank=rank,
                dimension=int(v2h.shape[0]),
            )
    c0 = operator_norm(a1 @ (v2h[:rank].conj().T / s2[:rank][None, :]))
    rng = np.random.default_rng(seed)
    nosc = int(np.sum(oscillating))
    max_ratio = 0.0
    for _ in range(int(trials)):
        u = rng.standard_normal(nosc) + 1j * rng.standard_normal(nosc)
        max_ratio = max(max_ratio, float(np.linalg.norm(a1 @ u) / np.linalg.norm(a2 @ u)))
    if max_ratio > c0 * (1.0 + 1e-6):
        raise NumericError(
            "sampled domination ratio exceeds the generalized singular value",
            c0=c0,
            max_ratio=max_ratio,
        )
    r1 = np.array([generator_resolvent_norm(assemble_generator(model, q1), lam) for lam in grid])
    r2 = np.array([generator_resolvent_norm(assemble_generator(model, q2), lam) for lam in grid])
    if np.any(~np.isfinite(r1)) or np.any(~np.isfinite(r2)):
        raise NumericError("a generator resolvent diverges on the grid; spectrum touches the axis")
    gamma = q1.declared_gamma
    converse = resolvent_to_control_prediction(grid, r1, mu=0.0, gamma=gamma)
    transferred = ControlProfile(
        mu=0.0,
        gamma=gamma,
        lambda_grid=grid,
        K_values=converse.values,
        M_of_lambda=np.sqrt(2.0) * converse.values,
        m_of_lambda=np.sqrt(2.0) * converse.values * c0,
    )
    forward = control_to_resolvent_prediction(transferred)
    slack = forward.values / r2 - 1.0
    curve1 = decay_curve(assemble_generator(model, q1, quotient=True), times)
    curve2 = decay_curve(assemble_generator(model, q2, quotient=True), times)
    return WeakMonotonicityReport(
        c0=float(c0),
        max_ratio=float(max_ratio),
        lambda_grid=grid,
        measured_q1=r1,
        transferred_K=converse.values,
        predicted_q2=forward.values,
        measured_q2=r2,
        slack=slack,
        dominated=forward.dominates(r2),
        curve_q1=curve1,
        curve_q2=curve2,
    )


@dataclass(frozen=True)
class BackwardUniquenessProbe:
    """sigma_min(e^{tA}) along a time ladder.

    Finite truncations are always injective; what the probe certifies is
    that sigma_min stays above the relative floor 1e-12, and what is
    worth recording is how fast it collapses as the damping gets more
    unbounded or the cutoff grows.
    """

    times: np.ndarray
    sigma_min: np.ndarray
    sigma_max: np.ndarray
    certified: np.ndarray

    def __post_init__(self):
        for name in ("times", "sigma_min", "sigma_max", "certified"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def minimum(self) -> float:
        return float(np.min(self.sigma_min))

    def rows(self):
        """CSV rows (t, sigma_min, sigma_max)."""
        for tt, lo, hi in zip(self.times, self.sigma_min, self.sigma_max):
            yield float(tt), float(lo), float(hi)


def backward_uniqueness_probe(assembly: GeneratorAssembly, t_list) -> BackwardUniquenessProbe:
    """Smallest singular value of e^{tA} at strictly positive times."""
    t = _time_grid(t_list, positive=True)
    lows, highs = [], []
    for tt in t:
        sig = svdvals(_expm_checked(assembly.matrix, tt))
        lows.append(float(sig[-1]))
        highs.append(float(sig[0]))
    lows = np.array(lows)
    highs = np.array(highs)
    certified = lows >= 1e-12 * highs
    return BackwardUniquenessProbe(times=t, sigma_min=lows, sigma_max=highs, certified=certified)


def spectral_abscissa(assembly: GeneratorAssembly) -> float:
    """max Re of the generator's eigenvalues, by direct eigensolve."""
    return float(np.max(np.linalg.eigvals(assembly.matrix).real))
