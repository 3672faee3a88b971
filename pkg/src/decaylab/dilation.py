"""Transfer of control estimates from a propagator to its powers.

A control profile measured for the base quadratic form can be pushed to
the fractional form with symbol rho^(2*alpha), or to a general monotone
function of the symbol, by reading the profile at the pulled-back
frequency lambda^(1/alpha) and paying explicit powers of lambda in the
pencil term.  The predicted pair lives in the same currency as the
source profile: predicted_M multiplies the bracket-normalized pencil
term and predicted_m the observation term.

The transfer hypothesis is alpha >= 2*gamma.  On the half-order scale
the observation degree divides by alpha, so exactly this inequality
keeps the dilated degree admissible (at most 1/2).

Frequencies split into four zones around the pulled-back frequency:
below rho0, elliptic below the band, the resonant band itself (within a
factor 3/2 of the pulled-back frequency on both sides), and elliptic
above.  The source estimate is consumed only on the band; the elliptic
zones are handled by the symbol alone, which is where the lambda powers
in the predicted pair come from.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import svdvals

from .control import ControlProfile, _best_constant, _check_lambda, control_constant, control_profile
from .damping import DampingFunctionSpec, ObservationOperator, _coefficients, indicator_observation
from .errors import InvalidArgumentError, NumericError
from .linalg import fit_exponent, fit_linear, fit_log_linear
from .spectral import SpectralModel, power_model

_SLACK_TOL = 1e-12
_CONE_FLOOR = 1e-13


def _ascending_positive(grid, name: str) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidArgumentError(f"{name} must be a nonempty 1d array")
    if grid[0] <= 0 or np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError(f"{name} must be positive and strictly ascending")
    return grid


def _check_hypothesis(alpha: float, gamma: float) -> float:
    alpha = float(alpha)
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    if alpha < 2.0 * gamma - 1e-12:
        raise InvalidArgumentError(
            f"transfer hypothesis alpha >= 2*gamma fails: alpha={alpha}, gamma={gamma}; "
            "the dilated observation degree gamma/alpha would exceed 1/2"
        )
    return alpha


def _read_profile(profile: ControlProfile, tilde: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Log-log piecewise-linear read of (M, m) at the pulled-back frequencies."""
    grid = profile.lambda_grid
    lo, hi = grid[0], grid[-1]
    if np.any(tilde < lo * (1.0 - 1e-9)) or np.any(tilde > hi * (1.0 + 1e-9)):
        raise InvalidArgumentError(
            f"pulled-back frequencies [{tilde.min():.6g}, {tilde.max():.6g}] leave the "
            f"source profile range [{lo:.6g}, {hi:.6g}]"
        )
    t = np.log(np.clip(tilde, lo, hi))
    lg = np.log(grid)
    m_big = np.exp(np.interp(t, lg, np.log(profile.M_of_lambda)))
    m_small = np.exp(np.interp(t, lg, np.log(profile.m_of_lambda)))
    return m_big, m_small


def _excess(alpha: float, gamma: float) -> float:
    # the observation degree 2*gamma survives dilation only above order alpha-1
    return max(2.0 * gamma + 1.0 - alpha, 0.0)


@dataclass(frozen=True)
class DilationPrediction:
    """Predicted sum-form pair for the dilated propagator on a target grid."""

    alpha: float
    source_profile: ControlProfile
    target_grid: np.ndarray
    tilde_lambda: np.ndarray
    predicted_M: np.ndarray
    predicted_m: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.target_grid, dtype=float)
        for name in ("target_grid", "tilde_lambda", "predicted_M", "predicted_m"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != grid.shape:
                raise InvalidArgumentError(f"{name} must match the target grid shape")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def dilate_profile(profile: ControlProfile, alpha: float, target_grid) -> DilationPrediction:
    """Push a control profile to the propagator with symbol rho^(2*alpha).

    The source pair is read at tilde = lambda^(1/alpha).  The pencil
    coefficient picks up lambda^(1/alpha - 1) on the M part and
    lambda^(1 + (2*excess - 2)/alpha) on the m part, where excess =
    (2*gamma + 1 - alpha)_+; the observation coefficient is unchanged.
    """
    alpha = _check_hypothesis(alpha, profile.gamma)
    target = _ascending_positive(target_grid, "target_grid")
    tilde = target ** (1.0 / alpha)
    m_big, m_small = _read_profile(profile, tilde)
    m_exp = 1.0 + (2.0 * _excess(alpha, profile.gamma) - 2.0) / alpha
    predicted_m_big = m_big * target ** (1.0 / alpha - 1.0) + m_small * target**m_exp
    return DilationPrediction(
        alpha=alpha,
        source_profile=profile,
        target_grid=target,
        tilde_lambda=tilde,
        predicted_M=predicted_m_big,
        predicted_m=m_small.copy(),
    )


@dataclass(frozen=True)
class SpectralTransform:
    """A monotone reshaping f of the symbol, with its growth certificate.

    forward and inverse act on symbol values (arrays accepted) and must
    invert each other on [0, inf).  The certificate states
    f'(s) >= s^(alpha-1) / lower_constant for s >= rho0^2, which is what
    the transfer argument consumes; it is spot-checked numerically.
    """

    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    alpha: float
    lower_constant: float = 1.0
    rho0: float = 2.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha}")
        if self.lower_constant <= 0 or self.rho0 <= 0:
            raise InvalidArgumentError("lower_constant and rho0 must be positive")


def _check_transform(transform: SpectralTransform, s_max: float) -> None:
    """Spot-check the inverse and the derivative certificate on [rho0^2, s_max]."""
    lo = transform.rho0**2
    if s_max <= lo:
        s_max = 2.0 * lo
    s = np.geomspace(lo, s_max, 64)
    fs = np.asarray(transform.forward(s), dtype=float)
    back = np.asarray(transform.inverse(fs), dtype=float)
    gap = np.max(np.abs(back - s) / np.maximum(s, 1.0))
    if gap > 1e-8:
        raise InvalidArgumentError(
            f"inverse fails the round trip on [{lo:.3g}, {s_max:.3g}] (relative gap {gap:.2e})"
        )
    h = 1e-5
    fd = (np.asarray(transform.forward(s * (1.0 + h))) - np.asarray(transform.forward(s * (1.0 - h)))) / (
        2.0 * h * s
    )
    bound = s ** (transform.alpha - 1.0) / transform.lower_constant
    bad = fd < bound * (1.0 - 1e-6)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise InvalidArgumentError(
            f"growth certificate fails at s = {s[i]:.6g}: derivative {fd[i]:.6g} "
            f"below the declared floor {bound[i]:.6g}"
        )


def dilate_general(profile: ControlProfile, transform: SpectralTransform, target_grid) -> DilationPrediction:
    """Push a control profile through a general monotone symbol reshaping.

    tilde = sqrt(f^{-1}(lambda^2)) replaces lambda^(1/alpha), and the
    lambda powers of dilate_profile are paid in tilde directly:
    the M part carries tilde^(1 - 2*alpha) * lambda and the m part
    tilde^(2*excess - 2) * lambda.  For f(s) = s^alpha this reproduces
    dilate_profile identically.
    """
    alpha = _check_hypothesis(transform.alpha, profile.gamma)
    target = _ascending_positive(target_grid, "target_grid")
    tilde_sq = np.asarray(transform.inverse(target**2), dtype=float)
    if np.any(~np.isfinite(tilde_sq)) or np.any(tilde_sq <= 0):
        raise InvalidArgumentError("inverse produced nonpositive or nonfinite symbol values")
    _check_transform(transform, float(tilde_sq.max()))
    tilde = np.sqrt(tilde_sq)
    m_big, m_small = _read_profile(profile, tilde)
    excess = _excess(alpha, profile.gamma)
    predicted_m_big = (m_big * tilde ** (1.0 - 2.0 * alpha) + m_small * tilde ** (2.0 * excess - 2.0)) * target
    return DilationPrediction(
        alpha=alpha,
        source_profile=profile,
        target_grid=target,
        tilde_lambda=tilde,
        predicted_M=predicted_m_big,
        predicted_m=m_small.copy(),
    )


@dataclass(frozen=True)
class RegimeDecomposition:
    """Partition of the resolved frequencies around a pulled-back frequency."""

    rho0: float
    tilde_lambda: float
    core: np.ndarray
    below: np.ndarray
    band: np.ndarray
    above: np.ndarray

    def __post_init__(self):
        total = (
            self.core.astype(int) + self.below.astype(int) + self.band.astype(int) + self.above.astype(int)
        )
        if np.any(total != 1):
            raise NumericError("regime masks do not partition the frequency set")
        for name in ("core", "below", "band", "above"):
            getattr(self, name).setflags(write=False)

    @property
    def counts(self) -> tuple[int, int, int, int]:
        return (
            int(self.core.sum()),
            int(self.below.sum()),
            int(self.band.sum()),
            int(self.above.sum()),
        )


def regime_masks(model: SpectralModel, lam: float, alpha: float, rho0: float = 2.0) -> RegimeDecomposition:
    """Split model frequencies into the four transfer zones at lambda.

    The band is [tilde/2, 3*tilde/2] with tilde = lambda^(1/alpha); the
    source estimate is consumed there and nowhere else.  Requires
    rho0 < tilde/2 so the core and the band cannot touch.
    """
    lam = float(lam)
    if lam <= 0 or alpha <= 0 or rho0 <= 0:
        raise InvalidArgumentError("lam, alpha and rho0 must all be positive")
    tilde = lam ** (1.0 / alpha)
    if not rho0 < tilde / 2.0:
        raise InvalidArgumentError(
            f"rho0 = {rho0} must sit strictly below half the pulled-back frequency {tilde / 2.0:.6g}"
        )
    rho = model.frequencies
    core = rho < rho0
    below = (rho >= rho0) & (rho < tilde / 2.0)
    band = (rho >= tilde / 2.0) & (rho <= 1.5 * tilde)
    above = rho > 1.5 * tilde
    return RegimeDecomposition(rho0=rho0, tilde_lambda=tilde, core=core, below=below, band=band, above=above)


@dataclass(frozen=True)
class DilationComparison:
    """Calibrated predicted pair against the measured dilated constant."""

    alpha: float
    mu: float
    gamma: float
    target_grid: np.ndarray
    predicted_M: np.ndarray
    predicted_m: np.ndarray
    measured_K: np.ndarray
    slack: np.ndarray
    constant: float
    prediction: DilationPrediction
    passed: bool

    def rows(self):
        """(lambda, predicted_M, predicted_m, measured_K, slack) tuples."""
        for row in zip(self.target_grid, self.predicted_M, self.predicted_m, self.measured_K, self.slack):
            yield tuple(float(v) for v in row)


def verify_dilation(model, Q, alpha, mu, gamma, target_grid, source_grid=None, verify_trials=0):
    """Measure the dilated control constant and check the transferred bound.

    The source profile is swept at the pulled-back frequencies (or on
    source_grid when given), pushed with dilate_profile, and compared
    against control_constant on the power model at weights (mu/alpha,
    gamma/alpha).  The combined predicted constant is calibrated once,
    at the lowest target point, and must dominate pointwise after that;
    slack is the relative margin, zero at the calibration point.
    """
    target = _ascending_positive(target_grid, "target_grid")
    alpha = _check_hypothesis(alpha, gamma)
    tilde = target ** (1.0 / alpha)
    source = tilde if source_grid is None else _ascending_positive(source_grid, "source_grid")
    profile = control_profile(model, Q, source, mu, gamma, verify_trials=verify_trials)
    prediction = dilate_profile(profile, alpha, target)
    dilated = power_model(model, alpha)
    measured = np.array(
        [control_constant(dilated, Q, lam, mu / alpha, gamma / alpha) for lam in target]
    )
    if np.any(~np.isfinite(measured)):
        bad = target[~np.isfinite(measured)]
        raise InvalidArgumentError(f"dilated control constant diverges at lambda = {bad[0]}")
    combined = np.hypot(prediction.predicted_M, prediction.predicted_m)
    constant = float(measured[0] / combined[0])
    slack = constant * combined / measured - 1.0
    return DilationComparison(
        alpha=alpha,
        mu=mu,
        gamma=gamma,
        target_grid=target,
        predicted_M=constant * prediction.predicted_M,
        predicted_m=constant * prediction.predicted_m,
        measured_K=measured,
        slack=slack,
        constant=constant,
        prediction=prediction,
        passed=bool(np.all(slack >= -_SLACK_TOL)),
    )


@dataclass(frozen=True)
class CommutingCheck:
    """Source and dilated constants at resonant frequencies, diagonal damping."""

    alpha: float
    tilde_grid: np.ndarray
    source_K: np.ndarray
    dilated_K: np.ndarray

    @property
    def max_relative_gap(self) -> float:
        return float(np.max(np.abs(self.dilated_K - self.source_K) / self.source_K))


def commuting_losslessness_check(model, alpha, tilde_grid, scale=0.1, gamma=0.0) -> CommutingCheck:
    """Check that dilation loses nothing when the damping is a symbol function.

    With Q = scale * identity the constant is pinned by the resonant mode
    whenever tilde is an exact model frequency and scale stays below the
    first pencil gap, on the source and dilated sides alike, so both
    constants equal 1/scale and their gap is pure roundoff.  mu = 0
    keeps the observation column weightless in both currencies.
    """
    tilde_grid = _ascending_positive(tilde_grid, "tilde_grid")
    alpha = _check_hypothesis(alpha, gamma)
    if not (0.0 < scale):
        raise InvalidArgumentError("scale must be positive")
    freq = model.frequencies
    for t in tilde_grid:
        if np.min(np.abs(freq - t)) > 1e-9 * max(1.0, t):
            raise InvalidArgumentError(
                f"tilde = {t} is not a model frequency; the resonant pinning argument needs one"
            )
    q = ObservationOperator(
        matrix=scale * np.eye(model.dim, dtype=complex),
        declared_gamma=0.0,
        description=f"uniform {scale} multiplier",
    )
    dilated = power_model(model, alpha)
    src = np.array([control_constant(model, q, t, 0.0, gamma) for t in tilde_grid])
    dil = np.array([control_constant(dilated, q, t**alpha, 0.0, gamma / alpha) for t in tilde_grid])
    return CommutingCheck(alpha=alpha, tilde_grid=tilde_grid, source_K=src, dilated_K=dil)


@dataclass(frozen=True)
class FractionalPropagationReport:
    """Best constants of the weighted propagation estimate over a grid.

    The pencil column carries lambda^(1/alpha - 2), the weight under
    which the geometric propagation estimate is scale free; constants
    is flat in lambda exactly when that estimate holds uniformly.
    """

    alpha: float
    omega: tuple[float, float]
    lambda_grid: np.ndarray
    constants: np.ndarray
    spread: float
    fit: tuple | None

    def is_flat(self, slope_tol: float = 0.1) -> bool:
        return self.fit is not None and abs(self.fit[0]) <= slope_tol


def fractional_propagation_check(model, omega, alpha, lambda_grid) -> FractionalPropagationReport:
    grid = _ascending_positive(lambda_grid, "lambda_grid")
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    q = indicator_observation(model, omega)
    dilated = power_model(model, alpha)
    constants = np.empty(grid.size)
    for i, lam in enumerate(grid):
        lam = _check_lambda(dilated, lam)
        b = (dilated.eigenvalues - lam**2) * lam ** (1.0 / alpha - 2.0)
        value, _ = _best_constant(b, q.matrix)
        if not np.isfinite(value):
            raise NumericError("propagation constant diverged", lam=float(lam))
        constants[i] = value
    fit = fit_exponent(grid, constants, window=np.inf) if grid.size >= 8 else None
    spread = float(constants.max() / constants.min())
    return FractionalPropagationReport(
        alpha=float(alpha), omega=tuple(omega), lambda_grid=grid, constants=constants, spread=spread, fit=fit
    )


@dataclass(frozen=True)
class OptimalityWitness:
    """Pencil-to-norm ratios of cut planar waves, with their growth fit."""

    alpha: float
    omega: tuple[float, float]
    lambda_values: np.ndarray
    mode_numbers: np.ndarray
    ratios: np.ndarray
    support_length: float
    fit: tuple | None

    @property
    def slope(self) -> float | None:
        return None if self.fit is None else self.fit[0]


def optimality_witness(model: SpectralModel, omega, alpha, lam_values) -> OptimalityWitness:
    """Ratio ||(symbol - lambda^2) chi e|| / ||chi e|| for cut planar waves.

    e is the pure mode at n = lambda^(1/alpha), which must be an integer
    label inside the band, and chi is the standard bump scaled to the
    arc complementary to omega, shrunk by a 10 percent margin on each
    side so chi vanishes on omega with room to spare.  Only the length
    of the support arc enters the ratio: rotation acts on coefficients
    by unimodular phases, so the computation canonicalizes the arc to
    start at angle zero and invariance holds by construction.

    The ratios grow like lambda^(2 - 1/alpha); the fit reports the
    measured exponent when three or more ladder points are given.
    """
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    lam_values = np.atleast_1d(np.asarray(lam_values, dtype=float))
    if np.any(lam_values <= 0):
        raise InvalidArgumentError("lambda values must be positive")
    n_float = lam_values ** (1.0 / alpha)
    n = np.rint(n_float).astype(int)
    off = np.max(np.abs(n_float - n) / np.maximum(1.0, n_float))
    if off > 1e-9:
        raise InvalidArgumentError(
            f"lambda^(1/alpha) must be integer mode numbers (worst offset {off:.2e})"
        )
    if np.any(n < 1) or np.any(n > model.cutoff):
        raise InvalidArgumentError(
            f"mode numbers {n.min()}..{n.max()} must lie in [1, {model.cutoff}]"
        )
    a, b = float(omega[0]), float(omega[1])
    free = 2.0 * np.pi - (b - a)
    if free <= 0:
        raise InvalidArgumentError("omega covers the circle; no disjoint support remains")
    support = 0.8 * free
    chi_spec = DampingFunctionSpec(kind="smooth-bump", interval=(0.0, support))
    nmax = int(model.cutoff + n.max())
    chi = _coefficients(chi_spec, nmax, root=False)
    dilated = power_model(model, alpha)
    ratios = np.empty(lam_values.size)
    for i, (lam, mode) in enumerate(zip(lam_values, n)):
        u = chi[model.labels - mode + nmax]
        resid = (dilated.eigenvalues - lam**2) * u
        ratios[i] = np.linalg.norm(resid) / np.linalg.norm(u)
    if lam_values.size >= 3:
        fit = fit_linear(np.log10(lam_values), np.log10(ratios))
    else:
        fit = None
    return OptimalityWitness(
        alpha=float(alpha),
        omega=(a, b),
        lambda_values=lam_values,
        mode_numbers=n,
        ratios=ratios,
        support_length=support,
        fit=fit,
    )


@dataclass(frozen=True)
class CarlemanGrowth:
    """Low-cone continuation constants and their exponential growth fit.

    The constant at lambda is 1/sigma_min of the observation restricted
    to modes with frequency at most lambda^(1/alpha).  Against a proper
    arc it grows exponentially in the cone radius; fit is the rate in
    exp(rate * tilde), alt_fit the same regression against sqrt(tilde)
    for model comparison.
    """

    alpha: float
    omega: tuple[float, float]
    lambda_grid: np.ndarray
    tilde_lambda: np.ndarray
    constants: np.ndarray
    fit: tuple
    alt_fit: tuple

    @property
    def prefers_cone_radius(self) -> bool:
        """True when the exponential-in-tilde model explains more variance."""
        return self.fit[2] >= self.alt_fit[2]


def carleman_growth_check(model, omega, alpha, lambda_grid) -> CarlemanGrowth:
    grid = _ascending_positive(lambda_grid, "lambda_grid")
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    tilde = grid ** (1.0 / alpha)
    if tilde[-1] > model.rho_max:
        raise InvalidArgumentError(
            f"cone radius {tilde[-1]:.6g} exceeds the resolved band {model.rho_max:.6g}"
        )
    q = indicator_observation(model, omega)
    constants = np.empty(grid.size)
    for i, t in enumerate(tilde):
        cols = model.frequencies <= t + 1e-12
        s = svdvals(q.matrix[:, cols])
        if s[-1] <= _CONE_FLOOR * s[0]:
            raise NumericError(
                "continuation constant left the certifiable range; shrink the ladder "
                "or enlarge the arc",
                lam=float(grid[i]),
                sigma_min=float(s[-1]),
                floor=float(_CONE_FLOOR * s[0]),
            )
        constants[i] = 1.0 / s[-1]
    fit = fit_log_linear(tilde, constants)
    alt_fit = fit_log_linear(np.sqrt(tilde), constants)
    return CarlemanGrowth(
        alpha=float(alpha),
        omega=tuple(omega),
        lambda_grid=grid,
        tilde_lambda=tilde,
        constants=constants,
        fit=fit,
        alt_fit=alt_fit,
    )
