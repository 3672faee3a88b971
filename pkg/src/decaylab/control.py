"""Best constants in stationary control estimates, and wavepacket localisation.

The central object is the quadratic form

    T(lam) = lam^{-2} B(lam)^H B(lam) + C^H C,
    B(lam) = (P - lam^2) Lambda^{mu - gamma},   C = Q Lambda^{mu},

whose smallest eigenvalue gives the best constant K(lam) in

    ||u||^2 <= K(lam)^2 (lam^{-2} ||B u||^2 + ||C u||^2).

The two-constant sum estimate follows with M = m = sqrt(2) K: the bracket
weight <lam>^{-1} and the plain power lam^{-1} differ by at most sqrt(2)
once lam >= 1, and (a^2+b^2)^{1/2} <= a+b absorbs the split.  Conversely
any symmetric sum constant is at least K/sqrt(2), so nothing is lost by
measuring through the eigenvalue problem.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, svd

from .damping import ObservationOperator
from .errors import InvalidArgumentError
from .linalg import fit_exponent
from .spectral import SpectralModel, lambda_power, spectral_projector

_SINGULAR_FLOOR = 1e-20


def _observation_matrix(model: SpectralModel, Q) -> np.ndarray | None:
    if Q is None:
        return None
    if isinstance(Q, ObservationOperator):
        if Q.dim_in != model.dim:
            raise InvalidArgumentError(
                f"observation acts on dimension {Q.dim_in}, model has {model.dim}"
            )
        return Q.matrix
    raise InvalidArgumentError(f"unsupported observation object {type(Q).__name__}")


def _best_constant(b_diag: np.ndarray, c_matrix) -> tuple[float, np.ndarray]:
    """Smallest-eigenpair route to the extremal constant.

    Returns (K, witness).  K = +inf exactly when B and C share kernel
    directions up to roundoff; the witness is then a unit vector they
    both annihilate.
    """
    n = b_diag.size
    t = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(t, np.abs(b_diag) ** 2)
    if c_matrix is not None:
        t += c_matrix.conj().T @ c_matrix
    scale = max(float(np.linalg.norm(t, 1)), 1.0)
    vals, vecs = eigh(t, subset_by_index=(0, 0))
    lam_min = float(vals[0])
    witness = vecs[:, 0]
    if lam_min <= _SINGULAR_FLOOR * scale:
        return np.inf, witness
    return float(lam_min ** -0.5), witness


def _check_lambda(model: SpectralModel, lam: float) -> float:
    lam = float(lam)
    if lam <= 0:
        raise InvalidArgumentError(f"lambda must be positive, got {lam}")
    if lam > model.ceiling():
        raise InvalidArgumentError(
            f"lambda {lam} exceeds the truncation ceiling {model.ceiling()}"
        )
    return lam


def control_constant(model, Q, lam, mu, gamma, return_witness=False):
    """Best constant K(lam) of the stationary control estimate.

    +inf signals a simultaneous kernel of (P - lam^2) Lambda^{mu-gamma}
    and Q Lambda^{mu}, i.e. a unique-continuation failure at this lam.
    """
    lam = _check_lambda(model, lam)
    if mu < 0:
        raise InvalidArgumentError(f"mu must be nonnegative, got {mu}")
    if not 0.0 <= gamma <= 0.5:
        raise InvalidArgumentError(f"gamma must lie in [0, 1/2], got {gamma}")
    c = _observation_matrix(model, Q)
    b = (model.eigenvalues - lam**2) * lambda_power(model, mu - gamma) / lam
    if c is not None:
        c = c * lambda_power(model, mu)[np.newaxis, :]
    value, witness = _best_constant(b, c)
    if return_witness:
        return value, witness
    return value


def schrodinger_observability_constant(model, Q, lam, return_witness=False):
    """Best C(lam) in ||u||^2 <= C^2 (||(P-lam^2)u||^2 + ||Qu||^2).

    No lam or Sobolev weights: this is the stationary Schrodinger
    observability constant at frequency lam^2.
    """
    lam = _check_lambda(model, lam)
    c = _observation_matrix(model, Q)
    b = model.eigenvalues - lam**2
    value, witness = _best_constant(b, c)
    if return_witness:
        return value, witness
    return value


@dataclass(frozen=True)
class ControlProfile:
    """A sweep of control constants with the derived sum-form pair (M, m)."""

    mu: float
    gamma: float
    lambda_grid: np.ndarray
    K_values: np.ndarray
    M_of_lambda: np.ndarray = field(default=None)
    m_of_lambda: np.ndarray = field(default=None)
    fit: tuple = None

    def __post_init__(self):
        grid = np.asarray(self.lambda_grid, dtype=float)
        ks = np.asarray(self.K_values, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or grid.shape != ks.shape:
            raise InvalidArgumentError("lambda_grid and K_values must be equal-length 1d")
        if np.any(np.diff(grid) <= 0) or grid[0] <= 0:
            raise InvalidArgumentError("lambda_grid must be positive and strictly ascending")
        if not np.all(np.isfinite(ks)) or np.any(ks <= 0):
            raise InvalidArgumentError(
                "K_values must be finite and positive; +inf marks a UCP failure "
                "and cannot enter a profile"
            )
        object.__setattr__(self, "lambda_grid", grid)
        object.__setattr__(self, "K_values", ks)
        for name, default in (("M_of_lambda", np.sqrt(2.0) * ks), ("m_of_lambda", np.sqrt(2.0) * ks)):
            given = getattr(self, name)
            arr = default if given is None else np.asarray(given, dtype=float)
            if arr.shape != grid.shape or np.any(arr <= 0):
                raise InvalidArgumentError(f"{name} must be positive and match the grid")
            object.__setattr__(self, name, arr)
        for arr in (self.lambda_grid, self.K_values, self.M_of_lambda, self.m_of_lambda):
            arr.setflags(write=False)

    def rows(self):
        """(lambda, K, M, m) tuples, the CSV schema of a profile."""
        for lam, k, mm, sm in zip(self.lambda_grid, self.K_values, self.M_of_lambda, self.m_of_lambda):
            yield float(lam), float(k), float(mm), float(sm)


def control_profile(model, Q, lambda_grid, mu, gamma, verify_trials=50, seed=0):
    """Sweep control_constant over a grid and package the result.

    With verify_trials > 0, each grid point is rechecked against the
    sum-form estimate

        ||u|| <= M <lam>^{-1} ||(P-lam^2) Lambda^{mu-gamma} u|| + m ||Q Lambda^{mu} u||

    on random u, with M = m = sqrt(2) K(lam); the quadratic route makes
    this an identity-level consequence, so a violation means a bug.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidArgumentError("lambda_grid must be a nonempty 1d array")
    if grid[0] < 1.0:
        raise InvalidArgumentError(
            "profile grids start at lambda >= 1 (bracket weight vs plain power)"
        )
    ks = np.array([control_constant(model, Q, lam, mu, gamma) for lam in grid])
    if np.any(~np.isfinite(ks)):
        bad = grid[~np.isfinite(ks)]
        raise InvalidArgumentError(f"control constant diverges at lambda = {bad[0]}")
    fit = fit_exponent(grid, ks) if grid.size >= 8 else None
    profile = ControlProfile(mu=mu, gamma=gamma, lambda_grid=grid, K_values=ks, fit=fit)
    if verify_trials:
        rng = np.random.default_rng(seed)
        c = _observation_matrix(model, Q)
        wb = lambda_power(model, mu - gamma)
        wc = lambda_power(model, mu)
        for lam, mval, sval in zip(grid, profile.M_of_lambda, profile.m_of_lambda):
            bracket = np.hypot(lam, 1.0)
            bdiag = (model.eigenvalues - lam**2) * wb
            for _ in range(verify_trials):
                u = rng.standard_normal(model.dim) + 1j * rng.standard_normal(model.dim)
                rhs = mval / bracket * np.linalg.norm(bdiag * u)
                if c is not None:
                    rhs += sval * np.linalg.norm(c @ (wc * u))
                if np.linalg.norm(u) > rhs * (1.0 + 1e-10):
                    raise InvalidArgumentError(
                        f"sum-form estimate failed at lambda={lam}: derived (M, m) inconsistent"
                    )
    return profile


@dataclass(frozen=True)
class PredictionRecord:
    """A calibrated envelope: values = constant * raw shape on the grid."""

    grid: np.ndarray
    values: np.ndarray
    constant: float
    supported_by_theorem: bool = True

    def dominates(self, measured, slack=1e-9) -> bool:
        measured = np.asarray(measured, dtype=float)
        return bool(np.all(measured <= self.values * (1.0 + slack)))


def _calibration_mask(grid: np.ndarray) -> np.ndarray:
    # lowest decade of the grid; a grid spanning less than a decade is
    # calibrated everywhere, and the envelope claim degenerates to ratio
    # boundedness (still meaningful: the constant is reported)
    lg = np.log10(grid)
    if lg.max() <= lg.min():
        raise InvalidArgumentError("calibration needs a grid spanning more than one point")
    return lg <= lg.min() + 1.0 + 1e-12


def _calibrate(grid, raw, measured) -> float:
    if measured is None:
        return 1.0
    measured = np.asarray(measured, dtype=float)
    if measured.shape != grid.shape:
        raise InvalidArgumentError("measured values must align with the profile grid")
    mask = _calibration_mask(grid)
    return float(np.max(measured[mask] / raw[mask]))


def control_to_resolvent_prediction(profile: ControlProfile, measured=None) -> PredictionRecord:
    """Predicted resolvent envelope C lam^{4 mu} (M^2 + m^2).

    C is calibrated on the first decade of the grid against `measured`
    (generator resolvent norms); with measured=None, C = 1.
    """
    grid = profile.lambda_grid
    raw = grid ** (4.0 * profile.mu) * (profile.M_of_lambda**2 + profile.m_of_lambda**2)
    c = _calibrate(grid, raw, measured)
    return PredictionRecord(grid=grid, values=c * raw, constant=c)


def resolvent_to_control_prediction(sweep_grid, resolvent_norms, mu, gamma, measured=None) -> PredictionRecord:
    """Predicted control envelope C lam^{2(gamma-mu)} K_res(lam).

    The converse direction only covers mu in [0, 1/2 + gamma]; outside
    that range the record is returned flagged unsupported.
    """
    grid = np.asarray(sweep_grid, dtype=float)
    kres = np.asarray(resolvent_norms, dtype=float)
    if grid.shape != kres.shape or grid.ndim != 1:
        raise InvalidArgumentError("grid and resolvent norms must be equal-length 1d")
    supported = 0.0 <= mu <= 0.5 + gamma
    raw = grid ** (2.0 * (gamma - mu)) * kres
    c = _calibrate(grid, raw, measured)
    return PredictionRecord(grid=grid, values=c * raw, constant=c, supported_by_theorem=supported)


def hautus_generator_prediction(profile: ControlProfile, gamma=None, measured=None) -> PredictionRecord:
    """Alternative resolvent envelope C lam^{8 gamma} M^2 m^2.

    Meant for profiles measured without Sobolev weights (mu = gamma = 0);
    gamma here is the observation's degree of unboundedness, defaulting
    to the profile's.  Kept alongside the lam^{4 mu}(M^2+m^2) route so
    the two losses can be compared on equal data.
    """
    g = profile.gamma if gamma is None else float(gamma)
    grid = profile.lambda_grid
    raw = grid ** (8.0 * g) * profile.M_of_lambda**2 * profile.m_of_lambda**2
    c = _calibrate(grid, raw, measured)
    return PredictionRecord(grid=grid, values=c * raw, constant=c)


@dataclass(frozen=True)
class WavepacketProjector:
    """Spectral window [1/h - eps/M, 1/h + eps/M] as a 0/1 diagonal."""

    h: float
    m_scale: float
    epsilon: float
    interval: tuple
    diagonal: np.ndarray
    count: int

    @property
    def empty(self) -> bool:
        return self.count == 0

    def apply(self, u):
        return self.diagonal * np.asarray(u)


def wavepacket_projector(model: SpectralModel, h, m_scale, epsilon) -> WavepacketProjector:
    h = float(h)
    if h <= 0:
        raise InvalidArgumentError(f"h must be positive, got {h}")
    if m_scale <= 0 or epsilon <= 0:
        raise InvalidArgumentError("window parameters M and epsilon must be positive")
    half = epsilon / m_scale
    lo, hi = 1.0 / h - half, 1.0 / h + half
    if lo < 0 or hi > model.rho_max:
        raise InvalidArgumentError(
            f"window [{lo}, {hi}] leaves the resolved band [0, {model.rho_max}]"
        )
    diag = spectral_projector(model, (lo, hi))
    return WavepacketProjector(
        h=h,
        m_scale=float(m_scale),
        epsilon=float(epsilon),
        interval=(lo, hi),
        diagonal=diag,
        count=int(np.count_nonzero(diag)),
    )


def quasimode_inequalities_check(model, h, m_scale, epsilon, trials=100, seed=0) -> dict:
    """Verbatim check of the two-sided quasimode bounds on random vectors.

    Window part:      ||(h^2 P - 1) Pi_h u||      <= 3 eps h / M ||Pi_h u||
    Complement part:  ||(h^2 P - 1) Pi_h^perp u|| >=   eps h / M ||Pi_h^perp u||

    Both are elementwise facts about the symbol h^2 rho^2 - 1, so the
    slacks reported here should never be negative beyond roundoff.
    """
    proj = wavepacket_projector(model, h, m_scale, epsilon)
    symbol = h**2 * model.eigenvalues - 1.0
    rate = epsilon * h / m_scale
    rng = np.random.default_rng(seed)
    worst_upper = np.inf
    worst_lower = np.inf
    for _ in range(trials):
        u = rng.standard_normal(model.dim) + 1j * rng.standard_normal(model.dim)
        w = proj.diagonal * u
        wp = u - w
        nw, nwp = np.linalg.norm(w), np.linalg.norm(wp)
        if nw > 0:
            worst_upper = min(worst_upper, 3.0 * rate - np.linalg.norm(symbol * w) / nw)
        if nwp > 0:
            worst_lower = min(worst_lower, np.linalg.norm(symbol * wp) / nwp - rate)
    passed = worst_upper >= -1e-12 and worst_lower >= -1e-12
    return {
        "trials": trials,
        "window_count": proj.count,
        "worst_upper_slack": float(worst_upper),
        "worst_lower_slack": float(worst_lower),
        "passed": passed,
    }


@dataclass(frozen=True)
class WavepacketControlReport:
    """Per-h restricted observability of wavepackets against m(1/h)."""

    epsilon: float
    h_values: np.ndarray
    window_counts: np.ndarray
    best_constants: np.ndarray
    m_values: np.ndarray
    ratios: np.ndarray
    admissible_epsilon: float
    witness: np.ndarray = None

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.best_constants)))


_EPSILON_LADDER = (0.5, 0.4, 1.0 / 3.0, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05)


def _window_constant(model, c_matrix, h, m_scale, epsilon):
    """1 / sigma_min of Q restricted to the window modes; (inf, witness) if blind."""
    proj = wavepacket_projector(model, h, m_scale, epsilon)
    if proj.empty:
        return 0.0, proj.count, None
    mask = proj.diagonal > 0
    sub = c_matrix[:, mask]
    _, s, vh = svd(sub, full_matrices=True)
    # rows(vh) span all window directions; s covers only min(rows, cols)
    sigma = s[-1] if s.size == sub.shape[1] else 0.0
    if sigma <= 1e-14 * max(s[0] if s.size else 0.0, 1.0):
        witness = np.zeros(model.dim, dtype=complex)
        witness[mask] = vh[-1].conj()
        return np.inf, proj.count, witness
    return float(1.0 / sigma), proj.count, None


def wavepacket_control_check(model, Q, h_grid, mu, gamma, epsilon=0.25) -> WavepacketControlReport:
    """Observability of single windows, compared to the control profile.

    For each h the best constant in ||w|| <= c ||Q w|| over the window
    range is measured by restricted SVD and compared against
    m(1/h) = sqrt(2) K(1/h).  The report also carries the largest ladder
    epsilon for which every window satisfies best <= 4 m, the explicit
    threshold the (1 - 3 eps)^{-1} loss allows at eps = 1/4.
    """
    hs = np.asarray(h_grid, dtype=float)
    if hs.ndim != 1 or hs.size == 0 or np.any(hs <= 0):
        raise InvalidArgumentError("h_grid must be a 1d array of positive steps")
    c_matrix = _observation_matrix(model, Q)
    if c_matrix is None:
        raise InvalidArgumentError("wavepacket control needs a nonzero observation")
    ks = np.array([control_constant(model, Q, 1.0 / h, mu, gamma) for h in hs])
    if np.any(~np.isfinite(ks)):
        raise InvalidArgumentError("control profile diverges on the h grid")
    ms = np.sqrt(2.0) * ks
    # scale of the window: M(1/h) from the same profile
    raw = [_window_constant(model, c_matrix, h, mval, epsilon) for h, mval in zip(hs, ms)]
    best = np.array([r[0] for r in raw])
    counts = np.array([r[1] for r in raw])
    witness = next((r[2] for r in raw if r[2] is not None), None)
    admissible = float("nan")
    for eps in _EPSILON_LADDER:
        vals = [
            _window_constant(model, c_matrix, h, mval, eps)[0] for h, mval in zip(hs, ms)
        ]
        if np.all(np.asarray(vals) <= 4.0 * ms):
            admissible = eps
            break
    with np.errstate(invalid="ignore"):
        ratios = best / ms
    return WavepacketControlReport(
        epsilon=float(epsilon),
        h_values=hs,
        window_counts=counts,
        best_constants=best,
        m_values=ms,
        ratios=ratios,
        admissible_epsilon=admissible,
        witness=witness,
    )
