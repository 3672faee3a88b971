"""Observation operators in the spectral basis.

An observation operator Q sends a coefficient vector to coordinates of an
auxiliary space Y.  For a multiplier damping, Q is projection back to the
truncated Fourier space composed with multiplication by sqrt(W), which in
coefficients is the Toeplitz matrix of the Fourier coefficients of sqrt(W).
Coefficients come from closed forms where they exist (constants,
indicators) and from doubling-checked quadrature otherwise; integrable
power singularities get the graded substitution x = a + t^2 so the plain
trapezoid rule keeps its order.

The exact quadratic form of W itself (the Toeplitz matrix of W rather
than sqrt(W)) is exposed separately: for trigonometric polynomials it
evaluates integrals like int W |u|^2 without truncation error, which gives
an independent route for inequalities that the projected Gram only
satisfies up to tail terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh, svdvals

from .errors import InvalidArgumentError, NumericError
from .spectral import SpectralModel, lambda_power

__all__ = [
    "DampingFunctionSpec",
    "ObservationOperator",
    "GammaEstimate",
    "evaluate_weight",
    "sqrt_weight_coefficients",
    "multiplier_observation",
    "indicator_observation",
    "compose_fractional",
    "structural_observation",
    "weight_form",
    "measure_gamma",
]

TWO_PI = 2.0 * np.pi

# quadrature acceptance: two resolutions must agree to this before a
# coefficient table is trusted
_QUAD_TOL = 1e-8
_MAX_DOUBLINGS = 10


@dataclass(frozen=True)
class DampingFunctionSpec:
    """Description of a nonnegative damping weight W on the circle.

    kind is one of 'constant', 'indicator', 'smooth-bump', 'power-singular',
    'custom-samples'.  interval = (a, b) in radians with 0 < b - a <= 2*pi.
    For power-singular, W(x) = amplitude * (x-a)^(-beta) on (a, b); the
    weight is L^p exactly for p < 1/beta.
    """

    kind: str
    interval: tuple[float, float] = (0.0, TWO_PI)
    beta: float = 0.0
    amplitude: float = 1.0
    samples: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        kinds = {"constant", "indicator", "smooth-bump", "power-singular", "custom-samples"}
        if self.kind not in kinds:
            raise InvalidArgumentError(f"unknown damping kind {self.kind!r}")
        a, b = self.interval
        if not (0.0 < b - a <= TWO_PI + 1e-12):
            raise InvalidArgumentError(f"interval must satisfy 0 < b - a <= 2*pi, got {self.interval}")
        if self.amplitude < 0:
            raise InvalidArgumentError("amplitude must be nonnegative")
        if self.kind == "power-singular":
            if not (0.0 <= self.beta < 1.0):
                raise InvalidArgumentError(
                    f"power-singular needs 0 <= beta < 1 for an integrable L^p weight, got beta={self.beta}"
                )
        if self.kind == "custom-samples":
            if self.samples is None:
                raise InvalidArgumentError("custom-samples needs a samples array")
            s = np.asarray(self.samples, dtype=float)
            if s.ndim != 1 or s.size < 4:
                raise InvalidArgumentError("samples must be a 1d array, length >= 4")
            if s.min() < -1e-12:
                raise InvalidArgumentError(f"W negative at a sample (min {s.min():.3e})")
            s = np.maximum(s, 0.0)
            s.setflags(write=False)
            object.__setattr__(self, "samples", s)

    @property
    def lp_limit(self) -> float:
        """sup of p with W in L^p; inf for anything bounded."""
        if self.kind == "power-singular" and self.beta > 0:
            return 1.0 / self.beta
        return np.inf

    def declared_gamma(self) -> float:
        """Degree of unboundedness of sqrt(W) as a multiplier against Delta.

        A 1-d L^p weight multiplies H^{1/(2p)} into L^2, so the degree on
        the half-order scale is 1/(4p), taken at the L^p limit.
        """
        p = self.lp_limit
        return 0.0 if np.isinf(p) else 1.0 / (4.0 * p)


def evaluate_weight(spec: DampingFunctionSpec, x: np.ndarray) -> np.ndarray:
    """Pointwise values W(x) for x in [0, 2*pi).  Vectorized."""
    x = np.asarray(x, dtype=float)
    a, b = spec.interval
    if spec.kind == "constant":
        return np.full_like(x, spec.amplitude)
    if spec.kind == "indicator":
        return spec.amplitude * ((x > a) & (x < b)).astype(float)
    if spec.kind == "smooth-bump":
        t = (2.0 * x - (a + b)) / (b - a)
        out = np.zeros_like(x)
        inside = np.abs(t) < 1.0
        ti = t[inside]
        out[inside] = spec.amplitude * np.exp(1.0 - 1.0 / (1.0 - ti * ti))
        return out
    if spec.kind == "power-singular":
        out = np.zeros_like(x)
        inside = (x > a) & (x < b)
        out[inside] = spec.amplitude * (x[inside] - a) ** (-spec.beta)
        return out
    # custom-samples: nearest-sample lookup on the uniform grid
    g = spec.samples.size
    idx = np.floor(x / TWO_PI * g).astype(int) % g
    return spec.samples[idx]


def _fft_coefficients(values: np.ndarray) -> np.ndarray:
    """c_n = (1/2pi) int g e^{-inx} dx by the periodic rectangle rule.

    values are g(x_j) on the uniform grid x_j = 2*pi*j/G.  Returns the
    full FFT table; index with n % G.
    """
    return np.fft.fft(values) / values.size


def _smooth_coefficients(spec, nmax: int, root: bool) -> np.ndarray:
    """Coefficients of sqrt(W) (root=True) or W itself for smooth specs."""
    g = 256
    while g < 8 * (2 * nmax + 1):
        g *= 2
    prev = None
    for _ in range(_MAX_DOUBLINGS + 1):
        x = TWO_PI * np.arange(g) / g
        vals = evaluate_weight(spec, x)
        if vals.min() < -1e-12:
            raise InvalidArgumentError(f"W negative on the quadrature grid (min {vals.min():.3e})")
        table = _fft_coefficients(np.sqrt(np.maximum(vals, 0.0)) if root else vals)
        ns = np.arange(-nmax, nmax + 1)
        cur = table[ns % g]
        if prev is not None and np.max(np.abs(cur - prev)) <= _QUAD_TOL:
            return cur
        prev = cur
        g *= 2
    raise NumericError(
        "quadrature for smooth damping coefficients did not stabilize",
        grid=g // 2,
        disagreement=float(np.max(np.abs(cur - prev))) if prev is not None else None,
    )


def _graded_singular_integrals(a: float, span: float, power: float, ns: np.ndarray, g: int) -> np.ndarray:
    """J_n = int_a^{a+span} (x-a)^{-power} e^{-inx} dx on a graded grid.

    Substituting x = a + t^2 turns the integrand into 2 t^{1-2*power}
    e^{-in(a+t^2)}, continuous at t=0 for power < 1/2 and integrable up to
    power < 1.  Plain trapezoid in t then converges at its usual order away
    from the milder endpoint weakness.  The oscillatory factor is built by
    repeated elementwise multiplication (one power of e^{-it^2} per n), so
    no large outer products are formed.
    """
    T = np.sqrt(span)
    t = np.linspace(0.0, T, g + 1)
    h = T / g
    with np.errstate(divide="ignore"):
        base = 2.0 * t ** (1.0 - 2.0 * power)
    if not np.isfinite(base[0]):
        base[0] = 0.0  # integrable endpoint, zero trapezoid weight in the limit
    w = np.full(g + 1, h)
    w[0] = w[-1] = h / 2.0
    gw = base * w
    step = np.exp(-1j * t * t)
    nmax = int(ns.max())
    results = np.empty(nmax + 1, dtype=complex)
    row = np.ones_like(step)
    results[0] = gw.sum()
    for n in range(1, nmax + 1):
        row = row * step
        results[n] = gw @ row
    out = results[np.abs(ns)]
    out = np.where(ns < 0, np.conj(out), out)
    return out * np.exp(-1j * ns * a)


def _singular_coefficients(spec, nmax: int, root: bool) -> np.ndarray:
    a, b = spec.interval
    span = b - a
    power = spec.beta / 2.0 if root else spec.beta
    if power >= 1.0:
        raise InvalidArgumentError(f"weight power {power} is not integrable")
    amp = np.sqrt(spec.amplitude) if root else spec.amplitude
    ns = np.arange(-nmax, nmax + 1)
    g = 8 * (2 * nmax + 1)
    prev = None
    for _ in range(_MAX_DOUBLINGS + 1):
        cur = amp * _graded_singular_integrals(a, span, power, ns, g) / TWO_PI
        if prev is not None and np.max(np.abs(cur - prev)) <= _QUAD_TOL:
            return cur
        prev = cur
        g *= 2
    raise NumericError(
        "graded quadrature for singular damping did not reach 1e-8 agreement",
        grid=g // 2,
        disagreement=float(np.max(np.abs(cur - prev))),
        beta=spec.beta,
    )


def _coefficients(spec: DampingFunctionSpec, nmax: int, root: bool) -> np.ndarray:
    """Fourier coefficients c_n, |n| <= nmax, of sqrt(W) or of W.

    Tables for sample-free specs are cached: ladders and sweeps rebuild the
    same operator at the same cutoff many times.
    """
    if spec.samples is None:
        key = (spec.kind, spec.interval, spec.beta, spec.amplitude, nmax, root)
        hit = _coeff_cache.get(key)
        if hit is None:
            hit = _coeff_cache[key] = _coefficients_uncached(spec, nmax, root)
        return hit
    return _coefficients_uncached(spec, nmax, root)


_coeff_cache: dict = {}


def _coefficients_uncached(spec: DampingFunctionSpec, nmax: int, root: bool) -> np.ndarray:
    a, b = spec.interval
    ns = np.arange(-nmax, nmax + 1)
    amp = np.sqrt(spec.amplitude) if root else spec.amplitude
    if spec.kind == "constant":
        c = np.zeros(2 * nmax + 1, dtype=complex)
        c[nmax] = amp
        return c
    if spec.kind == "indicator":
        # (1/2pi) int_a^b e^{-inx} dx, exactly
        c = np.empty(2 * nmax + 1, dtype=complex)
        nz = ns != 0
        n = ns[nz]
        c[nz] = (np.exp(-1j * n * a) - np.exp(-1j * n * b)) / (TWO_PI * 1j * n)
        c[~nz] = (b - a) / TWO_PI
        return amp * c
    if spec.kind in ("smooth-bump", "custom-samples"):
        if spec.kind == "custom-samples":
            g = spec.samples.size
            if g < 2 * nmax + 1:
                raise InvalidArgumentError(
                    f"custom samples too short ({g}) to resolve coefficients up to |n|={nmax}"
                )
            vals = np.sqrt(spec.samples) if root else spec.samples
            table = _fft_coefficients(vals)
            return table[ns % g]
        return _smooth_coefficients(spec, nmax, root)
    return _singular_coefficients(spec, nmax, root)


def sqrt_weight_coefficients(spec: DampingFunctionSpec, nmax: int) -> np.ndarray:
    """Fourier coefficients of sqrt(W), |n| <= nmax, centered at index nmax."""
    return _coefficients(spec, nmax, root=True)


@dataclass(frozen=True)
class ObservationOperator:
    """Q as an explicit matrix from spectral coordinates to Y coordinates."""

    matrix: np.ndarray
    declared_gamma: float
    description: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2:
            raise InvalidArgumentError("observation matrix must be 2d")
        if not (0.0 <= self.declared_gamma <= 0.5):
            raise InvalidArgumentError(f"declared_gamma must lie in [0, 1/2], got {self.declared_gamma}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        gram = m.conj().T @ m
        asym = np.max(np.abs(gram - gram.conj().T))
        scale = max(1.0, np.max(np.abs(gram)))
        if asym > 1e-12 * scale:
            raise NumericError("Q*Q failed the self-adjointness check", asymmetry=float(asym))
        lo = eigvalsh(gram, subset_by_index=(0, 0))[0]
        if lo < -1e-10 * scale:
            raise NumericError("Q*Q failed the positivity check", min_eigenvalue=float(lo))

    @property
    def dim_in(self) -> int:
        return self.matrix.shape[1]

    def gram(self) -> np.ndarray:
        """Q*Q in spectral coordinates."""
        return self.matrix.conj().T @ self.matrix

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(u, dtype=complex)


def _toeplitz_in_labels(model: SpectralModel, coeffs: np.ndarray, nmax: int) -> np.ndarray:
    diff = model.labels[:, None] - model.labels[None, :]
    return coeffs[diff + nmax]


def multiplier_observation(model: SpectralModel, spec: DampingFunctionSpec) -> ObservationOperator:
    """Q u = projection of sqrt(W) u back to the truncated Fourier space.

    The matrix entry (j, k) is the Fourier coefficient of sqrt(W) at label
    difference l_j - l_k, so Y is the truncated space itself and the
    adjoint is the exact conjugate transpose.
    """
    nmax = int(np.max(model.labels) - np.min(model.labels))
    coeffs = sqrt_weight_coefficients(spec, nmax)
    return ObservationOperator(
        matrix=_toeplitz_in_labels(model, coeffs, nmax),
        declared_gamma=spec.declared_gamma(),
        description=f"sqrt({spec.kind}) multiplier",
    )


def indicator_observation(model: SpectralModel, omega: tuple[float, float]) -> ObservationOperator:
    """Multiplier observation for W = 1 on the arc omega."""
    a, b = omega
    if not (b > a):
        raise InvalidArgumentError(f"empty observation arc {omega}")
    spec = DampingFunctionSpec(kind="indicator", interval=(float(a), float(b)))
    op = multiplier_observation(model, spec)
    return ObservationOperator(op.matrix, op.declared_gamma, f"indicator({a:.3g},{b:.3g})")


def compose_fractional(Q: ObservationOperator, model: SpectralModel, s: float) -> ObservationOperator:
    """Q |D|^s: multiply column k by rho_k^s (frequencies of the given model).

    Against the half-wave propagator |D| the composed operator has degree
    s on top of twice the multiplier's own degree (the half-order scale of
    |D| is twice as fine as that of Delta).
    """
    if not (0.0 <= s <= 0.5):
        raise InvalidArgumentError(f"fractional order s must lie in [0, 1/2], got {s}")
    with np.errstate(divide="ignore"):
        scale = model.frequencies**s
    if s == 0.0:
        scale = np.ones_like(scale)
    gamma = min(0.5, 2.0 * Q.declared_gamma + s)
    return ObservationOperator(
        matrix=Q.matrix * scale[None, :],
        declared_gamma=gamma,
        description=f"{Q.description} . |D|^{s}",
    )


def structural_observation(
    model: SpectralModel,
    viscous: DampingFunctionSpec,
    structural: DampingFunctionSpec,
) -> ObservationOperator:
    """Plate damping pair Q u = (sqrt(W_v) u, sqrt(W_s) grad u).

    grad is diagonal i*label in the Fourier basis; Y is two stacked copies
    of the truncated space, so Q*Q = W_v + grad* W_s grad.  Intended
    against P = Delta^2, where the pair has degree 1/4.
    """
    qv = multiplier_observation(model, viscous)
    qs = multiplier_observation(model, structural)
    grad = 1j * model.labels.astype(float)
    stacked = np.vstack([qv.matrix, qs.matrix * grad[None, :]])
    return ObservationOperator(
        matrix=stacked,
        declared_gamma=0.25,
        description="viscous+structural plate pair",
    )


def weight_form(model: SpectralModel, spec: DampingFunctionSpec) -> np.ndarray:
    """Exact quadratic form of W: T[j,k] = (W-coefficient at l_j - l_k).

    For u in the truncated space, u^H T u = int W |u|^2 dx / (2pi-normalized
    basis) with no truncation error, unlike u^H (Q*Q) u which loses the
    coefficient tail beyond the cutoff.  Useful as the honest side of
    dual-route checks.
    """
    nmax = int(np.max(model.labels) - np.min(model.labels))
    coeffs = _coefficients(spec, nmax, root=False)
    return _toeplitz_in_labels(model, coeffs, nmax)


@dataclass(frozen=True)
class GammaEstimate:
    gamma_hat: float
    saturated: bool
    cutoffs: tuple[int, ...]
    table: dict


def measure_gamma(build, cutoffs, candidates, stability: float = 0.05) -> GammaEstimate:
    """Estimate the degree of unboundedness of Q over a cutoff ladder.

    build(K) must return (model, Q) at cutoff K.  For each candidate gamma
    the ladder of operator norms ||Q Lambda^{-gamma}|| is computed; the
    smallest candidate whose ladder is nonincreasing within the stability
    factor wins.  If none is stable the estimate saturates at 1/2.
    """
    cutoffs = tuple(int(k) for k in cutoffs)
    if len(cutoffs) < 2:
        raise InvalidArgumentError("need at least two cutoffs for a ladder")
    cands = sorted(float(g) for g in candidates)
    if not cands or cands[0] < 0.0 or cands[-1] > 0.5:
        raise InvalidArgumentError("candidates must be a nonempty subset of [0, 1/2]")
    pairs = [build(k) for k in cutoffs]
    table = {}
    for gamma in cands:
        norms = []
        for mod, Q in pairs:
            weighted = Q.matrix * lambda_power(mod, -gamma)[None, :]
            norms.append(float(svdvals(weighted)[0]))
        table[gamma] = norms
    for gamma in cands:
        norms = table[gamma]
        if all(norms[i + 1] <= norms[i] * (1.0 + stability) for i in range(len(norms) - 1)):
            return GammaEstimate(gamma, False, cutoffs, table)
    return GammaEstimate(0.5, True, cutoffs, table)
