"""Damped pencil and block generator: assembly, norms, equivalences.

The pencil P_lambda = P - i*lambda*Q*Q - lambda^2 carries the stationary
analysis; the block generator carries the semigroup.  Both live in explicit
coordinates where their natural norms are Euclidean, so every operator norm
is a singular value computation.

Position coordinates scale nonzero modes by rho (the homogeneous half
derivative) and kernel modes by 1, which makes the Euclidean norm equal to
the energy norm on the quotient and an equivalent norm on the full space.
The quotient drops only the kernel position coordinates: kernel velocities
stay, because the damping may couple them to everything else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eig, lu_factor, lu_solve, null_space, svdvals

from .damping import ObservationOperator
from .errors import InvalidArgumentError, NumericError
from .linalg import fit_exponent, smallest_singular_pair, smallest_singular_value
from .spectral import SpectralModel, lambda_power

__all__ = [
    "assemble_pencil",
    "pencil_resolvent_norm",
    "pencil_near_kernel",
    "GeneratorAssembly",
    "assemble_generator",
    "generator_resolvent_norm",
    "PencilRelationReport",
    "verify_pencil_relations",
    "RaySweep",
    "ray_sweep",
    "ucp_check",
    "riesz_projector",
    "kernel_projector",
    "ResolventSweep",
    "resolvent_sweep",
]

_SINGULAR_CUTOFF = 1e-12


def _gram(model: SpectralModel, Q) -> np.ndarray:
    if Q is None:
        return np.zeros((model.dim, model.dim), dtype=complex)
    if isinstance(Q, ObservationOperator):
        return Q.gram()
    raise InvalidArgumentError(f"Q must be an ObservationOperator or None, got {type(Q)!r}")


def assemble_pencil(model: SpectralModel, Q, lam: complex) -> np.ndarray:
    """P - i*lambda*Q*Q - lambda^2 in spectral coordinates."""
    pencil = -1j * lam * _gram(model, Q)
    np.fill_diagonal(pencil, pencil.diagonal() + model.eigenvalues - lam**2)
    return pencil


def _weighted_pencil(model, Q, lam, source_s, target_s):
    # ||Lambda^t P^{-1} Lambda^{-s}|| = 1/sigma_min(Lambda^s P Lambda^{-t})
    p = assemble_pencil(model, Q, lam)
    if source_s != 0.0:
        p = lambda_power(model, source_s)[:, None] * p
    if target_s != 0.0:
        p = p * lambda_power(model, -target_s)[None, :]
    return p


def pencil_resolvent_norm(model, Q, lam, source_s: float = 0.0, target_s: float = 0.0) -> float:
    """||Lambda^{target} P_lambda^{-1} Lambda^{-source}||, +inf when singular."""
    p = _weighted_pencil(model, Q, lam, source_s, target_s)
    sigma, _ = smallest_singular_pair(p)
    scale = np.max(np.abs(p))
    if sigma <= _SINGULAR_CUTOFF * scale:
        return np.inf
    return 1.0 / sigma


def pencil_near_kernel(model, Q, lam):
    """(sigma_min, near-kernel vector) of the unweighted pencil."""
    return smallest_singular_pair(assemble_pencil(model, Q, lam))


@dataclass(frozen=True)
class GeneratorAssembly:
    """Block generator in explicit energy coordinates.

    position_modes lists the mode indices carried in the position block;
    the velocity block always carries every mode.
    """

    matrix: np.ndarray
    quotiented: bool
    model: SpectralModel
    position_modes: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def assemble_generator(model: SpectralModel, Q, quotient: bool = False) -> GeneratorAssembly:
    """Matrix of the damped wave generator.

    Full space: position weight rho on nonzero modes and 1 on kernel modes,
    so kernel modes with no damping produce the expected nilpotent blocks.
    Quotient: kernel positions removed; what remains is exactly the energy
    space, and the matrix generates a contraction semigroup.
    """
    n = model.dim
    freqs = model.frequencies
    kernel = freqs == 0.0
    if quotient:
        pos = np.nonzero(~kernel)[0]
        weights = freqs[pos]
    else:
        pos = np.arange(n)
        weights = np.where(kernel, 1.0, freqs)
    npos = pos.size
    a = np.zeros((npos + n, npos + n), dtype=complex)
    rows = np.arange(npos)
    a[rows, npos + pos] = weights
    a[npos + pos, rows] = -(freqs[pos] ** 2) / weights
    a[npos:, npos:] = -_gram(model, Q)
    return GeneratorAssembly(matrix=a, quotiented=quotient, model=model, position_modes=pos)


def generator_resolvent_norm(assembly: GeneratorAssembly, lam: complex) -> float:
    """1/sigma_min(A + i*lambda) in the assembly's coordinates."""
    m = assembly.matrix + 1j * lam * np.eye(assembly.dim)
    sigma, _ = smallest_singular_pair(m)
    if sigma <= _SINGULAR_CUTOFF * max(np.max(np.abs(m)), 1.0):
        return np.inf
    return 1.0 / sigma


@dataclass(frozen=True)
class PencilRelationReport:
    lam: float
    pencil_norm: float
    pencil_norm_neg: float
    pencil_norm_to_half: float
    generator_norm: float
    first_holds: bool
    second_holds: bool
    implied_c1_half: float
    implied_c3: float


def verify_pencil_relations(model, Q, lam: float) -> PencilRelationReport:
    """Constant-free pencil/generator inequalities at one real lambda.

    Checks verbatim, with only roundoff headroom:
        ||P_lambda^{-1}||_{H -> H_{1/2}} <= ||(A+i lambda)^{-1}||
        ||P_lambda^{-1}||            <= |lambda|^{-1} ||(A+i lambda)^{-1}||
    and records the constants the two-sided companions would need.
    """
    lam = float(lam)
    if abs(lam) < 1.0:
        raise InvalidArgumentError("pencil relations are checked for |lambda| >= 1")
    p00 = pencil_resolvent_norm(model, Q, lam)
    p00_neg = pencil_resolvent_norm(model, Q, -lam)
    p0h = pencil_resolvent_norm(model, Q, lam, 0.0, 0.5)
    gen = generator_resolvent_norm(assemble_generator(model, Q, quotient=False), lam)
    headroom = 1e-10  # relative roundoff allowance on exact inequalities
    bracket = np.hypot(lam, 1.0)
    c1 = p0h / (bracket * (1.0 / bracket + p00))
    c3 = gen / (abs(lam) * p00 + abs(lam) * p00_neg + 1.0)
    return PencilRelationReport(
        lam=lam,
        pencil_norm=p00,
        pencil_norm_neg=p00_neg,
        pencil_norm_to_half=p0h,
        generator_norm=gen,
        first_holds=bool(p0h <= gen * (1.0 + headroom)),
        second_holds=bool(p00 <= gen / abs(lam) * (1.0 + headroom)),
        implied_c1_half=float(c1),
        implied_c3=float(c3),
    )


@dataclass(frozen=True)
class RaySweep:
    theta: float
    moduli: np.ndarray
    norms: np.ndarray
    slope: float
    intercept: float
    r2: float
    flagged: tuple[int, ...]


def ray_sweep(model, Q, moduli, theta: float | None = None, offset: float = 0.05) -> RaySweep:
    """Pencil resolvent norms along the ray lambda = r e^{i theta}.

    Default ray sits `offset` radians off the negative imaginary axis,
    where the deep-spectra bound predicts ||P_lambda^{-1}|| ~ 1/r for
    damping of degree up to 1/4.  Singular points are flagged and excluded
    from the fitted slope.
    """
    if theta is None:
        theta = 1.5 * np.pi + offset
    if not 0.0 < abs(theta - 1.5 * np.pi) <= np.pi / 4:
        raise InvalidArgumentError(
            f"ray angle {theta:.4f} is not within (0, pi/4] of the negative imaginary axis"
        )
    moduli = np.asarray(moduli, dtype=float)
    direction = np.exp(1j * theta)
    norms = np.array([pencil_resolvent_norm(model, Q, r * direction) for r in moduli])
    finite = np.isfinite(norms)
    flagged = tuple(int(i) for i in np.nonzero(~finite)[0])
    if np.count_nonzero(finite) < 8:
        raise NumericError("too few finite ray points to fit a slope", flagged=flagged)
    span = np.log10(moduli[finite].max() / moduli[finite].min())
    slope, intercept, r2 = fit_exponent(moduli[finite], norms[finite], window=span + 1.0)
    return RaySweep(float(theta), moduli, norms, slope, intercept, r2, flagged)


def ucp_check(model, Q, eigen_lambdas) -> list[dict]:
    """sigma_min of the pencil at candidate eigenfrequencies.

    A pass means no eigenfunction at that frequency is invisible to the
    damping; failures hand back the offending near-kernel vector.
    """
    if len(eigen_lambdas) == 0:
        raise InvalidArgumentError("need at least one lambda to check")
    out = []
    for lam in eigen_lambdas:
        p = assemble_pencil(model, Q, float(lam))
        sigma, vec = smallest_singular_pair(p)
        scale = float(np.max(np.abs(p)))
        out.append(
            {
                "lam": float(lam),
                "sigma_min": float(sigma),
                "scale": scale,
                "passed": bool(sigma > 1e-10 * scale),
                "near_kernel": vec,
            }
        )
    return out


def riesz_projector(assembly: GeneratorAssembly, radius: float | None = None, nodes: int = 64) -> np.ndarray:
    """Spectral projector for the eigenvalue group at 0 by contour quadrature.

    Trapezoid on |z| = radius with `nodes` points; the even-node subsum
    provides a free half-resolution comparison, and disagreement beyond
    1e-8 or a violated contour raises instead of returning junk.
    """
    a = assembly.matrix
    dim = assembly.dim
    eigs = eig(a, right=False)
    scale = max(float(np.max(np.abs(a))), 1.0)
    zero_group = np.abs(eigs) <= 1e-8 * scale
    nonzero = np.abs(eigs[~zero_group])
    if nonzero.size == 0:
        raise InvalidArgumentError("no nonzero eigenvalues: contour radius is meaningless")
    gap = float(nonzero.min())
    if radius is None:
        radius = gap / 2.0
    if radius <= 0:
        raise InvalidArgumentError("radius must be positive")
    if radius >= gap * (1.0 - 1e-9):
        raise InvalidArgumentError(
            f"contour radius {radius:.3e} reaches a nonzero eigenvalue at distance {gap:.3e}"
        )
    if np.any(np.abs(nonzero - radius) < 1e-3 * radius):
        raise InvalidArgumentError("a nonzero eigenvalue sits numerically on the contour")
    if nodes % 2 or nodes < 8:
        raise InvalidArgumentError("nodes must be even and >= 8")
    ident = np.eye(dim, dtype=complex)
    terms = []
    for j in range(nodes):
        z = radius * np.exp(2j * np.pi * j / nodes)
        lu = lu_factor(z * ident - a)
        terms.append(z * lu_solve(lu, ident))
    pi_full = sum(terms) / nodes
    pi_half = sum(terms[::2]) / (nodes // 2)
    drift = float(np.max(np.abs(pi_full - pi_half)))
    if drift > 1e-8:
        raise NumericError("contour quadrature not converged at half resolution", drift=drift)
    idem = float(np.max(np.abs(pi_full @ pi_full - pi_full)))
    if idem > 1e-8:
        raise NumericError("contour projector failed idempotency", defect=idem)
    return pi_full


def kernel_projector(assembly: GeneratorAssembly) -> np.ndarray:
    """Projector onto ker A along range A from explicit null spaces.

    Contour-free cross check for riesz_projector.  Exists only when the
    zero eigenvalue is semisimple, which for the block generator means
    the damping sees every kernel velocity; an undamped kernel velocity
    produces a shear block and the left/right kernels decouple.
    """
    a = assembly.matrix
    right = null_space(a)
    if right.shape[1] == 0:
        raise InvalidArgumentError("generator has no kernel; nothing to project onto")
    left = null_space(a.conj().T)
    pairing = left.conj().T @ right
    # both bases are orthonormal, so the smallest singular value of the
    # pairing is the cosine of the worst angle between the two kernels;
    # a defective zero group makes them (near) orthogonal
    angle = svdvals(pairing)[-1] if pairing.size else 0.0
    if pairing.shape[0] != pairing.shape[1] or angle < 1e-8:
        raise InvalidArgumentError(
            "zero eigenvalue group is defective: kernel velocities escape the damping "
            "and no projector onto ker A along range A exists"
        )
    return right @ np.linalg.solve(pairing, left.conj().T)


@dataclass(frozen=True)
class ResolventSweep:
    lambda_grid: np.ndarray
    pencil_norms: np.ndarray
    generator_norms: np.ndarray
    fit: tuple[float, float, float]

    def rows(self):
        """CSV rows (lambda_re, lambda_im, pencil_norm, generator_norm)."""
        for lam, p, g in zip(self.lambda_grid, self.pencil_norms, self.generator_norms):
            yield float(lam), 0.0, float(p), float(g)


def resolvent_sweep(model, Q, lambda_grid, window: float = 1.0) -> ResolventSweep:
    """Pencil and generator norms over an ascending real grid.

    The grid must respect the truncation ceiling rho_max/4.  With Q = 0 the
    grid must keep 1e-3 away from the undamped frequencies; with damping no
    exclusion applies.  The fit is the power law of the generator norms over
    the top `window` decades.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 8:
        raise InvalidArgumentError("lambda grid must be 1d with at least 8 points")
    if np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError("lambda grid must be strictly ascending")
    if grid[-1] > model.ceiling() * (1.0 + 1e-12):
        raise InvalidArgumentError(
            f"grid top {grid[-1]:.4g} exceeds the truncation ceiling {model.ceiling():.4g}"
        )
    if Q is None:
        dist = np.min(np.abs(grid[:, None] - model.frequencies[None, :]), axis=1)
        if np.any(dist < 1e-3):
            bad = grid[dist < 1e-3][0]
            raise InvalidArgumentError(
                f"lambda={bad:.6g} is within 1e-3 of an undamped frequency; shift the grid"
            )
    assembly = assemble_generator(model, Q, quotient=False)
    pencil = np.array([pencil_resolvent_norm(model, Q, lam) for lam in grid])
    gen = np.array([generator_resolvent_norm(assembly, lam) for lam in grid])
    fit = fit_exponent(grid, gen, window=window)
    return ResolventSweep(grid, pencil, gen, fit)
