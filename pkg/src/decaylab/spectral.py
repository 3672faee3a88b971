"""Truncated spectral models of a nonnegative selfadjoint propagator.

A model is a finite table of mode frequencies rho_k, sorted nondecreasing,
with P acting diagonally as rho_k^2 in its own eigenbasis.  All Hilbert
space inner products downstream are then plain Euclidean inner products of
coefficient vectors, which keeps weighted SVDs and Gram matrices trivial.

The circle model is the workhorse: Fourier modes k in {-K..K} on a circle
of circumference 2*pi, rho_k = |k|.  Fractional powers of the propagator
reuse the same eigenbasis with frequencies rho_k^alpha, so one model can
stand for Delta, |D|, or Delta^2 as needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "Mode",
    "SpectralModel",
    "build_circle_model",
    "power_model",
    "apply_calculus",
    "lambda_power",
    "lambda_alpha_power",
    "sobolev_norm",
    "spectral_projector",
    "interpolation_check",
    "describe_model",
]


@dataclass(frozen=True)
class Mode:
    """One spectral mode: P acts on it by rho^2 = frequency squared."""

    index: int
    frequency: float
    label: int


@dataclass(frozen=True)
class SpectralModel:
    """Finite spectral resolution of P.

    frequencies[k] is rho_k >= 0 sorted nondecreasing; labels carry the
    signed Fourier wavenumber for geometry bookkeeping (Toeplitz damping
    matrices are indexed by label differences).  Arrays are read-only so a
    model can be shared freely.
    """

    frequencies: np.ndarray
    labels: np.ndarray
    geometry: str = "abstract"
    cutoff: int | None = field(default=None)

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if freqs.ndim != 1 or labels.shape != freqs.shape:
            raise InvalidArgumentError("frequencies and labels must be 1d arrays of equal length")
        if freqs.size < 2:
            raise InvalidArgumentError("model needs dim >= 2: a kernel-only model has no energy space")
        if np.any(freqs < 0):
            raise InvalidArgumentError("frequencies must be nonnegative")
        if np.any(np.diff(freqs) < 0):
            raise InvalidArgumentError("frequencies must be sorted nondecreasing")
        freqs.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.frequencies.size

    @property
    def kernel_dim(self) -> int:
        return int(np.count_nonzero(self.frequencies == 0.0))

    @property
    def rho_max(self) -> float:
        return float(self.frequencies[-1])

    @property
    def eigenvalues(self) -> np.ndarray:
        """P-eigenvalues rho_k^2."""
        return self.frequencies**2

    @property
    def modes(self) -> list[Mode]:
        return [
            Mode(index=i, frequency=float(r), label=int(l))
            for i, (r, l) in enumerate(zip(self.frequencies, self.labels))
        ]

    def ceiling(self) -> float:
        """Largest lambda any experiment on this model should use.

        Keeping lambda <= rho_max/4 leaves every spectral regime of the
        dilation analysis inside the truncation, so norms are not polluted
        by the missing tail.  For models derived from a labeled cutoff
        (powers of the circle) the underlying label band is the second
        admissible currency: contracting powers keep their base window.
        """
        top = self.rho_max if self.cutoff is None else max(self.rho_max, float(self.cutoff))
        return top / 4.0


def build_circle_model(cutoff: int) -> SpectralModel:
    """Fourier truncation of the Laplacian on the circle.

    Modes are labeled k in {-K..K} with rho_k = |k|, sorted by frequency
    with the negative label first on ties so matrices are reproducible
    bit-for-bit.
    """
    if not isinstance(cutoff, (int, np.integer)) or cutoff < 1:
        raise InvalidArgumentError(f"cutoff must be an integer >= 1, got {cutoff!r}")
    ks = np.arange(-cutoff, cutoff + 1)
    order = np.lexsort((ks, np.abs(ks)))
    labels = ks[order]
    return SpectralModel(
        frequencies=np.abs(labels).astype(float),
        labels=labels,
        geometry="circle",
        cutoff=int(cutoff),
    )


def power_model(model: SpectralModel, alpha: float) -> SpectralModel:
    """Model of P^alpha on the same eigenbasis: frequencies become rho^alpha.

    The mode order is unchanged (x -> x^alpha is monotone on [0, inf)), so
    label bookkeeping and any Toeplitz damping matrix carry over verbatim.
    """
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    return SpectralModel(
        frequencies=model.frequencies**alpha,
        labels=model.labels,
        geometry=model.geometry if alpha == 1 else f"{model.geometry}-power",
        cutoff=model.cutoff,
    )


def apply_calculus(model: SpectralModel, f, u: np.ndarray) -> np.ndarray:
    """Functional calculus f(P)u: multiply coefficient k by f(rho_k^2)."""
    vals = np.asarray([f(s) for s in model.eigenvalues], dtype=complex)
    bad = np.nonzero(~np.isfinite(vals))[0]
    if bad.size:
        k = int(bad[0])
        raise InvalidArgumentError(
            f"f undefined at P-eigenvalue {model.eigenvalues[k]!r} "
            f"(mode index {k}, label {model.labels[k]})"
        )
    return vals * np.asarray(u, dtype=complex)


def lambda_power(model: SpectralModel, s: float) -> np.ndarray:
    """Diagonal of Lambda^s = (1+P)^s, the Sobolev scaling operator."""
    return (1.0 + model.eigenvalues) ** s


def lambda_alpha_power(model: SpectralModel, alpha: float, s: float) -> np.ndarray:
    """Diagonal of the scaling operator (1 + P^alpha)^s for the dilated scale."""
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    return (1.0 + model.frequencies ** (2.0 * alpha)) ** s


def sobolev_norm(model: SpectralModel, s: float, u: np.ndarray) -> float:
    """||u||_s = ||Lambda^s u||; s=0 is the plain Euclidean norm."""
    return float(np.linalg.norm(lambda_power(model, s) * np.asarray(u)))


def spectral_projector(model: SpectralModel, interval) -> np.ndarray:
    """0/1 diagonal selecting modes with frequency in the closed interval."""
    a, b = float(interval[0]), float(interval[1])
    if a > b:
        raise InvalidArgumentError(f"interval must satisfy a <= b, got [{a}, {b}]")
    return ((model.frequencies >= a) & (model.frequencies <= b)).astype(float)


def interpolation_check(model, s: float, r: float, t: float, alpha: float, u) -> tuple[bool, float]:
    """Check ||u||_r <= alpha ||u||_t + alpha^{(s-r)/(t-r)} ||u||_s.

    Constant exactly 1; returns (holds, slack) with slack = RHS - LHS.
    """
    if not (s < r < t):
        raise InvalidArgumentError(f"need s < r < t, got s={s}, r={r}, t={t}")
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    lhs = sobolev_norm(model, r, u)
    rhs = alpha * sobolev_norm(model, t, u) + alpha ** ((s - r) / (t - r)) * sobolev_norm(model, s, u)
    return bool(lhs <= rhs), float(rhs - lhs)


def describe_model(model: SpectralModel) -> dict:
    """Serializable descriptor consumed by the CLI."""
    return {
        "geometry": model.geometry,
        "cutoff": model.cutoff,
        "dim": model.dim,
        "kernel_dim": model.kernel_dim,
        "frequencies": [float(r) for r in model.frequencies],
    }
