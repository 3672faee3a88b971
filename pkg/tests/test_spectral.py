"""Spectral model construction, functional calculus, Sobolev scale."""

import numpy as np
import pytest

from decaylab import (
    InvalidArgumentError,
    apply_calculus,
    build_circle_model,
    describe_model,
    interpolation_check,
    lambda_alpha_power,
    lambda_power,
    power_model,
    sobolev_norm,
    spectral_projector,
)


def test_smallest_circle_model():
    m = build_circle_model(1)
    assert m.dim == 3
    assert m.kernel_dim == 1
    assert [(int(l), float(r)) for l, r in zip(m.labels, m.frequencies)] == [
        (0, 0.0),
        (-1, 1.0),
        (1, 1.0),
    ]


def test_circle_k2_enumeration():
    m = build_circle_model(2)
    assert m.dim == 5
    assert m.frequencies.tolist() == [0.0, 1.0, 1.0, 2.0, 2.0]


def test_circle_k64_count():
    m = build_circle_model(64)
    assert m.dim == 129
    assert m.rho_max == 64.0


def test_tie_break_negative_label_first():
    m = build_circle_model(5)
    for r in range(1, 6):
        pair = m.labels[m.frequencies == r]
        assert pair.tolist() == [-r, r]


def test_bad_cutoff_rejected():
    with pytest.raises(InvalidArgumentError):
        build_circle_model(0)
    with pytest.raises(InvalidArgumentError):
        build_circle_model(-3)


def test_calculus_identity_on_basis_vector():
    m = build_circle_model(4)
    k = int(np.nonzero(m.frequencies == 3)[0][0])
    e = np.zeros(m.dim)
    e[k] = 1.0
    out = apply_calculus(m, lambda s: s, e)
    assert out[k] == pytest.approx(9.0)
    assert np.count_nonzero(out) == 1


def test_calculus_sqrt_gives_abs_d_eigenvalue():
    # |D| = Delta^{1/2} should act by |k| on the k-th Fourier mode, so the
    # plane wave at wavenumber n is an eigenvector of |D|^(2) with value n^2.
    m = build_circle_model(8)
    n = 5
    k = int(np.nonzero(m.labels == n)[0][0])
    e = np.zeros(m.dim)
    e[k] = 1.0
    out = apply_calculus(m, lambda s: np.sqrt(s), e)
    assert out[k] == pytest.approx(n)


def test_calculus_matches_lambda_power_path():
    rng = np.random.default_rng(7)
    m = build_circle_model(16)
    u = rng.standard_normal(m.dim) + 1j * rng.standard_normal(m.dim)
    s = 0.37
    via_calc = apply_calculus(m, lambda t: (1.0 + t) ** s, u)
    via_mult = lambda_power(m, s) * u
    assert np.max(np.abs(via_calc - via_mult)) < 1e-12 * np.max(np.abs(via_mult))


def test_calculus_rejects_nan():
    m = build_circle_model(2)
    u = np.ones(m.dim)
    with np.errstate(divide="ignore"):
        with pytest.raises(InvalidArgumentError, match="label 0"):
            apply_calculus(m, lambda s: np.log(s), u)  # log(0) = -inf at the kernel mode


def test_lambda_power_basics():
    m = build_circle_model(8)
    assert np.all(lambda_power(m, 0.0) == 1.0)
    w = lambda_power(m, 0.5)
    assert w[m.frequencies == 0][0] == pytest.approx(1.0)
    assert w[m.frequencies == 1][0] == pytest.approx(np.sqrt(2.0))
    # Lambda^s Lambda^{-s} = Id to near machine precision
    rng = np.random.default_rng(3)
    u = rng.standard_normal(m.dim)
    v = lambda_power(m, -0.25) * (lambda_power(m, 0.25) * u)
    assert np.max(np.abs(v - u)) <= 1e-13 * np.max(np.abs(u))


def test_lambda_alpha_reduces_to_lambda_at_one():
    m = build_circle_model(12)
    for s in (-0.5, 0.0, 0.3, 1.0):
        assert np.array_equal(lambda_alpha_power(m, 1.0, s), lambda_power(m, s))


def test_lambda_alpha_formula():
    m = build_circle_model(4)
    w = lambda_alpha_power(m, 0.5, 1.0)
    assert w[m.frequencies == 4][0] == pytest.approx(5.0)  # 1 + 4^{2*1/2}


def test_lambda_alpha_rejects_bad_alpha():
    m = build_circle_model(2)
    with pytest.raises(InvalidArgumentError):
        lambda_alpha_power(m, 0.0, 1.0)


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_norm_equivalence_constants(alpha):
    # (1+rho^{2a})^{1/a} and (1+rho^2) agree up to a bounded ratio on any
    # truncation; measure the constant over the K=128 model.
    m = build_circle_model(128)
    ratio = (1.0 + m.frequencies ** (2 * alpha)) ** (1.0 / alpha) / (1.0 + m.frequencies**2)
    c = max(ratio.max(), 1.0 / ratio.min())
    assert np.isfinite(c)
    assert c >= 1.0
    # the extreme of the ratio sits at rho ~ 1, not at the ends
    assert c <= 2.0 ** abs(1.0 / alpha - 1.0) + 1.0


def test_sobolev_norm_basics():
    m = build_circle_model(6)
    assert sobolev_norm(m, 1.3, np.zeros(m.dim)) == 0.0
    k = int(np.nonzero(m.frequencies == 2)[0][0])
    e = np.zeros(m.dim)
    e[k] = 1.0
    for s in (-1.0, 0.0, 0.7):
        assert sobolev_norm(m, s, e) == pytest.approx(5.0**s)


def test_sobolev_norm_log_convexity():
    rng = np.random.default_rng(11)
    m = build_circle_model(24)
    for _ in range(50):
        u = rng.standard_normal(m.dim) + 1j * rng.standard_normal(m.dim)
        assert sobolev_norm(m, 0.5, u) ** 2 <= sobolev_norm(m, 0.0, u) * sobolev_norm(m, 1.0, u) * (1 + 1e-12)


def test_projector_basics():
    m = build_circle_model(4)
    assert np.all(spectral_projector(m, (0.0, np.inf)) == 1.0)
    sel = spectral_projector(m, (0.5, 1.5))
    assert sel.sum() == 2
    assert set(m.labels[sel == 1.0].tolist()) == {-1, 1}
    with pytest.raises(InvalidArgumentError):
        spectral_projector(m, (2.0, 1.0))


def test_projector_idempotent_and_commutes():
    m = build_circle_model(10)
    pi = spectral_projector(m, (3.0, 7.0))
    assert np.array_equal(pi * pi, pi)
    rng = np.random.default_rng(5)
    u = rng.standard_normal(m.dim)
    f = lambda s: np.cos(s) + 2.0
    assert np.allclose(pi * apply_calculus(m, f, u), apply_calculus(m, f, pi * u))


def test_semiclassical_projector_window():
    # h=1/10 with window half-width eps/M = 1/4 selects |rho - 10| <= 1/4,
    # i.e. exactly the two modes with |k| = 10 on the integer lattice.
    m = build_circle_model(64)
    h, half = 0.1, 0.25
    pi = spectral_projector(m, (1.0 / h - half, 1.0 / h + half))
    assert pi.sum() == 2
    assert set(m.labels[pi == 1.0].tolist()) == {-10, 10}


def test_wavepacket_window_count_k256():
    # h=1/50, half-width 2: frequencies 48..52, both signs -> 10 modes.
    m = build_circle_model(256)
    pi = spectral_projector(m, (48.0, 52.0))
    assert pi.sum() == 10


def test_interpolation_single_mode_reduces_to_am_gm():
    m = build_circle_model(8)
    k = int(np.nonzero(m.frequencies == 3)[0][0])
    e = np.zeros(m.dim)
    e[k] = 1.0
    ok, slack = interpolation_check(m, 0.0, 0.5, 1.0, 0.7, e)
    assert ok
    w = 1.0 + 9.0
    expected = 0.7 * w + 0.7 ** (-1.0) * 1.0 - w**0.5
    assert slack == pytest.approx(expected)


def test_interpolation_property_sweep():
    rng = np.random.default_rng(2024)
    m = build_circle_model(32)
    for _ in range(1000):
        u = rng.standard_normal(m.dim) + 1j * rng.standard_normal(m.dim)
        s = rng.uniform(-1.5, 0.5)
        r = s + rng.uniform(0.05, 1.0)
        t = r + rng.uniform(0.05, 1.0)
        a = 10.0 ** rng.uniform(-2, 2)
        ok, slack = interpolation_check(m, s, r, t, a, u)
        assert ok, (s, r, t, a, slack)
        assert slack >= -1e-12


def test_interpolation_large_alpha_limit():
    m = build_circle_model(8)
    u = np.ones(m.dim)
    ok, _ = interpolation_check(m, 0.0, 0.5, 1.0, 1e6, u)
    assert ok


def test_interpolation_rejects_bad_ordering():
    m = build_circle_model(4)
    with pytest.raises(InvalidArgumentError):
        interpolation_check(m, 0.5, 0.5, 1.0, 1.0, np.ones(m.dim))


def test_power_model_water_wave_scale():
    m = build_circle_model(16)
    halfwave = power_model(m, 0.5)
    # eigenvalues of |D| are |k|: frequencies are |k|^{1/2}
    assert halfwave.eigenvalues == pytest.approx(m.frequencies)
    assert np.array_equal(halfwave.labels, m.labels)
    # round trip through the calculus recovers P-eigenvalues
    plate = power_model(m, 2.0)
    back = plate.eigenvalues ** (1.0 / 2.0)
    nz = m.frequencies > 0
    assert np.max(np.abs(back[nz] / m.eigenvalues[nz] - 1.0)) < 1e-12


def test_descriptor_roundtrip():
    m = build_circle_model(3)
    d = describe_model(m)
    assert d["geometry"] == "circle"
    assert d["cutoff"] == 3
    assert d["dim"] == 7
    assert d["frequencies"] == [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]


def test_model_dim_one_rejected():
    from decaylab import SpectralModel

    with pytest.raises(InvalidArgumentError):
        SpectralModel(frequencies=np.array([0.0]), labels=np.array([0]))
