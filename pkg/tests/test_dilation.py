"""Dilation transfer, regime split, fractional propagation, cone growth."""

import numpy as np
import pytest

from decaylab.control import ControlProfile, control_constant
from decaylab.damping import (
    DampingFunctionSpec,
    ObservationOperator,
    compose_fractional,
    indicator_observation,
    multiplier_observation,
    weight_form,
)
from decaylab.dilation import (
    SpectralTransform,
    carleman_growth_check,
    commuting_losslessness_check,
    dilate_general,
    dilate_profile,
    fractional_propagation_check,
    optimality_witness,
    regime_masks,
    verify_dilation,
)
from decaylab.errors import InvalidArgumentError, NumericError
from decaylab.spectral import build_circle_model

BUMP = DampingFunctionSpec(kind="smooth-bump", interval=(0.0, 2.0))


@pytest.fixture(scope="module")
def m64():
    return build_circle_model(64)


@pytest.fixture(scope="module")
def m256():
    return build_circle_model(256)


def flat_profile(k, gamma, mu=0.0, grid=None):
    grid = np.geomspace(1.0, 100.0, 12) if grid is None else grid
    return ControlProfile(mu=mu, gamma=gamma, lambda_grid=grid, K_values=np.full(grid.size, k))


# ---------------------------------------------------------------- regimes


def test_regime_counts_frozen(m64):
    dec = regime_masks(m64, 20.0, 1.0, rho0=2.0)
    assert dec.counts == (3, 16, 42, 68)
    assert dec.tilde_lambda == pytest.approx(20.0)


def test_regime_partition_random(m64):
    rng = np.random.default_rng(7)
    for _ in range(25):
        alpha = rng.choice([0.5, 1.0, 2.0])
        tilde = rng.uniform(5.0, 40.0)
        rho0 = rng.uniform(0.5, tilde / 2.0 - 0.1)
        dec = regime_masks(m64, tilde**alpha, alpha, rho0=rho0)
        assert sum(dec.counts) == m64.dim
        if tilde <= m64.rho_max * 2.0 / 3.0:
            # the band [tilde/2, 3 tilde/2] is wider than one frequency gap
            assert dec.counts[2] >= 1


def test_regime_rejects_rho0_at_half_band(m64):
    with pytest.raises(InvalidArgumentError, match="strictly below"):
        regime_masks(m64, 20.0, 1.0, rho0=10.0)


# ---------------------------------------------------------------- dilate_profile


def test_dilate_alpha_one_formula_audit():
    grid = np.linspace(2.0, 10.0, 9)
    prof = ControlProfile(mu=0.3, gamma=0.25, lambda_grid=grid, K_values=2.0 + np.sqrt(grid))
    pred = dilate_profile(prof, 1.0, grid)
    manual = prof.M_of_lambda + prof.m_of_lambda * grid ** (4 * 0.25 - 1.0)
    assert pred.predicted_M == pytest.approx(manual, rel=1e-12)
    assert pred.predicted_m == pytest.approx(prof.m_of_lambda, rel=1e-12)
    assert np.all(pred.predicted_M >= prof.M_of_lambda)


def test_dilate_exponent_algebra_strengthening_case():
    # gamma = 1/4, alpha = 1/2: both transfer terms carry one power of lambda
    target = np.linspace(1.2, 9.0, 7)
    pred = dilate_profile(flat_profile(1.0, gamma=0.25, mu=0.25), 0.5, target)
    assert pred.predicted_M == pytest.approx(2.0 * np.sqrt(2.0) * target, rel=1e-12)
    assert pred.predicted_m == pytest.approx(np.sqrt(2.0), rel=1e-12)


def test_dilate_exponent_algebra_smoothing_case():
    # gamma = 0, alpha = 2: the observation part of the pencil term goes flat
    target = np.linspace(4.0, 100.0, 9)
    pred = dilate_profile(flat_profile(1.0, gamma=0.0), 2.0, target)
    expected = np.sqrt(2.0) * (target**-0.5 + 1.0)
    assert pred.predicted_M == pytest.approx(expected, rel=1e-12)


def test_dilate_rejects_hypothesis_violation():
    with pytest.raises(InvalidArgumentError, match="alpha >= 2"):
        dilate_profile(flat_profile(1.0, gamma=0.3), 0.5, np.array([2.0]))


def test_dilate_rejects_out_of_range_pullback():
    with pytest.raises(InvalidArgumentError, match="source profile range"):
        dilate_profile(flat_profile(1.0, gamma=0.0), 0.5, np.array([2.0, 15.0]))


def test_prediction_arrays_frozen():
    pred = dilate_profile(flat_profile(1.0, gamma=0.0), 1.0, np.array([2.0, 3.0]))
    with pytest.raises(ValueError):
        pred.predicted_M[0] = 0.0


# ---------------------------------------------------------------- dilate_general


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_general_specializes_to_power_law(alpha):
    grid = np.linspace(2.0, 10.0, 9)
    prof = ControlProfile(mu=0.2, gamma=0.25, lambda_grid=grid, K_values=1.0 + grid**0.7)
    target = np.linspace(grid[0] ** alpha, grid[-1] ** alpha, 7)
    tr = SpectralTransform(
        forward=lambda s: s**alpha,
        inverse=lambda y: y ** (1.0 / alpha),
        alpha=alpha,
        lower_constant=max(1.0, 1.0 / alpha),
    )
    pa = dilate_profile(prof, alpha, target)
    pg = dilate_general(prof, tr, target)
    assert pg.predicted_M == pytest.approx(pa.predicted_M, rel=1e-12)
    assert pg.predicted_m == pytest.approx(pa.predicted_m, rel=1e-12)
    assert pg.tilde_lambda == pytest.approx(pa.tilde_lambda, rel=1e-12)


def test_general_rejects_undeclared_derivative_floor():
    # f = sqrt(s) has f' = s^(-1/2)/2, so lower_constant = 1 overclaims
    tr = SpectralTransform(forward=np.sqrt, inverse=np.square, alpha=0.5, lower_constant=1.0)
    with pytest.raises(InvalidArgumentError, match="growth certificate"):
        dilate_general(flat_profile(1.0, gamma=0.0), tr, np.linspace(1.5, 3.0, 4))


def test_general_rejects_broken_inverse():
    tr = SpectralTransform(forward=lambda s: s**2, inverse=lambda y: y, alpha=2.0)
    with pytest.raises(InvalidArgumentError, match="round trip"):
        dilate_general(flat_profile(1.0, gamma=0.0), tr, np.linspace(4.0, 9.0, 4))


def test_general_quadratic_symbol():
    prof = flat_profile(3.0, gamma=0.0, grid=np.linspace(2.0, 30.0, 15))
    tr = SpectralTransform(
        forward=lambda s: s + s**2,
        inverse=lambda y: 0.5 * (np.sqrt(1.0 + 4.0 * y) - 1.0),
        alpha=2.0,
    )
    pred = dilate_general(prof, tr, np.linspace(40.0, 100.0, 5))
    assert np.all(np.isfinite(pred.predicted_M))
    assert pred.tilde_lambda[0] == pytest.approx(6.285151, rel=1e-5)
    back = tr.forward(pred.tilde_lambda**2)
    assert back == pytest.approx(pred.target_grid**2, rel=1e-10)
    assert pred.predicted_m == pytest.approx(3.0 * np.sqrt(2.0), rel=1e-9)


def test_general_log_corrected_symbol():
    def inverse(y):
        y = np.asarray(y, dtype=float)
        lo, hi = np.zeros_like(y), np.maximum(y, 2.0)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            high = mid * (1.0 + np.log1p(mid)) >= y
            hi = np.where(high, mid, hi)
            lo = np.where(high, lo, mid)
        return 0.5 * (lo + hi)

    tr = SpectralTransform(forward=lambda s: s * (1.0 + np.log1p(s)), inverse=inverse, alpha=1.0)
    prof = flat_profile(3.0, gamma=0.0, grid=np.linspace(2.0, 30.0, 15))
    pred = dilate_general(prof, tr, np.linspace(12.0, 40.0, 5))
    assert np.all(np.isfinite(pred.predicted_M))
    assert np.all(np.diff(pred.tilde_lambda) > 0)
    assert pred.tilde_lambda[0] == pytest.approx(5.65866098, rel=1e-6)


# ---------------------------------------------------------------- commuting case


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_commuting_losslessness(alpha):
    model = build_circle_model(32)
    chk = commuting_losslessness_check(model, alpha, np.arange(2.0, 7.0), scale=0.1)
    assert chk.max_relative_gap <= 1e-10
    assert chk.source_K == pytest.approx(10.0, rel=1e-12)
    assert chk.dilated_K == pytest.approx(10.0, rel=1e-12)


def test_commuting_requires_resonant_tilde():
    model = build_circle_model(32)
    with pytest.raises(InvalidArgumentError, match="model frequency"):
        commuting_losslessness_check(model, 2.0, np.array([2.5]))


# ---------------------------------------------------------------- verify_dilation


def test_verify_identity_damping_trivial():
    model = build_circle_model(32)
    q = ObservationOperator(matrix=np.eye(model.dim, dtype=complex), declared_gamma=0.0)
    cmp = verify_dilation(model, q, 2.0, 0.0, 0.0, np.array([16.0, 20.5, 26.3, 33.1, 42.7]))
    assert cmp.passed
    assert cmp.measured_K[0] == pytest.approx(1.0, rel=1e-9)
    assert np.all(cmp.slack[1:] > 1.0)


def test_verify_half_power_bump(m256):
    q = multiplier_observation(m256, BUMP)
    target = np.sqrt(np.array([28.0, 40.0, 48.0, 56.0, 64.0]))
    cmp = verify_dilation(m256, q, 0.5, 0.0, 0.0, target)
    assert cmp.passed
    assert cmp.constant == pytest.approx(0.46705571, rel=1e-5)
    assert cmp.slack[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(cmp.slack[1:] >= 1e-3)
    rows = list(cmp.rows())
    assert len(rows) == 5 and len(rows[0]) == 5
    assert rows[0][3] == pytest.approx(8.807829, rel=1e-6)


def test_verify_quartic_bump(m64):
    q = multiplier_observation(m64, BUMP)
    cmp = verify_dilation(m64, q, 2.0, 0.0, 0.0, np.geomspace(16.0, 250.0, 9))
    assert cmp.passed
    assert cmp.constant == pytest.approx(0.42156288, rel=1e-5)
    assert cmp.measured_K[0] == pytest.approx(2.33842220, rel=1e-6)
    assert np.min(cmp.slack[1:]) >= 2.0


def test_verify_fractional_weight_drift(m256):
    # a gradient-strengthened bump pushes the measured-to-predicted ratio
    # up through the whole resolved band, so the envelope calibrated at
    # the lowest point undershoots; the comparison reports that honestly
    q = compose_fractional(multiplier_observation(m256, BUMP), m256, 0.25)
    target = np.sqrt(np.array([16.0, 25.0, 36.0, 49.0, 61.0]))
    cmp = verify_dilation(m256, q, 0.5, 0.25, 0.25, target)
    assert not cmp.passed
    assert cmp.constant == pytest.approx(0.61161308, rel=1e-4)
    assert np.all(cmp.slack[1:] < 0.0)
    assert np.all(np.diff(cmp.slack) < 0.0)


# ---------------------------------------------------------------- propagation


def test_propagation_flat_half_power(m256):
    rep = fractional_propagation_check(m256, (0.0, 1.0), 0.5, np.geomspace(2.0, 12.0, 12))
    assert rep.constants[0] == pytest.approx(3.26154667, rel=1e-6)
    assert rep.spread <= 2.0
    assert abs(rep.fit[0]) <= 0.2


def test_propagation_flat_quartic(m64):
    rep = fractional_propagation_check(m64, (0.0, 1.0), 2.0, np.geomspace(16.0, 900.0, 12))
    assert rep.is_flat()
    assert rep.spread <= 6.0


def test_propagation_flat_classical(m64):
    rep = fractional_propagation_check(m64, (0.0, 1.0), 1.0, np.geomspace(4.0, 16.0, 12))
    assert abs(rep.fit[0]) <= 0.15
    assert rep.spread <= 4.0


WITNESS_CASES = [
    (0.5, 256, 0.000101, 0.83006183),
    (1.0, 256, 0.997952, 26.64116879),
    (2.0, 64, 1.481541, 14323.900777),
]


@pytest.mark.parametrize("alpha,cutoff,slope,ratio0", WITNESS_CASES)
def test_witness_slopes(alpha, cutoff, slope, ratio0, m64, m256):
    model = m64 if cutoff == 64 else m256
    ladder = np.arange(16.0, 49.0) ** alpha
    wit = optimality_witness(model, (0.0, 1.0), alpha, ladder)
    assert abs(wit.slope - (2.0 - 1.0 / alpha)) <= 0.15
    assert wit.slope == pytest.approx(slope, abs=2e-4)
    assert wit.ratios[0] == pytest.approx(ratio0, rel=1e-6)
    assert wit.mode_numbers[0] == 16 and wit.mode_numbers[-1] == 48


def test_witness_pure_mode_norms(m256):
    # the uncut mode has squared mass 2*pi and leaves exactly the arc
    # measure inside the observation window
    e = np.zeros(m256.dim)
    e[m256.labels == 5] = 1.0
    assert np.sqrt(2.0 * np.pi) * np.linalg.norm(e) == pytest.approx(np.sqrt(2.0 * np.pi))
    form = weight_form(m256, DampingFunctionSpec(kind="indicator", interval=(0.0, 1.0)))
    mass = 2.0 * np.pi * np.real(e @ form @ e)
    assert mass == pytest.approx(1.0, abs=1e-12)


def test_witness_rotation_invariance(m256):
    base = optimality_witness(m256, (0.0, 1.0), 1.0, np.array([20.0]))
    rotated = optimality_witness(m256, (0.7, 1.7), 1.0, np.array([20.0]))
    assert abs(base.ratios[0] - rotated.ratios[0]) <= 1e-9
    assert base.ratios[0] == pytest.approx(33.26697063, rel=1e-6)


def test_witness_rejects_non_integer_mode(m256):
    with pytest.raises(InvalidArgumentError, match="integer mode"):
        optimality_witness(m256, (0.0, 1.0), 1.0, np.array([20.5]))


def test_witness_rejects_covering_arc(m256):
    with pytest.raises(InvalidArgumentError, match="covers the circle"):
        optimality_witness(m256, (0.0, 2.0 * np.pi), 1.0, np.array([20.0]))


def test_witness_rejects_mode_outside_band(m64):
    with pytest.raises(InvalidArgumentError, match="must lie in"):
        optimality_witness(m64, (0.0, 1.0), 1.0, np.array([80.0]))


# ---------------------------------------------------------------- cone growth


def test_carleman_growth_frozen(m64):
    rep = carleman_growth_check(m64, (0.0, 1.0), 1.0, np.arange(2.0, 8.0))
    assert rep.constants[0] == pytest.approx(4531.7719, rel=1e-5)
    assert rep.fit[0] == pytest.approx(4.159567, rel=1e-4)
    assert rep.fit[2] >= 0.999
    assert rep.prefers_cone_radius


def test_carleman_model_selection_quartic(m64):
    rep = carleman_growth_check(m64, (0.0, 1.0), 2.0, np.arange(2.0, 8.0) ** 2)
    assert rep.tilde_lambda == pytest.approx(np.arange(2.0, 8.0), rel=1e-12)
    assert rep.fit[2] > rep.alt_fit[2]
    assert rep.fit[0] > 0


def test_carleman_full_circle_flat(m64):
    rep = carleman_growth_check(m64, (0.0, 2.0 * np.pi - 1e-9), 1.0, np.arange(2.0, 8.0))
    assert rep.constants == pytest.approx(np.ones(6), rel=1e-6)
    assert abs(rep.fit[0]) <= 1e-6


def test_carleman_floor_raises(m64):
    with pytest.raises(NumericError, match="certifiable"):
        carleman_growth_check(m64, (0.0, 1.0), 1.0, np.arange(2.0, 9.0))


def test_carleman_cone_must_fit_band(m64):
    with pytest.raises(InvalidArgumentError, match="resolved band"):
        carleman_growth_check(m64, (0.0, 1.0), 1.0, np.array([65.0]))
