"""Observation operator construction, quadrature, degree measurement."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import svdvals

from decaylab import InvalidArgumentError, build_circle_model, lambda_power, power_model
from decaylab.damping import (
    DampingFunctionSpec,
    compose_fractional,
    evaluate_weight,
    indicator_observation,
    measure_gamma,
    multiplier_observation,
    sqrt_weight_coefficients,
    structural_observation,
    weight_form,
)


def _quad_coefficient(w, n, a, b):
    """Oracle: (1/2pi) int_a^b w(x) e^{-inx} dx by adaptive quadrature."""
    re = quad(lambda x: w(x) * np.cos(n * x), a, b, limit=400)[0]
    im = quad(lambda x: -w(x) * np.sin(n * x), a, b, limit=400)[0]
    return (re + 1j * im) / (2 * np.pi)


def test_constant_weight_is_identity():
    m = build_circle_model(6)
    q = multiplier_observation(m, DampingFunctionSpec(kind="constant", amplitude=1.0))
    assert np.allclose(q.matrix, np.eye(m.dim))
    assert q.declared_gamma == 0.0


def test_constant_amplitude_scales_as_sqrt():
    m = build_circle_model(4)
    q = multiplier_observation(m, DampingFunctionSpec(kind="constant", amplitude=4.0))
    assert np.allclose(q.matrix, 2.0 * np.eye(m.dim))


def test_indicator_diagonal_entries():
    # diagonal of the sqrt(1_(0,1)) Toeplitz matrix is c_0 = |interval|/2pi
    m = build_circle_model(8)
    q = indicator_observation(m, (0.0, 1.0))
    assert np.allclose(np.diag(q.matrix), 1.0 / (2 * np.pi))


def test_indicator_coefficients_match_quad_oracle():
    spec = DampingFunctionSpec(kind="indicator", interval=(0.0, 1.0))
    c = sqrt_weight_coefficients(spec, 16)
    for n in (0, 1, 5, 16):
        oracle = _quad_coefficient(lambda x: 1.0, n, 0.0, 1.0)
        assert abs(c[16 + n] - oracle) < 1e-12


def test_indicator_witness_norm():
    # For the plane-wave witness u = e^{inx} (coefficient sqrt(2pi) on one
    # mode), the exact form of W = 1_(0,1) gives ||1_Omega u||^2 = 1.
    m = build_circle_model(12)
    T = weight_form(m, DampingFunctionSpec(kind="indicator", interval=(0.0, 1.0)))
    k = int(np.nonzero(m.labels == 5)[0][0])
    u = np.zeros(m.dim, dtype=complex)
    u[k] = np.sqrt(2 * np.pi)
    assert np.real(u.conj() @ T @ u) == pytest.approx(1.0, abs=1e-12)
    # the projected Gram loses a coefficient tail, but approaches from below
    q = indicator_observation(m, (0.0, 1.0))
    val = np.linalg.norm(q.apply(u)) ** 2
    assert val < 1.0
    assert val > 0.8


def test_full_circle_indicator_is_identity():
    m = build_circle_model(5)
    q = indicator_observation(m, (0.0, 2 * np.pi))
    assert np.allclose(q.matrix, np.eye(m.dim), atol=1e-12)


def test_empty_arc_rejected():
    m = build_circle_model(3)
    with pytest.raises(InvalidArgumentError):
        indicator_observation(m, (1.0, 1.0))


def test_translation_covariance():
    # rotating the arc conjugates Q by a modulation; singular values agree
    m = build_circle_model(16)
    q0 = indicator_observation(m, (0.0, 1.0))
    q1 = indicator_observation(m, (np.pi, np.pi + 1.0))
    s0, s1 = svdvals(q0.matrix), svdvals(q1.matrix)
    assert np.max(np.abs(s0 - s1)) < 1e-10
    mod = np.exp(-1j * m.labels * np.pi)
    assert np.max(np.abs(mod[:, None] * q0.matrix * mod.conj()[None, :] - q1.matrix)) < 1e-12


def test_smooth_bump_matches_quad_oracle():
    spec = DampingFunctionSpec(kind="smooth-bump", interval=(1.0, 3.0))
    c = sqrt_weight_coefficients(spec, 12)

    def w(x):
        t = (2 * x - 4.0) / 2.0
        return np.exp(0.5 * (1 - 1 / (1 - t * t))) if abs(t) < 1 else 0.0

    for n in (0, 3, 9):
        oracle = _quad_coefficient(w, n, 1.0, 3.0)
        assert abs(c[12 + n] - oracle) < 1e-8


def test_singular_coefficients_match_quad_oracle():
    spec = DampingFunctionSpec(kind="power-singular", interval=(0.0, 1.0), beta=0.3)
    c = sqrt_weight_coefficients(spec, 33)
    for n in (0, 1, 7, 33):
        oracle = _quad_coefficient(lambda x: x**-0.15, n, 0.0, 1.0)
        assert abs(c[33 + n] - oracle) < 1e-8


def test_singular_weight_form_matches_quad_oracle():
    spec = DampingFunctionSpec(kind="power-singular", interval=(0.0, 1.0), beta=0.3)
    m = build_circle_model(6)
    T = weight_form(m, spec)
    j = int(np.nonzero(m.labels == 2)[0][0])
    k = int(np.nonzero(m.labels == 0)[0][0])
    oracle = _quad_coefficient(lambda x: x**-0.3, 2, 0.0, 1.0)
    assert abs(T[j, k] - oracle) < 1e-7


def test_singular_spec_validates_beta():
    with pytest.raises(InvalidArgumentError):
        DampingFunctionSpec(kind="power-singular", beta=1.0)


def test_negative_amplitude_rejected():
    with pytest.raises(InvalidArgumentError):
        DampingFunctionSpec(kind="constant", amplitude=-1.0)


def test_custom_samples_negative_rejected():
    xs = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    with pytest.raises(InvalidArgumentError):
        DampingFunctionSpec(kind="custom-samples", samples=np.cos(xs))


def test_custom_samples_roundtrip():
    # a nonnegative trigonometric polynomial is resolved exactly by the fft
    xs = np.linspace(0, 2 * np.pi, 128, endpoint=False)
    w = (1.1 + np.cos(xs)) ** 2
    spec = DampingFunctionSpec(kind="custom-samples", samples=w)
    c = sqrt_weight_coefficients(spec, 8)
    # sqrt(W) = 1.1 + cos(x): coefficients 1.1 at 0 and 1/2 at +-1
    assert c[8] == pytest.approx(1.1, abs=1e-12)
    assert c[9] == pytest.approx(0.5, abs=1e-12)
    assert abs(c[8 + 5]) < 1e-12


def test_gram_psd_and_hermitian():
    m = build_circle_model(10)
    for spec in (
        DampingFunctionSpec(kind="indicator", interval=(0.2, 2.2)),
        DampingFunctionSpec(kind="smooth-bump", interval=(0.0, 3.0), amplitude=2.5),
        DampingFunctionSpec(kind="power-singular", interval=(0.5, 1.5), beta=0.4),
    ):
        q = multiplier_observation(m, spec)
        g = q.gram()
        assert np.max(np.abs(g - g.conj().T)) < 1e-12
        assert np.linalg.eigvalsh(g).min() > -1e-10


def test_proportional_split_gram_additivity():
    # W = W/2 + W/2 pointwise, and sqrt scales exactly, so the stacked Gram
    # matches the whole Gram to roundoff even after truncation
    m = build_circle_model(12)
    whole = multiplier_observation(m, DampingFunctionSpec(kind="indicator", interval=(0.0, 2.0)))
    half = multiplier_observation(
        m, DampingFunctionSpec(kind="indicator", interval=(0.0, 2.0), amplitude=0.5)
    )
    assert np.max(np.abs(whole.gram() - 2.0 * half.gram())) < 1e-10


def test_disjoint_supports_add_pointwise():
    # disjoint arcs: sqrt(W1+W2) = sqrt(W1)+sqrt(W2) pointwise, so the
    # matrices themselves add
    m = build_circle_model(10)
    q1 = indicator_observation(m, (0.0, 1.0))
    q2 = indicator_observation(m, (2.0, 3.5))
    both = np.zeros(256)
    xs = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    both[(xs > 0) & (xs < 1)] = 1.0
    both[(xs > 2) & (xs < 3.5)] = 1.0
    # build from exact indicator sum instead of samples: coefficients add
    c1 = sqrt_weight_coefficients(DampingFunctionSpec(kind="indicator", interval=(0.0, 1.0)), 20)
    c2 = sqrt_weight_coefficients(DampingFunctionSpec(kind="indicator", interval=(2.0, 3.5)), 20)
    csum = c1 + c2
    diff = m.labels[:, None] - m.labels[None, :]
    q_sum = csum[diff + 20]
    assert np.max(np.abs(q_sum - (q1.matrix + q2.matrix))) < 1e-12


def test_constant_split_gram_additivity():
    m = build_circle_model(6)
    qa = multiplier_observation(m, DampingFunctionSpec(kind="constant", amplitude=3.0))
    qb = multiplier_observation(m, DampingFunctionSpec(kind="constant", amplitude=1.5))
    qc = multiplier_observation(m, DampingFunctionSpec(kind="constant", amplitude=4.5))
    assert np.max(np.abs(qc.gram() - qa.gram() - qb.gram())) < 1e-12


def test_epsilon_floor_inequality_exact_forms():
    # whenever W >= eps on Omega, int |u|^2 over Omega <= eps^{-1} int W|u|^2,
    # checked with exact quadratic forms so no truncation tail interferes
    m = build_circle_model(16)
    rng = np.random.default_rng(42)
    omega = (0.0, 1.0)
    t_ind = weight_form(m, DampingFunctionSpec(kind="indicator", interval=omega))
    for spec, eps in (
        (DampingFunctionSpec(kind="constant", amplitude=0.7), 0.7),
        (DampingFunctionSpec(kind="indicator", interval=(0.0, 1.5), amplitude=0.3), 0.3),
        (DampingFunctionSpec(kind="power-singular", interval=(0.0, 1.5), beta=0.3), 1.5 ** -0.3),
    ):
        t_w = weight_form(m, spec)
        for _ in range(25):
            u = rng.standard_normal(m.dim) + 1j * rng.standard_normal(m.dim)
            lhs = np.real(u.conj() @ t_ind @ u)
            rhs = np.real(u.conj() @ t_w @ u) / eps
            assert lhs <= rhs * (1 + 1e-10), (spec.kind, lhs, rhs)


def test_compose_fractional_identity_weight():
    m = build_circle_model(8)
    q = multiplier_observation(m, DampingFunctionSpec(kind="constant"))
    qs = compose_fractional(q, m, 0.5)
    assert np.allclose(qs.matrix, np.diag(m.frequencies**0.5))
    assert qs.declared_gamma == 0.5
    q0 = compose_fractional(q, m, 0.0)
    assert np.array_equal(q0.matrix, q.matrix)


def test_compose_fractional_bounded_on_halfwave_scale():
    # ||Q Lambda_{|D|}^{-s}|| stays bounded over cutoffs when W is a bump:
    # the |D|-scale weight (1+|k|)^{-s} exactly cancels the |k|^s factor
    norms = []
    for K in (32, 64, 128):
        m = build_circle_model(K)
        halfwave = power_model(m, 0.5)
        q = multiplier_observation(m, DampingFunctionSpec(kind="smooth-bump", interval=(0.0, 2.0)))
        qs = compose_fractional(q, m, 0.25)
        weighted = qs.matrix * lambda_power(halfwave, -0.25)[None, :]
        norms.append(svdvals(weighted)[0])
    assert max(norms) <= norms[0] * 1.05


def test_structural_pure_viscous():
    m = build_circle_model(5)
    q = structural_observation(
        m,
        DampingFunctionSpec(kind="constant", amplitude=1.0),
        DampingFunctionSpec(kind="constant", amplitude=0.0),
    )
    assert np.allclose(q.gram(), np.eye(m.dim), atol=1e-12)


def test_structural_pure_structural_is_laplacian():
    m = build_circle_model(5)
    q = structural_observation(
        m,
        DampingFunctionSpec(kind="constant", amplitude=0.0),
        DampingFunctionSpec(kind="constant", amplitude=1.0),
    )
    assert np.allclose(q.gram(), np.diag(m.labels.astype(float) ** 2), atol=1e-12)


def test_structural_gram_matches_block_assembly():
    # dual route: stacked-matrix Gram vs W_v-form + grad* W_s-form grad
    m = build_circle_model(8)
    wv = DampingFunctionSpec(kind="indicator", interval=(0.0, 1.0))
    ws = DampingFunctionSpec(kind="indicator", interval=(0.0, 1.0))
    q = structural_observation(m, wv, ws)
    qv = multiplier_observation(m, wv)
    qs = multiplier_observation(m, ws)
    grad = np.diag(1j * m.labels.astype(float))
    expected = qv.gram() + grad.conj().T @ qs.gram() @ grad
    assert np.max(np.abs(q.gram() - expected)) < 1e-12


def test_measure_gamma_identity():
    est = measure_gamma(
        lambda K: (
            build_circle_model(K),
            multiplier_observation(build_circle_model(K), DampingFunctionSpec(kind="constant")),
        ),
        cutoffs=(16, 32, 64),
        candidates=(0.0, 0.25, 0.5),
    )
    assert est.gamma_hat == 0.0
    assert not est.saturated


def test_measure_gamma_halfwave_diagonal():
    # Q = |D|^{1/2} against P = |D| needs the full gamma = 1/2
    def build(K):
        m = build_circle_model(K)
        halfwave = power_model(m, 0.5)
        q = compose_fractional(
            multiplier_observation(m, DampingFunctionSpec(kind="constant")), m, 0.5
        )
        return halfwave, q

    est = measure_gamma(build, cutoffs=(16, 32, 64), candidates=(0.0, 0.25, 0.4, 0.5))
    assert est.gamma_hat == 0.5
    assert not est.saturated
    # smaller candidates grow along the ladder
    assert est.table[0.25][-1] > est.table[0.25][0] * 1.05


def test_measure_gamma_singular_weight_ladder():
    # W = x^{-0.3} on (0,1) multiplies H^{beta/2} into L^2, i.e. degree
    # beta/4 = 0.075 on the half-order scale.  The 5% rule accepts the
    # neighboring candidate 0.05 (3.5% growth per doubling); gamma = 0
    # grows ~11% per doubling and must be rejected.
    spec = DampingFunctionSpec(kind="power-singular", interval=(0.0, 1.0), beta=0.3)

    def build(K):
        m = build_circle_model(K)
        return m, multiplier_observation(m, spec)

    est = measure_gamma(build, cutoffs=(64, 128, 256), candidates=(0.0, 0.05, 0.075, 0.1, 0.25, 0.5))
    assert not est.saturated
    assert est.gamma_hat == 0.05
    g0 = est.table[0.0]
    assert g0[1] > g0[0] * 1.05


def test_measure_gamma_requires_ladder():
    with pytest.raises(InvalidArgumentError):
        measure_gamma(lambda K: None, cutoffs=(16,), candidates=(0.0,))


def test_evaluate_weight_kinds():
    xs = np.array([0.5, 1.5, 4.0])
    ind = evaluate_weight(DampingFunctionSpec(kind="indicator", interval=(0.0, 1.0)), xs)
    assert ind.tolist() == [1.0, 0.0, 0.0]
    sing = evaluate_weight(
        DampingFunctionSpec(kind="power-singular", interval=(0.0, 1.0), beta=0.5), xs
    )
    assert sing[0] == pytest.approx(0.5**-0.5)
    assert sing[1] == 0.0
