import numpy as np
import pytest

import skewlav as sk
from skewlav.errors import DegenerateDirections, HypothesisViolated, NotNormalForm
from skewlav.germs import NormalFormParams, fiber_shifted_germ

LN2 = np.log(2.0)
B2 = 0.25 + np.pi ** 2 / LN2 ** 2  # b giving alpha0 = 2


def test_build_skew_trivial():
    P = sk.build_skew(NormalFormParams(0, 0, 0, 0))
    assert P.p(0.5) == 0.5 - 0.25
    assert P.q(0.0, 0.5) == 0.75


def test_build_skew_quadratic_example():
    P = sk.quadratic_example_map(2.0)
    params = sk.validate_normal_form(P)
    assert abs(params.b - B2) < 1e-14
    # numerical value confirmed by evaluating the closed form
    assert abs(B2 - 20.789) < 5e-3


def test_build_skew_historic_degree7_readback():
    P = sk.historic_degree7_map()
    params = sk.validate_normal_form(P)
    assert abs(params.a - 1.0) < 1e-14
    assert abs(params.b - B2) < 1e-12
    assert abs(params.b03 - 1.0) < 1e-14
    # a(z) = B z^2 (1-z)^2 contributes -2B to the z^3 coefficient
    assert abs(params.b30 - (-2.0 * B2)) < 1e-11
    # both fiber fixed points are tangent to the identity with q0'' = 2
    q0 = P.q0()
    for wf in (0.0, 1.0):
        germ = fiber_shifted_germ(P, wf)
        assert abs(germ.coeff(1) - 1.0) < 1e-12
        assert abs(germ.coeff(2) - 1.0) < 1e-12
        assert abs(germ.coeff(3) - 1.0) < 1e-12
    assert abs(q0(1.0) - 1.0) < 1e-12


def test_validate_normal_form_readoff():
    P = sk.build_skew(NormalFormParams(0, 2.0, 0, 0))
    params = sk.validate_normal_form(P)
    assert params.b == 2.0 and params.a == 0 and params.b03 == 0 and params.b30 == 0


def test_validate_normal_form_rejects():
    p = sk.Poly1([0, 1.0, -2.0])
    q = sk.BivariatePoly([[0, 1.0, 1.0]])
    with pytest.raises(NotNormalForm) as err:
        sk.validate_normal_form(sk.SkewMap(p, q))
    assert "z^2" in str(err.value)


def test_characteristic_directions():
    assert sk.characteristic_directions(0.0) == (0.0, -1.0)
    cp, cm = sk.characteristic_directions(0.25)
    assert cp == cm == -0.5
    cp, cm = sk.characteristic_directions(B2)
    c = np.pi / LN2
    assert abs(cp - (-0.5 + 1j * c)) < 1e-12
    assert abs(cm - (-0.5 - 1j * c)) < 1e-12


def test_characteristic_directions_root_property():
    rng = np.random.default_rng(3)
    for _ in range(20):
        b = complex(rng.standard_normal(), rng.standard_normal())
        cp, cm = sk.characteristic_directions(b)
        for r in (cp, cm):
            assert abs(r * r + r + b) < 1e-13
        assert abs(cp + cm + 1.0) < 1e-13
        assert abs(cp * cm - b) < 1e-13


def test_parabolic_curve_jet_low_orders():
    P = sk.quadratic_example_map(2.0)
    params = sk.validate_normal_form(P)
    dc = sk.derived_constants(params)
    cp, _ = sk.characteristic_directions(params.b)
    jet = sk.parabolic_curve_jet(P, +1, 3)
    assert abs(jet.coeffs[1] - cp) < 1e-12
    expected2 = cp * dc.theta + (params.a + (params.b - 1) * params.b03) / 2.0
    assert abs(jet.coeffs[2] - expected2) < 1e-10


def test_parabolic_curve_jet_cubic_terms():
    # map with nonzero a, b03, b30 exercises the general recurrence
    P = sk.build_skew(NormalFormParams(0.3, B2, 0.2, -0.1))
    params = sk.validate_normal_form(P)
    dc = sk.derived_constants(params)
    cp, _ = sk.characteristic_directions(params.b)
    jet = sk.parabolic_curve_jet(P, +1, 2)
    expected2 = cp * dc.theta + (params.a + (params.b - 1) * params.b03) / 2.0
    assert abs(jet.coeffs[2] - expected2) < 1e-10


def _jet_residual(P, jet, order):
    # brute-force substitution: q(z, zeta(z)) - zeta(p(z)) as a polynomial
    from numpy.polynomial import polynomial as npp

    zc = np.zeros(order + 2, dtype=complex)
    zc[: len(jet.coeffs)] = jet.coeffs

    def trunc(a):
        return a[: order + 2]

    qc = P.q.coeffs
    lhs = np.zeros(order + 2, dtype=complex)
    wp = np.zeros(order + 2, dtype=complex)
    wp[0] = 1.0
    for j in range(qc.shape[1]):
        col = np.zeros(order + 2, dtype=complex)
        col[: qc.shape[0]] = qc[:, j]
        lhs = trunc(npp.polyadd(lhs, trunc(npp.polymul(col, wp))))
        wp = trunc(npp.polymul(wp, zc))
    pc = np.array(P.p.coeffs, dtype=complex)
    rhs = np.zeros(order + 2, dtype=complex)
    pw = np.zeros(order + 2, dtype=complex)
    pw[0] = 1.0
    for k in range(len(jet.coeffs)):
        rhs = trunc(npp.polyadd(rhs, jet.coeffs[k] * pw))
        pw = trunc(npp.polymul(pw, pc))
    res = lhs[: order + 1] - rhs[: order + 1]
    return np.max(np.abs(res))


def test_parabolic_curve_jet_residual_order5():
    P = sk.quadratic_example_map(2.0)
    jet = sk.parabolic_curve_jet(P, +1, 5)
    assert _jet_residual(P, jet, 5) < 1e-10


def test_parabolic_curve_jet_residual_random():
    rng = np.random.default_rng(11)
    for _ in range(5):
        a = complex(*rng.standard_normal(2)) * 0.5
        b03 = complex(*rng.standard_normal(2)) * 0.5
        b30 = complex(*rng.standard_normal(2)) * 0.5
        P = sk.build_skew(NormalFormParams(a, 1.7, b03, b30))
        for sign in (+1, -1):
            jet = sk.parabolic_curve_jet(P, sign, 8)
            scale = max(np.abs(jet.coeffs))
            assert _jet_residual(P, jet, 8) < 1e-9 * max(scale, 1.0)


def test_parabolic_curve_jet_degenerate():
    P = sk.build_skew(NormalFormParams(0, 0.25, 0, 0))
    with pytest.raises(DegenerateDirections):
        sk.parabolic_curve_jet(P, +1, 3)


def test_derived_constants_alpha2():
    dc = sk.derived_constants(NormalFormParams(0, B2, 0, 0))
    assert abs(dc.c - np.pi / LN2) < 1e-13
    assert abs(dc.alpha0 - 2.0) < 1e-12
    assert dc.beta0 == 0.0
    assert abs(np.exp(np.pi / dc.c) - dc.alpha0) < 1e-12 * dc.alpha0


def test_derived_constants_golden():
    phi = (1 + np.sqrt(5.0)) / 2
    b = 0.25 + np.pi ** 2 / np.log(phi) ** 2
    dc = sk.derived_constants(NormalFormParams(0, b, 0, 0))
    assert abs(dc.alpha0 - phi) < 1e-11


def test_derived_constants_rejects():
    with pytest.raises(HypothesisViolated):
        sk.derived_constants(NormalFormParams(0, 0.3 + 0.1j, 0, 0))
    with pytest.raises(HypothesisViolated):
        sk.derived_constants(NormalFormParams(0, 0.2, 0, 0))
    # beta0 non-real: b03 - a imaginary
    with pytest.raises(HypothesisViolated):
        sk.derived_constants(NormalFormParams(0, B2, 1j, 0))


def test_derived_constants_beta0_identity():
    dc = sk.derived_constants(NormalFormParams(0.25, B2, 0.5, 0))
    assert dc.beta0 == (0.5 - 0.25) * (dc.alpha0 - 1.0)


def test_iterate_basic():
    P = sk.build_skew(NormalFormParams(0, 0, 0, 0))
    res = sk.iterate(P, (0.3, 0.2), 0, with_derivative=True)
    assert (res.z, res.w) == (0.3, 0.2)
    assert np.allclose(res.jacobian, np.eye(2))
    # skew structure: first coordinate is p^n(z) regardless of w
    r1 = sk.iterate(P, (0.3, 0.2), 5)
    r2 = sk.iterate(P, (0.3, -0.7), 5)
    assert r1.z == r2.z


def test_iterate_three_step_oracle():
    P = sk.build_skew(NormalFormParams(0, 0, 0, 0))
    z, w = 0.5, 0.1
    for _ in range(3):
        z, w = z - z * z, w + w * w
    res = sk.iterate(P, (0.5, 0.1), 3)
    assert abs(res.z - z) < 1e-15 and abs(res.w - w) < 1e-15


def test_iterate_escape_event():
    P = sk.quadratic_example_map(2.0)
    res = sk.iterate(P, (0.0, 3.0), 100)
    assert res.escaped and res.escape_step is not None and res.escape_step <= 100


def test_iterate_jacobian_vs_finite_differences():
    P = sk.quadratic_example_map(2.0)
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(40):
        z = complex(*rng.uniform(-0.2, 0.2, 2))
        w = complex(*rng.uniform(-0.3, 0.1, 2))
        res = sk.iterate(P, (z, w), 6, with_derivative=True)
        if res.escaped or np.max(np.abs(res.jacobian)) > 50:
            continue
        h = 1e-6
        jac_fd = np.zeros((2, 2), dtype=complex)
        for col, dz, dw in ((0, h, 0.0), (1, 0.0, h)):
            rp = sk.iterate(P, (z + dz, w + dw), 6)
            rm = sk.iterate(P, (z - dz, w - dw), 6)
            jac_fd[0, col] = (rp.z - rm.z) / (2 * h)
            jac_fd[1, col] = (rp.w - rm.w) / (2 * h)
        scale = max(np.max(np.abs(res.jacobian)), 1.0)
        assert np.max(np.abs(jac_fd - res.jacobian)) < 1e-5 * scale
        checked += 1
        if checked >= 20:
            break
    assert checked >= 20


def test_json_roundtrip():
    P = sk.historic_degree7_map()
    text = sk.skew_to_json(P)
    Q = sk.skew_from_json(text)
    assert np.allclose(P.p.coeffs, Q.p.coeffs)
    assert np.allclose(P.q.coeffs, Q.q.coeffs)


def test_bivariate_invariants():
    q = sk.BivariatePoly([[0, 1, 1], [0, 0, 0], [2.5, 0, 0]])
    assert q(0.0, 0.0) == 0.0
    assert q.coeff(2, 0) == 2.5
    assert abs(q(0.5, 0.25) - (0.25 + 0.0625 + 2.5 * 0.25)) < 1e-15
