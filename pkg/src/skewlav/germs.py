"""Polynomial skew-products tangent to the identity and their local data.

The maps handled here are P(z,w) = (p(z), q(z,w)) with
p(z) = z - z^2 + a z^3 + O(z^4) and
q(z,w) = w + w^2 + b z^2 + b03 w^3 + b30 z^3 + O(||(z,w)||^4).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDirections,
    HypothesisViolated,
    LinearSystemSingular,
    NotNormalForm,
)
from .jets import Jet

NF_TOL = 1e-12          # absolute tolerance for normal-form coefficient checks
DEFAULT_BAILOUT = 1e8   # escape radius per coordinate


class Poly1:
    """Univariate polynomial, coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=complex)
        n = len(c)
        while n > 1 and c[n - 1] == 0:
            n -= 1
        c = c[:n]
        if len(c) < 2 or c[-1] == 0:
            raise ValueError("Poly1 needs degree >= 1 with nonzero leading coefficient")
        self.coeffs = c

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, z):
        acc = np.zeros_like(np.asarray(z, dtype=complex))
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc if acc.shape else complex(acc)

    def deriv(self):
        c = self.coeffs[1:] * np.arange(1, len(self.coeffs))
        return Poly1(c)

    def coeff(self, k):
        return complex(self.coeffs[k]) if k < len(self.coeffs) else 0.0 + 0.0j

    def jet(self, order):
        return Jet(self.coeffs, order)

    def __repr__(self):
        return f"Poly1({list(self.coeffs)})"


class BivariatePoly:
    """Dense bivariate polynomial: coeffs[i][j] multiplies z^i w^j."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
        self.coeffs = c

    def coeff(self, i, j):
        c = self.coeffs
        if i < c.shape[0] and j < c.shape[1]:
            return complex(c[i, j])
        return 0.0 + 0.0j

    def __call__(self, z, w):
        # Horner in w, with z-polynomial coefficients evaluated by Horner.
        c = self.coeffs
        acc = np.zeros_like(np.asarray(w, dtype=complex))
        for j in range(c.shape[1] - 1, -1, -1):
            col = np.zeros_like(np.asarray(z, dtype=complex))
            for i in range(c.shape[0] - 1, -1, -1):
                col = col * z + c[i, j]
            acc = acc * w + col
        return acc if acc.shape else complex(acc)

    def dw(self):
        """Partial derivative in w."""
        c = self.coeffs
        if c.shape[1] == 1:
            return BivariatePoly(np.zeros((1, 1)))
        return BivariatePoly(c[:, 1:] * np.arange(1, c.shape[1]))

    def dz(self):
        c = self.coeffs
        if c.shape[0] == 1:
            return BivariatePoly(np.zeros((1, 1)))
        return BivariatePoly(c[1:, :] * np.arange(1, c.shape[0])[:, None])

    def w_slice_jets(self, order: int) -> list:
        """Coefficient of w^j as a Jet in z, for each j."""
        c = self.coeffs
        return [Jet([c[i, j] for i in range(c.shape[0])], order)
                for j in range(c.shape[1])]

    def __repr__(self):
        return f"BivariatePoly({self.coeffs.tolist()})"


@dataclass(frozen=True)
class NormalFormParams:
    a: complex
    b: complex
    b03: complex
    b30: complex


@dataclass(frozen=True)
class SkewMap:
    p: Poly1
    q: BivariatePoly

    def __post_init__(self):
        if abs(self.q.coeff(0, 0)) > NF_TOL:
            raise ValueError("q(0,0) must vanish")
        if abs(self.q.coeff(0, 1) - 1.0) > NF_TOL:
            raise ValueError("dq/dw(0,0) must equal 1 (tangent to identity in w)")

    def __call__(self, z, w):
        return self.p(z), self.q(z, w)

    def q0(self) -> Poly1:
        """Fiber polynomial over z = 0."""
        return Poly1(self.q.coeffs[0, :])


@dataclass(frozen=True)
class DerivedConstants:
    c: float
    alpha0: float
    beta0: float
    theta: complex
    lambda_const: complex
    e_in: complex
    e_out: complex
    gamma: complex
    frak_b_p: complex
    frak_b_q0: complex

    def as_dict(self):
        def enc(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            return v

        return {k: enc(getattr(self, k)) for k in (
            "c", "alpha0", "beta0", "theta", "lambda_const",
            "e_in", "e_out", "gamma", "frak_b_p", "frak_b_q0")}


def build_skew(params: NormalFormParams, extra_p=None, extra_q=None) -> SkewMap:
    """Assemble the normal-form map, appending optional higher-order terms.

    extra_p: dict {degree: coeff} with degree >= 4.
    extra_q: dict {(i, j): coeff} with i + j >= 4.
    """
    pdeg = 3
    if extra_p:
        pdeg = max(pdeg, max(extra_p))
    pc = np.zeros(pdeg + 1, dtype=complex)
    pc[1], pc[2], pc[3] = 1.0, -1.0, params.a
    if extra_p:
        for k, v in extra_p.items():
            if k < 4:
                raise ValueError("extra_p entries must have degree >= 4")
            pc[k] = v
    qi, qj = 3, 3
    if extra_q:
        qi = max(qi, max(i for i, _ in extra_q))
        qj = max(qj, max(j for _, j in extra_q))
    qc = np.zeros((qi + 1, qj + 1), dtype=complex)
    qc[0, 1] = 1.0
    qc[0, 2] = 1.0
    qc[2, 0] = params.b
    qc[0, 3] = params.b03
    qc[3, 0] = params.b30
    if extra_q:
        for (i, j), v in extra_q.items():
            if i + j < 4:
                raise ValueError("extra_q entries must have total degree >= 4")
            qc[i, j] = v
    return SkewMap(Poly1(pc), BivariatePoly(qc))


def validate_normal_form(P: SkewMap, tol: float = NF_TOL) -> NormalFormParams:
    """Read off (a, b, b03, b30), checking every constrained low-order coefficient."""
    checks = [
        ("p: constant term", P.p.coeff(0), 0.0),
        ("p: z coefficient", P.p.coeff(1), 1.0),
        ("p: z^2 coefficient", P.p.coeff(2), -1.0),
        ("q: constant term", P.q.coeff(0, 0), 0.0),
        ("q: w coefficient", P.q.coeff(0, 1), 1.0),
        ("q: w^2 coefficient", P.q.coeff(0, 2), 1.0),
        ("q: z coefficient", P.q.coeff(1, 0), 0.0),
        ("q: zw coefficient", P.q.coeff(1, 1), 0.0),
        ("q: z^2 w coefficient", P.q.coeff(2, 1), 0.0),
        ("q: z w^2 coefficient", P.q.coeff(1, 2), 0.0),
    ]
    for what, got, expected in checks:
        if abs(got - expected) > tol:
            raise NotNormalForm(what, expected, got)
    return NormalFormParams(
        a=P.p.coeff(3), b=P.q.coeff(2, 0), b03=P.q.coeff(0, 3), b30=P.q.coeff(3, 0)
    )


def characteristic_directions(b):
    """Roots (c_plus, c_minus) of u^2 + u + b = 0.

    For b > 1/4, c_plus is the root with positive imaginary part
    (c_pm = -1/2 +- i c).  Otherwise roots are ordered by imaginary
    part, ties broken by real part.
    """
    disc = 1.0 - 4.0 * complex(b)
    s = np.sqrt(disc)
    r1 = (-1.0 + s) / 2.0
    r2 = (-1.0 - s) / 2.0
    if (r1.imag, r1.real) >= (r2.imag, r2.real):
        return r1, r2
    return r2, r1


def parabolic_curve_jet(P: SkewMap, sign: int, order: int) -> Jet:
    """Jet of the parabolic curve zeta^sign solving q_z(zeta(z)) = zeta(p(z)).

    sign = +1 or -1 selects the characteristic direction c^+ or c^-.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    params_b = P.q.coeff(2, 0)
    cp, cm = characteristic_directions(params_b)
    if abs(cp - cm) < 1e-14:
        raise DegenerateDirections("b = 1/4: coincident characteristic directions")
    c1 = cp if sign > 0 else cm
    N = order
    work = N + 1  # residual is matched through order N+1
    zeta = Jet([0.0, c1], work)
    p_jet = P.p.jet(work)
    wcols = P.q.w_slice_jets(work)

    def residual(zj: Jet) -> Jet:
        # q(z, zeta(z)) - zeta(p(z)), both truncated at `work`
        acc = Jet.constant(0.0, work)
        pw = Jet.constant(1.0, work)
        for col in wcols:
            acc = acc + col * pw
            pw = pw * zj
        return acc - zj.compose(p_jet)

    for m in range(2, N + 1):
        res = residual(zeta)
        denom = 2.0 * c1 + m
        if abs(denom) < 1e-13:
            raise LinearSystemSingular(m)
        coef = -res.coeffs[m + 1] / denom
        add = np.zeros(work + 1, dtype=complex)
        add[m] = coef
        zeta = zeta + Jet(add, work)
    return zeta.truncate(order)


@dataclass
class IterateResult:
    z: complex
    w: complex
    steps: int
    escaped: bool
    escape_step: int | None
    jacobian: np.ndarray | None


def iterate(P: SkewMap, start, n: int, with_derivative: bool = False,
            bailout: float = DEFAULT_BAILOUT) -> IterateResult:
    """Apply P n times from start = (z, w); optionally accumulate the Jacobian.

    Crossing the bailout is reported as an escape event (not an error).
    """
    z, w = complex(start[0]), complex(start[1])
    jac = np.eye(2, dtype=complex) if with_derivative else None
    dp = P.p.deriv()
    dqz = P.q.dz()
    dqw = P.q.dw()
    for k in range(n):
        if abs(z) > bailout or abs(w) > bailout:
            return IterateResult(z, w, k, True, k, jac)
        if with_derivative:
            step = np.array(
                [[dp(z), 0.0], [dqz(z, w), dqw(z, w)]], dtype=complex
            )
            jac = step @ jac
        z, w = P.p(z), P.q(z, w)
    escaped = abs(z) > bailout or abs(w) > bailout
    return IterateResult(z, w, n, escaped, n if escaped else None, jac)


def derived_constants(params: NormalFormParams, tol: float = 1e-9,
                      quad_tol: float = 1e-12) -> DerivedConstants:
    """All analytic constants attached to the normal form.

    Requires Re b > 1/4 with b and beta0 real within tol.
    """
    b = complex(params.b)
    if abs(b.imag) > tol:
        raise HypothesisViolated(f"b must be real (Im b = {b.imag:.3e})")
    if b.real <= 0.25:
        raise HypothesisViolated(f"b must exceed 1/4 (b = {b.real})")
    c = float(np.sqrt(4.0 * b.real - 1.0) / 2.0)
    alpha0 = float(np.exp(np.pi / c))
    beta0_c = (params.b03 - params.a) * (alpha0 - 1.0)
    beta0_c = complex(beta0_c)
    if abs(beta0_c.imag) > tol:
        raise HypothesisViolated(
            f"beta0 must be real (Im beta0 = {beta0_c.imag:.3e})"
        )
    a, b03, b30 = complex(params.a), complex(params.b03), complex(params.b30)
    theta = b03 + (a - b03 + b30) / (2.0 * b)
    lam = theta + 1.0 - 1.5 * b03

    from .renorm import gamma_constant, log_sin_integral  # quadrature lives there

    half = np.pi / (2.0 * c)
    i1 = log_sin_integral(c, 0.0, half, tol=quad_tol)
    i2 = log_sin_integral(c, half, 2.0 * half, tol=quad_tol)
    e_in = (b03 - 1.0) * (np.log(c) - i1)
    e_out = (1.0 - b03) * (np.pi / c - np.log(c) - alpha0 * i2)
    gamma = gamma_constant(params, tol=quad_tol)
    return DerivedConstants(
        c=c, alpha0=alpha0, beta0=float(beta0_c.real), theta=theta,
        lambda_const=lam, e_in=e_in, e_out=e_out, gamma=gamma,
        frak_b_p=1.0 - a, frak_b_q0=1.0 - b03,
    )


def quadratic_example_b(alpha0: float) -> float:
    """b so that the quadratic normal form has renormalization factor alpha0."""
    if alpha0 <= 1.0:
        raise HypothesisViolated("alpha0 must exceed 1")
    return 0.25 + np.pi ** 2 / np.log(alpha0) ** 2


def quadratic_example_map(alpha0: float) -> SkewMap:
    """The quadratic family (z - z^2, w + w^2 + b z^2) with given alpha0."""
    return build_skew(NormalFormParams(0.0, quadratic_example_b(alpha0), 0.0, 0.0))


def historic_degree7_map() -> SkewMap:
    """Degree-7 skew-product with two tangent-to-identity fixed points (0,0), (0,1).

    p = z - z^2 + z^3 + z^7, q = q0(w) + B z^2 (1-z)^2 with B = 1/4 + pi^2/ln(2)^2
    and q0 = w + w^2 + w^3 - 10 w^4 + 15 w^5 - 9 w^6 + 2 w^7, so that at both
    fixed points the local data read (a=1, b=B, b03=1, b30=-2B): alpha = 2 and
    beta = 0 at each.
    """
    B = quadratic_example_b(2.0)
    p = Poly1([0, 1.0, -1.0, 1.0, 0, 0, 0, 1.0])
    qc = np.zeros((5, 8), dtype=complex)
    qc[0, :] = [0, 1.0, 1.0, 1.0, -10.0, 15.0, -9.0, 2.0]
    qc[2, 0] = B
    qc[3, 0] = -2.0 * B
    qc[4, 0] = B
    return SkewMap(p, BivariatePoly(qc))


def fiber_shifted_germ(P: SkewMap, w_fix: complex) -> Poly1:
    """Local fiber germ s -> q0(w_fix + s) - w_fix at a fixed point (0, w_fix)."""
    q0 = P.q0()
    n = len(q0.coeffs)
    from math import comb

    out = np.zeros(n, dtype=complex)
    for j in range(n):
        cj = q0.coeffs[j]
        for k in range(j + 1):
            out[k] += cj * comb(j, k) * w_fix ** (j - k)
    out[0] -= w_fix
    if abs(out[0]) > 1e-9:
        raise NotNormalForm("fixed point", 0.0, out[0])
    return Poly1(out)


def skew_to_json(P: SkewMap) -> str:
    enc = lambda c: [c.real, c.imag]
    doc = {
        "p": [enc(complex(v)) for v in P.p.coeffs],
        "q": [[enc(complex(v)) for v in row] for row in P.q.coeffs],
    }
    return json.dumps(doc, sort_keys=True)


def skew_from_json(text: str) -> SkewMap:
    doc = json.loads(text)
    p = Poly1([complex(re, im) for re, im in doc["p"]])
    q = BivariatePoly([[complex(re, im) for re, im in row] for row in doc["q"]])
    return SkewMap(p, q)


def params_to_json(params: NormalFormParams) -> str:
    enc = lambda c: [complex(c).real, complex(c).imag]
    return json.dumps({k: enc(getattr(params, k)) for k in ("a", "b", "b03", "b30")},
                      sort_keys=True)


def params_from_json(text: str) -> NormalFormParams:
    doc = json.loads(text)
    dec = lambda v: complex(v[0], v[1])
    return NormalFormParams(dec(doc["a"]), dec(doc["b"]), dec(doc["b03"]), dec(doc["b30"]))
