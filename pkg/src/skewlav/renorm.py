"""Renormalization machinery: the constant Gamma, approximate Fatou
coordinates on the eggbeater, passage traces, the Main-Theorem verifier and
historic-behaviour measurements."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import exp1, expi

from .ddouble import DDComplex, dd_coeffs, dd_polyval
from .errors import (
    HypothesisViolated,
    JetOrderInsufficient,
    LeftRectangle,
    OnCut,
    OrbitLeftNeighborhood,
    OutOfRange,
    OutOfStrip,
    OutsideRectangle,
    PrecisionBudgetExceeded,
)
from .fatou import FatouEngine, lavaurs
from .germs import (
    NormalFormParams,
    SkewMap,
    characteristic_directions,
    fiber_shifted_germ,
    parabolic_curve_jet,
    validate_normal_form,
)

EULER_GAMMA = 0.5772156649015328606
DEFAULT_NU = 0.6
DEFAULT_JET_ORDER = 8
JET_TAIL_BOUND = 1e-8


# -- quadrature with logarithmic endpoints -------------------------------------


def _int_exp_log(a, b):
    """int_a^b e^{-u} ln(u) du, 0 <= a < b, via F(x) = -gamma - E1(x) - e^{-x} ln x."""

    def F(x):
        if x == 0.0:
            return 0.0
        return -EULER_GAMMA - exp1(x) - np.exp(-x) * np.log(x)

    return F(b) - F(a)


def _int_expp_log(a, b):
    """int_a^b e^{+t} ln(t) dt, 0 <= a < b, via G(x) = e^x ln x - Ei(x) + gamma."""

    def G(x):
        if x == 0.0:
            return 0.0
        return np.exp(x) * np.log(x) - expi(x) + EULER_GAMMA

    return G(b) - G(a)


def _log_h(y):
    """ln of h(y) = pi sin(y) / (y (pi - y)), analytic and positive on [0, pi]."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    lo = y < np.pi / 2
    # sin(y)/y = sinc(y/pi) in numpy's normalized convention
    out[lo] = np.log(np.pi * np.sinc(y[lo] / np.pi) / (np.pi - y[lo]))
    yh = np.pi - y[~lo]
    out[~lo] = np.log(np.pi * np.sinc(yh / np.pi) / y[~lo])
    return out


def _gauss_smooth(fn, a, b, tol):
    """Gauss-Legendre with node doubling on an analytic integrand."""
    prev = None
    n = 24
    while n <= 3072:
        x, w = np.polynomial.legendre.leggauss(n)
        t = 0.5 * (b - a) * x + 0.5 * (a + b)
        val = 0.5 * (b - a) * np.sum(w * fn(t))
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n *= 2
    return prev


def log_sin_integral(c, a, b, tol=1e-12):
    """int_a^b e^{-u} ln sin(cu) du for 0 <= a < b <= pi/c.

    The integrand is split as ln(cu) + ln((pi-cu)/pi) + ln h(cu) with h
    analytic and positive on the closed interval; the first two parts have
    exponential-integral closed forms, the third is handled by Gauss nodes.
    """
    c = float(c)
    if c <= 0:
        raise OutOfRange("c must be positive")
    top = np.pi / c
    if not (0.0 <= a <= b <= top * (1 + 1e-12)):
        raise OutOfRange(f"[{a}, {b}] not inside [0, {top}]")
    b = min(b, top)
    if a == b:
        return 0.0
    part1 = np.log(c) * (np.exp(-a) - np.exp(-b)) + _int_exp_log(a, b)
    # ln((pi - cu)/pi): substitute v = pi/c - u
    va, vb = top - a, top - b
    part2 = (np.log(c / np.pi) * (np.exp(va) - np.exp(vb))
             + _int_expp_log(vb, va)) * np.exp(-top)
    part3 = _gauss_smooth(lambda u: np.exp(-u) * _log_h(c * u), a, b, tol * 0.1)
    return part1 + part2 + part3


def gamma_constant(params: NormalFormParams, tol=1e-12):
    """The renormalization constant Gamma of the normal form."""
    b = complex(params.b)
    if abs(b.imag) > 1e-9 or b.real <= 0.25:
        raise HypothesisViolated("Gamma requires real b > 1/4")
    c = np.sqrt(4.0 * b.real - 1.0) / 2.0
    alpha0 = np.exp(np.pi / c)
    a, b03, b30 = complex(params.a), complex(params.b03), complex(params.b30)
    integral = log_sin_integral(c, 0.0, np.pi / c, tol=tol)
    return ((alpha0 - 1.0) * ((a - b03 + b30) / (2.0 * b) + a
                              + 0.5 * (1.0 - b03) + (b03 - 1.0) * np.log(c))
            + (b03 - a) * np.pi / c
            + alpha0 * (1.0 - b03) * integral)


# -- F_c and the approximate Fatou coordinate ----------------------------------


def _log_sin_complex(c, u):
    # sin(cu) has positive real part throughout 0 < Re(cu) < pi
    return np.log(np.sin(c * u))


def _adaptive_segment(fn, a, b, tol, depth=0):
    x20, w20 = np.polynomial.legendre.leggauss(20)
    x40, w40 = np.polynomial.legendre.leggauss(40)

    def gauss(x, w):
        t = 0.5 * (b - a) * x + 0.5 * (a + b)
        return 0.5 * (b - a) * np.sum(w * fn(t))

    c20, c40 = gauss(x20, w20), gauss(x40, w40)
    if abs(c40 - c20) < tol or depth >= 24:
        return c40
    m = 0.5 * (a + b)
    return (_adaptive_segment(fn, a, m, tol / 2, depth + 1)
            + _adaptive_segment(fn, m, b, tol / 2, depth + 1))


def F_c(c, W, tol=1e-12):
    """Primitive of e^{-W} cot(cW) on the strip 0 < Re W < pi/c, zero at pi/2c.

    Uses the integration-by-parts form
    F_c(W) = (1/c) e^{-W} Log sin(cW) + (1/c) int_{pi/2c}^{W} e^{-u} Log sin(cu) du
    along the straight segment (the strip is convex).
    """
    c = float(c)
    W = complex(W)
    if not (0.0 < W.real < np.pi / c):
        raise OutOfStrip(f"Re W = {W.real} outside (0, {np.pi / c})")
    mid = np.pi / (2.0 * c)
    delta = W - mid

    def fn(t):
        u = mid + t * delta
        return np.exp(-u) * _log_sin_complex(c, u)

    integral = delta * _adaptive_segment(fn, 0.0, 1.0, tol)
    return (np.exp(-W) * _log_sin_complex(c, W) + integral) / c


# -- psi_z, error functions, approximate Fatou coordinate ----------------------


class StripMap:
    """The coordinate psi_z built from truncated parabolic-curve jets."""

    def __init__(self, P: SkewMap, order=DEFAULT_JET_ORDER, jet_tail_bound=JET_TAIL_BOUND):
        self.P = P
        self.params = validate_normal_form(P)
        b = complex(self.params.b)
        if abs(b.imag) > 1e-9 or b.real <= 0.25:
            raise HypothesisViolated("psi_z requires real b > 1/4")
        self.c = float(np.sqrt(4.0 * b.real - 1.0) / 2.0)
        self.order = order
        self.jet_tail_bound = jet_tail_bound
        self.zeta_plus = parabolic_curve_jet(P, +1, order)
        self.zeta_minus = parabolic_curve_jet(P, -1, order)

    def _check_z(self, z):
        zp = self.zeta_plus
        tail = abs(zp.coeffs[-1] * z ** self.order)
        lead = abs(zp.coeffs[1] * z)
        if lead == 0 or tail > self.jet_tail_bound * lead:
            raise JetOrderInsufficient(
                f"|z| = {abs(z):.3e} too large for jet order {self.order}")

    def zetas(self, z):
        self._check_z(z)
        return self.zeta_plus.eval(z), self.zeta_minus.eval(z)

    def psi(self, z, w, branch="in"):
        """psi_z^{iota/o}(w); branch 'in' adds +pi/2c, 'out' subtracts it."""
        zp, zm = self.zetas(z)
        ratio = (zp - w) / (w - zm)
        if ratio.real < 0 and abs(ratio.imag) <= 1e-300:
            raise OnCut("w on the cut line L_z")
        base = np.log(ratio) / (2j * self.c)
        shift = np.pi / (2.0 * self.c)
        return base + shift if branch == "in" else base - shift

    def psi_inverse(self, z, W):
        """(psi_z^{iota/o})^{-1}(W); the same closed form serves both branches."""
        zp, zm = self.zetas(z)
        E = np.exp(2j * self.c * W)
        return (zp - zm * E) / (1.0 - E)


def error_A0(q0_poly, w):
    """A0(w) = -1/q0(w) + 1/w - 1 as the exact rational form R(w)/S(w) - 1.

    q0 = w S(w) and q0 - w = w^2 R(w); the removable singularity at 0 is gone.
    """
    q = np.asarray(q0_poly.coeffs, dtype=complex)
    S = q[1:]
    R = q[2:]
    w = complex(w)
    num = 0j
    for cc in R[::-1]:
        num = num * w + cc
    den = 0j
    for cc in S[::-1]:
        den = den * w + cc
    return num / den - 1.0


def error_A(P: SkewMap, z, w, strip: StripMap | None = None):
    """A(z,w) = psi_{p(z)} o q_z(w) - psi_z(w) - z via the removable log-ratio form."""
    if strip is None:
        strip = StripMap(P)
    zp, zm = strip.zetas(z)

    def diff_quot(target):
        # (q_z(w) - q_z(t)) / (w - t) as an exact polynomial in (w, t)
        c = P.q.coeffs
        acc = 0j
        for j in range(1, c.shape[1]):
            cj = 0j
            for i in range(c.shape[0] - 1, -1, -1):
                cj = cj * z + c[i, j]
            # sum_{i<j} w^i t^{j-1-i}
            s = 0j
            for i in range(j):
                s += w ** i * target ** (j - 1 - i)
            acc += cj * s
        return acc

    dq_p = diff_quot(zp)
    dq_m = diff_quot(zm)
    return np.log(dq_p / dq_m) / (2j * strip.c) - z


@dataclass
class ApproxFatou:
    """Phi_z = chi_z o psi_z^iota with chi_z(W) = W + (b03-1) c z e^W F_c(W)."""

    P: SkewMap
    nu: float = DEFAULT_NU
    order: int = DEFAULT_JET_ORDER
    quad_tol: float = 1e-12
    strip: StripMap = field(init=False)
    b03: complex = field(init=False)
    c: float = field(init=False)

    def __post_init__(self):
        self.strip = StripMap(self.P, order=self.order)
        self.b03 = complex(self.strip.params.b03)
        self.c = self.strip.c

    def rectangle_contains(self, z, W):
        rz = abs(z) ** (1.0 - self.nu)
        return (rz / 10.0 < W.real < np.pi / self.c - rz / 10.0
                and -0.5 < W.imag < 0.5)

    def R_term(self, z, W):
        return self.c * z * np.exp(W) * F_c(self.c, W, tol=self.quad_tol)

    def chi(self, z, W):
        return W + (self.b03 - 1.0) * self.R_term(z, W)

    def __call__(self, z, w, enforce_rectangle=True):
        W = self.strip.psi(z, w, branch="in")
        if enforce_rectangle and not self.rectangle_contains(z, W):
            raise OutsideRectangle(f"psi_z^iota(w) = {W} outside R_z")
        return self.chi(z, W)

    def a_tilde(self, z, w):
        """Almost-translation error Phi_{p(z)}(q_z(w)) - Phi_z(w) - z."""
        z1 = self.P.p(z)
        w1 = self.P.q(z, w)
        return (self(z1, w1, enforce_rectangle=False)
                - self(z, w, enforce_rectangle=False) - z)


# -- eggbeater trace ------------------------------------------------------------


@dataclass
class EggbeaterTrace:
    n: int
    entries: list            # (j, eps_j, w_j, W_j or None)
    k_n: int
    ell_n: int
    M_n: int
    init_residual: float     # |phi(w_{k_n}) - phi(w_0) - k_n|
    exit_residual: float | None
    sum_identity_error: float
    sumeps_residual: float | None

    def to_csv(self) -> str:
        buf = io.StringIO()
        wcsv = csv.writer(buf)
        wcsv.writerow(["j", "re_eps", "im_eps", "re_w", "im_w", "re_W", "im_W"])
        for j, eps, wv, Wv in self.entries:
            row = [j, eps.real, eps.imag, wv.real, wv.imag]
            row += [Wv.real, Wv.imag] if Wv is not None else ["", ""]
            wcsv.writerow(row)
        return buf.getvalue()


def eggbeater_trace(P: SkewMap, z0, w0, n, j_max=None, nu=DEFAULT_NU,
                    engines=None, approx: ApproxFatou | None = None,
                    strict=False):
    """Trace one near-parabolic passage starting at (p^n(z0), w0).

    Records (j, eps_j, w_j, W_j) with W_j = Phi_{eps_j}(w_j) where the
    rectangle admits it; verifies the entry / exit / summation diagnostics.
    With strict=True, exiting the rectangle in the middle third of the
    passage raises LeftRectangle.
    """
    params = validate_normal_form(P)
    cst_b = complex(params.b)
    c = float(np.sqrt(4.0 * cst_b.real - 1.0) / 2.0)
    alpha0 = float(np.exp(np.pi / c))
    beta0 = float(((params.b03 - params.a) * (alpha0 - 1.0)).real)
    if approx is None:
        approx = ApproxFatou(P, nu=nu)
    if engines is None:
        q0 = P.q0()
        engines = (FatouEngine(P.p), FatouEngine(q0))
    Ep, Eq = engines

    k_n = int(np.floor(n ** nu))
    ell_n = int(np.floor(alpha0 * k_n))
    M_n = int(np.floor((alpha0 - 1.0) * n + beta0 * np.log(n)))
    if j_max is None:
        j_max = M_n

    z = complex(z0)
    for _ in range(n):
        z = P.p(z)
    w = complex(w0)
    entries = []
    Ws = {}
    for j in range(j_max + 1):
        Wv = None
        try:
            Wv = approx(z, w)
            Ws[j] = Wv
        except (OutsideRectangle, JetOrderInsufficient, OnCut):
            if strict and k_n < j < M_n - ell_n:
                raise LeftRectangle(j)
        entries.append((j, z, w, Wv))
        if j < j_max:
            z, w = P.p(z), P.q(z, w)

    # entry residual (Abel transport along the fibered orbit)
    phi0 = Eq.incoming_coord(w0)
    init_res = None
    if k_n <= j_max:
        try:
            init_res = abs(Eq.incoming_coord(entries[k_n][2]) - phi0 - k_n)
        except Exception:
            init_res = float("nan")
    # exit residual
    exit_res = None
    if M_n <= j_max and M_n - ell_n >= 0:
        try:
            exit_res = abs(Eq.outgoing_coord(entries[M_n][2])
                           - Eq.outgoing_coord(entries[M_n - ell_n][2]) - ell_n)
        except Exception:
            exit_res = float("nan")
    # telescoped summation identity of the passage
    sum_err = 0.0
    if k_n in Ws:
        acc = Ws[k_n]
        for j in range(k_n, j_max):
            if j in Ws and j + 1 in Ws:
                eps_j = entries[j][1]
                a_t = approx.a_tilde(eps_j, entries[j][2])
                acc = acc + eps_j + a_t
                sum_err = max(sum_err, abs(acc - Ws[j + 1]))
            else:
                break
    # full lem:sumeps residual n * |W_{k_n} + sum(eps + Lambda eps^2) - pi/c - G_n/n|
    sumeps = None
    j_end = M_n - ell_n
    if k_n in Ws and 0 <= j_end <= j_max:
        a = complex(params.a)
        b03 = complex(params.b03)
        theta = b03 + (a - b03 + complex(params.b30)) / (2 * cst_b)
        lam = theta + 1.0 - 1.5 * b03
        total = Ws[k_n]
        for j in range(k_n, j_end):
            eps_j = entries[j][1]
            total = total + eps_j + lam * eps_j * eps_j
        ainv = 1.0 / alpha0  # e^{-pi/c}
        half = np.pi / (2.0 * c)
        i1 = log_sin_integral(c, 0.0, half)
        e_in = (b03 - 1.0) * (np.log(c) - i1)
        rho_n = ((alpha0 - 1.0) * n + beta0 * np.log(n)) % 1.0
        c_tilde = ((1.0 - a) * ainv * np.pi / c
                   + (1.0 - ainv) * (theta + 1.5 * (1.0 - b03) + (a - 1.0)
                                     - Ep.incoming_coord(z0))
                   + e_in)
        # the k_n^2/(2n) term enters with a minus sign: replacing eps_{k_n}
        # by 1/n in front of the k_n-sized bracket costs -k_n^2/n
        g_n = (-ainv * ell_n - k_n ** 2 / (2.0 * n)
               + (1.0 - b03) * ainv * np.log(n) - ainv * rho_n
               + Eq.incoming_coord(w0) + c_tilde)
        sumeps = float(n * abs(total - np.pi / c - g_n / n))
    return EggbeaterTrace(n=n, entries=entries, k_n=k_n, ell_n=ell_n, M_n=M_n,
                          init_residual=init_res, exit_residual=exit_res,
                          sum_identity_error=sum_err, sumeps_residual=sumeps)


# -- Main Theorem verifier -------------------------------------------------------


@dataclass
class RenormRecord:
    k: int
    n_k: int
    steps: int
    sigma_k: float
    sup_error: float
    mean_error: float
    precision: str


@dataclass
class RenormReport:
    records: list
    grid: list
    constants: dict

    def to_json(self) -> str:
        doc = {
            "constants": self.constants,
            "grid": [[z.real, z.imag, w.real, w.imag] for z, w in self.grid],
            "records": [
                {"k": r.k, "n_k": r.n_k, "steps": r.steps, "sigma_k": r.sigma_k,
                 "sup_error": r.sup_error, "mean_error": r.mean_error,
                 "precision": r.precision}
                for r in self.records
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["k", "n_k", "steps", "sigma_k", "sup_error", "mean_error",
                    "precision"])
        for r in self.records:
            w.writerow([r.k, r.n_k, r.steps, r.sigma_k, r.sup_error,
                        r.mean_error, r.precision])
        return buf.getvalue()

    def sup_errors(self):
        return [r.sup_error for r in self.records]


def _fiber_orbit_double(P: SkewMap, z, w, steps, bailout=1e8):
    for _ in range(steps):
        z, w = P.p(z), P.q(z, w)
        if abs(z) > bailout or abs(w) > bailout:
            return z, w, True
    return z, w, False


def _fiber_orbit_dd(P: SkewMap, z, w, steps):
    prev = dd_coeffs(P.p.coeffs[::-1])
    # q(z,w): Horner in w with z-coefficient polynomials, all in dd
    qc = P.q.coeffs
    zcol_rev = [dd_coeffs(qc[::-1, j]) for j in range(qc.shape[1])]
    zdd = DDComplex.from_complex(z)
    wdd = DDComplex.from_complex(w)
    for _ in range(steps):
        acc = DDComplex()
        for j in range(qc.shape[1] - 1, -1, -1):
            col = dd_polyval(zcol_rev[j], zdd)
            acc = acc * wdd + col
        zdd = dd_polyval(prev, zdd)
        wdd = acc
    return zdd.to_complex(), wdd.to_complex()


def verify_main_theorem(P: SkewMap, seq, grid, k_range=None, precision="double",
                        engines=None, gamma=None, target_tol=1e-6):
    """Compare direct passage iteration with the generalized Lavaurs map.

    For each k: direct = proj2 P^{n_{k+1}-n_k}(p^{n_k}(z), w), reference =
    L(alpha0, Gamma + sigma_k; z, w), sup/mean error over the grid.
    precision: 'double', 'dd', or 'auto' (roundoff-triggered switch).
    """
    params = validate_normal_form(P)
    b = complex(params.b)
    if abs(b.imag) > 1e-9 or b.real <= 0.25:
        raise HypothesisViolated("verifier requires real b > 1/4")
    c = float(np.sqrt(4.0 * b.real - 1.0) / 2.0)
    alpha0 = float(np.exp(np.pi / c))
    beta0_c = complex((params.b03 - params.a) * (alpha0 - 1.0))
    if abs(beta0_c.imag) > 1e-9:
        raise HypothesisViolated("beta0 must be real")
    beta0 = beta0_c.real
    if engines is None:
        engines = (FatouEngine(P.p), FatouEngine(P.q0()))
    Ep, Eq = engines
    if gamma is None:
        gamma = gamma_constant(params)

    terms = list(seq.terms) if hasattr(seq, "terms") else list(seq)
    if k_range is None:
        k_range = range(len(terms) - 1)
    k_list = [k for k in k_range if k + 1 < len(terms)]

    records = []
    # cache of z-orbits: advance each grid z forward between checkpoints
    zstate = {}
    for z, w in grid:
        zstate[(z, w)] = (complex(z), 0)
    for k in k_list:
        n_k, n_k1 = terms[k], terms[k + 1]
        steps = n_k1 - n_k
        sigma_k = n_k1 - alpha0 * n_k - beta0 * np.log(n_k)
        # roundoff heuristic: each step multiplies error by |dq/dw| ~ 1
        est = steps * np.finfo(float).eps * 8.0
        use = precision
        if precision == "auto":
            use = "dd" if est > 0.1 * target_tol else "double"
        if use == "dd" and steps * 5e-32 > target_tol:
            raise PrecisionBudgetExceeded(steps * 5e-32, target_tol)
        errs = []
        for z, w in grid:
            zc, at = zstate[(z, w)]
            while at < n_k:
                zc = P.p(zc)
                at += 1
            zstate[(z, w)] = (zc, at)
            if use == "dd":
                _, direct = _fiber_orbit_dd(P, zc, complex(w), steps)
            else:
                _, direct, escaped = _fiber_orbit_double(P, zc, complex(w), steps)
                if escaped:
                    errs.append(float("inf"))
                    continue
            ref = lavaurs(Ep, Eq, Eq, alpha0, gamma + sigma_k, complex(z), complex(w))
            errs.append(abs(direct - ref))
        errs = np.array(errs)
        records.append(RenormRecord(k=k, n_k=n_k, steps=steps, sigma_k=float(sigma_k),
                                    sup_error=float(np.max(errs)),
                                    mean_error=float(np.mean(errs)), precision=use))
    constants = {"alpha0": alpha0, "beta0": beta0, "c": c,
                 "gamma": [complex(gamma).real, complex(gamma).imag]}
    return RenormReport(records=records, grid=[(complex(z), complex(w)) for z, w in grid],
                        constants=constants)


# -- historic behaviour ----------------------------------------------------------


@dataclass
class HistoricFixedPoint:
    w: complex
    alpha: float
    beta: float
    gamma: complex
    params: NormalFormParams


def historic_fixed_point_data(P: SkewMap, w_fix) -> HistoricFixedPoint:
    """Local normal-form data and constants at a fixed point (0, w_fix)."""
    qc = P.q.coeffs
    # shift the full bivariate in w: q(z, w_fix + s) - w_fix
    from math import comb

    ni, nj = qc.shape
    shifted = np.zeros((ni, nj), dtype=complex)
    for j in range(nj):
        for kk in range(j + 1):
            shifted[:, kk] += qc[:, j] * comb(j, kk) * w_fix ** (j - kk)
    shifted[0, 0] -= w_fix
    from .germs import BivariatePoly

    local = SkewMap(P.p, BivariatePoly(shifted))
    params = validate_normal_form(local)
    b = complex(params.b)
    if abs(b.imag) > 1e-9 or b.real <= 0.25:
        raise HypothesisViolated(f"fixed point {w_fix}: b = {b}")
    c = float(np.sqrt(4.0 * b.real - 1.0) / 2.0)
    alpha = float(np.exp(np.pi / c))
    beta = float(((params.b03 - params.a) * (alpha - 1.0)).real)
    return HistoricFixedPoint(w=complex(w_fix), alpha=alpha, beta=beta,
                              gamma=gamma_constant(params), params=params)


@dataclass
class HistoricReport:
    checkpoints: list  # (k, n, mass_w1, mass_w2, elsewhere)
    delta: float
    expected_even: tuple
    expected_odd: tuple

    def to_json(self):
        return json.dumps({
            "delta": self.delta,
            "expected_even": list(self.expected_even),
            "expected_odd": list(self.expected_odd),
            "checkpoints": [
                {"k": k, "n": n, "mass_w1": m1, "mass_w2": m2, "elsewhere": e}
                for k, n, m1, m2, e in self.checkpoints
            ],
        }, sort_keys=True, indent=1)


def historic_measures(P: SkewMap, fixed_points, start, n0, K, delta=0.05,
                      bailout=1e8):
    """Empirical-measure masses near two parabolic fixed points.

    fixed_points: (w1, w2) with integer alpha_i and beta_i = 0; the checkpoint
    sequence alternates n_{k+1} = alpha_1 n_k (k even), alpha_2 n_k (k odd).
    start = (z, w) is the orbit point at absolute time n0.
    """
    d1 = historic_fixed_point_data(P, fixed_points[0])
    d2 = historic_fixed_point_data(P, fixed_points[1])
    a1, a2 = round(d1.alpha), round(d2.alpha)
    if abs(d1.alpha - a1) > 1e-9 or abs(d2.alpha - a2) > 1e-9:
        raise HypothesisViolated("alpha_i must be integers for the historic run")
    terms = [n0]
    for k in range(K):
        terms.append(terms[-1] * (a1 if k % 2 == 0 else a2))
    w1, w2 = complex(fixed_points[0]), complex(fixed_points[1])
    mu12 = (a1 * a2 - a2) / (a1 * a2 - 1.0)
    expected_even = (mu12, (a2 - 1.0) / (a1 * a2 - 1.0))
    expected_odd = ((a1 - 1.0) / (a1 * a2 - 1.0), (a1 * a2 - a1) / (a1 * a2 - 1.0))

    z, w = complex(start[0]), complex(start[1])
    near1 = near2 = 0
    t = n0
    checkpoints = []
    kset = {n: i for i, n in enumerate(terms)}
    while t < terms[-1]:
        z, w = P.p(z), P.q(z, w)
        t += 1
        if abs(z) > bailout or abs(w) > bailout:
            raise OrbitLeftNeighborhood(f"orbit escaped at absolute time {t}")
        if abs(z) < delta and abs(w - w1) < delta:
            near1 += 1
        elif abs(z) < delta and abs(w - w2) < delta:
            near2 += 1
        if t in kset:
            m1, m2 = near1 / t, near2 / t
            checkpoints.append((kset[t], t, m1, m2, 1.0 - m1 - m2))
    return HistoricReport(checkpoints=checkpoints, delta=delta,
                          expected_even=expected_even, expected_odd=expected_odd)
