"""Numerical Fatou coordinates for 1-D parabolic germs, horn and Lavaurs maps.

The machinery works in the repelling/attracting coordinate u = -1/(a2 w).
The Abel equation phi(f(w)) = phi(w) + 1 has a formal solution

    phi(u) = u - frakb * log(u) + sum_{k>=1} gamma_k u^{-k},

with frakb = 1 - a3/a2^2 and the gamma_k determined by a triangular linear
system from the germ's jet.  The series is asymptotic on the petals: the
incoming branch uses Log(u), the outgoing branch Log(-u), both principal.
Truncated at order m it leaves O(|u|^{-m-1}) error, so a short orbit into
|u| > u_eval followed by one series evaluation gives near machine-precision
coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AtPuncture,
    ExitedDomain,
    InverseBranchLost,
    NoConvergence,
    NotInBasin,
    NotInOutgoingPetal,
    OutOfHalfPlane,
    OutsideDomain,
)
from .germs import Poly1

DEFAULT_SERIES_ORDER = 10
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10 ** 6
DEFAULT_R0 = 20.0
DEFAULT_BAILOUT = 1e8


def abel_series(fcoeffs, m):
    """Coefficients gamma_1..gamma_m of the formal Abel solution.

    fcoeffs: coefficients of f lowest-first, f = w + a2 w^2 + ..., a2 != 0.
    Works in the variable t = 1/u; all the intermediate series are plain
    power series (no log-polynomial terms arise: the recurrence right-hand
    sides stay constant in log u).
    """
    fc = np.asarray(fcoeffs, dtype=complex)
    if len(fc) < 3 or fc[1] != 1.0 or fc[2] == 0:
        raise ValueError("germ must be w + a2 w^2 + ... with a2 != 0")
    a2 = fc[2]
    M = m + 3

    def mul(a, b):
        out = np.zeros(M + 1, dtype=complex)
        for i in range(M + 1):
            if a[i] != 0:
                out[i:] += a[i] * b[: M + 1 - i]
        return out

    # f(w) = (-t/a2)(1 + g(t)) with w = -t/a2
    g = np.zeros(M + 1, dtype=complex)
    for j in range(2, len(fc)):
        k = j - 1
        if k <= M:
            g[k] = fc[j] * (-1.0 / a2) ** (j - 1)
    # F/u = (1+g)^{-1} =: c(t);  F = u + 1 + sum_k c_{k+1} t^k
    c = np.zeros(M + 1, dtype=complex)
    c[0] = 1.0
    for k in range(1, M + 1):
        c[k] = -np.dot(g[1 : k + 1], c[k - 1 :: -1][: k])
    frakb = c[2]
    # log(F/u)
    h = c.copy()
    h[0] = 0.0
    logs = np.zeros(M + 1, dtype=complex)
    hp = h.copy()
    sign = 1.0
    for n in range(1, M + 1):
        logs += sign / n * hp
        hp = mul(hp, h)
        sign = -sign
    # N(t) = (F - u - 1) - frakb log(F/u)
    N = np.zeros(M + 1, dtype=complex)
    N[1:M] = c[2 : M + 1]
    N -= frakb * logs
    # E_k(t) = t^k ((1+g)^k - 1); solve sum gamma_k E_k = -N triangularly
    onepg = np.zeros(M + 1, dtype=complex)
    onepg[0] = 1.0
    onepg[1:] = g[1:]
    Ek = []
    pw = np.zeros(M + 1, dtype=complex)
    pw[0] = 1.0
    for _ in range(m):
        pw = mul(pw, onepg)
        ek = pw.copy()
        ek[0] -= 1.0
        Ek.append(ek)
    gamma = np.zeros(m + 1, dtype=complex)
    for j in range(2, m + 2):
        s = N[j]
        for k in range(1, j - 1):
            s += gamma[k] * Ek[k - 1][j - k]
        gamma[j - 1] = s / (j - 1)
    return a2, frakb, gamma[1:]


@dataclass(frozen=True)
class HornValue:
    value: complex
    branch_index: int


class FatouEngine:
    """Incoming/outgoing Fatou coordinates of one parabolic germ.

    Normalization: phi^iota(w) = u - frakb Log(u) + o(1) and
    phi^o(w) = u - frakb Log(-u) + o(1) with u = -1/(a2 w), matching the
    conventions under which the renormalization constant is assembled.
    """

    def __init__(self, f, series_order=DEFAULT_SERIES_ORDER, tol=DEFAULT_TOL,
                 max_iter=DEFAULT_MAX_ITER, petal_radius=None, r0=DEFAULT_R0,
                 bailout=DEFAULT_BAILOUT):
        if isinstance(f, Poly1):
            coeffs = f.coeffs
        else:
            coeffs = np.asarray(f, dtype=complex)
        if len(coeffs) > 0 and coeffs[0] != 0:
            raise ValueError("germ must fix the origin")
        self.f = Poly1(coeffs)
        self._rev = np.array(coeffs[::-1], dtype=complex)
        self._drev = np.array(self.f.deriv().coeffs[::-1], dtype=complex)
        self.a2 = complex(coeffs[2]) if len(coeffs) > 2 else 0.0
        self.a3 = complex(coeffs[3]) if len(coeffs) > 3 else 0.0
        if self.a2 == 0:
            raise ValueError("a2 must be nonzero (multiplicity-2 parabolic germ)")
        _, self.frakb, self.gamma = abel_series(coeffs, series_order)
        self.series_order = series_order
        self.tol = float(tol)
        self.max_iter = int(max_iter)
        self.r0 = float(r0)
        self.bailout = float(bailout)
        self.petal_radius = self._fit_petal(petal_radius)
        # series evaluation threshold: truncation tail below 0.01*tol
        tail = abs(self.gamma[-1]) if len(self.gamma) else 1.0
        need = (max(tail, 1.0) / (0.01 * self.tol)) ** (1.0 / (series_order + 1))
        self.u_eval = max(30.0, self.r0 + 10.0, float(need))

    # -- petal geometry in u = -1/(a2 w):  P^iota = {Re u > 1/(2r)} ----------

    def _fit_petal(self, r):
        if r is not None:
            return float(r)
        r = 0.25
        for _ in range(8):
            if self._petal_invariant(r):
                return r
            r *= 0.5
        raise ValueError("could not find a forward-invariant incoming petal")

    def _petal_invariant(self, r):
        for t in np.linspace(0, 2 * np.pi, 33)[:-1]:
            w = (-r + 0.999 * r * np.exp(1j * t)) / self.a2
            if w == 0:
                continue
            fw = self.f(w)
            if abs(self.a2 * fw + r) >= r:
                return False
        return True

    def u_of(self, w):
        return -1.0 / (self.a2 * w)

    def apply(self, w):
        acc = 0j
        for c in self._rev:
            acc = acc * w + c
        return acc

    def dapply(self, w):
        acc = 0j
        for c in self._drev:
            acc = acc * w + c
        return acc

    def _phi_series(self, u, outgoing=False):
        val = u - self.frakb * (np.log(-u) if outgoing else np.log(u))
        up = 1.0 + 0j
        for g in self.gamma:
            up = up / u
            val += g * up
        return val

    def _dphi_series_du(self, u):
        val = 1.0 - self.frakb / u
        up = 1.0 + 0j
        for k, g in enumerate(self.gamma, start=1):
            up = up / u
            val -= k * g * up / u
        return val

    def _phi_series_w(self, w, outgoing=False):
        return self._phi_series(self.u_of(w), outgoing)

    def _dphi_series_dw(self, w):
        u = self.u_of(w)
        return self._dphi_series_du(u) * (self.a2 * u * u)

    def _in_eval_region(self, u):
        return u.real > self.u_eval and abs(u.imag) < u.real

    # -- incoming ------------------------------------------------------------

    def incoming_coord(self, w, with_derivative=False):
        """phi^iota(w) for w in the parabolic basin."""
        w = complex(w)
        if w == 0:
            raise NotInBasin("the fixed point itself has no Fatou coordinate")
        n = 0
        deriv = 1.0 + 0j
        prev_est = None
        while True:
            u = self.u_of(w)
            if self._in_eval_region(u):
                est = self._phi_series(u) - n
                if prev_est is not None and abs(est - prev_est) < self.tol:
                    if with_derivative:
                        return est, self._dphi_series_dw(w) * deriv
                    return est
                prev_est = est
            if n >= self.max_iter:
                if prev_est is not None:
                    raise NoConvergence("incoming estimate not settling",
                                        last_delta=abs(est - prev_est))
                raise NotInBasin(f"orbit did not reach the petal in {n} steps")
            if abs(w) > self.bailout:
                raise NotInBasin("orbit escaped to infinity")
            if with_derivative:
                deriv *= self.dapply(w)
            w = self.apply(w)
            n += 1

    def incoming_coord_inverse(self, Z):
        """Point z in the petal with phi^iota(z) = Z; requires Re Z > r0."""
        Z = complex(Z)
        if Z.real <= self.r0:
            raise OutOfHalfPlane(f"Re Z = {Z.real} <= R0 = {self.r0}")
        u = Z
        for _ in range(100):
            val = self._phi_series(u) - Z
            du = self._dphi_series_du(u)
            step = val / du
            u -= step
            if abs(step) <= 1e-15 * max(1.0, abs(u)):
                break
        return -1.0 / (self.a2 * u)

    # -- outgoing ------------------------------------------------------------

    def _outgoing_seed(self, X):
        """Newton solve phi^o_series(u) = X in the left half-plane."""
        u = X
        for _ in range(100):
            val = self._phi_series(u, outgoing=True) - X
            du = self._dphi_series_du(u)
            step = val / du
            u -= step
            if abs(step) <= 1e-15 * max(1.0, abs(u)):
                break
        return -1.0 / (self.a2 * u)

    def _outgoing_shift(self, Z):
        return max(0, int(np.floor(Z.real + self.r0)) + 1)

    def outgoing_param(self, Z, with_derivative=False):
        """Value of the entire outgoing Fatou parametrization psi^o at Z."""
        Z = complex(Z)
        n = self._outgoing_shift(Z)
        w = self._outgoing_seed(Z - n)
        if with_derivative:
            d = 1.0 / self._dphi_series_dw(w)
            for _ in range(n):
                d *= self.dapply(w)
                w = self.apply(w)
            return w, d
        for _ in range(n):
            w = self.apply(w)
        return w

    def outgoing_param_check(self, Z):
        """Agreement of the n and n+1 evaluation depths (should be ~tol)."""
        Z = complex(Z)
        n = self._outgoing_shift(Z)
        w1 = self._outgoing_seed(Z - n)
        for _ in range(n):
            w1 = self.apply(w1)
        w2 = self._outgoing_seed(Z - n - 1)
        for _ in range(n + 1):
            w2 = self.apply(w2)
        return abs(w1 - w2)

    def outgoing_coord(self, w):
        """phi^o(w) for w in the outgoing petal, by backward iteration."""
        w = complex(w)
        thresh = 1.0 / (2.0 * self.petal_radius)
        u = self.u_of(w)
        if not (u.real < -thresh):
            raise NotInOutgoingPetal(f"u = {u} not in the outgoing petal")
        m = 0
        x = w
        while not (-u.real > self.u_eval and abs(u.imag) < -u.real):
            # inverse branch: solve f(y) = x near y = x
            y = x
            for _ in range(60):
                step = (self.apply(y) - x) / self.dapply(y)
                y -= step
                if abs(step) <= 1e-16 * max(1.0, abs(y)):
                    break
            uy = self.u_of(y)
            if not (uy.real < u.real + 0.5):
                raise InverseBranchLost(f"backward step left the petal at m={m}")
            x, u = y, uy
            m += 1
            if m > self.max_iter:
                raise NoConvergence("backward orbit not reaching eval region")
        return self._phi_series(u, outgoing=True) + m

    # -- basin ---------------------------------------------------------------

    def basin_membership(self, w, budget=None):
        member, _ = self.basin_membership_detail(w, budget)
        return member

    def basin_membership_detail(self, w, budget=None):
        """(member, undecided): orbit enters the incoming petal within budget."""
        w = complex(w)
        budget = self.max_iter if budget is None else int(budget)
        thresh = 1.0 / (2.0 * self.petal_radius)
        for _ in range(budget):
            if w == 0:
                return False, False
            u = self.u_of(w)
            if u.real > thresh:
                return True, False
            if abs(w) > self.bailout:
                return False, False
            w = self.apply(w)
        return False, True


# -- horn map -----------------------------------------------------------------


def lifted_horn(Ein: FatouEngine, Eout: FatouEngine, W, normalize=False):
    """Lifted horn map E(W) = phi^iota(psi^o(W)) on U_{q0}.

    With normalize=True the argument is translated into the fundamental
    strip 0 < Re W <= 1 first and the value translated back; branch_index
    records the integer translation applied.
    """
    W = complex(W)
    k = 0
    Weval = W
    if normalize:
        k = int(np.ceil(W.real)) - 1
        Weval = W - k
    w = Eout.outgoing_param(Weval)
    try:
        val = Ein.incoming_coord(w)
    except NotInBasin as exc:
        raise OutsideDomain(f"psi^o(W) outside the parabolic basin: {exc}") from exc
    return HornValue(value=val + k, branch_index=k)


def horn_derivative(Ein: FatouEngine, Eout: FatouEngine, W):
    """dE/dW by the chain rule through both engines."""
    W = complex(W)
    w, dpsi = Eout.outgoing_param(W, with_derivative=True)
    try:
        _, dphi = Ein.incoming_coord(w, with_derivative=True)
    except NotInBasin as exc:
        raise OutsideDomain(str(exc)) from exc
    return dphi * dpsi


def lavaurs(Ep: FatouEngine, Ein: FatouEngine, Eout: FatouEngine,
            alpha, sigma, z, w):
    """Generalized Lavaurs map L(alpha, sigma; z, w)."""
    X = (alpha * Ein.incoming_coord(w)
         + (1.0 - alpha) * Ep.incoming_coord(z) + sigma)
    return Eout.outgoing_param(X)


def lavaurs_w_derivative(Ep, Ein, Eout, alpha, sigma, z, w):
    """d/dw of the generalized Lavaurs map."""
    phi_w, dphi_w = Ein.incoming_coord(w, with_derivative=True)
    X = alpha * phi_w + (1.0 - alpha) * Ep.incoming_coord(z) + sigma
    _, dpsi = Eout.outgoing_param(X, with_derivative=True)
    return alpha * dphi_w * dpsi


def lifted_horn_of_P(Z, W, sigma, alpha0, Ein: FatouEngine, Eout: FatouEngine):
    """Lifted horn map of the skew-product: (Z, W) -> (Z, W')."""
    E = lifted_horn(Ein, Eout, W).value
    return Z, alpha0 * E + (1.0 - alpha0) * Z + sigma


# -- horn family h_lambda = lambda * hhat^alpha0 -------------------------------


def horn_lift(x):
    """Lift of x != 0 into the fundamental strip 0 < Re W <= 1."""
    x = complex(x)
    if x == 0 or not np.isfinite(abs(x)):
        raise AtPuncture("x at a puncture of the horn family")
    W = np.log(x) / (2j * np.pi)
    if W.real <= 0.0:
        W += 1.0
    return W

def horn_family_step(lam, x, alpha0, Ein: FatouEngine, Eout: FatouEngine):
    """One step x' = lam * hhat(x)^alpha0 with hhat(e^{2 pi i W}) = e^{2 pi i E(W)}."""
    W = horn_lift(x)
    try:
        E = lifted_horn(Ein, Eout, W).value
    except OutsideDomain as exc:
        raise ExitedDomain(str(exc)) from exc
    return lam * np.exp(2j * np.pi * alpha0 * E)


def horn_family_free_value(alpha0, Ein: FatouEngine):
    """Free critical value direction v: v_lambda = lambda * v.

    The critical points of hhat sit over the precritical set of the germ;
    every critical value of lambda*hhat^alpha0 equals lambda*e^{2 pi i
    alpha0 phi^iota(c)} with c the germ's critical point (-1/2 for w+w^2).
    """
    dq = Ein.f.deriv()
    roots = np.roots(dq.coeffs[::-1])
    for r in roots:
        if Ein.basin_membership(complex(r), budget=100000):
            return np.exp(2j * np.pi * alpha0 * Ein.incoming_coord(complex(r)))
    raise NotInBasin("no critical point of the germ in its parabolic basin")
