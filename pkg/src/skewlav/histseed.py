"""Seeding for the historic-behaviour run: a start point whose alternating
eggbeater passages follow a super-attracting cycle of the composite Lavaurs
map.

Write L1, L2 for the generalized Lavaurs maps of the two fiber fixed points
w1, w2 and M_Z = L2(Z, .) o L1(Z, .).  The cycle is anchored at a critical
point c2 of the SECOND incoming coordinate: we shoot for Z with

    L1(Z, w*(Z)) = c2,       w*(Z) := L2(Z, c2).

Then w* is a fixed point of M_Z with M'(w*) = L2'(c2) L1'(w*) = 0, and -
decisive for finite-n orbits - the o(1) noise injected at the mid-cycle
handoff arrives AT c2, where the next incoming coordinate has a vanishing
derivative, so it is crushed quadratically instead of amplified.

The feasible Z-set (w*(Z) must land in the first basin) is thin; it is
located by a vectorized scan of X2 = alpha phi2(c2) + (1-alpha) Z + Gamma2
and the closure is finished by a damped Newton shoot on G(Z) =
L1(Z, w*(Z)) - c2.
"""

from __future__ import annotations

import numpy as np

from .errors import NotInBasin, OrbitLeftNeighborhood
from .explore import VecHornEngine
from .fatou import FatouEngine
from .germs import SkewMap, fiber_shifted_germ


def _criticals_in_basin(E: FatouEngine, budget=50000):
    """Critical points of the germ inside its parabolic basin (local coords)."""
    dq = E.f.deriv()
    roots = np.roots(dq.coeffs[::-1])
    out = []
    for r in sorted(roots, key=lambda t: abs(t)):
        if E.basin_membership(complex(r), budget=budget):
            out.append(complex(r))
    return out


def _backward_branch(E: FatouEngine, x, steps):
    """Backward orbit along the identity-like inverse branch of the germ."""
    for _ in range(steps):
        y = x
        for _ in range(80):
            step = (E.apply(y) - x) / E.dapply(y)
            y -= step
            if abs(step) < 1e-15 * max(1.0, abs(y)):
                break
        x = y
    return x


def point_with_incoming_coord(E: FatouEngine, Z):
    """z in the basin with phi^iota(z) = Z, for moderate Re Z."""
    j = max(0, int(np.ceil(E.r0 + 2.0 - Z.real)))
    z_deep = E.incoming_coord_inverse(Z + j)
    return _backward_branch(E, z_deep, j)


class CompositeLavaurs:
    """Two-passage composite through (0, wA) then (0, wB), germ-local engines."""

    def __init__(self, EA: FatouEngine, EB: FatouEngine, wA, wB, alpha=2.0,
                 gammaA=0.0, gammaB=0.0):
        self.EA, self.EB = EA, EB
        self.wA, self.wB = complex(wA), complex(wB)
        self.alpha = alpha
        self.gA, self.gB = complex(gammaA), complex(gammaB)

    def first(self, Z, w):
        XA = (self.alpha * self.EA.incoming_coord(w - self.wA)
              + (1 - self.alpha) * Z + self.gA)
        return self.wA + self.EA.outgoing_param(XA)

    def second(self, Z, mid):
        XB = (self.alpha * self.EB.incoming_coord(mid - self.wB)
              + (1 - self.alpha) * Z + self.gB)
        return self.wB + self.EB.outgoing_param(XB)

    def __call__(self, Z, w):
        return self.second(Z, self.first(Z, w))


def _grid(box, step):
    re0, re1, im0, im1 = box
    xs = np.arange(re0, re1, step)
    ys = np.arange(im0, im1, step)
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def _deep_incoming(vec, s, budget, deep_budget):
    """Vectorized incoming with a deep retry on undecided points."""
    phi, ok, alive = vec.incoming(s, budget=budget, with_alive=True)
    if alive.any():
        idx = np.flatnonzero(alive)
        phi2, ok2 = vec.incoming(s[idx], budget=deep_budget)
        phi[idx] = phi2
        ok[idx] |= ok2
    return phi, ok


def _cycle_candidates(v1, v2, w1, w2, c2, phi2c, alpha, g1, g2, box, step,
                      basin_budget, deep_budget=40000):
    """Scan Z-grid (via X2): returns (Z values, |closure error| values)."""
    X2 = _grid(box, step)
    Z = (alpha * phi2c + g2 - X2) / (alpha - 1.0)
    keepZ, err = [], []
    chunk = 1 << 15
    for lo in range(0, len(X2), chunk):
        x2 = X2[lo:lo + chunk]
        zz = Z[lo:lo + chunk]
        wstar = w2 + v2.outgoing_param(x2)
        good = np.abs(wstar) < 50
        s1 = np.where(good, wstar - w1, 0.5)
        phi1, ok1 = _deep_incoming(v1, s1, basin_budget, deep_budget)
        good &= ok1
        if not good.any():
            continue
        X1 = alpha * phi1 + (1 - alpha) * zz + g1
        good &= (np.abs(X1.real) < 80) & (np.abs(X1.imag) < 80)
        if not good.any():
            continue
        idx = np.flatnonzero(good)
        mid = w1 + v1.outgoing_param(X1[idx])
        closure = np.abs(mid - c2)
        keepZ.extend(zz[idx].tolist())
        err.extend(closure.tolist())
    return keepZ, err


def _true_cycle_error(P, z0, w_anchor, n_test, alpha=2, cycles=1):
    """Distance back to the anchor after full two-passage orbit cycles."""
    z = complex(z0)
    for _ in range(n_test):
        z = P.p(z)
    w = complex(w_anchor)
    steps = (alpha ** (2 * cycles) - 1) * n_test
    worst = 0.0
    done = n_test
    target = n_test * alpha ** 2
    for k in range(steps):
        z, w = P.p(z), P.q(z, w)
        if abs(z) > 1e8 or abs(w) > 1e8:
            return float("inf")
        done += 1
        if done == target:
            worst = max(worst, abs(w - w_anchor))
            target *= alpha ** 2
    return worst


def historic_start_point(P: SkewMap, fixed_points=(0.0, 1.0),
                         box=(-8.0, 4.0, -6.0, 6.0), step=0.04,
                         basin_budget=2500, n_test=4096, cycle_margin=0.05,
                         gamma1=0.0, gamma2=0.0, alpha=2.0):
    """(z0, w0, info): start data for the alternating-passage historic orbit.

    w0 = w*(Z) is a super-attracting fixed point of the composite Lavaurs
    map whose mid-cycle point is the critical point c2 of the second
    incoming coordinate; z0 realizes phi_p(z0) = Z.  Validated by one true
    orbit cycle at n_test.
    """
    w1, w2 = complex(fixed_points[0]), complex(fixed_points[1])
    Ep = FatouEngine(P.p)
    E1 = FatouEngine(P.q0() if w1 == 0 else fiber_shifted_germ(P, w1))
    E2 = FatouEngine(fiber_shifted_germ(P, w2))
    v1 = VecHornEngine(E1, inc_budget=basin_budget)
    v2 = VecHornEngine(E2, inc_budget=basin_budget)
    comp = CompositeLavaurs(E1, E2, w1, w2, alpha=alpha,
                            gammaA=gamma1, gammaB=gamma2)
    crits = [c + w2 for c in _criticals_in_basin(E2)]
    if not crits:
        raise NotInBasin("no critical point of the second germ in its basin")

    solutions = []
    for c2 in crits:
        phi2c = E2.incoming_coord(c2 - w2)

        def wstar_of(Z, phi2c=phi2c):
            X2 = alpha * phi2c + (1 - alpha) * Z + gamma2
            return w2 + E2.outgoing_param(X2)

        def G(Z, phi2c=phi2c, c2=c2):
            return comp.first(Z, wstar_of(Z, phi2c)) - c2

        keepZ, errs = _cycle_candidates(v1, v2, w1, w2, c2, phi2c, alpha,
                                        gamma1, gamma2, box, step, basin_budget)
        if not keepZ:
            continue
        order = np.argsort(errs)
        h = 1e-7
        for i in order[:50]:
            Z = keepZ[i]
            try:
                ok = False
                for _ in range(80):
                    g0 = G(Z)
                    if abs(g0) < 1e-11:
                        ok = True
                        break
                    dg = (G(Z + h) - G(Z - h)) / (2 * h)
                    step_n = g0 / dg
                    if abs(step_n) > 0.05:
                        step_n *= 0.05 / abs(step_n)
                    for _ in range(6):
                        try:
                            G(Z - step_n)
                            break
                        except Exception:
                            step_n *= 0.5
                    Z = Z - step_n
                if not ok:
                    continue
            except Exception:
                continue
            if any(abs(Z - s[1]) < 1e-6 for s in solutions):
                continue
            w0 = wstar_of(Z)
            # half-map noise amplification between the return point and the
            # mid anchor; small values keep the finite-n orbit on the cycle
            hh = 1e-6
            try:
                d1 = abs(comp.first(Z, w0 + hh) - comp.first(Z, w0 - hh)) / (2 * hh)
            except Exception:
                continue
            solutions.append((d1, Z, c2, w0, abs(G(Z))))
    if not solutions:
        raise OrbitLeftNeighborhood("no closable composite-Lavaurs cycle found")
    solutions.sort(key=lambda t: t[0])
    best_fail = None
    for d1, Z, c2, w0, resid in solutions[:8]:
        z0 = point_with_incoming_coord(Ep, Z)
        err = _true_cycle_error(P, z0, w0, n_test, alpha=round(alpha), cycles=2)
        if err < cycle_margin:
            info = {
                "Z": [Z.real, Z.imag],
                "mid_critical_point": [c2.real, c2.imag],
                "closure_residual": resid,
                "half_map_derivative": d1,
                "true_cycle_error": err,
                "n_test": n_test,
                "z0": [z0.real, z0.imag],
                "w0": [w0.real, w0.imag],
            }
            return z0, w0, info
        if best_fail is None or err < best_fail[0]:
            best_fail = (err, d1)
    raise OrbitLeftNeighborhood(
        f"best two-cycle error {best_fail[0]:.3f} exceeds margin {cycle_margin} "
        f"(half-map derivative {best_fail[1]:.1f})")
