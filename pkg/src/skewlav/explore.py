"""Point classification, slice / parameter-plane rasters, super-attracting
loci, multipliers and convergence-direction diagnostics.

Rendering is numpy-vectorized over pixels and split into fixed-height row
tiles; tile boundaries depend only on the raster metadata, so outputs are
byte-identical for any worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CycleNotRefined,
    ExitedDomain,
    NoCriticalPointFound,
    NotInBasin,
    OutOfHalfPlane,
)
from .fatou import (
    FatouEngine,
    horn_derivative,
    horn_family_free_value,
    horn_family_step,
    horn_lift,
    lavaurs,
    lavaurs_w_derivative,
    lifted_horn,
)
from .germs import SkewMap

# slice classes
ESCAPE, BASIN, WANDER, UNDECIDED = 0, 1, 2, 3
SLICE_CLASS_NAMES = ("EscapeToInfinity", "ParabolicBasin", "WanderingCandidate",
                     "Undecided")
# parameter-plane classes
CAP_ZERO, CAP_INF, HYPERBOLIC, EXITED, UNDECIDED_P = 0, 1, 2, 3, 4
PARAM_CLASS_NAMES = ("CapturedByZero", "CapturedByInfinity", "Hyperbolic",
                     "ExitedDomain", "Undecided")

EPS_BASIN = 1e-3
SLICE_BUDGET = 4000
PARAM_BUDGET = 400
DELTA_CYCLE = 1e-6
MAX_PERIOD = 64
EPS_ZERO = 1e-30
R_INF = 1e30
TILE_ROWS = 16
BAILOUT = 1e8


@dataclass(frozen=True)
class PixelClass:
    tag: str
    steps: int | None = None
    period: int | None = None


@dataclass
class RasterGrid:
    width: int
    height: int
    window: tuple            # (re_min, re_max, im_min, im_max)
    classes: np.ndarray      # uint8, row-major, row 0 = top (max Im)
    steps: np.ndarray        # int32 step/period payload
    metadata: dict = field(default_factory=dict)

    def pixel_center(self, i, j):
        re0, re1, im0, im1 = self.window
        x = re0 + (j + 0.5) * (re1 - re0) / self.width
        y = im1 - (i + 0.5) * (im1 - im0) / self.height
        return complex(x, y)

    def pixel_of(self, w):
        re0, re1, im0, im1 = self.window
        j = int((w.real - re0) / (re1 - re0) * self.width)
        i = int((im1 - w.imag) / (im1 - im0) * self.height)
        return i, j

    def class_counts(self):
        return {int(k): int(v) for k, v in
                zip(*np.unique(self.classes, return_counts=True))}


def _grid_points(window, width, height):
    re0, re1, im0, im1 = window
    xs = re0 + (np.arange(width) + 0.5) * (re1 - re0) / width
    ys = im1 - (np.arange(height) + 0.5) * (im1 - im0) / height
    return xs[None, :] + 1j * ys[:, None]


# -- slice rendering -----------------------------------------------------------


def classify_slice_point(P: SkewMap, z0, w, budget=SLICE_BUDGET,
                         eps_basin=EPS_BASIN, bailout=BAILOUT) -> PixelClass:
    """Orbit class of one point of the vertical slice z = z0."""
    z, wv = complex(z0), complex(w)
    # the observation window spans a factor-2 time range so that it always
    # contains one eggbeater return for doubling-cadence wandering orbits;
    # basin orbits decay like C/n, so the threshold scales with the budget
    window_start = budget // 2
    eps_eff = max(eps_basin, 20.0 / budget)
    peak = 0.0
    for k in range(budget):
        if abs(z) > bailout or abs(wv) > bailout:
            return PixelClass("EscapeToInfinity", steps=k)
        z, wv = P.p(z), P.q(z, wv)
        if k >= window_start:
            peak = max(peak, abs(wv))
    if peak < eps_eff:
        return PixelClass("ParabolicBasin", steps=budget)
    if abs(z) < 1e-3:
        return PixelClass("WanderingCandidate", steps=budget)
    return PixelClass("Undecided", steps=budget)


def _slice_tile(P: SkewMap, z0, wgrid, budget, eps_basin, bailout):
    shape = wgrid.shape
    w = wgrid.astype(complex).ravel()
    z = np.full(w.shape, complex(z0))
    alive = np.ones(w.shape, dtype=bool)
    esc_step = np.zeros(w.shape, dtype=np.int32)
    peak = np.zeros(w.shape, dtype=float)
    window_start = budget // 2
    eps_eff = max(eps_basin, 20.0 / budget)
    for k in range(budget):
        if not alive.any():
            break
        za, wa = z[alive], w[alive]
        esc = (np.abs(za) > bailout) | (np.abs(wa) > bailout)
        if esc.any():
            idx = np.flatnonzero(alive)[esc]
            esc_step[idx] = k
            alive[idx] = False
            za, wa = za[~esc], wa[~esc]
        zn = P.p(za)
        wn = P.q(za, wa)
        z[alive] = zn
        w[alive] = wn
        if k >= window_start:
            peak[alive] = np.maximum(peak[alive], np.abs(wn))
    classes = np.full(w.shape, UNDECIDED, dtype=np.uint8)
    steps = np.full(w.shape, budget, dtype=np.int32)
    escaped = ~alive
    classes[escaped] = ESCAPE
    steps[escaped] = esc_step[escaped]
    basin = alive & (peak < eps_eff)
    classes[basin] = BASIN
    wander = alive & ~basin & (np.abs(z) < 1e-3)
    classes[wander] = WANDER
    return classes.reshape(shape), steps.reshape(shape)


def render_slice(P: SkewMap, z0, window, width, height, budget=SLICE_BUDGET,
                 eps_basin=EPS_BASIN, threads=1, metadata=None) -> RasterGrid:
    grid = _grid_points(window, width, height)
    classes = np.empty((height, width), dtype=np.uint8)
    steps = np.empty((height, width), dtype=np.int32)
    tiles = [(i, min(i + TILE_ROWS, height)) for i in range(0, height, TILE_ROWS)]

    def work(tile):
        i0, i1 = tile
        return tile, _slice_tile(P, z0, grid[i0:i1], budget, eps_basin, BAILOUT)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, tiles))
    else:
        results = [work(t) for t in tiles]
    for (i0, i1), (ctile, stile) in results:
        classes[i0:i1] = ctile
        steps[i0:i1] = stile
    meta = {"kind": "slice", "z0": [complex(z0).real, complex(z0).imag],
            "window": list(window), "width": width, "height": height,
            "budget": budget, "eps_basin": eps_basin, "bailout": BAILOUT,
            "tile_rows": TILE_ROWS}
    if metadata:
        meta.update(metadata)
    return RasterGrid(width, height, tuple(window), classes, steps, meta)


def q0_invariance_fraction(P: SkewMap, raster: RasterGrid, max_samples=1000):
    """Fraction of red pixels whose q0-image lands on/next to a red pixel."""
    q0 = P.q0()
    red = np.argwhere(raster.classes == WANDER)
    if len(red) == 0:
        return 0.0
    stride = max(1, len(red) // max_samples)
    sample = red[::stride][:max_samples]
    hits = 0
    total = 0
    for i, j in sample:
        w = raster.pixel_center(i, j)
        wi, wj = raster.pixel_of(q0(w))
        if not (0 <= wi < raster.height and 0 <= wj < raster.width):
            total += 1
            continue
        total += 1
        lo_i, hi_i = max(0, wi - 1), min(raster.height, wi + 2)
        lo_j, hi_j = max(0, wj - 1), min(raster.width, wj + 2)
        if (raster.classes[lo_i:hi_i, lo_j:hi_j] == WANDER).any():
            hits += 1
    return hits / max(total, 1)


# -- vectorized horn-family kernels ---------------------------------------------


class VecHornEngine:
    """Array evaluation of psi^o, phi^iota and the horn family for one germ."""

    def __init__(self, engine: FatouEngine, inc_budget=600):
        self.E = engine
        self.rev = engine._rev
        self.a2 = engine.a2
        self.frakb = engine.frakb
        self.gamma = engine.gamma
        self.r0 = engine.r0
        self.u_eval = engine.u_eval
        self.inc_budget = inc_budget
        self.petal_thresh = 1.0 / (2.0 * engine.petal_radius)

    def apply(self, w):
        acc = np.zeros_like(w)
        for c in self.rev:
            acc = acc * w + c
        return acc

    def _phi_series(self, u, outgoing=False):
        val = u - self.frakb * (np.log(-u) if outgoing else np.log(u))
        up = np.ones_like(u)
        for g in self.gamma:
            up = up / u
            val = val + g * up
        return val

    def _dphi_series_du(self, u):
        val = 1.0 - self.frakb / u
        up = np.ones_like(u)
        for k, g in enumerate(self.gamma, start=1):
            up = up / u
            val = val - k * g * up / u
        return val

    def outgoing_param(self, W):
        """psi^o on an array; expects bounded Re W (fundamental strip)."""
        remax = float(np.max(W.real)) if W.size else 0.0
        n = max(0, int(np.floor(remax + self.r0)) + 1)
        X = W - n
        u = X.copy()
        for _ in range(14):
            val = self._phi_series(u, outgoing=True) - X
            u = u - val / self._dphi_series_du(u)
        w = -1.0 / (self.a2 * u)
        for _ in range(n):
            w = self.apply(w)
        return w

    def incoming(self, w, budget=None, with_alive=False):
        """(Z, ok[, alive]) on an array: Fatou coordinate where the orbit
        reaches the evaluation region within budget.  `alive` marks points
        that neither entered nor escaped (membership undecided)."""
        budget = budget or self.inc_budget
        w = w.copy()
        Z = np.zeros_like(w)
        ok = np.zeros(w.shape, dtype=bool)
        active = np.ones(w.shape, dtype=bool)
        n = 0
        while active.any() and n <= budget:
            wa = w[active]
            u = -1.0 / (self.a2 * wa)
            done = (u.real > self.u_eval) & (np.abs(u.imag) < u.real)
            if done.any():
                idx = np.flatnonzero(active)[done]
                Z[idx] = self._phi_series(u[done]) - n
                ok[idx] = True
                active[idx] = False
                wa = wa[~done]
            dead = np.abs(wa) > BAILOUT
            if dead.any():
                idx = np.flatnonzero(active)[dead]
                active[idx] = False
                wa = wa[~dead]
            w[active] = self.apply(wa)
            n += 1
        if with_alive:
            return Z, ok, active
        return Z, ok

    def horn_step(self, lam, x, alpha0):
        """(x', ok): one h_lambda step on an array; ok=False marks ExitedDomain."""
        mod = np.abs(x)
        safe = (mod > EPS_ZERO) & (mod < R_INF)
        W = np.zeros_like(x)
        W[safe] = np.log(x[safe]) / (2j * np.pi)
        Wr = W.real
        W = W - np.ceil(Wr) + 1.0  # fundamental strip 0 < Re <= 1
        w = np.zeros_like(x)
        w[safe] = self.outgoing_param(W[safe])
        Z = np.zeros_like(x)
        ok = np.zeros(x.shape, dtype=bool)
        if safe.any():
            Zs, oks = self.incoming(w[safe])
            Z[safe] = Zs
            ok[safe] = oks
        out = np.where(ok, lam * np.exp(2j * np.pi * alpha0 * Z), x)
        return out, ok & safe


def classify_param_point(lam, alpha0, Ein: FatouEngine, Eout: FatouEngine,
                         budget=PARAM_BUDGET, v=None) -> PixelClass:
    """Scalar classification of one horn-family parameter."""
    if v is None:
        v = horn_family_free_value(alpha0, Ein)
    x = lam * v
    saved, saved_step = x, 0
    next_save = 1
    cand = None
    for k in range(budget):
        if abs(x) < EPS_ZERO:
            return PixelClass("CapturedByZero", steps=k)
        if abs(x) > R_INF:
            return PixelClass("CapturedByInfinity", steps=k)
        try:
            x = horn_family_step(lam, x, alpha0, Ein, Eout)
        except ExitedDomain:
            return PixelClass("ExitedDomain", steps=k)
        step = k + 1
        if cand is not None:
            ref, r1, due, per = cand
            if step == due:
                if abs(x - ref) < r1:
                    return PixelClass("Hyperbolic", steps=step, period=per)
                cand = None
        if cand is None and step - saved_step <= MAX_PERIOD:
            d = abs(x - saved)
            if 0 < d < DELTA_CYCLE and step > saved_step:
                per = step - saved_step
                cand = (x, d, step + per, per)
        if step == next_save:
            saved, saved_step = x, step
            next_save *= 2
    return PixelClass("Undecided", steps=budget)


def _param_tile(lam_grid, alpha0, vec: VecHornEngine, budget, v):
    shape = lam_grid.shape
    lam = lam_grid.astype(complex).ravel()
    x = lam * v
    classes = np.full(lam.shape, UNDECIDED_P, dtype=np.uint8)
    payload = np.full(lam.shape, budget, dtype=np.int32)
    alive = np.ones(lam.shape, dtype=bool)
    saved = x.copy()
    saved_step = np.zeros(lam.shape, dtype=np.int64)
    next_save = np.ones(lam.shape, dtype=np.int64)
    cand_ref = np.zeros_like(x)
    cand_r1 = np.zeros(lam.shape)
    cand_due = np.full(lam.shape, -1, dtype=np.int64)
    cand_per = np.zeros(lam.shape, dtype=np.int32)

    for k in range(budget):
        if not alive.any():
            break
        idx = np.flatnonzero(alive)
        xa = x[idx]
        small = np.abs(xa) < EPS_ZERO
        big = np.abs(xa) > R_INF
        if small.any():
            classes[idx[small]] = CAP_ZERO
            payload[idx[small]] = k
            alive[idx[small]] = False
        if big.any():
            classes[idx[big]] = CAP_INF
            payload[idx[big]] = k
            alive[idx[big]] = False
        idx = np.flatnonzero(alive)
        if len(idx) == 0:
            break
        xa, ok = vec.horn_step(lam[idx], x[idx], alpha0)
        exited = ~ok
        if exited.any():
            classes[idx[exited]] = EXITED
            payload[idx[exited]] = k
            alive[idx[exited]] = False
        keep = idx[ok]
        x[keep] = xa[ok]
        step = k + 1
        # confirm pending cycle candidates
        due = alive & (cand_due == step)
        if due.any():
            didx = np.flatnonzero(due)
            close = np.abs(x[didx] - cand_ref[didx]) < cand_r1[didx]
            hit = didx[close]
            classes[hit] = HYPERBOLIC
            payload[hit] = cand_per[hit]
            alive[hit] = False
            cand_due[didx[~close]] = -1
        # new candidates (Brent return to the saved checkpoint)
        idx = np.flatnonzero(alive & (cand_due < 0))
        if len(idx):
            d = np.abs(x[idx] - saved[idx])
            per = step - saved_step[idx]
            new = (d > 0) & (d < DELTA_CYCLE) & (per >= 1) & (per <= MAX_PERIOD)
            nidx = idx[new]
            cand_ref[nidx] = x[nidx]
            cand_r1[nidx] = d[new]
            cand_per[nidx] = per[new]
            cand_due[nidx] = step + per[new]
        # checkpoint refresh at powers of two
        idx = np.flatnonzero(alive & (next_save == step))
        if len(idx):
            saved[idx] = x[idx]
            saved_step[idx] = step
            next_save[idx] *= 2
    return classes.reshape(shape), payload.reshape(shape)


def render_param(alpha0, window, width, height, Ein=None, Eout=None,
                 budget=PARAM_BUDGET, threads=1, metadata=None) -> RasterGrid:
    """Parameter plane of h_lambda = lambda hhat^alpha0 for q0 = w + w^2."""
    if Ein is None:
        Ein = FatouEngine([0, 1.0, 1.0])
    if Eout is None:
        Eout = Ein
    v = horn_family_free_value(alpha0, Ein)
    vec = VecHornEngine(Eout)
    grid = _grid_points(window, width, height)
    classes = np.empty((height, width), dtype=np.uint8)
    steps = np.empty((height, width), dtype=np.int32)
    tiles = [(i, min(i + TILE_ROWS, height)) for i in range(0, height, TILE_ROWS)]

    def work(tile):
        i0, i1 = tile
        return tile, _param_tile(grid[i0:i1], alpha0, vec, budget, v)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, tiles))
    else:
        results = [work(t) for t in tiles]
    for (i0, i1), (ctile, stile) in results:
        classes[i0:i1] = ctile
        steps[i0:i1] = stile
    meta = {"kind": "param", "alpha0": alpha0, "window": list(window),
            "width": width, "height": height, "budget": budget,
            "delta_cycle": DELTA_CYCLE, "max_period": MAX_PERIOD,
            "eps_zero": EPS_ZERO, "r_inf": R_INF, "tile_rows": TILE_ROWS,
            "free_value": [v.real, v.imag]}
    if metadata:
        meta.update(metadata)
    return RasterGrid(width, height, tuple(window), classes, steps, meta)


# -- PPM output ------------------------------------------------------------------

SLICE_PALETTE = {BASIN: (40, 60, 255), WANDER: (255, 30, 30),
                 UNDECIDED: (255, 255, 0)}
PARAM_PALETTE = {CAP_ZERO: (255, 30, 30), CAP_INF: (40, 60, 255),
                 HYPERBOLIC: (0, 0, 0), EXITED: (255, 255, 255),
                 UNDECIDED_P: (255, 255, 0)}


def raster_to_ppm(raster: RasterGrid) -> bytes:
    h, w = raster.classes.shape
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    kind = raster.metadata.get("kind", "slice")
    if kind == "slice":
        esc = raster.classes == ESCAPE
        budget = max(raster.metadata.get("budget", SLICE_BUDGET), 2)
        shade = (40.0 + 215.0 * (1.0 - np.log1p(raster.steps[esc])
                                 / np.log1p(budget))).astype(np.uint8)
        rgb[esc] = shade[:, None]
        for cls, col in SLICE_PALETTE.items():
            rgb[raster.classes == cls] = col
    else:
        for cls, col in PARAM_PALETTE.items():
            rgb[raster.classes == cls] = col
    header = f"P6\n{w} {h}\n255\n".encode()
    return header + rgb.tobytes()


def raster_sidecar(raster: RasterGrid, extra=None) -> str:
    doc = dict(raster.metadata)
    doc["class_counts"] = {
        (SLICE_CLASS_NAMES if doc.get("kind") == "slice"
         else PARAM_CLASS_NAMES)[k]: v
        for k, v in raster.class_counts().items()}
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=1)


# -- super-attracting locus and multipliers ---------------------------------------


def find_horn_critical_point(Ein: FatouEngine, Eout: FatouEngine,
                             re_range=(0.05, 1.05), im_range=(-2.5, 2.5),
                             grid_n=24, newton_steps=60, residual=1e-9):
    """Critical point of the lifted horn map E by scan + Newton on E'."""
    best = []
    for re in np.linspace(*re_range, grid_n):
        for im in np.linspace(*im_range, grid_n):
            W = complex(re, im)
            try:
                d = horn_derivative(Ein, Eout, W)
            except Exception:
                continue
            best.append((abs(d), W))
    best.sort(key=lambda t: t[0])
    h = 1e-6
    for _, W0 in best[:12]:
        W = W0
        try:
            for _ in range(newton_steps):
                d = horn_derivative(Ein, Eout, W)
                if abs(d) < residual:
                    return W
                dd = (horn_derivative(Ein, Eout, W + h)
                      - horn_derivative(Ein, Eout, W - h)) / (2 * h)
                step = d / dd
                if abs(step) > 0.25:
                    step *= 0.25 / abs(step)
                W -= step
        except Exception:
            continue
    raise NoCriticalPointFound("no zero of E' in the seed region")


@dataclass
class SuperAttractingLocus:
    Z0: complex
    z0: complex
    w0: complex
    fixed_point_residual: float
    derivative_modulus: float


def super_attracting_locus(W0, N0, sigma, alpha0, Ep: FatouEngine,
                           Ein: FatouEngine, Eout: FatouEngine):
    """Z0 = (alpha0 E(W0+N0) - (W0+N0) + sigma)/(alpha0 - 1) and its basepoint.

    Raises OutOfHalfPlane when N0 is too small for the incoming inverse.
    """
    Wc = complex(W0) + N0
    E = lifted_horn(Ein, Eout, Wc).value
    Z0 = (alpha0 * E - Wc + sigma) / (alpha0 - 1.0)
    if Z0.real <= Ep.r0:
        raise OutOfHalfPlane(
            f"Re Z0 = {Z0.real:.3f} <= R0 = {Ep.r0}; increase N0")
    z0 = Ep.incoming_coord_inverse(Z0)
    w0 = Eout.outgoing_param(Wc)
    lval = lavaurs(Ep, Ein, Eout, alpha0, sigma, z0, w0)
    dval = lavaurs_w_derivative(Ep, Ein, Eout, alpha0, sigma, z0, w0)
    return SuperAttractingLocus(Z0=Z0, z0=z0, w0=w0,
                                fixed_point_residual=abs(lval - w0),
                                derivative_modulus=abs(dval))


def _horn_family_derivative(lam, x, alpha0, Ein, Eout):
    """h'(x) for h = lam hhat^alpha0 via dE/dW: h' = alpha0 h(x) E'(W)/x."""
    W = horn_lift(x)
    hval = horn_family_step(lam, x, alpha0, Ein, Eout)
    dE = horn_derivative(Ein, Eout, W)
    return alpha0 * hval * dE / x


def multiplier(lam, alpha0, Ein: FatouEngine, Eout: FatouEngine,
               cycle_budget=PARAM_BUDGET):
    """(period, rho): attracting cycle of h_lambda captured by v_lambda."""
    v = horn_family_free_value(alpha0, Ein)
    x = lam * v
    saved, saved_step, next_save = x, 0, 1
    found = None
    for k in range(cycle_budget):
        try:
            x = horn_family_step(lam, x, alpha0, Ein, Eout)
        except Exception as exc:
            raise CycleNotRefined(f"orbit left the domain: {exc}") from exc
        step = k + 1
        d = abs(x - saved)
        per = step - saved_step
        if 0 < d < DELTA_CYCLE and 1 <= per <= MAX_PERIOD:
            found = (x, per)
            break
        if step == next_save:
            saved, saved_step = x, step
            next_save *= 2
    if found is None:
        raise CycleNotRefined("no return within the cycle budget")
    x0, period = found
    # Newton on h^m(x) - x
    x = x0
    for _ in range(60):
        val = x
        dprod = 1.0 + 0j
        for _ in range(period):
            dprod *= _horn_family_derivative(lam, val, alpha0, Ein, Eout)
            val = horn_family_step(lam, val, alpha0, Ein, Eout)
        g = val - x
        if abs(g) < 1e-13:
            break
        x = x - g / (dprod - 1.0)
    rho = 1.0 + 0j
    val = x
    for _ in range(period):
        rho *= _horn_family_derivative(lam, val, alpha0, Ein, Eout)
        val = horn_family_step(lam, val, alpha0, Ein, Eout)
    if abs(val - x) > 1e-8:
        raise CycleNotRefined(f"Newton residual {abs(val - x):.2e}")
    return period, rho


# -- convergence direction ---------------------------------------------------------


def classify_convergence_direction(P: SkewMap, z, w, n_budget=20000,
                                   spread_tol=1e-3):
    """Tangential / Spiral / Undecided for an orbit converging to the origin."""
    z, w = complex(z), complex(w)
    us = []
    for _ in range(n_budget):
        z, w = P.p(z), P.q(z, w)
        if z == 0:
            break
        us.append(w / z)
        if abs(z) > BAILOUT or abs(w) > BAILOUT:
            raise NotInBasin("orbit escaped; not converging to the origin")
    if abs(z) > 1e-3 or abs(w) > 1e-2:
        raise NotInBasin("orbit did not converge to the origin within budget")
    tail = us[-max(len(us) // 5, 10):]
    arr = np.array(tail)
    spread = np.max(np.abs(arr - arr.mean()))
    if spread < spread_tol:
        return PixelClass("Tangential", steps=len(us)), complex(arr.mean())
    # winding of u along the tail
    args = np.angle(arr)
    wind = np.abs(np.diff(np.unwrap(args))).sum()
    if np.all(np.abs(arr) < 1e6) and wind > 4 * np.pi:
        return PixelClass("Spiral", steps=len(us)), None
    return PixelClass("Undecided", steps=len(us)), None
