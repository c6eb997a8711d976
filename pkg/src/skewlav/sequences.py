"""(alpha, beta)-admissible integer sequences, phase analysis, Pisot tests.

Phases are sigma_k = n_{k+1} - alpha n_k - beta ln n_k; a sequence is
admissible when they stay bounded.  Everything here is plain integer / float
arithmetic except the exact Pisot mode, which runs the integer trace
recurrence of the minimal polynomial.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BetaNonzero,
    NotIncreasing,
    PrecisionHorizonExceeded,
    SeriesTailTooLarge,
    TooShort,
)

PHASE_BOUND_WARN = 10.0
FLOAT_HORIZON = 2.0 ** 48


@dataclass
class AdmissibleSeq:
    alpha: float
    beta: float
    terms: list

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.terms, self.terms[1:])):
            raise NotIncreasing("terms must be strictly increasing")
        if self.terms and self.terms[0] < 1:
            raise NotIncreasing("terms must be positive integers")

    @property
    def phases(self):
        a, b = self.alpha, self.beta
        return [n1 - a * n0 - b * math.log(n0)
                for n0, n1 in zip(self.terms, self.terms[1:])]

    @property
    def max_phase(self):
        ph = self.phases
        return max(abs(s) for s in ph) if ph else 0.0

    @property
    def bounded_warning(self):
        return self.max_phase > PHASE_BOUND_WARN

    def rho(self):
        """rho_k = n_{k+1} - alpha n_k - k beta ln(alpha)."""
        a, b = self.alpha, self.beta
        la = math.log(a)
        return [n1 - a * n0 - k * b * la
                for k, (n0, n1) in enumerate(zip(self.terms, self.terms[1:]))]

    def to_csv(self, recon=None):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["k", "n_k", "sigma_k", "rho_k", "d_k"])
        ph, rh = self.phases, self.rho()
        dk = recon.d_k if recon is not None else None
        for k, n in enumerate(self.terms):
            row = [k, n,
                   ph[k] if k < len(ph) else "",
                   rh[k] if k < len(rh) else "",
                   dk[k] if dk is not None and k < len(dk) else ""]
            w.writerow(row)
        return buf.getvalue()


@dataclass
class SeqReconstruction:
    zeta: float
    d_k: list
    rho_k: list
    tail_bound: float
    identity_rel_error: float
    rho_vs_sigma_drift: list  # rho_k - sigma_k - beta ln zeta

    def to_json(self):
        return json.dumps({
            "zeta": self.zeta,
            "tail_bound": self.tail_bound,
            "identity_rel_error": self.identity_rel_error,
            "d_k": list(self.d_k),
            "rho_k": list(self.rho_k),
            "rho_vs_sigma_drift": list(self.rho_vs_sigma_drift),
        }, sort_keys=True, indent=1)


def generate_greedy(alpha, beta, n0, K):
    """n_{k+1} = floor(alpha n_k + beta ln n_k); phases land in (-1, 0]."""
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    terms = [int(n0)]
    for _ in range(K - 1):
        n = terms[-1]
        nxt = math.floor(alpha * n + beta * math.log(n))
        if nxt <= n:
            raise NotIncreasing(
                f"n0 = {n0} too small for greedy (alpha={alpha}, beta={beta})")
        terms.append(nxt)
    return AdmissibleSeq(alpha=float(alpha), beta=float(beta), terms=terms)


def _signed_dist(x):
    """Signed distance to the nearest integer, in [-1/2, 1/2)."""
    return x - round(x)


def pisot_sequence(zeta, alpha, k_start, K):
    """n_k = nearest integer to zeta alpha^k, k = k_start .. k_start+K-1."""
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    if zeta * alpha ** (k_start + K - 1) > FLOAT_HORIZON:
        raise PrecisionHorizonExceeded(
            "zeta*alpha^k beyond exact-double range; use pisot_test exact mode")
    terms = [round(zeta * alpha ** k) for k in range(k_start, k_start + K)]
    return AdmissibleSeq(alpha=float(alpha), beta=0.0, terms=terms)


def reconstruct(seq: AdmissibleSeq, tail_tol=1e-10):
    """zeta, d_k from the absolutely convergent rho-series.

    n_k = zeta alpha^k - k beta ln(alpha)/(alpha-1) + d_k holds by construction;
    the reported identity error is the worst relative deviation over stored k.
    """
    if len(seq.terms) < 10:
        raise TooShort("need at least 10 terms")
    a, b = seq.alpha, seq.beta
    la = math.log(a)
    rho = seq.rho()
    J = len(rho)
    max_rho = max(abs(r) for r in rho)
    tail = max_rho * a ** (-J) / (a - 1.0)
    if tail > tail_tol:
        raise SeriesTailTooLarge(
            f"series tail {tail:.2e} above {tail_tol:.1e}; supply more terms")
    zeta = seq.terms[0] + b * la / (a - 1.0) ** 2 \
        + sum(rho[j] / a ** (j + 1) for j in range(J))
    d_k = []
    for k in range(len(seq.terms)):
        s = sum(rho[j + k] / a ** (j + 1) for j in range(J - k))
        d_k.append(-b * la / (a - 1.0) ** 2 - s)
    worst = 0.0
    for k, n in enumerate(seq.terms):
        recon = zeta * a ** k - k * b * la / (a - 1.0) + d_k[k]
        worst = max(worst, abs(recon - n) / max(1.0, abs(n)))
    lz = math.log(zeta) if zeta > 0 else float("nan")
    drift = [r - s - b * lz for r, s in zip(rho, seq.phases)]
    return SeqReconstruction(zeta=zeta, d_k=d_k, rho_k=rho, tail_bound=tail,
                             identity_rel_error=worst, rho_vs_sigma_drift=drift)


def _require_alpha_admissible(seq: AdmissibleSeq):
    if seq.beta != 0.0:
        raise BetaNonzero("operation defined for alpha-admissible (beta = 0) input")


def shift(seq: AdmissibleSeq, j: int) -> AdmissibleSeq:
    _require_alpha_admissible(seq)
    if j < 0 or j >= len(seq.terms):
        raise TooShort("shift index outside the stored range")
    return AdmissibleSeq(seq.alpha, 0.0, seq.terms[j:])


def linear_combine(j1: int, seq1: AdmissibleSeq, j2: int, seq2: AdmissibleSeq):
    _require_alpha_admissible(seq1)
    _require_alpha_admissible(seq2)
    if seq1.alpha != seq2.alpha:
        raise ValueError("sequences must share alpha")
    n = min(len(seq1.terms), len(seq2.terms))
    terms = [j1 * seq1.terms[k] + j2 * seq2.terms[k] for k in range(n)]
    return AdmissibleSeq(seq1.alpha, 0.0, terms)  # NotIncreasing raised inside


def perturb(seq: AdmissibleSeq, eps) -> AdmissibleSeq:
    _require_alpha_admissible(seq)
    if len(eps) < len(seq.terms):
        raise TooShort("need one epsilon per term")
    terms = [n + int(e) for n, e in zip(seq.terms, eps)]
    return AdmissibleSeq(seq.alpha, 0.0, terms)


def reduce(seq: AdmissibleSeq, ell: int):
    """m_k = n_{k+ell} - n_k as an alpha-admissible sequence.

    Returns (reduced, predicted_limit) with predicted_limit = ell beta ln alpha.
    """
    if len(seq.terms) < ell + 10:
        raise TooShort(f"need at least {ell + 10} terms")
    terms = [seq.terms[k + ell] - seq.terms[k]
             for k in range(len(seq.terms) - ell)]
    reduced = AdmissibleSeq(seq.alpha, 0.0, terms)
    return reduced, ell * seq.beta * math.log(seq.alpha)


def rational_beta_construct(alpha, k1, k2, base: AdmissibleSeq):
    """(alpha, beta)-admissible sequence with phase converging to a k2-cycle.

    n_k = base_k - floor(k theta) with theta = k1/k2 and
    beta = theta (alpha - 1)/ln(alpha).
    """
    if k2 < 1 or math.gcd(abs(k1), k2) != 1 and k1 != 0:
        raise ValueError("k1/k2 must be in lowest terms with k2 >= 1")
    _require_alpha_admissible(base)
    theta = k1 / k2
    beta = theta * (alpha - 1.0) / math.log(alpha)
    terms = [n - math.floor(k * theta) for k, n in enumerate(base.terms)]
    return AdmissibleSeq(float(alpha), beta, terms)


def detect_cycle(phases, ell_max=12, tol=1e-4, window=8):
    """Smallest period ell <= ell_max with per-residue-class spread < tol.

    Uses the last `window` entries of each residue class; returns
    (ell, [class means]) or None.
    """
    phases = list(phases)
    for ell in range(1, ell_max + 1):
        classes = [[] for _ in range(ell)]
        for k, s in enumerate(phases):
            classes[k % ell].append(s)
        if any(len(cl) < window for cl in classes):
            continue
        ok = True
        limits = []
        for cl in classes:
            tail = cl[-window:]
            if max(tail) - min(tail) >= tol:
                ok = False
                break
            limits.append(sum(tail) / len(tail))
        if ok:
            return ell, limits
    return None


# -- Pisot property --------------------------------------------------------------


@dataclass
class PisotTrajectory:
    distances: list          # ||zeta alpha^k||
    verdict: str             # 'decreasing' | 'bounded-away' | 'inconclusive'
    conjugate_modulus: float | None
    exact: bool

    def measured_ratio(self):
        """Least-squares decay rate of the distances (window-max smoothed)."""
        d = np.array(self.distances, dtype=float)
        d = np.maximum(d, 1e-300)
        w = max(3, len(d) // 8)
        sm = np.array([d[max(0, i - w):i + 1].max() for i in range(len(d))])
        ks = np.arange(len(sm), dtype=float)
        slope = np.polyfit(ks[w:], np.log(sm[w:]), 1)[0]
        return float(np.exp(slope))


def _newton_power_sums(int_coeffs, K):
    """Integer power sums of the roots of a monic integer polynomial.

    int_coeffs: [c0, c1, ..., c_{d-1}, 1] lowest first (monic).
    """
    d = len(int_coeffs) - 1
    c = list(int_coeffs)
    if c[-1] != 1:
        raise ValueError("minimal polynomial must be monic")
    p = [d]
    for k in range(1, K):
        if k <= d:
            s = -k * c[d - k]
            for i in range(1, k):
                s -= c[d - i] * p[k - i]
        else:
            s = 0
            for i in range(1, d + 1):
                s -= c[d - i] * p[k - i]
        p.append(s)
    return p


def pisot_test(alpha, zeta=1.0, K=40, tol=1e-6, minimal_poly=None, root_index=None,
               zeta_coords=None):
    """Trajectory ||zeta alpha^k|| with a decreasing / bounded-away verdict.

    Floating mode: alpha a float, refuses alpha^K beyond 2^48.
    Exact mode: minimal_poly = integer coefficients (lowest first, monic),
    root_index selects alpha among the roots sorted by descending real part,
    zeta_coords = rational coordinates of zeta in the power basis of alpha.
    The integer part is tracked by the exact trace recurrence; only the
    O(max|conj|^k) remainder is floating point.
    """
    if minimal_poly is not None:
        roots = np.roots(np.array(minimal_poly[::-1], dtype=float))
        roots = sorted(roots, key=lambda r: -r.real)
        idx = 0 if root_index is None else root_index
        alpha_val = roots[idx]
        if abs(alpha_val.imag) > 1e-12 or alpha_val.real <= 1.0:
            raise ValueError("selected root is not a real number > 1")
        others = [r for i, r in enumerate(roots) if i != idx]
        conj_mod = max((abs(r) for r in others), default=0.0)
        if zeta_coords is None:
            zeta_coords = [Fraction(1)]
        zc = [Fraction(v) for v in zeta_coords]
        p = _newton_power_sums(list(minimal_poly), K + len(zc) + 1)
        dist = []
        for k in range(K):
            trace = sum(zc[i] * p[k + i] for i in range(len(zc)))
            conj_part = sum(complex(sum(float(zc[i]) * r ** i for i in range(len(zc))))
                            * r ** k for r in others)
            val_minus_trace = -conj_part.real
            frac = float(trace - round(trace))
            dist.append(abs(_signed_dist(frac + val_minus_trace)))
        traj = dist
        exact = True
    else:
        alpha = float(alpha)
        if zeta * alpha ** K > FLOAT_HORIZON:
            raise PrecisionHorizonExceeded(
                f"alpha^K = {alpha ** K:.3e} beyond the exact-double horizon")
        traj = [abs(_signed_dist(zeta * alpha ** k)) for k in range(K)]
        conj_mod = None
        exact = False
    head = max(traj[: max(3, K // 4)])
    tail = max(traj[-max(3, K // 4):])
    result = PisotTrajectory(distances=traj, verdict="inconclusive",
                             conjugate_modulus=conj_mod, exact=exact)
    if tail < tol or (tail < 0.2 * max(head, 1e-30)
                      and result.measured_ratio() < 0.97):
        result.verdict = "decreasing"
    elif min(traj[K // 2:]) > 0.02:
        result.verdict = "bounded-away"
    return result
