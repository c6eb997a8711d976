import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import skewlav as sk
from skewlav.errors import (
    BetaNonzero,
    NotIncreasing,
    PrecisionHorizonExceeded,
    TooShort,
)

PHI = (1 + math.sqrt(5.0)) / 2


def test_greedy_powers_of_two():
    seq = sk.generate_greedy(2.0, 0.0, 1, 11)
    assert seq.terms == [2 ** k for k in range(11)]
    assert all(s == 0.0 for s in seq.phases)


def test_greedy_three_halves():
    seq = sk.generate_greedy(1.5, 0.0, 2, 10)
    assert seq.terms == [2, 3, 4, 6, 9, 13, 19, 28, 42, 63]
    assert all(s in (0.0, -0.5) for s in seq.phases)


def test_greedy_phases_in_unit_interval():
    seq = sk.generate_greedy(PHI, 0.0, 3, 20)
    assert all(-1.0 < s <= 0.0 for s in seq.phases)
    assert seq.max_phase <= 1.0


def test_greedy_not_increasing():
    with pytest.raises(NotIncreasing):
        sk.generate_greedy(1.1, -5.0, 2, 5)


def test_pisot_sequence_powers_of_two():
    seq = sk.pisot_sequence(1.0, 2.0, 0, 12)
    assert seq.terms == [2 ** k for k in range(12)]
    assert all(s == 0.0 for s in seq.phases)


def test_pisot_sequence_lucas():
    seq = sk.pisot_sequence(1.0, PHI, 2, 15)
    # Lucas numbers via the integer recurrence L_{k+1} = L_k + L_{k-1}
    lucas = [2, 1]
    while len(lucas) < 20:
        lucas.append(lucas[-1] + lucas[-2])
    assert seq.terms == lucas[2:17]
    ph = np.abs(seq.phases)
    ratios = ph[1:] / ph[:-1]
    assert abs(np.median(ratios) - 1 / PHI) < 0.1 / PHI


def test_pisot_sequence_pell():
    alpha = 1 + math.sqrt(2.0)
    seq = sk.pisot_sequence(1.0, alpha, 2, 14)
    # Pell-type integer recurrence p_{k+1} = 2 p_k + p_{k-1}
    p = [2, 2]
    while len(p) < 20:
        p.append(2 * p[-1] + p[-2])
    assert seq.terms == p[2:16]
    ph = np.abs(seq.phases)
    ratios = ph[1:] / ph[:-1]
    assert abs(np.median(ratios) - abs(1 - math.sqrt(2.0))) < 0.05


def test_pisot_sequence_horizon():
    with pytest.raises(PrecisionHorizonExceeded):
        sk.pisot_sequence(1.0, 2.0, 0, 60)


def test_reconstruct_powers_of_two():
    seq = sk.AdmissibleSeq(2.0, 0.0, [2 ** k for k in range(20)])
    rec = sk.reconstruct(seq)
    assert abs(rec.zeta - 1.0) < 1e-12
    assert max(abs(d) for d in rec.d_k) < 1e-12


def test_reconstruct_lucas_closed_form():
    seq = sk.pisot_sequence(1.0, PHI, 2, 52)
    rec = sk.reconstruct(seq)
    # terms restart at L_2, so the reconstructed zeta is phi^2
    assert abs(rec.zeta - PHI ** 2) < 1e-9
    for k in range(10):
        expected = (-PHI) ** (-(k + 2))
        assert abs(rec.d_k[k] - expected) < 1e-8


def test_reconstruct_greedy_identity():
    seq = sk.generate_greedy(2.0, 1.0, 50, 25)
    # identity error scales like tail/zeta, so a 1e-4 tail is ample for 1e-6
    rec = sk.reconstruct(seq, tail_tol=1e-4)
    assert rec.identity_rel_error < 1e-6


def test_reconstruct_identity_random_draws():
    rng = np.random.default_rng(17)
    for _ in range(20):
        alpha = rng.uniform(1.1, 3.0)
        beta = rng.uniform(-2.0, 2.0)
        n0 = int(rng.integers(50, 400))
        # series tail ~ alpha^{-K}: small alpha needs more stored terms
        K = int(np.ceil(23.0 / np.log(alpha))) + 12
        try:
            seq = sk.generate_greedy(alpha, beta, n0, K)
        except NotIncreasing:
            continue
        if seq.terms[-1] > 2 ** 52:
            continue
        rec = sk.reconstruct(seq, tail_tol=1e-6 * n0)
        assert rec.identity_rel_error < 1e-6
        # rho_k - sigma_k - beta ln zeta -> 0
        drift = rec.rho_vs_sigma_drift
        assert abs(drift[-1]) < abs(drift[0]) + 1e-9


def test_reconstruct_too_short():
    with pytest.raises(TooShort):
        sk.reconstruct(sk.AdmissibleSeq(2.0, 0.0, [1, 2, 4, 8]))


def test_shift_phases():
    seq = sk.pisot_sequence(1.0, 2.0, 0, 12)
    sh = sk.shift(seq, 3)
    assert sh.terms == seq.terms[3:]
    assert all(s == 0.0 for s in sh.phases)


def test_linear_combine_lucas():
    two = sk.pisot_sequence(1.0, 2.0, 2, 13)
    lucas = sk.pisot_sequence(1.0, PHI, 2, 13)
    # alpha differs: the lemma needs one alpha, so combine same-alpha inputs
    with pytest.raises(ValueError):
        sk.linear_combine(1, two, 1, lucas)
    comb = sk.linear_combine(1, lucas, 2, sk.shift(lucas, 0))
    expect = [3 * s for s in lucas.phases]
    assert np.allclose(comb.phases, expect, atol=1e-9)


def test_perturb_alternating():
    seq = sk.pisot_sequence(1.0, 2.0, 3, 12)
    eps = [(-1) ** k for k in range(len(seq.terms))]
    pert = sk.perturb(seq, eps)
    expect = [e1 - 2.0 * e0 for e0, e1 in zip(eps, eps[1:])]
    assert np.allclose(pert.phases, expect, atol=1e-10)
    # item (3) closed form: sigma_k = 3(-1)^{k+1}
    assert np.allclose(pert.phases, [3 * (-1) ** (k + 1) for k in range(len(expect))])


def test_phase_identities_random():
    rng = np.random.default_rng(23)
    base = sk.pisot_sequence(1.0, 3.0, 1, 14)
    for _ in range(10):
        eps = rng.integers(-2, 3, size=len(base.terms))
        pert = sk.perturb(base, eps)
        expect = [base.phases[k] + eps[k + 1] - 3.0 * eps[k]
                  for k in range(len(base.phases))]
        assert np.allclose(pert.phases, expect, atol=1e-10)


def test_perturb_requires_beta_zero():
    seq = sk.generate_greedy(2.0, 1.0, 50, 15)
    with pytest.raises(BetaNonzero):
        sk.perturb(seq, [0] * len(seq.terms))


def test_reduce_period_two():
    seq = sk.AdmissibleSeq(2.0, 0.0, [2 ** k for k in range(15)])
    red, lim = sk.reduce(seq, 2)
    assert red.terms == [3 * 2 ** k for k in range(13)]
    assert all(s == 0.0 for s in red.phases)
    assert lim == 0.0


def test_reduce_rational_beta_limit():
    base = sk.pisot_sequence(1.0, 2.0, 4, 30)
    seq = sk.rational_beta_construct(2.0, 1, 2, base)
    red, lim = sk.reduce(seq, 2)
    assert abs(lim - 2 * seq.beta * math.log(2.0)) < 1e-12
    tail = red.phases[-6:]
    assert max(tail) - min(tail) < 1e-6
    assert abs(tail[-1] - lim) < 0.05


def test_rational_beta_cycles():
    base = sk.pisot_sequence(1.0, 2.0, 4, 36)
    for k1, k2 in ((1, 2), (1, 3)):
        seq = sk.rational_beta_construct(2.0, k1, k2, base)
        got = sk.detect_cycle(seq.phases, ell_max=12, tol=1e-4, window=4)
        assert got is not None
        assert got[0] == k2
    # k1 = 0 keeps the base and has period 1
    seq0 = sk.rational_beta_construct(2.0, 0, 1, base)
    assert seq0.terms == base.terms
    got = sk.detect_cycle(seq0.phases, window=4)
    assert got is not None and got[0] == 1


def test_detect_cycle_constant():
    got = sk.detect_cycle([0.25] * 40)
    assert got is not None and got[0] == 1 and abs(got[1][0] - 0.25) < 1e-12


def test_detect_cycle_three_halves_none():
    seq = sk.generate_greedy(1.5, 0.0, 2, 41)
    assert sk.detect_cycle(seq.phases, ell_max=12, tol=1e-3, window=3) is None


def test_pisot_test_float_two():
    traj = sk.pisot_test(2.0, zeta=1.0, K=40)
    assert all(d == 0.0 for d in traj.distances)
    assert traj.verdict == "decreasing"


def test_pisot_test_exact_golden():
    traj = sk.pisot_test(None, K=45, minimal_poly=[-1, -1, 1])
    assert traj.exact and traj.verdict == "decreasing"
    assert abs(traj.conjugate_modulus - 1 / PHI) < 1e-12
    assert abs(traj.measured_ratio() - 1 / PHI) < 0.1 / PHI
    # exact nearest-integer distances match ||phi^k|| = phi^{-k}
    for k in range(2, 20):
        assert abs(traj.distances[k] - PHI ** (-k)) < 1e-9


def test_pisot_test_exact_pell():
    traj = sk.pisot_test(None, K=40, minimal_poly=[-1, -2, 1])
    alpha_conj = abs(1 - math.sqrt(2.0))
    assert traj.verdict == "decreasing"
    assert abs(traj.measured_ratio() - alpha_conj) < 0.1 * alpha_conj


def test_pisot_test_exact_plastic():
    traj = sk.pisot_test(None, K=60, minimal_poly=[-1, -1, 0, 1])
    # conjugate modulus = 1/sqrt(rho) for the plastic number rho
    assert traj.verdict == "decreasing"
    assert abs(traj.measured_ratio() - traj.conjugate_modulus) \
        < 0.1 * traj.conjugate_modulus


def test_pisot_test_three_halves():
    traj = sk.pisot_test(1.5, zeta=1.0, K=40)
    assert traj.verdict in ("bounded-away", "inconclusive")


def test_pisot_geometric_decay_list():
    # fixed Pisot list: 2, 3, phi, 1+sqrt2, plastic
    cases = [
        ([-1, -1, 1], 1 / PHI),
        ([-1, -2, 1], math.sqrt(2.0) - 1),
        ([-1, -1, 0, 1], None),
    ]
    for poly, ratio in cases:
        traj = sk.pisot_test(None, K=50, minimal_poly=poly)
        target = ratio if ratio is not None else traj.conjugate_modulus
        assert abs(traj.measured_ratio() - target) < 0.1 * target
    for alpha in (2.0, 3.0):
        traj = sk.pisot_test(alpha, K=25)
        assert max(traj.distances) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=50), st.integers(min_value=2, max_value=5))
def test_admissible_invariants_greedy(n0, alpha_int):
    try:
        seq = sk.generate_greedy(float(alpha_int), 0.5, n0, 12)
    except NotIncreasing:
        return
    assert all(b > a for a, b in zip(seq.terms, seq.terms[1:]))
    assert seq.max_phase < 2.0


def test_csv_export():
    seq = sk.generate_greedy(2.0, 0.0, 1, 12)
    rec = sk.reconstruct(seq)
    text = seq.to_csv(rec)
    lines = text.strip().splitlines()
    assert lines[0] == "k,n_k,sigma_k,rho_k,d_k"
    assert len(lines) == 13
    assert rec.to_json().startswith("{")
