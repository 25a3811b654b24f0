import itertools

import numpy as np
import pytest

from edplab import verify
from edplab.errmodels import consistent_extended, enumerate_extended
from edplab.locc import (
    AlwaysAccept,
    ConditionalOutputUndefined,
    ConstantAccept,
    Protocol,
    make_simple_random_hash,
    random_protocol,
)
from edplab.optimize import AscentConfig
from edplab.rng import substream
from edplab.sampling import (
    random_density_matrix,
    random_kraus_channel,
    random_povm_element,
)

QUICK = AscentConfig(restarts=3, steps=300, seed=11)


# ---------------------------------------------------------------------------
# dominance


def test_dominance_reflexive():
    rho = random_density_matrix(np.random.default_rng(1), 1, 1).matrix
    rep = verify.check_dominance(rho, rho)
    assert rep.holds
    assert rep.min_eigenvalue == pytest.approx(0.0, abs=1e-12)


def test_identity_dominates_any_state():
    rng = np.random.default_rng(2)
    for _ in range(20):
        rho = random_density_matrix(rng, 1, 1).matrix
        assert verify.check_dominance(np.eye(4), rho).holds


def test_dominance_rejects_non_hermitian():
    with pytest.raises(ValueError):
        verify.check_dominance(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((2, 2)))


def test_dominance_preserved_by_channels():
    rng = np.random.default_rng(3)
    for _ in range(30):
        a = random_density_matrix(rng, 1, 0).matrix * float(rng.uniform(1, 2))
        b = a - random_density_matrix(rng, 1, 0).matrix * float(rng.uniform(0, 0.5))
        b = (b + b.conj().T) / 2
        if not verify.check_dominance(a, b).holds:
            continue
        kraus = random_kraus_channel(rng, 2)
        a2 = sum(k @ a @ k.conj().T for k in kraus)
        b2 = sum(k @ b @ k.conj().T for k in kraus)
        assert verify.check_dominance(a2, b2).holds


def test_dominance_transitive_on_random_instances():
    rng = np.random.default_rng(4)
    for _ in range(30):
        c = random_density_matrix(rng, 1, 0).matrix
        b = c + random_density_matrix(rng, 1, 0).matrix * 0.3
        a = b + random_density_matrix(rng, 1, 0).matrix * 0.3
        assert verify.check_dominance(a, b).holds
        assert verify.check_dominance(b, c).holds
        assert verify.check_dominance(a, c).holds


def test_povm_dominance_consequence():
    rng = np.random.default_rng(5)
    sigma = random_density_matrix(rng, 1, 0).matrix
    rho = 0.5 * sigma + 0.5 * random_density_matrix(rng, 1, 0).matrix
    a = 0.5  # rho >= 0.5 sigma by construction
    povm = [random_povm_element(rng, 2) for _ in range(4)]
    assert verify.povm_dominance_consequence(rho, sigma, a, povm)


# ---------------------------------------------------------------------------
# splitting


def test_splitting_zero_round_always_succ():
    proto = Protocol(1, (1.0,), (), AlwaysAccept(), (0,))
    rep = verify.verify_splitting(proto)
    assert rep.passed and rep.initial_condition_ok
    assert rep.p_success_perfect == pytest.approx(1.0)
    assert rep.q_success_mixed == pytest.approx(1.0)


def test_splitting_constant_accept_without_rounds_gives_p_equals_q():
    proto = Protocol(2, (1.0,), (), ConstantAccept(0.37), (0,))
    rep = verify.verify_splitting(proto)
    assert rep.passed
    assert rep.p_success_perfect == pytest.approx(rep.q_success_mixed, abs=1e-12)


def test_splitting_on_simple_random_hash():
    for n, s in ((2, 1), (3, 1), (3, 2)):
        rep = verify.verify_splitting(make_simple_random_hash(n, s))
        assert rep.passed, rep
        assert rep.initial_condition_ok
        # the hash saturates the success inequality: q = 2^-s = p^2/2^s
        assert rep.success_margin == pytest.approx(0.0, abs=1e-10)


def test_splitting_random_protocol_sweep():
    # listener unitaries are local channels, so the dominance chain must
    # survive them too
    for i in range(40):
        gen = substream(77, "test-splitting", i)
        n = int(gen.integers(1, 4))
        rounds = int(gen.integers(1, 4))
        proto = random_protocol(
            gen, n, rounds, n_seeds=int(gen.integers(1, 3)),
            kraus_per_branch=int(gen.integers(1, 3)),
            with_listeners=bool(i % 2),
        )
        rep = verify.verify_splitting(proto)
        assert rep.passed, (i, rep)


def test_splitting_rejects_large_instances():
    proto = random_protocol(np.random.default_rng(0), 1, 5)
    with pytest.raises(ValueError):
        verify.verify_splitting(proto)


# ---------------------------------------------------------------------------
# bound probes


def test_measure_r_probe_n1():
    rep = verify.optimize_0bit_measure_r(1, 1, ancillas=1, config=QUICK)
    assert rep.passed and not rep.falsified
    assert rep.bound == pytest.approx(0.5)
    assert rep.floor == pytest.approx(0.5, abs=1e-12)
    assert rep.achieved <= rep.bound + 1e-6
    assert rep.achieved >= rep.floor - 1e-6


def test_measure_r_probe_n2():
    rep = verify.optimize_0bit_measure_r(2, 1, ancillas=1, config=QUICK)
    assert rep.passed
    assert rep.bound == pytest.approx(0.75)
    assert rep.achieved == pytest.approx(0.75, abs=1e-6)


def test_measure_r_probe_rejects_large_class():
    with pytest.raises(ValueError):
        verify.optimize_0bit_measure_r(4, 1)
    with pytest.raises(ValueError):
        verify.optimize_0bit_measure_r(2, 1, ancillas=3)


def test_depolarization_probe_trivial_p0():
    rep = verify.optimize_0bit_depolarization(1, 0.0, ancillas=0, config=QUICK)
    assert rep.passed
    assert rep.bound == pytest.approx(1.0)
    assert rep.achieved == pytest.approx(1.0, abs=1e-9)


def test_depolarization_probe_sits_between_floor_and_bound():
    rep = verify.optimize_0bit_depolarization(1, 0.5, ancillas=1, config=QUICK)
    assert rep.passed
    assert rep.floor == pytest.approx(0.625, abs=1e-12)
    assert rep.bound == pytest.approx(0.75)
    assert rep.floor - 1e-6 <= rep.achieved <= rep.bound + 1e-6


def test_bound_report_records():
    rep = verify.optimize_0bit_measure_r(1, 0, ancillas=0, config=QUICK)
    rec = rep.to_record()
    assert rec["theorem"] == "neg-measure-r"
    assert rec["param_n"] == 1 and rec["param_r"] == 0
    assert set(rec) >= {"bound", "achieved", "margin", "pass", "seed", "notes"}


# ---------------------------------------------------------------------------
# fidelity-model bounds


def test_neg_fidelity_on_hash():
    for (n, s), eps in itertools.product(((2, 1), (3, 2)), (0.1, 0.25)):
        rep = verify.verify_neg_fidelity(make_simple_random_hash(n, s), eps)
        assert rep.passed, rep
        assert rep.bound == pytest.approx(1 - eps / 2 ** (s + 1))


def test_neg_fidelity_on_random_protocols():
    checked = 0
    i = 0
    while checked < 25:
        gen = substream(99, "test-neg-fidelity", i)
        i += 1
        n = int(gen.integers(1, 3))
        proto = random_protocol(gen, n, int(gen.integers(0, 4)), n_seeds=1)
        try:
            rep = verify.verify_neg_fidelity(proto, 0.2)
        except ConditionalOutputUndefined:
            continue
        checked += 1
        assert rep.passed, (i, rep)


def test_pos_fidelity_reports():
    for n, s, eps in ((2, 1, 0.1), (2, 1, 0.25), (3, 2, 0.25)):
        rep = verify.pos_fidelity_report(n, s, eps)
        assert rep.passed
        assert rep.achieved >= rep.bound - 1e-9


def test_no_comm_probe_exact_value_and_flag():
    eps = 0.2
    rep = verify.no_comm_fidelity_report(2, eps)
    eps_prime = eps * 16 / 15
    assert rep.achieved == pytest.approx(1 - 0.75 * eps_prime, abs=1e-12)
    assert not rep.passed and rep.falsified
    # at a single pair the claimed floor coincides with the exact value
    rep1 = verify.no_comm_fidelity_report(1, eps)
    assert rep1.passed and not rep1.falsified


# ---------------------------------------------------------------------------
# lemma suite


def test_lemma_suite_passes_and_is_deterministic():
    a = verify.lemma_suite(seed=5, count=60)
    b = verify.lemma_suite(seed=5, count=60)
    assert [r.to_record() for r in a] == [r.to_record() for r in b]
    assert all(r.passed for r in a)
    names = {r.lemma for r in a}
    assert names == {
        "pauli-deviation-cap",
        "bell-base-fidelity-identity",
        "disentangled-base-fidelity-cap",
        "fidelity-linearity",
        "fidelity-monotonicity",
    }


def test_lemma_suite_tolerance_override_fails():
    reports = verify.lemma_suite(seed=5, count=60, tolerance_override=1e-15)
    assert any(not r.passed for r in reports)


# ---------------------------------------------------------------------------
# counting


def test_counting_reports_all_pass():
    reports = verify.verify_counting()
    assert [r.identity for r in reports] == [
        "binary-joint-consistency",
        "extended-joint-consistency",
        "aggregate-binomial",
    ]
    assert all(r.passed for r in reports)
    assert all(r.mismatches == 0 for r in reports)


def test_extended_joint_counts_match_pure_python_bruteforce():
    # the vectorized Gram-matrix path must agree with a literal triple
    # loop over (c, u) pairs built on consistent_extended
    for n in (1, 2):
        for r in range(n + 1):
            fast = verify._extended_joint_counts(n, r)
            vecs = enumerate_extended(n, r)
            for a in range(1 << n):
                for b in range(1 << n):
                    slow = 0
                    for c in range(1 << n):
                        xa = [int(x) for x in format(a, f"0{n}b")] + [
                            int(x) for x in format(a ^ c, f"0{n}b")
                        ]
                        xb = [int(x) for x in format(b, f"0{n}b")] + [
                            int(x) for x in format(b ^ c, f"0{n}b")
                        ]
                        slow += sum(
                            1
                            for u in vecs
                            if consistent_extended(xa, u) and consistent_extended(xb, u)
                        )
                    assert int(fast[a, b]) == slow


def test_binary_consistency_matrix_is_honest():
    from edplab.errmodels import consistent, enumerate_indicators

    for n in (2, 3):
        for r in range(n + 1):
            cons = verify._binary_consistency_matrix(n, r)
            vecs = enumerate_indicators(n, r)
            for vi, v in enumerate(vecs):
                for x in range(1 << n):
                    bits = [int(c) for c in format(x, f"0{n}b")]
                    assert bool(cons[vi, x]) == consistent(bits, v)
