"""Cross-validation of the transcript-tree runner against a naive
global-channel oracle.

The oracle embeds every Kraus operator and listener unitary with
explicit Kronecker products on the full 2n-qubit space, composes them
transcript by transcript, and reduces outputs through the
independently-tested qcore partial trace.  It shares no evolution or
reduction code with the runner.
"""

import numpy as np
import pytest

from edplab.errmodels import fidelity_witness
from edplab.locc import (
    AlwaysAccept,
    ConstantAccept,
    PovmAccept,
    Protocol,
    make_random_pair,
    make_random_permutation,
    make_simple_random_hash,
    random_protocol,
    run,
)
from edplab.qcore import (
    ALICE,
    BOB,
    DensityMatrix,
    as_density,
    hermitian_sqrt,
    partial_trace,
)
from edplab.rng import substream
from edplab.sampling import random_density_matrix, random_pure_state


def _embed(op: np.ndarray, party: str, n: int) -> np.ndarray:
    eye = np.eye(1 << n)
    return np.kron(op, eye) if party == ALICE else np.kron(eye, op)


def oracle(protocol: Protocol, state):
    """(success probability, output 4x4, conditional output 4x4 or None)."""
    n = protocol.n_pairs
    rho0 = as_density(state).matrix
    success = 0.0
    out = np.zeros((4, 4), dtype=np.complex128)
    cond = np.zeros((4, 4), dtype=np.complex128)
    for seed, w in enumerate(protocol.seed_weights):
        states = {"": rho0}
        for rnd in protocol.rounds:
            instr = rnd.for_seed(seed)
            assert instr.n_workspace == 0, "oracle covers workspace-free instruments"
            listener = rnd.listener_for_seed(seed)
            new = {}
            for t, rho in states.items():
                if listener is not None:
                    g = _embed(listener, rnd.listener, n)
                    rho = g @ rho @ g.conj().T
                for bit in (0, 1):
                    acc = np.zeros_like(rho)
                    for k in instr.branches[bit]:
                        g = _embed(k, rnd.party, n)
                        acc += g @ rho @ g.conj().T
                    new[t + str(bit)] = acc
            states = new
        pair = protocol.output_pair_for(seed)
        keep = {(ALICE, pair), (BOB, pair)}
        for t, rho in states.items():
            p_t = float(np.trace(rho).real)
            if p_t < 1e-12:
                continue
            dm = DensityMatrix(n, n, rho / p_t, validate=False)
            reduced = partial_trace(dm, keep).matrix
            out += w * p_t * reduced
            rule = protocol.accept
            if isinstance(rule, AlwaysAccept):
                r_t, post = 1.0, reduced
            elif isinstance(rule, ConstantAccept):
                r_t = rule.probability(t)
                post = reduced
            else:
                assert isinstance(rule, PovmAccept)
                m = _embed(rule.element(seed, t), ALICE, n)
                r_t = float(np.trace(m @ rho).real) / p_t
                if r_t < 1e-12:
                    r_t, post = 0.0, np.zeros((4, 4))
                else:
                    root = _embed(hermitian_sqrt(rule.element(seed, t), floor=1e-9), ALICE, n)
                    squeezed = root @ rho @ root.conj().T
                    weight = float(np.trace(squeezed).real)
                    post = (
                        partial_trace(
                            DensityMatrix(n, n, squeezed / weight, validate=False), keep
                        ).matrix
                        * weight
                        / (p_t * r_t)
                    )
            success += w * p_t * r_t
            cond += w * p_t * r_t * post
    conditional = cond / success if success > 1e-12 else None
    return success, out, conditional


def assert_matches_oracle(protocol, state):
    result = run(protocol, state)
    succ, out, cond = oracle(protocol, state)
    assert result.success_probability == pytest.approx(succ, abs=1e-10)
    np.testing.assert_allclose(result.output.matrix, out, atol=1e-10)
    if cond is None:
        assert result.conditional_output is None
    else:
        np.testing.assert_allclose(result.conditional_output.matrix, cond, atol=1e-10)


def test_builtin_protocols_match_oracle():
    rng = np.random.default_rng(71)
    for proto in (
        make_random_pair(2),
        make_random_permutation(2),
        make_simple_random_hash(2, 1),
        make_simple_random_hash(3, 2),
    ):
        n = proto.n_pairs
        assert_matches_oracle(proto, fidelity_witness(n, 0.25))
        assert_matches_oracle(proto, random_density_matrix(rng, n, n))
        assert_matches_oracle(proto, random_pure_state(rng, n, n))


def test_random_protocols_match_oracle():
    for i in range(12):
        gen = substream(2024, "oracle", i)
        n = int(gen.integers(1, 3))
        proto = random_protocol(
            gen,
            n,
            n_rounds=int(gen.integers(1, 4)),
            n_seeds=int(gen.integers(1, 3)),
            kraus_per_branch=int(gen.integers(1, 3)),
            with_listeners=bool(i % 2),
        )
        assert_matches_oracle(proto, random_density_matrix(gen, n, n))
        assert_matches_oracle(proto, random_pure_state(gen, n, n))
