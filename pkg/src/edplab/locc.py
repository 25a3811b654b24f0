"""Two-party LOCC protocol state machine.

A protocol is data: a shared-randomness distribution over seeds, an
ordered list of rounds, an accept rule, and an output-pair designation.
Each round names a sender and a two-branch quantum instrument on that
party's register; the branch taken is the one classical bit sent that
round, so the communication cost equals the number of rounds.  After
the last round Alice declares SUCC or FAIL; the declaration is modeled
as a per-leaf accept probability, either a constant or the expectation
of a POVM element on her register (realized as the gentle sqrt(M)
measurement), and is not counted as communication.

Evaluation is exact: the full transcript tree is enumerated per seed,
never sampled.  Instruments are given directly in Kraus form, which
subsumes local ancillas; an instrument may additionally declare
workspace qubits that are appended in |0> for its round and traced out
afterwards.

``run`` is a pure function; independent runs may execute in parallel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errmodels import ErrorModel, WeightedStates
from .qcore import (
    ALICE,
    BOB,
    DensityMatrix,
    PureState,
    hermitian_sqrt,
    _check_capacity,
)

PROB_TOL = 1e-12


class ConditionalOutputUndefined(ValueError):
    """Raised when the total accept probability is zero."""


# ---------------------------------------------------------------------------
# building blocks


@dataclass(frozen=True)
class Instrument:
    """Two-branch quantum instrument on one party's register.

    ``branches[b]`` is the Kraus list realizing the completely positive
    map for classical outcome bit ``b``; together the branches must be
    trace preserving.  Kraus operators act on the party's protocol
    qubits plus ``n_workspace`` fresh |0> qubits appended at the low
    end of the register.
    """

    branches: tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]
    n_workspace: int = 0

    def __post_init__(self) -> None:
        if len(self.branches) != 2:
            raise ValueError("an instrument emits exactly one bit: two branches")
        frozen = []
        dim = None
        for branch in self.branches:
            ops = []
            for k in branch:
                arr = np.asarray(k, dtype=np.complex128).copy()
                if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                    raise ValueError("Kraus operators must be square")
                if dim is None:
                    dim = arr.shape[0]
                elif arr.shape[0] != dim:
                    raise ValueError("Kraus operators must share one dimension")
                arr.setflags(write=False)
                ops.append(arr)
            frozen.append(tuple(ops))
        if dim is None:
            raise ValueError("instrument must contain at least one Kraus operator")
        total = sum(
            k.conj().T @ k for branch in frozen for k in branch
        )
        if np.abs(total - np.eye(dim)).max() > 1e-9:
            raise ValueError("instrument branches are not trace preserving")
        object.__setattr__(self, "branches", tuple(frozen))

    @property
    def dim(self) -> int:
        return self.branches[0][0].shape[0] if self.branches[0] else self.branches[1][0].shape[0]

    @property
    def pure_compatible(self) -> bool:
        """Single-Kraus branches without workspace keep pure states pure."""
        return self.n_workspace == 0 and all(len(b) == 1 for b in self.branches)


@dataclass(frozen=True)
class Round:
    """One communication round: ``party`` sends the instrument's bit.

    ``instruments`` holds one instrument per seed; a length-1 tuple is
    shared by every seed.  The listening party may apply a local
    unitary in the same round (``listener_unitaries``, per seed); local
    unitaries carry no communication.
    """

    party: str
    instruments: tuple[Instrument, ...]
    listener_unitaries: tuple[np.ndarray, ...] | None = None

    def __post_init__(self) -> None:
        if self.party not in (ALICE, BOB):
            raise ValueError(f"unknown party {self.party!r}")
        if not self.instruments:
            raise ValueError("round needs at least one instrument")
        object.__setattr__(self, "instruments", tuple(self.instruments))
        if self.listener_unitaries is not None:
            frozen = []
            for u in self.listener_unitaries:
                arr = np.asarray(u, dtype=np.complex128).copy()
                if np.abs(arr @ arr.conj().T - np.eye(arr.shape[0])).max() > 1e-9:
                    raise ValueError("listener operation must be unitary")
                arr.setflags(write=False)
                frozen.append(arr)
            object.__setattr__(self, "listener_unitaries", tuple(frozen))

    @property
    def listener(self) -> str:
        return BOB if self.party == ALICE else ALICE

    def for_seed(self, seed: int) -> Instrument:
        if len(self.instruments) == 1:
            return self.instruments[0]
        return self.instruments[seed]

    def listener_for_seed(self, seed: int) -> np.ndarray | None:
        if self.listener_unitaries is None:
            return None
        if len(self.listener_unitaries) == 1:
            return self.listener_unitaries[0]
        return self.listener_unitaries[seed]


class AlwaysAccept:
    """Alice declares SUCC on every leaf."""

    def __repr__(self) -> str:  # pragma: no cover
        return "AlwaysAccept()"


@dataclass(frozen=True)
class ConstantAccept:
    """Input-independent accept probability per transcript."""

    values: float | Mapping[str, float]

    def probability(self, transcript: str) -> float:
        if isinstance(self.values, (int, float)):
            r = float(self.values)
        else:
            r = float(self.values[transcript])
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"accept probability {r} outside [0, 1]")
        return r


@dataclass(frozen=True)
class PovmAccept:
    """Accept via a POVM element on Alice's register per (seed, leaf)."""

    elements: Mapping[tuple[int, str], np.ndarray] | Callable[[int, str], np.ndarray]

    def element(self, seed: int, transcript: str) -> np.ndarray:
        if callable(self.elements):
            return np.asarray(self.elements(seed, transcript), dtype=np.complex128)
        return np.asarray(self.elements[(seed, transcript)], dtype=np.complex128)


AcceptRule = AlwaysAccept | ConstantAccept | PovmAccept


@dataclass(frozen=True)
class Protocol:
    """LOCC entanglement-distillation protocol on ``n_pairs`` pairs.

    Deterministic protocols are the special case of a point-mass seed
    distribution.  ``output_pair`` designates which pair both parties
    output, per seed (length-1 tuples broadcast).
    """

    n_pairs: int
    seed_weights: tuple[float, ...]
    rounds: tuple[Round, ...]
    accept: AcceptRule
    output_pair: tuple[int, ...]
    name: str = ""

    def __post_init__(self) -> None:
        if self.n_pairs < 1:
            raise ValueError("need at least one pair")
        _check_capacity(2 * self.n_pairs)
        weights = tuple(float(w) for w in self.seed_weights)
        if not weights:
            raise ValueError("need at least one seed")
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError("seed weights must form a distribution")
        pairs = tuple(int(j) for j in self.output_pair)
        if len(pairs) not in (1, len(weights)):
            raise ValueError("output_pair must have one entry or one per seed")
        if any(not 0 <= j < self.n_pairs for j in pairs):
            raise ValueError("output pair index out of range")
        for rnd in self.rounds:
            if len(rnd.instruments) not in (1, len(weights)):
                raise ValueError("round instruments must have one entry or one per seed")
            if rnd.listener_unitaries is not None and len(
                rnd.listener_unitaries
            ) not in (1, len(weights)):
                raise ValueError("listener unitaries must have one entry or one per seed")
        object.__setattr__(self, "seed_weights", weights)
        object.__setattr__(self, "rounds", tuple(self.rounds))
        object.__setattr__(self, "output_pair", pairs)

    @property
    def bits(self) -> int:
        """Classical communication cost: one bit per round."""
        return len(self.rounds)

    @property
    def n_seeds(self) -> int:
        return len(self.seed_weights)

    @property
    def deterministic(self) -> bool:
        return self.n_seeds == 1

    def output_pair_for(self, seed: int) -> int:
        if len(self.output_pair) == 1:
            return self.output_pair[0]
        return self.output_pair[seed]


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class NodeRecord:
    """Transcript-tree node: probability and normalized local states."""

    probability: float
    alice_local: np.ndarray | None
    bob_local: np.ndarray | None


@dataclass(frozen=True)
class LeafRecord:
    component: int
    seed: int
    transcript: str
    weight: float
    probability: float
    accept_probability: float
    output_state: np.ndarray | None


@dataclass(frozen=True)
class RunResult:
    """Exact transcript-tree evaluation of a protocol on one input."""

    n_pairs: int
    bits: int
    leaves: tuple[LeafRecord, ...]
    success_probability: float
    output: DensityMatrix
    conditional_output: DensityMatrix | None
    nodes: Mapping[tuple[int, int, str], NodeRecord] | None = None

    def require_conditional_output(self) -> DensityMatrix:
        if self.conditional_output is None:
            raise ConditionalOutputUndefined(
                "protocol never declares SUCC on this input"
            )
        return self.conditional_output


# ---------------------------------------------------------------------------
# the exact runner


class _Node:
    """Mutable evolution state: pure (dA, dB) vector or flat mixed matrix."""

    __slots__ = ("kind", "arr", "dA", "dB")

    def __init__(self, kind: str, arr: np.ndarray, dA: int, dB: int):
        self.kind = kind
        self.arr = arr
        self.dA = dA
        self.dB = dB

    def norm(self) -> float:
        if self.kind == "pure":
            return float(np.linalg.norm(self.arr.reshape(-1)) ** 2)
        return float(np.trace(self.arr).real)

    def to_mixed(self) -> "_Node":
        if self.kind == "mixed":
            return self
        vec = self.arr.reshape(-1)
        return _Node("mixed", np.outer(vec, vec.conj()), self.dA, self.dB)

    def scaled_copy(self) -> "_Node":
        return _Node(self.kind, self.arr, self.dA, self.dB)


def _embed_kraus(k: np.ndarray, party: str, dA: int, dB: int) -> np.ndarray:
    if party == ALICE:
        return np.kron(k, np.eye(dB))
    return np.kron(np.eye(dA), k)


def _sandwich(arr: np.ndarray, k: np.ndarray, party: str, dA: int, dB: int) -> np.ndarray:
    """k . arr . k^dag on one party's side of a flat mixed matrix."""
    d = dA * dB
    if party == ALICE:
        out = (k @ arr.reshape(dA, dB * d)).reshape(d, d)
        v = np.tensordot(out.reshape(d, dA, dB), k.conj(), axes=([1], [1]))
        return np.moveaxis(v, 2, 1).reshape(d, d)
    v = np.tensordot(k, arr.reshape(dA, dB, d), axes=([1], [1]))
    out = np.moveaxis(v, 0, 1).reshape(d, d)
    return (out.reshape(d * dA, dB) @ k.conj().T).reshape(d, d)


def _apply_local_unitary(node: _Node, u: np.ndarray, party: str) -> _Node:
    if node.kind == "pure":
        if party == ALICE:
            return _Node("pure", u @ node.arr, node.dA, node.dB)
        return _Node("pure", node.arr @ u.T, node.dA, node.dB)
    return _Node("mixed", _sandwich(node.arr, u, party, node.dA, node.dB), node.dA, node.dB)


def _apply_branch(node: _Node, instrument: Instrument, party: str, branch: int) -> _Node:
    """Unnormalized post-branch state; workspace handled inside."""
    kraus = instrument.branches[branch]
    w = instrument.n_workspace
    dA, dB = node.dA, node.dB
    if node.kind == "pure" and instrument.pure_compatible:
        k = kraus[0]
        vec = node.arr
        if party == ALICE:
            return _Node("pure", k @ vec, dA, dB)
        return _Node("pure", vec @ k.T, dA, dB)
    mixed = node.to_mixed()
    if w == 0:
        out = np.zeros_like(mixed.arr)
        for k in kraus:
            out += _sandwich(mixed.arr, k, party, dA, dB)
        return _Node("mixed", out, dA, dB)
    # append workspace in |0>, apply, trace workspace back out
    dw = 1 << w
    dAx = dA * dw if party == ALICE else dA
    dBx = dB * dw if party == BOB else dB
    big = np.zeros((dAx * dBx, dAx * dBx), dtype=np.complex128)
    src = mixed.arr.reshape(dA, dB, dA, dB)
    if party == ALICE:
        ext = np.zeros((dA, dw, dB, dA, dw, dB), dtype=np.complex128)
        ext[:, 0, :, :, 0, :] = src
    else:
        ext = np.zeros((dA, dB, dw, dA, dB, dw), dtype=np.complex128)
        ext[:, :, 0, :, :, 0] = src
    ext = ext.reshape(dAx * dBx, dAx * dBx)
    for k in kraus:
        g = _embed_kraus(k, party, dAx, dBx)
        big += g @ ext @ g.conj().T
    big = big.reshape(dAx, dBx, dAx, dBx)
    if party == ALICE:
        t = big.reshape(dA, dw, dB, dA, dw, dB)
        out = np.einsum("awbcwd->abcd", t)
    else:
        t = big.reshape(dA, dB, dw, dA, dB, dw)
        out = np.einsum("abwcdw->abcd", t)
    return _Node("mixed", out.reshape(dA * dB, dA * dB), dA, dB)


def _reduce_pair(node: _Node, n: int, pair: int) -> np.ndarray:
    """4x4 reduced matrix of (Alice ``pair``, Bob ``pair``), unnormalized."""
    if node.kind == "pure":
        t = node.arr.reshape((2,) * (2 * n))
        t = np.moveaxis(t, (pair, n + pair), (0, 1)).reshape(4, -1)
        return t @ t.conj().T
    t = node.arr.reshape((2,) * (4 * n))
    t = np.moveaxis(
        t,
        (pair, n + pair, 2 * n + pair, 3 * n + pair),
        (0, 1, 2 * n, 2 * n + 1),
    )
    t = t.reshape(4, 1 << (2 * n - 2), 4, 1 << (2 * n - 2))
    return np.einsum("arbr->ab", t)


def _local_states(node: _Node) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized (alice, bob) marginals of a node state."""
    dA, dB = node.dA, node.dB
    if node.kind == "pure":
        psi = node.arr
        return psi @ psi.conj().T, psi.T @ psi.conj()
    t = node.arr.reshape(dA, dB, dA, dB)
    return np.einsum("abcb->ac", t), np.einsum("abad->bd", t)


def _coerce_input(protocol: Protocol, state) -> WeightedStates:
    if isinstance(state, (PureState, DensityMatrix)):
        weighted: WeightedStates = [(1.0, state)]
    else:
        weighted = list(state)
    for _, st in weighted:
        if st.n_alice != protocol.n_pairs or st.n_bob != protocol.n_pairs:
            raise ValueError(
                f"input must live on {protocol.n_pairs} pairs, got "
                f"({st.n_alice}, {st.n_bob})"
            )
    total = sum(w for w, _ in weighted)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"input weights sum to {total}, expected 1")
    return weighted


def _accept_info(
    protocol: Protocol, seed: int, transcript: str, node: _Node
) -> tuple[float, np.ndarray | None]:
    """Accept probability r_t and the accept-conditioned output block.

    Returns (r_t, post) where post is the unnormalized 4x4 output-pair
    state after a successful accept measurement scaled by p_t * r_t, or
    None when the rule has no backaction (post = r_t * unconditional).
    """
    rule = protocol.accept
    if isinstance(rule, AlwaysAccept):
        return 1.0, None
    if isinstance(rule, ConstantAccept):
        return rule.probability(transcript), None
    m = rule.element(seed, transcript)
    if m.shape != (node.dA, node.dA):
        raise ValueError("accept POVM element must act on Alice's register")
    alice, _ = _local_states(node)
    r_joint = float(np.trace(m @ alice).real)  # p_t * r_t
    if r_joint < PROB_TOL:
        return 0.0, np.zeros((4, 4), dtype=np.complex128)
    root = hermitian_sqrt(m, floor=1e-9)
    if node.kind == "pure":
        post = _Node("pure", root @ node.arr, node.dA, node.dB)
    else:
        post = _Node(
            "mixed", _sandwich(node.arr, root, ALICE, node.dA, node.dB), node.dA, node.dB
        )
    p_t = node.norm()
    reduced = _reduce_pair(post, protocol.n_pairs, protocol.output_pair_for(seed))
    return r_joint / p_t if p_t > PROB_TOL else 0.0, reduced


def run(protocol: Protocol, state, record_nodes: bool = False) -> RunResult:
    """Evaluate a protocol exactly on a state or weighted state list.

    The transcript tree is enumerated branch by branch per seed; leaf
    probabilities, the SUCC probability, the output, and the output
    conditioned on SUCC are all exact up to float arithmetic.
    """
    weighted = _coerce_input(protocol, state)
    n = protocol.n_pairs
    dim_side = 1 << n
    leaves: list[LeafRecord] = []
    nodes: dict[tuple[int, int, str], NodeRecord] = {}
    out_acc = np.zeros((4, 4), dtype=np.complex128)
    cond_acc = np.zeros((4, 4), dtype=np.complex128)
    success = 0.0

    for comp_idx, (comp_w, comp_state) in enumerate(weighted):
        if isinstance(comp_state, PureState):
            root = _Node("pure", comp_state.amplitudes.reshape(dim_side, dim_side), dim_side, dim_side)
        else:
            root = _Node("mixed", np.asarray(comp_state.matrix), dim_side, dim_side)
        for seed, seed_w in enumerate(protocol.seed_weights):
            if seed_w == 0.0:
                continue
            frontier: list[tuple[str, _Node]] = [("", root.scaled_copy())]
            if record_nodes:
                _record(nodes, comp_idx, seed, "", root, 1.0)
            for rnd in protocol.rounds:
                instrument = rnd.for_seed(seed)
                if instrument.dim != (1 << (n + instrument.n_workspace)):
                    raise ValueError(
                        "instrument dimension does not match the party register"
                    )
                _check_capacity(2 * n + instrument.n_workspace)
                listener_u = rnd.listener_for_seed(seed)
                new_frontier: list[tuple[str, _Node]] = []
                for prefix, node in frontier:
                    if listener_u is not None:
                        node = _apply_local_unitary(node, listener_u, rnd.listener)
                    for bit in (0, 1):
                        child = _apply_branch(node, instrument, rnd.party, bit)
                        p_child = child.norm()
                        label = prefix + str(bit)
                        if record_nodes:
                            _record(nodes, comp_idx, seed, label, child, p_child)
                        if p_child < PROB_TOL:
                            # dead subtree: recorded once at its root, with
                            # the truncated transcript as the label
                            leaves.append(
                                LeafRecord(comp_idx, seed, label, comp_w * seed_w, 0.0, 0.0, None)
                            )
                            continue
                        new_frontier.append((label, child))
                frontier = new_frontier
            pair = protocol.output_pair_for(seed)
            for transcript, node in frontier:
                p_t = node.norm()
                reduced = _reduce_pair(node, n, pair)
                r_t, post = _accept_info(protocol, seed, transcript, node)
                out_acc += comp_w * seed_w * reduced
                if post is None:
                    cond_acc += comp_w * seed_w * r_t * reduced
                else:
                    cond_acc += comp_w * seed_w * post
                success += comp_w * seed_w * p_t * r_t
                leaves.append(
                    LeafRecord(
                        comp_idx,
                        seed,
                        transcript,
                        comp_w * seed_w,
                        p_t,
                        r_t,
                        reduced / p_t,
                    )
                )

    output = DensityMatrix(1, 1, out_acc, validate=False)
    conditional = None
    if success > PROB_TOL:
        conditional = DensityMatrix(1, 1, cond_acc / success, validate=False)
    return RunResult(
        n_pairs=n,
        bits=protocol.bits,
        leaves=tuple(leaves),
        success_probability=float(success),
        output=output,
        conditional_output=conditional,
        nodes=nodes if record_nodes else None,
    )


def _record(
    nodes: dict,
    comp: int,
    seed: int,
    label: str,
    node: _Node,
    probability: float,
) -> None:
    if probability < PROB_TOL:
        nodes[(comp, seed, label)] = NodeRecord(0.0, None, None)
        return
    alice, bob = _local_states(node)
    nodes[(comp, seed, label)] = NodeRecord(
        probability, alice / probability, bob / probability
    )


# ---------------------------------------------------------------------------
# model-level figures of merit


def ideal_success_probability(protocol: Protocol) -> float:
    """Success probability on the perfect input block."""
    from .qcore import epr_state

    return run(protocol, epr_state(protocol.n_pairs)).success_probability


def protocol_fidelity(protocol: Protocol, model: ErrorModel) -> float:
    """Minimum output fidelity over the model's evaluated states.

    For the fidelity model the evaluated set is the witness plus any
    sampled members, so the value is a witness minimum (an upper
    estimate of the true model minimum).
    """
    from .qcore import base_fidelity

    values = [
        base_fidelity(run(protocol, st).output) for st in model.states()
    ]
    return min(values)


def conditional_fidelity(protocol: Protocol, model: ErrorModel) -> float:
    """Minimum conditional-output fidelity over the model's states."""
    from .qcore import base_fidelity

    values = []
    for st in model.states():
        result = run(protocol, st)
        values.append(base_fidelity(result.require_conditional_output()))
    return min(values)


# ---------------------------------------------------------------------------
# the four concrete protocols


def make_first_pair(n: int) -> Protocol:
    """Deterministic 0-bit protocol: output pair 0, always SUCC."""
    return Protocol(
        n_pairs=n,
        seed_weights=(1.0,),
        rounds=(),
        accept=AlwaysAccept(),
        output_pair=(0,),
        name="first-pair",
    )


def make_random_pair(n: int) -> Protocol:
    """0-bit protocol: shared randomness picks the output pair uniformly."""
    return Protocol(
        n_pairs=n,
        seed_weights=(1.0 / n,) * n,
        rounds=(),
        accept=AlwaysAccept(),
        output_pair=tuple(range(n)),
        name="random-pair",
    )


def make_random_permutation(n: int) -> Protocol:
    """0-bit protocol: a shared uniform pair permutation relabels the
    pairs and the first relabeled pair is output, always SUCC.

    The companion local measurements of the non-output pairs are taken
    in the always-pretend-agreement variant; with no communication they
    leave every reported quantity unchanged, so the realization omits
    them.

    Only the one-output-pair, no-auxiliary-input case is realized; the
    general no-communication ceiling for m output pairs and k auxiliary
    perfect pairs, 1 - ((2^m - 2^k)/2^m) (2^n/(2^n-1)) eps, is recorded
    here for reference only.
    """
    perms = list(itertools.permutations(range(n)))
    weight = 1.0 / len(perms)
    return Protocol(
        n_pairs=n,
        seed_weights=(weight,) * len(perms),
        rounds=(),
        accept=AlwaysAccept(),
        output_pair=tuple(perm[0] for perm in perms),
        name="random-permutation",
    )


def _parity_circuit(n: int, members: tuple[int, ...], target: int) -> np.ndarray:
    """Permutation matrix of CNOTs from ``members`` into pair ``target``
    on one party's n-qubit register (qubit j is bit n-1-j)."""
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=np.complex128)
    tbit = 1 << (n - 1 - target)
    for x in range(dim):
        parity = 0
        for j in members:
            parity ^= (x >> (n - 1 - j)) & 1
        y = x ^ (tbit if parity else 0)
        mat[y, x] = 1.0
    return mat


def _bit_projector(n: int, qubit: int, bit: int) -> np.ndarray:
    dim = 1 << n
    diag = np.zeros(dim)
    for x in range(dim):
        if (x >> (n - 1 - qubit)) & 1 == bit:
            diag[x] = 1.0
    return np.diag(diag).astype(np.complex128)


def make_simple_random_hash(n: int, s: int) -> Protocol:
    """Parity-hash protocol with s rounds of one-way communication.

    Round k consumes check pair c = n-1-k.  The shared seed selects a
    random parity over the live pairs that includes c; both parties fold
    the parity into their check qubit with CNOTs and measure it in the
    computational basis.  Bob sends his bit; Alice accepts iff her own
    check bits match Bob's bits in every round.  On the perfect input
    block both bit strings always agree, so the protocol is ideal.  The
    output is the first surviving pair.
    """
    if n < 1:
        raise ValueError("need at least one pair")
    if not 1 <= s < n:
        raise ValueError(f"insufficient pairs: need 1 <= s < n, got n={n}, s={s}")
    # per-round choices: subsets of the live pairs below the check pair
    round_choices: list[list[tuple[int, ...]]] = []
    for k in range(s):
        check = n - 1 - k
        free = range(check)  # live pairs excluding the check pair
        subsets = []
        for size in range(check + 1):
            subsets.extend(itertools.combinations(free, size))
        round_choices.append(subsets)
    seeds = list(itertools.product(*[range(len(c)) for c in round_choices]))
    weight = 1.0 / len(seeds)

    rounds = []
    for k in range(s):
        check = n - 1 - k
        instruments = []
        listeners = []
        for seed in seeds:
            members = round_choices[k][seed[k]]
            circuit = _parity_circuit(n, members, check)
            branches = tuple(
                (np.asarray(_bit_projector(n, check, bit) @ circuit),)
                for bit in (0, 1)
            )
            instruments.append(Instrument(branches=branches))
            # Alice folds the same parity into her check qubit; the CNOT
            # layer is what frees the surviving pairs from the check pair
            listeners.append(circuit)
        rounds.append(
            Round(
                party=BOB,
                instruments=tuple(instruments),
                listener_unitaries=tuple(listeners),
            )
        )

    # Alice's deferred check measurement: her check qubits must repeat
    # Bob's announced bits in every round
    projectors: dict[str, np.ndarray] = {}
    for bits in itertools.product("01", repeat=s):
        proj = np.eye(1 << n, dtype=np.complex128)
        for k, bit in enumerate(bits):
            proj = proj @ _bit_projector(n, n - 1 - k, int(bit))
        projectors["".join(bits)] = proj
    elements = {
        (seed_idx, transcript): proj
        for seed_idx in range(len(seeds))
        for transcript, proj in projectors.items()
    }

    return Protocol(
        n_pairs=n,
        seed_weights=(weight,) * len(seeds),
        rounds=tuple(rounds),
        accept=PovmAccept(elements=elements),
        output_pair=(0,),
        name=f"simple-random-hash-s{s}",
    )


# ---------------------------------------------------------------------------
# random protocols for property sweeps


def random_instrument(rng: np.random.Generator, n_qubits: int, kraus_per_branch: int = 1) -> Instrument:
    """Random two-branch trace-preserving instrument on a register."""
    from .sampling import random_kraus_channel

    dim = 1 << n_qubits
    ops = random_kraus_channel(rng, dim, n_kraus=2 * kraus_per_branch)
    return Instrument(
        branches=(tuple(ops[:kraus_per_branch]), tuple(ops[kraus_per_branch:]))
    )


def random_protocol(
    rng: np.random.Generator,
    n: int,
    n_rounds: int,
    n_seeds: int = 1,
    kraus_per_branch: int = 1,
    accept_kind: str | None = None,
    with_listeners: bool = False,
) -> Protocol:
    """Random LOCC protocol for property sweeps.

    Senders alternate randomly; instruments are random trace-preserving
    splits; the accept rule is drawn among always / constant-per-leaf /
    random POVM unless pinned by ``accept_kind``.  ``with_listeners``
    additionally equips most rounds with a random local unitary on the
    listening party's register.
    """
    from .sampling import random_povm_element, random_unitary

    rounds = tuple(
        Round(
            party=ALICE if rng.random() < 0.5 else BOB,
            instruments=tuple(
                random_instrument(rng, n, kraus_per_branch) for _ in range(n_seeds)
            ),
            listener_unitaries=tuple(
                random_unitary(rng, 1 << n) for _ in range(n_seeds)
            )
            if with_listeners and rng.random() < 0.7
            else None,
        )
        for _ in range(n_rounds)
    )
    kind = accept_kind or rng.choice(["always", "constant", "povm"])
    if kind == "always":
        accept: AcceptRule = AlwaysAccept()
    elif kind == "constant":
        accept = ConstantAccept(
            values={
                "".join(bits): float(rng.uniform())
                for bits in itertools.product("01", repeat=n_rounds)
            }
        )
    else:
        accept = PovmAccept(
            elements={
                (seed, "".join(bits)): random_povm_element(rng, 1 << n)
                for seed in range(n_seeds)
                for bits in itertools.product("01", repeat=n_rounds)
            }
        )
    weights = rng.dirichlet(np.ones(n_seeds)) if n_seeds > 1 else np.array([1.0])
    return Protocol(
        n_pairs=n,
        seed_weights=tuple(float(w) for w in weights),
        rounds=rounds,
        accept=accept,
        output_pair=tuple(int(rng.integers(n)) for _ in range(n_seeds)),
        name="random",
    )
