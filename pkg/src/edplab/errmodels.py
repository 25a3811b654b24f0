"""Error models: indicator-vector machinery, depolarization states, and
the fidelity-model witness.

Three model families describe the imperfect inputs a protocol must
tolerate:

* measure-r: an explicit finite set of pure "error states", one per
  degree-r binary indicator vector (worst case = minimum over the set);
* depolarization: the single mixed state obtained by passing Bob's
  half of each pair through a depolarizing channel;
* fidelity: every state whose overlap with the perfect pair block is at
  least 1 - epsilon, represented here by its canonical worst-case
  witness plus optional random members.

Exact mixtures are carried as weighted state lists and collapsed to a
dense matrix only on demand.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    BOB,
    DensityMatrix,
    PureState,
    Qubit,
    State,
    as_density,
    bell_state,
    epr_state,
    tensor_all,
    PAULI,
    apply_unitary,
    _check_capacity,
)
from . import rng as rngmod

WeightedStates = list[tuple[float, State]]

INDICATOR_ENTRIES = ("0", "1", "*")
EXTENDED_ENTRIES = ("00", "01", "10", "11", "*")


@dataclass(frozen=True)
class IndicatorVector:
    """Length-n pattern over {0, 1, *}; * marks an intact pair."""

    entries: tuple[str, ...]

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        if not entries:
            raise ValueError("indicator vector must have at least one entry")
        for e in entries:
            if e not in INDICATOR_ENTRIES:
                raise ValueError(f"invalid indicator entry {e!r}")
        object.__setattr__(self, "entries", entries)

    @staticmethod
    def from_string(text: str) -> "IndicatorVector":
        return IndicatorVector(tuple(text))

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def degree(self) -> int:
        return sum(1 for e in self.entries if e != "*")

    def __str__(self) -> str:
        return "".join(self.entries)


@dataclass(frozen=True)
class ExtendedIndicatorVector:
    """Length-n pattern over {00, 01, 10, 11, *} for corrupted pairs."""

    entries: tuple[str, ...]

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        if not entries:
            raise ValueError("extended indicator vector must have at least one entry")
        for e in entries:
            if e not in EXTENDED_ENTRIES:
                raise ValueError(f"invalid extended indicator entry {e!r}")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def degree(self) -> int:
        return sum(1 for e in self.entries if e != "*")


def enumerate_indicators(n: int, r: int) -> list[IndicatorVector]:
    """All degree-r binary indicator vectors; exactly 2^r * C(n, r)."""
    if not 0 <= r <= n or n > 12:
        raise ValueError(f"need 0 <= r <= n <= 12, got n={n}, r={r}")
    out = []
    for positions in itertools.combinations(range(n), r):
        for bits in itertools.product("01", repeat=r):
            entries = ["*"] * n
            for pos, bit in zip(positions, bits):
                entries[pos] = bit
            out.append(IndicatorVector(tuple(entries)))
    return out


def enumerate_extended(n: int, r: int) -> list[ExtendedIndicatorVector]:
    """All degree-r extended indicator vectors; exactly 4^r * C(n, r)."""
    if not 0 <= r <= n or n > 8:
        raise ValueError(f"need 0 <= r <= n <= 8, got n={n}, r={r}")
    out = []
    for positions in itertools.combinations(range(n), r):
        for values in itertools.product(("00", "01", "10", "11"), repeat=r):
            entries = ["*"] * n
            for pos, val in zip(positions, values):
                entries[pos] = val
            out.append(ExtendedIndicatorVector(tuple(entries)))
    return out


def _coerce_bits(x, n: int) -> tuple[int, ...]:
    if isinstance(x, str):
        bits = tuple(int(c) for c in x)
    else:
        bits = tuple(int(b) for b in x)
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ValueError(f"expected {n} bits, got {x!r}")
    return bits


def consistent(x, v: IndicatorVector) -> bool:
    """True iff x agrees with v on every non-* position."""
    bits = _coerce_bits(x, v.n)
    return all(e == "*" or int(e) == b for e, b in zip(v.entries, bits))


def consistent_extended(x, u: ExtendedIndicatorVector) -> bool:
    """Consistency of a 2n-bit vector (left half; right half) with u."""
    bits = _coerce_bits(x, 2 * u.n)
    n = u.n
    for j, e in enumerate(u.entries):
        left, right = bits[j], bits[n + j]
        if e == "*":
            if left != right:
                return False
        elif (int(e[0]), int(e[1])) != (left, right):
            return False
    return True


def error_state(v: IndicatorVector) -> PureState:
    """Pure error state generated by a binary indicator vector.

    Pair j is |00> for entry 0, |11> for entry 1, and a perfect pair for
    entry *; equivalently the uniform superposition of |x>^A |x>^B over
    all x consistent with v.
    """
    n = v.n
    _check_capacity(2 * n)
    amps = np.zeros(1 << (2 * n), dtype=np.complex128)
    free = [j for j, e in enumerate(v.entries) if e == "*"]
    base = 0
    for j, e in enumerate(v.entries):
        if e == "1":
            base |= 1 << (n - 1 - j)
    scale = 2.0 ** (-(len(free)) / 2.0)
    for assign in itertools.product((0, 1), repeat=len(free)):
        x = base
        for j, bit in zip(free, assign):
            x |= bit << (n - 1 - j)
        amps[(x << n) | x] = scale
    return PureState(n, n, amps)


def extended_error_state(u: ExtendedIndicatorVector) -> PureState:
    """Pure error state for an extended indicator vector.

    Pair j carries |ab> for entry "ab" and a perfect pair for *; the
    superposition runs over 2n-bit vectors consistent with u, left half
    on Alice and right half on Bob.
    """
    n = u.n
    _check_capacity(2 * n)
    parts: list[State] = []
    for e in u.entries:
        if e == "*":
            parts.append(bell_state("phi+"))
        else:
            amps = np.zeros(4, dtype=np.complex128)
            amps[(int(e[0]) << 1) | int(e[1])] = 1.0
            parts.append(PureState(1, 1, amps))
    out = tensor_all(parts)
    assert isinstance(out, PureState)
    return out


def discrepancy(x) -> tuple[int, ...]:
    """Bitwise XOR of the two halves of a 2n-bit vector."""
    bits = tuple(int(b) for b in x)
    if len(bits) % 2 or any(b not in (0, 1) for b in bits):
        raise ValueError("discrepancy needs an even-length bit vector")
    n = len(bits) // 2
    return tuple(bits[j] ^ bits[n + j] for j in range(n))


def count_consistent_extended(d: int, n: int, r: int) -> int:
    """Number of degree-r extended vectors consistent with a 2n-bit
    vector of discrepancy degree d."""
    if d < 0 or n < 0 or r < 0:
        raise ValueError("arguments must be non-negative")
    if d > r or r - d > n - d:
        return 0
    return math.comb(n - d, r - d)


# ---------------------------------------------------------------------------
# depolarization


def depolarize(rho: State, p: float, qubit: Qubit) -> DensityMatrix:
    """Depolarizing channel on one qubit: (1-p) rho + p * I/2.

    Applied through the equivalent four-operator form
    (1 - 3p/4) rho + (p/4)(X rho X + Y rho Y + Z rho Z).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    dm = as_density(rho)
    out = (1.0 - 0.75 * p) * dm.matrix
    for label in ("X", "Y", "Z"):
        moved = apply_unitary(dm, PAULI[label], [qubit])
        out = out + 0.25 * p * moved.matrix
    return DensityMatrix(dm.n_alice, dm.n_bob, out, validate=False)


def depolarization_pair(p: float) -> DensityMatrix:
    """Single pair after Bob's qubit passes the depolarizing channel."""
    return depolarize(bell_state("phi+"), p, (BOB, 0))


def depolarization_state(n: int, p: float) -> DensityMatrix:
    """The n-pair depolarization-model state (one pair state per pair)."""
    if n < 1:
        raise ValueError("need at least one pair")
    _check_capacity(2 * n)
    pair = depolarization_pair(p)
    out = tensor_all([pair] * n)
    assert isinstance(out, DensityMatrix)
    return out


def pair_bell_mixture_ensemble(n: int, p: float) -> WeightedStates:
    """Pure-state ensemble of the depolarization-model state.

    Eigen-decomposition per pair: phi+ with weight 1 - 3p/4 and each
    other Bell state with weight p/4; the n-pair state is the product
    mixture over Bell-state patterns.  Zero-weight members are dropped.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    weights = {"phi+": 1.0 - 0.75 * p, "phi-": 0.25 * p, "psi+": 0.25 * p, "psi-": 0.25 * p}
    names = [name for name, w in weights.items() if w > 0.0]
    out: WeightedStates = []
    for pattern in itertools.product(names, repeat=n):
        w = math.prod(weights[name] for name in pattern)
        state = tensor_all([bell_state(name) for name in pattern])
        out.append((w, state))
    return out


def random_corrupt_ensemble(n: int, r: int) -> WeightedStates:
    """Uniform mixture over the C(n, r) ways to replace r pairs with the
    completely mixed pair state."""
    if not 0 <= r <= n:
        raise ValueError(f"need 0 <= r <= n, got n={n}, r={r}")
    _check_capacity(2 * n)
    patterns = list(itertools.combinations(range(n), r))
    weight = 1.0 / len(patterns)
    phi = bell_state("phi+").to_density()
    mixed_pair = DensityMatrix.maximally_mixed(1, 1)
    out: WeightedStates = []
    for corrupted in patterns:
        parts = [mixed_pair if j in corrupted else phi for j in range(n)]
        out.append((weight, tensor_all(parts)))
    return out


def collapse(states: WeightedStates) -> DensityMatrix:
    """Collapse a weighted state list into a single density matrix."""
    if not states:
        raise ValueError("empty ensemble")
    first = as_density(states[0][1])
    acc = np.zeros_like(first.matrix)
    total = 0.0
    for w, st in states:
        acc = acc + w * as_density(st).matrix
        total += w
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"ensemble weights sum to {total}, expected 1")
    return DensityMatrix(first.n_alice, first.n_bob, acc, validate=False)


# ---------------------------------------------------------------------------
# fidelity model


def fidelity_witness(n: int, epsilon: float) -> DensityMatrix:
    """Canonical fidelity-model member: perfect pairs mixed with the
    completely mixed state, weighted so the overall fidelity is exactly
    1 - epsilon."""
    if n < 1:
        raise ValueError("need at least one pair")
    dim = 1 << (2 * n)
    limit = 1.0 - 1.0 / dim
    if not 0.0 <= epsilon <= limit:
        raise ValueError(
            f"witness construction needs 0 <= epsilon <= 1 - 2^-2n = {limit}"
        )
    eps_prime = epsilon * dim / (dim - 1)
    psi = epr_state(n).to_density()
    mat = (1.0 - eps_prime) * psi.matrix + eps_prime * np.eye(dim) / dim
    return DensityMatrix(n, n, mat, validate=False)


@dataclass(frozen=True)
class MeasureRModel:
    """r of n pairs measured in the computational basis, adversarially
    chosen: the explicit finite set of error states."""

    n: int
    r: int

    def __post_init__(self) -> None:
        if not 0 <= self.r <= self.n:
            raise ValueError(f"need 0 <= r <= n, got n={self.n}, r={self.r}")

    def states(self) -> list[State]:
        return [error_state(v) for v in enumerate_indicators(self.n, self.r)]

    def uniform_mixture(self) -> WeightedStates:
        members = self.states()
        w = 1.0 / len(members)
        return [(w, st) for st in members]


@dataclass(frozen=True)
class DepolarizationModel:
    """Bob's qubits passed through a depolarizing channel: one state."""

    n: int
    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"need 0 <= p <= 1, got {self.p}")

    def states(self) -> list[State]:
        return [depolarization_state(self.n, self.p)]


@dataclass(frozen=True)
class FidelityModel:
    """All 2n-qubit states of fidelity at least 1 - epsilon.

    The set is a continuum; ``states`` returns the canonical witness
    plus ``samples`` random members of fidelity exactly 1 - epsilon, so
    any minimum computed over it is an upper estimate of the true model
    minimum (a "witness minimum").
    """

    n: int
    epsilon: float
    samples: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"need 0 <= epsilon < 1, got {self.epsilon}")

    def witness(self) -> DensityMatrix:
        return fidelity_witness(self.n, self.epsilon)

    def states(self) -> list[State]:
        out: list[State] = [self.witness()]
        if self.samples:
            out.extend(self._sample_members())
        return out

    def _sample_members(self) -> list[State]:
        from .sampling import random_density_matrix, random_pure_state
        from .qcore import epr_fidelity

        gen = rngmod.substream(self.seed, "fidelity-model", self.n)
        psi = epr_state(self.n)
        dim = psi.dim
        out: list[State] = []
        for k in range(self.samples):
            if k % 2 == 0:
                # pure member: rotate the perfect block toward a random
                # orthogonal direction by exactly the allowed amount
                chi = random_pure_state(gen, self.n, self.n).amplitudes
                chi = chi - psi.amplitudes * np.vdot(psi.amplitudes, chi)
                chi = chi / np.linalg.norm(chi)
                amps = math.sqrt(1.0 - self.epsilon) * psi.amplitudes + math.sqrt(
                    self.epsilon
                ) * chi
                out.append(PureState(self.n, self.n, amps))
            else:
                tau = random_density_matrix(gen, self.n, self.n)
                f_tau = epr_fidelity(tau)
                lam = (1.0 - self.epsilon - f_tau) / (1.0 - f_tau)
                mat = lam * psi.to_density().matrix + (1.0 - lam) * tau.matrix
                out.append(DensityMatrix(self.n, self.n, mat, validate=False))
        return out


ErrorModel = MeasureRModel | DepolarizationModel | FidelityModel
