"""Multi-start stochastic ascent over pairs of local unitaries.

Probes how much a communication-free protocol can achieve: both parties
apply one unitary to their register (protocol qubits plus ancillas in
|0>) and output the first pair.  The objective is the ensemble-averaged
fidelity of that pair, maximized by geodesic steps: multiply the
current unitary by the exponential of a random anti-Hermitian
perturbation, keep improvements, shrink the step size after repeated
rejections.  Restart 0 always starts from the identity so the reported
maximum never falls below the trivial protocol's value.

The search certifies nothing: it reports the best value found over the
declared class (ancilla count, restarts, steps).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errmodels import WeightedStates
from .qcore import PureState
from .rng import substream
from .sampling import random_unitary


@dataclass(frozen=True)
class AscentConfig:
    restarts: int = 32
    steps: int = 2000  # proposal budget per restart
    initial_step: float = 0.4
    decay: float = 0.5
    patience: int = 25
    min_step: float = 1e-5
    seed: int = 0


@dataclass(frozen=True)
class AscentResult:
    best_value: float
    start_value: float
    restart_values: tuple[float, ...]
    converged: bool


def unitary_exp(h: np.ndarray) -> np.ndarray:
    """exp(H) for anti-Hermitian H via the eigendecomposition of iH."""
    herm = 1j * h
    vals, vecs = np.linalg.eigh(herm)
    return (vecs * np.exp(-1j * vals)) @ vecs.conj().T


def random_antihermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (g - g.conj().T) / 2.0
    return h / max(np.linalg.norm(h), 1e-12)


class PairFidelityObjective:
    """Average first-pair fidelity of an ensemble under U_A (x) U_B.

    Ensemble members are pure states on n pairs; ``ancillas`` fresh |0>
    qubits are appended at the low end of each party's register.
    """

    def __init__(self, ensemble: WeightedStates, n: int, ancillas: int):
        if ancillas < 0:
            raise ValueError("ancilla count must be non-negative")
        self.n = n
        self.ancillas = ancillas
        self.d_side = 1 << (n + ancillas)
        weights = []
        blocks = []
        for w, st in ensemble:
            if not isinstance(st, PureState):
                raise TypeError("objective needs a pure-state ensemble")
            if st.n_alice != n or st.n_bob != n:
                raise ValueError("ensemble member has the wrong pair count")
            vec = st.amplitudes.reshape(1 << n, 1 << n)
            # ancillas occupy the low bits: index = protocol << ancillas
            big = np.zeros((self.d_side, self.d_side), dtype=np.complex128)
            rows = np.arange(1 << n) << ancillas
            big[np.ix_(rows, rows)] = vec
            blocks.append(big)
            weights.append(w)
        self.weights = np.asarray(weights)
        self.stack = np.stack(blocks)  # (m, d_side, d_side)

    def value(self, u_alice: np.ndarray, u_bob: np.ndarray) -> float:
        # (U_A (x) U_B)|psi> in block form: U_A T U_B^T per ensemble member
        moved = np.matmul(np.matmul(u_alice, self.stack), u_bob.T)
        half = self.d_side >> 1
        t = moved.reshape(len(self.weights), 2, half, 2, half)
        overlap = (t[:, 0, :, 0, :] + t[:, 1, :, 1, :]) / np.sqrt(2.0)
        per_state = np.sum(np.abs(overlap) ** 2, axis=(1, 2))
        return float(np.dot(self.weights, per_state))


def maximize_pair_fidelity(
    objective: PairFidelityObjective, config: AscentConfig
) -> AscentResult:
    """Best objective value over the unitary pair, multi-start ascent."""
    dim = objective.d_side
    eye = np.eye(dim, dtype=np.complex128)
    start_value = objective.value(eye, eye)
    restart_values = []
    converged_flags = []
    best_overall = -np.inf
    for restart in range(config.restarts):
        rng = substream(config.seed, "unitary-ascent", restart)
        if restart == 0:
            ua, ub = eye.copy(), eye.copy()
        else:
            ua, ub = random_unitary(rng, dim), random_unitary(rng, dim)
        current = objective.value(ua, ub)
        step = config.initial_step
        stall = 0
        proposals = 0
        converged = False
        while proposals < config.steps:
            proposals += 1
            ha = random_antihermitian(rng, dim)
            hb = random_antihermitian(rng, dim)
            cand_a = unitary_exp(step * ha) @ ua
            cand_b = unitary_exp(step * hb) @ ub
            value = objective.value(cand_a, cand_b)
            if value > current + 1e-14:
                ua, ub, current = cand_a, cand_b, value
                stall = 0
            else:
                stall += 1
                if stall >= config.patience:
                    step *= config.decay
                    stall = 0
                    if step <= config.min_step:
                        converged = True
                        break
        restart_values.append(current)
        converged_flags.append(converged)
        best_overall = max(best_overall, current)
    return AscentResult(
        best_value=float(best_overall),
        start_value=float(start_value),
        restart_values=tuple(float(v) for v in restart_values),
        converged=all(converged_flags),
    )
