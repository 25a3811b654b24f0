"""Seeded samplers for states, channels, and unitaries.

These feed the property sweeps; all take an explicit generator so runs
are reproducible byte for byte.
"""

from __future__ import annotations

import numpy as np

from .qcore import DensityMatrix, PureState


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-ish unitary from the QR decomposition of a Ginibre matrix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    # fix the phase ambiguity so the distribution is Haar
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure_state(rng: np.random.Generator, n_alice: int, n_bob: int) -> PureState:
    dim = 1 << (n_alice + n_bob)
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(n_alice, n_bob, vec / np.linalg.norm(vec))


def random_density_matrix(
    rng: np.random.Generator, n_alice: int, n_bob: int, rank: int | None = None
) -> DensityMatrix:
    dim = 1 << (n_alice + n_bob)
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    mat = g @ g.conj().T
    return DensityMatrix(n_alice, n_bob, mat / np.trace(mat), validate=False)


def random_product_pure(rng: np.random.Generator, n_alice: int, n_bob: int) -> PureState:
    """Disentangled pure state |a>^A (x) |b>^B."""
    a = random_pure_state(rng, n_alice, 0)
    b = random_pure_state(rng, 0, n_bob)
    amps = np.kron(a.amplitudes, b.amplitudes)
    return PureState(n_alice, n_bob, amps)


def random_separable_mixture(
    rng: np.random.Generator, n_alice: int, n_bob: int, terms: int = 4
) -> DensityMatrix:
    """Convex mixture of random product pure states."""
    weights = rng.dirichlet(np.ones(terms))
    dim = 1 << (n_alice + n_bob)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for w in weights:
        amps = random_product_pure(rng, n_alice, n_bob).amplitudes
        mat += w * np.outer(amps, amps.conj())
    return DensityMatrix(n_alice, n_bob, mat, validate=False)


def random_kraus_channel(
    rng: np.random.Generator, dim: int, n_kraus: int = 3
) -> list[np.ndarray]:
    """Trace-preserving Kraus set from a random Stinespring isometry."""
    g = rng.standard_normal((n_kraus * dim, dim)) + 1j * rng.standard_normal(
        (n_kraus * dim, dim)
    )
    q, _ = np.linalg.qr(g)  # q: (n_kraus*dim, dim) isometry, q^dag q = I
    return [q[k * dim : (k + 1) * dim, :].copy() for k in range(n_kraus)]


def random_povm_element(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random operator M with 0 <= M <= I."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = g @ g.conj().T
    return h / (np.linalg.eigvalsh(h)[-1] + rng.uniform(0.0, 1.0))
