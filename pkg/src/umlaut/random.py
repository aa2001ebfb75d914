"""Seeded random states, unitaries and channels for tests and oracle checks."""

import numpy as np


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unitary(d, seed=None):
    rng = _rng(seed)
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(d, seed=None, rank=None):
    """Ginibre-ensemble density matrix; full rank unless ``rank`` is given."""
    rng = _rng(seed)
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    r = g @ g.conj().T
    return r / np.trace(r).real


def random_pure(d, seed=None):
    rng = _rng(seed)
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_kraus(d_in, d_out, n_kraus=None, seed=None):
    """Kraus operators of a random channel, from a random isometry C^d_in -> C^(d_out n)."""
    rng = _rng(seed)
    n = n_kraus or d_in * d_out
    z = rng.normal(size=(d_out * n, d_in)) + 1j * rng.normal(size=(d_out * n, d_in))
    q, _ = np.linalg.qr(z)
    return [q[i * d_out:(i + 1) * d_out, :] for i in range(n)]


def random_probability(n, seed=None):
    rng = _rng(seed)
    return rng.dirichlet(np.ones(n))
