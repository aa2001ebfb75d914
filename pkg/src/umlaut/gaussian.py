"""Gaussian states at the level of means, covariances and quadratic Hamiltonians.

Quadratures are ordered ``(x1, p1, ..., xm, pm)`` with symplectic form
``Omega = diag([[0, 1], [-1, 0]], ...)``. A Gaussian state is
``rho ∝ exp(-1/2 (R - m)^T H (R - m))`` and its covariance
``V = Tr[{R - m, (R - m)^T} rho]`` relates to ``H`` by

    V(H) = coth(i Omega H / 2) i Omega,      H(V) = 2 i Omega arccoth(V i Omega).

The Hamiltonian is the stored representation because the umlaut-marginal on
a subset of modes is simply the corresponding principal submatrix of ``H``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantError

_RESIDUE_TOL = 1e-9


def symplectic_form(modes):
    """Block-diagonal symplectic form on ``modes`` modes."""
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _modes_of(matrix):
    n = matrix.shape[0]
    if matrix.ndim != 2 or matrix.shape != (n, n) or n % 2:
        raise InvariantError(f"expected a square matrix of even dimension, got shape {matrix.shape}")
    return n // 2


def _real_symmetric(matrix, name):
    m = np.asarray(matrix, dtype=float)
    _modes_of(m)
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.T).max() > 1e-10 * scale:
        raise InvariantError(f"{name} is not symmetric")
    return (m + m.T) / 2


def _spectral_apply(a, func):
    """func(a) for a diagonalisable real-spectrum matrix via its complex eigendecomposition."""
    w, s = np.linalg.eig(a)
    if np.abs(w.imag).max() > 1e-8 * max(np.abs(w).max(), 1.0):
        raise InvariantError("matrix function argument has non-real spectrum")
    return (s * func(w.real)) @ np.linalg.inv(s)


def _to_real(m, what):
    scale = max(np.abs(m).max(), 1.0)
    residue = np.abs(m.imag).max()
    if residue > _RESIDUE_TOL * scale:
        raise InvariantError(f"{what} has an imaginary residue of {residue:.2e}")
    r = m.real
    if np.abs(r - r.T).max() > _RESIDUE_TOL * scale:
        raise InvariantError(f"{what} failed the symmetry check")
    return (r + r.T) / 2


def covariance_from_hamiltonian(h):
    """V(H) = coth(i Omega H / 2) i Omega."""
    h = _real_symmetric(h, "Hamiltonian")
    i_omega = 1j * symplectic_form(_modes_of(h))
    w = np.linalg.eigvals(i_omega @ h)
    if np.abs(w).min() < 1e-12:
        raise InvariantError("i Omega H has a zero eigenvalue (infinite-temperature direction)")
    f = _spectral_apply(i_omega @ h, lambda x: 1.0 / np.tanh(x / 2))
    return _to_real(f @ i_omega, "covariance")


def symplectic_eigenvalues(v):
    """Symplectic spectrum of ``v``: the moduli of the eigenvalues of i Omega V, one per mode."""
    v = np.asarray(v, dtype=float)
    w = np.linalg.eigvals(1j * symplectic_form(_modes_of(v)) @ v)
    return np.sort(np.abs(w))[::2]


def hamiltonian_from_covariance(v):
    """H(V) = 2 i Omega arccoth(V i Omega); needs every symplectic eigenvalue above 1."""
    v = _real_symmetric(v, "covariance")
    nu = symplectic_eigenvalues(v)
    if nu.min() <= 1 + 1e-10:
        raise InvariantError(f"symplectic eigenvalue {nu.min():.12g} <= 1: Hamiltonian diverges")
    i_omega = 1j * symplectic_form(_modes_of(v))
    f = _spectral_apply(v @ i_omega, lambda x: np.arctanh(1.0 / x))
    return _to_real(2 * i_omega @ f, "Hamiltonian")


def physicality_residual(v):
    """Smallest eigenvalue of the Hermitian matrix V + i Omega."""
    v = np.asarray(v, dtype=float)
    return float(np.linalg.eigvalsh(v + 1j * symplectic_form(_modes_of(v)))[0])


def _mode_indices(keep):
    return np.array([q for k in keep for q in (2 * k, 2 * k + 1)], dtype=int)


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state stored through its Hamiltonian ``H`` and mean vector.

    Use :meth:`from_covariance` to build one from a covariance matrix.
    """

    hamiltonian: np.ndarray
    mean: np.ndarray | None = None
    _cov: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        h = _real_symmetric(self.hamiltonian, "Hamiltonian")
        m = _modes_of(h)
        mean = np.zeros(2 * m) if self.mean is None else np.asarray(self.mean, dtype=float)
        if mean.shape != (2 * m,):
            raise InvariantError(f"mean must have length {2 * m}")
        cov = covariance_from_hamiltonian(h) if self._cov is None else self._cov
        if physicality_residual(cov) < -1e-8:
            raise InvariantError("covariance violates V + i Omega >= 0")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "_cov", cov)

    @classmethod
    def from_covariance(cls, covariance, mean=None):
        v = _real_symmetric(covariance, "covariance")
        if physicality_residual(v) < -1e-8:
            raise InvariantError("covariance violates V + i Omega >= 0")
        return cls(hamiltonian_from_covariance(v), mean, v)

    @property
    def modes(self):
        return self.hamiltonian.shape[0] // 2

    @property
    def covariance(self):
        return self._cov


def _check_keep(s, keep):
    keep = sorted(int(k) for k in keep)
    if not keep or keep[0] < 0 or keep[-1] >= s.modes or len(set(keep)) != len(keep):
        raise InvariantError(f"invalid mode subset {keep} for a {s.modes}-mode state")
    return keep


def gaussian_marginal(s, keep):
    """Reduced state on the modes ``keep``: covariance submatrix, Hamiltonian recomputed."""
    idx = _mode_indices(_check_keep(s, keep))
    return GaussianState.from_covariance(s.covariance[np.ix_(idx, idx)], s.mean[idx])


def gaussian_umlaut_marginal(s, keep_b):
    """Umlaut-marginal on the modes ``keep_b``: the Hamiltonian submatrix H_BB."""
    idx = _mode_indices(_check_keep(s, keep_b))
    return GaussianState(s.hamiltonian[np.ix_(idx, idx)], s.mean[idx])
