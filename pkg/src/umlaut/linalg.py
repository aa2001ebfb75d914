"""Dense Hermitian linear algebra.

Operators are plain complex ``numpy`` arrays. Tensor products use the
Kronecker convention with the first factor as the slow index, and every
partial trace in the package goes through :func:`partial_trace` so that the
convention lives in one place.
"""

from collections import namedtuple
from functools import reduce

import numpy as np

from ._config import HERM_TOL, PSD_TOL, SPEC_CUTOFF, TRACE_TOL
from .errors import InvariantError

SpectralDecomposition = namedtuple("SpectralDecomposition", ["eigenvalues", "eigenvectors"])

_FUNCS = ("log", "exp", "power", "sqrt", "neg_part", "pos_part", "coth_half_arg", "arccoth")
_POLICIES = ("error", "zero", "floor", "restrict")


# -- validation ---------------------------------------------------------------


def as_operator(m):
    """Return ``m`` as a square complex array; raise on bad shape or non-finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvariantError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvariantError("matrix has non-finite entries")
    return a


def check_hermitian(m, tol=HERM_TOL):
    """Validate Hermiticity relative to the operator norm and return the Hermitian part."""
    a = as_operator(m)
    scale = max(np.linalg.norm(a, 2), 1.0) if a.size else 1.0
    dev = np.linalg.norm(a - a.conj().T, 2) if a.size else 0.0
    if dev > tol * scale:
        raise InvariantError(f"matrix is not Hermitian (deviation {dev:.3e})")
    return (a + a.conj().T) / 2


def check_density(m, psd_tol=PSD_TOL, trace_tol=TRACE_TOL):
    """Validate a density operator: Hermitian, PSD within ``psd_tol``, unit trace."""
    h = check_hermitian(m)
    w = np.linalg.eigvalsh(h)
    if w.size and w[0] < -psd_tol:
        raise InvariantError(f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    tr = np.trace(h).real
    if abs(tr - 1) > trace_tol:
        raise InvariantError(f"density operator must have unit trace, got {tr:.12g}")
    return h


def hermitize(m):
    return (m + m.conj().T) / 2


# -- structure ----------------------------------------------------------------


def tensor(*ops):
    """Kronecker product of one or more operators (first factor slowest)."""
    if not ops:
        raise ValueError("tensor() needs at least one operator")
    return reduce(np.kron, [np.asarray(o) for o in ops])


def partial_trace(m, dims, keep):
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists subsystem dimensions in tensor order; ``keep`` is an index,
    an iterable of indices, or one of the tags ``"A"``/``"B"`` for the
    bipartite case. Kept subsystems retain their original relative order.
    """
    m = np.asarray(m)
    dims = tuple(int(d) for d in dims)
    n = int(np.prod(dims))
    if m.shape != (n, n):
        raise InvariantError(f"operator of shape {m.shape} does not match subsystem dims {dims}")
    if isinstance(keep, str):
        if len(dims) != 2 or keep not in ("A", "B"):
            raise ValueError("subsystem tags 'A'/'B' need exactly two subsystems")
        keep = [0] if keep == "A" else [1]
    elif np.isscalar(keep):
        keep = [int(keep)]
    keep = sorted(int(k) for k in keep)
    k = len(dims)
    t = m.reshape(dims + dims)
    traced = [i for i in range(k) if i not in keep]
    # trace from the highest axis down so lower axis numbers stay valid
    for count, i in enumerate(sorted(traced, reverse=True)):
        cur = k - count
        t = np.trace(t, axis1=i, axis2=i + cur)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(dk, dk)


def permute_subsystems(m, dims, perm):
    """Reorder tensor factors of ``m``: new factor ``j`` is old factor ``perm[j]``."""
    dims = tuple(dims)
    k = len(dims)
    t = np.asarray(m).reshape(dims + dims)
    axes = list(perm) + [p + k for p in perm]
    n = int(np.prod(dims))
    return t.transpose(axes).reshape(n, n)


# -- spectra ------------------------------------------------------------------


def eigh(h):
    """Ascending eigendecomposition with a fixed phase convention.

    Each eigenvector is rotated so that its largest-magnitude component is
    real and positive, which makes the output reproducible across calls.
    """
    h = hermitize(as_operator(h))
    w, v = np.linalg.eigh(h)
    idx = np.argmax(np.abs(v), axis=0)
    piv = v[idx, np.arange(v.shape[1])]
    phase = np.where(np.abs(piv) > 0, piv / np.abs(piv), 1.0)
    return SpectralDecomposition(w, v / phase)


def _cutoff(w, cutoff):
    if cutoff is not None:
        return cutoff
    scale = np.max(np.abs(w)) if w.size else 0.0
    return SPEC_CUTOFF * scale


def support_projector(h, cutoff=None):
    """Orthogonal projector onto eigenvectors with eigenvalue above ``cutoff``."""
    w, v = eigh(h)
    c = _cutoff(w, cutoff)
    vs = v[:, w > c]
    return vs @ vs.conj().T


def support_basis(h, cutoff=None):
    """Orthonormal columns spanning the support of a PSD operator."""
    w, v = eigh(h)
    return v[:, w > _cutoff(w, cutoff)]


def kernel_basis(h, tol):
    """Orthonormal columns spanning eigenvectors with eigenvalue at most ``tol``."""
    w, v = eigh(h)
    return v[:, w <= tol]


def _apply(name, w, alpha):
    if name == "log":
        return np.log(w)
    if name == "exp":
        return np.exp(w)
    if name == "power":
        return np.power(w, alpha)
    if name == "sqrt":
        return np.sqrt(w)
    if name == "pos_part":
        return np.maximum(w, 0.0)
    if name == "neg_part":
        return np.maximum(-w, 0.0)
    if name == "coth_half_arg":
        return 1.0 / np.tanh(w / 2)
    if name == "arccoth":
        return np.arctanh(1.0 / w)
    raise ValueError(name)


def matrix_func(h, f, kernel_policy="error", alpha=None, tau=1e-14, cutoff=None):
    """Apply a scalar function spectrally to a Hermitian operator.

    ``f`` is one of ``log, exp, power, sqrt, neg_part, pos_part,
    coth_half_arg, arccoth`` (``power`` needs ``alpha``). The kernel policy
    decides what happens to near-zero eigenvalues for functions that are
    singular there:

    * ``error``: raise :class:`InvariantError`
    * ``zero``: the function value on the kernel is set to 0
    * ``floor``: kernel eigenvalues are replaced by ``tau`` before applying ``f``
    * ``restrict``: like ``zero`` but returns ``(result, support_projector)``

    Negative eigenvalues beyond the PSD tolerance raise for ``log``, ``sqrt``
    and fractional powers.
    """
    if f not in _FUNCS:
        raise ValueError(f"unknown matrix function {f!r}")
    if kernel_policy not in _POLICIES:
        raise ValueError(f"unknown kernel policy {kernel_policy!r}")
    if f == "power" and alpha is None:
        raise ValueError("power needs an exponent alpha")
    w, v = eigh(h)
    c = _cutoff(w, cutoff)
    singular = f in ("log", "coth_half_arg") or (f == "power" and alpha <= 0)
    needs_psd = f in ("log", "sqrt") or (f == "power" and float(alpha) != int(alpha))
    if needs_psd and w.size and w[0] < -max(PSD_TOL, c):
        raise InvariantError(f"{f} of an operator with negative eigenvalue {w[0]:.3e}")
    if f == "arccoth" and np.any(np.abs(w) <= 1.0):
        raise InvariantError("arccoth needs all eigenvalues outside [-1, 1]")
    near_zero = (w <= c) if needs_psd else (np.abs(w) <= c)
    if needs_psd:
        w = np.where(near_zero, 0.0, w)
    vals = np.zeros_like(w)
    keep = ~near_zero if singular else np.ones_like(w, dtype=bool)
    if singular and np.any(near_zero):
        if kernel_policy == "error":
            raise InvariantError(f"{f} is singular on a kernel of dimension {int(near_zero.sum())}")
        if kernel_policy == "floor":
            w = np.where(near_zero, tau, w)
            keep = np.ones_like(w, dtype=bool)
    vals[keep] = _apply(f, w[keep], alpha)
    out = (v * vals) @ v.conj().T
    if kernel_policy == "restrict":
        vs = v[:, ~near_zero]
        return out, vs @ vs.conj().T
    return out


def schatten_norm(m, p):
    """Schatten ``p``-norm from singular values; ``p = np.inf`` gives the operator norm."""
    if p < 1:
        raise ValueError("Schatten norm needs p >= 1")
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if np.isinf(p):
        return float(s.max()) if s.size else 0.0
    return float(np.sum(s**p) ** (1.0 / p))


def von_neumann_entropy(rho):
    """-Tr rho log rho in nats, with 0 log 0 = 0."""
    w = np.linalg.eigvalsh(hermitize(np.asarray(rho, dtype=complex)))
    w = w[w > _cutoff(w, None)]
    return float(-np.sum(w * np.log(w)))


def reconstruct(decomp):
    w, v = decomp
    return (v * w) @ v.conj().T
