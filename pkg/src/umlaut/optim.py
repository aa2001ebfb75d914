"""Mirror descent on density matrices with finite-difference gradients.

Iterates are parameterised by their matrix logarithm ``L`` so every point
stays strictly positive definite: ``x = exp(L) / Tr exp(L)``. A step reads
``L <- L - eta * G`` where ``G`` is the gradient of the objective projected
onto a traceless Hermitian basis (the generalized Gell-Mann basis by default,
or any orthonormal subspace basis such as a diagonal or group-invariant one).
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class OptimizerOptions:
    """Knobs shared by every optimisation routine.

    All randomness flows from ``seed``.
    """

    seed: int = 0
    max_iter: int = 10_000
    tol: float = 1e-10
    n_starts: int | None = None
    fd_step: float = 1e-6
    window: int = 1


@dataclass
class MirrorResult:
    x: np.ndarray
    value: float
    n_iter: int
    converged: bool
    grad_norm: float
    history: list = field(default_factory=list)


def gell_mann_basis(d):
    """Orthonormal (Hilbert-Schmidt) traceless Hermitian basis of size d^2 - 1, fixed order."""
    out = []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            out.append(s)
            a = np.zeros((d, d), dtype=complex)
            a[j, k], a[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            out.append(a)
    out.extend(diagonal_basis(d))
    return out


def diagonal_basis(d):
    """Orthonormal traceless diagonal matrices (the diagonal Gell-Mann elements)."""
    out = []
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        out.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return out


def orthonormalize(mats, tol=1e-10):
    """Gram-Schmidt in the Hilbert-Schmidt inner product; drops dependent elements."""
    out = []
    for m in mats:
        v = m.astype(complex).copy()
        for b in out:
            v = v - np.vdot(b, v) * b
        n = np.linalg.norm(v)
        if n > tol:
            out.append(v / n)
    return out


def _expm_h(L):
    w, v = np.linalg.eigh((L + L.conj().T) / 2)
    w = w - w.max()
    e = np.exp(w)
    return (v * (e / e.sum())) @ v.conj().T


def _logm_h(x):
    w, v = np.linalg.eigh((x + x.conj().T) / 2)
    w = np.maximum(w, 1e-300)
    return (v * np.log(w)) @ v.conj().T


def numerical_gradient(f, x, basis, step=1e-6, f0=None):
    """Symmetric finite-difference gradient of ``f`` at ``x`` along ``basis``.

    The step shrinks near the boundary so that ``x +- h B`` stays PSD.
    """
    lam_min = np.linalg.eigvalsh((x + x.conj().T) / 2)[0]
    h = min(step, 0.5 * max(lam_min, 1e-300))
    g = np.zeros_like(x)
    for b in basis:
        fp = f(x + h * b)
        fm = f(x - h * b)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            # one-sided fallback keeps the direction informative at the edge
            base = f(x) if f0 is None else f0
            if np.isfinite(fp):
                g = g + ((fp - base) / h) * b
            elif np.isfinite(fm):
                g = g + ((base - fm) / h) * b
            continue
        g = g + ((fp - fm) / (2 * h)) * b
    return g


def mirror_descent(
    f,
    x0,
    basis=None,
    *,
    schedule="adaptive",
    eta0=1.0,
    max_iter=10_000,
    tol=1e-10,
    window=1,
    fd_step=1e-6,
    record=False,
):
    """Minimise ``f`` over density matrices by entropic mirror descent.

    ``schedule="sqrt"`` uses ``eta_t = eta0 / sqrt(t)``; ``"adaptive"``
    grows the step by 1.5 after an accepted step and halves it until the
    objective does not increase. Stops once the total decrease over the last
    ``window`` iterations is below ``tol``.
    """
    x = np.asarray(x0, dtype=complex)
    d = x.shape[0]
    if basis is None:
        basis = gell_mann_basis(d)
    L = _logm_h(x)
    x = _expm_h(L)
    fx = f(x)
    eta = eta0
    values = [fx]
    history = [(x.copy(), fx)] if record else []
    converged = False
    g = np.zeros_like(x)
    it = 0
    for it in range(1, max_iter + 1):
        g = numerical_gradient(f, x, basis, fd_step, f0=fx)
        if np.linalg.norm(g) < 1e-14:
            converged = True
            break
        if schedule == "sqrt":
            step = eta0 / np.sqrt(it)
            L_new = L - step * g
            x_new = _expm_h(L_new)
            f_new = f(x_new)
            if not np.isfinite(f_new):
                break
        else:
            for _ in range(60):
                L_new = L - eta * g
                x_new = _expm_h(L_new)
                f_new = f(x_new)
                if np.isfinite(f_new) and f_new <= fx:
                    break
                eta *= 0.5
            else:
                converged = True
                break
            if f_new > fx:
                converged = True
                break
            eta = min(eta * 1.5, 1e6)
        L = L_new - np.max(np.linalg.eigvalsh((L_new + L_new.conj().T) / 2)) * np.eye(d)
        x, fx = x_new, f_new
        if record:
            history.append((x.copy(), fx))
        values.append(fx)
        if len(values) > window and abs(values[-1 - window] - fx) < tol:
            converged = True
            break
    return MirrorResult(x, float(fx), it, converged, float(np.linalg.norm(g)), history)


def random_start(d, rng, mix=0.5):
    """Full-rank random starting state: convex mix of a Haar-ish random state and I/d."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = g @ g.conj().T
    r = r / np.trace(r).real
    return (1 - mix) * r + mix * np.eye(d) / d


def multistart(f, d, n_starts, seed, basis=None, project=None, **kwargs):
    """Run mirror descent from I/d plus ``n_starts - 1`` seeded random starts.

    ``project`` maps a random start into the feasible subspace (for example a
    group twirl). Returns the list of results, best first.
    """
    rng = np.random.default_rng(seed)
    starts = [np.eye(d, dtype=complex) / d]
    for _ in range(max(n_starts, 1) - 1):
        s = random_start(d, rng)
        starts.append(project(s) if project is not None else s)
    results = [mirror_descent(f, s, basis, **kwargs) for s in starts]
    results.sort(key=lambda r: r.value)
    return results
