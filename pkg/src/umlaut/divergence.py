"""Quantum divergences: Umegaki, Petz-Renyi, Belavkin-Staszewski, hypothesis testing.

Every divergence returns a Python ``float`` in nats; ``math.inf`` signals a
failed support condition and is never produced by overflow.
"""

import math

import numpy as np

from ._config import SUPP_TOL
from .errors import InvariantError
from .linalg import hermitize, matrix_func, support_basis


def _pair(rho, sigma):
    rho = hermitize(np.asarray(rho, dtype=complex))
    sigma = hermitize(np.asarray(sigma, dtype=complex))
    if rho.shape != sigma.shape:
        raise InvariantError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    return rho, sigma


def support_included(rho, sigma, tol=SUPP_TOL):
    """True when supp(rho) is contained in supp(sigma) up to ``tol``."""
    vr = support_basis(rho)
    vs = support_basis(sigma)
    if vr.shape[1] == 0:
        return True
    leak = vr - vs @ (vs.conj().T @ vr)
    return np.linalg.norm(leak, 2) <= tol


def _log_on_support(h):
    return matrix_func(h, "log", kernel_policy="zero")


def relative_entropy(rho, sigma):
    """Umegaki relative entropy Tr[rho (log rho - log sigma)]."""
    rho, sigma = _pair(rho, sigma)
    if not support_included(rho, sigma):
        return math.inf
    val = np.trace(rho @ (_log_on_support(rho) - _log_on_support(sigma))).real
    return float(val)


def petz_renyi(rho, sigma, alpha):
    """Petz-Renyi divergence (1/(alpha-1)) log Tr[rho^alpha sigma^(1-alpha)].

    Powers are taken on supports. ``alpha`` must lie in (0, 1) or (1, 2].
    """
    if not (0 < alpha < 1 or 1 < alpha <= 2):
        raise ValueError(f"alpha must lie in (0,1) or (1,2], got {alpha}")
    rho, sigma = _pair(rho, sigma)
    if alpha > 1 and not support_included(rho, sigma):
        return math.inf
    ra = matrix_func(rho, "power", kernel_policy="zero", alpha=alpha)
    sb = matrix_func(sigma, "power", kernel_policy="zero", alpha=1 - alpha)
    q = np.trace(ra @ sb).real
    if q <= 0:
        return math.inf
    return float(math.log(q) / (alpha - 1))


def bs_relative_entropy(rho, sigma):
    """Belavkin-Staszewski divergence Tr[rho log(rho^1/2 sigma^-1 rho^1/2)]."""
    rho, sigma = _pair(rho, sigma)
    if not support_included(rho, sigma):
        return math.inf
    s_inv = matrix_func(sigma, "power", kernel_policy="zero", alpha=-1.0)
    r_half = matrix_func(rho, "sqrt")
    inner = hermitize(r_half @ s_inv @ r_half)
    return float(np.trace(rho @ _log_on_support(inner)).real)


def _dual_objective(lam, rho, sigma, eps):
    w = np.linalg.eigvalsh(hermitize(lam * rho - sigma))
    return lam * (1 - eps) - float(np.sum(w[w > 0]))


def _dual_slope(lam, rho, sigma, eps):
    w, v = np.linalg.eigh(hermitize(lam * rho - sigma))
    vp = v[:, w > 0]
    return (1 - eps) - float(np.trace(vp.conj().T @ rho @ vp).real)


def hypothesis_testing_beta(rho, sigma, eps, rtol=1e-12):
    """Optimal type-II error min Tr[M sigma] s.t. Tr[M rho] >= 1 - eps, 0 <= M <= I.

    Evaluated through the Lagrange dual
    ``max_{lam >= 0} lam (1 - eps) - Tr[(lam rho - sigma)_+]``, a concave
    one-dimensional problem solved by golden-section search.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    rho, sigma = _pair(rho, sigma)
    hi = 1.0
    for _ in range(2100):
        if _dual_slope(hi, rho, sigma, eps) < 0:
            break
        hi *= 2.0
    else:
        raise InvariantError("could not bracket the hypothesis-testing dual")
    f = lambda lam: _dual_objective(lam, rho, sigma, eps)  # noqa: E731
    g = (math.sqrt(5) - 1) / 2
    a, b = 0.0, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    best = max(f(a), f(b), fc, fd)
    while b - a > rtol * (1 + b):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
        best = max(best, fc, fd)
    return max(best, 0.0)


def hypothesis_testing_divergence(rho, sigma, eps):
    """D_H^eps(rho||sigma) = -log of the optimal type-II error (+inf if it is below 1e-300)."""
    beta = hypothesis_testing_beta(rho, sigma, eps)
    if beta <= 1e-300:
        return math.inf
    return float(-math.log(beta))


def classical_kl(p, q):
    """KL divergence of probability vectors, +inf when supports are not nested."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
