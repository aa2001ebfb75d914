"""Umlaut information of bipartite states and its relatives.

The umlaut information is ``U(A;B) = min_sigma D(rho_A (x) sigma || rho_AB)``.
Its minimiser has the closed form ``exp(X_B) / Tr exp(X_B)`` with
``X_B = Tr_A[(rho_A (x) 1) log rho_AB]`` and the value
``-S(rho_A) - log Tr exp(X_B)``.

Rank-deficient joint states are handled exactly: the minimisation is
restricted to the subspace ``K`` of vectors ``psi`` with
``supp(rho_A (x) psi) inside supp(rho_AB)``, and the logarithm of
``rho_AB`` is taken on its support.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._config import SUPP_TOL
from .divergence import bs_relative_entropy, relative_entropy
from .errors import InvariantError
from .linalg import (
    check_density,
    hermitize,
    kernel_basis,
    matrix_func,
    partial_trace,
    permute_subsystems,
    support_projector,
    tensor,
    von_neumann_entropy,
)
from .optim import OptimizerOptions, gell_mann_basis, mirror_descent, multistart, random_start


@dataclass(frozen=True)
class BipartiteState:
    """Density operator on H_A (x) H_B with its subsystem dimensions."""

    rho: np.ndarray
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 2 or min(dims) < 1:
            raise InvariantError(f"bipartite dims must be two positive integers, got {self.dims}")
        rho = check_density(self.rho)
        if rho.shape[0] != dims[0] * dims[1]:
            raise InvariantError(f"state of dimension {rho.shape[0]} does not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "rho", rho)

    @property
    def rho_A(self):
        return partial_trace(self.rho, self.dims, "A")

    @property
    def rho_B(self):
        return partial_trace(self.rho, self.dims, "B")

    def __matmul__(self, other):
        """Tensor product of two bipartite states, regrouped as (A A'; B B')."""
        dA, dB = self.dims
        eA, eB = other.dims
        joint = np.kron(self.rho, other.rho)
        joint = permute_subsystems(joint, (dA, dB, eA, eB), (0, 2, 1, 3))
        return BipartiteState(joint, (dA * eA, dB * eB))


@dataclass
class UmlautResult:
    """Value in nats (``math.inf`` when infinite) and the optimal B-marginal."""

    value: float
    sigma: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


def _as_state(s):
    if isinstance(s, BipartiteState):
        return s
    raise TypeError(f"expected BipartiteState, got {type(s).__name__}")


def _kernel_space(rho, dims, tol=SUPP_TOL):
    dA, dB = dims
    q = np.eye(dA * dB) - support_projector(rho)
    pa = np.kron(support_projector(partial_trace(rho, dims, "A")), np.eye(dB))
    t = partial_trace(pa @ q @ pa, dims, "B")
    return kernel_basis(hermitize(t), tol)


def admissible_subspace(s, tol=SUPP_TOL):
    """Orthonormal basis of ``K``, the B-vectors psi with rho_A (x) psi supported in rho_AB.

    ``K`` is the kernel of ``Tr_A[(Pi_A (x) 1) Q_AB (Pi_A (x) 1)]`` where
    ``Pi_A`` projects onto supp(rho_A) and ``Q_AB`` onto ker(rho_AB).
    """
    return _kernel_space(s.rho, s.dims, tol)


def finiteness_check(s):
    """True iff U(A;B) is finite."""
    return admissible_subspace(_as_state(s)).shape[1] > 0


def _closed_form_arrays(rho, dims):
    """Closed-form (value, umlaut-marginal) for an unvalidated density array."""
    dA, dB = dims
    rho_a = partial_trace(rho, dims, "A")
    w, v = np.linalg.eigh(rho)
    cut = 1e-12 * max(abs(w).max(), 1e-300)
    if w[0] > cut:
        vk = None
        log_rho = (v * np.log(w)) @ v.conj().T
    else:
        vk = _kernel_space(rho, dims)
        if vk.shape[1] == 0:
            return math.inf, None
        lw = np.where(w > cut, np.log(np.where(w > cut, w, 1.0)), 0.0)
        log_rho = (v * lw) @ v.conj().T
    x = hermitize(partial_trace(np.kron(rho_a, np.eye(dB)) @ log_rho, dims, "B"))
    if vk is not None:
        x = hermitize(vk.conj().T @ x @ vk)
    wx, vx = np.linalg.eigh(x)
    top = wx.max()
    e = np.exp(wx - top)
    log_z = top + math.log(e.sum())
    sigma = (vx * (e / e.sum())) @ vx.conj().T
    if vk is not None:
        sigma = vk @ sigma @ vk.conj().T
    return -von_neumann_entropy(rho_a) - log_z, hermitize(sigma)


def _closed_form(s):
    return _closed_form_arrays(s.rho, s.dims)


def umlaut_marginal(s):
    """The unique minimiser of sigma -> D(rho_A (x) sigma || rho_AB)."""
    s = _as_state(s)
    value, sigma = _closed_form(s)
    if sigma is None:
        raise InvariantError("umlaut information is infinite; the umlaut-marginal does not exist")
    return sigma


def umlaut_information(s):
    """Closed-form umlaut information with the umlaut-marginal as optimiser."""
    s = _as_state(s)
    value, sigma = _closed_form(s)
    return UmlautResult(value, sigma, {"method": "closed-form"})


def umlaut_value(s):
    return _closed_form(_as_state(s))[0]


def _restricted_objective(fn, vk):
    def obj(tau):
        return fn(hermitize(vk @ tau @ vk.conj().T))

    return obj


def umlaut_information_direct(s, opts=None):
    """Minimise D(rho_A (x) sigma || rho_AB) numerically by mirror descent.

    Independent of the closed form: the objective is evaluated through
    :func:`relative_entropy`. Steps follow ``eta_t = 1 / sqrt(t)`` from the
    maximally mixed state on the admissible subspace.
    """
    s = _as_state(s)
    opts = opts or OptimizerOptions()
    vk = admissible_subspace(s)
    if vk.shape[1] == 0:
        raise InvariantError("umlaut information is infinite; nothing to optimise")
    rho_a = s.rho_A
    obj = _restricted_objective(lambda sig: relative_entropy(np.kron(rho_a, sig), s.rho), vk)
    k = vk.shape[1]
    if k == 1:
        sigma = hermitize(vk @ vk.conj().T)
        return UmlautResult(obj(np.eye(1)), sigma, {"n_iter": 0, "converged": True, "residual": 0.0})
    if opts.seed:
        x0 = random_start(k, np.random.default_rng(opts.seed))
    else:
        x0 = np.eye(k) / k
    res = mirror_descent(
        obj,
        x0,
        gell_mann_basis(k),
        schedule="sqrt",
        eta0=1.0,
        max_iter=opts.max_iter,
        tol=opts.tol,
        fd_step=opts.fd_step,
    )
    sigma = hermitize(vk @ res.x @ vk.conj().T)
    diag = {"n_iter": res.n_iter, "converged": res.converged, "residual": res.grad_norm}
    return UmlautResult(res.value, sigma, diag)


def petz_umlaut(s, alpha):
    """Petz-Renyi alpha-umlaut information for alpha in (0, 1).

    Closed form ``-log Tr[Y^(1/(1-alpha))]`` with
    ``Y = Tr_A[rho_A^alpha rho_AB^(1-alpha)]``; the optimiser is
    ``Y^(1/(1-alpha))`` normalised.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    s = _as_state(s)
    dA, dB = s.dims
    ra = matrix_func(s.rho_A, "power", kernel_policy="zero", alpha=alpha)
    rj = matrix_func(s.rho, "power", kernel_policy="zero", alpha=1 - alpha)
    y = hermitize(partial_trace(np.kron(ra, np.eye(dB)) @ rj, s.dims, "B"))
    p = 1.0 / (1 - alpha)
    yp = matrix_func(y, "power", kernel_policy="zero", alpha=p)
    z = np.trace(yp).real
    if z <= 0:
        return UmlautResult(math.inf, None, {"method": "closed-form"})
    return UmlautResult(-math.log(z), hermitize(yp / z), {"method": "closed-form"})


def bs_umlaut_state(s, opts=None):
    """Geometric umlaut information: min_sigma D_BS(rho_A (x) sigma || rho_AB).

    Convex in sigma; solved by multi-start mirror descent (maximally mixed
    plus four seeded random starts by default). The best value is reported.
    """
    s = _as_state(s)
    opts = opts or OptimizerOptions(max_iter=2000, tol=1e-13, window=3)
    vk = admissible_subspace(s)
    if vk.shape[1] == 0:
        return UmlautResult(math.inf, None, {"method": "mirror-descent"})
    rho_a = s.rho_A
    obj = _restricted_objective(lambda sig: bs_relative_entropy(np.kron(rho_a, sig), s.rho), vk)
    k = vk.shape[1]
    if k == 1:
        sigma = hermitize(vk @ vk.conj().T)
        return UmlautResult(obj(np.eye(1)), sigma, {"n_iter": 0, "converged": True})
    n_starts = opts.n_starts or 5
    results = multistart(
        obj,
        k,
        n_starts,
        opts.seed,
        gell_mann_basis(k),
        max_iter=opts.max_iter,
        tol=opts.tol,
        window=opts.window,
        fd_step=opts.fd_step,
    )
    best = results[0]
    diag = {
        "n_iter": best.n_iter,
        "converged": best.converged,
        "residual": best.grad_norm,
        "start_values": [r.value for r in results],
    }
    return UmlautResult(best.value, hermitize(vk @ best.x @ vk.conj().T), diag)


def lautum(s):
    """L(A:B) = D(rho_A (x) rho_B || rho_AB)."""
    s = _as_state(s)
    return relative_entropy(tensor(s.rho_A, s.rho_B), s.rho)


def bs_lautum(s):
    """L_BS(A:B) = D_BS(rho_A (x) rho_B || rho_AB)."""
    s = _as_state(s)
    return bs_relative_entropy(tensor(s.rho_A, s.rho_B), s.rho)


def umlaut_information_floor(s, tau=1e-14):
    """Debug cross-check: closed form with kernel eigenvalues of rho_AB floored at ``tau``."""
    s = _as_state(s)
    dB = s.dims[1]
    log_rho = matrix_func(s.rho, "log", kernel_policy="floor", tau=tau)
    x = hermitize(partial_trace(np.kron(s.rho_A, np.eye(dB)) @ log_rho, s.dims, "B"))
    w = np.linalg.eigvalsh(x)
    top = w.max()
    return -von_neumann_entropy(s.rho_A) - (top + math.log(np.exp(w - top).sum()))
