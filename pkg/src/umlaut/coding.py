"""Operational quantities: non-signalling meta-converse, Nussbaum-Szkola pairs,
zero-rate exponents and finite-n Sanov estimates."""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import chernoff_matrix, output_state
from .divergence import hypothesis_testing_divergence
from .errors import InvariantError, SizeGuardError
from .linalg import check_density, hermitize, permute_subsystems, tensor
from .optim import OptimizerOptions, diagonal_basis, mirror_descent, multistart
from .sdp import LinearConstraint, SdpProblem, solve_sdp
from .state import BipartiteState, umlaut_marginal


@dataclass
class MetaConverseResult:
    error: float
    value: float
    status: str
    gap: float
    rho: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


def meta_converse_sdp(ch, M):
    """The program max (1/M) Tr[J Lambda] s.t. Tr_A' Lambda <= 1, 0 <= Lambda <= M rho (x) 1, Tr rho = 1.

    Variable blocks are ``[rho, Lambda]``.
    """
    d_in, d_out = ch.dims
    n = d_in * d_out
    eye_b = np.eye(d_out)
    eye_a = np.eye(d_in)
    trace_a = [(1, np.kron(eye_a[i : i + 1], eye_b), 1.0) for i in range(d_in)]
    lift = [(0, np.kron(eye_a, eye_b[:, j : j + 1]), -float(M)) for j in range(d_out)]
    constraints = [
        LinearConstraint(trace_a, "<=", eye_b),
        LinearConstraint([(1, np.eye(n), 1.0)] + lift, "<=", np.zeros((n, n))),
        LinearConstraint([(0, eye_a[i : i + 1], 1.0) for i in range(d_in)], "==", np.ones((1, 1))),
    ]
    return SdpProblem([d_in, n], [np.zeros((d_in, d_in)), ch.choi / M], constraints)


def ns_error_probability(ch, M):
    """Activated non-signalling error probability for M messages, with -log of it.

    Solves the joint meta-converse program; ``value`` is ``-log error`` (+inf
    when the error vanishes to solver precision).
    """
    if M < 2:
        raise ValueError("M must be at least 2")
    if ch.d_in * ch.d_out > 16:
        raise SizeGuardError(f"d_in * d_out = {ch.d_in * ch.d_out} exceeds the limit of 16")
    sol = solve_sdp(meta_converse_sdp(ch, M))
    eps = min(max(1.0 - sol.primal, 0.0), 1.0)
    value = math.inf if eps <= 1e-12 else -math.log(eps)
    diag = {"status": sol.status, "gap": sol.gap, "residual": sol.residual, "dual": sol.dual}
    rho = hermitize(sol.variables[0]) if sol.variables else None
    return MetaConverseResult(eps, value, sol.status, sol.gap, rho, diag)


def nussbaum_szkola(rho, sigma):
    """Classical pair p_ab = l_a |<a|b>|^2, q_ab = m_b |<a|b>|^2 built from the two eigenbases."""
    rho = check_density(rho)
    sigma = check_density(sigma)
    if rho.shape != sigma.shape:
        raise InvariantError("states must have equal dimension")
    lam, phi = np.linalg.eigh(rho)
    mu, psi = np.linalg.eigh(sigma)
    lam = np.clip(lam, 0, None)
    mu = np.clip(mu, 0, None)
    overlap = np.abs(phi.conj().T @ psi) ** 2
    p = (lam[:, None] * overlap).ravel()
    q = (mu[None, :] * overlap).ravel()
    return p, q


def _min_part(a, b):
    w = np.linalg.eigvalsh(hermitize(a - b))
    return float(np.trace(a).real - np.sum(w[w > 0]))


def audenaert_gap(rho, sigma):
    """(Tr[rho ^ sigma], sum_ab min(p_ab, q_ab)); the first is at least half the second."""
    p, q = nussbaum_szkola(rho, sigma)
    quantum = _min_part(check_density(rho), check_density(sigma))
    classical = float(np.minimum(p, q).sum())
    if quantum < classical / 2 - 1e-10:
        raise InvariantError("Audenaert inequality violated; numerical breakdown")
    return quantum, classical


def _quadratic_max_on_face(c, face):
    """Stationary point of P^T C P restricted to the relative interior of a simplex face."""
    k = len(face)
    sub = c[np.ix_(face, face)]
    if k == 1:
        return None
    # KKT: 2 sub P = nu 1, sum P = 1
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = 2 * sub
    kkt[:k, k] = -1
    kkt[k, :k] = 1
    rhs = np.zeros(k + 1)
    rhs[k] = 1
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        return None
    p = sol[:k]
    if np.all(p > 0):
        return p
    return None


def zero_rate_unassisted_exponent_cq(states, opts=None):
    """max over the simplex of sum_xy P(x) P(y) (-log Tr[sqrt(rho_x) sqrt(rho_y)]).

    Exact for alphabets of size at most 3 (vertices plus the stationary point
    of every face); for larger alphabets a multi-start exponentiated-gradient
    search is used and the result is flagged as heuristic.
    """
    n = len(states)
    if n > 16:
        raise SizeGuardError("alphabet larger than 16")
    c = chernoff_matrix(states)
    if n == 1:
        return 0.0, {"method": "exact", "P": [1.0]}
    if np.isinf(c).any():
        return math.inf, {"method": "exact", "note": "orthogonal output pair"}
    best, arg = 0.0, np.eye(n)[0]
    if n <= 3:
        for size in range(2, n + 1):
            for face in itertools.combinations(range(n), size):
                p = _quadratic_max_on_face(c, list(face))
                if p is None:
                    continue
                full = np.zeros(n)
                full[list(face)] = p
                val = float(full @ c @ full)
                if val > best:
                    best, arg = val, full
        return best, {"method": "exact", "P": arg.tolist()}
    opts = opts or OptimizerOptions(max_iter=5000, tol=1e-14, window=5, n_starts=8)
    results = multistart(
        lambda pm: -float(np.real(np.diag(pm)) @ c @ np.real(np.diag(pm))),
        n,
        opts.n_starts or 8,
        opts.seed,
        diagonal_basis(n),
        lambda r: np.diag(np.diag(r)),
        max_iter=opts.max_iter,
        tol=opts.tol,
        window=opts.window,
    )
    p = np.real(np.diag(results[0].x))
    return -results[0].value, {"method": "heuristic", "P": p.tolist()}


def _tensor_power_state(rho, dims, n):
    """rho^{(x)n} regrouped as (A^n ; B^n)."""
    joint = tensor(*([rho] * n))
    sub = list(dims) * n
    perm = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    return permute_subsystems(joint, sub, perm)


def sanov_finite_n_estimate(s, eps, n, opts=None):
    """min over sigma of (1/n) D_H^eps(rho_A^n (x) sigma^n || rho_AB^n).

    Alternatives are restricted to i.i.d. sigma^{(x)n}, so this is an upper
    estimate of the n-copy quantity. Starts from the umlaut-marginal.
    """
    if not isinstance(s, BipartiteState):
        raise TypeError("expected BipartiteState")
    d_a, d_b = s.dims
    if (d_a * d_b) ** n > 4096:
        raise SizeGuardError(f"(dA dB)^n = {(d_a * d_b) ** n} exceeds 4096")
    joint_n = hermitize(_tensor_power_state(s.rho, s.dims, n))
    rho_a_n = tensor(*([s.rho_A] * n))

    def objective(sigma):
        alt = np.kron(rho_a_n, tensor(*([sigma] * n)))
        return hypothesis_testing_divergence(alt, joint_n, eps) / n

    opts = opts or OptimizerOptions(max_iter=200, tol=1e-9, window=3)
    try:
        start = umlaut_marginal(s)
    except InvariantError:
        return math.inf, {"caveat": "iid alternatives only"}
    start = 0.98 * start + 0.02 * np.eye(d_b) / d_b
    res = mirror_descent(objective, start, max_iter=opts.max_iter, tol=opts.tol, window=opts.window, fd_step=1e-5)
    return res.value, {"n_iter": res.n_iter, "converged": res.converged, "caveat": "iid alternatives only"}


def meta_converse_grid(ch, M, n_grid=21):
    """Grid estimate of sup_rho min_sigma D_H^{1/M}(rho (x) sigma || rho^N) for qubit channels.

    rho and sigma both range over diag(p, 1 - p) with ``n_grid`` values of p;
    an independent check on the joint SDP.
    """
    if ch.d_in != 2 or ch.d_out != 2:
        raise InvariantError("grid check is implemented for qubit channels only")
    grid = [np.diag([p, 1 - p]).astype(complex) for p in np.linspace(0, 1, n_grid)]
    best = -math.inf
    for rho in grid:
        joint = output_state(ch, rho).rho
        inner = min(hypothesis_testing_divergence(np.kron(rho, sig), joint, 1.0 / M) for sig in grid)
        best = max(best, inner)
    return best


def hypothesis_testing_sdp(rho, sigma, eps):
    """Primal program min Tr[T sigma] s.t. Tr[T rho] >= 1 - eps, 0 <= T <= 1, solved as an SDP."""
    rho = hermitize(np.asarray(rho, dtype=complex))
    sigma = hermitize(np.asarray(sigma, dtype=complex))
    d = rho.shape[0]
    root_rho = _sqrt_psd(rho)
    constraints = [
        LinearConstraint([(0, np.eye(d), 1.0)], "<=", np.eye(d)),
        # Tr[T rho] = sum_i <i| rho^1/2 T rho^1/2 |i>
        LinearConstraint([(0, np.eye(d)[i : i + 1] @ root_rho, 1.0) for i in range(d)], ">=", [[1 - eps]]),
    ]
    return solve_sdp(SdpProblem([d], [-sigma], constraints))


def _sqrt_psd(m):
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
