"""Channel umlaut information and its relatives.

Channels are stored through their un-normalised Choi matrix
``J = sum_ij |i><j| (x) N(|i><j|)`` on ``A' (x) B`` (input factor slow). For
an input state ``rho`` the relevant bipartite state is
``(rho^1/2 (x) 1) J (rho^1/2 (x) 1)`` and

    U(N) = sup_rho U(A';B) of that state,

a concave maximisation over inputs. Classical-quantum channels (letters
``x -> rho_x``) get dedicated routines working on the probability simplex.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._config import PSD_TOL, SUPP_TOL
from .errors import InvariantError, SizeGuardError
from .linalg import (
    check_density,
    check_hermitian,
    hermitize,
    kernel_basis,
    partial_trace,
    permute_subsystems,
    support_basis,
    support_projector,
)
from .optim import (
    OptimizerOptions,
    diagonal_basis,
    gell_mann_basis,
    mirror_descent,
    multistart,
    orthonormalize,
    random_start,
)
from .state import BipartiteState, _closed_form_arrays, lautum

_STRUCTURES = ("generic", "cq", "covariant")


@dataclass(frozen=True)
class Channel:
    """Quantum channel given by its un-normalised Choi matrix on A' (x) B.

    ``kind`` is ``"generic"``, ``"cq"`` (then ``states`` lists the output
    states, one per letter) or ``"covariant"`` (then ``group_in`` and
    ``group_out`` hold matching lists of unitaries U_g, V_g with
    N(U_g . U_g^dag) = V_g N(.) V_g^dag).
    """

    choi: np.ndarray
    d_in: int
    d_out: int
    kind: str = "generic"
    states: tuple | None = None
    group_in: tuple | None = None
    group_out: tuple | None = None

    def __post_init__(self):
        d_in, d_out = int(self.d_in), int(self.d_out)
        choi = check_hermitian(self.choi, tol=1e-8)
        if choi.shape[0] != d_in * d_out:
            raise InvariantError(f"Choi matrix of dimension {choi.shape[0]} does not match {d_in}x{d_out}")
        w = np.linalg.eigvalsh(choi)
        if w[0] < -max(PSD_TOL, 1e-10 * abs(w[-1])):
            raise InvariantError(f"Choi matrix is not PSD (min eigenvalue {w[0]:.3e})")
        tp = partial_trace(choi, (d_in, d_out), "A")
        if np.linalg.norm(tp - np.eye(d_in), 2) > 1e-8:
            raise InvariantError("channel is not trace preserving: Tr_B J != 1")
        if self.kind not in _STRUCTURES:
            raise InvariantError(f"unknown channel structure {self.kind!r}")
        object.__setattr__(self, "choi", choi)
        object.__setattr__(self, "d_in", d_in)
        object.__setattr__(self, "d_out", d_out)
        if self.kind == "cq":
            if self.states is None or len(self.states) != d_in:
                raise InvariantError("cq structure needs one output state per input letter")
            states = tuple(check_density(s) for s in self.states)
            expected = sum(np.kron(_ketbra(d_in, x), s) for x, s in enumerate(states))
            if np.abs(expected - choi).max() > 1e-10:
                raise InvariantError("Choi matrix does not match the listed cq states")
            object.__setattr__(self, "states", states)
        if self.kind == "covariant":
            if not self.group_in or len(self.group_in) != len(self.group_out or ()):
                raise InvariantError("covariant structure needs matching group_in / group_out lists")
            gin = tuple(np.asarray(u, dtype=complex) for u in self.group_in)
            gout = tuple(np.asarray(v, dtype=complex) for v in self.group_out)
            object.__setattr__(self, "group_in", gin)
            object.__setattr__(self, "group_out", gout)
            if not check_covariance(choi, gin, gout):
                raise InvariantError("Choi matrix is not invariant under the listed group action")

    @property
    def dims(self):
        return (self.d_in, self.d_out)

    def apply(self, x):
        """N(x) = Tr_A'[(x^T (x) 1) J]."""
        x = np.asarray(x, dtype=complex)
        return partial_trace(np.kron(x.T, np.eye(self.d_out)) @ self.choi, self.dims, "B")


@dataclass
class ChannelUmlautResult:
    """Optimal value with the achieving input ``rho`` (on A') and marginal ``sigma`` (on B)."""

    value: float
    rho: np.ndarray | None = None
    sigma: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


def _ketbra(d, x, y=None):
    m = np.zeros((d, d), dtype=complex)
    m[x, x if y is None else y] = 1.0
    return m


# -- constructors ------------------------------------------------------------


def choi_from_kraus(kraus, kind="generic", **structure):
    """Channel from Kraus operators; checks sum K^dag K = 1 within 1e-8."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    d_out, d_in = kraus[0].shape
    if any(k.shape != (d_out, d_in) for k in kraus):
        raise InvariantError("Kraus operators must share one shape")
    s = sum(k.conj().T @ k for k in kraus)
    if np.linalg.norm(s - np.eye(d_in), 2) > 1e-8:
        raise InvariantError("Kraus operators are not trace preserving")
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            e = _ketbra(d_in, i, j)
            choi += np.kron(e, sum(k @ e @ k.conj().T for k in kraus))
    return Channel(choi, d_in, d_out, kind, **structure)


def cq_channel(states):
    """Classical-quantum channel x -> states[x] with Choi matrix sum_x |x><x| (x) rho_x."""
    states = [check_density(s) for s in states]
    n, d = len(states), states[0].shape[0]
    choi = sum(np.kron(_ketbra(n, x), s) for x, s in enumerate(states))
    return Channel(choi, n, d, "cq", states=tuple(states))


def identity_channel(d):
    phi = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            phi[i * d + i, j * d + j] = 1.0
    return Channel(phi, d, d)


def replacer_channel(sigma, d_in):
    """Channel discarding its input and preparing ``sigma``; Choi matrix 1 (x) sigma."""
    sigma = check_density(sigma)
    return Channel(np.kron(np.eye(d_in), sigma), d_in, sigma.shape[0])


def gad_channel(gamma, beta):
    """Generalised amplitude damping channel, Z-covariant."""
    a1 = np.sqrt(1 - beta) * np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
    a2 = np.sqrt(gamma * (1 - beta)) * np.array([[0, 1], [0, 0]])
    a3 = np.sqrt(beta) * np.array([[np.sqrt(1 - gamma), 0], [0, 1]])
    a4 = np.sqrt(gamma * beta) * np.array([[0, 0], [1, 0]])
    z = np.diag([1.0, -1.0])
    group = (np.eye(2), z)
    return choi_from_kraus([a1, a2, a3, a4], "covariant", group_in=group, group_out=group)


def check_covariance(choi, group_in, group_out, tol=1e-8):
    """True when (conj(U_g) (x) V_g) J (conj(U_g) (x) V_g)^dag = J for every pair."""
    for u, v in zip(group_in, group_out):
        w = np.kron(u.conj(), v)
        if np.abs(w @ choi @ w.conj().T - choi).max() > tol:
            return False
    return True


def tensor_channels(first, second):
    """Choi matrix of N (x) M, reordered from (A1 B1 A2 B2) to (A1 A2 ; B1 B2)."""
    joint = np.kron(first.choi, second.choi)
    dims = (first.d_in, first.d_out, second.d_in, second.d_out)
    joint = permute_subsystems(joint, dims, (0, 2, 1, 3))
    if first.kind == "cq" and second.kind == "cq":
        states = tuple(np.kron(a, b) for a in first.states for b in second.states)
        return Channel(joint, first.d_in * second.d_in, first.d_out * second.d_out, "cq", states=states)
    return Channel(joint, first.d_in * second.d_in, first.d_out * second.d_out)


# -- states induced by a channel ----------------------------------------------


def _sqrt_psd(rho):
    w, v = np.linalg.eigh(hermitize(rho))
    return (v * np.sqrt(np.maximum(w, 0.0))) @ v.conj().T


def _output_array(choi, d_out, rho):
    s = np.kron(_sqrt_psd(rho), np.eye(d_out))
    return hermitize(s @ choi @ s)


def output_state(ch, rho_in):
    """The bipartite state (rho^1/2 (x) 1) J (rho^1/2 (x) 1) on A' (x) B."""
    rho_in = check_density(rho_in)
    if rho_in.shape[0] != ch.d_in:
        raise InvariantError(f"input state has dimension {rho_in.shape[0]}, channel expects {ch.d_in}")
    return BipartiteState(_output_array(ch.choi, ch.d_out, rho_in), ch.dims)


def channel_finiteness_check(ch):
    """True iff U(N) is finite, i.e. Tr_A' Q has a kernel, Q the projector onto ker J."""
    q = np.eye(ch.choi.shape[0]) - support_projector(ch.choi)
    t = hermitize(partial_trace(q, ch.dims, "B"))
    return kernel_basis(t, SUPP_TOL).shape[1] > 0


def _channel_objective(ch):
    choi, d_out, dims = ch.choi, ch.d_out, ch.dims

    def u_of(rho):
        return _closed_form_arrays(_output_array(choi, d_out, rho), dims)[0]

    return u_of


def restricted_umlaut(ch, p):
    """U(A';B) for the diagonal qubit input diag(p, 1 - p)."""
    rho = np.diag([p, 1 - p]).astype(complex)
    return _closed_form_arrays(_output_array(ch.choi, ch.d_out, rho), ch.dims)[0]


def _finish(ch, value, rho, diag):
    sigma = None
    if math.isfinite(value):
        sigma = _closed_form_arrays(_output_array(ch.choi, ch.d_out, rho), ch.dims)[1]
    return ChannelUmlautResult(value, rho, sigma, diag)


def _ascent(objective, d, opts, n_starts, basis=None, project=None):
    results = multistart(
        lambda r: -objective(r),
        d,
        n_starts,
        opts.seed,
        basis,
        project,
        max_iter=opts.max_iter,
        tol=opts.tol,
        window=opts.window,
        fd_step=opts.fd_step,
    )
    values = [-r.value for r in results]
    best = results[0]
    diag = {
        "n_iter": best.n_iter,
        "converged": all(r.converged for r in results),
        "residual": best.grad_norm,
        "start_values": values,
        "warnings": [],
    }
    if max(values) - min(values) > 1e-4:
        diag["warnings"].append("multi-start values disagree by more than 1e-4")
    return -best.value, best.x, diag


def _default_ascent_opts():
    return OptimizerOptions(max_iter=2000, tol=1e-9, window=50)


def channel_umlaut(ch, opts=None):
    """U(N) by multi-start mirror ascent over input states (8 starts by default).

    The inner minimisation over sigma is the closed form. Returns +inf without
    optimising when the finiteness check fails.
    """
    opts = opts or _default_ascent_opts()
    if not channel_finiteness_check(ch):
        return ChannelUmlautResult(math.inf, None, None, {"finite": False})
    value, rho, diag = _ascent(_channel_objective(ch), ch.d_in, opts, opts.n_starts or 8)
    return _finish(ch, value, rho, diag)


def twirl(rho, group_in):
    """Average of conj(U_g) rho conj(U_g)^dag over the group."""
    return sum(u.conj() @ rho @ u.T for u in group_in) / len(group_in)


def invariant_basis(d, group_in):
    """Orthonormal traceless basis of Hermitian operators invariant under the input twirl."""
    twirled = [twirl(b, group_in) for b in gell_mann_basis(d)]
    return orthonormalize(twirled, tol=1e-10)


def _is_diagonal_family(basis):
    return len(basis) == 1 and np.abs(basis[0] - np.diag(np.diag(basis[0]))).max() < 1e-12


def golden_section_max(f, a, b, width=1e-10):
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    n = 0
    while b - a > width:
        n += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x), n


def channel_umlaut_covariant(ch, opts=None):
    """U(N) restricted to group-invariant inputs.

    For a qubit channel whose invariant inputs are the diagonal family
    diag(p, 1-p) (Z-covariance), a golden-section search on p runs to width
    1e-10. Otherwise mirror ascent runs inside the invariant subspace.
    """
    if ch.kind != "covariant":
        raise InvariantError("channel has no covariant structure")
    if not check_covariance(ch.choi, ch.group_in, ch.group_out):
        raise InvariantError("covariance verification failed")
    opts = opts or _default_ascent_opts()
    if not channel_finiteness_check(ch):
        return ChannelUmlautResult(math.inf, None, None, {"finite": False})
    basis = invariant_basis(ch.d_in, ch.group_in)
    objective = _channel_objective(ch)
    if not basis:
        rho = np.eye(ch.d_in, dtype=complex) / ch.d_in
        return _finish(ch, objective(rho), rho, {"method": "trivial-commutant"})
    if ch.d_in == 2 and _is_diagonal_family(basis):
        p, value, n = golden_section_max(lambda t: restricted_umlaut(ch, t), 0.0, 1.0)
        rho = np.diag([p, 1 - p]).astype(complex)
        return _finish(ch, value, rho, {"method": "golden-section", "argmax_p": p, "n_iter": n})
    value, rho, diag = _ascent(
        objective, ch.d_in, opts, opts.n_starts or 8, basis, lambda r: twirl(r, ch.group_in)
    )
    diag["method"] = "invariant-mirror-ascent"
    return _finish(ch, value, rho, diag)


def two_copy_lower_bound(ch, rho_two_copy):
    """U(A'1A'2;B1B2) of N (x) N fed with ``rho_two_copy``: a lower bound on U(N (x) N)."""
    rho_two_copy = check_density(rho_two_copy)
    if rho_two_copy.shape[0] != ch.d_in**2:
        raise InvariantError(f"two-copy input must have dimension {ch.d_in ** 2}")
    both = tensor_channels(ch, ch)
    return _closed_form_arrays(_output_array(both.choi, both.d_out, rho_two_copy), both.dims)[0]


def channel_lautum(ch, opts=None):
    """Best-effort sup over inputs of L(A':B); concavity is not known, so this is a lower bound."""
    opts = opts or _default_ascent_opts()
    if not channel_finiteness_check(ch):
        return ChannelUmlautResult(math.inf, None, None, {"finite": False, "lower_bound_only": True})

    def objective(rho):
        return lautum(BipartiteState(_output_array(ch.choi, ch.d_out, rho), ch.dims))

    value, rho, diag = _ascent(objective, ch.d_in, opts, opts.n_starts or 16)
    diag["lower_bound_only"] = True
    return _finish(ch, value, rho, diag)


# -- classical-quantum channels -------------------------------------------------


def _states(states):
    return [hermitize(np.asarray(s, dtype=complex)) for s in states]


def common_support(states):
    """Orthonormal basis of the intersection of the supports of ``states``."""
    d = states[0].shape[0]
    complement = sum(np.eye(d) - support_projector(s) for s in states)
    return kernel_basis(hermitize(complement), SUPP_TOL)


def _restricted_log(rho, basis):
    w, v = np.linalg.eigh(rho)
    cut = 1e-12 * abs(w).max()
    lw = np.where(w > cut, np.log(np.where(w > cut, w, 1.0)), 0.0)
    return hermitize(basis.conj().T @ ((v * lw) @ v.conj().T) @ basis)


def _log_trace_exp(h):
    w = np.linalg.eigvalsh(h)
    top = w.max()
    return top + math.log(np.exp(w - top).sum())


def cq_umlaut_at(states, P):
    """U(X';B) of sum_x P(x) |x><x| (x) rho_x, namely -log Tr exp(sum_x P(x) log rho_x).

    Logs are restricted to the common support of the states with P(x) > 0.
    """
    states = _states(states)
    P = np.asarray(P, dtype=float)
    active = [s for s, p in zip(states, P) if p > 0]
    k = common_support(active)
    if k.shape[1] == 0:
        return math.inf
    h = sum(p * _restricted_log(s, k) for s, p in zip(states, P) if p > 0)
    return -_log_trace_exp(h)


def cq_channel_umlaut(states, opts=None):
    """Umlaut information of a cq channel: max_P -log Tr exp(sum_x P(x) log rho_x).

    Exponentiated-gradient ascent on the simplex (diagonal mirror descent).
    """
    states = _states(states)
    k = common_support(states)
    n = len(states)
    if k.shape[1] == 0:
        return ChannelUmlautResult(math.inf, None, None, {"finite": False})
    logs = [_restricted_log(s, k) for s in states]

    def neg(pm):
        p = np.real(np.diag(pm))
        return _log_trace_exp(sum(pi * l for pi, l in zip(p, logs)))

    opts = opts or OptimizerOptions(max_iter=5000, tol=1e-13, window=5)
    if n == 1:
        return ChannelUmlautResult(-neg(np.eye(1)), np.eye(1), None, {"n_iter": 0})
    results = multistart(
        neg,
        n,
        opts.n_starts or 1,
        opts.seed,
        diagonal_basis(n),
        lambda r: np.diag(np.diag(r)),
        max_iter=opts.max_iter,
        tol=opts.tol,
        window=opts.window,
        fd_step=opts.fd_step,
    )
    best = results[0]
    P = np.real(np.diag(best.x))
    h = sum(p * l for p, l in zip(P, logs))
    w, v = np.linalg.eigh(h)
    e = np.exp(w - w.max())
    sigma = k @ ((v * (e / e.sum())) @ v.conj().T) @ k.conj().T
    diag = {"n_iter": best.n_iter, "converged": best.converged, "residual": best.grad_norm}
    return ChannelUmlautResult(-best.value, np.diag(P).astype(complex), hermitize(sigma), diag)


def _softmax(values, temperature):
    v = np.asarray(values)
    top = v.max()
    return top + temperature * math.log(np.exp((v - top) / temperature).sum())


def anneal_minimax(pieces, d, opts=None, t_start=1.0, t_final=1e-6, decay=0.7, n_starts=1, basis=None, x0=None):
    """min over states sigma of max_i pieces(sigma)[i] by annealed log-sum-exp smoothing.

    ``pieces`` maps a density matrix to a vector of values. Each temperature
    stage is a mirror-descent solve warm-started from the previous stage; the
    reported value is the hard maximum at the final iterate, which exceeds
    the true optimum by at most ``t_final * log(len(pieces))``.
    """
    opts = opts or OptimizerOptions(max_iter=300, tol=1e-13, window=3)
    rng = np.random.default_rng(opts.seed)
    starts = [np.eye(d, dtype=complex) / d if x0 is None else x0]
    starts += [random_start(d, rng) for _ in range(n_starts - 1)]
    best = None
    total = 0
    for start in starts:
        x = start
        t = t_start
        while True:
            res = mirror_descent(
                lambda s, t=t: _softmax(pieces(s), t),
                x,
                basis,
                max_iter=opts.max_iter,
                tol=opts.tol * max(t, 1e-3),
                window=opts.window,
                fd_step=min(opts.fd_step, t * 1e-2),
            )
            x = res.x
            total += res.n_iter
            if t <= t_final:
                break
            t = max(t * decay, t_final)
        hard = float(np.max(pieces(x)))
        if best is None or hard < best[0]:
            best = (hard, x)
    return best[0], best[1], {"n_iter": total, "final_temperature": t_final}


def cq_dual_umlaut(states, opts=None, t_final=1e-7):
    """min_sigma max_x D(sigma || rho_x), the dual formula for the cq channel umlaut information."""
    states = _states(states)
    k = common_support(states)
    if k.shape[1] == 0:
        return math.inf, None
    logs = [_restricted_log(s, k) for s in states]

    def pieces(tau):
        w = np.linalg.eigvalsh(tau)
        w = w[w > 0]
        neg_s = float(np.sum(w * np.log(w)))
        return np.array([neg_s - np.trace(tau @ l).real for l in logs])

    dim = k.shape[1]
    if dim == 1:
        return float(np.max(pieces(np.eye(1)))), hermitize(k @ k.conj().T)
    value, tau, _ = anneal_minimax(pieces, dim, opts, t_final=t_final)
    return value, hermitize(k @ tau @ k.conj().T)


# -- lower bounds -------------------------------------------------------------


def lower_umlaut_ell(states, P, k, q=None):
    """(k, q)-lower umlaut information: E over k i.i.d. letters of -log Tr exp(sum_i q_i log rho_x_i).

    ``q`` defaults to the uniform vector. Logs are restricted to the common
    support of the states weighted by non-zero q_i in each tuple.
    """
    states = _states(states)
    P = np.asarray(P, dtype=float)
    n = len(states)
    if n**k > 10**6:
        raise SizeGuardError(f"alphabet^k = {n ** k} exceeds the 1e6 enumeration guard")
    q = np.full(k, 1.0 / k) if q is None else np.asarray(q, dtype=float)
    if len(q) != k or abs(q.sum() - 1) > 1e-12:
        raise ValueError("q must have k entries summing to 1")
    letters = [x for x in range(n) if P[x] > 0]
    uniform = np.allclose(q, q[0])
    cache = {}
    total = 0.0
    for tup in itertools.product(letters, repeat=k):
        weight = float(np.prod(P[list(tup)]))
        key = tuple(sorted(tup)) if uniform else tup
        if key not in cache:
            used = [(states[x], qi) for x, qi in zip(tup, q) if qi != 0]
            sub = common_support([s for s, _ in used])
            if sub.shape[1] == 0:
                cache[key] = math.inf
            else:
                h = sum(qi * _restricted_log(s, sub) for s, qi in used)
                cache[key] = -_log_trace_exp(h)
        total += weight * cache[key]
    return total


def ell_convergence_bound(states, P, k):
    """Upper bound on U(X';B) - ell_{k,u_k} for states sharing one support.

    With U = U(X';B), lam the largest finite eigenvalue of
    R = -sum_{x in supp P} log rho_x, P_min the smallest positive P(x) and
    P* = (2U / (k lam))^(1/3):

    * P* <  P_min: 3 (U/k)^(1/3) (lam/2)^(2/3)
    * P* >= P_min: U / (k P_min^2) + P_min lam
    """
    states = _states(states)
    P = np.asarray(P, dtype=float)
    base = support_projector(states[0])
    for s in states[1:]:
        if np.abs(support_projector(s) - base).max() > SUPP_TOL:
            raise InvariantError("states do not share one support")
    sub = support_basis(states[0])
    u = cq_umlaut_at(states, P)
    r = -sum(_restricted_log(s, sub) for s, p in zip(states, P) if p > 0)
    lam = float(np.linalg.eigvalsh(r).max())
    p_min = float(P[P > 0].min())
    if lam <= 0 or u <= 0:
        return u / (k * p_min**2)
    p_star = (2 * u / (k * lam)) ** (1 / 3)
    if p_star < p_min:
        return 3 * (u / k) ** (1 / 3) * (lam / 2) ** (2 / 3)
    return u / (k * p_min**2) + p_min * lam


def chernoff_matrix(states):
    """C[x, y] = -log Tr[sqrt(rho_x) sqrt(rho_y)] (+inf for orthogonal supports)."""
    states = _states(states)
    roots = [_sqrt_psd(s) for s in states]
    n = len(states)
    c = np.zeros((n, n))
    for x in range(n):
        for y in range(x + 1, n):
            t = np.trace(roots[x] @ roots[y]).real
            c[x, y] = c[y, x] = math.inf if t <= 1e-300 else -math.log(t)
    return c


def chernoff_lower_bound(states, P):
    """sum_{x,y} P(x) P(y) (-log Tr[sqrt(rho_x) sqrt(rho_y)])."""
    P = np.asarray(P, dtype=float)
    c = chernoff_matrix(states)
    total = 0.0
    for x, y in itertools.product(range(len(P)), repeat=2):
        w = P[x] * P[y]
        if w > 0 and x != y:
            if math.isinf(c[x, y]):
                return math.inf
            total += w * c[x, y]
    return total


# -- geometric (Belavkin-Staszewski) channel umlaut -------------------------------


def _pinv_psd(m):
    w, v = np.linalg.eigh(hermitize(m))
    cut = 1e-12 * abs(w).max()
    inv = np.where(w > cut, 1.0 / np.where(w > cut, w, 1.0), 0.0)
    return (v * inv) @ v.conj().T


def _log_psd(m):
    w, v = np.linalg.eigh(hermitize(m))
    c = 1e-12 * max(abs(w).max(), 1e-300)
    lw = np.where(w > c, np.log(np.where(w > c, w, 1.0)), 0.0)
    return (v * lw) @ v.conj().T


def _bs_w_generic(ch, vk):
    """tau -> Tr_B[(1 (x) sigma) log((1 (x) sigma^1/2) J^-1 (1 (x) sigma^1/2))], sigma = vk tau vk^dag."""
    j_inv = _pinv_psd(ch.choi)
    eye = np.eye(ch.d_in)

    def w_of(tau):
        sigma = hermitize(vk @ tau @ vk.conj().T)
        root = np.kron(eye, _sqrt_psd(sigma))
        log_m = _log_psd(root @ j_inv @ root)
        return hermitize(partial_trace(np.kron(eye, sigma) @ log_m, ch.dims, "A"))

    return w_of


def _bs_w_cq(states, vk):
    """tau -> diag_x D_BS(sigma || rho_x) for sigma = vk tau vk^dag inside the common support."""
    inverses = [vk.conj().T @ _pinv_psd(s) @ vk for s in states]

    def w_of(tau):
        root = _sqrt_psd(tau)
        vals = [np.trace(tau @ _log_psd(root @ inv @ root)).real for inv in inverses]
        return np.diag(vals).astype(complex)

    return w_of


def saddle_dual(w_of, d_out, d_in, diagonal=False, tau0=None, max_outer=200, gap_tol=1e-9):
    """Lower certificate for min_tau lambda_max(W(tau)) via its saddle form.

    lambda_max(W) = max_rho Tr[rho W], and tau -> Tr[rho W(tau)] is convex,
    so the value equals max_rho g(rho) with g(rho) = min_tau Tr[rho W(tau)].
    g is maximised by exponentiated-gradient ascent using the Danskin
    gradient W(tau*(rho)); the inner problem is smooth and solved by mirror
    descent warm-started from the previous minimiser. Every inner minimiser
    tau also gives the primal upper bound lambda_max(W(tau)).
    """
    basis_in = gell_mann_basis(d_out)
    tau = np.eye(d_out, dtype=complex) / d_out if tau0 is None else tau0

    def inner(rho, start):
        res = mirror_descent(
            lambda t: float(np.trace(rho @ w_of(t)).real), start, basis_in, max_iter=500, tol=1e-15, window=3
        )
        return res.value, res.x

    def upper(t):
        return float(np.linalg.eigvalsh(w_of(t))[-1])

    rho = np.eye(d_in, dtype=complex) / d_in
    log_rho = np.zeros((d_in, d_in), dtype=complex)
    g, tau = inner(rho, tau)
    best_upper, best_tau = upper(tau), tau
    eta = 1.0
    n = 0
    for n in range(1, max_outer + 1):
        grad = w_of(tau)
        if diagonal:
            grad = np.diag(np.diag(grad))
        for _ in range(40):
            trial_log = log_rho + eta * grad
            trial = _expm_normalised(trial_log)
            g_new, tau_new = inner(trial, tau)
            if g_new >= g:
                break
            eta *= 0.5
        else:
            break
        gain = g_new - g
        log_rho, rho, g, tau = trial_log, trial, g_new, tau_new
        eta = min(eta * 1.5, 1e4)
        u = upper(tau)
        if u < best_upper:
            best_upper, best_tau = u, tau
        if best_upper - g <= gap_tol or gain < 1e-15:
            break
    return g, best_upper, best_tau, rho, {"outer_iter": n}


def _expm_normalised(h):
    w, v = np.linalg.eigh(hermitize(h))
    e = np.exp(w - w.max())
    return (v * (e / e.sum())) @ v.conj().T


def bs_channel_umlaut(ch, opts=None, t_final=1e-3):
    """Geometric umlaut information of a channel.

    Generic channels: min over sigma of the largest eigenvalue of
    W(sigma) = Tr_B[(1 (x) sigma) log((1 (x) sigma^1/2) J^-1 (1 (x) sigma^1/2))].
    cq channels: min_sigma max_x D_BS(sigma||rho_x), i.e. the same problem
    with W diagonal. The primal is attacked by annealed log-sum-exp smoothing
    of the nonsmooth maximum; a saddle-point ascent over inputs supplies a
    lower certificate and a second primal candidate. The reported value is
    the best primal (upper) value; ``diagnostics["dual_lower"]`` and
    ``diagnostics["gap"]`` record the certificate.
    """
    if not channel_finiteness_check(ch):
        return ChannelUmlautResult(math.inf, None, None, {"finite": False})
    if ch.kind == "cq":
        k = common_support(ch.states)
        w_of = _bs_w_cq(ch.states, k)
        d_in, diagonal = len(ch.states), True
    else:
        q = np.eye(ch.choi.shape[0]) - support_projector(ch.choi)
        k = kernel_basis(hermitize(partial_trace(q, ch.dims, "B")), SUPP_TOL)
        w_of = _bs_w_generic(ch, k)
        d_in, diagonal = ch.d_in, False
    dim = k.shape[1]
    if dim == 1:
        tau = np.eye(1, dtype=complex)
        value = float(np.linalg.eigvalsh(w_of(tau))[-1])
        return ChannelUmlautResult(value, None, hermitize(k @ k.conj().T), {"n_iter": 0, "gap": 0.0})

    def pieces(tau):
        return np.linalg.eigvalsh(w_of(tau))

    n_starts = opts.n_starts if opts and opts.n_starts else 5
    value, tau, diag = anneal_minimax(pieces, dim, opts, t_final=t_final, n_starts=n_starts)
    lower, upper, tau_dual, rho, dual_diag = saddle_dual(w_of, dim, d_in, diagonal, tau0=tau)
    if upper < value:
        value, tau = upper, tau_dual
    diag = dict(diag, dual_lower=lower, gap=value - lower, input_state=rho, **dual_diag)
    return ChannelUmlautResult(value, rho, hermitize(k @ tau @ k.conj().T), diag)
