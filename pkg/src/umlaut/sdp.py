"""Small dense semidefinite programs over Hermitian matrix variables.

A problem has PSD Hermitian variable blocks ``X_k`` and maximises
``sum_k Tr[C_k X_k]`` subject to linear matrix constraints of the form

    sum_terms  w * L X_k L^dag   (<= | >= | ==)   rhs .

Problems are translated to the real conic form accepted by cvxopt: each
Hermitian variable is parametrised by its real coordinates and every
Hermitian inequality is embedded as the real symmetric matrix
``[[Re, -Im], [Im, Re]]``.
"""

from dataclasses import dataclass, field

import numpy as np
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers

from .errors import InvariantError, SizeGuardError

MAX_REAL_DIM = 5000


@dataclass
class LinearConstraint:
    """``terms`` is a list of ``(block, L, weight)``; each contributes ``weight * L X_block L^dag``."""

    terms: list
    sense: str
    rhs: np.ndarray

    def __post_init__(self):
        if self.sense not in ("<=", ">=", "=="):
            raise InvariantError(f"unknown constraint sense {self.sense!r}")
        self.rhs = np.atleast_2d(np.asarray(self.rhs, dtype=complex))


@dataclass
class SdpProblem:
    """Maximise sum_k Tr[objective[k] X_k] over PSD Hermitian blocks of sizes ``dims``."""

    dims: list
    objective: list
    constraints: list = field(default_factory=list)

    def validate(self):
        if len(self.dims) != len(self.objective):
            raise InvariantError("one objective operator per variable block is required")
        for d, c in zip(self.dims, self.objective):
            c = np.asarray(c)
            if c.shape != (d, d) or np.abs(c - c.conj().T).max() > 1e-10:
                raise InvariantError("objective operators must be Hermitian and match block sizes")
        for con in self.constraints:
            if np.abs(con.rhs - con.rhs.conj().T).max() > 1e-10:
                raise InvariantError("constraint right-hand sides must be Hermitian")
            for block, lmap, _ in con.terms:
                lmap = np.atleast_2d(lmap)
                if lmap.shape != (con.rhs.shape[0], self.dims[block]):
                    raise InvariantError("constraint map has inconsistent shape")
        total = sum(d * d for d in self.dims)
        if total > MAX_REAL_DIM:
            raise SizeGuardError(f"SDP has real dimension {total} > {MAX_REAL_DIM}")


@dataclass
class SdpSolution:
    primal: float
    dual: float
    variables: list
    gap: float
    status: str
    residual: float


def _herm_basis(n):
    """Real coordinates of an n x n Hermitian matrix: diagonal, then Re/Im of each upper entry."""
    out = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1
        out.append(e)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = e[j, i] = 1
            out.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[i, j], e[j, i] = 1j, -1j
            out.append(e)
    return out


def _coords(h):
    """Coordinates such that h = sum_t coords[t] * basis[t]."""
    n = h.shape[0]
    c = [h[i, i].real for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            c.extend([h[i, j].real, h[i, j].imag])
    return np.array(c)


def _embed(h):
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def _apply_terms(terms, block, x):
    m = None
    for b, lmap, w in terms:
        if b != block:
            continue
        lmap = np.atleast_2d(np.asarray(lmap, dtype=complex))
        term = w * (lmap @ x @ lmap.conj().T)
        m = term if m is None else m + term
    return m


def _independent_rows(a, b, tol=1e-10):
    if a.shape[0] == 0:
        return a, b
    aug = np.hstack([a, b[:, None]])
    keep = []
    basis = np.zeros((0, aug.shape[1]))
    for i, row in enumerate(aug):
        trial = np.vstack([basis, row])
        if np.linalg.matrix_rank(trial[:, :-1], tol=tol) > len(keep):
            keep.append(i)
            basis = trial
        elif np.linalg.matrix_rank(trial, tol=tol) > len(keep):
            raise InvariantError("equality constraints are inconsistent")
    return a[keep], b[keep]


def solve_sdp(problem, max_iter=200, tol=1e-10):
    """Solve ``problem`` with cvxopt's primal-dual interior point method.

    Status is ``"optimal"`` only when the duality gap is at most
    ``1e-6 (1 + |primal|)`` and every constraint residual is at most 1e-7.
    """
    problem.validate()
    bases = [_herm_basis(d) for d in problem.dims]
    offsets = np.cumsum([0] + [len(b) for b in bases])
    nvar = int(offsets[-1])

    c = np.zeros(nvar)
    for k, (basis, cost) in enumerate(zip(bases, problem.objective)):
        cost = np.asarray(cost, dtype=complex)
        for t, e in enumerate(basis):
            c[offsets[k] + t] = -np.trace(cost @ e).real

    gs, hs, eq_rows, eq_rhs = [], [], [], []
    for k, (d, basis) in enumerate(zip(problem.dims, bases)):
        g = np.zeros(((2 * d) ** 2, nvar))
        for t, e in enumerate(basis):
            g[:, offsets[k] + t] = -_embed(e).ravel(order="F")
        gs.append(g)
        hs.append(np.zeros((2 * d, 2 * d)))

    for con in problem.constraints:
        m = con.rhs.shape[0]
        images = np.zeros((nvar, m, m), dtype=complex)
        for k, basis in enumerate(bases):
            for t, e in enumerate(basis):
                img = _apply_terms(con.terms, k, e)
                if img is not None:
                    images[offsets[k] + t] = img
        if con.sense == "==":
            eq_rows.extend(np.array([_coords(images[v]) for v in range(nvar)]).T)
            eq_rhs.extend(_coords(con.rhs))
            continue
        sign = 1.0 if con.sense == "<=" else -1.0
        g = np.zeros(((2 * m) ** 2, nvar))
        for v in range(nvar):
            g[:, v] = sign * _embed(images[v]).ravel(order="F")
        gs.append(g)
        hs.append(sign * _embed(con.rhs))

    a = np.array(eq_rows).reshape(-1, nvar)
    b = np.array(eq_rhs, dtype=float)
    a, b = _independent_rows(a, b)

    opts = {"show_progress": False, "maxiters": max_iter, "abstol": tol, "reltol": tol, "feastol": tol}
    args = {
        "Gs": [cvx_matrix(g) for g in gs],
        "hs": [cvx_matrix(h) for h in hs],
    }
    if a.shape[0]:
        args["A"] = cvx_matrix(a)
        args["b"] = cvx_matrix(b)
    sol = solvers.sdp(cvx_matrix(c), options=opts, **args)
    if sol["x"] is None:
        return SdpSolution(np.nan, np.nan, [], np.inf, "infeasible", np.inf)

    x = np.array(sol["x"]).ravel()
    variables = []
    for k, basis in enumerate(bases):
        coords = x[offsets[k] : offsets[k + 1]]
        variables.append(sum(ct * e for ct, e in zip(coords, basis)))

    primal = float(sum(np.trace(np.asarray(cst) @ xv).real for cst, xv in zip(problem.objective, variables)))
    dual = -float(sol["dual objective"])
    residual = _residual(problem, variables)
    gap = abs(primal - dual)
    if sol["status"] in ("primal infeasible", "dual infeasible"):
        status = "infeasible"
    elif gap <= 1e-6 * (1 + abs(primal)) and residual <= 1e-7:
        status = "optimal"
    else:
        status = "max-iter"
    return SdpSolution(primal, dual, variables, gap, status, residual)


def _residual(problem, variables):
    worst = 0.0
    for x in variables:
        worst = max(worst, -np.linalg.eigvalsh(x)[0])
    for con in problem.constraints:
        lhs = sum(
            (m for m in (_apply_terms(con.terms, k, x) for k, x in enumerate(variables)) if m is not None),
            np.zeros_like(con.rhs),
        )
        diff = lhs - con.rhs
        if con.sense == "==":
            worst = max(worst, np.abs(diff).max())
        else:
            w = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
            worst = max(worst, w[-1] if con.sense == "<=" else -w[0])
    return float(max(worst, 0.0))
