"""Command-line front end.

Each command prints one JSON line
``{"quantity", "value", "unit", "optimizer"?, "diagnostics"}``; ``sweep``
writes a CSV file instead. Exit codes: 0 success, 2 bad document or
arguments, 3 numerical invariant violated, 4 non-convergence, 5 size guard.
"""

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

import numpy as np

from . import channel as chn
from . import coding, divergence, gaussian, state
from ._config import to_unit
from .errors import ConvergenceError, DocumentError, InvariantError, UmlautError
from .io import encode_matrix, load_document
from .optim import OptimizerOptions

# --- helpers ------------------------------------------------------------------


def _resolve(path):
    """Local path, falling back to the documents shipped with the package."""
    if os.path.exists(path):
        return path
    shipped = resources.files("umlaut") / "data" / os.path.basename(path)
    if shipped.is_file():
        return str(shipped)
    return path


def _load(path, *kinds):
    env = load_document(_resolve(path))
    if kinds and env.kind not in kinds:
        raise DocumentError(f"{path}: expected a document of kind {' or '.join(kinds)}, got {env.kind!r}")
    return env.obj


def _cq_states(path):
    obj = _load(path, "cq_channel", "channel")
    if obj.kind != "cq":
        raise DocumentError(f"{path}: channel has no cq structure")
    return list(obj.states)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if x.ndim == 2:
            return encode_matrix(x)
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _opts(args, **defaults):
    base = OptimizerOptions(**defaults)
    if args.seed is not None:
        base.seed = args.seed
    if args.max_iter is not None:
        base.max_iter = args.max_iter
    if args.tol is not None:
        base.tol = args.tol
    return base


def _record(args, quantity, value, optimizer=None, diagnostics=None):
    rec = {"quantity": quantity, "value": to_unit(float(value), args.base), "unit": args.base}
    if optimizer is not None:
        rec["optimizer"] = optimizer
    rec["diagnostics"] = diagnostics or {}
    return rec


def _verify(diag, oracle, value, reference, agree):
    diag["verify"] = {"oracle": oracle, "value": value, "reference": reference, "agree": bool(agree)}


def _parse_floats(text, name):
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise DocumentError(f"--{name}: expected comma-separated numbers") from None


def _parse_P(args, n):
    if args.P is None:
        return np.full(n, 1.0 / n)
    P = np.array(_parse_floats(args.P, "P"))
    if len(P) != n or np.any(P < 0) or abs(P.sum() - 1) > 1e-10:
        raise DocumentError(f"--P: expected {n} non-negative numbers summing to 1")
    return P


# --- commands -----------------------------------------------------------------


def cmd_state_umlaut(args):
    s = _load(args.state, "state")
    res = state.umlaut_information(s)
    diag = dict(res.diagnostics)
    if args.verify and math.isfinite(res.value):
        direct = state.umlaut_information_direct(s, _opts(args, max_iter=5000, tol=1e-12))
        _verify(diag, "mirror-descent", direct.value, res.value, abs(direct.value - res.value) <= 1e-6)
    opt = {"sigma": res.sigma} if res.sigma is not None else None
    return _record(args, "umlaut_information", res.value, opt, diag)


def cmd_state_umlaut_alpha(args):
    s = _load(args.state, "state")
    res = state.petz_umlaut(s, args.alpha)
    diag = dict(res.diagnostics, alpha=args.alpha)
    if args.verify and res.sigma is not None:
        direct = divergence.petz_renyi(np.kron(s.rho_A, res.sigma), s.rho, args.alpha)
        _verify(diag, "petz-divergence-at-optimiser", direct, res.value, abs(direct - res.value) <= 1e-8)
    opt = {"sigma": res.sigma} if res.sigma is not None else None
    return _record(args, "petz_umlaut_information", res.value, opt, diag)


def cmd_state_bs_umlaut(args):
    s = _load(args.state, "state")
    res = state.bs_umlaut_state(s, _opts(args, max_iter=2000, tol=1e-13, window=3))
    diag = dict(res.diagnostics)
    if args.verify:
        u = state.umlaut_value(s)
        _verify(diag, "umegaki-lower-bound", u, res.value, res.value >= u - 1e-8)
    opt = {"sigma": res.sigma} if res.sigma is not None else None
    return _record(args, "bs_umlaut_information", res.value, opt, diag)


def cmd_lautum(args):
    s = _load(args.state, "state")
    value = state.bs_lautum(s) if args.bs else state.lautum(s)
    diag = {}
    if args.verify:
        u = state.umlaut_value(s)
        _verify(diag, "umlaut-lower-bound", u, value, value >= u - 1e-10)
    return _record(args, "bs_lautum_information" if args.bs else "lautum_information", value, None, diag)


def _channel_result(ch, args):
    method = args.method
    if method == "auto":
        method = {"covariant": "covariant", "cq": "cq"}.get(ch.kind, "generic")
    if method == "covariant":
        return method, chn.channel_umlaut_covariant(ch, _opts(args, max_iter=2000, tol=1e-9, window=50))
    if method == "cq":
        if ch.kind != "cq":
            raise InvariantError("channel has no cq structure")
        return method, chn.cq_channel_umlaut(list(ch.states), _opts(args, max_iter=5000, tol=1e-13, window=5))
    return method, chn.channel_umlaut(ch, _opts(args, max_iter=2000, tol=1e-9, window=50))


def _channel_optimizer(res):
    if res.rho is None:
        return None
    opt = {"rho": res.rho, "sigma": res.sigma}
    if res.rho.shape == (2, 2) and abs(res.rho[0, 1]) < 1e-9:
        opt["p"] = float(res.rho[0, 0].real)
    return opt


def cmd_channel_umlaut(args):
    ch = _load(args.channel, "channel", "cq_channel")
    method, res = _channel_result(ch, args)
    diag = dict(res.diagnostics, method=method)
    if args.verify and math.isfinite(res.value):
        if method == "covariant":
            other = chn.channel_umlaut(ch, _opts(args, max_iter=2000, tol=1e-9, window=50))
            _verify(diag, "unrestricted-ascent", other.value, res.value, abs(other.value - res.value) <= 1e-5)
        elif method == "cq":
            dual, _ = chn.cq_dual_umlaut(list(ch.states))
            _verify(diag, "minimax-dual", dual, res.value, abs(dual - res.value) <= 1e-5)
        else:
            vals = res.diagnostics.get("start_values", [res.value])
            _verify(diag, "multi-start-spread", min(vals), res.value, max(vals) - min(vals) <= 1e-4)
    return _record(args, "channel_umlaut_information", res.value, _channel_optimizer(res), diag)


def cmd_cq_umlaut(args):
    states = _cq_states(args.channel)
    res = chn.cq_channel_umlaut(states, _opts(args, max_iter=5000, tol=1e-13, window=5))
    diag = dict(res.diagnostics)
    if args.verify and math.isfinite(res.value):
        dual, _ = chn.cq_dual_umlaut(states)
        _verify(diag, "minimax-dual", dual, res.value, abs(dual - res.value) <= 1e-5)
    opt = None
    if res.rho is not None:
        opt = {"P": np.real(np.diag(res.rho)), "sigma": res.sigma}
    return _record(args, "cq_channel_umlaut_information", res.value, opt, diag)


def cmd_channel_bs_umlaut(args):
    ch = _load(args.channel, "channel", "cq_channel")
    opts = _opts(args, max_iter=300, tol=1e-13, window=3)
    res = chn.bs_channel_umlaut(ch, opts)
    diag = dict(res.diagnostics)
    if args.verify and math.isfinite(res.value):
        _, lower = _channel_result(ch, argparse.Namespace(**{**vars(args), "method": "auto"}))
        _verify(diag, "umegaki-lower-bound", lower.value, res.value, res.value >= lower.value - 1e-5)
    opt = {"sigma": res.sigma} if res.sigma is not None else None
    return _record(args, "bs_channel_umlaut_information", res.value, opt, diag)


def cmd_ell(args):
    states = _cq_states(args.channel)
    P = _parse_P(args, len(states))
    q = None if args.q is None else np.array(_parse_floats(args.q, "q"))
    value = chn.lower_umlaut_ell(states, P, args.k, q)
    diag = {"k": args.k}
    if args.bound:
        diag["convergence_bound"] = chn.ell_convergence_bound(states, P, args.k)
    if args.verify:
        u = chn.cq_umlaut_at(states, P)
        _verify(diag, "cq-closed-form-upper-bound", u, value, value <= u + 1e-9)
    return _record(args, "lower_umlaut_ell", value, None, diag)


def cmd_chernoff(args):
    states = _cq_states(args.channel)
    P = _parse_P(args, len(states))
    value = chn.chernoff_lower_bound(states, P)
    diag = {}
    if args.verify:
        ell = chn.lower_umlaut_ell(states, P, 2)
        _verify(diag, "ell-2-upper-bound", ell, value, value <= ell + 1e-9)
    return _record(args, "chernoff_lower_bound", value, None, diag)


def cmd_two_copy(args):
    ch = _load(args.channel, "channel")
    rho = _load(args.rho, "state").rho
    value = chn.two_copy_lower_bound(ch, rho)
    diag = {}
    if args.verify or args.ratio:
        _, single = _channel_result(ch, argparse.Namespace(**{**vars(args), "method": "auto"}))
        diag["single_copy"] = single.value
        diag["ratio"] = value / single.value if single.value > 0 else math.inf
        if args.verify:
            _verify(diag, "single-copy-ratio", diag["ratio"], 2.0, diag["ratio"] >= 2.0)
    return _record(args, "two_copy_lower_bound", value, None, diag)


def cmd_gaussian(args):
    g = _load(args.state, "gaussian")
    keep = [int(t) for t in args.modes.split(",")]
    um = gaussian.gaussian_umlaut_marginal(g, keep)
    ordinary = gaussian.gaussian_marginal(g, keep)
    diag = {"covariance_difference": float(np.abs(um.covariance - ordinary.covariance).max())}
    if args.verify:
        back = gaussian.covariance_from_hamiltonian(gaussian.hamiltonian_from_covariance(um.covariance))
        err = float(np.abs(back - um.covariance).max())
        _verify(diag, "round-trip", err, 0.0, err <= 1e-9)
    opt = {"mean": um.mean, "hamiltonian": um.hamiltonian, "covariance": um.covariance}
    rec = {"quantity": "gaussian_umlaut_marginal", "value": opt, "unit": None, "diagnostics": diag}
    return rec


def cmd_dh(args):
    rho_state = _load(args.rho, "state")
    rho = rho_state.rho
    sigma = rho if args.sigma is None else _load(args.sigma, "state").rho
    if rho.shape != sigma.shape:
        raise InvariantError("rho and sigma have different dimensions")
    value = divergence.hypothesis_testing_divergence(rho, sigma, args.eps)
    diag = {"eps": args.eps}
    if args.verify and rho.shape[0] <= 8:
        sol = coding.hypothesis_testing_sdp(rho, sigma, args.eps)
        ref = math.inf if -sol.primal <= 1e-300 else -math.log(-sol.primal)
        _verify(diag, "sdp-primal", ref, value, abs(ref - value) <= 1e-6 or ref == value)
    return _record(args, "hypothesis_testing_divergence", value, None, diag)


def cmd_ns_meta(args):
    ch = _load(args.channel, "channel", "cq_channel")
    res = coding.ns_error_probability(ch, args.M)
    diag = dict(res.diagnostics, error_probability=res.error, M=args.M)
    if args.verify and ch.dims == (2, 2):
        grid = coding.meta_converse_grid(ch, args.M)
        _verify(diag, "grid-sup-min", grid, res.value, abs(grid - res.value) <= 1e-3)
    if res.status != "optimal":
        raise _NotConverged(_record(args, "ns_meta_converse", res.value, {"rho": res.rho}, diag))
    return _record(args, "ns_meta_converse", res.value, {"rho": res.rho}, diag)


def cmd_sanov(args):
    s = _load(args.state, "state")
    value, diag = coding.sanov_finite_n_estimate(s, args.eps, args.n, _opts(args, max_iter=200, tol=1e-9, window=3))
    diag = dict(diag, n=args.n, eps=args.eps)
    if args.verify:
        u = state.umlaut_value(s)
        upper = u + (1 + u) / (args.n * (1 - args.eps)) + 0.1
        _verify(diag, "umlaut-bracket", u, value, u - 0.2 <= value <= upper)
    return _record(args, "sanov_finite_n_estimate", value, None, diag)


# --- sweep --------------------------------------------------------------------


def _parse_range(text):
    try:
        start, stop, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise DocumentError("--range: expected start:stop:step") from None
    if step <= 0 or stop < start:
        raise DocumentError("--range: need step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def _sweep_point(job):
    quantity, path, value = job
    env = load_document(path)
    obj = env.obj
    if quantity == "restricted-umlaut":
        if obj.d_in != 2:
            raise InvariantError("restricted-umlaut needs a qubit-input channel")
        return chn.restricted_umlaut(obj, value)
    if quantity == "cq-umlaut-at":
        if len(obj.states) != 2:
            raise InvariantError("cq-umlaut-at sweeps need a two-letter alphabet")
        return chn.cq_umlaut_at(list(obj.states), [value, 1 - value])
    if quantity == "ns-error":
        return coding.ns_error_probability(obj, int(round(value))).error
    raise DocumentError(f"unknown sweep quantity {quantity!r}")


_SWEEP_UNITLESS = {"ns-error"}


def cmd_sweep(args):
    if args.out is None:
        raise DocumentError("--out is required for sweep")
    path = _resolve(args.channel)
    load_document(path)
    grid = _parse_range(args.range)
    jobs = [(args.quantity, path, v) for v in grid]
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            values = list(pool.map(_sweep_point, jobs))
    else:
        values = [_sweep_point(j) for j in jobs]
    convert = args.quantity not in _SWEEP_UNITLESS
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([args.param, args.quantity])
        for p, v in zip(grid, values):
            v = to_unit(v, args.base) if convert else v
            w.writerow([repr(p), "inf" if math.isinf(v) else repr(float(v))])
    best = int(np.argmax(values))
    diag = {"rows": len(grid), "out": args.out, "argmax": grid[best]}
    rec = _record(args, f"sweep:{args.quantity}", values[best], None, diag)
    if not convert:
        rec["value"], rec["unit"] = float(values[best]), None
    return rec


# --- parser -------------------------------------------------------------------


class _NotConverged(Exception):
    def __init__(self, record):
        super().__init__("non-convergence")
        self.record = record


def _common(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="seed for multi-start optimisers")
    parser.add_argument("--tol", type=float, default=default, help="optimiser stopping tolerance")
    parser.add_argument("--max-iter", type=int, default=default, dest="max_iter")
    parser.add_argument(
        "--base", choices=("nats", "bits"), default=argparse.SUPPRESS if suppress else "nats", help="output unit"
    )
    parser.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS if suppress else False)
    parser.add_argument("--verify", action="store_true", default=argparse.SUPPRESS if suppress else False)
    parser.add_argument("--jobs", type=int, default=argparse.SUPPRESS if suppress else 1)


def build_parser():
    parser = argparse.ArgumentParser(prog="umlaut", description="Quantum umlaut information toolkit")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _common(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("state-umlaut", cmd_state_umlaut, "closed-form umlaut information of a bipartite state")
    p.add_argument("state")
    p = add("state-umlaut-alpha", cmd_state_umlaut_alpha, "Petz-Renyi alpha-umlaut information")
    p.add_argument("state")
    p.add_argument("--alpha", type=float, required=True)
    p = add("state-bs-umlaut", cmd_state_bs_umlaut, "geometric (Belavkin-Staszewski) umlaut information")
    p.add_argument("state")
    p = add("lautum", cmd_lautum, "lautum information D(rho_A x rho_B || rho_AB)")
    p.add_argument("state")
    p.add_argument("--bs", action="store_true", help="use the Belavkin-Staszewski divergence")
    p = add("channel-umlaut", cmd_channel_umlaut, "channel umlaut information")
    p.add_argument("channel")
    p.add_argument("--method", choices=("auto", "generic", "covariant", "cq"), default="auto")
    p = add("cq-umlaut", cmd_cq_umlaut, "umlaut information of a classical-quantum channel")
    p.add_argument("channel")
    p = add("channel-bs-umlaut", cmd_channel_bs_umlaut, "geometric channel umlaut information")
    p.add_argument("channel")
    p = add("ell", cmd_ell, "(k, q)-lower umlaut information of a cq channel")
    p.add_argument("channel")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--P", help="input distribution, comma separated (default uniform)")
    p.add_argument("--q", help="weights q, comma separated (default uniform)")
    p.add_argument("--bound", action="store_true", help="also report the convergence bound")
    p = add("chernoff", cmd_chernoff, "Chernoff-type lower bound of a cq channel")
    p.add_argument("channel")
    p.add_argument("--P")
    p = add("two-copy", cmd_two_copy, "two-copy lower bound U(N x N) >= U at a given input")
    p.add_argument("channel")
    p.add_argument("--rho", required=True, help="state document holding the two-copy input")
    p.add_argument("--ratio", action="store_true", help="also report the ratio to the single-copy value")
    p = add("gaussian-umlaut-marginal", cmd_gaussian, "umlaut-marginal of a Gaussian state")
    p.add_argument("state")
    p.add_argument("--modes", required=True, help="modes of B, comma separated")
    p = add("dh", cmd_dh, "hypothesis-testing divergence D_H^eps(rho || sigma)")
    p.add_argument("rho")
    p.add_argument("sigma", nargs="?", help="defaults to rho")
    p.add_argument("--eps", type=float, required=True)
    p = add("ns-meta", cmd_ns_meta, "non-signalling meta-converse: -log error for M messages")
    p.add_argument("channel")
    p.add_argument("--M", type=int, required=True)
    p = add("sanov-n", cmd_sanov, "finite-n Sanov estimate with i.i.d. alternatives")
    p.add_argument("state")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p = add("sweep", cmd_sweep, "parameter sweep written as CSV")
    p.add_argument("--param", default="p")
    p.add_argument("--range", required=True, help="start:stop:step, stop inclusive")
    p.add_argument("--channel", required=True)
    p.add_argument("--quantity", choices=("restricted-umlaut", "cq-umlaut-at", "ns-error"), required=True)
    p.add_argument("--out")
    return parser


def _emit(record, pretty, stream):
    text = json.dumps(_jsonable(record), indent=2 if pretty else None, sort_keys=False)
    stream.write(text + "\n")


def _has_unconverged(record):
    diag = record.get("diagnostics", {})
    return diag.get("converged") is False


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        record = args.func(args)
    except _NotConverged as exc:
        _emit(exc.record, args.pretty, stdout)
        return ConvergenceError.exit_code
    except UmlautError as exc:
        stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except ValueError as exc:
        stderr.write(f"error: {exc}\n")
        return DocumentError.exit_code
    _emit(record, args.pretty, stdout)
    if _has_unconverged(record):
        return ConvergenceError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
