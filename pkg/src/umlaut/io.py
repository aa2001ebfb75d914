"""JSON documents for states, channels, cq channels and Gaussian states.

Every document is an envelope ``{"schema_version": "1", "kind": ..., "payload": ...}``.
Matrices are row-major nested lists; an entry is a real number or a pair
``[re, im]``. Schema problems raise :class:`DocumentError`; numerical
invariant failures (non-PSD, non-Hermitian, ...) raise
:class:`InvariantError`, both prefixed with the offending field path.
"""

import json
from dataclasses import dataclass

import numpy as np

from .channel import Channel, choi_from_kraus, cq_channel
from .errors import DocumentError, InvariantError
from .gaussian import GaussianState
from .state import BipartiteState

SCHEMA_VERSION = "1"
KINDS = ("state", "channel", "cq_channel", "gaussian")


@dataclass
class DocumentEnvelope:
    schema_version: str
    kind: str
    payload: dict
    obj: object = None


def _require(mapping, key, path, types=None):
    if not isinstance(mapping, dict):
        raise DocumentError(f"{path}: expected an object")
    if key not in mapping:
        raise DocumentError(f"{path}.{key}: required field missing")
    value = mapping[key]
    if types is not None and (not isinstance(value, types) or isinstance(value, bool)):
        raise DocumentError(f"{path}.{key}: expected {_type_name(types)}")
    return value


def _type_name(types):
    if isinstance(types, tuple):
        return " or ".join(t.__name__ for t in types)
    return types.__name__


def _number(x, path):
    if isinstance(x, bool):
        raise DocumentError(f"{path}: expected a number")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise DocumentError(f"{path}: expected a number or a [re, im] pair")


def parse_matrix(data, path, square=True):
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise DocumentError(f"{path}: expected a non-empty list of rows")
    width = len(data[0])
    rows = []
    for i, row in enumerate(data):
        if len(row) != width:
            raise DocumentError(f"{path}[{i}]: row has length {len(row)}, expected {width}")
        rows.append([_number(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    m = np.array(rows, dtype=complex)
    if square and m.shape[0] != m.shape[1]:
        raise DocumentError(f"{path}: matrix must be square, got {m.shape}")
    return m


def encode_matrix(m):
    """Row-major nested list; entries with zero imaginary part stay plain numbers."""
    m = np.asarray(m)
    out = []
    for row in m:
        enc = []
        for x in row:
            x = complex(x)
            enc.append(x.real if x.imag == 0 else [x.real, x.imag])
        out.append(enc)
    return out


def _invariant(path, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InvariantError as exc:
        raise InvariantError(f"{path}: {exc}") from None


def _count(mapping, key, path):
    v = _require(mapping, key, path, int)
    if v < 1:
        raise DocumentError(f"{path}.{key}: must be a positive integer")
    return v


def _parse_state(p):
    dims = _require(p, "dims", "payload", list)
    if len(dims) != 2 or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in dims):
        raise DocumentError("payload.dims: expected two positive integers")
    m = parse_matrix(_require(p, "matrix", "payload"), "payload.matrix")
    return _invariant("payload.matrix", BipartiteState, m, tuple(dims))


def _parse_channel(p):
    d_in = _count(p, "d_in", "payload")
    d_out = _count(p, "d_out", "payload")
    rep = _require(p, "repr", "payload", str)
    data = _require(p, "data", "payload")
    structure = p.get("structure", {"type": "generic"})
    stype = _require(structure, "type", "payload.structure", str)
    extra = {}
    if stype == "covariant":
        gin = _require(structure, "group_in", "payload.structure", list)
        gout = _require(structure, "group_out", "payload.structure", list)
        extra["group_in"] = tuple(parse_matrix(u, f"payload.structure.group_in[{i}]") for i, u in enumerate(gin))
        extra["group_out"] = tuple(parse_matrix(v, f"payload.structure.group_out[{i}]") for i, v in enumerate(gout))
    elif stype == "cq":
        states = _require(structure, "states", "payload.structure", list)
        extra["states"] = tuple(parse_matrix(s, f"payload.structure.states[{i}]") for i, s in enumerate(states))
    elif stype != "generic":
        raise DocumentError(f"payload.structure.type: unknown structure {stype!r}")
    if rep == "choi":
        choi = parse_matrix(data, "payload.data")
        ch = _invariant("payload.data", Channel, choi, d_in, d_out, stype, **extra)
    elif rep == "kraus":
        if not isinstance(data, list) or not data:
            raise DocumentError("payload.data: expected a non-empty list of Kraus operators")
        kraus = [parse_matrix(k, f"payload.data[{i}]", square=False) for i, k in enumerate(data)]
        for i, k in enumerate(kraus):
            if k.shape != (d_out, d_in):
                raise DocumentError(f"payload.data[{i}]: Kraus operator must be {d_out}x{d_in}")
        ch = _invariant("payload.data", choi_from_kraus, kraus, stype, **extra)
    else:
        raise DocumentError(f"payload.repr: expected 'choi' or 'kraus', got {rep!r}")
    return ch


def _parse_cq(p):
    states = _require(p, "states", "payload", list)
    if not states:
        raise DocumentError("payload.states: expected at least one state")
    mats = [parse_matrix(s, f"payload.states[{i}]") for i, s in enumerate(states)]
    if len({m.shape for m in mats}) != 1:
        raise DocumentError("payload.states: all states must share one dimension")
    return _invariant("payload.states", cq_channel, mats)


def _parse_gaussian(p):
    modes = _count(p, "modes", "payload")
    mean = p.get("mean", [0.0] * (2 * modes))
    if not isinstance(mean, list) or len(mean) != 2 * modes:
        raise DocumentError(f"payload.mean: expected {2 * modes} real numbers")
    for i, x in enumerate(mean):
        if not isinstance(x, (int, float)) or isinstance(x, bool):
            raise DocumentError(f"payload.mean[{i}]: expected a real number")
    has_h, has_v = "hamiltonian" in p, "covariance" in p
    if has_h == has_v:
        raise DocumentError("payload: exactly one of 'hamiltonian' or 'covariance' is required")
    key = "hamiltonian" if has_h else "covariance"
    m = parse_matrix(p[key], f"payload.{key}")
    if m.shape != (2 * modes, 2 * modes):
        raise DocumentError(f"payload.{key}: expected a {2 * modes}x{2 * modes} matrix")
    if np.abs(m.imag).max() > 0:
        raise DocumentError(f"payload.{key}: entries must be real")
    if has_h:
        return _invariant(f"payload.{key}", GaussianState, m.real, np.array(mean, dtype=float))
    return _invariant(f"payload.{key}", GaussianState.from_covariance, m.real, np.array(mean, dtype=float))


_PARSERS = {"state": _parse_state, "channel": _parse_channel, "cq_channel": _parse_cq, "gaussian": _parse_gaussian}


def parse_document(text):
    """Parse and validate a document; returns a :class:`DocumentEnvelope` with the built object."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentError(f"document is not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise DocumentError("document root must be an object")
    version = _require(doc, "schema_version", "document", str)
    if version != SCHEMA_VERSION:
        raise DocumentError(f"document.schema_version: unsupported version {version!r}")
    kind = _require(doc, "kind", "document", str)
    if kind not in KINDS:
        raise DocumentError(f"document.kind: unknown kind {kind!r}")
    payload = _require(doc, "payload", "document", dict)
    obj = _PARSERS[kind](payload)
    return DocumentEnvelope(version, kind, payload, obj)


def load_document(path):
    try:
        with open(path, "rb") as fh:
            return parse_document(fh.read())
    except OSError as exc:
        raise DocumentError(f"{path}: {exc.strerror}") from None


def _payload_of(kind, obj):
    if kind == "state":
        return {"dims": list(obj.dims), "matrix": encode_matrix(obj.rho)}
    if kind == "channel":
        payload = {"d_in": obj.d_in, "d_out": obj.d_out, "repr": "choi", "data": encode_matrix(obj.choi)}
        if obj.kind == "covariant":
            payload["structure"] = {
                "type": "covariant",
                "group_in": [encode_matrix(u) for u in obj.group_in],
                "group_out": [encode_matrix(v) for v in obj.group_out],
            }
        elif obj.kind == "cq":
            payload["structure"] = {"type": "cq", "states": [encode_matrix(s) for s in obj.states]}
        return payload
    if kind == "cq_channel":
        return {"states": [encode_matrix(s) for s in obj.states]}
    if kind == "gaussian":
        return {
            "modes": obj.modes,
            "mean": [float(x) for x in obj.mean],
            "hamiltonian": [[float(x) for x in row] for row in obj.hamiltonian],
        }
    raise DocumentError(f"unknown kind {kind!r}")


def serialize_document(kind, obj):
    """Canonical JSON text of a document (channels as Choi matrices, Gaussian states by H)."""
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, "payload": _payload_of(kind, obj)}
    return json.dumps(doc, sort_keys=True)


def normalize(text):
    env = parse_document(text)
    return serialize_document(env.kind, env.obj)
