"""JSON and CSV formats for kernels, measures, models and reports.

Floats are written with 17 significant digits so every double round-trips
exactly.  Parsers reject NaN and infinities.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .conditions import ConditionReport
from .decomposition import ErgodicDecomposition
from .economy import EconomyModel, TraceChain
from .errors import InvalidInputError
from .kernel import MarkovKernel, Observable, SignedMeasure, StateSpace
from .spectral import SpectralSplit


def _reject_constant(name):
    raise InvalidInputError(f"non-finite number {name} in input")


def loads(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"invalid JSON: {exc}") from None


def load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None
    return loads(text)


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot encode non-finite float {x}")
    s = format(x, ".17g")
    if s == "-0":
        s = "0"
    return s


def dumps(obj, indent: int = 2) -> str:
    """Serialize plain data to JSON with 17-significant-digit floats."""
    out = []

    def emit(o, level):
        pad = " " * (indent * level)
        inner = " " * (indent * (level + 1))
        if isinstance(o, dict):
            if not o:
                out.append("{}")
                return
            out.append("{\n")
            items = list(o.items())
            for i, (k, v) in enumerate(items):
                out.append(inner + json.dumps(str(k)) + ": ")
                emit(v, level + 1)
                out.append(",\n" if i < len(items) - 1 else "\n")
            out.append(pad + "}")
        elif isinstance(o, (list, tuple)):
            if not o:
                out.append("[]")
                return
            if all(not isinstance(v, (dict, list, tuple)) for v in o):
                out.append("[" + ", ".join(_scalar(v) for v in o) + "]")
                return
            out.append("[\n")
            for i, v in enumerate(o):
                out.append(inner)
                emit(v, level + 1)
                out.append(",\n" if i < len(o) - 1 else "\n")
            out.append(pad + "]")
        else:
            out.append(_scalar(o))

    emit(to_jsonable(obj), 0)
    return "".join(out) + "\n"


def _scalar(v) -> str:
    if v is None or isinstance(v, (bool, str)):
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _fmt_float(v)
    raise TypeError(f"unsupported value {v!r}")


def to_jsonable(obj):
    """Convert package objects and numpy values into plain JSON data."""
    if isinstance(obj, (str, bool)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        # infinite hitting times and similar are exported as null
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, MarkovKernel):
        return kernel_to_dict(obj)
    if isinstance(obj, SignedMeasure):
        return vector_to_dict(obj.space, obj.weights)
    if isinstance(obj, Observable):
        return vector_to_dict(obj.space, obj.values)
    if isinstance(obj, ConditionReport):
        return report_to_dict(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- kernels, measures, observables -----------------------------------------

def _float_matrix(rows, what):
    try:
        a = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{what} must be a numeric array") from None
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{what} contains non-finite values")
    return a


def _require(d, *keys):
    if not isinstance(d, dict):
        raise InvalidInputError("expected a JSON object")
    missing = [k for k in keys if k not in d]
    if missing:
        raise InvalidInputError(f"missing field(s) {missing}")


def kernel_from_dict(d, renormalize: bool = False) -> MarkovKernel:
    _require(d, "states", "rows")
    rows = _float_matrix(d["rows"], "rows")
    states = d["states"]
    if rows.ndim != 2 or rows.shape != (len(states), len(states)):
        raise InvalidInputError(f"rows must be {len(states)}x{len(states)} to match states")
    return MarkovKernel.from_rows(rows, labels=states, renormalize=renormalize)


def kernel_to_dict(k: MarkovKernel) -> dict:
    return {"states": list(k.space.labels), "rows": k.rows.tolist()}


def _vector_from_dict(d, space: StateSpace | None):
    _require(d, "states", "weights")
    w = _float_matrix(d["weights"], "weights")
    if w.ndim != 1 or len(w) != len(d["states"]):
        raise InvalidInputError("weights must match the states list in length")
    own = StateSpace(tuple(d["states"]))
    if space is None:
        return own, w
    if set(own.labels) != set(space.labels) or len(own) != len(space):
        raise InvalidInputError("vector states do not match the kernel states")
    # reorder into the kernel's state order
    out = np.empty(len(space))
    for lab, v in zip(own.labels, w):
        out[space.index(lab)] = v
    return space, out


def measure_from_dict(d, space: StateSpace | None = None) -> SignedMeasure:
    return SignedMeasure(*_vector_from_dict(d, space))


def observable_from_dict(d, space: StateSpace | None = None) -> Observable:
    return Observable(*_vector_from_dict(d, space))


def vector_to_dict(space: StateSpace, v) -> dict:
    v = np.asarray(v)
    if np.iscomplexobj(v):
        if np.abs(v.imag).max() > 1e-10:
            raise ValueError("cannot export a complex vector")
        v = v.real
    return {"states": list(space.labels), "weights": v.tolist()}


# -- economy models -----------------------------------------------------------

def model_from_dict(d) -> EconomyModel:
    _require(d, "exo_states", "endo_states", "q", "law")
    exo = StateSpace(tuple(d["exo_states"]))
    endo = StateSpace(tuple(d["endo_states"]))
    q = MarkovKernel(exo, _float_matrix(d["q"], "q"))
    if not isinstance(d["law"], dict):
        raise InvalidInputError("law must be an object mapping 'state|shock' to a state")
    law = {}
    for key, nxt in d["law"].items():
        if "|" not in key:
            raise InvalidInputError(f"law key {key!r} must look like 'e|d|shock'")
        x, e = key.rsplit("|", 1)
        law[(x, e)] = str(nxt)
    return EconomyModel(exo, endo, q, law)


def model_to_dict(m: EconomyModel) -> dict:
    return {
        "exo_states": list(m.exo_space.labels),
        "endo_states": list(m.endo_space.labels),
        "q": m.q.rows.tolist(),
        "law": {f"{x}|{e}": v for (x, e), v in m.law.items()},
    }


# -- results ------------------------------------------------------------------

def report_to_dict(r: ConditionReport) -> dict:
    return {
        "condition": r.condition.value,
        "satisfied": bool(r.satisfied),
        "witnesses": to_jsonable(r.witnesses),
        "diagnostics": list(r.diagnostics),
    }


def decomposition_to_dict(d: ErgodicDecomposition) -> dict:
    return {
        "states": list(d.kernel.space.labels),
        "classes": d.class_labels(),
        "transient": d.transient_labels(),
        "invariant_measures": [nu.weights.tolist() for nu in d.invariant_measures],
        "eigenfunctions": [y.values.tolist() for y in d.eigenfunctions],
        "limit_kernel": d.limit_kernel.rows.tolist(),
    }


def split_to_dict(s: SpectralSplit) -> dict:
    return {
        "states": list(s.kernel.space.labels),
        "eigenvalues": [[z.real, z.imag] for z in map(complex, s.peripheral_eigenvalues)],
        "multiplicities": list(s.multiplicities),
        "projections": [T.real.tolist() for T in s.projections],
        "projections_imag": [T.imag.tolist() for T in s.projections],
        "residual": s.residual.real.tolist(),
        "residual_imag": s.residual.imag.tolist(),
        "decay_rate": s.decay_rate,
        "decay_constant": s.decay_constant,
        "epsilon": s.epsilon if math.isfinite(s.epsilon) else None,
    }


def trace_to_dict(t: TraceChain) -> dict:
    out = kernel_to_dict(t.kernel_K)
    out["base_states"] = list(t.base.space.labels)
    return out


# -- writing --------------------------------------------------------------------

def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
