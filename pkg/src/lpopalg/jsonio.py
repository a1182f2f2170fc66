"""JSON wire format shared by every module and the CLI.

* complex number -> ``[re, im]``; a bare real number is also accepted on input
* WeightedSpace  -> ``{"weights": [...]}``
* Operator       -> ``{"rows": [[...], ...]}`` plus optional ``"weights"``
  (square operators) or ``"domain_weights"`` / ``"codomain_weights"``
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .errors import ValidationError
from .lpcore import Operator, Vec, WeightedSpace


def _clean(x: float) -> float:
    x = float(x)
    return 0.0 if x == 0 else x  # drop negative zero so output is byte-stable


def encode_complex(z) -> list:
    z = complex(z)
    return [_clean(z.real), _clean(z.imag)]


def decode_complex(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2 and all(isinstance(v, (int, float)) for v in obj):
        return complex(obj[0], obj[1])
    raise ValidationError(f"not a complex number: {obj!r}")


def encode_complex_array(a) -> list:
    a = np.asarray(a)
    if a.ndim == 0:
        return encode_complex(a)
    return [encode_complex_array(row) for row in a]


def decode_complex_array(obj, ndim: int | None = None) -> np.ndarray:
    """Decode nested lists of complex entries.

    With ``ndim`` given, exactly that many list levels are read as array
    axes, so a bare-real row such as ``[0, 1]`` is never mistaken for one
    complex number. Without it, a two-number list is read as ``[re, im]``.
    """
    if ndim is not None:

        def walk_depth(o, depth):
            if depth == 0:
                return decode_complex(o)
            if not isinstance(o, (list, tuple)):
                raise ValidationError(f"expected a list at depth {ndim - depth}, got {o!r}")
            return [walk_depth(v, depth - 1) for v in o]

        return np.array(walk_depth(obj, ndim), dtype=complex)

    def walk(o):
        if isinstance(o, (int, float)) or (
            isinstance(o, (list, tuple)) and len(o) == 2 and all(isinstance(v, (int, float)) for v in o)
        ):
            return decode_complex(o)
        if isinstance(o, (list, tuple)):
            return [walk(v) for v in o]
        raise ValidationError(f"cannot decode {o!r} as complex data")

    return np.array(walk(obj), dtype=complex)


def encode_space(space: WeightedSpace) -> dict:
    return {"weights": [_clean(w) for w in space.weights]}


def decode_space(obj) -> WeightedSpace:
    try:
        return WeightedSpace(np.asarray(obj["weights"], dtype=float))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad weighted space: {obj!r}") from exc


def encode_operator(op: Operator) -> dict:
    out = {"rows": encode_complex_array(op.matrix)}
    if op.domain == op.codomain:
        if not np.all(op.domain.weights == 1):
            out["weights"] = encode_space(op.domain)["weights"]
    else:
        out["domain_weights"] = encode_space(op.domain)["weights"]
        out["codomain_weights"] = encode_space(op.codomain)["weights"]
    return out


def decode_operator(obj) -> Operator:
    if not isinstance(obj, dict) or "rows" not in obj:
        raise ValidationError('operator JSON must be an object with a "rows" key')
    rows = obj["rows"]
    if not isinstance(rows, list):
        raise ValidationError("operator rows must be a list of rows")
    if len(rows) == 0:
        m = np.zeros((0, 0), dtype=complex)
    else:
        if len({len(r) if isinstance(r, list) else -1 for r in rows}) != 1:
            raise ValidationError("operator rows must form a rectangular matrix")
        m = decode_complex_array(rows, ndim=2)
    if "weights" in obj:
        sp = decode_space({"weights": obj["weights"]})
        return Operator(m, sp, sp)
    dom = decode_space({"weights": obj["domain_weights"]}) if "domain_weights" in obj else None
    cod = decode_space({"weights": obj["codomain_weights"]}) if "codomain_weights" in obj else None
    return Operator(m, dom, cod)


def encode_vec(v: Vec) -> dict:
    return {"weights": encode_space(v.space)["weights"], "entries": encode_complex_array(v.entries)}


def dumps(obj) -> str:
    """Canonical serialization: sorted keys, fixed separators."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False)


def to_jsonable(obj):
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _clean(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_complex_array(obj)
        return to_jsonable(obj.tolist())
    if isinstance(obj, Operator):
        return encode_operator(obj)
    if isinstance(obj, Vec):
        return encode_vec(obj)
    if isinstance(obj, WeightedSpace):
        return encode_space(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def digest(obj) -> str:
    return hashlib.sha256(json.dumps(to_jsonable(obj), sort_keys=True).encode()).hexdigest()
