"""JSON encodings for matrices, class specs, tuples, witnesses and Thompson data.

Matrices: {"n": n, "group": "U" | "SU", "re": rows, "im": rows}.
Class specs: {"n": n, "group": ..., "phases": [...]}.
Tuples: {"g", "l", "pairs": [[A, B], ...], "classes": [C, ...], "specs": [...]}.
Parse errors name the JSON path of the offending field.
"""

import hashlib
import json

import numpy as np

from .errors import ValidationError
from .liecore import ClassSpec, check_unitary

SCHEMA_VERSION = "1"


class SchemaError(ValidationError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


def _require(obj, key, path):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing field")
    return obj[key]


def _rows(data, n, path):
    if not isinstance(data, list) or len(data) != n:
        raise SchemaError(path, f"expected {n} rows")
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"{path}[{i}]", f"row length must be {n}")
        for j, v in enumerate(row):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise SchemaError(f"{path}[{i}][{j}]", "expected a number")
    return np.array(data, float)


# -- matrices -----------------------------------------------------------------------

def matrix_to_json(u, group="U"):
    u = np.asarray(u, complex)
    return {"n": int(u.shape[0]), "group": group, "re": u.real.tolist(), "im": u.imag.tolist()}


def matrix_from_json(obj, path="$", unitary=True):
    n = _require(obj, "n", path)
    if not isinstance(n, int) or n < 1:
        raise SchemaError(f"{path}.n", "expected a positive integer")
    group = obj.get("group", "U")
    if group not in ("U", "SU"):
        raise SchemaError(f"{path}.group", f"unknown group {group!r}")
    re = _rows(_require(obj, "re", path), n, f"{path}.re")
    im = _rows(_require(obj, "im", path), n, f"{path}.im")
    u = re + 1j * im
    if unitary:
        try:
            check_unitary(u, group)
        except ValidationError as exc:
            raise SchemaError(path, str(exc)) from None
    return u


# -- class specs ----------------------------------------------------------------------

def spec_to_json(s):
    return {"n": s.n, "group": s.group, "phases": list(s.phases)}


def spec_from_json(obj, path="$"):
    ph = _require(obj, "phases", path)
    if not isinstance(ph, list) or not ph:
        raise SchemaError(f"{path}.phases", "expected a non-empty list")
    n = obj.get("n", len(ph))
    if n != len(ph):
        raise SchemaError(f"{path}.phases", f"expected {n} phases")
    try:
        return ClassSpec(tuple(float(p) for p in ph), obj.get("group", "U"))
    except (ValidationError, TypeError, ValueError) as exc:
        raise SchemaError(path, str(exc)) from None


def specs_from_json(obj, path="$"):
    """A list of specs, or an object holding one under "classes"."""
    if isinstance(obj, dict):
        obj = _require(obj, "classes", path)
        path = f"{path}.classes"
    if not isinstance(obj, list):
        raise SchemaError(path, "expected a list of class specs")
    return [spec_from_json(o, f"{path}[{i}]") for i, o in enumerate(obj)]


# -- tuples and witnesses ----------------------------------------------------------------

def tuple_to_json(x):
    return {"g": x.g, "l": x.l,
            "pairs": [[matrix_to_json(a, x.group), matrix_to_json(b, x.group)] for a, b in x.pairs],
            "classes": [matrix_to_json(c, x.group) for c in x.classes],
            "specs": [spec_to_json(s) for s in x.specs]}


def tuple_from_json(obj, path="$"):
    from .qham import SurfaceTuple

    g = _require(obj, "g", path)
    l = _require(obj, "l", path)
    pairs_raw = _require(obj, "pairs", path)
    classes_raw = _require(obj, "classes", path)
    if not isinstance(pairs_raw, list) or len(pairs_raw) != g:
        raise SchemaError(f"{path}.pairs", f"expected {g} pairs")
    if not isinstance(classes_raw, list) or len(classes_raw) != l:
        raise SchemaError(f"{path}.classes", f"expected {l} class elements")
    pairs = []
    for i, pr in enumerate(pairs_raw):
        if not isinstance(pr, list) or len(pr) != 2:
            raise SchemaError(f"{path}.pairs[{i}]", "expected [A, B]")
        pairs.append((matrix_from_json(pr[0], f"{path}.pairs[{i}][0]"),
                      matrix_from_json(pr[1], f"{path}.pairs[{i}][1]")))
    classes = [matrix_from_json(c, f"{path}.classes[{j}]") for j, c in enumerate(classes_raw)]
    groups = {m.get("group", "U") for pr in pairs_raw for m in pr} | \
             {c.get("group", "U") for c in classes_raw}
    group = "SU" if groups == {"SU"} else "U"
    specs = obj.get("specs")
    if specs is None:
        specs = [ClassSpec.of(c, group) for c in classes]
    else:
        specs = specs_from_json(specs, f"{path}.specs")
    try:
        return SurfaceTuple(g, l, tuple(pairs), tuple(classes), tuple(specs), group)
    except ValidationError as exc:
        raise SchemaError(path, str(exc)) from None


def witness_to_json(w):
    return {"vs": [matrix_to_json(v) for v in w.vs], "ws": [matrix_to_json(v) for v in w.ws],
            "phi": matrix_to_json(w.phi)}


def witness_from_json(obj, path="$"):
    from .decomp import Witness

    vs = [matrix_from_json(v, f"{path}.vs[{i}]") for i, v in enumerate(_require(obj, "vs", path))]
    ws = [matrix_from_json(v, f"{path}.ws[{i}]") for i, v in enumerate(_require(obj, "ws", path))]
    return Witness(tuple(vs), tuple(ws), matrix_from_json(_require(obj, "phi", path), f"{path}.phi"))


# -- Thompson ------------------------------------------------------------------------------

def instance_from_json(obj, path="$"):
    from .thompson import ThompsonInstance

    lam = _require(obj, "lambdas", path)
    if not isinstance(lam, list) or not lam:
        raise SchemaError(f"{path}.lambdas", "expected a non-empty list")
    n = obj.get("n", len(lam[0]) if isinstance(lam[0], list) else None)
    for j, row in enumerate(lam):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"{path}.lambdas[{j}]", f"expected {n} numbers")
    try:
        return ThompsonInstance.from_lambdas(lam, obj.get("group"))
    except ValidationError as exc:
        raise SchemaError(path, str(exc)) from None


def instance_to_json(inst):
    return {"n": inst.n, "group": inst.spectra[0].group,
            "lambdas": [list(s.phases) for s in inst.spectra]}


def matrices_from_json(obj, key, path="$"):
    items = _require(obj, key, path) if isinstance(obj, dict) else obj
    if not isinstance(items, list) or not items:
        raise SchemaError(f"{path}.{key}", "expected a non-empty list of matrices")
    return [matrix_from_json(m, f"{path}.{key}[{i}]") for i, m in enumerate(items)]


# -- files -------------------------------------------------------------------------------------

def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"invalid JSON: {exc}") from None


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def file_digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()
