"""Serialisation of forms, planes, reports and grid fields.

JSON floats are written with Python's shortest round-trip repr, so values
read back are bit-identical. Grid files use a text header
``GRID d n1 ... nd h`` followed by row-major values, one per line, printed
with 17 significant digits.
"""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import fields, is_dataclass

import numpy as np

from .forms import Form, OrientedPlane, make_form
from .graphpde import GridField


def to_jsonable(obj):
    """Recursively convert reports, forms, planes and numpy values."""
    if isinstance(obj, Form):
        return form_to_dict(obj)
    if isinstance(obj, OrientedPlane):
        return plane_to_dict(obj)
    if isinstance(obj, GridField):
        return {"shape": list(obj.shape), "h": obj.h,
                "values": obj.values.ravel().tolist()}
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2) + "\n"


# forms and planes ---------------------------------------------------------

def form_to_dict(a: Form) -> dict:
    """``{"n": 7, "k": 3, "terms": [{"idx": [1, 2, 3], "c": 1.0}, ...]}``."""
    return {"n": a.n, "k": a.k,
            "terms": [{"idx": list(idx), "c": float(c)} for idx, c in a.terms()]}


def form_from_dict(d: dict) -> Form:
    return make_form(int(d["n"]), int(d["k"]),
                     [(list(t["idx"]), float(t["c"])) for t in d["terms"]])


def plane_to_dict(P: OrientedPlane) -> dict:
    """``{"n": 8, "k": 4, "basis": [[...], ...]}`` with one row per vector."""
    return {"n": P.ambient_dim, "k": P.dim, "basis": P.basis.tolist()}


def plane_from_dict(d: dict, check: bool = True) -> OrientedPlane:
    P = OrientedPlane(np.asarray(d["basis"], dtype=float), check=check)
    if ("n" in d and int(d["n"]) != P.ambient_dim) or ("k" in d and int(d["k"]) != P.dim):
        raise ValueError("plane record n/k disagree with its basis")
    return P


def load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


# grids --------------------------------------------------------------------

def grid_dumps(f: GridField) -> str:
    if f.ncomp:
        raise ValueError("grid files hold scalar fields")
    head = "GRID {} {} {}\n".format(f.dim, " ".join(str(s) for s in f.shape), "%.17g" % f.h)
    return head + "".join("%.17g\n" % x for x in f.values.ravel())


def grid_loads(text: str) -> GridField:
    lines = text.split("\n")
    head = lines[0].split()
    if not head or head[0] != "GRID":
        raise ValueError("missing GRID header")
    d = int(head[1])
    shape = tuple(int(x) for x in head[2:2 + d])
    if len(head) != 3 + d:
        raise ValueError("malformed GRID header")
    h = float(head[2 + d])
    vals = np.array([float(x) for x in lines[1:] if x.strip()])
    if vals.size != int(np.prod(shape)):
        raise ValueError(f"expected {int(np.prod(shape))} values, found {vals.size}")
    return GridField(vals.reshape(shape), h)


def write_grid(path: str, f: GridField) -> None:
    with open(path, "w") as fh:
        fh.write(grid_dumps(f))


def read_grid(path: str) -> GridField:
    with open(path) as fh:
        return grid_loads(fh.read())


# csv ----------------------------------------------------------------------

def flatten(obj, prefix="") -> list:
    """(dotted key, scalar) pairs for nested JSON-like data."""
    obj = to_jsonable(obj)
    out = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            out += flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            out += flatten(v, f"{prefix}.{i}" if prefix else str(i))
    else:
        out.append((prefix, obj))
    return out


def csv_dumps(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()
