"""JSON wire formats shared by the library and the CLI.

Matrix payload: ``{"dim": n, "data": [[re, im], ...]}`` with exactly n**2
entries in row-major order. Readers reject non-square payloads, NaN/Inf
values and unknown keys (strict parsing catches schema drift early).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Any, Mapping, Sequence

import numpy as np


class FormatError(ValueError):
    """Malformed or out-of-schema JSON payload."""


def check_keys(obj: Mapping[str, Any], required: Sequence[str],
               optional: Sequence[str] = (), where: str = "object") -> None:
    """Reject missing required keys and any unknown key."""
    if not isinstance(obj, Mapping):
        raise FormatError(f"{where}: expected a JSON object, got {type(obj).__name__}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise FormatError(f"{where}: missing keys {missing}")
    allowed = set(required) | set(optional)
    unknown = [k for k in obj if k not in allowed]
    if unknown:
        raise FormatError(f"{where}: unknown keys {unknown}")


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise FormatError(f"matrix payloads must be square, got shape {m.shape}")
    data = [[float(x.real), float(x.imag)] for x in m.reshape(-1)]
    return {"dim": int(m.shape[0]), "data": data}


def matrix_from_json(obj: Mapping[str, Any], where: str = "matrix") -> np.ndarray:
    check_keys(obj, ["dim", "data"], where=where)
    dim = obj["dim"]
    if not isinstance(dim, int) or dim <= 0:
        raise FormatError(f"{where}: dim must be a positive integer, got {dim!r}")
    data = obj["data"]
    if not isinstance(data, list) or len(data) != dim * dim:
        raise FormatError(f"{where}: expected {dim * dim} entries, got {len(data) if isinstance(data, list) else data!r}")
    out = np.empty(dim * dim, dtype=complex)
    for i, entry in enumerate(data):
        if (not isinstance(entry, list)) or len(entry) != 2:
            raise FormatError(f"{where}: entry {i} is not a [re, im] pair")
        re, im = float(entry[0]), float(entry[1])
        if not (math.isfinite(re) and math.isfinite(im)):
            raise FormatError(f"{where}: entry {i} is not finite")
        out[i] = complex(re, im)
    return out.reshape(dim, dim)


def matrices_from_json(items: Any, where: str = "matrices") -> list[np.ndarray]:
    if not isinstance(items, list) or not items:
        raise FormatError(f"{where}: expected a non-empty list of matrix objects")
    return [matrix_from_json(it, where=f"{where}[{i}]") for i, it in enumerate(items)]


def complex_to_json(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def group_to_json(group) -> dict:
    out = {"order": int(group.order), "table": [[int(x) for x in row] for row in group.table]}
    if group.labels is not None:
        out["labels"] = list(group.labels)
    return out


def group_from_json(obj: Mapping[str, Any]):
    from .symmetry import FiniteGroup
    check_keys(obj, ["order", "table"], optional=["labels"], where="group")
    order = obj["order"]
    if not isinstance(order, int) or order <= 0:
        raise FormatError(f"group: order must be a positive integer, got {order!r}")
    table = np.asarray(obj["table"], dtype=int)
    if table.shape != (order, order):
        raise FormatError(f"group: table shape {table.shape} does not match order {order}")
    labels = obj.get("labels")
    if labels is not None and (not isinstance(labels, list) or len(labels) != order):
        raise FormatError("group: labels must list one name per element")
    return FiniteGroup(table, labels=tuple(labels) if labels else None)


def rep_to_json(rep) -> dict:
    return {"group": group_to_json(rep.group),
            "images": [matrix_to_json(w) for w in rep.images]}


def rep_from_json(obj: Mapping[str, Any]):
    from .symmetry import FiniteGroupRep
    check_keys(obj, ["group", "images"], where="representation")
    group = group_from_json(obj["group"])
    images = matrices_from_json(obj["images"], where="representation.images")
    if len(images) != group.order:
        raise FormatError(f"representation: {len(images)} images for group of order {group.order}")
    return FiniteGroupRep(group, images)


def lie_symmetry_to_json(sym) -> dict:
    systems = {}
    for label, gens in sym.systems.items():
        systems[label] = {"dim": int(gens[0].shape[0]),
                          "generators": [matrix_to_json(g) for g in gens]}
    return {"systems": systems}


def lie_symmetry_from_json(obj: Mapping[str, Any]):
    from .symmetry import LieSymmetry
    check_keys(obj, ["systems"], where="lie symmetry")
    if not isinstance(obj["systems"], Mapping) or not obj["systems"]:
        raise FormatError("lie symmetry: systems must be a non-empty object")
    systems = {}
    for label, sysobj in obj["systems"].items():
        check_keys(sysobj, ["dim", "generators"], where=f"system {label!r}")
        gens = matrices_from_json(sysobj["generators"], where=f"system {label!r} generators")
        for g in gens:
            if g.shape[0] != sysobj["dim"]:
                raise FormatError(f"system {label!r}: generator dim {g.shape[0]} != declared {sysobj['dim']}")
        systems[label] = gens
    return LieSymmetry(systems)


def channel_to_json(t) -> dict:
    return {"d_in": int(t.d_in), "d_out": int(t.d_out),
            "kraus": [matrix_to_json_rect(k) for k in t.kraus]}


def matrix_to_json_rect(m: np.ndarray) -> dict:
    """Kraus operators may be rectangular; serialize with explicit rows/cols."""
    m = np.asarray(m, dtype=complex)
    if m.shape[0] == m.shape[1]:
        return matrix_to_json(m)
    data = [[float(x.real), float(x.imag)] for x in m.reshape(-1)]
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": data}


def matrix_from_json_rect(obj: Mapping[str, Any], where: str = "matrix") -> np.ndarray:
    if isinstance(obj, Mapping) and "rows" in obj:
        check_keys(obj, ["rows", "cols", "data"], where=where)
        rows, cols = obj["rows"], obj["cols"]
        flat = np.empty(rows * cols, dtype=complex)
        if not isinstance(obj["data"], list) or len(obj["data"]) != rows * cols:
            raise FormatError(f"{where}: expected {rows * cols} entries")
        for i, entry in enumerate(obj["data"]):
            flat[i] = complex(float(entry[0]), float(entry[1]))
        if not np.all(np.isfinite(flat.real)) or not np.all(np.isfinite(flat.imag)):
            raise FormatError(f"{where}: non-finite entry")
        return flat.reshape(rows, cols)
    return matrix_from_json(obj, where=where)


def channel_from_json(obj: Mapping[str, Any]):
    from .channels import Channel
    check_keys(obj, ["d_in", "d_out", "kraus"], where="channel")
    if not isinstance(obj["kraus"], list) or not obj["kraus"]:
        raise FormatError("channel: kraus must be a non-empty list")
    ks = [matrix_from_json_rect(k, where=f"channel.kraus[{i}]") for i, k in enumerate(obj["kraus"])]
    return Channel(ks, d_in=obj["d_in"], d_out=obj["d_out"])


def dump_json(payload: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json_atomic(path: str, payload: Any) -> None:
    """Write JSON via a temp file in the same directory, then rename."""
    text = dump_json(payload)
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str) -> Any:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from exc
