"""Instance files and run records.

Instance file layout::

    b"PXPN" | uint64 LE header length | UTF-8 JSON header | float64 LE sections

The header lists the sections (name and shape) in storage order together
with ``l, n, seed, xi, tau, M, m``.  Floats in the header are written with
``repr`` precision so reading back is bit-exact.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .instances import LinConstrQpInstance, SimplexQpInstance

__all__ = ["save_instance", "load_instance", "RECORD_SCHEMA_VERSION",
           "instance_bytes"]

MAGIC = b"PXPN"
FORMAT_VERSION = 1
RECORD_SCHEMA_VERSION = 1

_BASE_SECTIONS = ("A", "B", "d", "b")
_EQ_SECTIONS = ("A_eq", "b_eq", "z_feas")


def instance_bytes(inst: SimplexQpInstance) -> bytes:
    names = list(_BASE_SECTIONS)
    if isinstance(inst, LinConstrQpInstance):
        names += list(_EQ_SECTIONS)
    arrays = [np.ascontiguousarray(getattr(inst, k), dtype="<f8") for k in names]
    header = {
        "format": FORMAT_VERSION,
        "kind": "linconstr_qp" if isinstance(inst, LinConstrQpInstance) else "simplex_qp",
        "l": inst.l, "n": inst.n, "seed": inst.seed,
        "xi": inst.xi, "tau": inst.tau, "M": inst.M, "m": inst.m,
        "sections": [{"name": k, "shape": list(a.shape)} for k, a in zip(names, arrays)],
    }
    if isinstance(inst, LinConstrQpInstance):
        header["l_eq"] = inst.l_eq
    hdr = json.dumps(header, sort_keys=True).encode("utf-8")
    return MAGIC + struct.pack("<Q", len(hdr)) + hdr + b"".join(a.tobytes() for a in arrays)


def save_instance(path, inst: SimplexQpInstance):
    with open(path, "wb") as fh:
        fh.write(instance_bytes(inst))


def load_instance(path) -> SimplexQpInstance:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not an instance file")
    (size,) = struct.unpack("<Q", raw[4:12])
    header = json.loads(raw[12:12 + size].decode("utf-8"))
    if header.get("format") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format {header.get('format')}")
    pos = 12 + size
    data = {}
    for sec in header["sections"]:
        count = int(np.prod(sec["shape"]))
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=pos)
        data[sec["name"]] = arr.reshape(sec["shape"]).astype(float)
        pos += 8 * count
    if pos != len(raw):
        raise ValueError(f"{path}: trailing or missing data")
    common = dict(A=data["A"], B=data["B"], d=data["d"], b=data["b"],
                  xi=header["xi"], tau=header["tau"], M=header["M"], m=header["m"],
                  seed=header["seed"])
    if header["kind"] == "linconstr_qp":
        return LinConstrQpInstance(**common, A_eq=data["A_eq"], b_eq=data["b_eq"],
                                   z_feas=data["z_feas"])
    return SimplexQpInstance(**common)
