"""VFLD container: one-line JSON header + raw little-endian float64 payload.

Layout: line 1 is a JSON object
    {"magic": "VFLD1", "dim": N, "shape": [...], "spacing": [...],
     "origin": [...], "fields": [{"name": ..., "components": k}, ...],
     "mask": true|false}
terminated by a newline; then, for each declared field in order, row-major
float64 data with components interleaved last; then, when "mask" is true,
one byte (0/1) per node.  Writers may add a "provenance" object recording
generator parameters.  Files are written atomically (temp + rename) and
round-trip bit-exactly.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from eikinetic.fields import GridSpec, ScalarField, VectorField

MAGIC = "VFLD1"
_MAX_HEADER = 1 << 20


class VfldParseError(ValueError):
    """Malformed VFLD content; ``offset`` is the byte position at fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def write_vfld(path, grid: GridSpec, fields: dict, mask=None,
               provenance: dict | None = None) -> None:
    """Write named arrays over one grid.  Each array must have shape
    ``grid.shape`` (scalar, stored with 1 component) or ``grid.shape + (k,)``."""
    entries = []
    blobs = []
    for name, arr in fields.items():
        arr = np.asarray(arr, dtype=float)
        if arr.shape == grid.shape:
            arr = arr[..., None]
        if arr.shape[:-1] != grid.shape or arr.ndim != grid.dim + 1:
            raise ValueError(
                f"field {name!r} has shape {arr.shape}, expected "
                f"{grid.shape} (+ components)"
            )
        entries.append({"name": str(name), "components": int(arr.shape[-1])})
        blobs.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    header = {
        "magic": MAGIC,
        "dim": grid.dim,
        "shape": list(grid.shape),
        "spacing": list(grid.spacing),
        "origin": list(grid.origin),
        "fields": entries,
        "mask": mask is not None,
    }
    if provenance is not None:
        header["provenance"] = provenance
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != grid.shape:
            raise ValueError("mask shape does not match grid shape")
        blobs.append(mask.astype(np.uint8).tobytes())

    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(prefix=".vfld-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(json.dumps(header).encode("utf-8"))
            fh.write(b"\n")
            for blob in blobs:
                fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class VfldFile:
    """Parsed VFLD content: grid, named arrays, optional mask, header."""

    def __init__(self, grid: GridSpec, fields: dict, mask, header: dict):
        self.grid = grid
        self.fields = fields
        self.mask = mask
        self.header = header

    @property
    def provenance(self) -> dict:
        return self.header.get("provenance", {})

    def vector_field(self, name: str | None = None, unit: bool | None = None
                     ) -> VectorField:
        name = self._pick(name, lambda c: c == self.grid.dim)
        data = self.fields[name]
        mask = (self.mask if self.mask is not None
                else np.ones(self.grid.shape, dtype=bool))
        if unit is None:
            unit = bool(self.provenance.get("unit", False))
        return VectorField(self.grid, data, mask, unit=unit)

    def scalar_field(self, name: str | None = None) -> ScalarField:
        name = self._pick(name, lambda c: c == 1)
        return ScalarField(self.grid, self.fields[name][..., 0],
                           allow_inf=True)

    def _pick(self, name, pred) -> str:
        if name is not None:
            if name not in self.fields:
                raise KeyError(f"no field named {name!r} in file")
            return name
        for entry in self.header["fields"]:
            if pred(entry["components"]):
                return entry["name"]
        raise KeyError("no field with the requested component count")


def read_vfld(path) -> VfldFile:
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0 or nl > _MAX_HEADER:
        raise VfldParseError("missing newline-terminated header", 0)
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        pos = getattr(exc, "pos", 0)
        raise VfldParseError(f"header is not valid JSON: {exc}", pos) from exc
    if not isinstance(header, dict) or header.get("magic") != MAGIC:
        raise VfldParseError(f"bad magic, expected {MAGIC!r}", 0)
    for key in ("dim", "shape", "spacing", "origin", "fields", "mask"):
        if key not in header:
            raise VfldParseError(f"header missing key {key!r}", 0)
    try:
        grid = GridSpec(tuple(header["shape"]), tuple(header["spacing"]),
                        tuple(header["origin"]))
    except Exception as exc:
        raise VfldParseError(f"invalid grid header: {exc}", 0) from exc
    if grid.dim != header["dim"]:
        raise VfldParseError(
            f"dim {header['dim']} does not match shape rank {grid.dim}", 0)

    nodes = int(np.prod(grid.shape))
    offset = nl + 1
    fields = {}
    for entry in header["fields"]:
        name, comps = entry["name"], int(entry["components"])
        count = nodes * comps
        end = offset + 8 * count
        if end > len(raw):
            raise VfldParseError(
                f"field {name!r} needs {8 * count} payload bytes, file "
                f"ends early", offset)
        arr = np.frombuffer(raw[offset:end], dtype="<f8").reshape(
            grid.shape + (comps,))
        fields[name] = arr.copy()
        offset = end
    mask = None
    if header["mask"]:
        end = offset + nodes
        if end > len(raw):
            raise VfldParseError("mask bytes missing", offset)
        mask = (np.frombuffer(raw[offset:end], dtype=np.uint8)
                .reshape(grid.shape).astype(bool))
        offset = end
    if offset != len(raw):
        raise VfldParseError(
            f"{len(raw) - offset} trailing bytes after payload", offset)
    return VfldFile(grid, fields, mask, header)
