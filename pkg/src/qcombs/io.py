"""Operator files and result records.

Both formats are JSON with a fixed canonical layout: floats are printed
with 17 significant digits (lowercase scientific when needed), which is
enough to reconstruct every IEEE double exactly, so parse -> serialize is
bit-identical on canonical files.  Reading uses the stdlib JSON parser and
accepts any formatting; only writing is canonical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import OperatorFileError
from .labeled import LabeledOperator, Wire

OPERATOR_FORMAT_VERSION = 1

# Source tags a result record may attach to its reference value.
PROVENANCE_TAGS = ("paper-closed-form", "stored-constant", "none")


def _fmt(x: float) -> str:
    """Canonical float rendering: 17 significant digits, lowercase."""
    return format(float(x), ".17g")


def _meta_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise OperatorFileError(f"metadata value {v!r} is not finite")
        return _fmt(v)
    raise OperatorFileError(
        f"metadata values must be scalars, got {type(v).__name__}"
    )


@dataclass(eq=False)
class OperatorFile:
    """A dense operator with its wire layout and free-form metadata.

    Entries are stored row-major as [re, im] pairs, leftmost wire most
    significant, matching LabeledOperator's memory layout.
    """

    wires: tuple[Wire, ...]
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)
    format_version: int = OPERATOR_FORMAT_VERSION

    def __post_init__(self):
        self.wires = tuple(self.wires)
        d = math.prod(w.dim for w in self.wires)
        self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        if self.matrix.shape != (d, d):
            raise OperatorFileError(
                f"matrix shape {self.matrix.shape} does not match the wire "
                f"dimensions (total {d})"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise OperatorFileError("matrix entries must be finite")

    @classmethod
    def from_operator(
        cls, op: LabeledOperator, metadata: Mapping | None = None
    ) -> "OperatorFile":
        return cls(op.wires, op.matrix.copy(), dict(metadata or {}))

    def to_operator(self) -> LabeledOperator:
        return LabeledOperator(self.wires, self.matrix)

    # -- canonical serialization ------------------------------------------------

    def dumps(self) -> str:
        lines = ["{"]
        lines.append(f'  "format_version": {self.format_version},')
        lines.append('  "wires": [')
        for i, w in enumerate(self.wires):
            comma = "," if i < len(self.wires) - 1 else ""
            lines.append(
                f'    {{"label": {json.dumps(w.label)}, "dim": {w.dim}}}{comma}'
            )
        lines.append("  ],")
        lines.append('  "entries": [')
        flat = self.matrix.ravel()
        last = flat.size - 1
        for i, z in enumerate(flat):
            comma = "," if i < last else ""
            lines.append(f"    [{_fmt(z.real)}, {_fmt(z.imag)}]{comma}")
        lines.append("  ],")
        lines.append('  "metadata": {')
        items = sorted(self.metadata.items())
        for i, (k, v) in enumerate(items):
            comma = "," if i < len(items) - 1 else ""
            lines.append(f"    {json.dumps(str(k))}: {_meta_scalar(v)}{comma}")
        lines.append("  }")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "OperatorFile":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise OperatorFileError(f"not valid JSON: {e}") from e
        if not isinstance(doc, dict):
            raise OperatorFileError("top level must be an object")
        for key in ("format_version", "wires", "entries"):
            if key not in doc:
                raise OperatorFileError(f"missing key {key!r}")
        if doc["format_version"] != OPERATOR_FORMAT_VERSION:
            raise OperatorFileError(
                f"unsupported format_version {doc['format_version']!r}, "
                f"expected {OPERATOR_FORMAT_VERSION}"
            )
        raw_wires = doc["wires"]
        if not isinstance(raw_wires, list) or not raw_wires:
            raise OperatorFileError("wires must be a non-empty list")
        wires = []
        for entry in raw_wires:
            if (
                not isinstance(entry, dict)
                or not isinstance(entry.get("label"), str)
                or not isinstance(entry.get("dim"), int)
            ):
                raise OperatorFileError(
                    f"each wire needs a string label and an integer dim, got {entry!r}"
                )
            wires.append(Wire(entry["label"], entry["dim"]))
        d = math.prod(w.dim for w in wires)
        entries = doc["entries"]
        if not isinstance(entries, list) or len(entries) != d * d:
            n = len(entries) if isinstance(entries, list) else "non-list"
            raise OperatorFileError(
                f"entries has {n} pairs, expected {d * d} for total dimension {d}"
            )
        flat = np.empty(d * d, dtype=np.complex128)
        for i, pair in enumerate(entries):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(v, (int, float)) for v in pair)
            ):
                raise OperatorFileError(f"entry {i} is not an [re, im] pair: {pair!r}")
            flat[i] = pair[0] + 1j * pair[1]
        metadata = doc.get("metadata", {})
        if not isinstance(metadata, dict):
            raise OperatorFileError("metadata must be an object")
        try:
            return cls(tuple(wires), flat.reshape(d, d), dict(metadata))
        except Exception as e:
            raise OperatorFileError(str(e)) from e

    def save(self, path, force: bool = False) -> Path:
        path = Path(path)
        if path.exists() and not force:
            raise FileExistsError(f"{path} exists; pass force to overwrite")
        path.write_text(self.dumps())
        return path

    @classmethod
    def load(cls, path) -> "OperatorFile":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            raise OperatorFileError(f"cannot read {path}: {e}") from e
        return cls.loads(text)


@dataclass(eq=False)
class ResultRecord:
    """Machine-readable summary of one CLI task run."""

    task: str
    parameters: dict
    value: float | None
    reference_value: float | None
    reference_source: str
    feas_residual: float | None
    gap_bound: float | None
    iterations: int | None
    wall_time: float
    backend: str
    converged: bool

    def __post_init__(self):
        if self.reference_source not in PROVENANCE_TAGS:
            raise ValueError(
                f"reference_source must be one of {PROVENANCE_TAGS}, "
                f"got {self.reference_source!r}"
            )
        if (self.reference_value is None) != (self.reference_source == "none"):
            raise ValueError(
                "reference_value and reference_source must be absent together"
            )

    def to_json(self) -> str:
        def val(v):
            if v is None:
                return "null"
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, float):
                return _fmt(v)
            if isinstance(v, int):
                return str(v)
            return json.dumps(v)

        lines = ["{"]
        lines.append(f'  "task": {json.dumps(self.task)},')
        lines.append('  "parameters": {')
        items = sorted(self.parameters.items())
        for i, (k, v) in enumerate(items):
            comma = "," if i < len(items) - 1 else ""
            lines.append(f"    {json.dumps(str(k))}: {val(v)}{comma}")
        lines.append("  },")
        for name in (
            "value",
            "reference_value",
            "reference_source",
            "feas_residual",
            "gap_bound",
            "iterations",
            "wall_time",
            "backend",
            "converged",
        ):
            comma = "," if name != "converged" else ""
            lines.append(f'  "{name}": {val(getattr(self, name))}{comma}')
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValueError(f"not valid JSON: {e}") from e
        return cls(**doc)
