"""JSON ensemble and operator files, and the serializable run report.

An ensemble file looks like::

    {
      "parties": [2, 2],
      "label": "optional",
      "states": [
        {"prior": 0.5, "builder": {"name": "ghz", "m": 2, "d": 2}},
        {"prior": 0.5, "matrix": {"dim": 4, "real": [[...], ...], "imag": [[...], ...]}}
      ]
    }

``imag`` may be omitted for real matrices.  Numbers are written with ``repr``
precision so files round-trip bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .cone import known_primitive_bp
from .constructions import example1_state, example1_witness_operator, example2_state, identity_mix
from .ensembles import StateEnsemble
from .operators import (
    HermitianOperator,
    PartyStructure,
    basis_product_projector,
    ghz,
    identity,
    uniform,
    zero,
)


class FileFormatError(ValueError):
    """Input file problem; ``field`` locates it, e.g. ``states[1].matrix.real``."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# ---------------------------------------------------------------------------
# matrices


def matrix_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    out = {"dim": int(a.shape[0]), "real": a.real.tolist()}
    if np.any(a.imag != 0):
        out["imag"] = a.imag.tolist()
    return out


def matrix_from_json(obj: Any, where: str) -> np.ndarray:
    if not isinstance(obj, dict):
        raise FileFormatError(where, "expected an object with dim/real/imag")
    dim = _int(obj.get("dim"), f"{where}.dim")
    real = _rows(obj.get("real"), dim, f"{where}.real")
    imag = _rows(obj["imag"], dim, f"{where}.imag") if "imag" in obj else np.zeros_like(real)
    return real + 1j * imag


def _rows(obj: Any, dim: int, where: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != dim:
        raise FileFormatError(where, f"expected {dim} rows")
    for r, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != dim:
            raise FileFormatError(f"{where}[{r}]", f"expected {dim} entries")
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in row):
            raise FileFormatError(f"{where}[{r}]", "entries must be numbers")
    return np.array(obj, dtype=float)


def _int(x: Any, where: str, low: int = 1) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise FileFormatError(where, f"expected an integer, got {x!r}")
    if x < low:
        raise FileFormatError(where, f"must be >= {low}")
    return x


def _number(x: Any, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise FileFormatError(where, f"expected a number, got {x!r}")
    return float(x)


# ---------------------------------------------------------------------------
# builders

StateBuilder = Callable[[dict, str], HermitianOperator]


def _md(spec: dict, where: str) -> tuple[int, int]:
    return _int(spec.get("m"), f"{where}.m", 2), _int(spec.get("d"), f"{where}.d", 2)


def _build_ghz(spec, where):
    return ghz(*_md(spec, where))


def _build_basis(spec, where):
    m, d = _md(spec, where)
    i = _int(spec.get("i"), f"{where}.i", 0)
    if i >= d:
        raise FileFormatError(f"{where}.i", f"must be < d = {d}")
    return basis_product_projector(m, d, i)


def _build_mix(spec, where):
    m, d = _md(spec, where)
    w = spec.get("weights")
    if not isinstance(w, list) or len(w) != 2:
        raise FileFormatError(f"{where}.weights", "expected two weights")
    return identity_mix(m, d, [_number(x, f"{where}.weights") for x in w])


def _labelled(fn):
    def build(spec, where):
        m, d = _md(spec, where)
        return fn(m, d, _int(spec.get("which"), f"{where}.which"))

    return build


STATE_BUILDERS: dict[str, StateBuilder] = {
    "ghz": _build_ghz,
    "basis_product": _build_basis,
    "identity_mix": _build_mix,
    "example1_state": _labelled(example1_state),
    "example2_state": _labelled(example2_state),
}

OPERATOR_BUILDERS: dict[str, Callable[[int, int], HermitianOperator]] = {
    "primitive": known_primitive_bp,
    "example1_witness": example1_witness_operator,
    "ghz": ghz,
    "identity": lambda m, d: identity(uniform(m, d)),
    "zero": lambda m, d: zero(uniform(m, d)),
}


def _call_builder(table: dict, spec: Any, where: str, *args):
    if not isinstance(spec, dict) or not isinstance(spec.get("name"), str):
        raise FileFormatError(where, "expected an object with a string 'name'")
    name = spec["name"]
    if name not in table:
        raise FileFormatError(f"{where}.name", f"unknown builder {name!r}; known: {sorted(table)}")
    try:
        return table[name](spec, where, *args)
    except FileFormatError:
        raise
    except (ValueError, IndexError) as exc:
        raise FileFormatError(where, str(exc)) from exc


# ---------------------------------------------------------------------------
# ensembles


def ensemble_from_json(obj: Any) -> StateEnsemble:
    if not isinstance(obj, dict):
        raise FileFormatError("<root>", "expected an object")
    parties = obj.get("parties")
    if not isinstance(parties, list) or not parties:
        raise FileFormatError("parties", "expected a list of local dimensions")
    dims = [_int(d, f"parties[{k}]", 2) for k, d in enumerate(parties)]
    try:
        structure = PartyStructure(tuple(dims))
    except ValueError as exc:
        raise FileFormatError("parties", str(exc)) from exc
    states = obj.get("states")
    if not isinstance(states, list) or not states:
        raise FileFormatError("states", "expected a non-empty list")
    priors, ops = [], []
    for i, rec in enumerate(states):
        where = f"states[{i}]"
        if not isinstance(rec, dict):
            raise FileFormatError(where, "expected an object")
        priors.append(_number(rec.get("prior"), f"{where}.prior"))
        if ("matrix" in rec) == ("builder" in rec):
            raise FileFormatError(where, "give exactly one of 'matrix' or 'builder'")
        if "matrix" in rec:
            a = matrix_from_json(rec["matrix"], f"{where}.matrix")
            if a.shape[0] != structure.dim:
                raise FileFormatError(f"{where}.matrix.dim", f"expected {structure.dim}")
            try:
                op = HermitianOperator(structure, a)
            except ValueError as exc:
                raise FileFormatError(f"{where}.matrix", str(exc)) from exc
        else:
            op = _call_builder(STATE_BUILDERS, rec["builder"], f"{where}.builder")
            if op.structure != structure:
                raise FileFormatError(
                    f"{where}.builder", f"builds parties {list(op.structure.party_dims)}, file says {dims}"
                )
        ops.append(op)
    try:
        return StateEnsemble(structure, tuple(priors), tuple(ops), label=str(obj.get("label", "")))
    except ValueError as exc:
        raise FileFormatError("states", str(exc)) from exc


def ensemble_to_json(e: StateEnsemble) -> dict:
    return {
        "parties": list(e.structure.party_dims),
        "label": e.label,
        "states": [
            {"prior": p, "matrix": matrix_to_json(rho.matrix)} for p, rho in zip(e.priors, e.states)
        ],
    }


def load_ensemble(path: str | Path) -> StateEnsemble:
    return ensemble_from_json(_load_json(path))


def _load_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise FileFormatError(str(path), f"cannot read: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FileFormatError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc


# ---------------------------------------------------------------------------
# operators for cone queries


def operator_from_json(obj: Any) -> HermitianOperator:
    """``{"parties": [...], "steps": L, "matrix": {...}}`` or ``{"builder": {"name", "m", "d"}}``."""
    if not isinstance(obj, dict):
        raise FileFormatError("<root>", "expected an object")
    if "builder" in obj:
        spec = obj["builder"]
        return _call_builder(
            {k: (lambda s, w, f=f: f(*_md(s, w))) for k, f in OPERATOR_BUILDERS.items()},
            spec,
            "builder",
        )
    parties = obj.get("parties")
    if not isinstance(parties, list):
        raise FileFormatError("parties", "expected a list of local dimensions")
    dims = tuple(_int(d, f"parties[{k}]", 2) for k, d in enumerate(parties))
    steps = _int(obj.get("steps", 1), "steps")
    try:
        structure = PartyStructure(dims, steps)
    except ValueError as exc:
        raise FileFormatError("parties", str(exc)) from exc
    a = matrix_from_json(obj.get("matrix"), "matrix")
    if a.shape[0] != structure.dim:
        raise FileFormatError("matrix.dim", f"expected {structure.dim}")
    try:
        return HermitianOperator(structure, a)
    except ValueError as exc:
        raise FileFormatError("matrix", str(exc)) from exc


def load_operator(path: str | Path) -> HermitianOperator:
    return operator_from_json(_load_json(path))


# ---------------------------------------------------------------------------
# report


@dataclass
class Report:
    """Everything a CLI run produces.  ``timing`` is kept apart so it can be ignored."""

    command: str
    inputs: dict
    verdicts: dict
    bounds: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    seed: int | None = None
    version: str = ""
    timing: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "command": self.command,
            "inputs": self.inputs,
            "verdicts": self.verdicts,
            "bounds": self.bounds,
            "certificates": self.certificates,
            "seed": self.seed,
            "version": self.version,
        }
        if timing:
            out["timing"] = self.timing
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> Report:
        return cls(**{k: obj[k] for k in obj if k in cls.__dataclass_fields__})

    def to_json(self, timing: bool = True) -> str:
        # json writes floats with repr, which round-trips exactly
        return json.dumps(_plain(self.to_dict(timing)), sort_keys=True, indent=2, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> Report:
        return cls.from_dict(json.loads(text))


def _plain(x: Any) -> Any:
    """Convert tuples, numpy scalars and arrays into JSON-native values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def plain(x: Any) -> Any:
    return _plain(x)
