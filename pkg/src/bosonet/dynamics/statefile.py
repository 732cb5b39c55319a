"""JSON state blocks.

    {"kind": "coherent_superposition",
     "branches": [{"amplitude": [re, im], "labels": [[re, im], ...]}, ...]}

    {"kind": "fock_superposition",
     "components": [{"occupation": [n1, ..., nN], "amplitude": [re, im]}, ...]}

A document may hold the block directly or under a top-level ``"state"`` key.
Coherent amplitudes are normalised on load; Fock amplitudes must already be.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import ValidationError
from ..topology import load_json
from .coherent import CoherentSuperposition, normalize_superposition
from .fock import FockSuperposition


def _complex(value, where):
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        return complex(value[0], value[1])
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise ValidationError(f"expected a number or [re, im], got {value!r}", where)


def _only(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ValidationError("expected an object", where)
    extra = set(obj) - set(allowed)
    if extra:
        raise ValidationError(f"unknown keys {sorted(extra)}", where)


def state_from_dict(doc, n_modes: int | None = None):
    if isinstance(doc, dict) and set(doc) == {"state"}:
        doc = doc["state"]
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind == "coherent_superposition":
        _only(doc, ("kind", "branches"), "state")
        branches = doc.get("branches")
        if not isinstance(branches, list) or not branches:
            raise ValidationError("expected a non-empty array", "state.branches")
        amps, labels = [], []
        for i, b in enumerate(branches):
            where = f"state.branches[{i}]"
            _only(b, ("amplitude", "labels"), where)
            if "labels" not in b or not isinstance(b["labels"], list):
                raise ValidationError("missing labels array", where)
            amps.append(_complex(b.get("amplitude", 1.0), f"{where}.amplitude"))
            labels.append([_complex(x, f"{where}.labels") for x in b["labels"]])
        if len({len(row) for row in labels}) != 1:
            raise ValidationError("branches have different numbers of labels", "state.branches")
        state = normalize_superposition(np.array(amps), np.array(labels))
        modes = state.n_modes
    elif kind == "fock_superposition":
        _only(doc, ("kind", "components"), "state")
        comps = doc.get("components")
        if not isinstance(comps, list) or not comps:
            raise ValidationError("expected a non-empty array", "state.components")
        amps = {}
        for i, c in enumerate(comps):
            where = f"state.components[{i}]"
            _only(c, ("occupation", "amplitude"), where)
            occ = c.get("occupation")
            if not (isinstance(occ, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in occ)):
                raise ValidationError("occupation must be an integer array", where)
            key = tuple(occ)
            if key in amps:
                raise ValidationError(f"duplicate occupation {key}", where)
            amps[key] = _complex(c.get("amplitude", 1.0), f"{where}.amplitude")
        state = FockSuperposition(amps)
        modes = state.n_modes
    else:
        raise ValidationError(f"unknown state kind {kind!r}", "state.kind")
    if n_modes is not None and modes != n_modes:
        raise ValidationError(f"state has {modes} modes, network has {n_modes}", "state")
    return state


def parse_state_file(text: str, n_modes: int | None = None):
    return state_from_dict(load_json(text), n_modes)


def state_to_dict(state) -> dict:
    if isinstance(state, CoherentSuperposition):
        return {"kind": "coherent_superposition",
                "branches": [{"amplitude": [a.real, a.imag], "labels": [[z.real, z.imag] for z in row]}
                             for a, row in zip(state.amplitudes, state.labels)]}
    if isinstance(state, FockSuperposition):
        return {"kind": "fock_superposition",
                "components": [{"occupation": list(k), "amplitude": [v.real, v.imag]}
                               for k, v in state.amplitudes.items()]}
    raise TypeError(f"not a state: {type(state).__name__}")


def serialize_state(state) -> str:
    return json.dumps(state_to_dict(state), indent=2) + "\n"
