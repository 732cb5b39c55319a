"""Declarative network description, its JSON file format, and the coupling matrix.

Oscillator indices are 1-based here and in files; array-level APIs elsewhere
use 0-based positions (position ``m - 1`` holds oscillator ``m``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .dissipation import DampingModel, damping_model_from_dict, validate_overlap
from .errors import NetworkParseError, ValidationError

RESERVOIR_KINDS = ("none", "distinct", "common")
RESERVOIR_MODES = ("distinct", "common")
TOPOLOGIES = ("symmetric", "central", "circular", "linear")


@dataclass(frozen=True)
class Reservoir:
    kind: str = "none"
    model: str | None = None

    def __post_init__(self):
        if self.kind not in RESERVOIR_KINDS:
            raise ValidationError(f"unknown reservoir type {self.kind!r}", "reservoir.type")
        if self.kind == "none" and self.model is not None:
            raise ValidationError("a reservoir-free oscillator takes no model", "reservoir.model")
        if self.kind != "none" and not self.model:
            raise ValidationError("a damping model id is required", "reservoir.model")


NO_RESERVOIR = Reservoir()


@dataclass(frozen=True)
class OscillatorSpec:
    index: int
    frequency: float
    reservoir: Reservoir = NO_RESERVOIR


@dataclass(frozen=True)
class CouplingSpec:
    m: int
    n: int
    strength: float

    @property
    def pair(self) -> tuple[int, int]:
        return (min(self.m, self.n), max(self.m, self.n))


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    oscillators: tuple[OscillatorSpec, ...]
    couplings: tuple[CouplingSpec, ...] = ()
    reservoir_mode: str = "distinct"
    damping_models: Mapping[str, DampingModel] = field(default_factory=dict)
    overlap: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "oscillators", tuple(sorted(self.oscillators, key=lambda o: o.index)))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        object.__setattr__(self, "damping_models", dict(self.damping_models))
        if self.overlap is not None:
            object.__setattr__(self, "overlap", tuple(tuple(float(x) for x in row) for row in self.overlap))
        self._validate()

    @property
    def n(self) -> int:
        return len(self.oscillators)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([o.frequency for o in self.oscillators], dtype=float)

    def models(self) -> list[DampingModel | None]:
        """Damping model per oscillator in index order (None when reservoir-free)."""
        return [None if o.reservoir.kind == "none" else self.damping_models[o.reservoir.model]
                for o in self.oscillators]

    def _validate(self):
        n = self.n
        if n < 1:
            raise ValidationError("a network needs at least one oscillator", "oscillators")
        indices = [o.index for o in self.oscillators]
        if len(set(indices)) != n:
            raise ValidationError("duplicate oscillator index", "oscillators")
        if indices != list(range(1, n + 1)):
            raise ValidationError(f"indices must be exactly 1..{n}", "oscillators")
        if self.reservoir_mode not in RESERVOIR_MODES:
            raise ValidationError(f"expected one of {RESERVOIR_MODES}", "reservoir_mode")
        for o in self.oscillators:
            where = f"oscillators[{o.index}]"
            if not (isinstance(o.frequency, (int, float)) and math.isfinite(o.frequency) and o.frequency > 0):
                raise ValidationError(f"frequency must be positive, got {o.frequency!r}", f"{where}.omega")
            kind = o.reservoir.kind
            if kind != "none":
                if kind != self.reservoir_mode:
                    raise ValidationError(
                        f"reservoir type {kind!r} conflicts with reservoir_mode {self.reservoir_mode!r}",
                        f"{where}.reservoir")
                if o.reservoir.model not in self.damping_models:
                    raise ValidationError(f"unknown damping model {o.reservoir.model!r}",
                                          f"{where}.reservoir.model")
        seen = set()
        for c in self.couplings:
            if c.m == c.n:
                raise ValidationError(f"self-coupling forbidden ({c.m}, {c.n})", "couplings")
            if not (1 <= c.m <= n and 1 <= c.n <= n):
                raise ValidationError(f"index out of range 1..{n} in ({c.m}, {c.n})", "couplings")
            if not math.isfinite(c.strength):
                raise ValidationError("coupling strength must be finite", "couplings")
            if c.pair in seen:
                raise ValidationError(f"duplicate pair {c.pair}", "couplings")
            seen.add(c.pair)
        if self.overlap is not None:
            if self.reservoir_mode != "common":
                raise ValidationError("overlap only applies to reservoir_mode 'common'", "overlap")
            validate_overlap(self.overlap, n)

    def __eq__(self, other):
        if not isinstance(other, NetworkSpec):
            return NotImplemented
        return (self.oscillators == other.oscillators
                and sorted(self.couplings, key=lambda c: c.pair) == sorted(other.couplings, key=lambda c: c.pair)
                and self.reservoir_mode == other.reservoir_mode
                and self.damping_models == other.damping_models
                and self.overlap == other.overlap)


def build_coupling_matrix(spec: NetworkSpec) -> np.ndarray:
    n = spec.n
    H = np.zeros((n, n))
    H[np.diag_indices(n)] = spec.frequencies
    for c in spec.couplings:
        H[c.m - 1, c.n - 1] = H[c.n - 1, c.m - 1] = c.strength
    return H


def topology_pairs(kind: str, n: int) -> list[tuple[int, int]]:
    """1-based coupled pairs (m < n) of a standard topology."""
    if kind not in TOPOLOGIES:
        raise ValidationError(f"unknown topology {kind!r}; expected one of {TOPOLOGIES}", "kind")
    minimum = 3 if kind == "circular" else 2
    if n < minimum:
        raise ValidationError(f"{kind} topology needs N >= {minimum}, got {n}", "n")
    if kind == "symmetric":
        return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    if kind == "central":
        return [(1, j) for j in range(2, n + 1)]
    chain = [(i, i + 1) for i in range(1, n)]
    return chain + [(1, n)] if kind == "circular" else chain


def generate_topology(kind: str, n: int, omega=1.0, lam=0.1, *, damping: DampingModel | None = None,
                      reservoir_mode: str = "distinct") -> NetworkSpec:
    """Standard topology with the central oscillator (if any) labelled 1.

    ``omega`` is a scalar or a length-n sequence; ``lam`` is a scalar or a
    mapping from 1-based pairs to strengths covering every coupled pair.  With
    ``damping`` every oscillator gets that model under id ``"default"``.
    """
    pairs = topology_pairs(kind, n)
    freqs = [float(omega)] * n if np.isscalar(omega) else [float(w) for w in omega]
    if len(freqs) != n:
        raise ValidationError(f"need {n} frequencies, got {len(freqs)}", "omega")
    if isinstance(lam, Mapping):
        lookup = {(min(p), max(p)): float(v) for p, v in lam.items()}
        missing = [p for p in pairs if p not in lookup]
        if missing:
            raise ValidationError(f"no strength given for pairs {missing}", "lambda")
        strengths = [lookup[p] for p in pairs]
    else:
        strengths = [float(lam)] * len(pairs)
    models = {}
    reservoir = NO_RESERVOIR
    if damping is not None:
        models = {"default": damping}
        reservoir = Reservoir(reservoir_mode, "default")
    return NetworkSpec(
        oscillators=tuple(OscillatorSpec(i + 1, f, reservoir) for i, f in enumerate(freqs)),
        couplings=tuple(CouplingSpec(a, b, s) for (a, b), s in zip(pairs, strengths)),
        reservoir_mode=reservoir_mode,
        damping_models=models,
    )


def relabel(spec: NetworkSpec, perm: Sequence[int]) -> NetworkSpec:
    """Move oscillator at 0-based position i to position perm[i]."""
    perm = list(perm)
    if sorted(perm) != list(range(spec.n)):
        raise ValidationError("not a permutation", "perm")
    new = lambda i: perm[i - 1] + 1  # noqa: E731
    overlap = None
    if spec.overlap is not None:
        rho = np.asarray(spec.overlap)
        out = np.empty_like(rho)
        out[np.ix_(perm, perm)] = rho
        overlap = tuple(map(tuple, out))
    return NetworkSpec(
        oscillators=tuple(OscillatorSpec(new(o.index), o.frequency, o.reservoir) for o in spec.oscillators),
        couplings=tuple(CouplingSpec(new(c.m), new(c.n), c.strength) for c in spec.couplings),
        reservoir_mode=spec.reservoir_mode,
        damping_models=spec.damping_models,
        overlap=overlap,
    )


# --- file format -------------------------------------------------------------

_TOP_KEYS = {"n", "oscillators", "couplings", "reservoir_mode", "damping_models", "overlap"}


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"expected a number, got {value!r}", where)
    return float(value)


def _integer(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"expected an integer, got {value!r}", where)
    return value


def _keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise ValidationError("expected an object", where)
    extra = set(obj) - set(allowed)
    if extra:
        raise ValidationError(f"unknown keys {sorted(extra)}", where)
    missing = [k for k in required if k not in obj]
    if missing:
        raise ValidationError(f"missing keys {missing}", where)


def load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkParseError(exc.msg, exc.lineno, exc.colno) from None


def network_from_dict(doc) -> NetworkSpec:
    _keys(doc, _TOP_KEYS, ("n", "oscillators"), "network")
    n = _integer(doc["n"], "n")
    raw_osc = doc["oscillators"]
    if not isinstance(raw_osc, list):
        raise ValidationError("expected an array", "oscillators")
    if len(raw_osc) != n:
        raise ValidationError(f"n={n} but {len(raw_osc)} oscillators listed", "n")
    oscillators = []
    for i, item in enumerate(raw_osc):
        where = f"oscillators[{i}]"
        _keys(item, ("index", "omega", "reservoir"), ("index", "omega"), where)
        res = item.get("reservoir")
        if res is None:
            reservoir = NO_RESERVOIR
        else:
            _keys(res, ("type", "model"), ("type",), f"{where}.reservoir")
            reservoir = Reservoir(res["type"], res.get("model"))
        oscillators.append(OscillatorSpec(_integer(item["index"], f"{where}.index"),
                                          _number(item["omega"], f"{where}.omega"), reservoir))
    raw_cpl = doc.get("couplings", [])
    if not isinstance(raw_cpl, list):
        raise ValidationError("expected an array", "couplings")
    couplings = []
    for i, item in enumerate(raw_cpl):
        where = f"couplings[{i}]"
        _keys(item, ("m", "n", "lambda"), ("m", "n", "lambda"), where)
        couplings.append(CouplingSpec(_integer(item["m"], f"{where}.m"), _integer(item["n"], f"{where}.n"),
                                      _number(item["lambda"], f"{where}.lambda")))
    raw_models = doc.get("damping_models", {})
    if not isinstance(raw_models, dict):
        raise ValidationError("expected an object", "damping_models")
    models = {key: damping_model_from_dict(val, f"damping_models.{key}") for key, val in raw_models.items()}
    overlap = doc.get("overlap")
    if overlap is not None:
        if not (isinstance(overlap, list) and all(isinstance(r, list) for r in overlap)):
            raise ValidationError("expected an array of arrays", "overlap")
        overlap = tuple(tuple(_number(x, "overlap") for x in row) for row in overlap)
    return NetworkSpec(tuple(oscillators), tuple(couplings), doc.get("reservoir_mode", "distinct"),
                       models, overlap)


def parse_network_file(text: str) -> NetworkSpec:
    return network_from_dict(load_json(text))


def network_to_dict(spec: NetworkSpec) -> dict:
    doc = {
        "n": spec.n,
        "oscillators": [],
        "couplings": [{"m": c.m, "n": c.n, "lambda": c.strength} for c in spec.couplings],
        "reservoir_mode": spec.reservoir_mode,
        "damping_models": {k: m.to_dict() for k, m in sorted(spec.damping_models.items())},
    }
    for o in spec.oscillators:
        item = {"index": o.index, "omega": o.frequency}
        if o.reservoir.kind != "none":
            item["reservoir"] = {"type": o.reservoir.kind, "model": o.reservoir.model}
        doc["oscillators"].append(item)
    if spec.overlap is not None:
        doc["overlap"] = [list(row) for row in spec.overlap]
    return doc


def serialize_network(spec: NetworkSpec) -> str:
    return json.dumps(network_to_dict(spec), indent=2) + "\n"
