"""Run configuration: a JSON document validated before any computation."""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigurationError
from .grid import Grid
from .shear import ShearProfile, cutoff_shear, polynomial, power_law, rest, sin_minus_identity
from .vortex import PROFILES, FlowSpec, VortexSpec, Window, place_child, validate_flow

_NUM = {"type": "number"}
_CHILD = {
    "type": "object",
    "required": ["radius", "angle", "eps"],
    "properties": {
        "radius": _NUM, "angle": _NUM, "eps": _NUM, "amplitude": _NUM,
        "n": {"type": "integer"}, "profile": {"enum": sorted(PROFILES)},
        "children": {"type": "array", "items": {"$ref": "#/definitions/child"}},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "definitions": {"child": _CHILD},
    "properties": {
        "grid": {"type": "object", "properties": {"nx": {"type": "integer"}, "ny": {"type": "integer"}},
                 "required": ["nx", "ny"], "additionalProperties": False},
        "shear": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["power", "polynomial", "sin_minus_identity", "rest"]},
                "n": {"type": "integer"}, "coeffs": {"type": "array", "items": _NUM}, "y0": _NUM,
            },
            "required": ["kind"], "additionalProperties": False,
        },
        "windows": {"type": "array", "items": {
            "type": "object", "required": ["y0", "eps"], "additionalProperties": False,
            "properties": {"y0": _NUM, "eps": _NUM, "traveling": {"type": "boolean"}}}},
        "vortices": {"type": "array", "items": {
            "type": "object", "required": ["center", "eps"], "additionalProperties": False,
            "properties": {
                "center": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "eps": _NUM, "amplitude": _NUM, "n": {"type": "integer"},
                "profile": {"enum": sorted(PROFILES)},
                "children": {"type": "array", "items": {"$ref": "#/definitions/child"}}}}},
        "alpha": _NUM,
        "sweep": {"type": "object", "additionalProperties": False, "properties": {
            "eps": {"type": "array", "items": _NUM}, "y0": _NUM, "samples": {"type": "integer"}}},
        "levels": {"type": "object", "additionalProperties": False, "properties": {
            "laminar": {"type": "integer"}, "energy": {"type": "integer"},
            "subdomain": {"type": "integer"}, "bins": {"type": "integer"},
            "classify": {"type": "array", "items": _NUM}}},
        "seed": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "evolution": {"type": "object", "additionalProperties": False, "properties": {
            "t_end": _NUM, "cfl": _NUM, "every": _NUM, "dt": _NUM,
            "track": {"enum": ["none", "speed", "orbit"]}}},
        "tolerances": {"type": "object", "additionalProperties": False, "properties": {
            "steady_rel": _NUM, "spread": _NUM, "shear": _NUM, "energy_rel": _NUM,
            "slope": _NUM}},
        "fields": {"type": "object", "additionalProperties": False, "properties": {
            "psi": {"type": "string"}, "omega": {"type": "string"}, "u": {"type": "string"}}},
        "output": {"type": "object", "additionalProperties": False, "properties": {
            "dir": {"type": "string"}, "format": {"enum": ["bin", "csv"]}, "plots": {"type": "boolean"}}},
    },
    "additionalProperties": False,
}

DEFAULTS = {
    "grid": {"nx": 256, "ny": 257},
    "shear": {"kind": "power", "n": 2},
    "windows": [],
    "vortices": [],
    "alpha": 0.5,
    "sweep": {"eps": [0.2, 0.1, 0.05, 0.025], "y0": 0.0, "samples": 4096},
    "levels": {"laminar": 128, "energy": 128, "subdomain": 128, "bins": 64, "classify": []},
    "seed": [0.0, -0.5],
    "evolution": {"t_end": 10.0, "cfl": 0.5, "every": 0.5, "track": "none"},
    "tolerances": {"steady_rel": 1e-4, "spread": 1e-6, "shear": 1e-10, "energy_rel": 0.02,
                   "slope": 0.15},
    "fields": {},
    "output": {"dir": "out", "format": "bin", "plots": True},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


class RunConfig:
    """Validated configuration with builders for the objects it describes."""

    def __init__(self, data: dict, base_dir: Path | None = None):
        try:
            jsonschema.validate(data, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigurationError(f"config {where}: {exc.message}") from None
        self.data = _merge(DEFAULTS, data)
        self.base_dir = Path(base_dir) if base_dir else Path.cwd()
        self._check()

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        return cls(data, path.parent)

    def __getitem__(self, key):
        return self.data[key]

    # -- validation ------------------------------------------------------------------
    def _check(self) -> None:
        self.grid()
        a = self.data["alpha"]
        if not 0.0 < a < 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {a}")
        lv = self.data["levels"]
        if lv["laminar"] < 32:
            raise ConfigurationError("levels.laminar must be >= 32")
        if lv["energy"] < 64:
            raise ConfigurationError("levels.energy must be >= 64")
        if lv["bins"] < 16:
            raise ConfigurationError("levels.bins must be >= 16")
        ev = self.data["evolution"]
        if not 0.0 < ev["cfl"] <= 1.0 or ev["t_end"] <= 0 or ev["every"] <= 0:
            raise ConfigurationError("evolution needs 0 < cfl <= 1 and positive t_end, every")
        for t, v in self.data["tolerances"].items():
            if not v > 0:
                raise ConfigurationError(f"tolerance {t} must be positive")
        if self.data["sweep"]["samples"] < 256:
            raise ConfigurationError("sweep.samples must be >= 256")
        shear = self.shear()
        for w in self.data["windows"]:
            cutoff_shear(shear, w["eps"], w["y0"])
        self.flow()

    # -- builders ----------------------------------------------------------------------
    def grid(self) -> Grid:
        g = self.data["grid"]
        return Grid(int(g["nx"]), int(g["ny"]))

    def shear(self) -> ShearProfile:
        s = self.data["shear"]
        kind = s["kind"]
        if kind == "power":
            return power_law(int(s.get("n", 2)))
        if kind == "polynomial":
            if "coeffs" not in s:
                raise ConfigurationError("polynomial shear needs coeffs")
            return polynomial(s["coeffs"], s.get("y0", 0.0))
        if kind == "sin_minus_identity":
            return sin_minus_identity()
        return rest()

    def _vortex(self, d: dict, default_n: int) -> VortexSpec:
        n = int(d.get("n", default_n))
        prof = PROFILES[d.get("profile", "plateau")]
        parent = VortexSpec(tuple(d["center"]), d["eps"], d.get("amplitude", 1.0), n, prof)
        kids = tuple(self._child(parent, c) for c in d.get("children", []))
        return VortexSpec(parent.center, parent.eps, parent.amplitude, n, prof, kids)

    def _child(self, parent: VortexSpec, d: dict) -> VortexSpec:
        prof = PROFILES[d.get("profile", "bump")]
        n = int(d.get("n", parent.n))
        ch = place_child(parent, d["radius"], d["angle"], d["eps"], d.get("amplitude", 1.0), n, prof)
        kids = tuple(self._child(ch, c) for c in d.get("children", []))
        return VortexSpec(ch.center, ch.eps, ch.amplitude, n, prof, kids)

    def flow(self) -> FlowSpec:
        shear = self.shear()
        n_default = max(shear.n, 1)
        wins = tuple(Window(w["y0"], w["eps"], bool(w.get("traveling", False)))
                     for w in self.data["windows"])
        vs = tuple(self._vortex(v, n_default) for v in self.data["vortices"])
        flow = FlowSpec(shear, wins, vs)
        validate_flow(flow)
        return flow

    def sweep_eps(self) -> list:
        eps = list(self.data["sweep"]["eps"])
        if len(eps) < 4:
            raise ConfigurationError("the eps sweep needs at least 4 values")
        return eps

    def field_path(self, key: str) -> Path | None:
        p = self.data["fields"].get(key)
        if p is None:
            return None
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2)


def parse_grid(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ConfigurationError(f"grid must look like NXxNY, got {text!r}") from None
    Grid(nx, ny)
    return nx, ny
