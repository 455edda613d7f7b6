"""Experiment configuration: JSON parsing, validation and object construction."""
from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .geometry import (ClosedCurve, ThicknessProfile, ellipse, fourier_radial, kite,
                       make_circle, make_smooth_curve)
from .kernels import LameParams, MaterialTriple
from .transmission import BackgroundField, circle_probes, default_probes

TASKS = ("solve", "oracle_compare", "certify_thm11", "certify_thm12", "check_jumps", "check_identities")
CURVE_KINDS = ("circle", "ellipse", "kite", "fourier")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _require(cond, path, message):
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _number(value, path, positive=False):
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), path, "must be a number")
    _require(np.isfinite(value), path, "must be finite")
    if positive:
        _require(value > 0, path, "must be positive")
    return float(value)


def _numbers(value, path, length=None):
    _require(isinstance(value, (list, tuple)), path, "must be a list of numbers")
    if length is not None:
        _require(len(value) == length, path, f"must have {length} entries")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


DEFAULT_THRESHOLDS = {
    "slope_e0": 0.9,
    "slope_e1": 1.4,
    "slope_thm12": 1.4,
    "oracle": 1e-8,
    "corrector_oracle": 1e-6,
    "jumps": 1e-4,
    "identities": 1e-4,
    "identities_oracle": 1e-6,
    "zero": 1e-9,
}


@dataclass
class ExperimentConfig:
    """One experiment.  See ``docs/config_schema.json`` for the field reference."""

    curve: dict
    materials: dict
    background_field: dict
    thickness: dict = field(default_factory=lambda: {"mean": 1.0, "cos": [], "sin": []})
    n_nodes: int = 256
    epsilon: Optional[float] = None
    epsilon_ladder: list = field(default_factory=lambda: [0.1, 0.05, 0.025, 0.0125])
    n_nodes_per_epsilon: Optional[list] = None
    probes: dict = field(default_factory=lambda: {"kind": "annulus", "inner": 1.5, "outer": 3.0, "count": 64})
    measurement: dict = field(default_factory=lambda: {"radius_scale": 2.0, "n_nodes": 256, "fields": []})
    jump_check: dict = field(default_factory=lambda: {"n_nodes": [64, 128, 256], "relative_delta": 1e-3})
    thresholds: dict = field(default_factory=dict)
    tasks: list = field(default_factory=lambda: ["solve"])
    output_dir: str = "out"
    seed: int = 0
    name: str = "experiment"

    # --- serialization ---------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        _require(isinstance(data, dict), "<root>", "config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        _require(not unknown, "<root>", f"unknown fields {unknown}")
        for name in ("curve", "materials", "background_field"):
            _require(name in data, name, "is required")
        cfg = cls(**copy.deepcopy(data))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"<file>: cannot read {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"<file>: invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    # --- validation ------------------------------------------------------
    def validate(self):
        self._validate_curve()
        _require(isinstance(self.n_nodes, int) and self.n_nodes >= 16 and self.n_nodes % 2 == 0,
                 "n_nodes", "must be an even integer >= 16")
        th = self.thickness
        _require(isinstance(th, dict), "thickness", "must be an object")
        _number(th.get("mean"), "thickness.mean", positive=True)
        _numbers(th.get("cos", []), "thickness.cos")
        _numbers(th.get("sin", []), "thickness.sin")
        mats = self.materials
        _require(isinstance(mats, dict), "materials", "must be an object")
        for key in ("background", "core", "layer"):
            pair = _numbers(mats.get(key), f"materials.{key}", 2)
            try:
                LameParams(*pair)
            except ValueError as exc:
                raise ConfigError(f"materials.{key}: {exc}") from exc
        try:
            self.material_triple()
        except ValueError as exc:
            raise ConfigError(f"materials: {exc}") from exc
        self._validate_field(self.background_field, "background_field")
        if self.epsilon is not None:
            _number(self.epsilon, "epsilon", positive=True)
        ladder = _numbers(self.epsilon_ladder, "epsilon_ladder")
        _require(len(ladder) >= 2, "epsilon_ladder", "needs at least two values")
        _require(all(e > 0 for e in ladder), "epsilon_ladder", "values must be positive")
        _require(len(set(ladder)) == len(ladder), "epsilon_ladder", "values must be distinct")
        if self.n_nodes_per_epsilon is not None:
            _require(isinstance(self.n_nodes_per_epsilon, list) and len(self.n_nodes_per_epsilon) == len(ladder),
                     "n_nodes_per_epsilon", "must be a list aligned with epsilon_ladder")
            for i, n in enumerate(self.n_nodes_per_epsilon):
                _require(isinstance(n, int) and n >= 16 and n % 2 == 0,
                         f"n_nodes_per_epsilon[{i}]", "must be an even integer >= 16")
        self._validate_probes()
        meas = self.measurement
        _require(isinstance(meas, dict), "measurement", "must be an object")
        _number(meas.get("radius_scale", 2.0), "measurement.radius_scale", positive=True)
        _require(isinstance(meas.get("n_nodes", 256), int), "measurement.n_nodes", "must be an integer")
        _require(isinstance(meas.get("fields", []), list), "measurement.fields", "must be a list")
        for i, spec in enumerate(meas.get("fields", [])):
            self._validate_field(spec, f"measurement.fields[{i}]")
        jc = self.jump_check
        _require(isinstance(jc, dict), "jump_check", "must be an object")
        ns = jc.get("n_nodes", [64, 128, 256])
        _require(isinstance(ns, list) and ns and all(isinstance(n, int) and n >= 16 and n % 2 == 0 for n in ns),
                 "jump_check.n_nodes", "must be a non-empty list of even integers >= 16")
        _number(jc.get("relative_delta", 1e-3), "jump_check.relative_delta", positive=True)
        _require(isinstance(self.thresholds, dict), "thresholds", "must be an object")
        for key, value in self.thresholds.items():
            _require(key in DEFAULT_THRESHOLDS, f"thresholds.{key}",
                     f"unknown threshold; expected one of {sorted(DEFAULT_THRESHOLDS)}")
            _number(value, f"thresholds.{key}", positive=True)
        _require(isinstance(self.tasks, list) and self.tasks, "tasks", "must be a non-empty list")
        for i, task in enumerate(self.tasks):
            _require(task in TASKS, f"tasks[{i}]", f"unknown task {task!r}; expected one of {list(TASKS)}")
        _require(isinstance(self.output_dir, str), "output_dir", "must be a string")
        _require(isinstance(self.seed, int), "seed", "must be an integer")
        _require(isinstance(self.name, str), "name", "must be a string")
        try:
            self.build_curve(self.n_nodes)
            self.thickness_profile(self.build_curve(self.n_nodes))
        except ValueError as exc:
            raise ConfigError(f"curve/thickness: {exc}") from exc

    def _validate_curve(self):
        c = self.curve
        _require(isinstance(c, dict), "curve", "must be an object")
        kind = c.get("kind")
        _require(kind in CURVE_KINDS, "curve.kind", f"must be one of {list(CURVE_KINDS)}")
        allowed = {"circle": {"radius", "center"}, "ellipse": {"a", "b"}, "kite": {"a", "b"},
                   "fourier": {"r0", "cos", "sin"}}[kind] | {"kind", "arclength"}
        extra = sorted(set(c) - allowed)
        _require(not extra, "curve", f"unknown fields {extra} for kind {kind!r}")
        if kind == "circle":
            _number(c.get("radius", 1.0), "curve.radius", positive=True)
            _numbers(c.get("center", [0.0, 0.0]), "curve.center", 2)
        elif kind in ("ellipse",):
            _number(c.get("a"), "curve.a", positive=True)
            _number(c.get("b"), "curve.b", positive=True)
        elif kind == "kite":
            _number(c.get("a", 0.65), "curve.a")
            _number(c.get("b", 1.5), "curve.b", positive=True)
        else:
            _number(c.get("r0"), "curve.r0", positive=True)
            _numbers(c.get("cos", []), "curve.cos")
            _numbers(c.get("sin", []), "curve.sin")
        _require(isinstance(c.get("arclength", True), bool), "curve.arclength", "must be true or false")

    def _validate_field(self, spec, path):
        _require(isinstance(spec, dict), path, "must be an object")
        kind = spec.get("kind")
        _require(kind in ("linear", "kelvin_point_source"), f"{path}.kind",
                 "must be 'linear' or 'kelvin_point_source'")
        if kind == "linear":
            m = spec.get("matrix")
            _require(isinstance(m, list) and len(m) == 2, f"{path}.matrix", "must be a 2x2 list")
            for i, row in enumerate(m):
                _numbers(row, f"{path}.matrix[{i}]", 2)
            _numbers(spec.get("offset", [0.0, 0.0]), f"{path}.offset", 2)
            extra = sorted(set(spec) - {"kind", "matrix", "offset"})
        else:
            _numbers(spec.get("source"), f"{path}.source", 2)
            _require(spec.get("column") in (0, 1), f"{path}.column", "must be 0 or 1")
            extra = sorted(set(spec) - {"kind", "source", "column"})
        _require(not extra, path, f"unknown fields {extra}")

    def _validate_probes(self):
        pr = self.probes
        _require(isinstance(pr, dict), "probes", "must be an object")
        kind = pr.get("kind", "annulus")
        _require(kind in ("annulus", "circle"), "probes.kind", "must be 'annulus' or 'circle'")
        count = pr.get("count", 64)
        _require(isinstance(count, int) and count > 0, "probes.count", "must be a positive integer")
        if kind == "annulus":
            inner = _number(pr.get("inner", 1.5), "probes.inner", positive=True)
            outer = _number(pr.get("outer", 3.0), "probes.outer", positive=True)
            _require(inner > 1.0, "probes.inner", "must exceed 1 (probes must stay outside the curve)")
            _require(outer > inner, "probes.outer", "must exceed probes.inner")
        else:
            _number(pr.get("radius"), "probes.radius", positive=True)

    # --- construction ----------------------------------------------------
    def build_curve(self, n_nodes: Optional[int] = None) -> ClosedCurve:
        n = n_nodes or self.n_nodes
        c = self.curve
        kind = c["kind"]
        if kind == "circle":
            return make_circle(c.get("radius", 1.0), n, tuple(c.get("center", (0.0, 0.0))))
        if kind == "ellipse":
            param = ellipse(c["a"], c["b"])
        elif kind == "kite":
            param = kite(c.get("a", 0.65), c.get("b", 1.5))
        else:
            param = fourier_radial(c["r0"], c.get("cos", []), c.get("sin", []))
        return make_smooth_curve(param, n, arclength=c.get("arclength", True))

    def thickness_profile(self, curve: ClosedCurve) -> ThicknessProfile:
        th = self.thickness
        return ThicknessProfile(curve, th["mean"], th.get("cos", []), th.get("sin", []))

    def material_triple(self) -> MaterialTriple:
        pairs = [tuple(self.materials[k]) for k in ("background", "core", "layer")]
        if pairs[0] == pairs[1] == pairs[2]:
            return MaterialTriple.trivial(LameParams(*pairs[0]))
        return MaterialTriple.from_pairs(*pairs)

    @property
    def node_ladder(self) -> Optional[dict]:
        if self.n_nodes_per_epsilon is None:
            return None
        return dict(zip(map(float, self.epsilon_ladder), self.n_nodes_per_epsilon))

    def radial_amplitude(self) -> Optional[float]:
        """Dilation amplitude when the closed-form disk solution applies, else ``None``.

        Requires a circle centred at the origin, a constant thickness and a
        background field ``amplitude * x``.
        """
        c, th, bg = self.curve, self.thickness, self.background_field
        if c["kind"] != "circle" or any(v != 0 for v in c.get("center", [0.0, 0.0])):
            return None
        if any(v != 0 for v in th.get("cos", []) + th.get("sin", [])):
            return None
        if bg["kind"] != "linear" or any(v != 0 for v in bg.get("offset", [0.0, 0.0])):
            return None
        (a, b), (c21, d) = bg["matrix"]
        if b != 0 or c21 != 0 or a != d:
            return None
        return float(a)

    def make_field(self, spec: dict) -> BackgroundField:
        if spec["kind"] == "linear":
            return BackgroundField.linear(spec["matrix"], spec.get("offset", (0.0, 0.0)))
        background = LameParams(*self.materials["background"])
        return BackgroundField.point_source(background, spec["source"], spec["column"])

    def background(self) -> BackgroundField:
        return self.make_field(self.background_field)

    def measurement_fields(self) -> list:
        return [self.make_field(spec) for spec in self.measurement.get("fields", [])]

    def probe_points(self, curve: ClosedCurve) -> np.ndarray:
        pr = self.probes
        if pr.get("kind", "annulus") == "circle":
            return circle_probes(pr["radius"], pr.get("count", 64))
        return default_probes(curve, pr.get("count", 64), pr.get("inner", 1.5), pr.get("outer", 3.0),
                              seed=self.seed)

    def threshold(self, key: str) -> float:
        return float(self.thresholds.get(key, DEFAULT_THRESHOLDS[key]))

    @property
    def solve_epsilon(self) -> float:
        return float(self.epsilon if self.epsilon is not None else max(self.epsilon_ladder))
