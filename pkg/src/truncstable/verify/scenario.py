"""Scenario files: strict JSON schema for reproducible experiment runs.

A scenario pins everything about an experiment except the seed (supplied at
run time, so one file can drive many independent replications): process
parameters, domain geometry, simulation discretization, path budget, and
experiment-specific knobs.  Parsing is strict — unknown keys anywhere in
the document are errors naming the offending key, so a typo cannot
silently fall back to a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from ..domains import (
    Annulus,
    AxisBox,
    Ball,
    DomainShape,
    HalfspaceIntersection,
    Intersection,
    counterexample_domain,
)
from ..errors import ConfigError
from ..params import ProcessParams
from ..simulator import SimConfig
from .registry import EXPERIMENT_NAMES

__all__ = ["Scenario", "parse_scenario", "load_scenario"]


def _require_keys(obj: Any, where: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> None:
    if not isinstance(obj, Mapping):
        raise ConfigError(f"{where} must be a JSON object")
    for key in obj:
        if key not in required and key not in optional:
            raise ConfigError(f"unknown key {key!r} in {where}")
    for key in required:
        if key not in obj:
            raise ConfigError(f"missing required key {key!r} in {where}")


def _number(obj: Mapping, key: str, where: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number")
    return float(v)


def _integer(obj: Mapping, key: str, where: str) -> int:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key} must be an integer")
    return v


def _vector(obj: Mapping, key: str, d: int, where: str) -> np.ndarray:
    v = obj[key]
    if not isinstance(v, list) or len(v) != d or any(
        isinstance(c, bool) or not isinstance(c, (int, float)) for c in v
    ):
        raise ConfigError(f"{where}.{key} must be a list of {d} numbers")
    return np.array(v, dtype=float)


def _parse_domain(spec: Any, d: int, where: str = "domain") -> DomainShape:
    if not isinstance(spec, Mapping) or "kind" not in spec:
        raise ConfigError(f"{where} must be an object with a 'kind' tag")
    kind = spec["kind"]
    if kind == "ball":
        _require_keys(spec, where, ("kind", "center", "radius"))
        return Ball(_vector(spec, "center", d, where), _number(spec, "radius", where))
    if kind == "annulus":
        _require_keys(spec, where, ("kind", "center", "r_inner", "r_outer"))
        return Annulus(
            _vector(spec, "center", d, where),
            _number(spec, "r_inner", where),
            _number(spec, "r_outer", where),
        )
    if kind == "box":
        _require_keys(spec, where, ("kind", "low", "high"))
        return AxisBox(_vector(spec, "low", d, where), _vector(spec, "high", d, where))
    if kind == "polytope":
        _require_keys(spec, where, ("kind", "normals", "offsets", "interior_point"))
        normals = spec["normals"]
        offsets = spec["offsets"]
        if not isinstance(normals, list) or not isinstance(offsets, list):
            raise ConfigError(f"{where}.normals and {where}.offsets must be lists")
        try:
            return HalfspaceIntersection(
                np.array(normals, dtype=float),
                np.array(offsets, dtype=float),
                _vector(spec, "interior_point", d, where),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid polytope in {where}: {exc}") from exc
    if kind == "counterexample":
        _require_keys(spec, where, ("kind",))
        return counterexample_domain(d)
    if kind == "intersect":
        _require_keys(spec, where, ("kind", "shape", "ball"))
        ball = _parse_domain(spec["ball"], d, where + ".ball")
        if not isinstance(ball, Ball):
            raise ConfigError(f"{where}.ball must have kind 'ball'")
        return Intersection(_parse_domain(spec["shape"], d, where + ".shape"), ball)
    raise ConfigError(f"unknown domain kind {kind!r} in {where}")


@dataclass(frozen=True)
class Scenario:
    """A parsed, validated scenario document."""

    name: str
    params: ProcessParams
    domain: DomainShape
    epsilon: float
    time_step: float
    max_time: float
    boundary_refine: bool
    n: int
    experiment: dict
    raw: dict

    def sim_config(self, seed: int, **overrides) -> SimConfig:
        """Build the simulation config for one run at ``seed``.

        ``overrides`` replace discretization fields (used by the halving
        gates); everything else comes from the scenario.
        """
        base = dict(
            epsilon=self.epsilon,
            time_step=self.time_step,
            max_time=self.max_time,
            seed=seed,
            boundary_refine=self.boundary_refine,
        )
        base.update(overrides)
        return SimConfig(**base)


def parse_scenario(doc: Any) -> Scenario:
    _require_keys(
        doc, "scenario", ("name", "params", "domain", "sim", "estimate", "experiment")
    )
    name = doc["name"]
    if name not in EXPERIMENT_NAMES:
        raise ConfigError(
            f"unknown experiment name {name!r}; registered: "
            + ", ".join(EXPERIMENT_NAMES)
        )
    _require_keys(doc["params"], "params", ("d", "alpha"))
    params = ProcessParams(
        _integer(doc["params"], "d", "params"),
        _number(doc["params"], "alpha", "params"),
    )
    domain = _parse_domain(doc["domain"], params.d)
    _require_keys(
        doc["sim"], "sim", ("epsilon", "h"), ("max_time", "boundary_refine")
    )
    sim = doc["sim"]
    max_time = _number(sim, "max_time", "sim") if "max_time" in sim else 1e3
    refine = sim.get("boundary_refine", True)
    if not isinstance(refine, bool):
        raise ConfigError("sim.boundary_refine must be a boolean")
    _require_keys(doc["estimate"], "estimate", ("n",))
    n = _integer(doc["estimate"], "n", "estimate")
    if n < 1:
        raise ConfigError("estimate.n must be >= 1")
    experiment = doc["experiment"]
    if not isinstance(experiment, Mapping):
        raise ConfigError("experiment must be a JSON object")
    scenario = Scenario(
        name=name,
        params=params,
        domain=domain,
        epsilon=_number(sim, "epsilon", "sim"),
        time_step=_number(sim, "h", "sim"),
        max_time=max_time,
        boundary_refine=refine,
        n=n,
        experiment=dict(experiment),
        raw=json.loads(json.dumps(doc)),
    )
    # exercise the discretization invariants now so a bad scenario fails at
    # parse time, not mid-experiment
    scenario.sim_config(seed=0)
    return scenario


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return parse_scenario(doc)


def experiment_knobs(
    scenario: Scenario,
    required: tuple[str, ...],
    optional: Mapping[str, Any] = {},
) -> dict:
    """Validate and resolve the experiment block against a knob schema.

    Unknown knobs are errors; missing required knobs are errors; optional
    knobs fall back to the given defaults.
    """
    block = scenario.experiment
    _require_keys(
        block, f"experiment ({scenario.name})", required, tuple(optional)
    )
    out = dict(optional)
    out.update(block)
    return out
