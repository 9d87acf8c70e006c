"""Scenario definition, file format and generators.

A scenario is an ordered footstep sequence plus friction and timing
parameters.  Footsteps are rectangular patches given by a pose and a
(length, width) shape; the loader expands each one to its four corner
contact points with the patch normal.  Files are JSON documents with a
versioned schema field; unknown fields are rejected so that typos surface
as errors instead of silently meaning nothing.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .contacts import Contact
from .fsm import PhaseStep

__all__ = [
    "SCENARIO_SCHEMA",
    "ScenarioError",
    "Footstep",
    "Scenario",
    "load_scenario",
    "save_scenario",
    "make_flat_walk",
    "generate_staircase",
    "rotation_rpy",
]

SCENARIO_SCHEMA = "conewalk-scenario@1"
DEFAULT_FRICTION = 0.7
DEFAULT_SHAPE = (0.22, 0.13)  # foot length x width, m


class ScenarioError(ValueError):
    """Scenario parse/validation failure, carrying the offending field."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"scenario field '{field_name}': {message}")


def rotation_rpy(roll: float, pitch: float, yaw: float) -> np.ndarray:
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


@dataclass(frozen=True)
class Footstep:
    foot: str
    position: np.ndarray
    rpy: tuple[float, float, float] = (0.0, 0.0, 0.0)
    shape: tuple[float, float] = DEFAULT_SHAPE

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        if self.foot not in ("L", "R"):
            raise ScenarioError("foot", f"must be 'L' or 'R', got {self.foot!r}")
        if self.position.shape != (3,):
            raise ScenarioError("position", "must be a 3-vector")
        if len(self.rpy) != 3:
            raise ScenarioError("rpy", "must be (roll, pitch, yaw)")
        if len(self.shape) != 2 or min(self.shape) <= 0:
            raise ScenarioError("shape", "must be positive (length, width)")

    @property
    def rotation(self) -> np.ndarray:
        return rotation_rpy(*self.rpy)

    @property
    def normal(self) -> np.ndarray:
        return self.rotation[:, 2]

    def corners(self) -> np.ndarray:
        lx, ly = self.shape[0] / 2.0, self.shape[1] / 2.0
        local = np.array([[sx * lx, sy * ly, 0.0] for sx in (1, -1) for sy in (1, -1)])
        return local @ self.rotation.T + self.position

    def contacts(self, mu: float, edges: int = 4) -> tuple[Contact, ...]:
        n = self.normal / np.linalg.norm(self.normal)
        return tuple(Contact(position=c, normal=n, mu=mu, edges=edges) for c in self.corners())


@dataclass
class Scenario:
    name: str
    footsteps: list[Footstep]
    friction: float = DEFAULT_FRICTION
    t_ss: float = 1.0
    t_ds: float = 0.5
    com_height: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if len(self.footsteps) < 2:
            raise ScenarioError("footsteps", "need at least two footsteps")
        if not self.friction > 0:
            raise ScenarioError("friction", "must be positive")
        if not (self.t_ss > 0 and self.t_ds > 0):
            raise ScenarioError("t_ss/t_ds", "phase durations must be positive")
        if not self.com_height > 0:
            raise ScenarioError("com_height", "must be positive")

    def phase_steps(self, edges: int = 4) -> list[PhaseStep]:
        """Footsteps expanded to contact sets with COM targets above them."""
        lift = np.array([0.0, 0.0, self.com_height])
        return [
            PhaseStep(foot=f.foot, contacts=f.contacts(self.friction, edges), target=f.position + lift)
            for f in self.footsteps
        ]

    def to_dict(self) -> dict:
        return {
            "schema": SCENARIO_SCHEMA,
            "name": self.name,
            "friction": self.friction,
            "t_ss": self.t_ss,
            "t_ds": self.t_ds,
            "com_height": self.com_height,
            "seed": self.seed,
            "footsteps": [
                {
                    "foot": f.foot,
                    "position": list(map(float, f.position)),
                    "rpy": list(map(float, f.rpy)),
                    "shape": list(map(float, f.shape)),
                }
                for f in self.footsteps
            ],
        }


_TOP_FIELDS = {"schema", "name", "friction", "t_ss", "t_ds", "com_height", "seed", "footsteps"}
_STEP_FIELDS = {"foot", "position", "rpy", "shape"}


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario document must be a JSON object")
    unknown = set(data) - _TOP_FIELDS
    if unknown:
        raise ScenarioError(sorted(unknown)[0], "unknown field")
    if data.get("schema") != SCENARIO_SCHEMA:
        raise ScenarioError("schema", f"expected {SCENARIO_SCHEMA!r}, got {data.get('schema')!r}")
    if "friction" not in data:
        warnings.warn(f"scenario missing 'friction'; defaulting to {DEFAULT_FRICTION}")
    raw_steps = data.get("footsteps")
    if not isinstance(raw_steps, list):
        raise ScenarioError("footsteps", "must be a list")
    steps = []
    for i, rs in enumerate(raw_steps):
        unknown = set(rs) - _STEP_FIELDS
        if unknown:
            raise ScenarioError(f"footsteps[{i}].{sorted(unknown)[0]}", "unknown field")
        try:
            steps.append(
                Footstep(
                    foot=rs.get("foot", "?"),
                    position=rs.get("position", ()),
                    rpy=tuple(rs.get("rpy", (0.0, 0.0, 0.0))),
                    shape=tuple(rs.get("shape", DEFAULT_SHAPE)),
                )
            )
        except ScenarioError as e:
            raise ScenarioError(f"footsteps[{i}].{e.field}", str(e)) from None
    return Scenario(
        name=str(data.get("name", "unnamed")),
        footsteps=steps,
        friction=float(data.get("friction", DEFAULT_FRICTION)),
        t_ss=float(data.get("t_ss", 1.0)),
        t_ds=float(data.get("t_ds", 0.5)),
        com_height=float(data.get("com_height", 0.8)),
        seed=int(data.get("seed", 0)),
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise ScenarioError("<json>", f"line {e.lineno}: {e.msg}") from None
    return scenario_from_dict(data)


def save_scenario(scenario: Scenario, path):
    with open(path, "w") as fh:
        json.dump(scenario.to_dict(), fh, indent=2)
        fh.write("\n")


def make_flat_walk(
    n_steps: int = 4,
    step_length: float = 0.25,
    half_spread: float = 0.09,
    friction: float = DEFAULT_FRICTION,
    shape=DEFAULT_SHAPE,
    name: str = "flat-walk",
) -> Scenario:
    """Straight flat-ground footstep sequence, feet alternating L/R."""
    steps = []
    for i in range(n_steps):
        foot = "L" if i % 2 == 0 else "R"
        y = half_spread if foot == "L" else -half_spread
        steps.append(Footstep(foot=foot, position=[i * step_length, y, 0.0], shape=tuple(shape)))
    return Scenario(name=name, footsteps=steps, friction=friction)


def generate_staircase(
    seed: int,
    steps: int = 26,
    radius: float = 1.4,
    height: float = 1.4,
    tilt_range: float = 0.5,
    half_spread: float = 0.09,
    friction: float = DEFAULT_FRICTION,
    shape=DEFAULT_SHAPE,
) -> Scenario:
    """Circular staircase with randomly rolled/pitched/yawed steps.

    Footsteps wind once around a circle of the given average radius, gaining
    ``height`` altitude in total; each step's orientation is perturbed by
    angles drawn uniformly from +-tilt_range about every axis (the yaw
    perturbation adds to the tangent heading).  Deterministic per seed.
    """
    if steps < 2:
        raise ScenarioError("steps", "need at least two footsteps")
    rng = np.random.default_rng(seed)
    out = []
    for i in range(steps):
        theta = 2.0 * math.pi * i / steps
        foot = "L" if i % 2 == 0 else "R"
        # Walking counter-clockwise: the left foot is on the inner circle.
        r_i = radius + (-half_spread if foot == "L" else half_spread)
        z = height * i / (steps - 1)
        pos = [r_i * math.cos(theta), r_i * math.sin(theta), z]
        tilt = rng.uniform(-tilt_range, tilt_range, size=3) if tilt_range > 0 else np.zeros(3)
        yaw = theta + math.pi / 2.0 + tilt[2]
        out.append(Footstep(foot=foot, position=pos, rpy=(tilt[0], tilt[1], yaw), shape=tuple(shape)))
    return Scenario(
        name=f"staircase-seed{seed}",
        footsteps=out,
        friction=friction,
        seed=seed,
    )
