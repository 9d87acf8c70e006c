"""Point-mass walking simulation with per-tick ground-truth validation.

Each control tick: advance the state machine (double supports wait for the
COM to cover the next stance's equilibrium polygon), build the preview
tubes and their stance cones, solve the preview QP, apply the first
control for one tick, and check the applied acceleration against the
contact-force existence LP, which is the ground truth the geometric
pipeline must never contradict.  Infeasibilities never raise: a failed QP
falls back to a decayed hold while the phase is extended, and a simulation
that cannot continue terminates with a typed cause in its trace.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .contacts import ContactSet, WrenchCone, compute_cwc, wrench_realizable
from .fsm import LocomotionFsm, PreviewInputs, condition_w_gate, fsm_preview_inputs
from .geometry import Screw
from .preview import ComState, PreviewProblem, PreviewSegment, solve_preview
from .regions import GRAVITY_VEC, StaticPolygon, static_polygon
from .scenario import Scenario
from .tubes import TubeCone, build_tube, tube_cone

__all__ = [
    "TRACE_SCHEMA",
    "SimConfig",
    "TickRecord",
    "Trace",
    "validate_tick",
    "run_simulation",
    "load_trace",
    "save_trace",
]

TRACE_SCHEMA = "conewalk-trace@1"


@dataclass(frozen=True)
class SimConfig:
    n_preview: int = 10
    eps_reg: float = 1e-3
    tube_radius: float = 0.05
    rate_hz: float = 100.0
    mass: float = 38.0
    pyramid_edges: int = 4
    arrival_pos_tol: float = 0.02
    arrival_vel_tol: float = 0.05
    fallback_decay: float = 0.5
    max_time: float | None = None
    qp_fail_window: float | None = None  # defaults to the scenario's t_ds

    def to_dict(self) -> dict:
        return {
            "n_preview": self.n_preview,
            "eps_reg": self.eps_reg,
            "tube_radius": self.tube_radius,
            "rate_hz": self.rate_hz,
            "mass": self.mass,
            "pyramid_edges": self.pyramid_edges,
            "arrival_pos_tol": self.arrival_pos_tol,
            "arrival_vel_tol": self.arrival_vel_tol,
            "fallback_decay": self.fallback_decay,
            "max_time": self.max_time,
            "qp_fail_window": self.qp_fail_window,
        }


@dataclass
class TickRecord:
    t: float
    p: np.ndarray
    v: np.ndarray
    u: np.ndarray
    phase: str
    stance: str
    qp_status: str
    force_lp_status: str
    min_cone_slack: float | None
    w_extended: bool
    kkt_residual: float | None
    timing_ms: dict

    def to_dict(self) -> dict:
        return {
            "t": round(self.t, 9),
            "p": [float(x) for x in self.p],
            "v": [float(x) for x in self.v],
            "u": [float(x) for x in self.u],
            "phase": self.phase,
            "stance": self.stance,
            "qp_status": self.qp_status,
            "force_lp_status": self.force_lp_status,
            "min_cone_slack": self.min_cone_slack,
            "w_extended": self.w_extended,
            "kkt_residual": self.kkt_residual,
            "timing_ms": self.timing_ms,
        }


@dataclass
class Trace:
    scenario: dict
    config: dict
    ticks: list[TickRecord] = field(default_factory=list)
    status: str = "running"
    cause: str | None = None
    end_time: float = 0.0
    stats: dict = field(default_factory=dict)

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    def infeasible_ticks(self) -> int:
        return sum(1 for tk in self.ticks if tk.force_lp_status != "feasible")


def validate_tick(cs: ContactSet, mass: float, p, u):
    """Ground-truth check: do feasible contact forces realize this motion?

    The net contact wrench of a point mass accelerating at u with zero
    angular momentum is f = m (u - g), tau = 0 about the COM.  Returns the
    stacked force witness, or None when no feasible forces exist.
    """
    p = np.asarray(p, dtype=float)
    f = mass * (np.asarray(u, dtype=float) - GRAVITY_VEC)
    wrench = Screw(resultant=f, moment=np.zeros(3), ref_point=p)
    return wrench_realizable(cs, wrench)


class _Caches:
    """Per-stance wrench cones and equilibrium polygons, one per phase."""

    def __init__(self, fsm: LocomotionFsm, edges: int):
        self.fsm = fsm
        self.edges = edges
        self._cwc: dict[tuple[str, int], WrenchCone] = {}
        self._sp: dict[tuple[str, int], StaticPolygon] = {}

    def cwc(self, key) -> WrenchCone:
        if key not in self._cwc:
            self._cwc[key] = compute_cwc(self.fsm.stance_contacts(key))
        return self._cwc[key]

    def polygon(self, key) -> StaticPolygon:
        if key not in self._sp:
            self._sp[key] = static_polygon(self.cwc(key))
        return self._sp[key]


def _build_segments(fsm: LocomotionFsm, caches: _Caches, inputs: PreviewInputs, p0, radius, n_steps):
    """Tube cones for the preview segments, shrinking the tube when empty.

    Returns (segments, k_rem, label).  An empty outer cone drops the second
    segment (the walk waits under the current stance's constraints); an
    empty inner cone after all shrink attempts returns None, which the
    caller treats like an infeasible QP.
    """
    from .fsm import fsm_preview_inputs as rebuild

    for attempt_radius in (radius, radius / 2.0, radius / 4.0):
        if attempt_radius != radius:
            inputs = rebuild(fsm, p0, n_steps, radius=attempt_radius)
        cones = [tube_cone(caches.cwc(k), t) for k, t in zip(inputs.segment_keys, inputs.tubes)]
        if cones[0].kind != "cone":
            continue
        if len(cones) == 2 and cones[1].kind != "cone":
            # Wait semantics: constrain the whole window by the current
            # stance over the full-span tube instead of switching.
            full = build_tube(np.asarray(p0, dtype=float), inputs.p_target, attempt_radius)
            cone_full = tube_cone(caches.cwc(inputs.segment_keys[0]), full)
            if cone_full.kind != "cone":
                continue
            return [PreviewSegment(cone_full, full)], None, inputs, "outer_dropped"
        segments = [PreviewSegment(c, t) for c, t in zip(cones, inputs.tubes)]
        if len(segments) == 1:
            return segments, None, inputs, "ok"
        dt = inputs.horizon / n_steps
        k_rem = min(int(inputs.switch_time / dt), n_steps - 1)
        return segments, k_rem, inputs, "ok"
    return None, None, inputs, "empty_cone"


def run_simulation(scenario: Scenario, config: SimConfig = SimConfig()) -> Trace:
    """Run the control loop until arrival, declared failure or timeout."""
    steps = scenario.phase_steps(edges=config.pyramid_edges)
    fsm = LocomotionFsm(steps, t_ss=scenario.t_ss, t_ds=scenario.t_ds)
    caches = _Caches(fsm, config.pyramid_edges)
    dt = 1.0 / config.rate_hz
    max_time = config.max_time
    if max_time is None:
        max_time = 10.0 + 3.0 * len(steps) * (scenario.t_ss + scenario.t_ds)
    qp_window = config.qp_fail_window if config.qp_fail_window is not None else scenario.t_ds

    p = (steps[0].target + steps[1].target) / 2.0
    v = np.zeros(3)
    final_target = steps[-1].target
    u_prev = np.zeros(3)
    qp_fail_time = 0.0
    max_kkt = 0.0

    trace = Trace(scenario=scenario.to_dict(), config=config.to_dict())
    t = 0.0

    def finish(status, cause=None):
        trace.status = status
        trace.cause = cause
        trace.end_time = t
        trace.stats = {
            "ticks": len(trace.ticks),
            "w_extensions": fsm.w_extensions,
            "phase_changes": fsm.phase_changes,
            "qp_failures": sum(1 for tk in trace.ticks if tk.qp_status != "optimal"),
            "max_kkt_residual": max_kkt,
            "final_distance": float(np.linalg.norm(p - final_target)),
            "final_speed": float(np.linalg.norm(v)),
        }
        return trace

    while t < max_time:
        timings: dict[str, float] = {}
        t_total0 = time.perf_counter()

        # Phase bookkeeping; double supports wait for the equilibrium gate.
        t0 = time.perf_counter()
        fsm.tick(dt)
        w_extended = False
        if fsm.wants_transition():
            if fsm.kind == "ss":
                fsm.advance()
            else:
                next_sp = caches.polygon(fsm.next_ss_key())
                if condition_w_gate(fsm, p, next_sp):
                    fsm.advance()
                else:
                    fsm.extend()
                    w_extended = True
        timings["fsm_ms"] = (time.perf_counter() - t0) * 1e3

        if (
            np.linalg.norm(p - final_target) <= config.arrival_pos_tol
            and np.linalg.norm(v) <= config.arrival_vel_tol
        ):
            return finish("completed")

        t0 = time.perf_counter()
        inputs = fsm_preview_inputs(fsm, p, config.n_preview, radius=config.tube_radius)
        timings["tubes_ms"] = (time.perf_counter() - t0) * 1e3

        t0 = time.perf_counter()
        built = _build_segments(fsm, caches, inputs, p, config.tube_radius, config.n_preview)
        segments, k_rem, inputs, seg_label = built
        timings["cones_ms"] = (time.perf_counter() - t0) * 1e3

        qp_status = "optimal"
        kkt = None
        min_cone_slack = None
        seq = None
        t0 = time.perf_counter()
        if segments is None:
            qp_status = "no_cone"
        else:
            pp = PreviewProblem(
                x0=ComState(p, v),
                xT=ComState(inputs.p_target, inputs.v_target),
                N=config.n_preview,
                dt=inputs.horizon / config.n_preview,
                segments=tuple(segments),
                k_rem=k_rem,
                eps=config.eps_reg,
            )
            seq = solve_preview(pp)
            if seq is None:
                qp_status = "infeasible"
        timings["qp_ms"] = (time.perf_counter() - t0) * 1e3

        if seq is not None:
            u = seq.first
            kkt = seq.kkt_residual
            max_kkt = max(max_kkt, kkt)
            slacks = segments[0].cone.reduced @ (u - GRAVITY_VEC)
            min_cone_slack = float(-slacks.max())
            u_prev = u
            qp_fail_time = 0.0
        else:
            # Failing closed: decay toward hover and extend the phase.
            u = config.fallback_decay * u_prev
            u_prev = u
            fsm.state.t_rem += dt
            qp_fail_time += dt
            if qp_fail_time > qp_window:
                return finish("failed", "qp_infeasible")

        t0 = time.perf_counter()
        witness = validate_tick(fsm.stance_contacts(), config.mass, p, u)
        timings["validate_ms"] = (time.perf_counter() - t0) * 1e3

        total = (time.perf_counter() - t_total0) * 1e3
        timings["other_ms"] = max(total - sum(timings.values()), 0.0)
        timings["total_ms"] = total

        kind, idx = fsm.stance_key()
        trace.ticks.append(
            TickRecord(
                t=t,
                p=p.copy(),
                v=v.copy(),
                u=np.asarray(u, dtype=float).copy(),
                phase=fsm.phase_name,
                stance=f"{kind}:{idx}",
                qp_status=qp_status if qp_status == "optimal" else f"{qp_status}",
                force_lp_status="feasible" if witness is not None else "infeasible",
                min_cone_slack=min_cone_slack,
                w_extended=w_extended,
                kkt_residual=kkt,
                timing_ms=timings,
            )
        )
        if witness is None:
            return finish("failed", "force_lp_infeasible")

        # Exact double-integrator step with the applied control.
        p = p + dt * v + 0.5 * dt * dt * np.asarray(u, dtype=float)
        v = v + dt * np.asarray(u, dtype=float)
        t += dt

    return finish("failed", "timeout")


def save_trace(trace: Trace, path):
    """Line-delimited trace: header, one record per tick, result footer."""
    with open(path, "w") as fh:
        header = {"schema": TRACE_SCHEMA, "scenario": trace.scenario, "config": trace.config}
        fh.write(json.dumps(header) + "\n")
        for tk in trace.ticks:
            fh.write(json.dumps(tk.to_dict()) + "\n")
        footer = {
            "result": {
                "status": trace.status,
                "cause": trace.cause,
                "end_time": trace.end_time,
                "stats": trace.stats,
            }
        }
        fh.write(json.dumps(footer) + "\n")


def load_trace(path) -> Trace:
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("schema") != TRACE_SCHEMA:
        raise ValueError(f"not a {TRACE_SCHEMA} file: {path}")
    header = lines[0]
    trace = Trace(scenario=header["scenario"], config=header["config"])
    for row in lines[1:]:
        if "result" in row:
            trace.status = row["result"]["status"]
            trace.cause = row["result"]["cause"]
            trace.end_time = row["result"]["end_time"]
            trace.stats = row["result"]["stats"]
            continue
        trace.ticks.append(
            TickRecord(
                t=row["t"],
                p=np.array(row["p"]),
                v=np.array(row["v"]),
                u=np.array(row["u"]),
                phase=row["phase"],
                stance=row["stance"],
                qp_status=row["qp_status"],
                force_lp_status=row["force_lp_status"],
                min_cone_slack=row["min_cone_slack"],
                w_extended=row["w_extended"],
                kkt_residual=row["kkt_residual"],
                timing_ms=row["timing_ms"],
            )
        )
    return trace
