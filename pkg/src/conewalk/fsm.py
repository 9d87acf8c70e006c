"""Locomotion finite state machine and preview-window timing rules.

The walk cycles single support -> double support -> single support on the
other foot, each phase owning one foot contact whose COM target sits a
fixed height above it.  Preview inputs depend on the time remaining in the
current phase:

1. late single support (t_rem < T_ss/2): preview through the upcoming
   double support into the middle of the next single support, targeting the
   next phase pair's foot, which keeps momentum flowing into the next step;
2. double support: preview to the middle of the upcoming single support,
   targeting this phase's foot;
3. early single support: preview the remaining phase time on the current
   target.

Cases 1 and 2 put a stance switch inside the preview window, hence two
constraint segments with a switch step.  A double-support phase may only
end once the COM projects strictly inside the next stance's equilibrium
polygon (the wait gate); until then it is extended.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contacts import Contact, ContactSet
from .regions import StaticPolygon
from .tubes import Tube, build_tube, extend_tube

__all__ = ["PhaseStep", "FsmState", "LocomotionFsm", "PreviewInputs", "fsm_preview_inputs", "condition_w_gate"]

REFERENCE_SPEED = 0.4  # m/s toward the target during nominal walking


@dataclass(frozen=True)
class PhaseStep:
    """One footstep: its contact points and the COM target above it."""

    foot: str  # "L" or "R"
    contacts: tuple[Contact, ...]
    target: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float))


@dataclass
class FsmState:
    """Snapshot of the machine: phase kind, owning step index, time left."""

    kind: str  # "ss" or "ds"
    idx: int
    t_rem: float

    @property
    def key(self) -> tuple[str, int]:
        return (self.kind, self.idx)


class LocomotionFsm:
    """Cycles ds(i) -> ss(i) -> ds(i+1) over a footstep sequence.

    ds(i) is double support on steps i-1 and i (weight moving to step i);
    ss(i) is single support on step i while the other foot swings to step
    i+1.  The final double support is terminal: the walk ends there, with
    the COM driven above the last step.
    """

    def __init__(self, steps: list[PhaseStep], t_ss: float = 1.0, t_ds: float = 0.5):
        if len(steps) < 2:
            raise ValueError("need at least two footsteps")
        if not (t_ss > 0 and t_ds > 0):
            raise ValueError("phase durations must be positive")
        self.steps = list(steps)
        self.t_ss = float(t_ss)
        self.t_ds = float(t_ds)
        self.state = FsmState(kind="ds", idx=1, t_rem=self.t_ds)
        self.w_extensions = 0
        self.phase_changes = 0

    # -- phase queries ------------------------------------------------------

    @property
    def kind(self) -> str:
        return self.state.kind

    @property
    def idx(self) -> int:
        return self.state.idx

    @property
    def t_rem(self) -> float:
        return self.state.t_rem

    @property
    def terminal(self) -> bool:
        return self.state.kind == "ds" and self.state.idx == len(self.steps) - 1

    @property
    def phase_name(self) -> str:
        return f"{self.state.kind}-{self.steps[self.state.idx].foot.lower()}"

    def stance_key(self, kind: str | None = None, idx: int | None = None) -> tuple[str, int]:
        kind = self.state.kind if kind is None else kind
        idx = self.state.idx if idx is None else idx
        return (kind, idx)

    def stance_contacts(self, key: tuple[str, int] | None = None) -> ContactSet:
        kind, idx = key if key is not None else self.state.key
        if kind == "ss":
            return ContactSet(self.steps[idx].contacts)
        return ContactSet(self.steps[idx - 1].contacts + self.steps[idx].contacts)

    def target(self, idx: int | None = None) -> np.ndarray:
        return self.steps[self.state.idx if idx is None else idx].target

    def next_ss_key(self) -> tuple[str, int]:
        """Single-support stance that the current double support leads to."""
        if self.state.kind != "ds":
            raise ValueError("next_ss_key is a double-support query")
        return ("ss", self.state.idx)

    # -- evolution ----------------------------------------------------------

    def tick(self, dt: float):
        if not self.terminal:
            self.state.t_rem -= dt

    def wants_transition(self) -> bool:
        return (not self.terminal) and self.state.t_rem <= 0.0

    def advance(self):
        """Move to the next phase, carrying any small time overshoot."""
        carry = min(self.state.t_rem, 0.0)
        if self.state.kind == "ds":
            self.state = FsmState(kind="ss", idx=self.state.idx, t_rem=self.t_ss + carry)
        else:
            self.state = FsmState(kind="ds", idx=self.state.idx + 1, t_rem=self.t_ds + carry)
        self.phase_changes += 1

    def extend(self):
        """Hold a double support whose wait gate is still closed."""
        self.state.t_rem = 0.0
        self.w_extensions += 1


def condition_w_gate(fsm: LocomotionFsm, com, next_sp: StaticPolygon) -> bool:
    """May a finished double support hand over to single support?

    True iff the COM's horizontal projection lies strictly inside the next
    single-support stance's static-equilibrium polygon; otherwise the
    double support is extended.
    """
    if fsm.kind != "ds":
        raise ValueError("the wait gate applies to double-support phases")
    com = np.asarray(com, dtype=float)
    return next_sp.contains(com[:2], margin=0.0)


@dataclass(frozen=True)
class PreviewInputs:
    """Everything the preview QP needs from the FSM for one tick."""

    horizon: float
    p_target: np.ndarray
    v_target: np.ndarray
    segment_keys: tuple[tuple[str, int], ...]
    tubes: tuple[Tube, ...]
    switch_time: float | None
    case: str


def fsm_preview_inputs(fsm: LocomotionFsm, p0, n_steps: int, radius: float = 0.05) -> PreviewInputs:
    """Horizon, target and stance-segment tubes per the timing rules.

    The switch time equals the remaining phase time; the caller converts it
    to a step index k = floor(t_switch / dt) (rounding down).  The outer
    tube extends the inner one to the preview target so their vertex sets
    nest.
    """
    p0 = np.asarray(p0, dtype=float)
    t_rem = max(fsm.t_rem, 0.0)
    if fsm.terminal:
        case = "terminal"
        horizon = fsm.t_ss / 2.0
        target = fsm.target()
        keys: tuple = (fsm.stance_key(),)
        switch = None
    elif fsm.kind == "ss" and t_rem < fsm.t_ss / 2.0:
        case = "1"
        horizon = t_rem + fsm.t_ds + fsm.t_ss / 2.0
        target = fsm.target(fsm.idx + 1)
        keys = (fsm.stance_key(), ("ds", fsm.idx + 1))
        switch = t_rem
    elif fsm.kind == "ds":
        case = "2"
        horizon = t_rem + fsm.t_ss / 2.0
        target = fsm.target()
        keys = (fsm.stance_key(), ("ss", fsm.idx))
        switch = t_rem
    else:
        case = "3"
        horizon = t_rem
        target = fsm.target()
        keys = (fsm.stance_key(),)
        switch = None

    horizon = max(horizon, n_steps * 1e-3)
    if switch is not None:
        dt = horizon / n_steps
        k_rem = int(switch / dt)
        if k_rem >= n_steps:
            keys = keys[:1]
            switch = None

    direction = target - p0
    norm = float(np.linalg.norm(direction))
    if case == "terminal" or norm < 1e-9:
        v_target = np.zeros(3)
    else:
        v_target = REFERENCE_SPEED * direction / norm

    if switch is None:
        tubes = (build_tube(p0, target, radius),)
        keys = keys[:1]
    else:
        frac = max(switch / horizon, 0.0)
        p_sw = p0 + frac * (target - p0)
        inner = build_tube(p0, p_sw, radius)
        tubes = (inner, extend_tube(inner, target))
    return PreviewInputs(
        horizon=horizon,
        p_target=target,
        v_target=v_target,
        segment_keys=keys,
        tubes=tubes,
        switch_time=switch,
        case=case,
    )
