"""Discrete double-integrator preview dynamics and the stacked QP.

State x = (p, v) follows p+ = p + dt v + dt^2/2 u, v+ = v + dt u with the
COM acceleration u as control.  The preview problem minimizes the terminal
state error plus a small control regularization, subject to per-step
acceleration-cone rows (one matrix per stance segment, with a switch index
when the preview window crosses a phase change) and per-step tube rows
keeping predicted positions inside the trajectory tube.  Everything is
affine in the stacked control vector, so the problem is one dense QP.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .regions import GRAVITY_VEC
from .solvers import QPStatus, qp_solve
from .tubes import Tube, TubeCone

__all__ = [
    "ComState",
    "PreviewSegment",
    "PreviewProblem",
    "ControlSequence",
    "propagate",
    "stacked_dynamics",
    "assemble_qp",
    "solve_preview",
]


@dataclass(frozen=True)
class ComState:
    p: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.v])

    @staticmethod
    def from_vector(x) -> "ComState":
        x = np.asarray(x, dtype=float)
        return ComState(x[:3], x[3:])


def propagate(x0: ComState, controls, dt: float) -> list[ComState]:
    """Exact discrete rollout; returns x(1..N) for N stacked controls."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    out = []
    p, v = x0.p.copy(), x0.v.copy()
    for u in np.atleast_2d(np.asarray(controls, dtype=float)):
        p = p + dt * v + 0.5 * dt * dt * u
        v = v + dt * u
        out.append(ComState(p, v))
    return out


def stacked_dynamics(N: int, dt: float):
    """Transition powers Phi_k and stacked input maps Psi_k, k = 1..N.

    x(k) = Phi[k] x0 + Psi[k] U with U the stacked (3N,) control vector;
    Psi rows are zero-padded so every step shares one U layout.
    """
    I3 = np.eye(3)
    Phi = {}
    Psi = {}
    for k in range(1, N + 1):
        A = np.eye(6)
        A[:3, 3:] = k * dt * I3
        Phi[k] = A
        M = np.zeros((6, 3 * N))
        for j in range(k):
            M[:3, 3 * j : 3 * j + 3] = dt * dt * (k - j - 0.5) * I3
            M[3:, 3 * j : 3 * j + 3] = dt * I3
        Psi[k] = M
    return Phi, Psi


@dataclass(frozen=True)
class PreviewSegment:
    """Constraint data for a contiguous run of preview steps."""

    cone: TubeCone
    tube: Tube


@dataclass(frozen=True)
class PreviewProblem:
    """One receding-horizon instance.

    ``segments`` holds one entry (no stance switch inside the window) or two
    (switch after step ``k_rem``): controls u(k) and states x(k) with
    k <= k_rem use segment 0, later ones segment 1.
    """

    x0: ComState
    xT: ComState
    N: int
    dt: float
    segments: tuple[PreviewSegment, ...]
    k_rem: int | None = None
    eps: float = 1e-3
    gravity: np.ndarray = field(default_factory=lambda: GRAVITY_VEC.copy())

    def __post_init__(self):
        if self.N < 1 or not self.dt > 0:
            raise ValueError("need N >= 1 and dt > 0")
        if len(self.segments) == 2 and self.k_rem is None:
            raise ValueError("two segments require a switch index")

    def segment_for(self, k: int) -> PreviewSegment:
        if len(self.segments) == 1 or k <= self.k_rem:
            return self.segments[0]
        return self.segments[1]


def assemble_qp(pp: PreviewProblem):
    """Dense (H, f, A, b) of the preview QP over the stacked controls.

    Objective |x(N) - xT|^2 + eps |U|^2; constraints are the per-step cone
    rows on u(k) and the tube rows on the position part of x(k), both
    substituted through the stacked dynamics.
    """
    N = pp.N
    Phi, Psi = stacked_dynamics(N, pp.dt)
    x0 = pp.x0.as_vector()
    PsiN = Psi[N]
    drift = Phi[N] @ x0 - pp.xT.as_vector()
    H = 2.0 * (PsiN.T @ PsiN + pp.eps * np.eye(3 * N))
    f = 2.0 * (PsiN.T @ drift)

    rows = []
    rhs = []
    for k in range(N):
        seg = pp.segment_for(k)
        C = seg.cone.reduced
        block = np.zeros((C.shape[0], 3 * N))
        block[:, 3 * k : 3 * k + 3] = C
        rows.append(block)
        rhs.append(C @ pp.gravity)
    for k in range(1, N + 1):
        seg = pp.segment_for(k)
        A_t, b_t = seg.tube.hrep.A, seg.tube.hrep.b
        pos_map = Psi[k][:3]
        pos_drift = (Phi[k] @ x0)[:3]
        rows.append(A_t @ pos_map)
        rhs.append(b_t - A_t @ pos_drift)
    return H, f, np.vstack(rows), np.concatenate(rhs)


@dataclass(frozen=True)
class ControlSequence:
    u: np.ndarray
    states: list[ComState]
    objective: float
    kkt_residual: float

    @property
    def first(self) -> np.ndarray:
        return self.u[0]


def solve_preview(pp: PreviewProblem):
    """Optimal control sequence, or None when the QP is infeasible.

    Only u(0) is meant to be applied; the receding-horizon loop re-solves
    every tick.  The returned states are the exact rollout of the stored
    controls, and the QP's KKT residual is surfaced for the acceptance
    checks.
    """
    H, f, A, b = assemble_qp(pp)
    res = qp_solve(H, f, A, b)
    if res.status is not QPStatus.OPTIMAL:
        return None
    U = res.x.reshape(pp.N, 3)
    states = propagate(pp.x0, U, pp.dt)
    err = states[-1].as_vector() - pp.xT.as_vector()
    objective = float(err @ err + pp.eps * (res.x @ res.x))
    return ControlSequence(u=U, states=states, objective=objective, kkt_residual=res.kkt_residual)
