"""LP and QP solver contracts used by every geometric module.

The LP is backed by scipy's HiGHS interface (deterministic for fixed input,
certified optimal/infeasible/unbounded).  The QP is a dense dual active-set
method for strictly convex problems: it starts from the unconstrained
minimum and adds violated constraints one at a time, taking partial steps
that keep all working-set multipliers nonnegative.  Problems here are small
(tens of variables, a few hundred rows), so plain dense linear algebra is
exact enough and fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "LPStatus",
    "LPResult",
    "lp_solve",
    "QPStatus",
    "QPResult",
    "qp_solve",
]

#: Feasibility tolerance for LP verdicts and membership slacks.
EPS_LP = 1e-9


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    x: np.ndarray | None = None
    value: float | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def lp_solve(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None) -> LPResult:
    """Minimize c.x subject to A_ub x <= b_ub and A_eq x = b_eq.

    Variables are free by default (no implicit nonnegativity).  The verdict
    is certified by the solver to tolerance ``EPS_LP``; identical inputs
    produce identical outputs.
    """
    c = np.asarray(c, dtype=float)
    if bounds is None:
        bounds = [(None, None)] * c.size
    res = linprog(
        c,
        A_ub=None if A_ub is None else np.asarray(A_ub, dtype=float),
        b_ub=None if b_ub is None else np.asarray(b_ub, dtype=float),
        A_eq=None if A_eq is None else np.asarray(A_eq, dtype=float),
        b_eq=None if b_eq is None else np.asarray(b_eq, dtype=float),
        bounds=bounds,
        method="highs",
        options={"presolve": True},
    )
    if res.status == 0:
        return LPResult(LPStatus.OPTIMAL, np.asarray(res.x, dtype=float), float(res.fun))
    if res.status == 2:
        return LPResult(LPStatus.INFEASIBLE)
    if res.status == 3:
        return LPResult(LPStatus.UNBOUNDED)
    raise RuntimeError(f"LP solver failed: status={res.status} message={res.message!r}")


class QPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class QPResult:
    status: QPStatus
    x: np.ndarray | None = None
    multipliers: np.ndarray | None = None
    kkt_residual: float | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is QPStatus.OPTIMAL


def _kkt_residual(H, f, A, b, x, lam) -> float:
    stat = np.abs(H @ x + f + (A.T @ lam if A is not None else 0.0)).max()
    if A is None or A.shape[0] == 0:
        return float(stat)
    s = A @ x - b
    feas = max(0.0, float(s.max()))
    comp = float(np.abs(lam * s).max()) if lam.size else 0.0
    return float(max(stat, feas, comp))


def qp_solve(H, f, A=None, b=None, tol=1e-10, max_iter=None) -> QPResult:
    """Minimize 0.5 x.H.x + f.x subject to A x <= b (dual active set).

    ``H`` must be positive definite when inequality constraints are present
    (the preview Hessian always is, thanks to its quadratic regularization);
    without constraints a positive semidefinite ``H`` is accepted and the
    minimum-norm stationary point is returned.  Returns ``INFEASIBLE`` with
    a Farkas-style certificate check when the constraints admit no point.
    """
    H = np.asarray(H, dtype=float)
    f = np.asarray(f, dtype=float)
    n = f.size

    if A is None or np.size(A) == 0:
        x = np.linalg.lstsq(H, -f, rcond=None)[0]
        return QPResult(QPStatus.OPTIMAL, x, np.zeros(0), _kkt_residual(H, f, None, None, x, np.zeros(0)))

    A = np.asarray(A, dtype=float).reshape(-1, n)
    b = np.asarray(b, dtype=float).reshape(-1)
    m = A.shape[0]
    if max_iter is None:
        max_iter = 100 + 10 * m

    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        raise ValueError("qp_solve with inequality constraints requires a positive definite H")
    Hinv = np.linalg.inv(H)

    x = -Hinv @ f
    work: list[int] = []
    lam_w: list[float] = []
    scale = max(1.0, float(np.abs(b).max()), float(np.abs(A).max()))
    viol_tol = tol * scale

    iters = 0
    while True:
        s = A @ x - b
        p = int(np.argmax(s))
        if s[p] <= viol_tol:
            lam = np.zeros(m)
            for k, idx in enumerate(work):
                lam[idx] = lam_w[k]
            return QPResult(QPStatus.OPTIMAL, x, lam, _kkt_residual(H, f, A, b, x, lam), iters)

        a_p = A[p]
        lam_p = 0.0
        while True:
            iters += 1
            if iters > max_iter:
                raise RuntimeError("qp_solve: active-set iteration limit exceeded")
            if work:
                Aw = A[work]
                HinvAwT = Hinv @ Aw.T
                S = Aw @ HinvAwT
                r = np.linalg.solve(S, Aw @ (Hinv @ a_p))
                z = Hinv @ a_p - HinvAwT @ r
            else:
                r = np.zeros(0)
                z = Hinv @ a_p
            curvature = float(a_p @ z)

            # Dual blocking step: keep working-set multipliers nonnegative.
            t1 = np.inf
            k_block = -1
            for k in range(len(work)):
                if r[k] > tol:
                    tk = lam_w[k] / r[k]
                    if tk < t1 - 1e-15:
                        t1, k_block = tk, k

            if curvature <= tol * max(1.0, float(np.abs(a_p).max()) ** 2):
                if k_block < 0:
                    # a_p is a nonnegative combination of active rows with an
                    # incompatible offset: no feasible point exists.
                    return QPResult(QPStatus.INFEASIBLE, iterations=iters)
                t = t1
                x = x - t * z
                lam_w = [lw - t * rk for lw, rk in zip(lam_w, r)]
                lam_p += t
                del work[k_block], lam_w[k_block]
                continue

            t2 = (float(a_p @ x) - b[p]) / curvature
            t = min(t1, t2)
            x = x - t * z
            lam_w = [lw - t * rk for lw, rk in zip(lam_w, r)]
            lam_p += t
            if t2 <= t1:
                work.append(p)
                lam_w.append(lam_p)
                break
            del work[k_block], lam_w[k_block]
