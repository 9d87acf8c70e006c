"""conewalk: contact-stability cones and tube-constrained preview control.

Pipeline: frictional contact sets -> wrench cone (halfspace rows are dual
twists) -> per-position cones of feasible COM accelerations -> trajectory-
tube intersection cones -> linear preview control, with every accepted
control cross-checked against a contact-force existence LP.
"""

from .geometry import DualTwist, Screw, dual_twist_at, screw_pairing, transport_moment
from .solvers import LPResult, LPStatus, QPResult, QPStatus, lp_solve, qp_solve

__version__ = "0.1.0"
