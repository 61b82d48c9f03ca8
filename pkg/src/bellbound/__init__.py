"""Detection-efficiency bounds of Bell tests in no-signaling theories.

Modular Bell functionals and no-signaling boxes, an exhaustive local-bound
oracle, and an exact-rational LP test of membership in the local polytope.
"""

from .behavior import (
    Behavior,
    BehaviorError,
    NoSignalingReport,
    Scenario,
    apply_loss,
    check_no_signaling,
    marginal,
    mix,
)
from .bounds import (
    bipartite_bound,
    bounds_table,
    min_prime_geq,
    min_prime_gt,
    multipartite_lower,
    multipartite_upper,
)
from .inequality import BellFunctional, build_bipartite, build_multipartite, evaluate
from .lhv_oracle import LhvMaxResult, local_bound_certificate, max_bell_value
from .local_polytope import CriticalEta, Feasible, Separating, critical_eta, is_local
from .strategies import (
    DeterministicStrategy,
    LocalModel,
    degrade_model,
    deterministic_behavior,
    enumerate_deterministic,
    model_behavior,
    modular_box_bipartite,
    modular_box_multipartite,
)

__version__ = "0.1.0"
