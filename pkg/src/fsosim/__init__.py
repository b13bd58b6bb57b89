"""fsosim: a deterministic simulator for fractal social organizations.

The library classifies systems along a horizontal (feature) and a vertical
(nested hierarchy) dimension, runs the role-flow enrollment protocol with
cross-level exception escalation and SON formation, and drives an adaptive
resource-dimensioning loop under a global energy budget, with score-based
enrollment memory and permanentification of recurring SONs.
"""

from .allocation import (
    AllocationDecision,
    AllocationState,
    Situation,
    ThresholdPolicy,
    Zone,
    ZoneKind,
    assess,
    dtof,
    min_threshold,
    step,
)
from .classification import (
    BehaviorClass,
    ComparisonReport,
    ContextUniverse,
    FitReport,
    OrderRelation,
    PerceptionSet,
    SystemicClass,
    SystemicFeatures,
    behavior_ceiling,
    classify,
    compare_systems,
    environmental_fit,
    perception_order,
)
from .hierarchy import (
    Hierarchy,
    HierarchyError,
    HierarchySpec,
    Level,
    Node,
    NodeState,
    build,
    punctualize,
    systemic_levels,
    validate,
)
from .knowledge import (
    RecurrenceTracker,
    ScoreLedger,
    observe_son,
    permanentify,
    rank,
    record_outcome,
)
from .roleflow import (
    EnergyBudget,
    EnrollmentResult,
    ExecutionOutcome,
    OutcomeKind,
    Protocol,
    RoleException,
    RoleFlowEngine,
    SON,
)
from .scenario import Event, EventKind, Scenario, ScenarioError, load
from .simulation import MetricsReport, choose_behavior, publish, ripple, run
from .sonspace import CapabilityMatrix, count_assignments, enumerate_assignments

__version__ = "0.1.0"
