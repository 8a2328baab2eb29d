"""Link-activation scheduling under local non-interference.

Synthesizes lasso schedules for static sensor networks in which an active
link silences every link sharing an endpoint while all links keep firing
infinitely often; quantifies information propagation under a schedule with
Laplacian consensus simulation.
"""

from .buchi import Gba, Nba, nba_accepts_lasso, translate_to_gba, translate_to_nba
from .consensus import (
    ConsensusTrajectory,
    check_joint_connectivity,
    cluster_count,
    efficiency,
    liveness_check,
    run,
    step,
)
from .errors import BudgetExceededError, CoverageError, InfeasibleError, StitchHorizonError
from .hlnc import (
    AuditReport,
    CommandPlan,
    HierarchicalPlan,
    LocalPlan,
    audit_feasibility,
    plan_command_activations,
    plan_hlnc,
    plan_local,
    stitch,
)
from .ltl import (
    AtomicProp,
    LtlFormula,
    build_fairness,
    build_phi,
    build_phi_ij,
    build_psi,
    eval_lasso,
    link_prop,
    node_prop,
    parse,
    semantic_laplacian_step,
    to_nnf,
)
from .network import (
    CommandLayer,
    Graph,
    SensorNetwork,
    build_command_graph,
    build_geometric_graph,
    connected_components,
    coverage_check,
    k_hop_subgraph,
    kmeans_place,
    link,
    link_neighborhood,
    local_subgraph,
    random_geometric_network,
)
from .oracle import brute_force_optimal, verify_translation
from .planner import (
    find_optimal_lasso,
    plan_centralized,
    plan_specialized_lnc,
    scc_decompose,
)
from .ts import (
    JaccardCost,
    HausdorffCost,
    LinkTs,
    ProductTs,
    Schedule,
    TableCost,
    build_link_ts,
    build_product_ts,
    cost_to_go,
    jaccard_cost,
    plan_cost,
    sequential_schedule,
)

__version__ = "0.1.0"
