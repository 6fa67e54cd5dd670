"""Game-theoretic model of sharing k-anonymized data under linkage attacks."""

from .model import (
    ACTIONS,
    AttackAction,
    GameParams,
    InvalidParameterError,
    anonymization_cost,
    attack_success_prob,
    attacker_utility,
    breach_joint,
    breach_joint_expanded,
    breach_single,
    min_profit_factor,
    no_attack_utility,
    org_utility,
    trust_value,
)
from .static_game import (
    DegenerateGameWarning,
    Equilibrium,
    EquilibriumKind,
    EquilibriumNotFound,
    PayoffTensor,
    build_tensor,
    enumerate_equilibria,
    no_attack_pure_equilibrium,
    org_dominant_strategy,
    solve_equilibrium,
    solve_p_analytic,
    solve_p_numeric,
    solve_q_given_p,
)
from .oracle import GridCandidate, RegretReport, grid_search, verify, verify_profile
from .contracts import (
    ContractMenu,
    LongTermOffer,
    OrgType,
    ic_violations,
    long_term_offer,
    make_type,
    n_type_optimal,
    two_type_optimal,
    verify_menu,
)
from .repeated import (
    RoundRecord,
    SimulationAborted,
    SimulationTrace,
    binding_steps,
    collector_accounting,
    dynamic_org_utility,
    simulate,
    trust_trajectory,
    trust_update,
)

__version__ = "0.1.0"
