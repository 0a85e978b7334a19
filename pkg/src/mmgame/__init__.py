"""Repeated market-making games with independent Q-learning agents.

A numpy toolkit for a discrete-time dealer game: agents quote ask/bid spreads
from a shared grid, market orders arrive with spread-dependent probability,
and the best quotes split the flow. The package materializes exact payoff
tensors, classifies pure Nash and cooperative joint actions, solves the
Boltzmann-selection fixed point with contraction certificates, and trains
independent tabular learners (optionally with one-period memory or hard
inventory-skew overrides) under reproducible seeding.
"""

from .analysis import (
    EquilibriumReport,
    FixedPointError,
    FixedPointResult,
    LimitProfile,
    apply_expected_update,
    boltzmann_policy,
    contraction_coefficient,
    cooperative_strategies,
    equilibrium_report,
    fixed_point_q,
    infinite_agent_limit,
    pure_nash_equilibria,
    separability_check,
    theoretical_action_probabilities,
    two_spread_crossings,
)
from .config import (
    AnalysisConfig,
    ConfigError,
    ExperimentSpec,
    GameConfig,
    TrainingConfig,
    load_spec,
    save_spec,
)
from .engine import (
    BatchResult,
    MarketStep,
    RngBundle,
    RunRecord,
    SkewRule,
    TrainSettings,
    run_batch,
    run_instance,
    simulate_frozen,
    step,
)
from .learning import (
    AgentState,
    LearningRateSchedule,
    decode_joint_state,
    encode_joint_state,
    greedy_policy,
    make_agent,
    select_action,
    update_stateless,
    update_with_memory,
)
from .market import (
    ArrivalModel,
    InventoryPenalty,
    JointAction,
    PayoffTensor,
    SpreadGrid,
    arrival_probability,
    build_payoff_tensor,
    expected_inventory_penalty,
    expected_side_reward,
    tensor_to_csv,
)
from .presets import PRESETS, get_preset, preset_names

__version__ = "0.1.0"
