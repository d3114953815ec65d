"""Numerics for two-player games with entangled strategies: exact classical
values, see-saw lower bounds on entangled values, a quantum-information
toolkit (fidelity, entropies, purifications), superposed-state diagnostics
with decoupling isometries, a randomized inequality suite, and Monte-Carlo
simulation of referee spot-checking protocols."""

from .config import DEFAULT_TOLS, VERSION, BudgetError, Tolerances
from .games import (
    AdviceEnsemble,
    ClassicalStrategy,
    Game,
    QuantumStrategy,
    chsh,
    classical_value,
    entangled_value_seesaw,
    game_from_json,
    game_to_json,
    is_free,
    is_projection,
    load_game,
    majority_game,
    repeat,
    save_game,
    strategy_win_probability,
    value_with_advice,
)
from .linalg import (
    DensityOperator,
    RegisterLayout,
    hermitian_eig,
    kron_density,
    partial_trace,
    permute_registers,
    trace_norm,
)
from .qinfo import (
    Povm,
    PureState,
    angle,
    conditional_entropy,
    fbar,
    fidelity,
    measure_register,
    min_relative_entropy,
    mutual_information,
    purify,
    relative_entropy,
    schmidt_decompose,
    uhlmann_partner,
    von_neumann_entropy,
)
from .random_states import haar_state, haar_unitary, random_mixed, rng_for
from .sic import (
    SuperposedState,
    build_decoupling,
    check_bound_at_delta_zero,
    rel_ent_game_shift_check,
    sic_lower_bound,
    sic_objective,
    sic_terms,
    special_case_report,
)

__version__ = VERSION

__all__ = [
    "AdviceEnsemble",
    "BudgetError",
    "ClassicalStrategy",
    "DEFAULT_TOLS",
    "DensityOperator",
    "Game",
    "Povm",
    "PureState",
    "QuantumStrategy",
    "RegisterLayout",
    "SuperposedState",
    "Tolerances",
    "VERSION",
    "angle",
    "build_decoupling",
    "check_bound_at_delta_zero",
    "chsh",
    "classical_value",
    "conditional_entropy",
    "entangled_value_seesaw",
    "fbar",
    "fidelity",
    "game_from_json",
    "game_to_json",
    "haar_state",
    "haar_unitary",
    "hermitian_eig",
    "is_free",
    "is_projection",
    "kron_density",
    "load_game",
    "majority_game",
    "measure_register",
    "min_relative_entropy",
    "mutual_information",
    "partial_trace",
    "permute_registers",
    "purify",
    "random_mixed",
    "rel_ent_game_shift_check",
    "relative_entropy",
    "repeat",
    "rng_for",
    "save_game",
    "schmidt_decompose",
    "sic_lower_bound",
    "sic_objective",
    "sic_terms",
    "special_case_report",
    "strategy_win_probability",
    "trace_norm",
    "uhlmann_partner",
    "value_with_advice",
    "von_neumann_entropy",
]
