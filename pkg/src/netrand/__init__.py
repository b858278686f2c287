"""Randomness certification in network causal scenarios.

Upper bounds on an eavesdropper's guessing probability are computed through
linear programs derived from nonfanout inflations of the scenario; explicit
feasibility programs (classical-parents and embedded-Bell models) certify
the absence of randomness instead.
"""

from .bilinear import BilinearProgram, FeasibleResult, Inconclusive, solve_bilinear
from .certify import (
    DisprovenByLP,
    NoRandomnessCertificate,
    RandomnessBound,
    distribution_fingerprint,
    export_guessing_lp,
    guessing_bound,
    import_guessing_solution,
    multiparty_extension,
    no_randomness_biloc_bob_embedded,
    no_randomness_biloc_charlie,
    no_randomness_triangle_bob_embedded,
    no_randomness_triangle_classical_parents,
    worst_guess_bound,
    write_report,
)
from .inflate import (
    ConstraintSystem,
    CrossPair,
    Inflation,
    InjectableSet,
    LevelVector,
    build_constraints,
    cross_inflation_sets,
    enumerate_inflations,
    injectable_sets,
)
from .lp import (
    LinearProgram,
    SolveResult,
    exact_equality_feasibility,
    export_mps,
    import_solution,
    solve_lp,
    verify_assignment,
)
from .networks import (
    EveScenario,
    Network,
    Party,
    Source,
    attach_eavesdropper,
    bell_network,
    bilocality_network,
    interrupt,
    load_network,
    save_network,
    triangle_network,
    validate,
)
from .tables import (
    ProbTable,
    born_probability,
    chsh_value,
    entanglement_swapping,
    fritz_bilocality,
    fritz_triangle,
    load_distribution,
    pr_triangle,
    save_distribution,
)

__version__ = "0.1.0"
