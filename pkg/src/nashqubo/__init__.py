"""Pure Nash equilibria of bimatrix games via QUBO compilation.

The pipeline: state the equilibrium conditions as a quadratic program,
clear denominators, turn inequalities into equalities with slack
variables, expand every bounded scalar in binary, and assemble a
penalized objective whose minimizers encode the equilibria. Local
samplers (exhaustive, simulated annealing, or an external subprocess)
minimize the model, and the analysis layer decodes and certifies the
results against a brute-force oracle.
"""

from .games import (
    BimatrixGame,
    PayoffPair,
    PureProfile,
    is_pure_nash,
    load_game,
    payoff,
    pure_nash_enumerate,
    scale_payoffs,
)

__version__ = "0.1.0"

__all__ = [
    "BimatrixGame",
    "PayoffPair",
    "PureProfile",
    "is_pure_nash",
    "load_game",
    "payoff",
    "pure_nash_enumerate",
    "scale_payoffs",
    "__version__",
]
