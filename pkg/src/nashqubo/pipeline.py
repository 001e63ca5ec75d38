"""One-call compilation from a game to a ready-to-sample model."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ParameterError
from .games import BimatrixGame
from .qp import ScaleReport, SlackedProgram, add_slacks, build_qp, integerize
from .qubo import (
    PenaltyConfig,
    QuboModel,
    ScalarEncoding,
    compile_qubo,
    derive_bounds,
)
from .rationals import Rationalish, parse_rational


@dataclass(frozen=True)
class CompiledGame:
    """Everything produced on the way from a game to its binary model.

    Kept together because decoding and certification need the slacked
    program and the row scale factors, not just the model.
    """

    game: BimatrixGame
    program: SlackedProgram
    scale: ScaleReport
    encodings: dict[str, ScalarEncoding]
    penalties: PenaltyConfig
    model: QuboModel

    @property
    def objective_scale(self) -> Fraction:
        """Multiplier the objective picked up during integerization."""
        return Fraction(self.scale.objective)


def sufficient_penalty_weight(bundle: CompiledGame) -> Fraction:
    """Uniform weight that provably pins the ground energy at zero.

    The payoff part of the energy is bounded by the largest entry of
    m + n minus both encoding lower bounds, times the objective scale.
    Every infeasible assignment violates some integerized constraint by
    at least one whole unit, so its squared penalty is at least the
    weight. At or above this weight no infeasible state can dip below
    the zero energy of an exactly encoded equilibrium.
    """
    game = bundle.game
    peak = max(
        game.m[i][j] + game.n[i][j]
        for i in range(game.n_rows)
        for j in range(game.n_cols)
    )
    return bundle.objective_scale * (
        peak
        - Fraction(bundle.encodings["alpha"].lower)
        - Fraction(bundle.encodings["beta"].lower)
    )


def compile_game(
    game: BimatrixGame,
    *,
    slack_mode: str = "per-row",
    theta1: Rationalish = 1,
    theta2: Rationalish = 1,
    lam: Rationalish = 1,
    phi: Rationalish = 1,
    bits_alpha: int | None = None,
    bits_beta: int | None = None,
) -> CompiledGame:
    """Run the whole compilation chain with one set of knobs.

    lam and phi are applied uniformly to every constraint row of the
    respective player. bits_alpha and bits_beta override the derived
    encoding widths; narrower widths can make some bound values, and
    with them some equilibria, unrepresentable.
    """
    scaled, scale = integerize(build_qp(game))
    program = add_slacks(scaled, mode=slack_mode)
    encodings = {e.name: e for e in derive_bounds(program)}
    for name, bits in (("alpha", bits_alpha), ("beta", bits_beta)):
        if bits is not None:
            if bits < 1:
                raise ParameterError(f"{name} needs at least one bit")
            encodings[name] = ScalarEncoding(
                name=name, lower=encodings[name].lower, bits=bits
            )
    penalties = PenaltyConfig(
        theta1=parse_rational(theta1),
        theta2=parse_rational(theta2),
        lam=(parse_rational(lam),) * len(program.rows_p1),
        phi=(parse_rational(phi),) * len(program.rows_p2),
    )
    model = compile_qubo(program, encodings, penalties)
    return CompiledGame(
        game=game,
        program=program,
        scale=scale,
        encodings=encodings,
        penalties=penalties,
        model=model,
    )
