"""The equilibrium conditions as a quadratic program, plus two rewrites.

A profile pair (p, q) on the two probability simplices is a Nash
equilibrium exactly when it maximizes

    p' (m + n) q - alpha - beta

subject to, for every row i and column j,

    sum_j m[i][j] q_j - alpha <= 0
    sum_i n[i][j] p_i - beta  <= 0
    sum_i p_i = 1,  sum_j q_j = 1

and the maximum value is zero. `integerize` clears denominators row by
row, and `add_slacks` converts the inequalities into equalities with
nonnegative slack variables ready for binary expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from math import lcm

from .errors import ParameterError
from .games import BimatrixGame, Matrix

SLACK_MODES = ("per-row", "paper-compat")


@dataclass(frozen=True)
class ConstraintRow:
    """One affine row over a vector variable plus an optional bound scalar.

    The row reads: sum(coeffs[k] * v_k) + scalar_coeff * scalar + constant,
    compared against zero. Inequality rows have constant 0; the simplex
    equality rows have scalar_coeff 0 and constant -1.
    """

    coeffs: tuple[Fraction, ...]
    scalar_coeff: Fraction
    constant: Fraction


@dataclass(frozen=True)
class QuadraticProgram:
    """The equilibrium program for one game.

    objective_quadratic[i][j] is the coefficient of p_i * q_j; the bound
    scalars enter the objective with objective_alpha and objective_beta
    (both -1 until integerization rescales the objective row).
    """

    objective_quadratic: Matrix
    objective_alpha: Fraction
    objective_beta: Fraction
    ineq_rows_p1: tuple[ConstraintRow, ...]
    ineq_rows_p2: tuple[ConstraintRow, ...]
    eq_simplex_p: ConstraintRow
    eq_simplex_q: ConstraintRow

    @property
    def n_rows(self) -> int:
        return len(self.eq_simplex_p.coeffs)

    @property
    def n_cols(self) -> int:
        return len(self.eq_simplex_q.coeffs)


@dataclass(frozen=True)
class ScaleReport:
    """Multiplier applied to the objective and to each inequality row."""

    objective: int
    p1_rows: tuple[int, ...]
    p2_rows: tuple[int, ...]


@dataclass(frozen=True)
class SlackedRow:
    """An equality row: coeffs over the vector variable, a bound scalar
    term, and one nonnegative slack with coefficient +1."""

    coeffs: tuple[Fraction, ...]
    scalar_name: str
    scalar_coeff: Fraction
    slack_name: str


@dataclass(frozen=True)
class SlackedProgram:
    """The integerized program with inequalities closed by slacks."""

    objective_quadratic: Matrix
    objective_alpha: Fraction
    objective_beta: Fraction
    rows_p1: tuple[SlackedRow, ...]
    rows_p2: tuple[SlackedRow, ...]
    eq_simplex_p: ConstraintRow
    eq_simplex_q: ConstraintRow
    slack_names: tuple[str, ...]
    mode: str

    @property
    def n_rows(self) -> int:
        return len(self.eq_simplex_p.coeffs)

    @property
    def n_cols(self) -> int:
        return len(self.eq_simplex_q.coeffs)


def build_qp(game: BimatrixGame) -> QuadraticProgram:
    """State the equilibrium conditions for a game as a quadratic program."""
    objective = tuple(
        tuple(game.m[i][j] + game.n[i][j] for j in range(game.n_cols))
        for i in range(game.n_rows)
    )
    rows_p1 = tuple(
        ConstraintRow(coeffs=game.m[i], scalar_coeff=Fraction(-1), constant=Fraction(0))
        for i in range(game.n_rows)
    )
    # the column player's rows range over p, one per column of n
    rows_p2 = tuple(
        ConstraintRow(
            coeffs=tuple(game.n[i][j] for i in range(game.n_rows)),
            scalar_coeff=Fraction(-1),
            constant=Fraction(0),
        )
        for j in range(game.n_cols)
    )
    return QuadraticProgram(
        objective_quadratic=objective,
        objective_alpha=Fraction(-1),
        objective_beta=Fraction(-1),
        ineq_rows_p1=rows_p1,
        ineq_rows_p2=rows_p2,
        eq_simplex_p=ConstraintRow(
            coeffs=(Fraction(1),) * game.n_rows,
            scalar_coeff=Fraction(0),
            constant=Fraction(-1),
        ),
        eq_simplex_q=ConstraintRow(
            coeffs=(Fraction(1),) * game.n_cols,
            scalar_coeff=Fraction(0),
            constant=Fraction(-1),
        ),
    )


def _row_factor(row: ConstraintRow) -> int:
    denominators = [c.denominator for c in row.coeffs]
    denominators.append(row.scalar_coeff.denominator)
    denominators.append(row.constant.denominator)
    return lcm(*denominators)


def _scale_row(row: ConstraintRow, factor: int) -> ConstraintRow:
    if factor == 1:
        return row
    return ConstraintRow(
        coeffs=tuple(c * factor for c in row.coeffs),
        scalar_coeff=row.scalar_coeff * factor,
        constant=row.constant * factor,
    )


def integerize(qp: QuadraticProgram) -> tuple[QuadraticProgram, ScaleReport]:
    """Clear denominators independently in the objective and each row.

    Every row is multiplied by the least common multiple of its
    coefficient denominators, including the bound-scalar coefficient, so
    its feasible set is unchanged. The objective row is scaled the same
    way, which rescales its value by a known positive factor.
    """
    obj_denoms = [c.denominator for row in qp.objective_quadratic for c in row]
    obj_denoms.append(qp.objective_alpha.denominator)
    obj_denoms.append(qp.objective_beta.denominator)
    obj_factor = lcm(*obj_denoms)

    p1_factors = tuple(_row_factor(r) for r in qp.ineq_rows_p1)
    p2_factors = tuple(_row_factor(r) for r in qp.ineq_rows_p2)

    scaled = QuadraticProgram(
        objective_quadratic=tuple(
            tuple(c * obj_factor for c in row) for row in qp.objective_quadratic
        ),
        objective_alpha=qp.objective_alpha * obj_factor,
        objective_beta=qp.objective_beta * obj_factor,
        ineq_rows_p1=tuple(
            _scale_row(r, f) for r, f in zip(qp.ineq_rows_p1, p1_factors)
        ),
        ineq_rows_p2=tuple(
            _scale_row(r, f) for r, f in zip(qp.ineq_rows_p2, p2_factors)
        ),
        eq_simplex_p=_scale_row(qp.eq_simplex_p, _row_factor(qp.eq_simplex_p)),
        eq_simplex_q=_scale_row(qp.eq_simplex_q, _row_factor(qp.eq_simplex_q)),
    )
    return scaled, ScaleReport(objective=obj_factor, p1_rows=p1_factors, p2_rows=p2_factors)


def add_slacks(qp: QuadraticProgram, mode: str = "per-row") -> SlackedProgram:
    """Close each inequality with a nonnegative slack variable.

    In "per-row" mode every row receives its own slack, which keeps the
    equality system exactly equivalent to the inequalities. In
    "paper-compat" mode all rows of one player share a single slack;
    that over-constrains the system (all rows are forced to be equally
    slack) and exists to reproduce the shared-slack penalty formulation.
    """
    if mode not in SLACK_MODES:
        raise ParameterError(f"unknown slack mode {mode!r}, expected one of {SLACK_MODES}")

    if mode == "per-row":
        p1_names = tuple(f"zeta{i + 1}" for i in range(len(qp.ineq_rows_p1)))
        p2_names = tuple(f"eta{j + 1}" for j in range(len(qp.ineq_rows_p2)))
    else:
        p1_names = ("zeta",) * len(qp.ineq_rows_p1)
        p2_names = ("eta",) * len(qp.ineq_rows_p2)

    rows_p1 = tuple(
        SlackedRow(coeffs=r.coeffs, scalar_name="alpha",
                   scalar_coeff=r.scalar_coeff, slack_name=name)
        for r, name in zip(qp.ineq_rows_p1, p1_names)
    )
    rows_p2 = tuple(
        SlackedRow(coeffs=r.coeffs, scalar_name="beta",
                   scalar_coeff=r.scalar_coeff, slack_name=name)
        for r, name in zip(qp.ineq_rows_p2, p2_names)
    )
    seen: dict[str, None] = {}
    for name in p1_names + p2_names:
        seen.setdefault(name)
    return SlackedProgram(
        objective_quadratic=qp.objective_quadratic,
        objective_alpha=qp.objective_alpha,
        objective_beta=qp.objective_beta,
        rows_p1=rows_p1,
        rows_p2=rows_p2,
        eq_simplex_p=qp.eq_simplex_p,
        eq_simplex_q=qp.eq_simplex_q,
        slack_names=tuple(seen),
        mode=mode,
    )
