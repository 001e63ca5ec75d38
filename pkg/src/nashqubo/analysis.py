"""From raw assignments back to game statements.

decode reads a bit vector through the model's variable map and rebuilds
the strategy profile, the bound scalars, and the slack values. certify
then checks the decoded profile directly against the payoff matrices,
which keeps the verdict independent of everything the compiler and the
samplers did. histogram aggregates a whole sample set into per-profile
frequencies, with states that decode to no profile kept visible in their
own bucket.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .errors import CertificationError, DimensionError, ParameterError
from .games import BimatrixGame, PayoffPair, PureProfile, is_pure_nash, payoff
from .qp import SlackedProgram, SlackedRow
from .qubo import QuboModel, energy
from .samplers import SampleSet


@dataclass(frozen=True)
class _Layout:
    """Variable positions grouped by what they encode."""

    p_vars: tuple[int, ...]
    q_vars: tuple[int, ...]
    # scalar name -> (lower bound, var index per bit position)
    scalars: dict[str, tuple[Fraction, tuple[int, ...]]]


def _layout(model: QuboModel) -> _Layout:
    if not model.varmap:
        raise ParameterError("model carries no variable map, nothing to decode")
    p_positions: dict[int, int] = {}
    q_positions: dict[int, int] = {}
    lowers: dict[str, Fraction] = {}
    bit_positions: dict[str, dict[int, int]] = {}
    for var, spec in enumerate(model.varmap):
        if spec.role == "p":
            p_positions[spec.index] = var
        elif spec.role == "q":
            q_positions[spec.index] = var
        else:
            lowers[spec.scalar] = spec.lower
            bit_positions.setdefault(spec.scalar, {})[spec.index] = var
    scalars = {
        name: (lowers[name], tuple(bits[k] for k in sorted(bits)))
        for name, bits in bit_positions.items()
    }
    return _Layout(
        p_vars=tuple(p_positions[i] for i in sorted(p_positions)),
        q_vars=tuple(q_positions[j] for j in sorted(q_positions)),
        scalars=scalars,
    )


@dataclass(frozen=True)
class DecodedSolution:
    """One assignment read back as strategies, scalars, and residuals.

    feasible is True only when the profile is one-hot and every
    constraint row evaluates to zero; it is None when the row system was
    not supplied and the one-hot check alone cannot settle the question.
    """

    assignment: tuple[int, ...]
    p_bits: tuple[int, ...]
    q_bits: tuple[int, ...]
    profile: PureProfile | None
    alpha: Fraction
    beta: Fraction
    slacks: dict[str, Fraction]
    residuals_p1: tuple[Fraction, ...] | None
    residuals_p2: tuple[Fraction, ...] | None
    one_hot: bool
    feasible: bool | None


def _check_assignment(model: QuboModel, assignment: Sequence[int]) -> tuple[int, ...]:
    if len(assignment) != model.n_vars:
        raise DimensionError(
            f"assignment has {len(assignment)} bits, model has {model.n_vars} variables"
        )
    bits = tuple(int(b) for b in assignment)
    if any(b not in (0, 1) for b in bits):
        raise ParameterError("assignment entries must be 0 or 1")
    return bits


def _row_value(
    row: SlackedRow,
    vec: Sequence[int],
    scalar_value: Fraction,
    slacks: Mapping[str, Fraction],
) -> Fraction:
    if len(row.coeffs) != len(vec):
        raise DimensionError("constraint row length does not match the model")
    total = sum(
        (c for c, b in zip(row.coeffs, vec) if b), start=Fraction(0)
    )
    return total + row.scalar_coeff * scalar_value + slacks[row.slack_name]


def decode(
    model: QuboModel,
    assignment: Sequence[int],
    program: SlackedProgram | None = None,
) -> DecodedSolution:
    """Read an assignment back through the variable map.

    With the slacked program supplied, each constraint row is evaluated
    at the decoded point and feasibility is settled exactly.
    """
    bits = _check_assignment(model, assignment)
    layout = _layout(model)
    p_bits = tuple(bits[v] for v in layout.p_vars)
    q_bits = tuple(bits[v] for v in layout.q_vars)

    values: dict[str, Fraction] = {}
    for name, (lower, positions) in layout.scalars.items():
        values[name] = lower + sum(
            Fraction(2) ** k for k, v in enumerate(positions) if bits[v]
        )
    try:
        alpha = values.pop("alpha")
        beta = values.pop("beta")
    except KeyError as exc:
        raise ParameterError("model does not encode both bound scalars") from exc

    one_hot = sum(p_bits) == 1 and sum(q_bits) == 1
    profile = None
    if one_hot:
        profile = PureProfile(row=p_bits.index(1) + 1, col=q_bits.index(1) + 1)

    residuals_p1 = residuals_p2 = None
    if program is not None:
        residuals_p1 = tuple(
            _row_value(row, q_bits, alpha, values) for row in program.rows_p1
        )
        residuals_p2 = tuple(
            _row_value(row, p_bits, beta, values) for row in program.rows_p2
        )

    if not one_hot:
        feasible: bool | None = False
    elif program is None:
        feasible = None
    else:
        feasible = all(r == 0 for r in residuals_p1 + residuals_p2)

    return DecodedSolution(
        assignment=bits,
        p_bits=p_bits,
        q_bits=q_bits,
        profile=profile,
        alpha=alpha,
        beta=beta,
        slacks=values,
        residuals_p1=residuals_p1,
        residuals_p2=residuals_p2,
        one_hot=one_hot,
        feasible=feasible,
    )


def _required_slacks(
    rows: Sequence[SlackedRow],
    vec: Sequence[int],
    scalar_value: Fraction,
) -> dict[str, Fraction]:
    """Slack values that close every row exactly, or a conflict error."""
    needed: dict[str, Fraction] = {}
    for row in rows:
        base = sum((c for c, b in zip(row.coeffs, vec) if b), start=Fraction(0))
        need = -(base + row.scalar_coeff * scalar_value)
        if row.slack_name in needed and needed[row.slack_name] != need:
            raise ParameterError(
                f"shared slack {row.slack_name!r} would need both "
                f"{needed[row.slack_name]} and {need}"
            )
        needed[row.slack_name] = need
    return needed


def encode_assignment(
    model: QuboModel,
    *,
    profile: PureProfile,
    alpha: Fraction,
    beta: Fraction,
    slacks: Mapping[str, Fraction] | None = None,
    program: SlackedProgram | None = None,
) -> tuple[int, ...]:
    """Build the bit vector for a profile with given scalar values.

    Slack values may be given explicitly or derived from the program so
    that every constraint row closes exactly. Raises ParameterError when
    a value is not representable by its binary encoding.
    """
    layout = _layout(model)
    n_rows, n_cols = len(layout.p_vars), len(layout.q_vars)
    if not (1 <= profile.row <= n_rows and 1 <= profile.col <= n_cols):
        raise ParameterError(f"profile {profile} outside a {n_rows}x{n_cols} game")
    p_vec = tuple(int(i + 1 == profile.row) for i in range(n_rows))
    q_vec = tuple(int(j + 1 == profile.col) for j in range(n_cols))

    if slacks is None:
        if program is None:
            raise ParameterError("need explicit slacks or a program to derive them")
        slacks = {
            **_required_slacks(program.rows_p1, q_vec, alpha),
            **_required_slacks(program.rows_p2, p_vec, beta),
        }

    values = {"alpha": alpha, "beta": beta, **slacks}
    if set(values) != set(layout.scalars):
        raise ParameterError(
            "scalar values do not match the model: expected "
            + ", ".join(sorted(layout.scalars))
        )

    bits = [0] * model.n_vars
    bits[layout.p_vars[profile.row - 1]] = 1
    bits[layout.q_vars[profile.col - 1]] = 1
    for name, value in values.items():
        lower, positions = layout.scalars[name]
        code = Fraction(value) - lower
        if code.denominator != 1 or not 0 <= code < 2 ** len(positions):
            raise ParameterError(
                f"{name} = {value} is not representable with {len(positions)} "
                f"bits above {lower}"
            )
        code = int(code)
        for k, var in enumerate(positions):
            bits[var] = (code >> k) & 1
    return tuple(bits)


def iter_feasible_assignments(
    program: SlackedProgram, model: QuboModel
) -> Iterator[tuple[int, ...]]:
    """Every assignment that is one-hot and closes all constraint rows.

    Walks profiles and all representable bound-scalar values, deriving
    the slacks each row needs; an option is kept only when those slacks
    are representable (and consistent, for shared slacks). This is a
    complete characterization of the penalty-free states, far smaller
    than the full assignment space.
    """
    layout = _layout(model)
    n_rows, n_cols = len(layout.p_vars), len(layout.q_vars)

    def scalar_options(name, rows, vec):
        lower, positions = layout.scalars[name]
        found = []
        for code in range(2 ** len(positions)):
            value = lower + code
            try:
                slacks = _required_slacks(rows, vec, value)
            except ParameterError:
                continue
            ok = True
            for slack_name, need in slacks.items():
                s_lower, s_positions = layout.scalars[slack_name]
                c = need - s_lower
                if c.denominator != 1 or not 0 <= c < 2 ** len(s_positions):
                    ok = False
                    break
            if ok:
                found.append((value, slacks))
        return found

    for r in range(1, n_rows + 1):
        p_vec = tuple(int(i + 1 == r) for i in range(n_rows))
        for c in range(1, n_cols + 1):
            q_vec = tuple(int(j + 1 == c) for j in range(n_cols))
            alpha_options = scalar_options("alpha", program.rows_p1, q_vec)
            beta_options = scalar_options("beta", program.rows_p2, p_vec)
            for alpha, slacks_a in alpha_options:
                for beta, slacks_b in beta_options:
                    yield encode_assignment(
                        model,
                        profile=PureProfile(r, c),
                        alpha=alpha,
                        beta=beta,
                        slacks={**slacks_a, **slacks_b},
                    )


@dataclass(frozen=True)
class NashCertificate:
    """Verdict on one feasible decoded profile.

    is_nash comes from checking the profile against the payoff matrices
    directly, never from the model's energy. objective_value is the
    total payoff minus both bound scalars in original payoff units;
    scaled_objective restates it in the integerized system.
    """

    profile: PureProfile
    is_nash: bool
    alpha: Fraction
    beta: Fraction
    payoffs: PayoffPair
    scalars_match: bool
    objective_value: Fraction
    objective_scale: Fraction

    @property
    def scaled_objective(self) -> Fraction:
        return self.objective_scale * self.objective_value

    def to_payload(self) -> dict:
        return {
            "profile": [self.profile.row, self.profile.col],
            "is_nash": self.is_nash,
            "alpha": str(self.alpha),
            "beta": str(self.beta),
            "payoffs": [str(self.payoffs.first), str(self.payoffs.second)],
            "scalars_match": self.scalars_match,
            "objective_value": str(self.objective_value),
            "objective_scale": str(self.objective_scale),
        }


def certify(
    game: BimatrixGame,
    decoded: DecodedSolution,
    *,
    objective_scale: Fraction = Fraction(1),
) -> NashCertificate:
    """Judge a decoded solution against the game itself.

    Only fully feasible solutions are accepted; anything else raises
    CertificationError. A feasible profile that fails the equilibrium
    check is still certified, just with is_nash False.
    """
    if not decoded.one_hot or decoded.profile is None:
        raise CertificationError(
            "assignment does not select exactly one strategy per player"
        )
    if decoded.feasible is None:
        raise CertificationError(
            "feasibility is unknown; decode with the constraint program first"
        )
    if not decoded.feasible:
        broken = [
            f"player 1 row {i + 1}"
            for i, v in enumerate(decoded.residuals_p1)
            if v != 0
        ]
        broken += [
            f"player 2 row {j + 1}"
            for j, v in enumerate(decoded.residuals_p2)
            if v != 0
        ]
        raise CertificationError(
            "constraint rows not satisfied: " + ", ".join(broken)
        )
    payoffs = payoff(game, decoded.profile)
    return NashCertificate(
        profile=decoded.profile,
        is_nash=is_pure_nash(game, decoded.profile),
        alpha=decoded.alpha,
        beta=decoded.beta,
        payoffs=payoffs,
        scalars_match=(decoded.alpha == payoffs.first and decoded.beta == payoffs.second),
        objective_value=payoffs.first + payoffs.second - decoded.alpha - decoded.beta,
        objective_scale=objective_scale,
    )


@dataclass(frozen=True)
class ProfileCount:
    """One histogram bucket: a profile, or None for undecodable states."""

    profile: PureProfile | None
    occurrences: int
    share: Fraction
    min_energy: Fraction
    is_nash: bool | None
    feasible_occurrences: int | None


@dataclass(frozen=True)
class FrequencyReport:
    game_name: str
    total_occurrences: int
    rows: tuple[ProfileCount, ...]

    def to_payload(self) -> dict:
        return {
            "game": self.game_name,
            "total_occurrences": self.total_occurrences,
            "rows": [
                {
                    "profile": list(row.profile) if row.profile else None,
                    "occurrences": row.occurrences,
                    "share": str(row.share),
                    "min_energy": str(row.min_energy),
                    "is_nash": row.is_nash,
                    "feasible_occurrences": row.feasible_occurrences,
                }
                for row in self.rows
            ],
        }

    def to_csv(self) -> str:
        lines = ["row,col,occurrences,share,min_energy,is_nash,feasible_occurrences"]
        for row in self.rows:
            r = str(row.profile.row) if row.profile else ""
            c = str(row.profile.col) if row.profile else ""
            nash = "" if row.is_nash is None else str(row.is_nash).lower()
            feas = "" if row.feasible_occurrences is None else str(row.feasible_occurrences)
            lines.append(
                f"{r},{c},{row.occurrences},{row.share},{row.min_energy},{nash},{feas}"
            )
        return "\n".join(lines) + "\n"


def histogram(
    game: BimatrixGame,
    sampleset: SampleSet,
    program: SlackedProgram | None = None,
) -> FrequencyReport:
    """Aggregate a sample set into per-profile frequencies.

    Records whose assignment is not one-hot all land in a single bucket
    with no profile; it is reported like any other so that poor sampling
    or weak penalties stay visible. With the program supplied, each
    bucket also counts how many of its occurrences were fully feasible.
    """
    buckets: dict[PureProfile | None, dict] = {}
    for record in sampleset.records:
        d = decode(sampleset.model, record.assignment, program)
        key = d.profile if d.one_hot else None
        b = buckets.setdefault(
            key, {"occ": 0, "min_energy": record.energy, "feas": 0}
        )
        b["occ"] += record.occurrences
        b["min_energy"] = min(b["min_energy"], record.energy)
        if program is not None and d.feasible:
            b["feas"] += record.occurrences

    total = sum(b["occ"] for b in buckets.values())
    rows = [
        ProfileCount(
            profile=key,
            occurrences=b["occ"],
            share=Fraction(b["occ"], total),
            min_energy=b["min_energy"],
            is_nash=None if key is None else is_pure_nash(game, key),
            feasible_occurrences=None if program is None else b["feas"],
        )
        for key, b in buckets.items()
    ]
    rows.sort(
        key=lambda row: (
            -row.occurrences,
            row.profile is None,
            row.profile or PureProfile(0, 0),
        )
    )
    return FrequencyReport(
        game_name=game.name, total_occurrences=total, rows=tuple(rows)
    )
