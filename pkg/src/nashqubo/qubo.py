"""Binary expansion of the slacked program into a quadratic binary model.

Each bounded scalar (the two payoff-bound variables and every slack)
becomes `lower + sum(2^k * bit_k)`. The penalized objective is

    objective - theta1 * (sum p - 1)^2 - theta2 * (sum q - 1)^2
              - sum_i lambda_i * row_i^2 - sum_j phi_j * row_j^2

and the compiled model is its negation, so minimizing the model
maximizes the objective while driving every squared violation to zero.
At an equilibrium encoding the energy, offset included, is exactly zero.

All coefficients stay exact rationals; only samplers convert to floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    CompileError,
    DimensionError,
    ModelFormatError,
    ParameterError,
)
from .qp import SlackedProgram, SlackedRow
from .rationals import format_rational, parse_rational


@dataclass(frozen=True)
class ScalarEncoding:
    """A bounded integer scalar expanded in binary.

    Represents the values lower .. lower + 2^bits - 1 with bit weights
    1, 2, 4, ...; zero bits pins the scalar to its lower bound.
    """

    name: str
    lower: int
    bits: int

    def __post_init__(self) -> None:
        if self.bits < 0:
            raise ParameterError(f"encoding {self.name!r} needs a nonnegative bit count")

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(2**k for k in range(self.bits))

    @property
    def upper(self) -> int:
        return self.lower + 2**self.bits - 1 if self.bits else self.lower

    def value_of(self, bits: Sequence[int]) -> Fraction:
        if len(bits) != self.bits:
            raise DimensionError(
                f"encoding {self.name!r} expects {self.bits} bits, got {len(bits)}"
            )
        return Fraction(self.lower + sum(w * b for w, b in zip(self.weights, bits)))

    def covers(self, value: Fraction) -> bool:
        """Whether an exact value is representable by this encoding."""
        return value.denominator == 1 and self.lower <= value <= self.upper


@dataclass(frozen=True)
class PenaltyConfig:
    """Multipliers for the squared penalty terms.

    theta1 and theta2 weight the two one-hot (simplex) penalties; lam
    and phi hold one weight per inequality row of the respective player.
    """

    theta1: Fraction
    theta2: Fraction
    lam: tuple[Fraction, ...]
    phi: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        for label, value in (("theta1", self.theta1), ("theta2", self.theta2)):
            if value < 0:
                raise ParameterError(f"penalty weight {label} must be nonnegative, got {value}")
        for label, seq in (("lam", self.lam), ("phi", self.phi)):
            if any(w < 0 for w in seq):
                raise ParameterError(f"penalty weights {label} must be nonnegative")

    @classmethod
    def uniform(
        cls,
        n_rows_p1: int,
        n_rows_p2: int,
        *,
        theta: Fraction | int = 1,
        lam: Fraction | int = 1,
        phi: Fraction | int = 1,
    ) -> "PenaltyConfig":
        theta = parse_rational(theta)
        return cls(
            theta1=theta,
            theta2=theta,
            lam=(parse_rational(lam),) * n_rows_p1,
            phi=(parse_rational(phi),) * n_rows_p2,
        )


@dataclass(frozen=True)
class VarSpec:
    """What one flattened binary variable stands for.

    role "p" or "q": index is the 0-based strategy position. Scalar
    roles ("alpha", "beta", "slack"): index is the bit position, scalar
    names the owning scalar, and lower is its encoding lower bound.
    """

    role: str
    index: int
    scalar: str = ""
    lower: Fraction = Fraction(0)


@dataclass(frozen=True)
class QuboModel:
    """Minimization target: offset + sum a_i x_i + sum b_ij x_i x_j.

    linear maps variable index to a_i; quadratic maps strictly
    upper-triangular pairs (i, j), i < j, to b_ij. Zero coefficients are
    never stored. varmap describes what each variable encodes.
    """

    n_vars: int
    linear: dict[int, Fraction]
    quadratic: dict[tuple[int, int], Fraction]
    offset: Fraction
    varmap: tuple[VarSpec, ...] = ()

    @classmethod
    def from_terms(
        cls,
        *,
        n_vars: int,
        linear: Mapping[int, Fraction],
        quadratic: Mapping[tuple[int, int], Fraction],
        offset: Fraction,
        varmap: tuple[VarSpec, ...] = (),
    ) -> "QuboModel":
        if n_vars < 0:
            raise DimensionError("variable count must be nonnegative")
        clean_linear: dict[int, Fraction] = {}
        for i, v in linear.items():
            if not 0 <= i < n_vars:
                raise DimensionError(f"linear index {i} outside 0..{n_vars - 1}")
            v = parse_rational(v)
            if v:
                clean_linear[i] = v
        clean_quadratic: dict[tuple[int, int], Fraction] = {}
        for (i, j), v in quadratic.items():
            if not 0 <= i < j < n_vars:
                raise DimensionError(f"quadratic key ({i}, {j}) is not upper-triangular in range")
            v = parse_rational(v)
            if v:
                clean_quadratic[(i, j)] = v
        if varmap and len(varmap) != n_vars:
            raise DimensionError("varmap length must equal the variable count")
        return cls(
            n_vars=n_vars,
            linear=clean_linear,
            quadratic=clean_quadratic,
            offset=parse_rational(offset),
            varmap=varmap,
        )

    def max_abs_coefficient(self) -> Fraction:
        """Largest coefficient magnitude, ignoring the offset."""
        magnitudes = [abs(v) for v in self.linear.values()]
        magnitudes += [abs(v) for v in self.quadratic.values()]
        return max(magnitudes, default=Fraction(0))


def energy(model: QuboModel, assignment: Sequence[int]) -> Fraction:
    """Exact model value at a binary assignment, offset included."""
    if len(assignment) != model.n_vars:
        raise DimensionError(
            f"assignment has {len(assignment)} bits, model has {model.n_vars} variables"
        )
    if any(b not in (0, 1) for b in assignment):
        raise ParameterError("assignment entries must be 0 or 1")
    total = model.offset
    for i, a in model.linear.items():
        if assignment[i]:
            total += a
    for (i, j), b in model.quadratic.items():
        if assignment[i] and assignment[j]:
            total += b
    return total


# ---------------------------------------------------------------------------
# bound derivation
# ---------------------------------------------------------------------------

def _bits_for_range(span: int) -> int:
    """ceil(log2(span + 1)), but at least one bit."""
    return max(1, span.bit_length())


def _row_scale(row: SlackedRow) -> Fraction:
    scale = -row.scalar_coeff
    if scale <= 0:
        raise ParameterError(
            f"row with slack {row.slack_name!r} must carry a negative bound-scalar coefficient"
        )
    return scale


def _payoff_extremes(rows: Sequence[SlackedRow]) -> tuple[Fraction, Fraction]:
    """Original-scale payoff extremes recovered from the scaled rows."""
    values: list[Fraction] = []
    for row in rows:
        scale = _row_scale(row)
        values.extend(c / scale for c in row.coeffs)
    if not values:
        return Fraction(0), Fraction(0)
    return min(values), max(values)


def derive_bounds(sp: SlackedProgram) -> tuple[ScalarEncoding, ...]:
    """Default encodings for the bound scalars and every slack.

    The payoff-bound scalars span the payoff extremes of the owning
    player's matrix, evaluated over one-hot opponent assignments. Each
    slack spans zero up to its row's worst case: the scaled bound-scalar
    maximum minus the row's smallest one-hot value.
    """
    alpha_min, alpha_max = _payoff_extremes(sp.rows_p1)
    beta_min, beta_max = _payoff_extremes(sp.rows_p2)

    encodings = [
        ScalarEncoding(
            name="alpha",
            lower=math.floor(alpha_min),
            bits=_bits_for_range(math.ceil(alpha_max) - math.floor(alpha_min)),
        ),
        ScalarEncoding(
            name="beta",
            lower=math.floor(beta_min),
            bits=_bits_for_range(math.ceil(beta_max) - math.floor(beta_min)),
        ),
    ]

    slack_upper: dict[str, int] = {}
    for rows, bound_max in ((sp.rows_p1, alpha_max), (sp.rows_p2, beta_max)):
        for row in rows:
            scale = _row_scale(row)
            upper = math.ceil(scale * bound_max - min(row.coeffs))
            upper = max(0, upper)
            prev = slack_upper.get(row.slack_name, 0)
            slack_upper[row.slack_name] = max(prev, upper)
    for name in sp.slack_names:
        encodings.append(
            ScalarEncoding(name=name, lower=0, bits=_bits_for_range(slack_upper[name]))
        )
    return tuple(encodings)


# ---------------------------------------------------------------------------
# compilation
# ---------------------------------------------------------------------------

class _Accumulator:
    """Collects linear/quadratic/constant contributions exactly."""

    def __init__(self) -> None:
        self.linear: dict[int, Fraction] = {}
        self.quadratic: dict[tuple[int, int], Fraction] = {}
        self.offset = Fraction(0)

    def add_constant(self, value: Fraction) -> None:
        self.offset += value

    def add_var(self, i: int, coeff: Fraction) -> None:
        if coeff:
            self.linear[i] = self.linear.get(i, Fraction(0)) + coeff

    def add_pair(self, i: int, j: int, coeff: Fraction) -> None:
        if not coeff:
            return
        if i == j:
            # binary variables square to themselves
            self.add_var(i, coeff)
            return
        key = (i, j) if i < j else (j, i)
        self.quadratic[key] = self.quadratic.get(key, Fraction(0)) + coeff

    def add_expr(self, expr: "_LinearExpr", weight: Fraction) -> None:
        self.add_constant(weight * expr.constant)
        for i, c in expr.terms.items():
            self.add_var(i, weight * c)

    def add_square(self, expr: "_LinearExpr", weight: Fraction) -> None:
        """Accumulate weight * expr^2 with x_i^2 = x_i."""
        if not weight:
            return
        c = expr.constant
        self.add_constant(weight * c * c)
        items = sorted(expr.terms.items())
        for idx, (i, a) in enumerate(items):
            self.add_var(i, weight * (a * a + 2 * c * a))
            for j, b in items[idx + 1:]:
                self.add_pair(i, j, weight * 2 * a * b)


@dataclass
class _LinearExpr:
    constant: Fraction = Fraction(0)
    terms: dict[int, Fraction] = field(default_factory=dict)

    def add(self, i: int, coeff: Fraction) -> None:
        if coeff:
            self.terms[i] = self.terms.get(i, Fraction(0)) + coeff


def _appearance_order(sp: SlackedProgram) -> tuple[list[VarSpec], dict[str, int], dict[str, int]]:
    """Strategy variables in first-appearance order of the objective
    expansion (row-major over the strategy pairs), mirroring how a
    symbolic flattening registers them: p1, q1 .. qm, p2 .. pn."""
    order: list[VarSpec] = []
    p_index: dict[int, int] = {}
    q_index: dict[int, int] = {}
    for i in range(sp.n_rows):
        for j in range(sp.n_cols):
            if i not in p_index:
                p_index[i] = len(order)
                order.append(VarSpec(role="p", index=i))
            if j not in q_index:
                q_index[j] = len(order)
                order.append(VarSpec(role="q", index=j))
    return order, p_index, q_index


def compile_qubo(
    sp: SlackedProgram,
    encodings: Iterable[ScalarEncoding] | Mapping[str, ScalarEncoding],
    penalties: PenaltyConfig,
) -> QuboModel:
    """Expand scalars in binary and assemble the negated penalized objective.

    The result equals, on every binary assignment,

        -(objective) + theta1 * (sum p - 1)^2 + theta2 * (sum q - 1)^2
                     + sum_i lambda_i * row_i^2 + sum_j phi_j * row_j^2

    with constants folded into the offset.
    """
    if isinstance(encodings, Mapping):
        enc = dict(encodings)
    else:
        enc = {e.name: e for e in encodings}
    needed = {"alpha", "beta", *sp.slack_names}
    missing = needed - enc.keys()
    if missing:
        raise CompileError(f"missing encodings for {sorted(missing)}")
    extra = enc.keys() - needed
    if extra:
        raise CompileError(f"encodings for unknown scalars {sorted(extra)}")
    if len(penalties.lam) != len(sp.rows_p1):
        raise ParameterError(
            f"lam has {len(penalties.lam)} weights for {len(sp.rows_p1)} rows"
        )
    if len(penalties.phi) != len(sp.rows_p2):
        raise ParameterError(
            f"phi has {len(penalties.phi)} weights for {len(sp.rows_p2)} rows"
        )

    varmap, p_index, q_index = _appearance_order(sp)
    scalar_exprs: dict[str, _LinearExpr] = {}
    for name in ["alpha", "beta", *sp.slack_names]:
        e = enc[name]
        expr = _LinearExpr(constant=Fraction(e.lower))
        for k, weight in enumerate(e.weights):
            expr.add(len(varmap), Fraction(weight))
            varmap.append(
                VarSpec(role="slack" if name not in ("alpha", "beta") else name,
                        index=k, scalar=name, lower=Fraction(e.lower))
            )
        scalar_exprs[name] = expr

    acc = _Accumulator()

    # negated objective: game terms, then the bound scalars
    for i in range(sp.n_rows):
        for j in range(sp.n_cols):
            acc.add_pair(p_index[i], q_index[j], -sp.objective_quadratic[i][j])
    acc.add_expr(scalar_exprs["alpha"], -sp.objective_alpha)
    acc.add_expr(scalar_exprs["beta"], -sp.objective_beta)

    # one-hot penalties from the simplex rows
    simplex_p = _LinearExpr(constant=sp.eq_simplex_p.constant)
    for i, c in enumerate(sp.eq_simplex_p.coeffs):
        simplex_p.add(p_index[i], c)
    acc.add_square(simplex_p, penalties.theta1)

    simplex_q = _LinearExpr(constant=sp.eq_simplex_q.constant)
    for j, c in enumerate(sp.eq_simplex_q.coeffs):
        simplex_q.add(q_index[j], c)
    acc.add_square(simplex_q, penalties.theta2)

    # equality rows, squared
    def row_expr(row: SlackedRow, var_of: dict[int, int]) -> _LinearExpr:
        expr = _LinearExpr()
        for k, c in enumerate(row.coeffs):
            expr.add(var_of[k], c)
        bound = scalar_exprs[row.scalar_name]
        expr.constant += row.scalar_coeff * bound.constant
        for i, c in bound.terms.items():
            expr.add(i, row.scalar_coeff * c)
        slack = scalar_exprs[row.slack_name]
        expr.constant += slack.constant
        for i, c in slack.terms.items():
            expr.add(i, c)
        return expr

    for weight, row in zip(penalties.lam, sp.rows_p1):
        acc.add_square(row_expr(row, q_index), weight)
    for weight, row in zip(penalties.phi, sp.rows_p2):
        acc.add_square(row_expr(row, p_index), weight)

    return QuboModel.from_terms(
        n_vars=len(varmap),
        linear=acc.linear,
        quadratic=acc.quadratic,
        offset=acc.offset,
        varmap=tuple(varmap),
    )


# ---------------------------------------------------------------------------
# spin-model bridge
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IsingModel:
    """Spin form: offset + sum h_i s_i + sum j_ij s_i s_j, spins in {-1, +1}."""

    n_vars: int
    h: dict[int, Fraction]
    j: dict[tuple[int, int], Fraction]
    offset: Fraction
    varmap: tuple[VarSpec, ...] = ()


def qubo_to_ising(model: QuboModel) -> IsingModel:
    """Substitute x = (s + 1) / 2; exact in both directions."""
    h: dict[int, Fraction] = {}
    j: dict[tuple[int, int], Fraction] = {}
    offset = model.offset

    def bump(d, key, v):
        nv = d.get(key, Fraction(0)) + v
        if nv:
            d[key] = nv
        elif key in d:
            del d[key]

    for i, a in model.linear.items():
        offset += a / 2
        bump(h, i, a / 2)
    for (i, k), b in model.quadratic.items():
        offset += b / 4
        bump(h, i, b / 4)
        bump(h, k, b / 4)
        bump(j, (i, k), b / 4)
    return IsingModel(n_vars=model.n_vars, h=h, j=j, offset=offset, varmap=model.varmap)


def ising_to_qubo(im: IsingModel) -> QuboModel:
    """Substitute s = 2x - 1; inverse of qubo_to_ising on coefficients."""
    linear: dict[int, Fraction] = {}
    quadratic: dict[tuple[int, int], Fraction] = {}
    offset = im.offset

    def bump(d, key, v):
        d[key] = d.get(key, Fraction(0)) + v

    for i, hv in im.h.items():
        offset -= hv
        bump(linear, i, 2 * hv)
    for (i, k), jv in im.j.items():
        offset += jv
        bump(linear, i, -2 * jv)
        bump(linear, k, -2 * jv)
        bump(quadratic, (i, k), 4 * jv)
    return QuboModel.from_terms(
        n_vars=im.n_vars,
        linear=linear,
        quadratic=quadratic,
        offset=offset,
        varmap=im.varmap,
    )


def ising_energy(im: IsingModel, spins: Sequence[int]) -> Fraction:
    """Exact spin-model value at a +-1 assignment."""
    if len(spins) != im.n_vars:
        raise DimensionError(
            f"spin vector has {len(spins)} entries, model has {im.n_vars} variables"
        )
    if any(s not in (-1, 1) for s in spins):
        raise ParameterError("spins must be -1 or +1")
    total = im.offset
    for i, hv in im.h.items():
        total += hv * spins[i]
    for (i, k), jv in im.j.items():
        total += jv * spins[i] * spins[k]
    return total


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _varspec_to_payload(spec: VarSpec) -> dict:
    entry: dict = {"role": spec.role, "index": spec.index}
    if spec.role in ("alpha", "beta"):
        entry["lower"] = format_rational(spec.lower)
    elif spec.role == "slack":
        entry["scalar"] = spec.scalar
        entry["lower"] = format_rational(spec.lower)
    return entry


def _varspec_from_payload(entry: dict) -> VarSpec:
    try:
        role = entry["role"]
        index = int(entry["index"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad varmap entry {entry!r}") from exc
    if role in ("p", "q"):
        return VarSpec(role=role, index=index)
    if role in ("alpha", "beta"):
        return VarSpec(role=role, index=index, scalar=role,
                       lower=parse_rational(entry.get("lower", 0)))
    if role == "slack":
        scalar = entry.get("scalar")
        if not isinstance(scalar, str) or not scalar:
            raise ModelFormatError(f"slack varmap entry missing scalar name: {entry!r}")
        return VarSpec(role=role, index=index, scalar=scalar,
                       lower=parse_rational(entry.get("lower", 0)))
    raise ModelFormatError(f"unknown varmap role {role!r}")


def model_to_payload(model: QuboModel) -> dict:
    """JSON-ready form with rationals as canonical strings."""
    return {
        "n_vars": model.n_vars,
        "offset": format_rational(model.offset),
        "linear": [[i, format_rational(v)] for i, v in sorted(model.linear.items())],
        "quadratic": [
            [i, j, format_rational(v)] for (i, j), v in sorted(model.quadratic.items())
        ],
        "varmap": [_varspec_to_payload(s) for s in model.varmap],
    }


def model_from_payload(payload: dict) -> QuboModel:
    if not isinstance(payload, dict):
        raise ModelFormatError("model payload must be a JSON object")
    missing = {"n_vars", "offset", "linear", "quadratic"} - payload.keys()
    if missing:
        raise ModelFormatError(f"model payload missing keys: {sorted(missing)}")
    try:
        n_vars = int(payload["n_vars"])
        linear = {int(i): parse_rational(v) for i, v in payload["linear"]}
        quadratic = {
            (int(i), int(j)): parse_rational(v) for i, j, v in payload["quadratic"]
        }
        offset = parse_rational(payload["offset"])
        varmap = tuple(_varspec_from_payload(e) for e in payload.get("varmap", []))
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model payload: {exc}") from exc
    try:
        return QuboModel.from_terms(
            n_vars=n_vars, linear=linear, quadratic=quadratic,
            offset=offset, varmap=varmap,
        )
    except (DimensionError, ParameterError) as exc:
        raise ModelFormatError(str(exc)) from exc
