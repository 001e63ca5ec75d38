"""Two-player games in strategic form and the pure-equilibrium oracle.

Payoffs are exact rationals throughout. Entry (i, j) of either matrix is
the payoff to the respective player when the row player uses strategy i
and the column player uses strategy j. Strategy indices are 1-based in
reports and profiles, 0-based when indexing the raw matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import DimensionError, GameFormatError, ParameterError
from .rationals import Rationalish, format_rational, parse_rational

Matrix = tuple[tuple[Fraction, ...], ...]


class PureProfile(NamedTuple):
    """A pure strategy choice for each player, indexed from 1."""

    row: int
    col: int

    def __str__(self) -> str:
        return f"({self.row},{self.col})"


class PayoffPair(NamedTuple):
    """Payoffs to the row player and the column player."""

    first: Fraction
    second: Fraction


def _to_matrix(rows: Iterable[Iterable[Rationalish]]) -> Matrix:
    return tuple(tuple(parse_rational(v) for v in row) for row in rows)


@dataclass(frozen=True)
class BimatrixGame:
    """An immutable bimatrix game with exact rational payoffs."""

    name: str
    m: Matrix
    n: Matrix

    def __post_init__(self) -> None:
        if not self.m or not self.m[0]:
            raise DimensionError("payoff matrices must have at least one row and column")
        width = len(self.m[0])
        for matrix, label in ((self.m, "m"), (self.n, "n")):
            if len(matrix) != len(self.m):
                raise DimensionError(f"matrix {label} has {len(matrix)} rows, expected {len(self.m)}")
            for row in matrix:
                if len(row) != width:
                    raise DimensionError(f"matrix {label} is ragged: row of length {len(row)}, expected {width}")

    @classmethod
    def from_rows(
        cls,
        name: str,
        m: Iterable[Iterable[Rationalish]],
        n: Iterable[Iterable[Rationalish]],
    ) -> "BimatrixGame":
        return cls(name=name, m=_to_matrix(m), n=_to_matrix(n))

    @property
    def n_rows(self) -> int:
        return len(self.m)

    @property
    def n_cols(self) -> int:
        return len(self.m[0])

    def profiles(self) -> tuple[PureProfile, ...]:
        """All pure profiles in row-major order."""
        return tuple(
            PureProfile(r, c)
            for r in range(1, self.n_rows + 1)
            for c in range(1, self.n_cols + 1)
        )

    def to_payload(self) -> dict:
        return {
            "name": self.name,
            "m": [[format_rational(v) for v in row] for row in self.m],
            "n": [[format_rational(v) for v in row] for row in self.n],
        }


def payoff(game: BimatrixGame, profile: PureProfile) -> PayoffPair:
    """Payoff pair at a pure profile; indices are 1-based."""
    r, c = profile
    if not (1 <= r <= game.n_rows and 1 <= c <= game.n_cols):
        raise DimensionError(
            f"profile {profile} outside a {game.n_rows}x{game.n_cols} game"
        )
    return PayoffPair(game.m[r - 1][c - 1], game.n[r - 1][c - 1])


def is_pure_nash(game: BimatrixGame, profile: PureProfile) -> bool:
    """Check the two no-deviation conditions; ties count as equilibria."""
    r, c = profile
    if not (1 <= r <= game.n_rows and 1 <= c <= game.n_cols):
        raise DimensionError(
            f"profile {profile} outside a {game.n_rows}x{game.n_cols} game"
        )
    own = game.m[r - 1][c - 1]
    if any(game.m[rp][c - 1] > own for rp in range(game.n_rows)):
        return False
    other = game.n[r - 1][c - 1]
    if any(game.n[r - 1][cp] > other for cp in range(game.n_cols)):
        return False
    return True


def pure_nash_enumerate(game: BimatrixGame) -> tuple[PureProfile, ...]:
    """Every pure Nash equilibrium, by brute force, in row-major order.

    A profile qualifies when neither player can weakly improve by a
    unilateral deviation, so all tied best responses are included.
    """
    return tuple(p for p in game.profiles() if is_pure_nash(game, p))


def scale_payoffs(game: BimatrixGame, c1: Fraction, c2: Fraction) -> BimatrixGame:
    """Multiply each player's payoffs by a positive rational constant.

    Positive scaling preserves best responses, hence the equilibrium set.
    """
    c1 = parse_rational(c1)
    c2 = parse_rational(c2)
    if c1 <= 0 or c2 <= 0:
        raise ParameterError(f"scale factors must be positive, got {c1} and {c2}")
    return BimatrixGame(
        name=game.name,
        m=tuple(tuple(c1 * v for v in row) for row in game.m),
        n=tuple(tuple(c2 * v for v in row) for row in game.n),
    )


def game_from_payload(payload: dict) -> BimatrixGame:
    """Build a game from the JSON wire schema {"name", "m", "n"}."""
    if not isinstance(payload, dict):
        raise GameFormatError("game file must contain a JSON object")
    missing = {"name", "m", "n"} - payload.keys()
    if missing:
        raise GameFormatError(f"game file missing keys: {sorted(missing)}")
    name = payload["name"]
    if not isinstance(name, str) or not name:
        raise GameFormatError("game name must be a non-empty string")
    for key in ("m", "n"):
        rows = payload[key]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise GameFormatError(f"matrix {key!r} must be a list of rows")
    try:
        return BimatrixGame.from_rows(name, payload["m"], payload["n"])
    except DimensionError as exc:
        raise GameFormatError(str(exc)) from exc


def load_game(path: str | Path) -> BimatrixGame:
    """Read a game description from a JSON file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise GameFormatError(f"cannot read game file {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"game file {path} is not valid JSON: {exc}") from exc
    return game_from_payload(payload)
