"""Tests for the game container and the pure-equilibrium oracle."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nashqubo.errors import DimensionError, GameFormatError, ParameterError
from nashqubo.games import (
    BimatrixGame,
    PayoffPair,
    PureProfile,
    is_pure_nash,
    payoff,
    pure_nash_enumerate,
    scale_payoffs,
)

F = Fraction


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------

class TestConstruction:
    def test_shape_properties(self, bird_game):
        assert bird_game.n_rows == 3
        assert bird_game.n_cols == 3

    def test_entries_are_fractions(self, bird_game):
        assert bird_game.m[0][2] == F(5, 2)
        assert isinstance(bird_game.m[0][2], Fraction)

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(DimensionError):
            BimatrixGame.from_rows("bad", [[1, 2]], [[1], [2]])

    def test_ragged_rows_rejected(self):
        with pytest.raises(DimensionError):
            BimatrixGame.from_rows("bad", [[1, 2], [3]], [[1, 2], [3, 4]])

    def test_empty_matrix_rejected(self):
        with pytest.raises(DimensionError):
            BimatrixGame.from_rows("bad", [], [])

    def test_string_entries_parse(self):
        g = BimatrixGame.from_rows("frac", [["1/2", 1], [0, "-3/4"]],
                                   [[1, 2], [3, 4]])
        assert g.m[0][0] == F(1, 2)
        assert g.m[1][1] == F(-3, 4)

    def test_bad_entry_rejected(self):
        with pytest.raises(GameFormatError):
            BimatrixGame.from_rows("bad", [["x", 1], [2, 3]], [[1, 2], [3, 4]])

    def test_matrices_immutable(self, battle_of_the_sexes):
        with pytest.raises(TypeError):
            battle_of_the_sexes.m[0][0] = F(99)  # type: ignore[index]


# ---------------------------------------------------------------------------
# payoff lookup
# ---------------------------------------------------------------------------

class TestPayoff:
    def test_battle_of_the_sexes_first_profile(self, battle_of_the_sexes):
        assert payoff(battle_of_the_sexes, PureProfile(1, 1)) == PayoffPair(F(2), F(1))

    def test_battle_of_the_sexes_second_profile(self, battle_of_the_sexes):
        assert payoff(battle_of_the_sexes, PureProfile(2, 2)) == PayoffPair(F(1), F(2))

    def test_bird_game_fractional_entry(self, bird_game):
        assert payoff(bird_game, PureProfile(1, 3)) == PayoffPair(F(5, 2), F(-5, 2))

    def test_out_of_range_raises(self, battle_of_the_sexes):
        with pytest.raises(DimensionError):
            payoff(battle_of_the_sexes, PureProfile(3, 1))
        with pytest.raises(DimensionError):
            payoff(battle_of_the_sexes, PureProfile(1, 0))


# ---------------------------------------------------------------------------
# pure equilibrium enumeration
# ---------------------------------------------------------------------------

class TestEnumeration:
    def test_battle_of_the_sexes(self, battle_of_the_sexes):
        assert pure_nash_enumerate(battle_of_the_sexes) == (
            PureProfile(1, 1),
            PureProfile(2, 2),
        )

    def test_matching_pennies_empty(self, matching_pennies):
        assert pure_nash_enumerate(matching_pennies) == ()

    def test_bird_game(self, bird_game):
        assert pure_nash_enumerate(bird_game) == (
            PureProfile(1, 2),
            PureProfile(2, 1),
            PureProfile(3, 3),
        )

    def test_eight_strategy_count_and_members(self, eight_strategy):
        found = pure_nash_enumerate(eight_strategy)
        assert len(found) == 22
        for p in (PureProfile(2, 2), PureProfile(3, 3), PureProfile(4, 4)):
            assert p in found

    def test_zero_game_all_profiles(self, zero_game_2x2):
        assert pure_nash_enumerate(zero_game_2x2) == (
            PureProfile(1, 1),
            PureProfile(1, 2),
            PureProfile(2, 1),
            PureProfile(2, 2),
        )

    def test_row_major_ordering(self, eight_strategy):
        found = pure_nash_enumerate(eight_strategy)
        assert list(found) == sorted(found, key=lambda p: (p.row, p.col))

    def test_is_pure_nash_matches_enumeration(self, bird_game):
        members = set(pure_nash_enumerate(bird_game))
        for r in range(1, 4):
            for c in range(1, 4):
                assert is_pure_nash(bird_game, PureProfile(r, c)) == (
                    PureProfile(r, c) in members
                )


# ---------------------------------------------------------------------------
# payoff scaling
# ---------------------------------------------------------------------------

class TestScaling:
    def test_entries_multiplied(self, eight_strategy):
        scaled = scale_payoffs(eight_strategy, F(3), F(3))
        # entry (4,5) of m is 2/3 and becomes 2 under a factor of 3
        assert eight_strategy.m[3][4] == F(2, 3)
        assert scaled.m[3][4] == F(2)

    def test_identity_scale(self, bird_game):
        scaled = scale_payoffs(bird_game, F(1), F(1))
        assert scaled.m == bird_game.m
        assert scaled.n == bird_game.n

    def test_nonpositive_scale_rejected(self, bird_game):
        with pytest.raises(ParameterError):
            scale_payoffs(bird_game, F(0), F(1))
        with pytest.raises(ParameterError):
            scale_payoffs(bird_game, F(1), F(-2))

    def test_equilibria_invariant_under_scaling(self, bird_game):
        scaled = scale_payoffs(bird_game, F(7, 3), F(2))
        assert pure_nash_enumerate(scaled) == pure_nash_enumerate(bird_game)


# ---------------------------------------------------------------------------
# properties on random games
# ---------------------------------------------------------------------------

small_payoffs = st.integers(min_value=-5, max_value=5)


def _random_game(draw, rows, cols):
    m = draw(st.lists(st.lists(small_payoffs, min_size=cols, max_size=cols),
                      min_size=rows, max_size=rows))
    n = draw(st.lists(st.lists(small_payoffs, min_size=cols, max_size=cols),
                      min_size=rows, max_size=rows))
    return BimatrixGame.from_rows("random", m, n)


@st.composite
def random_games(draw):
    rows = draw(st.integers(min_value=1, max_value=4))
    cols = draw(st.integers(min_value=1, max_value=4))
    return _random_game(draw, rows, cols)


@given(random_games())
@settings(max_examples=150, deadline=None)
def test_enumeration_matches_deviation_check(game):
    """Membership agrees with a direct best-response deviation check."""
    found = set(pure_nash_enumerate(game))
    for r in range(1, game.n_rows + 1):
        for c in range(1, game.n_cols + 1):
            no_row_deviation = all(
                game.m[r - 1][c - 1] >= game.m[rp][c - 1]
                for rp in range(game.n_rows)
            )
            no_col_deviation = all(
                game.n[r - 1][c - 1] >= game.n[r - 1][cp]
                for cp in range(game.n_cols)
            )
            assert (PureProfile(r, c) in found) == (no_row_deviation and no_col_deviation)


@given(random_games(), st.integers(min_value=-7, max_value=7))
@settings(max_examples=60, deadline=None)
def test_enumeration_invariant_under_payoff_shift(game, shift):
    """Adding a constant to every payoff of one player changes nothing."""
    shifted = BimatrixGame.from_rows(
        game.name,
        [[v + shift for v in row] for row in game.m],
        [list(row) for row in game.n],
    )
    assert pure_nash_enumerate(shifted) == pure_nash_enumerate(game)


@given(random_games(),
       st.fractions(min_value=F(1, 4), max_value=F(6)),
       st.fractions(min_value=F(1, 4), max_value=F(6)))
@settings(max_examples=60, deadline=None)
def test_enumeration_invariant_under_positive_scaling(game, c1, c2):
    assert pure_nash_enumerate(scale_payoffs(game, c1, c2)) == pure_nash_enumerate(game)
