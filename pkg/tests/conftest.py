"""Shared game fixtures for the test suite.

The matrices are stated inline so tests do not depend on the bundled
JSON fixture files; a separate test checks the bundled files agree.
"""

from __future__ import annotations

from fractions import Fraction

import pytest

from nashqubo.games import BimatrixGame

F = Fraction


def _game(name: str, m, n) -> BimatrixGame:
    return BimatrixGame.from_rows(name, m, n)


@pytest.fixture(scope="session")
def battle_of_the_sexes() -> BimatrixGame:
    return _game(
        "battle_of_the_sexes",
        [[2, -1], [-1, 1]],
        [[1, -1], [-1, 2]],
    )


@pytest.fixture(scope="session")
def matching_pennies() -> BimatrixGame:
    return _game(
        "matching_pennies",
        [[1, -1], [-1, 1]],
        [[-1, 1], [1, -1]],
    )


@pytest.fixture(scope="session")
def bird_game() -> BimatrixGame:
    return _game(
        "bird_game",
        [[-5, 10, F(5, 2)], [0, 2, 1], [F(-5, 2), 6, 5]],
        [[-5, 0, F(-5, 2)], [10, 2, 6], [F(5, 2), 1, 5]],
    )


# Eight-strategy repeated-play game. Both players share the strategy set,
# the game is symmetric (n = m^T), and the second/third/fourth diagonal
# profiles are equilibria.
EIGHT_M = [
    [2, -1, 2, 2, -1, 2, 2, -1],
    [3, 0, 0, 0, F(3, 2), F(3, 2), F(3, 2), 3],
    [2, 0, 2, 2, 0, 2, 2, 3],
    [2, 0, 2, 2, F(2, 3), 2, 2, 2],
    [3, F(-1, 2), 0, F(2, 3), 2, 2, 2, 2],
    [2, F(-1, 2), 2, 2, 2, 2, 2, 2],
    [2, F(-1, 2), 2, 2, 2, 2, 2, 2],
    [3, -1, -1, 2, 2, 2, 2, 2],
]
EIGHT_N = [list(row) for row in zip(*EIGHT_M)]


@pytest.fixture(scope="session")
def eight_strategy() -> BimatrixGame:
    return _game("eight_strategy", EIGHT_M, EIGHT_N)


@pytest.fixture(scope="session")
def zero_game_2x2() -> BimatrixGame:
    return _game("zero_2x2", [[0, 0], [0, 0]], [[0, 0], [0, 0]])
