"""Parsing and formatting of exact rational values.

Wire formats carry rationals either as plain JSON numbers or as
"num/den" strings; everything internal is `fractions.Fraction`.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import GameFormatError

Rationalish = int | float | str | Fraction


def parse_rational(value: Rationalish) -> Fraction:
    """Convert a JSON-friendly value into an exact Fraction.

    Accepts ints, floats (converted exactly, so 2.5 -> 5/2), Fractions,
    and strings such as "3", "-1/2", or "2.5".
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise GameFormatError(f"not a rational value: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**9)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise GameFormatError(f"not a rational value: {value!r}") from exc
    raise GameFormatError(f"not a rational value: {value!r}")


def format_rational(value: Fraction) -> str:
    """Canonical string form: "3" for integers, "num/den" otherwise."""
    return str(value)
