"""Canonical parsing and formatting of exact rationals.

Every rational that leaves the package is written as ``"p/q"`` with
``q > 0`` and ``gcd(p, q) == 1``; integers are written as ``"p/1"``.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["to_rational", "format_rational", "alpha_from_beta"]


def to_rational(value: int | str | Rational) -> Fraction:
    """Convert ints, ``Fraction``-likes, or strings such as ``"5/3"`` exactly.

    Floats are rejected: they would silently smuggle rounding error into an
    exact pipeline.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot parse rational {value!r}") from None
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def format_rational(q: Fraction | int) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def alpha_from_beta(beta: int | str | Rational) -> Fraction:
    b = to_rational(beta)
    if b <= 0:
        raise ValueError("beta must be positive")
    return 2 / b
