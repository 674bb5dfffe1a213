"""Exact rational exponent arithmetic with a symbolic infinity.

All exponent calculus in this package runs on ``fractions.Fraction`` plus
``math.inf`` for the upper endpoint. Internally most formulas are stated on
the reciprocal scale, where infinity simply becomes 0 and every operation is
exact. Floating-point inputs are rejected unless they are integral, so that
no silently inexact value can enter a rational identity.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Exponent = Union[int, str, Fraction, float]

INF = math.inf


def as_exponent(value: Exponent) -> Fraction | float:
    """Coerce ``value`` to an exact Fraction, or pass ``inf`` through.

    Accepts ints, Fractions, strings like ``"4/3"``, ``inf``, and floats
    that are exactly integral. Non-integral floats are rejected: spell them
    as a string or Fraction so the intended rational is unambiguous.
    """
    if value is INF or (isinstance(value, float) and math.isinf(value) and value > 0):
        return INF
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        if value.is_integer():
            return Fraction(int(value))
        raise TypeError(
            f"non-integral float {value!r} is not an exact exponent; "
            "pass a Fraction or a string like '3/2'"
        )
    raise TypeError(f"cannot interpret {value!r} as an exponent")


def is_inf(value: Fraction | float) -> bool:
    return value is INF or (isinstance(value, float) and math.isinf(value))


def inv(value: Exponent) -> Fraction:
    """Reciprocal on the exponent scale: 1/inf = 0."""
    v = as_exponent(value)
    if is_inf(v):
        return Fraction(0)
    if v == 0:
        raise ZeroDivisionError("exponent 0 has no reciprocal on this scale")
    return Fraction(1) / v


def from_inv(value: Fraction) -> Fraction | float:
    """Inverse of :func:`inv`: 0 maps back to inf."""
    if value == 0:
        return INF
    return Fraction(1) / value


def conjugate(value: Exponent) -> Fraction | float:
    """Hoelder conjugate: 1/p + 1/p' = 1. Conjugate of 1 is inf and vice versa."""
    u = inv(value)
    if u > 1:
        raise ValueError(f"exponent {value} < 1 has no conjugate")
    return from_inv(1 - u)


def to_float(value: Fraction | float) -> float:
    return math.inf if is_inf(value) else float(value)


def rational_json(value: Fraction | float) -> dict:
    """Serialize a rational as {num, den}; infinity is {num: 1, den: 0}."""
    if is_inf(value):
        return {"num": 1, "den": 0}
    f = as_exponent(value)
    return {"num": f.numerator, "den": f.denominator}


def rational_from_json(obj: dict) -> Fraction | float:
    if obj["den"] == 0:
        return INF
    return Fraction(obj["num"], obj["den"])
