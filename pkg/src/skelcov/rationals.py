"""Exact scalars: rationals plus a single infinity sentinel.

Lengths and valuations are `fractions.Fraction` values; the only non-rational
value ever allowed is ``INF`` (edge lengths of rays, the self-valuation of a
point).  ``INF`` never enters finite arithmetic: minima against it return the
finite side, and sums involving it are only ever reported as infinite.
"""

from __future__ import annotations

from fractions import Fraction

INF = float("inf")

Scalar = Fraction | float  # the float is only ever INF


def is_inf(x: Scalar) -> bool:
    return x == INF


def parse_scalar(text: str) -> Scalar:
    """Parse ``"p/q"``, a plain integer string, or ``"inf"``."""
    s = text.strip()
    if s == "inf":
        return INF
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def format_scalar(x: Scalar) -> str:
    """Inverse of :func:`parse_scalar`; always emits reduced ``p/q`` or ``inf``."""
    if is_inf(x):
        return "inf"
    return str(Fraction(x))
