"""Wigner 3-j symbols and the Stokes coupling ratio of the J=1 <-> J=2 transition."""

from __future__ import annotations

from fractions import Fraction
from math import factorial, sqrt

from stirap6.errors import DomainError


def _twice(value, name: str) -> int:
    """Return 2*value as an int, refusing anything that is not a half-integer."""
    doubled = Fraction(value) * 2 if not isinstance(value, float) else value * 2
    if isinstance(doubled, float):
        if not doubled.is_integer():
            raise DomainError(f"{name}={value!r} is not a half-integer")
        return int(doubled)
    if doubled.denominator != 1:
        raise DomainError(f"{name}={value!r} is not a half-integer")
    return int(doubled)


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3-j symbol ``(j1 j2 j3; m1 m2 m3)``.

    Evaluated with the Racah single-sum formula in exact rational arithmetic;
    only the final square root is taken in floating point. Arguments may be
    ints, floats or ``Fraction`` as long as they are half-integers.

    Returns 0 for vanishing selection rules (m-sum, triangle rule,
    ``|m| > j``, integer perimeter); raises ``DomainError`` for negative
    or non-half-integer arguments.
    """
    tj1, tj2, tj3 = _twice(j1, "j1"), _twice(j2, "j2"), _twice(j3, "j3")
    tm1, tm2, tm3 = _twice(m1, "m1"), _twice(m2, "m2"), _twice(m3, "m3")
    if min(tj1, tj2, tj3) < 0:
        raise DomainError("angular momenta must be non-negative")

    if tm1 + tm2 + tm3 != 0:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm3) > tj3:
        return 0.0
    # j and m must share parity, and j1+j2+j3 must be an integer.
    if (tj1 - tm1) % 2 or (tj2 - tm2) % 2 or (tj3 - tm3) % 2:
        return 0.0
    if (tj1 + tj2 + tj3) % 2:
        return 0.0
    if tj3 < abs(tj1 - tj2) or tj3 > tj1 + tj2:
        return 0.0

    # Everything below is in integer units after halving.
    a = (tj1 + tj2 - tj3) // 2
    b = (tj1 - tj2 + tj3) // 2
    c = (-tj1 + tj2 + tj3) // 2
    perim = (tj1 + tj2 + tj3) // 2

    triangle = Fraction(factorial(a) * factorial(b) * factorial(c), factorial(perim + 1))
    norm = (
        factorial((tj1 + tm1) // 2) * factorial((tj1 - tm1) // 2)
        * factorial((tj2 + tm2) // 2) * factorial((tj2 - tm2) // 2)
        * factorial((tj3 + tm3) // 2) * factorial((tj3 - tm3) // 2)
    )

    # Racah sum over k where every factorial argument is non-negative.
    t1 = (tj3 - tj2 + tm1) // 2
    t2 = (tj3 - tj1 - tm2) // 2
    t3 = a
    t4 = (tj1 - tm1) // 2
    t5 = (tj2 + tm2) // 2
    kmin = max(0, -t1, -t2)
    kmax = min(t3, t4, t5)
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        denom = (
            factorial(k) * factorial(t1 + k) * factorial(t2 + k)
            * factorial(t3 - k) * factorial(t4 - k) * factorial(t5 - k)
        )
        total += Fraction((-1) ** k, denom)

    phase = -1 if ((tj1 - tj2 - tm3) // 2) % 2 else 1
    return phase * float(total) * sqrt(triangle * norm)


def coupling_ratio_q() -> float:
    """Ratio of the two sigma+ Stokes couplings out of ``|1,-1>`` and ``|1,+1>``.

    ``|1,-1> <-> |2,-2>`` versus ``|1,+1> <-> |2,0>``; the reduced matrix
    element cancels so only the 3-j symbols remain.
    """
    strong = wigner3j(1, 1, 2, 1, 1, -2)
    weak = wigner3j(1, 1, 2, -1, 1, 0)
    return abs(strong) / abs(weak)


Q = coupling_ratio_q()
