"""Truncating decimal rendering for fixed-point integers and mpmath reals."""
from __future__ import annotations

import mpmath


def fixed_to_decimal(value: int, frac_bits: int, digits: int) -> str:
    """Render value / 2**frac_bits with ``digits`` significant digits, truncated toward zero."""
    if value == 0:
        return "0"
    sign = "-" if value < 0 else ""
    mag = abs(value)
    # exponent estimate, then correct by at most one step either way
    exp10 = int(mpmath.floor(mpmath.log10(mpmath.mpf(mag)) - frac_bits * mpmath.log10(2)))
    while True:
        shift = digits - 1 - exp10
        if shift >= 0:
            scaled = (mag * 10 ** shift) >> frac_bits
        else:
            scaled = (mag >> frac_bits) // 10 ** (-shift) if frac_bits >= 0 else 0
        if scaled >= 10 ** digits:
            exp10 += 1
        elif scaled < 10 ** (digits - 1):
            exp10 -= 1
        else:
            break
    text = str(scaled)
    point = exp10 + 1  # digits before the decimal point
    if point <= 0:
        body = "0." + "0" * (-point) + text
    elif point >= digits:
        body = text + "0" * (point - digits)
    else:
        body = text[:point] + "." + text[point:]
    return sign + body


def mpf_to_decimal(x, digits: int) -> str:
    """Truncated decimal string of an mpmath real."""
    x = mpmath.mpf(x)
    if x == 0:
        return "0"
    sign, man, exp, _bc = x._mpf_
    man = -int(man) if sign else int(man)
    if exp >= 0:
        return fixed_to_decimal(man << exp, 0, digits)
    return fixed_to_decimal(man, -exp, digits)
