"""Double-double arithmetic (~31 significant digits) for long complex orbits.

Error-free transforms after Dekker/Knuth; enough surface for polynomial
iteration of skew-products.  Values are (hi, lo) float pairs; complex values
are pairs of such pairs.
"""

from __future__ import annotations

_SPLIT = 134217729.0  # 2^27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _two_prod(a, b):
    p = a * b
    ca = _SPLIT * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLIT * b
    bhi = cb - (cb - b)
    blo = b - bhi
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def dd_add(xh, xl, yh, yl):
    s, e = _two_sum(xh, yh)
    t, f = _two_sum(xl, yl)
    e += t
    s, e = _quick_two_sum(s, e)
    e += f
    return _quick_two_sum(s, e)


def dd_neg(xh, xl):
    return -xh, -xl


def dd_mul(xh, xl, yh, yl):
    p, e = _two_prod(xh, yh)
    e += xh * yl + xl * yh
    return _quick_two_sum(p, e)


def dd_mul_d(xh, xl, y):
    p, e = _two_prod(xh, y)
    e += xl * y
    return _quick_two_sum(p, e)


class DDComplex:
    """Complex number with double-double real and imaginary parts."""

    __slots__ = ("rh", "rl", "ih", "il")

    def __init__(self, rh=0.0, rl=0.0, ih=0.0, il=0.0):
        self.rh, self.rl, self.ih, self.il = rh, rl, ih, il

    @classmethod
    def from_complex(cls, z):
        z = complex(z)
        return cls(z.real, 0.0, z.imag, 0.0)

    def to_complex(self):
        return complex(self.rh + self.rl, self.ih + self.il)

    def __add__(self, other):
        rh, rl = dd_add(self.rh, self.rl, other.rh, other.rl)
        ih, il = dd_add(self.ih, self.il, other.ih, other.il)
        return DDComplex(rh, rl, ih, il)

    def __mul__(self, other):
        # (a+bi)(c+di) = (ac - bd) + (ad + bc) i
        ac = dd_mul(self.rh, self.rl, other.rh, other.rl)
        bd = dd_mul(self.ih, self.il, other.ih, other.il)
        ad = dd_mul(self.rh, self.rl, other.ih, other.il)
        bc = dd_mul(self.ih, self.il, other.rh, other.rl)
        rh, rl = dd_add(ac[0], ac[1], -bd[0], -bd[1])
        ih, il = dd_add(ad[0], ad[1], bc[0], bc[1])
        return DDComplex(rh, rl, ih, il)

    def mul_d(self, y: float):
        rh, rl = dd_mul_d(self.rh, self.rl, y)
        ih, il = dd_mul_d(self.ih, self.il, y)
        return DDComplex(rh, rl, ih, il)

    def abs2_hi(self):
        return self.rh * self.rh + self.ih * self.ih


def dd_polyval(rev_coeffs, z: DDComplex) -> DDComplex:
    """Horner evaluation; rev_coeffs are DDComplex, highest degree first."""
    acc = DDComplex()
    for c in rev_coeffs:
        acc = acc * z + c
    return acc


def dd_coeffs(coeffs) -> list:
    return [DDComplex.from_complex(c) for c in coeffs]
