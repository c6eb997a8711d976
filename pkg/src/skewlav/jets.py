"""Truncated power series (jets) in one variable with complex coefficients."""

from __future__ import annotations

import numpy as np

MAX_JET_ORDER = 32


class Jet:
    """Polynomial truncated at a fixed order N; coefficients [z^0 .. z^N].

    All arithmetic truncates exactly at the common order. Composition
    requires the inner jet to have zero constant term.
    """

    __slots__ = ("order", "coeffs")

    def __init__(self, coeffs, order=None):
        c = np.asarray(coeffs, dtype=complex)
        if order is None:
            order = len(c) - 1
        if order < 1 or order > MAX_JET_ORDER:
            raise ValueError(f"jet order must be in [1, {MAX_JET_ORDER}]")
        out = np.zeros(order + 1, dtype=complex)
        n = min(len(c), order + 1)
        out[:n] = c[:n]
        self.order = order
        self.coeffs = out

    @classmethod
    def identity(cls, order):
        return cls([0.0, 1.0], order)

    @classmethod
    def constant(cls, value, order):
        return cls([value], order)

    def __eq__(self, other):
        return (
            isinstance(other, Jet)
            and self.order == other.order
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __add__(self, other):
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            return Jet(self.coeffs[: n + 1] + other.coeffs[: n + 1], n)
        c = self.coeffs.copy()
        c[0] += other
        return Jet(c, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.order)

    def __sub__(self, other):
        if isinstance(other, Jet):
            return self + (-other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            full = np.convolve(self.coeffs[: n + 1], other.coeffs[: n + 1])
            return Jet(full[: n + 1], n)
        return Jet(self.coeffs * other, self.order)

    __rmul__ = __mul__

    def compose(self, inner: "Jet") -> "Jet":
        """self(inner(z)), truncated; inner must satisfy inner(0) = 0."""
        if inner.coeffs[0] != 0:
            raise ValueError("composition requires inner jet with zero constant term")
        n = min(self.order, inner.order)
        acc = Jet([self.coeffs[n]], n)
        for k in range(n - 1, -1, -1):  # Horner in the jet algebra
            acc = acc * inner + self.coeffs[k]
        return acc

    def eval(self, z: complex) -> complex:
        acc = 0.0 + 0.0j
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc

    def deriv(self) -> "Jet":
        n = self.order
        c = self.coeffs[1:] * np.arange(1, n + 1)
        return Jet(c, max(n - 1, 1))

    def truncate(self, order) -> "Jet":
        return Jet(self.coeffs, order)

    def __repr__(self):
        return f"Jet(order={self.order}, coeffs={list(self.coeffs)})"
