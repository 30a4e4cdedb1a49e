"""Shifted Legendre polynomials on a time slab ``(t_start, t_end]``.

Basis function ``j`` (1-based) is the Legendre polynomial of degree ``j - 1``
pulled back through ``s = 2 (t - t_start) / k - 1``. Every member equals 1 at
the right end of the slab and ``(-1)**(j - 1)`` at the left end.
"""
from dataclasses import dataclass
from functools import lru_cache
from math import ceil

import numpy as np
from numpy.polynomial import legendre

from .errors import DegreeTooLow, IndexOutOfRange, OutOfRange, TooManyFactors
from .numeric_kernel import gauss_legendre


@dataclass(frozen=True)
class TimeSlab:
    index: int
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"empty slab ({self.t_start}, {self.t_end}]")

    @property
    def k(self):
        return self.t_end - self.t_start


@lru_cache(maxsize=None)
def _reference_coefficients(q, deriv):
    # Row j: Legendre-series coefficients of d^deriv/ds^deriv P_j(s), j = 0..q.
    rows = np.zeros((q + 1, q + 1))
    for j in range(q + 1):
        c = np.zeros(j + 1)
        c[j] = 1.0
        if deriv:
            c = legendre.legder(c, deriv)
        rows[j, : len(c)] = c
    return rows


def product_quadrature_points(q):
    """Gauss points that integrate a product of four degree-``q`` polynomials exactly."""
    return ceil((4 * q + 1) / 2) + 1


@dataclass(frozen=True)
class TimeSlabBasis:
    slab: TimeSlab
    q: int

    def __post_init__(self):
        if self.q < 2:
            raise DegreeTooLow(f"temporal degree must be >= 2, got {self.q}")

    @property
    def size(self):
        return self.q + 1

    @property
    def k(self):
        return self.slab.k

    def to_reference(self, t):
        return 2.0 * (np.asarray(t, dtype=float) - self.slab.t_start) / self.k - 1.0

    def values(self, t, deriv=0):
        """All basis functions (or derivatives) at ``t``; shape ``(q + 1,) + shape(t)``."""
        if deriv not in (0, 1, 2):
            raise ValueError(f"derivative order must be 0, 1 or 2, got {deriv}")
        return self.reference_values(self.to_reference(t), deriv)

    def reference_values(self, s, deriv=0):
        """Like :meth:`values` but at reference coordinates ``s`` in [-1, 1]."""
        coeffs = _reference_coefficients(self.q, deriv)
        vals = np.stack([legendre.legval(s, c) for c in coeffs])
        return vals * (2.0 / self.k) ** deriv

    def eval(self, j, t, deriv=0):
        """Value of basis function ``j`` (1-based) or its derivative at ``t``."""
        if not 1 <= j <= self.size:
            raise IndexOutOfRange(f"basis index {j} outside 1..{self.size}")
        tol = 1e-12 * max(1.0, abs(self.slab.t_end))
        if not self.slab.t_start - tol <= t <= self.slab.t_end + tol:
            raise OutOfRange(f"t = {t} outside slab [{self.slab.t_start}, {self.slab.t_end}]")
        return float(self.values(t, deriv)[j - 1])

    def left_trace(self, deriv=0):
        return self.reference_values(-1.0, deriv)

    def right_trace(self, deriv=0):
        return self.reference_values(1.0, deriv)

    def quadrature(self, n_points=None):
        """Gauss nodes and weights on the slab (default: exact for quartic products)."""
        if n_points is None:
            n_points = product_quadrature_points(self.q)
        return gauss_legendre(n_points).mapped(self.slab.t_start, self.slab.t_end)

    def quadrature_values(self, n_points=None, derivs=(0,)):
        """Slab quadrature weights and basis values at the nodes, one array per ``derivs`` entry.

        Values are computed from the reference nodes directly, so no precision
        is lost to the affine map on short slabs far from ``t = 0``.
        """
        if n_points is None:
            n_points = product_quadrature_points(self.q)
        rule = gauss_legendre(n_points)
        w = 0.5 * self.k * rule.weights
        return (w,) + tuple(self.reference_values(rule.nodes, d) for d in derivs)

    def product_integral(self, factors):
        """Integral over the slab of a product of 1 to 4 basis factors.

        ``factors`` is a list of ``(j, deriv)`` pairs with 1-based ``j``.
        """
        if not 1 <= len(factors) <= 4:
            raise TooManyFactors(f"between 1 and 4 factors supported, got {len(factors)}")
        # canonical order keeps the result bit-identical under permutation
        factors = sorted((int(j), int(d)) for j, d in factors)
        w, *tables = self.quadrature_values(derivs=(0, 1, 2))
        integrand = np.array(w)
        for j, deriv in factors:
            if not 1 <= j <= self.size:
                raise IndexOutOfRange(f"basis index {j} outside 1..{self.size}")
            integrand = integrand * tables[deriv][j - 1]
        return float(integrand.sum())


def make_basis(slab, q):
    return TimeSlabBasis(slab, int(q))
