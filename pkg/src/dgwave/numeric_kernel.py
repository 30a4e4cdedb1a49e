"""Dense linear algebra and quadrature primitives.

Matrices are plain 2-D ``numpy`` arrays; the routines here add the input
checks and failure modes the rest of the package relies on.
"""
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotSPD, SingularMatrix

PIVOT_TOL = 1e-14
EIG_TOL = 1e-13
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule on the reference interval [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)

    def mapped(self, a, b):
        """Nodes and weights transplanted onto [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


_GL_CACHE = {}


def gauss_legendre(n):
    """Return the ``n``-point Gauss-Legendre rule on [-1, 1] (``1 <= n <= 64``)."""
    n = int(n)
    if not 1 <= n <= 64:
        raise ValueError(f"Gauss-Legendre rule needs 1 <= n <= 64, got {n}")
    rule = _GL_CACHE.get(n)
    if rule is None:
        x, w = np.polynomial.legendre.leggauss(n)
        x.setflags(write=False)
        w.setflags(write=False)
        rule = _GL_CACHE[n] = QuadratureRule(x, w)
    return rule


def _check_square(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def lu_solve(a, b):
    """Solve ``a x = b`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrix
        If a pivot falls below ``PIVOT_TOL`` relative to the largest entry of ``a``.
    """
    a = _check_square(a)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"rhs length {b.shape[0]} != matrix size {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise SingularMatrix("matrix has non-finite entries")
    scale = max(np.abs(a).max(initial=0.0), 1.0)
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrix
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.size == 0 or pivots.min() <= PIVOT_TOL * scale:
        raise SingularMatrix(
            f"pivot {pivots.min(initial=0.0):.3e} below threshold {PIVOT_TOL * scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def _spd_eigh(a):
    a = _check_square(a)
    scale = max(np.abs(a).max(initial=0.0), 1.0)
    if np.abs(a - a.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise NotSPD("matrix is not symmetric")
    lam, v = np.linalg.eigh(0.5 * (a + a.T))
    if lam.size and lam.min() <= EIG_TOL * lam.max():
        raise NotSPD(f"smallest eigenvalue {lam.min():.3e} is not positive")
    return lam, v


def spd_sqrt(a):
    """Symmetric square root ``s`` of an SPD matrix, ``s @ s == a``."""
    lam, v = _spd_eigh(a)
    s = (v * np.sqrt(lam)) @ v.T
    return 0.5 * (s + s.T)


def spd_inv_sqrt(a):
    """Symmetric inverse square root ``s`` of an SPD matrix, ``s @ a @ s == I``."""
    lam, v = _spd_eigh(a)
    s = (v / np.sqrt(lam)) @ v.T
    return 0.5 * (s + s.T)
