"""Continuous Lagrange finite elements on the unit interval.

Homogeneous Dirichlet conditions are built in: only interior nodes carry
degrees of freedom, so every assembled operator is ``ndof x ndof`` with
``ndof = n_elements * p - 1``.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from math import ceil

import numpy as np

from .errors import InvalidDegree, OutOfDomain, SpaceMismatch, TooFewElements
from .numeric_kernel import gauss_legendre


@lru_cache(maxsize=None)
def _lagrange_coeffs(p):
    # Column a holds the monomial coefficients of the a-th Lagrange polynomial
    # for equispaced nodes on [0, 1].
    xi = np.linspace(0.0, 1.0, p + 1)
    vander = np.vander(xi, p + 1, increasing=True)
    return np.linalg.inv(vander)


def lagrange_basis(p, xi, deriv=0):
    """Reference Lagrange shape functions on [0, 1].

    Returns an array of shape ``(len(xi), p + 1)`` with derivative order
    ``deriv`` taken with respect to the reference coordinate.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    coeffs = _lagrange_coeffs(p)
    if deriv:
        coeffs = np.polynomial.polynomial.polyder(coeffs, m=deriv, axis=0)
    return np.polynomial.polynomial.polyval(xi, coeffs).T


@dataclass(frozen=True)
class FemSpace1D:
    """Uniform CG-``p`` space on (0, 1) with boundary dofs eliminated."""

    n_elements: int
    p: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    connectivity: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.p <= 8:
            raise InvalidDegree(f"spatial degree must be in [1, 8], got {self.p}")
        if self.n_elements < 2:
            raise TooFewElements(f"need at least 2 elements, got {self.n_elements}")
        n_full = self.n_elements * self.p + 1
        full_nodes = np.linspace(0.0, 1.0, n_full)
        # global node e*p + a; interior dof index is global - 1 (-1 and ndof are boundary)
        conn = np.arange(self.n_elements)[:, None] * self.p + np.arange(self.p + 1)[None, :]
        object.__setattr__(self, "nodes", full_nodes[1:-1])
        object.__setattr__(self, "connectivity", conn)
        self.nodes.setflags(write=False)
        self.connectivity.setflags(write=False)

    @property
    def h(self):
        return 1.0 / self.n_elements

    @property
    def ndof(self):
        return self.n_elements * self.p - 1

    @property
    def n_full(self):
        return self.n_elements * self.p + 1

    def full_coefficients(self, coefficients):
        """Pad interior coefficients with the zero boundary values."""
        coefficients = np.asarray(coefficients, dtype=float)
        pad = [(0, 0)] * (coefficients.ndim - 1) + [(1, 1)]
        return np.pad(coefficients, pad)

    def element_quadrature(self, n_points):
        """Physical quadrature points and weights, each of shape ``(n_elements, n_points)``."""
        rule = gauss_legendre(n_points)
        xi = 0.5 * (rule.nodes + 1.0)
        left = np.arange(self.n_elements)[:, None] * self.h
        x = left + self.h * xi[None, :]
        w = np.broadcast_to(0.5 * self.h * rule.weights, x.shape)
        return xi, x, w

    def scatter(self, element_matrices):
        """Sum element matrices ``(..., n_elements, p+1, p+1)`` into interior-dof matrices."""
        lead = element_matrices.shape[:-3]
        elem = element_matrices.reshape((-1,) + element_matrices.shape[-3:])
        full = np.zeros((elem.shape[0], self.n_full, self.n_full))
        for a in range(self.p + 1):
            for b in range(self.p + 1):
                rows = self.connectivity[:, a]
                cols = self.connectivity[:, b]
                # rows/cols are distinct within one (a, b) sweep, so fancy += is safe
                full[:, rows, cols] += elem[:, :, a, b]
        return full[:, 1:-1, 1:-1].reshape(lead + (self.ndof, self.ndof))

    def scatter_vector(self, element_vectors):
        lead = element_vectors.shape[:-2]
        elem = element_vectors.reshape((-1,) + element_vectors.shape[-2:])
        full = np.zeros((elem.shape[0], self.n_full))
        for a in range(self.p + 1):
            full[:, self.connectivity[:, a]] += elem[:, :, a]
        return full[:, 1:-1].reshape(lead + (self.ndof,))


@dataclass(frozen=True)
class SpatialFunction:
    """A member of a :class:`FemSpace1D`, stored by its interior nodal values."""

    space: FemSpace1D
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != (self.space.ndof,):
            raise SpaceMismatch(
                f"expected {self.space.ndof} coefficients, got shape {c.shape}"
            )
        object.__setattr__(self, "coefficients", c)

    def __call__(self, x):
        return evaluate(self, x)


def build_space(n_elements, p):
    return FemSpace1D(int(n_elements), int(p))


def _check_same_space(space, *functions):
    for w in functions:
        if w.space != space:
            raise SpaceMismatch(f"function lives on {w.space}, expected {space}")


def mass_quadrature_points(p):
    return ceil((2 * p + 1) / 2) + 1


def stiffness_quadrature_points(p):
    return 2 * p + 1


def default_load_quadrature_points(p):
    return 2 * p + 3


def assemble_mass(space):
    """Mass matrix ``M[i, j] = int psi_i psi_j dx`` on the interior dofs."""
    nq = mass_quadrature_points(space.p)
    xi, _, w = space.element_quadrature(nq)
    phi = lagrange_basis(space.p, xi)
    elem = np.einsum("q,qa,qb->ab", w[0], phi, phi)
    local = np.broadcast_to(elem, (space.n_elements,) + elem.shape)
    mass = space.scatter(local)
    return 0.5 * (mass + mass.T)


def _gradients_at_quadrature(space, coefficient_sets, nq):
    # coefficient_sets: (..., ndof) -> gradients (..., n_elements, nq)
    xi, _, _ = space.element_quadrature(nq)
    dphi = lagrange_basis(space.p, xi, deriv=1) / space.h
    full = space.full_coefficients(coefficient_sets)
    local = full[..., space.connectivity]
    return np.einsum("...ea,qa->...eq", local, dphi)


def weighted_stiffness_from_weights(space, weights, nq):
    """Stiffness ``int c(x) psi_i' psi_j' dx`` for weight samples ``(..., n_elements, nq)``."""
    xi, _, w = space.element_quadrature(nq)
    dphi = lagrange_basis(space.p, xi, deriv=1) / space.h
    elem = np.einsum("...eq,qab->...eab", weights * w, dphi[:, :, None] * dphi[:, None, :])
    out = space.scatter(elem)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def assemble_cross_stiffness(space, wa, wb):
    """``K[i, j] = int wa' wb' psi_i' psi_j' dx``."""
    _check_same_space(space, wa, wb)
    nq = stiffness_quadrature_points(space.p)
    ga = _gradients_at_quadrature(space, wa.coefficients, nq)
    gb = _gradients_at_quadrature(space, wb.coefficients, nq)
    return weighted_stiffness_from_weights(space, ga * gb, nq)


def assemble_weighted_stiffness(space, w):
    """``K[i, j] = int (w')^2 psi_i' psi_j' dx``, positive semi-definite."""
    return assemble_cross_stiffness(space, w, w)


def assemble_cross_stiffness_batch(space, coefficient_sets, pairs):
    """Cross stiffness for many function pairs at once.

    Parameters
    ----------
    coefficient_sets : array, shape (n_functions, ndof)
    pairs : sequence of (a, b)
        Zero-based indices into ``coefficient_sets``.

    Returns
    -------
    array, shape (len(pairs), ndof, ndof)
    """
    nq = stiffness_quadrature_points(space.p)
    grads = _gradients_at_quadrature(space, np.asarray(coefficient_sets, dtype=float), nq)
    ia = [a for a, _ in pairs]
    ib = [b for _, b in pairs]
    return weighted_stiffness_from_weights(space, grads[ia] * grads[ib], nq)


def assemble_stiffness(space):
    """Plain Laplacian stiffness ``int psi_i' psi_j' dx``."""
    nq = stiffness_quadrature_points(space.p)
    return weighted_stiffness_from_weights(space, np.ones((space.n_elements, nq)), nq)


def assemble_load(space, f, quad_points=None):
    """Load vector ``F[i] = int f psi_i dx``; ``f`` must accept numpy arrays."""
    if quad_points is None:
        quad_points = default_load_quadrature_points(space.p)
    if quad_points < space.p + 1:
        raise ValueError(f"need at least p + 1 = {space.p + 1} quadrature points")
    xi, x, w = space.element_quadrature(quad_points)
    phi = lagrange_basis(space.p, xi)
    fx = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    return space.scatter_vector(np.einsum("eq,eq,qa->ea", fx, w, phi))


def interpolate(space, g):
    """Nodal interpolant of ``g`` at the interior Lagrange nodes."""
    values = np.broadcast_to(np.asarray(g(space.nodes), dtype=float), space.nodes.shape)
    return SpatialFunction(space, np.array(values))


def values_at_quadrature(space, coefficients, quad_points):
    """Values of one or more functions at element quadrature points, shape ``(..., n_elements, nq)``."""
    xi, _, _ = space.element_quadrature(quad_points)
    phi = lagrange_basis(space.p, xi)
    local = space.full_coefficients(coefficients)[..., space.connectivity]
    return np.einsum("...ea,qa->...eq", local, phi)


def l2_norm_of_difference(space, w, g, quad_points=None):
    """``||w - g||_{L2(0,1)}`` by per-element Gauss quadrature."""
    _check_same_space(space, w)
    if quad_points is None:
        quad_points = default_load_quadrature_points(space.p)
    if quad_points < space.p + 2:
        raise ValueError(f"need at least p + 2 = {space.p + 2} quadrature points")
    _, x, wq = space.element_quadrature(quad_points)
    diff = values_at_quadrature(space, w.coefficients, quad_points) - g(x)
    return float(np.sqrt(np.sum(wq * diff**2)))


def evaluate(w, x):
    """Point evaluation of a :class:`SpatialFunction` at ``x`` in [0, 1]."""
    space = w.space
    x_arr = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x_arr)
    if np.any(flat < 0.0) or np.any(flat > 1.0):
        raise OutOfDomain(f"x outside [0, 1]: {x}")
    elem = np.minimum((flat / space.h).astype(int), space.n_elements - 1)
    xi = flat / space.h - elem
    full = space.full_coefficients(w.coefficients)
    local = full[space.connectivity[elem]]
    out = np.empty_like(flat)
    for i in range(flat.size):
        out[i] = lagrange_basis(space.p, xi[i])[0] @ local[i]
    return float(out[0]) if x_arr.ndim == 0 else out.reshape(x_arr.shape)
