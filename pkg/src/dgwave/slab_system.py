"""Block system ``A z = b`` for one DG time slab.

Unknowns are ordered spatial-dof major, temporal index minor: entry
``m * (q + 1) + j`` of ``z`` multiplies basis function ``j`` in component ``m``.
All spatial quantities live in the mass-orthonormalised coordinates
``Z = M^{1/2} U``.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch
from .numeric_kernel import lu_solve


@dataclass(frozen=True)
class PicardStiffness:
    """``K(t) = sum_t c_t phi^a_t(t) phi^b_t(t) K_t`` for a frozen Picard iterate.

    ``pairs`` holds 1-based temporal basis indices ``(a, b)`` with ``a <= b``;
    ``matrices`` has shape ``(n_terms, ndof, ndof)``.
    """

    ndof: int
    pairs: tuple = ()
    coefficients: np.ndarray = field(default_factory=lambda: np.zeros(0))
    matrices: np.ndarray = None

    def __post_init__(self):
        mats = self.matrices
        if mats is None:
            mats = np.zeros((0, self.ndof, self.ndof))
        mats = np.asarray(mats, dtype=float)
        coeffs = np.asarray(self.coefficients, dtype=float)
        if mats.shape != (len(self.pairs), self.ndof, self.ndof) or coeffs.shape != (len(self.pairs),):
            raise DimensionMismatch(
                f"{len(self.pairs)} terms but matrices {mats.shape}, coefficients {coeffs.shape}"
            )
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def zero(cls, ndof):
        return cls(ndof)

    @property
    def n_terms(self):
        return len(self.pairs)

    def time_weights(self, phi):
        """``c_t phi^a phi^b`` for basis values ``phi`` of shape ``(q + 1, ...)``."""
        return np.stack(
            [c * phi[a - 1] * phi[b - 1] for c, (a, b) in zip(self.coefficients, self.pairs)]
        ) if self.pairs else np.zeros((0,) + np.shape(phi)[1:])

    def at(self, basis, t):
        """The spatial matrix ``K(t)`` at a time inside ``basis``' slab."""
        if not self.pairs:
            return np.zeros((self.ndof, self.ndof))
        weights = self.time_weights(basis.values(t))
        return np.tensordot(weights, self.matrices, axes=1)


@dataclass(frozen=True)
class SlabTraces:
    """State handed from one slab to the next: ``Z(t-)``, ``dZ/dt(t-)`` and ``K(t-)``."""

    z_in: np.ndarray
    zdot_in: np.ndarray
    k_in: np.ndarray

    @classmethod
    def zero(cls, ndof):
        return cls(np.zeros(ndof), np.zeros(ndof), np.zeros((ndof, ndof)))


@dataclass(frozen=True)
class SlabSystem:
    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class SlabSolution:
    """Coefficients ``alpha[m, j]`` of ``Z(t) = sum_j alpha[:, j] phi^j(t)`` on one slab."""

    basis: object
    alpha: np.ndarray

    def value(self, t, deriv=0):
        return self.alpha @ self.basis.values(t, deriv)

    def end_traces(self):
        """``(Z(t_n-), dZ/dt(t_n-))``."""
        return self.alpha @ self.basis.right_trace(), self.alpha @ self.basis.right_trace(1)

    def start_traces(self):
        """``(Z(t_{n-1}+), dZ/dt(t_{n-1}+))``."""
        return self.alpha @ self.basis.left_trace(), self.alpha @ self.basis.left_trace(1)


class TimeMatrices(NamedTuple):
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    m4: np.ndarray
    m5: np.ndarray


def time_matrices(basis):
    """The five ``(q+1) x (q+1)`` temporal matrices, indexed ``[l, j]`` (test ``l``, trial ``j``).

    ``m1 = (phi_j'', phi_l')``, ``m2 = (phi_j', phi_l')``, ``m3 = (phi_j, phi_l')``,
    ``m4 = phi_j'(t+) phi_l'(t+)``, ``m5 = phi_j(t+) phi_l(t+)``.
    """
    w, phi, dphi, ddphi = basis.quadrature_values(derivs=(0, 1, 2))
    m1 = np.einsum("q,lq,jq->lj", w, dphi, ddphi)
    m2 = np.einsum("q,lq,jq->lj", w, dphi, dphi)
    m3 = np.einsum("q,lq,jq->lj", w, dphi, phi)
    left = basis.left_trace()
    dleft = basis.left_trace(1)
    return TimeMatrices(m1, m2, m3, np.outer(dleft, dleft), np.outer(left, left))


def quartic_products(basis, pairs):
    """``T[t, l, j] = int phi^a_t phi^b_t phi^j (phi^l)' dt`` for each term ``(a, b)``."""
    w, phi, dphi = basis.quadrature_values(derivs=(0, 1))
    if not pairs:
        return np.zeros((0, basis.size, basis.size))
    ab = np.stack([phi[a - 1] * phi[b - 1] for a, b in pairs])
    return np.einsum("q,tq,jq,lq->tlj", w, ab, phi, dphi)


def assemble_nonlinear_time_matrices(basis, ks):
    """Per-spatial-pair blocks of the frozen-stiffness terms.

    Returns ``(m3_tilde, m5_tilde)``, each of shape ``(ndof, ndof, q+1, q+1)``,
    where block ``[i, j]`` is the ``(l, j')`` temporal matrix built from the
    scalar entry ``K_ij(t)``.
    """
    n = basis.size
    if ks.n_terms == 0:
        zero = np.zeros((ks.ndof, ks.ndof, n, n))
        return zero, zero.copy()
    tensors = quartic_products(basis, ks.pairs) * ks.coefficients[:, None, None]
    m3_tilde = np.einsum("tij,tlm->ijlm", ks.matrices, tensors)
    k_left = ks.at(basis, basis.slab.t_start)
    left = basis.left_trace()
    m5_tilde = k_left[:, :, None, None] * np.outer(left, left)[None, None]
    return m3_tilde, m5_tilde


def blocks_to_matrix(blocks):
    """``(ndof, ndof, n, n)`` block array to the ``(ndof*n, ndof*n)`` matrix."""
    d, _, n, _ = blocks.shape
    return blocks.transpose(0, 2, 1, 3).reshape(d * n, d * n)


def assemble_block_A(tm, m3_tilde, m5_tilde, gamma):
    """``A = blockdiag(M1 + M4) + [B_ij]`` with
    ``B_ij = 2 gamma delta_ij M2 + gamma^2 delta_ij (M3 + M5) + m3_tilde_ij + m5_tilde_ij``.
    """
    n = tm.m1.shape[0]
    if m3_tilde.shape != m5_tilde.shape or m3_tilde.shape[2:] != (n, n):
        raise DimensionMismatch(
            f"inconsistent blocks {m3_tilde.shape} / {m5_tilde.shape} for time size {n}"
        )
    ndof = m3_tilde.shape[0]
    diag = tm.m1 + tm.m4 + 2.0 * gamma * tm.m2 + gamma**2 * (tm.m3 + tm.m5)
    return np.kron(np.eye(ndof), diag) + blocks_to_matrix(m3_tilde + m5_tilde)


def assemble_load_part(basis, g, quad_points=None):
    """``int G_m(t) phi_j'(t) dt`` as an ``(ndof, q+1)`` array; ``g(t)`` returns ``G`` at one time."""
    if quad_points is None:
        quad_points = basis.q + 4
    if quad_points < basis.q + 2:
        raise ValueError(f"need at least q + 2 = {basis.q + 2} temporal quadrature points")
    t, _ = basis.quadrature(quad_points)
    w, dphi = basis.quadrature_values(quad_points, derivs=(1,))
    gt = np.stack([np.asarray(g(ti), dtype=float) for ti in t], axis=1)
    return gt @ (w[:, None] * dphi.T)


def assemble_rhs(basis, traces, g, gamma, quad_points=None):
    """Right-hand side ``b`` (flattened, spatial-major) for one slab."""
    load = assemble_load_part(basis, g, quad_points) if g is not None else 0.0
    left = basis.left_trace()
    dleft = basis.left_trace(1)
    z = np.asarray(traces.z_in, dtype=float)
    zdot = np.asarray(traces.zdot_in, dtype=float)
    trace_z = gamma**2 * z + np.asarray(traces.k_in) @ z
    b = load + np.outer(zdot, dleft) + np.outer(trace_z, left)
    return np.ravel(b)


def solve_slab(system, basis):
    """Solve the slab system and return the coefficient array as a :class:`SlabSolution`."""
    z = lu_solve(system.a, system.b)
    return SlabSolution(basis, z.reshape(-1, basis.size))
