"""Slab-by-slab time marching with Picard linearisation of the stress term.

The model problem is

    u'' + 2 gamma u' + gamma^2 u - d/dx(c (u_x)^3) = f   on (0, 1) x (0, T]

with homogeneous Dirichlet data, where ``c = SolverConfig.stress_coefficient``
(1/3 by default). Inside each slab the coefficient ``(u_x)^2`` is frozen at the
previous Picard iterate and the resulting linear slab system is re-solved
until the slab coefficients stop changing.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import space_fem
from .errors import MissingExactSolution, OutOfRange
from .numeric_kernel import spd_inv_sqrt, spd_sqrt
from .slab_system import (
    PicardStiffness,
    SlabSystem,
    SlabTraces,
    assemble_block_A,
    assemble_nonlinear_time_matrices,
    assemble_rhs,
    solve_slab,
    time_matrices,
)
from .time_basis import TimeSlab, make_basis

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    gamma: float = 1.0
    T: float = 1.0
    p: int = 2
    q: int = 2
    n_elements: int = 4
    n_slabs: int = 16
    picard_tol: float = 1e-10
    picard_max: int = 30
    load_quad_points: Optional[int] = None
    time_quad_points: Optional[int] = None
    stress_coefficient: float = 1.0 / 3.0
    picard_acceleration: str = "anderson"
    anderson_depth: int = 5

    def __post_init__(self):
        if self.picard_acceleration not in ("anderson", "none"):
            raise ValueError(f"unknown Picard acceleration {self.picard_acceleration!r}")
        if self.q < 2:
            raise ValueError(f"q must be >= 2, got {self.q}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max < 1:
            raise ValueError("picard_max must be >= 1")
        if self.n_slabs < 1:
            raise ValueError("n_slabs must be >= 1")

    @property
    def k(self):
        return self.T / self.n_slabs

    @property
    def h(self):
        return 1.0 / self.n_elements

    @property
    def load_points(self):
        if self.load_quad_points is None:
            return space_fem.default_load_quadrature_points(self.p)
        return self.load_quad_points

    @property
    def time_points(self):
        return self.q + 4 if self.time_quad_points is None else self.time_quad_points


@dataclass(frozen=True)
class Problem:
    """Forcing ``f(x, t)``, initial data ``u0(x)``, ``u1(x)`` and optional exact solution.

    All callables must accept numpy arrays in ``x``.
    """

    forcing: Callable
    u0: Callable
    u1: Callable
    exact: Optional[Callable] = None
    exact_dot: Optional[Callable] = None


def zero_problem():
    def zero(x, t=0.0):
        return np.zeros_like(np.asarray(x, dtype=float))

    return Problem(zero, zero, zero, exact=zero, exact_dot=zero)


@dataclass(frozen=True)
class SlabResult:
    solution: object
    iterations: int
    residual: float
    residual_history: tuple
    converged: bool


@dataclass(frozen=True)
class Operators:
    """Spatial matrices shared by every slab of a march."""

    space: object
    mass: np.ndarray
    mass_sqrt: np.ndarray
    mass_inv_sqrt: np.ndarray

    @classmethod
    def build(cls, space):
        mass = space_fem.assemble_mass(space)
        return cls(space, mass, spd_sqrt(mass), spd_inv_sqrt(mass))


def all_pairs(size):
    """Upper-triangular 1-based index pairs ``(a, b)``, ``a <= b``."""
    return tuple((a, b) for a in range(1, size + 1) for b in range(a, size + 1))


def build_picard_stiffness(space, basis, alpha, m_inv_sqrt, stress_coefficient=1.0 / 3.0):
    """Frozen stiffness ``K(t)`` from slab coefficients ``alpha`` (shape ``(ndof, q+1)``, Z coords).

    Expands ``(d/dx sum_a w_a phi^a(t))^2`` with ``w_a = M^{-1/2} alpha[:, a]`` into
    one term per pair ``a <= b``; cross terms carry the factor 2.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (space.ndof, basis.size):
        raise space_fem.SpaceMismatch(
            f"iterate shape {alpha.shape} != ({space.ndof}, {basis.size})"
        )
    pairs = all_pairs(basis.size)
    coeffs = np.array([1.0 if a == b else 2.0 for a, b in pairs])
    if stress_coefficient == 0.0:
        return PicardStiffness(space.ndof, pairs, coeffs, np.zeros((len(pairs), space.ndof, space.ndof)))
    nodal = (m_inv_sqrt @ alpha).T
    cross = space_fem.assemble_cross_stiffness_batch(
        space, nodal, [(a - 1, b - 1) for a, b in pairs]
    )
    mats = stress_coefficient * (m_inv_sqrt @ cross @ m_inv_sqrt)
    mats = 0.5 * (mats + np.swapaxes(mats, 1, 2))
    return PicardStiffness(space.ndof, pairs, coeffs, mats)


def constant_extension(z, size):
    """Slab coefficients of the function that equals ``z`` for all t."""
    alpha = np.zeros((len(z), size))
    alpha[:, 0] = z
    return alpha


def initialize(config, problem, space, ops=None):
    """Initial traces and the starting Picard stiffness from ``u0`` and ``u1``."""
    ops = ops or Operators.build(space)
    u0 = space_fem.interpolate(space, problem.u0).coefficients
    u1 = space_fem.interpolate(space, problem.u1).coefficients
    z0 = ops.mass_sqrt @ u0
    zdot0 = ops.mass_sqrt @ u1
    basis = make_basis(TimeSlab(0, -config.k, 0.0), config.q)
    ks = build_picard_stiffness(
        space, basis, constant_extension(z0, basis.size), ops.mass_inv_sqrt,
        config.stress_coefficient,
    )
    return SlabTraces(z0, zdot0, ks.at(basis, 0.0)), ks


def transformed_load(space, problem, ops, quad_points=None):
    """``G(t) = M^{-1/2} F(t)`` as a function of time."""

    def g(t):
        return ops.mass_inv_sqrt @ space_fem.assemble_load(
            space, lambda x: problem.forcing(x, t), quad_points
        )

    return g


class AndersonMixer:
    """Anderson mixing of a fixed-point map ``x -> G(x)`` over the last ``depth`` steps."""

    def __init__(self, depth):
        self.depth = depth
        self._x = []
        self._r = []

    def update(self, x, gx):
        r = gx - x
        self._x.append(x)
        self._r.append(r)
        del self._x[: -(self.depth + 1)]
        del self._r[: -(self.depth + 1)]
        if len(self._r) < 2 or self.depth == 0:
            return gx
        d_r = np.diff(np.array(self._r), axis=0).T
        d_x = np.diff(np.array(self._x), axis=0).T
        gamma, *_ = np.linalg.lstsq(d_r, r, rcond=None)
        return gx - (d_x + d_r) @ gamma


def march_slab(config, space, basis, traces, warm_start, g, m_inv_sqrt, initial_iterate=None):
    """Picard loop on one slab.

    Each pass solves the slab system with the stiffness frozen at the current
    iterate. ``warm_start`` is the stiffness for the first pass and
    ``initial_iterate`` (default: ``traces.z_in`` held constant) the iterate it
    is measured against. The residual is
    ``max|alpha_new - alpha_old| / (1 + max|alpha_new|)``.
    """
    tm = time_matrices(basis)
    b = assemble_rhs(basis, traces, g, config.gamma, config.time_points)
    x = (
        constant_extension(traces.z_in, basis.size) if initial_iterate is None
        else np.asarray(initial_iterate, dtype=float)
    ).ravel()
    mixer = AndersonMixer(config.anderson_depth if config.picard_acceleration == "anderson" else 0)
    ks = warm_start
    history = []
    for _ in range(config.picard_max):
        m3t, m5t = assemble_nonlinear_time_matrices(basis, ks)
        a = assemble_block_A(tm, m3t, m5t, config.gamma)
        solution = solve_slab(SlabSystem(a, b), basis)
        gx = solution.alpha.ravel()
        residual = np.abs(gx - x).max(initial=0.0) / (1.0 + np.abs(gx).max(initial=0.0))
        history.append(float(residual))
        if residual <= config.picard_tol:
            break
        x = mixer.update(x, gx)
        ks = build_picard_stiffness(
            space, basis, x.reshape(-1, basis.size), m_inv_sqrt, config.stress_coefficient
        )
    converged = history[-1] <= config.picard_tol
    if not converged:
        logger.warning(
            "slab %d: Picard stopped after %d iterations at residual %.3e",
            basis.slab.index, len(history), history[-1],
        )
    return SlabResult(solution, len(history), history[-1], tuple(history), converged)


@dataclass
class Trajectory:
    config: SolverConfig
    ops: Operators
    slabs: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    residual_histories: list = field(default_factory=list)
    converged: list = field(default_factory=list)
    incoming: list = field(default_factory=list)

    @property
    def space(self):
        return self.ops.space

    @property
    def all_converged(self):
        return all(self.converged)

    def slab_index(self, t):
        """Index of the slab whose half-open interval ``(t_{n-1}, t_n]`` contains ``t``."""
        cfg = self.config
        tol = 1e-12 * cfg.T
        if not -tol < t <= cfg.T + tol or t <= 0.0:
            raise OutOfRange(f"t = {t} outside (0, {cfg.T}]")
        n = int(np.ceil(t / cfg.k - 1e-9)) - 1
        return min(max(n, 0), len(self.slabs) - 1)

    def z_at(self, t, deriv=0):
        return self.slabs[self.slab_index(t)].value(t, deriv)

    def eval_solution(self, t, deriv=0):
        """Displacement (``deriv=0``) or velocity (``deriv=1``) as a spatial function."""
        if deriv not in (0, 1):
            raise ValueError("deriv must be 0 or 1")
        return space_fem.SpatialFunction(self.space, self.ops.mass_inv_sqrt @ self.z_at(t, deriv))

    def final_state(self):
        z, zdot = self.slabs[-1].end_traces()
        return z, zdot

    def jumps(self, deriv=0):
        """``max_m |Z(t_n+) - Z(t_n-)|`` (``deriv=1``: of ``dZ/dt``) at each interior slab boundary."""
        if deriv not in (0, 1):
            raise ValueError("deriv must be 0 or 1")
        out = []
        for prev, nxt in zip(self.slabs[:-1], self.slabs[1:]):
            jump = nxt.start_traces()[deriv] - prev.end_traces()[deriv]
            out.append(float(np.abs(jump).max(initial=0.0)))
        return np.array(out)


def march(config, problem, space=None):
    """Run the full march over ``(0, T]`` and return the :class:`Trajectory`."""
    space = space or space_fem.build_space(config.n_elements, config.p)
    ops = Operators.build(space)
    traces, ks = initialize(config, problem, space, ops)
    g = transformed_load(space, problem, ops, config.load_points)
    traj = Trajectory(config, ops)
    k = config.k
    for n in range(1, config.n_slabs + 1):
        t_end = config.T if n == config.n_slabs else n * k
        basis = make_basis(TimeSlab(n, (n - 1) * k, t_end), config.q)
        result = march_slab(config, space, basis, traces, ks, g, ops.mass_inv_sqrt)
        traj.incoming.append(traces)
        traj.slabs.append(result.solution)
        traj.iterations.append(result.iterations)
        traj.residuals.append(result.residual)
        traj.residual_histories.append(result.residual_history)
        traj.converged.append(result.converged)
        z_end, zdot_end = result.solution.end_traces()
        # warm start for the next slab: end state held constant in time
        next_basis = make_basis(TimeSlab(n + 1, t_end, t_end + k), config.q)
        ks = build_picard_stiffness(
            space, next_basis, constant_extension(z_end, next_basis.size),
            ops.mass_inv_sqrt, config.stress_coefficient,
        )
        traces = SlabTraces(z_end, zdot_end, ks.at(next_basis, t_end))
    logger.info(
        "march done: %d slabs, max Picard iterations %d",
        config.n_slabs, max(traj.iterations),
    )
    return traj


def eval_solution(traj, t, deriv=0):
    return traj.eval_solution(t, deriv)


def final_error(traj, problem, quad_points=None):
    """``||u(T) - u_h(T-)||_L2 + ||u'(T) - u_h'(T-)||_L2``."""
    if problem.exact is None or problem.exact_dot is None:
        raise MissingExactSolution("problem has no exact solution attached")
    T = traj.config.T
    space = traj.space
    if quad_points is None:
        quad_points = space_fem.default_load_quadrature_points(space.p)
    z, zdot = traj.final_state()
    u = space_fem.SpatialFunction(space, traj.ops.mass_inv_sqrt @ z)
    udot = space_fem.SpatialFunction(space, traj.ops.mass_inv_sqrt @ zdot)
    return (
        space_fem.l2_norm_of_difference(space, u, lambda x: problem.exact(x, T), quad_points)
        + space_fem.l2_norm_of_difference(space, udot, lambda x: problem.exact_dot(x, T), quad_points)
    )
