"""Manufactured-solution benchmark, convergence studies and CSV output."""
import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .marcher import Problem, SolverConfig, final_error, march

PAPER_H = (0.25, 0.2, 0.125, 0.0625)
PAPER_Q = (2, 3, 4)

SQRT2PI = math.sqrt(2.0) * math.pi


def paper_problem(gamma=1.0):
    """Manufactured problem with exact solution ``u = sin(sqrt(2) pi t) sin(pi x)``."""
    pi = np.pi

    def exact(x, t):
        return np.sin(SQRT2PI * t) * np.sin(pi * x)

    def exact_dot(x, t):
        return SQRT2PI * np.cos(SQRT2PI * t) * np.sin(pi * x)

    def forcing(x, t):
        st = np.sin(SQRT2PI * t)
        ct = np.cos(SQRT2PI * t)
        return (
            ((-2.0 * pi**2 + gamma**2) * st + 2.0 * math.sqrt(2.0) * gamma * pi * ct) * np.sin(pi * x)
            + pi**4 * st**3 * np.cos(pi * x) ** 2 * np.sin(pi * x)
        )

    def u0(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def u1(x):
        return SQRT2PI * np.sin(pi * x)

    return Problem(forcing, u0, u1, exact=exact, exact_dot=exact_dot)


def slabs_for(T, k):
    """Number of slabs of length ``k`` covering ``(0, T]``; ``T / k`` must be integral."""
    n = round(T / k)
    if n < 1 or abs(n - T / k) > 1e-9 * max(1.0, T / k):
        raise ValueError(f"T / k = {T / k} is not an integer")
    return n


def elements_for(h):
    n = round(1.0 / h)
    if n < 1 or abs(n * h - 1.0) > 1e-9:
        raise ValueError(f"h = {h} does not divide (0, 1) evenly")
    return n


def paper_config(q, h, p=None, gamma=1.0, T=1.0, picard_tol=1e-10, picard_max=30, **extra):
    """Solver configuration for one table entry: ``k = h**2`` and ``p = q`` unless given."""
    return SolverConfig(
        gamma=gamma, T=T, p=q if p is None else p, q=q,
        n_elements=elements_for(h), n_slabs=slabs_for(T, h * h),
        picard_tol=picard_tol, picard_max=picard_max, **extra,
    )


@dataclass(frozen=True)
class RunResult:
    config: SolverConfig
    error: float
    iterations: tuple
    residuals: tuple
    converged: bool

    @property
    def max_iterations(self):
        return max(self.iterations)


def run_single(config, problem=None):
    problem = problem or paper_problem(config.gamma)
    traj = march(config, problem)
    return RunResult(
        config,
        final_error(traj, problem),
        tuple(traj.iterations),
        tuple(traj.residuals),
        traj.all_converged,
    )


@dataclass(frozen=True)
class ConvergenceRow:
    q: int
    h: float
    k: float
    error: float
    rate: Optional[float] = None
    max_iterations: Optional[int] = None


@dataclass(frozen=True)
class StudyPlan:
    gamma: float = 1.0
    T: float = 1.0
    h_values: tuple = PAPER_H
    q_values: tuple = PAPER_Q
    p_values: Optional[tuple] = None
    picard_tol: float = 1e-10
    picard_max: int = 30
    picard_acceleration: str = "anderson"

    def __post_init__(self):
        hs = list(self.h_values)
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise ValueError(f"h values must be strictly decreasing: {hs}")
        for h in hs:
            elements_for(h)
        if self.p_values is not None and len(self.p_values) != len(self.q_values):
            raise ValueError("p_values and q_values must have the same length")

    def configs(self):
        ps = self.p_values or self.q_values
        return [
            paper_config(q, h, p=p, gamma=self.gamma, T=self.T,
                         picard_tol=self.picard_tol, picard_max=self.picard_max,
                         picard_acceleration=self.picard_acceleration)
            for q, p in zip(self.q_values, ps)
            for h in self.h_values
        ]


def convergence_rate(e_prev, e_next, k_prev, k_next):
    """Observed order with respect to the time step."""
    return math.log(e_prev / e_next) / math.log(k_prev / k_next)


def rows_with_rates(results):
    """Attach rates between consecutive rows sharing the same ``q``."""
    rows = []
    prev = None
    for r in results:
        cfg = r.config
        rate = None
        if prev is not None and prev.config.q == cfg.q:
            rate = convergence_rate(prev.error, r.error, prev.config.k, cfg.k)
        rows.append(ConvergenceRow(cfg.q, cfg.h, cfg.k, r.error, rate, r.max_iterations))
        prev = r
    return rows


def run_study(plan, jobs=1):
    """Run every ``(q, h)`` of ``plan`` and return rows in plan order."""
    configs = plan.configs()
    problem_gamma = plan.gamma
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_paper_config, configs, [problem_gamma] * len(configs)))
    else:
        results = [_run_paper_config(c, problem_gamma) for c in configs]
    return rows_with_rates(results), results


def _run_paper_config(config, gamma):
    return run_single(config, paper_problem(gamma))


def fmt(x):
    return f"{x:.5e}"


def emit_csv(rows, path):
    """Write ``q,h,k,error,rate`` with 6 significant digits; first rate per ``q`` is empty."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["q", "h", "k", "error", "rate"])
        for r in rows:
            writer.writerow([r.q, fmt(r.h), fmt(r.k), fmt(r.error), "" if r.rate is None else fmt(r.rate)])


def read_csv(path):
    with open(path, newline="") as fh:
        return [
            ConvergenceRow(int(d["q"]), float(d["h"]), float(d["k"]), float(d["error"]),
                           float(d["rate"]) if d["rate"] else None)
            for d in csv.DictReader(fh)
        ]


def emit_plot_data(rows, path):
    """Write ``q,inv_k,error`` series (error against ``1/k``) for a log-log plot."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["q", "inv_k", "error"])
        for r in rows:
            writer.writerow([r.q, fmt(1.0 / r.k), fmt(r.error)])
