"""DG-in-time / CG-in-space solver for a 1D nonlinear damped wave equation."""
from .bench import StudyPlan, paper_config, paper_problem, run_single, run_study
from .marcher import Problem, SolverConfig, Trajectory, final_error, march

__all__ = [
    "Problem",
    "SolverConfig",
    "StudyPlan",
    "Trajectory",
    "final_error",
    "march",
    "paper_config",
    "paper_problem",
    "run_single",
    "run_study",
]
