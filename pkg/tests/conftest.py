import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def symbolic_forcing():
    """Forcing derived symbolically from ``u = sin(sqrt(2) pi t) sin(pi x)``, as ``f(x, t, gamma)``."""
    import sympy as sp

    x, t, g = sp.symbols("x t gamma", real=True)
    u = sp.sin(sp.sqrt(2) * sp.pi * t) * sp.sin(sp.pi * x)
    f = sp.diff(u, t, 2) + 2 * g * sp.diff(u, t) + g**2 * u - sp.diff(sp.diff(u, x) ** 3 / 3, x)
    return sp.lambdify((x, t, g), f, "numpy")


_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_report():
    """``record(criterion, passed, detail)``; one summary line per criterion is printed at exit."""

    def record(criterion, passed, detail=""):
        _ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_ACCEPTANCE):
        entries = _ACCEPTANCE[criterion]
        passed = all(ok for ok, _ in entries)
        failing = [d for ok, d in entries if not ok]
        detail = "; ".join(failing) if failing else "; ".join(d for _, d in entries if d)
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}")
