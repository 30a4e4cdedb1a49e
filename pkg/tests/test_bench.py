import math

import numpy as np
import pytest

from dgwave import cli
from dgwave.bench import (
    ConvergenceRow,
    StudyPlan,
    convergence_rate,
    elements_for,
    emit_csv,
    emit_plot_data,
    fmt,
    paper_config,
    paper_problem,
    read_csv,
    rows_with_rates,
    run_single,
    run_study,
    slabs_for,
)
from dgwave.marcher import SolverConfig, zero_problem

SMALL_PLAN = StudyPlan(h_values=(0.5, 0.25), q_values=(2, 3), T=0.25)


@pytest.fixture(scope="module")
def small_study():
    return run_study(SMALL_PLAN)


class TestManufacturedProblem:
    @pytest.mark.parametrize("gamma", [0.0, 1.0, 2.5])
    def test_forcing_matches_symbolic(self, gamma, symbolic_forcing, rng):
        x = rng.uniform(0, 1, 50)
        t = rng.uniform(0, 1, 50)
        f = paper_problem(gamma).forcing(x, t)
        np.testing.assert_allclose(f, symbolic_forcing(x, t, gamma), atol=1e-10, rtol=0)

    def test_forcing_at_zero(self):
        x = np.linspace(0, 1, 11)
        for gamma in (0.5, 1.0):
            expected = 2 * math.sqrt(2) * gamma * np.pi * np.sin(np.pi * x)
            np.testing.assert_allclose(paper_problem(gamma).forcing(x, 0.0), expected, atol=1e-14)

    def test_initial_data(self):
        p = paper_problem()
        x = np.linspace(0, 1, 7)
        np.testing.assert_array_equal(p.exact(x, 0.0), 0.0)
        np.testing.assert_array_equal(p.u0(x), 0.0)
        np.testing.assert_allclose(p.u1(x), p.exact_dot(x, 0.0), atol=1e-15)

    def test_exact_dot_is_time_derivative(self):
        p = paper_problem()
        x, t, d = 0.3, 0.41, 1e-6
        fd = (p.exact(x, t + d) - p.exact(x, t - d)) / (2 * d)
        assert p.exact_dot(x, t) == pytest.approx(fd, abs=1e-8)


class TestGrid:
    def test_table_grid(self):
        assert [slabs_for(1.0, h * h) for h in (0.25, 0.2, 0.125, 0.0625)] == [16, 25, 64, 256]
        assert [elements_for(h) for h in (0.25, 0.2, 0.125, 0.0625)] == [4, 5, 8, 16]

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            slabs_for(1.0, 0.3)
        with pytest.raises(ValueError):
            elements_for(0.3)

    def test_paper_config(self):
        cfg = paper_config(3, 0.2)
        assert (cfg.p, cfg.q, cfg.n_elements, cfg.n_slabs) == (3, 3, 5, 25)
        assert cfg.k == pytest.approx(0.04)
        assert (cfg.gamma, cfg.T, cfg.picard_tol, cfg.picard_max) == (1.0, 1.0, 1e-10, 30)

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            StudyPlan(h_values=(0.2, 0.25))
        with pytest.raises(ValueError):
            StudyPlan(h_values=(0.3,))
        with pytest.raises(ValueError):
            StudyPlan(q_values=(2, 3), p_values=(2,))
        assert len(StudyPlan().configs()) == 12


class TestRates:
    def test_published_rate_arithmetic(self):
        assert convergence_rate(1.2123e-2, 4.9774e-3, 6.25e-2, 4.0e-2) == pytest.approx(1.9948, abs=5e-4)

    def test_rows_with_rates(self, small_study):
        rows, results = small_study
        assert [r.q for r in rows] == [2, 2, 3, 3]
        assert rows[0].rate is None and rows[2].rate is None
        expected = convergence_rate(rows[0].error, rows[1].error, rows[0].k, rows[1].k)
        assert rows[1].rate == expected
        assert all(r.converged for r in results)

    def test_single_row(self):
        rows = rows_with_rates([run_single(SolverConfig(T=0.25, n_slabs=4))])
        assert len(rows) == 1 and rows[0].rate is None

    def test_zero_problem_error(self):
        assert run_single(SolverConfig(n_slabs=4), zero_problem()).error == 0.0


class TestCsv:
    def test_format(self, small_study, tmp_path):
        rows, _ = small_study
        path = tmp_path / "t.csv"
        emit_csv(rows, path)
        lines = path.read_text().split("\n")
        assert lines[0] == "q,h,k,error,rate"
        assert lines[-1] == ""
        assert len(lines) == len(rows) + 2
        assert lines[1].startswith("2,5.00000e-01,2.50000e-01,") and lines[1].endswith(",")
        assert lines[2].split(",")[4] == fmt(rows[1].rate)

    def test_fmt(self):
        assert fmt(1.2123e-2) == "1.21230e-02"
        assert fmt(3.90625e-3) == "3.90625e-03"

    def test_empty(self, tmp_path):
        emit_csv([], tmp_path / "a.csv")
        emit_plot_data([], tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_text() == "q,h,k,error,rate\n"
        assert (tmp_path / "b.csv").read_text() == "q,inv_k,error\n"

    def test_round_trip(self, small_study, tmp_path):
        rows, _ = small_study
        emit_csv(rows, tmp_path / "t.csv")
        back = read_csv(tmp_path / "t.csv")
        for a, b in zip(rows, back):
            assert a.q == b.q
            for u, v in ((a.h, b.h), (a.k, b.k), (a.error, b.error)):
                assert v == pytest.approx(u, rel=5e-6)
            assert (a.rate is None) == (b.rate is None)
            if a.rate is not None:
                assert b.rate == pytest.approx(a.rate, rel=5e-6)

    def test_plot_data(self, tmp_path):
        emit_plot_data([ConvergenceRow(2, 0.25, 0.0625, 1e-2)], tmp_path / "p.csv")
        assert (tmp_path / "p.csv").read_text().splitlines()[1] == "2,1.60000e+01,1.00000e-02"

    def test_deterministic(self, tmp_path):
        paths = []
        for i in range(2):
            rows, _ = run_study(SMALL_PLAN)
            paths.append(tmp_path / f"run{i}.csv")
            emit_csv(rows, paths[-1])
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_parallel_matches_serial(self, small_study):
        rows, _ = run_study(SMALL_PLAN, jobs=2)
        assert rows == small_study[0]


class TestCli:
    def test_solve(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        code = cli.main(["solve", "--q", "2", "--h", "0.5", "--T", "0.25", "--out", str(out)])
        assert code == 0
        assert "error=" in capsys.readouterr().out
        assert out.read_text().startswith("q,h,k,error,rate\n2,5.00000e-01,2.50000e-01,")

    def test_study(self, tmp_path, capsys):
        out, plot = tmp_path / "t.csv", tmp_path / "p.csv"
        code = cli.main(["study", "--q", "2", "3", "--h", "0.5", "0.25", "--T", "0.25",
                         "--out", str(out), "--plot-out", str(plot)])
        assert code == 0
        assert len(read_csv(out)) == 4
        assert len(plot.read_text().splitlines()) == 5

    def test_solver_error_exit(self, capsys):
        assert cli.main(["solve", "--q", "1", "--h", "0.5"]) == cli.EXIT_SOLVER
        assert cli.main(["solve", "--h", "0.3"]) == cli.EXIT_SOLVER
        assert "error" in capsys.readouterr().err

    def test_io_error_exit(self, tmp_path):
        bad = tmp_path / "missing" / "t.csv"
        assert cli.main(["solve", "--h", "0.5", "--T", "0.25", "--out", str(bad)]) == cli.EXIT_IO

    def test_bad_flag(self):
        with pytest.raises(SystemExit):
            cli.main(["solve", "--bogus"])
