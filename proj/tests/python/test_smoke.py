import math
import os
import subprocess

import numpy as np
import pytest

import owrc

HERE = os.path.dirname(os.path.abspath(__file__))
PROBLEMS = os.path.join(HERE, "..", "..", "problems")


def test_builtins_listed():
    names = [name for name, _ in owrc.builtin_problems()]
    assert names[0] == "two_scenario_1d"
    assert {"biobj_quad_2d", "nonconvex_demo"} <= set(names)


def test_subproblem_at_zero_matches_closed_form():
    p = owrc.builtin_problem("two_scenario_1d")
    sol = owrc.solve_subproblem(p, np.array([0.0]))
    assert sol.certified
    # Dual on two columns: lambda_2 = 1/4 gives t = 1 and Theta = -4 + 1/2.
    assert sol.theta == pytest.approx(-3.5, abs=1e-8)
    assert sol.direction[0] == pytest.approx(1.0, abs=1e-8)
    assert sol.lam == pytest.approx([0.75, 0.25], abs=1e-8)


def test_armijo_step_and_phi_star():
    p = owrc.builtin_problem("two_scenario_1d")
    x, t = np.array([0.0]), np.array([1.0])
    assert owrc.phi_star(p, x, t)[0] == pytest.approx(-4.0)
    ls = owrc.armijo_search(p, x, t)
    assert ls.alpha == 0.5 and ls.r == 1


def test_run_converges_and_diagnostics_pass():
    p = owrc.builtin_problem("biobj_quad_2d")
    trace = owrc.run(p, np.array([3.0, 2.0]))
    assert trace.termination == "converged"
    assert np.allclose(trace.final_x, p.known_solution, atol=1e-3)
    arr = trace.arrays()
    assert arr["x"].shape == (trace.iterations + 1, 2)
    assert np.all(np.diff(arr["phi"], axis=0) <= 0.0)
    assert owrc.diagnostics.fejer(trace, p.known_solution)["all_hold"]
    assert owrc.diagnostics.armijo(trace, p)
    y_hat = p.phi(p.known_solution)
    assert owrc.diagnostics.summability(trace, 0.1, y_hat)["holds"]


def test_constant_step_rate():
    p = owrc.builtin_problem("biobj_quad_2d")
    cfg = owrc.SolverConfig()
    cfg.mode = "constant"
    cfg.constant_alpha = 1.0 / p.gamma
    trace = owrc.run(p, np.array([-1.0, 3.0]), cfg)
    r = owrc.diagnostics.rate(trace, p)
    assert r["bound"] == pytest.approx(1.0 - p.mu / p.gamma)
    assert r["holds_fraction"] >= 0.95


def test_python_objectives_and_oracle():
    # f(x, s) = (x - s)^2 over scenarios {0, 2}: robust minimizer x = 1.
    f = lambda x, s: (float((x[0] - s[0]) ** 2), np.array([2.0 * (x[0] - s[0])]))
    p = owrc.Problem("py", 1, [np.array([0.0]), np.array([2.0])], [f])
    trace = owrc.run(p, np.array([4.0]))
    assert abs(trace.final_x[0] - 1.0) <= 1e-3
    t, theta = owrc.diagnostics.oracle(p, np.array([0.0]))
    sol = owrc.solve_subproblem(p, np.array([0.0]))
    assert abs(theta - sol.theta) <= 1e-2
    assert abs(t[0] - sol.direction[0]) <= 5e-3


def test_problem_file_and_trace_round_trip(tmp_path):
    p = owrc.load_problem(os.path.join(PROBLEMS, "nonconvex_demo.toml"))
    assert (p.n, p.m, p.p) == (2, 2, 3)
    trace = owrc.run(p, np.array([2.0, 1.0]))
    path = str(tmp_path / "trace.csv")
    trace.save(path)
    back = owrc.load_trace(path)
    assert np.array_equal(back.arrays()["x"], trace.arrays()["x"])
    assert np.array_equal(back.arrays()["theta"], trace.arrays()["theta"])


def test_errors_are_mapped():
    with pytest.raises(owrc.FormatError):
        owrc.parse_problem("n = 1\nm = 1\nscenarios = [[]]\nobjectives = [\"x1\"]\nspeed = 3\n")
    with pytest.raises(owrc.CheckError):
        owrc.diagnostics.oracle(owrc.quadratic_problem([[np.eye(4)]], [[np.zeros(4)]], [[0.0]]), np.ones(4))


def test_cli_in_process_and_binary(tmp_path):
    code, out, _ = owrc.cli(["list"])
    assert code == 0 and out.startswith("two_scenario_1d\t")
    exe = os.environ.get("OWRC_CLI")
    if not exe:
        pytest.skip("OWRC_CLI not set")
    trace = str(tmp_path / "t.csv")
    run = subprocess.run([exe, "run", "two_scenario_1d", "--x0", "-5", "--out", trace], capture_output=True, text=True)
    assert run.returncode == 0 and "termination: converged" in run.stdout
    check = subprocess.run([exe, "check", "fejer", trace, "two_scenario_1d"], capture_output=True, text=True)
    assert check.returncode == 0
