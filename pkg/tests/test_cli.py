import json

import numpy as np
import pytest

from ieqpdmm.cli import main
from ieqpdmm.problem import EdgeConstraintBlock, Node, NodeConstraintBlock, ProblemGraph, Quadratic
from ieqpdmm.problem_file import load_meta, load_problem, save_problem
from ieqpdmm.scenarios import gen_toy


@pytest.fixture
def toy_file(tmp_path):
    path = tmp_path / "toy.json"
    assert main(["generate", "toy", "--seed", "0", "-o", str(path)]) == 0
    return path


def test_generate_round_trip(toy_file):
    assert load_problem(toy_file) == gen_toy(0)
    assert load_meta(toy_file)["scenario"] == "toy"


def test_generate_geometric(tmp_path):
    path = tmp_path / "g.json"
    assert main(["generate", "geometric", "--n", "50", "--seed", "1", "-o", str(path)]) == 0
    assert load_problem(path).num_nodes == 50


def test_generate_localisation(tmp_path, capsys):
    assert main(["generate", "localisation", "--seed", "3", "-o", str(tmp_path / "loc.json")]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["loc_chebyshev.json"] + [f"loc_rect{k}.json" for k in range(4)]
    assert len(capsys.readouterr().out.splitlines()) == 5


def test_solve_summary(toy_file, tmp_path, capsys):
    sol = tmp_path / "sol.json"
    assert main(["solve", str(toy_file), "--oracle", "--solution-out", str(sol)]) == 0
    out = capsys.readouterr().out
    for key in ("converged=True", "iterations=", "primal_error=", "max_violation=", "objective=", "wall="):
        assert key in out
    x = np.concatenate(json.loads(sol.read_text())["x"])
    assert x[:2] == pytest.approx([1.0, 1.0], abs=1e-6)


def test_bad_alpha_is_usage_error(toy_file):
    assert main(["solve", str(toy_file), "--alpha", "0"]) == 1


def test_missing_file_is_usage_error(tmp_path):
    assert main(["solve", str(tmp_path / "nope.json")]) == 1


def test_unknown_flag_is_usage_error(toy_file):
    with pytest.raises(SystemExit) as exc:
        main(["solve", str(toy_file), "--bogus"])
    assert exc.value.code == 1


def test_verify_toy(toy_file):
    assert main(["verify", str(toy_file), "--tol-kkt", "1e-8"]) == 0


def test_verify_stored_solution(toy_file, tmp_path):
    sol = tmp_path / "sol.json"
    main(["solve", str(toy_file), "--tol-kkt", "1e-9", "--solution-out", str(sol)])
    assert main(["verify", str(toy_file), "--solution", str(sol)]) == 0
    data = json.loads(sol.read_text())
    data["x"][0] = [5.0]
    sol.write_text(json.dumps(data))
    assert main(["verify", str(toy_file), "--solution", str(sol)]) == 2


def test_verify_infeasible(tmp_path):
    nodes = [Node(1, Quadratic.squared_distance([0.0]))] * 2
    g = ProblemGraph(nodes, [EdgeConstraintBlock(0, 1, [[1.0]], [[-1.0]], [0.0], ["eq"])],
                     [NodeConstraintBlock(0, [[1.0]], [0.0], ["ineq"]), NodeConstraintBlock(1, [[-1.0]], [-1.0], ["ineq"])])
    path = save_problem(g, tmp_path / "bad.json")
    assert main(["verify", str(path)]) == 2


def test_verify_consensus_tight(tmp_path):
    nodes = [Node(1, Quadratic.squared_distance([v])) for v in (1.0, 2.0, 6.0)]
    edges = [EdgeConstraintBlock(0, 1, [[1.0]], [[-1.0]], [0.0], ["eq"]),
             EdgeConstraintBlock(1, 2, [[1.0]], [[-1.0]], [0.0], ["eq"])]
    path = save_problem(ProblemGraph(nodes, edges), tmp_path / "cons.json")
    assert main(["verify", str(path), "--tol", "1e-8"]) == 0


def test_non_convergence_exit(tmp_path, capsys):
    main(["generate", "localisation", "--seed", "3", "-o", str(tmp_path / "loc.json")])
    cheb = tmp_path / "loc_chebyshev.json"
    assert main(["solve", str(cheb), "--oracle", "--iters", "300", "--tol-primal", "1e-5"]) == 3
    assert "converged=False" in capsys.readouterr().out


def test_traces_byte_identical(toy_file, tmp_path):
    paths = [tmp_path / f"t{k}.csv" for k in range(2)]
    for p in paths:
        assert main(["solve", str(toy_file), "--mode", "stoch", "--active-prob", "0.5", "--loss-rate", "0.25",
                     "--seed", "7", "--iters", "300", "--trace", str(p)]) in (0, 3)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_threads_do_not_change_trace(tmp_path):
    prob = tmp_path / "r.json"
    main(["generate", "random", "--n", "6", "--seed", "4", "-o", str(prob)])
    traces = []
    for threads in ("1", "3"):
        t = tmp_path / f"t{threads}.csv"
        main(["solve", str(prob), "--iters", "200", "--threads", threads, "--trace", str(t)])
        traces.append(t.read_bytes())
    assert traces[0] == traces[1]
