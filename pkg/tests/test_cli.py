import subprocess
import sys

import pytest

from conflow.cli import choose_algorithm, main
from conflow.instance import parse_cf, parse_mvtsp, parse_solution, verify_solution, write_cf, write_mvtsp
from conflow.treedec import parse_td, validate
from instances import leaf_star, triangle, twin_cycles, two_vertex_cf


@pytest.fixture
def files(tmp_path):
    def put(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return put


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_triangle(files, capsys):
    path = files("triangle.cf", write_cf(triangle()))
    code, out, _ = run(capsys, "solve", "--algo", "oracle", path)
    assert code == 0
    cost, flow = parse_solution(out)
    assert cost == 3 and verify_solution(triangle(), flow).ok


@pytest.mark.parametrize("algo", ["auto", "oracle", "vc-fpt", "tw-dp"])
def test_every_algorithm_agrees(files, capsys, algo):
    path = files("twin.cf", write_cf(twin_cycles()))
    code, out, _ = run(capsys, "solve", "--algo", algo, path)
    assert code == 0 and parse_solution(out)[0] == 12


def test_solve_mvtsp_file(files, capsys):
    path = files("star.mvtsp", write_mvtsp(leaf_star(4)))
    code, out, _ = run(capsys, "solve", path)
    assert code == 0 and "c algo" in out


def test_infeasible_exit(files, capsys):
    path = files("bad.cf", "p cf 2 1 1\nd 1 1\ne 1 2 1 inf\n")
    code, out, _ = run(capsys, "solve", path)
    assert code == 1 and "s infeasible" in out


def test_verify_names_vertex(files, capsys):
    inst = files("triangle.cf", write_cf(triangle()))
    sol = files("bad.sol", "s 4\nf 1 2 2\nf 2 3 1\nf 3 1 1\n")
    code, out, _ = run(capsys, "verify", inst, sol)
    assert code == 1 and "invalid" in out and "2" in out


def test_verify_accepts(files, capsys):
    inst = files("triangle.cf", write_cf(triangle()))
    sol = files("good.sol", "s 3\nf 1 2 1\nf 2 3 1\nf 3 1 1\n")
    code, out, _ = run(capsys, "verify", inst, sol)
    assert code == 0 and "valid cost 3" in out


def test_stats(files, capsys):
    code, out, _ = run(capsys, "stats", files("twin.cf", write_cf(twin_cycles())))
    fields = dict(line.split(" ", 1) for line in out.splitlines())
    assert code == 0
    assert fields["n"] == "4" and fields["m"] == "6" and fields["demand-vertices"] == "4"
    assert fields["vertex-cover"].startswith("2") and fields["td-width"] == "2"


def test_relax(files, capsys):
    code, out, _ = run(capsys, "relax", files("twin.cf", write_cf(twin_cycles())))
    assert code == 0 and parse_solution(out)[0] == 4


def test_kernelize_writes_map(files, capsys, tmp_path):
    path = files("star.mvtsp", write_mvtsp(leaf_star(15)))
    out_path, map_path = str(tmp_path / "k.mvtsp"), str(tmp_path / "k.map")
    code, _, _ = run(capsys, "kernelize", path, "--cover", files("x.cover", "1\n"), "--out", out_path, "--map", map_path)
    assert code == 0
    kernel = parse_mvtsp(open(out_path).read())
    assert kernel.n < 16
    assert any(line.startswith("r 1 1 ") for line in open(map_path))


def test_reduce_mvtsp(files, capsys, tmp_path):
    path = files("two.cf", write_cf(two_vertex_cf(2)))
    table = str(tmp_path / "t.txt")
    code, out, _ = run(capsys, "reduce", "mvtsp", path, "--table", table)
    assert code == 0 and parse_mvtsp(out).n == 2
    assert open(table).read().count("pt ") == 2


def test_gen_disjoint_paths(files, capsys):
    graph = files("g.txt", "p digraph 6 4\na 1 5\na 5 2\na 3 6\na 6 4\n")
    code, out, _ = run(capsys, "gen", "disjoint-paths", graph, "1", "2", "3", "4")
    assert code == 0 and sorted(parse_cf(out).demand) == [1, 3]


def test_gen_sat(files, capsys, tmp_path):
    cnf = files("f.cnf", "p cnf 3 1\n1 2 3 0\n")
    td_path, meta_path = str(tmp_path / "f.td"), str(tmp_path / "f.meta")
    code, out, _ = run(capsys, "gen", "sat", cnf, "--group-size", "1", "--td", td_path, "--meta", meta_path)
    assert code == 0
    m = parse_mvtsp(out)
    td = parse_td(open(td_path).read())
    validate(td, m.n, sorted({(min(u, v), max(u, v)) for u, v in m.cost}))
    assert open(meta_path).read().startswith("c ")


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "/nonexistent/file.cf"],
        ["solve", "--algo", "vc-fpt", "--cover", "COVER", "INST"],
        ["gen", "sat", "CNF", "--group-size", "0"],
    ],
)
def test_input_errors_exit_2(files, capsys, argv):
    subs = {"COVER": files("c", "1\n"), "INST": files("t.cf", write_cf(triangle())), "CNF": files("f.cnf", "p cnf 1 1\n1 0\n")}
    code, _, err = run(capsys, *[subs.get(a, a) for a in argv])
    assert code == 2 and err


def test_parse_error_exit_2(files, capsys):
    code, _, err = run(capsys, "solve", files("loop.cf", "p cf 2 1 1\nd 1 1\ne 1 1 0 1\n"))
    assert code == 2 and "line 3" in err


def test_node_limit_exit_3(files, capsys):
    code, _, _ = run(capsys, "solve", "--algo", "oracle", "--node-limit", "2", files("twin.cf", write_cf(twin_cycles())))
    assert code == 3


def test_auto_choice():
    assert choose_algorithm(triangle()) == "oracle"


def test_console_script(files):
    path = files("triangle.cf", write_cf(triangle()))
    proc = subprocess.run([sys.executable, "-m", "conflow.cli", "solve", path], capture_output=True, text=True)
    assert proc.returncode == 0 and "s 3" in proc.stdout
