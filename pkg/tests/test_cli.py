import json

import numpy as np
import pytest

from tensor_ring.algebra import add, frobenius_norm, inner_product
from tensor_ring.cli import main
from tensor_ring.nd_tensor import flatten, read_dtns, relative_error, write_dtns
from tensor_ring.tr_core import random_ring, read_trz, to_dense, write_trz


@pytest.fixture
def dense_file(tmp_path):
    t = to_dense(random_ring((4, 3, 4, 3), (2, 2, 2, 2), 1))
    path = tmp_path / "t.dtns"
    write_dtns(path, t)
    return t, path


@pytest.mark.parametrize("algo", ["tr-svd", "tt-svd", "tr-bals"])
def test_decompose(tmp_path, dense_file, algo, capsys):
    t, path = dense_file
    out = tmp_path / "r.trz"
    trace = tmp_path / "trace.csv"
    code = main(["decompose", "--algo", algo, "--eps", "1e-6", "--in", str(path), "--out", str(out), "--trace", str(trace)])
    assert code == 0
    ring = read_trz(out)
    assert relative_error(t, to_dense(ring)) <= 1e-6
    assert algo in capsys.readouterr().out
    assert trace.exists() == (algo == "tr-bals")


def test_decompose_start_mode(tmp_path, dense_file):
    t, path = dense_file
    out = tmp_path / "r.trz"
    assert main(["decompose", "--start-mode", "3", "--eps", "1e-6", "--in", str(path), "--out", str(out)]) == 0
    assert relative_error(t, to_dense(read_trz(out))) <= 1e-6


def test_decompose_csv_input(tmp_path, dense_file):
    t, _ = dense_file
    csv = tmp_path / "t.csv"
    np.savetxt(csv, flatten(t), fmt="%.17g")
    out = tmp_path / "r.trz"
    assert main(["decompose", "--in", str(csv), "--shape", "4,3,4,3", "--eps", "1e-6", "--out", str(out)]) == 0
    assert main(["decompose", "--in", str(csv), "--out", str(out)]) == 2
    assert main(["decompose", "--in", str(csv), "--shape", "4,4", "--out", str(out)]) == 2


def test_exit_codes(tmp_path, dense_file):
    _, path = dense_file
    out = str(tmp_path / "r.trz")
    with pytest.raises(SystemExit) as exc:
        main(["decompose", "--eps", "-1", "--in", str(path), "--out", out])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["decompose", "--algo", "nope", "--in", str(path), "--out", out])
    assert exc.value.code == 2
    assert main(["decompose", "--in", str(tmp_path / "missing.dtns"), "--out", out]) == 2
    assert main(["decompose", "--start-mode", "9", "--in", str(path), "--out", out]) == 2
    code = main(["decompose", "--algo", "tr-bals", "--eps", "1e-14", "--max-sweeps", "1", "--in", str(path), "--out", out])
    assert code == 3


def test_info_reconstruct_and_ops(tmp_path, capsys):
    a = random_ring((2, 3, 2), (2, 1, 2), 3)
    b = random_ring((2, 3, 2), (1, 2, 1), 4)
    pa, pb = tmp_path / "a.trz", tmp_path / "b.trz"
    write_trz(pa, a)
    write_trz(pb, b)

    assert main(["info", str(pa)]) == 0
    out = capsys.readouterr().out
    assert "ranks: [2, 1, 2]" in out and "N_p: 18" in out

    dense = tmp_path / "a.dtns"
    assert main(["reconstruct", "--in", str(pa), "--out", str(dense)]) == 0
    assert np.array_equal(read_dtns(dense), to_dense(a))

    assert main(["ops", "add", str(pa), str(pb), "--out", str(tmp_path / "c.trz")]) == 0
    np.testing.assert_allclose(to_dense(read_trz(tmp_path / "c.trz")), to_dense(add(a, b)))
    assert main(["ops", "hadamard", str(pa), str(pb), "--out", str(tmp_path / "h.trz")]) == 0
    assert read_trz(tmp_path / "h.trz").ranks == (2, 2, 2)
    capsys.readouterr()

    assert main(["ops", "inner", str(pa), str(pb)]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(inner_product(a, b))
    assert main(["ops", "norm", str(pa)]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(frobenius_norm(a))
    assert main(["ops", "dot", str(pa)]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(to_dense(a).sum())

    vecs = []
    for k, n in enumerate(a.shape):
        p = tmp_path / f"u{k}.csv"
        np.savetxt(p, np.arange(1.0, n + 1))
        vecs.append(str(p))
    assert main(["ops", "dot", str(pa), "--vectors", *vecs]) == 0
    expected = np.einsum("ijk,i,j,k->", to_dense(a), *[np.arange(1.0, n + 1) for n in a.shape])
    assert float(capsys.readouterr().out) == pytest.approx(expected)

    assert main(["ops", "add", str(pa)]) == 2
    assert main(["ops", "dot", str(pa), "--vectors", vecs[0]]) == 2
    write_trz(pb, random_ring((2, 2, 2), (1, 1, 1)))
    assert main(["ops", "inner", str(pa), str(pb)]) == 2


def test_bench_table1_small(tmp_path):
    out = tmp_path / "rep.csv"
    code = main(["bench", "table1", "--func", "f3", "--d", "6", "--algos", "tt-svd", "tr-svd", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("algo,func,epsilon_p,epsilon")
    rows = [json.loads(x) for x in out.with_suffix(".jsonl").read_text().splitlines()]
    assert {r["algo"] for r in rows} == {"tt-svd", "tr-svd"}
    assert all(r["epsilon"] <= 1e-3 for r in rows)


def test_bench_bad_domain(tmp_path):
    out = str(tmp_path / "rep.csv")
    assert main(["bench", "table1", "--func", "f2", "--d", "4", "--domain", "0,1", "--out", out]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["bench", "table1", "--domain", "1", "--out", out])
    assert exc.value.code == 2
