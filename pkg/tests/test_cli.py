"""Command-line documents, reports and exit codes."""

import io
import sys

import pytest
import yaml

from spinlattice import cli
from spinlattice import linalg as la
from spinlattice.quadlattice import QuadLattice


def run(argv, stdin=None, capsys=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_document_variants():
    L = cli.parse_document("p: 3\ndiag_q: [1, 1, -3]\n")
    assert L.gram_matrix() == [[2, 0, 0], [0, 2, 0], [0, 0, -6]]
    L = cli.parse_document('{"p": 5, "gram": [[2, "1/2"], ["1/2", 4]], "label": "x"}')
    assert L.gram[0][1] == cli.Fraction(1, 2) and L.label == "x"


@pytest.mark.parametrize(
    "text, field",
    [
        ("p: 4\ndiag_q: [1]", "p:"),
        ("p: 3\n", "exactly one"),
        ("p: 3\ndiag_q: [1]\ngram: [[2]]", "exactly one"),
        ("p: 3\ndiag_q: [1, 'a/b']", "diag_q[1]"),
        ("p: 3\ngram: [[1, 2], [3, 1]]", "gram:"),
        ("p: 3\ndiag_q: [1]\nextra: 1", "unknown"),
        ("p: [3\n", "line"),
    ],
)
def test_parse_errors_name_the_field(text, field):
    with pytest.raises(cli.ParseError) as err:
        cli.parse_document(text)
    assert field in str(err.value)


def test_analyze_examples():
    inv = cli.cmd_analyze(QuadLattice.from_diagonal(3, [1, 1, -3]))["invariants"]
    assert inv["rank"] == 3 and inv["signature"] == [2, 1] and inv["t"] == 1 and inv["maximal"] is True
    inv = cli.cmd_analyze(QuadLattice.from_diagonal(3, [1, 1, -9]))["invariants"]
    assert inv["maximal"] is False and inv["witness"]["vector"] == ["0", "0", "1/3"]
    inv = cli.cmd_analyze(cli.parse_document("p: 3\ngram: [[2, 1], [1, 1]]"))["invariants"]
    assert inv["t"] == 0  # det 1 is a unit


def test_embed_examples():
    emb = cli.cmd_embed(QuadLattice.from_diagonal(3, [1, -3, -1]))["embedding"]
    assert emb["target_rank"] == 4 and emb["rank_bound_ok"] and all(emb["checks"].values())
    emb = cli.cmd_embed(QuadLattice.from_diagonal(3, [1, -1]))["embedding"]
    assert emb["target_rank"] == 2 and emb["embedding_matrix"] == [["1", "0"], ["0", "1"]]
    emb = cli.cmd_embed(QuadLattice.from_diagonal(5, [2, 10, -1, -1]))["embedding"]
    assert emb["target_rank"] <= 6 and emb["checks"]["complement_positive_definite"]


def test_localmodel_examples():
    rep = cli.cmd_localmodel(QuadLattice.from_diagonal(3, [1, 1, 3, 3]), [3, 9], refined=True)
    assert rep["enumeration"]["F_3"]["points"] == 4
    assert rep["enumeration"]["F_9"]["points"] == 172
    assert len(rep["enumeration"]["F_9"]["irregular"]) == 2
    charts = rep["refined"]["charts"]
    assert set(charts["U"]["F_9"]["verdicts"]) == {"Smooth"}
    assert "QuasiHealthyMain" in charts["T"]["F_3"]["verdicts"]
    assert "precondition_failures" not in rep
    rep = cli.cmd_localmodel(QuadLattice.from_diagonal(3, [1, -1, 1]), [3], refined=True)
    assert any("refined" in e for e in rep["precondition_failures"])
    rep = cli.cmd_localmodel(QuadLattice.from_diagonal(3, [1, 1, -3]), [3])
    (chart,) = rep["enumeration"]["F_3"]["charts"]
    assert chart["verdict"] == {"kind": "QuasiHealthyOrder", "ord_p": 2}


def test_exit_codes(capsys, monkeypatch, tmp_path):
    code, out, _ = run(["analyze", "-"], "p: 3\ndiag_q: [1, 1, -3]\n", capsys, monkeypatch)
    assert code == 0 and "maximal: true" in out
    code, _, err = run(["analyze", "-"], "p: 9\ndiag_q: [1]\n", capsys, monkeypatch)
    assert code == 2 and "p:" in err
    code, _, err = run(["analyze", str(tmp_path / "missing.yaml")], None, capsys, monkeypatch)
    assert code == 2
    code, out, _ = run(["localmodel", "-", "--refined", "--q", "3"], "p: 3\ndiag_q: [1, -1, 1]\n", capsys, monkeypatch)
    assert code == 3 and "precondition_failures" in out
    code, _, err = run(["localmodel", "-", "--q", "9"], "p: 3\ndiag_q: " + str([1] * 14) + "\n", capsys, monkeypatch)
    assert code == 4 and "resource" in err


def test_structured_output_is_yaml_and_stable(capsys, monkeypatch):
    doc = "p: 3\ndiag_q: [1, 1, 3, 3]\n"
    args = ["localmodel", "-", "--q", "3", "--format", "structured"]
    _, a, _ = run(args, doc, capsys, monkeypatch)
    _, b, _ = run(args, doc, capsys, monkeypatch)
    assert a == b
    data = yaml.safe_load(a)
    assert data["enumeration"]["F_3"]["points"] == 4


def test_report_claims_recompute():
    L = QuadLattice.from_diagonal(3, [1, -3, -1])
    rep = yaml.safe_load(cli.render(cli.cmd_embed(L), "structured"))["embedding"]
    G = [[cli.Fraction(x) for x in row] for row in rep["target_gram"]]
    E = [[cli.Fraction(x) for x in row] for row in rep["embedding_matrix"]]
    assert la.mat_mul(la.mat_mul(la.transpose(E), G), E) == L.gram_matrix()
    C = [[cli.Fraction(x) for x in row] for row in rep["complement_gram"]]
    assert C == [[6]]
