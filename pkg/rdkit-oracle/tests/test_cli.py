import csv
import pathlib

from rdkit_oracle.cli import ORACLE_COLUMNS, main
from rdkit_oracle.sas import load_table


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_certify_writes_oracle_rows(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("C\nC(C)(C)(C)(C)C\nOCC\n")
    out = tmp_path / "oracle.csv"
    assert main(["certify", str(src), str(out)]) == 0
    rows = read_rows(out)
    assert [list(r) for r in rows] == [ORACLE_COLUMNS] * 3
    methane, pentavalent, ethanol = rows
    assert methane["oracle_valid"] == "1"
    assert methane["oracle_canonical"] == "C"
    assert 0.0 < float(methane["oracle_qed"]) < 1.0
    assert 1.0 <= float(methane["oracle_sas"]) <= 10.0
    assert pentavalent["oracle_valid"] == "0"
    assert pentavalent["oracle_canonical"] == ""
    assert pentavalent["oracle_qed"] == ""
    assert ethanol["oracle_canonical"] == "CCO"


def test_certify_aborts_without_toolkit(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RDKIT_ORACLE_TOOLKIT", str(tmp_path / "nope"))
    src = tmp_path / "in.txt"
    src.write_text("C\n")
    rc = main(["certify", str(src), str(tmp_path / "out.csv")])
    assert rc == 3
    assert "error:" in capsys.readouterr().err


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def test_compare_cli_report_and_kde(tmp_path):
    native = tmp_path / "native.csv"
    oracle = tmp_path / "oracle.csv"
    _write_csv(native, ["smiles", "valid", "canonical", "logp"],
               [[f"M{i}", 1, f"c{i}", 0.1 * i] for i in range(40)])
    _write_csv(oracle, ORACLE_COLUMNS,
               [[f"M{i}", 1, f"K{i}", 0.1 * i, 0.4 + 0.01 * i, 2.5]
                for i in range(40)])
    report = tmp_path / "report.txt"
    rc = main(["compare", str(native), str(oracle), str(report),
               "--kde", str(tmp_path / "kde"), "--source", "unit"])
    assert rc == 0
    text = report.read_text()
    assert "validity_agreement: 1.000000 (40/40)" in text
    assert "canonical_partition_agreement: 1.000000" in text
    for prop in ("qed", "sas"):
        rows = read_rows(tmp_path / f"kde_{prop}.csv")
        assert len(rows) == 256
        assert rows[0]["source"] == "unit"


def test_compare_cli_row_mismatch_exits_3(tmp_path, capsys):
    native = tmp_path / "native.csv"
    oracle = tmp_path / "oracle.csv"
    _write_csv(native, ["smiles", "valid", "canonical", "logp"],
               [["A", 1, "a", 0.0], ["B", 1, "b", 0.0]])
    _write_csv(oracle, ORACLE_COLUMNS, [["A", 1, "a", 0.0, 0.5, 3.0]])
    rc = main(["compare", str(native), str(oracle),
               str(tmp_path / "report.txt")])
    assert rc == 3
    assert "row mismatch" in capsys.readouterr().err


def test_fit_table_cli_round_trip(tmp_path):
    corpus = tmp_path / "corpus.txt"
    root = pathlib.Path(__file__).resolve().parents[2]
    lines = (root / "data" / "corpus.txt").read_text().splitlines()[:150]
    corpus.write_text("\n".join(lines) + "\n")
    out = tmp_path / "table.csv.gz"
    assert main(["fit-table", str(corpus), str(out)]) == 0
    table = load_table(out)
    assert len(table.scores) > 100
    assert table.raw_max > table.raw_min
