import json
from pathlib import Path

from medmatch.cli import main

DEMO_CSV = Path(__file__).resolve().parents[1] / "data" / "demo_providers.csv"
DEMO_QUERY = "patient_centered >= 100 & clinical_standards >= 60 & tied_up_with_insurance"


def test_query_subcommand_plain(capsys):
    code = main(["query", "--catalog", str(DEMO_CSV), DEMO_QUERY])
    out = capsys.readouterr().out
    assert code == 0
    assert "2 providers satisfy all requirements: H1, H2." in out
    assert "H1" in out and "H2" in out


def test_query_subcommand_json(capsys):
    code = main(["query", "--catalog", str(DEMO_CSV), "--json", DEMO_QUERY])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    matches = payload["machine_payload"]["matches"]
    assert [m["provider_id"] for m in matches] == ["H1", "H2"]


def test_query_subcommand_reports_errors(capsys):
    code = main(["query", "--catalog", str(DEMO_CSV), "a $ b"])
    captured = capsys.readouterr()
    assert code == 2
    assert "offset 2" in captured.err


def test_solve_subcommand_sat(tmp_path, capsys):
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 2 2\n1 2 0\n-1 0\n", encoding="utf-8")
    code = main(["solve", str(cnf)])
    out = capsys.readouterr().out
    assert code == 10
    assert out.splitlines()[0] == "s SATISFIABLE"


def test_solve_subcommand_unsat(tmp_path, capsys):
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 1 2\n1 0\n-1 0\n", encoding="utf-8")
    code = main(["solve", str(cnf)])
    assert code == 20
    assert "s UNSATISFIABLE" in capsys.readouterr().out


def test_ingest_subcommand_versions(tmp_path, capsys):
    catalog = tmp_path / "catalog.json"
    assert main(["ingest", str(DEMO_CSV), "--catalog", str(catalog)]) == 0
    assert "version 1" in capsys.readouterr().out
    assert main(["ingest", str(DEMO_CSV), "--catalog", str(catalog)]) == 0
    assert "version 2" in capsys.readouterr().out
    doc = json.loads(catalog.read_text(encoding="utf-8"))
    assert doc["version"] == 2
    assert len(doc["providers"]) == 7


def test_query_accepts_snapshot_json(tmp_path, capsys):
    catalog = tmp_path / "catalog.json"
    main(["ingest", str(DEMO_CSV), "--catalog", str(catalog)])
    capsys.readouterr()
    code = main(["query", "--catalog", str(catalog), "--json", DEMO_QUERY])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["machine_payload"]["snapshot_version"] == 1


def test_bench_subcommand_writes_csv(tmp_path, capsys):
    out_path = tmp_path / "bench.csv"
    code = main(
        [
            "bench",
            "--sizes", "100",
            "--reps", "1",
            "--providers", "5",
            "--out", str(out_path),
        ]
    )
    assert code == 0
    lines = out_path.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "query_size,translation_ms,solve_ms"
    assert lines[1].startswith("100,")
