import csv
import json
import re
import subprocess
import sys

import pytest

from qfock.checks import REGISTRY, run_check
from qfock.cli import export_csv, list_checks, load_config, LocatedError, main

HAAR_TRIPLES = """\
filter0 = (0, 0.7071067811865476, 0.0), (1, 0.7071067811865476, 0.0)
filter1 = (0, 0.7071067811865476, 0.0), (1, -0.7071067811865476, 0.0)
"""
DUPLICATED = """\
filter0 = (0, 0.7071067811865476, 0.0), (1, 0.7071067811865476, 0.0)
filter1 = (0, 0.7071067811865476, 0.0), (1, 0.7071067811865476, 0.0)
"""


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(tmp_path, text, *extra):
    cfg = write(tmp_path, text)
    out = tmp_path / "out"
    code = main(["run", "--config", str(cfg), "--out", str(out), *extra])
    doc = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, doc


class TestExitCodes:
    def test_pass(self, tmp_path):
        code, doc = run(tmp_path, "[run]\nchecks = cuntz-check\n[check:cuntz-check]\nM = 64\n")
        assert code == 0
        rep, = doc["reports"]
        assert rep["verdict"] == "pass" and max(rep["residuals"].values()) < 1e-12

    def test_duplicated_filter_fails(self, tmp_path):
        text = ("[run]\nchecks = cuntz-check\n[bank:dup]\nN = 2\n" + DUPLICATED +
                "[check:cuntz-check]\nbank = 'dup'\nM = 16\ntol = 1e-10\n")
        code, doc = run(tmp_path, text)
        assert code == 2
        rep, = doc["reports"]
        assert rep["verdict"] == "fail"
        assert [0, 1] in rep["details"]["failing_pairs"]
        assert rep["details"]["isometry_table"][0][1] == pytest.approx(1.0)

    def test_unknown_check(self, tmp_path, capsys):
        code, doc = run(tmp_path, "[run]\nchecks = foo\n")
        assert code == 1 and doc is None
        assert re.search(r"run\.ini:2: .*unknown check 'foo'", capsys.readouterr().err)

    def test_unknown_parameter(self, tmp_path, capsys):
        code, _ = run(tmp_path, "[run]\nchecks = cuntz-check\n\n[check:cuntz-check]\nM = 8\nwidth = 3\n")
        assert code == 1
        assert "run.ini:6:" in capsys.readouterr().err

    def test_syntax_error(self, tmp_path, capsys):
        code, _ = run(tmp_path, "checks = all\n[run]\n")
        assert code == 1
        assert "run.ini:1:" in capsys.readouterr().err

    def test_missing_run_section(self, tmp_path):
        assert run(tmp_path, "[check:qbracket]\n")[0] == 1

    def test_bad_parameter_value(self, tmp_path, capsys):
        code, _ = run(tmp_path, "[run]\nchecks = cuntz-check\n[check:cuntz-check]\nbank = 'nope'\n")
        assert code == 1
        assert "run.ini:3:" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "absent.ini"), "--out", str(tmp_path)]) == 1

    def test_bad_tol_scale(self, tmp_path):
        assert run(tmp_path, "[run]\nchecks = qbracket\n", "--tol-scale", "-1")[0] == 1

    def test_tol_scale_can_force_failure(self, tmp_path):
        code, doc = run(tmp_path, "[run]\nchecks = filterbank-unitarity\n", "--tol-scale", "1e-300")
        assert code == 2 and doc["reports"][0]["tolerance"]["condition_a"] < 1e-290

    def test_report_only_never_fails(self, tmp_path):
        code, doc = run(tmp_path, "[run]\nchecks = commutation-symbol, refinement-eq\n")
        assert code == 0
        assert {r["verdict"] for r in doc["reports"]} == {"report-only"}
        assert doc["summary"] == {"asserted": 0, "failed": 0, "report_only": 2}


class TestReport:
    def test_deterministic_body(self, tmp_path):
        text = "[run]\nchecks = mellin-identities, intertwining, fock-gram\nseed = 11\n[check:fock-gram]\ncount = 10\n"
        bodies = []
        for k in range(2):
            out = tmp_path / f"o{k}"
            assert main(["run", "--config", str(write(tmp_path, text)), "--out", str(out)]) == 0
            doc = json.loads((out / "report.json").read_text())
            assert set(doc["header"]) == {"timestamp", "wall_times"}
            doc.pop("header")
            bodies.append(json.dumps(doc, sort_keys=True))
        assert bodies[0] == bodies[1]

    def test_seed_changes_body(self, tmp_path):
        text = "[run]\nchecks = intertwining\n"
        _, a = run(tmp_path, text, "--seed", "1")
        _, b = run(tmp_path, text, "--seed", "2")
        assert a["seed"] == 1 and b["seed"] == 2
        assert a["reports"][0]["details"] != b["reports"][0]["details"]

    def test_entries_carry_anchor_and_fields(self, tmp_path):
        _, doc = run(tmp_path, "[run]\nchecks = qbracket, ladder-shift\n")
        for rep in doc["reports"]:
            assert rep["anchor"] == REGISTRY[rep["check"]].anchor
            assert set(rep) >= {"check", "params", "residuals", "tolerance", "verdict", "version", "seed"}

    def test_out_directory_precedence(self, tmp_path, monkeypatch):
        cfg = write(tmp_path, f"[run]\nchecks = qbracket\nout = {tmp_path / 'from_cfg'}\n")
        monkeypatch.setenv("QFOCK_OUT_DIR", str(tmp_path / "from_env"))
        assert main(["run", "--config", str(cfg)]) == 0
        assert (tmp_path / "from_cfg" / "report.json").exists()
        cfg2 = write(tmp_path, "[run]\nchecks = qbracket\n", "env.ini")
        assert main(["run", "--config", str(cfg2)]) == 0
        assert (tmp_path / "from_env" / "report.json").exists()

    def test_bank_and_factor_sections(self, tmp_path):
        text = ("[run]\nchecks = filterbank-unitarity, fock-gram\n[bank:h]\nN = 2\n" + HAAR_TRIPLES +
                "[check:filterbank-unitarity]\nbank = 'h'\n"
                "[factor:f]\nN = 2\nd = 2\nR1 = [[0, 1], [0, 0]]\nR2 = [[0, 0], [1, 0]]\n"
                "[check:fock-gram]\nfactor = 'f'\ncount = 5\n")
        code, doc = run(tmp_path, text)
        assert code == 0

    def test_config_parsing(self, tmp_path):
        cfg = load_config(write(tmp_path, "[run]\nchecks = all\nseed = 7\n[check:cuntz-check]\nM = 32\n"))
        assert cfg.checks == list(REGISTRY) and cfg.seed == 7 and cfg.params["cuntz-check"] == {"M": 32}
        with pytest.raises(LocatedError):
            load_config(write(tmp_path, "[run]\nseed = x\n", "bad.ini"))


class TestList:
    def test_modes(self):
        text = list_checks()
        assert re.search(r"^thm-osc1\s+report-only", text, re.M)
        assert re.search(r"^mellin-identities\s+asserted", text, re.M)

    def test_every_check_listed(self, capsys):
        assert main(["list"]) == 0
        names = [line.split()[0] for line in capsys.readouterr().out.splitlines() if line and not line[0].isspace()]
        assert names == list(REGISTRY)


@pytest.fixture(scope="module")
def report(tmp_path_factory):
    out = tmp_path_factory.mktemp("rep")
    cfg = out / "c.ini"
    cfg.write_text("[run]\nchecks = mra-ladder, commutation-symbol, mellin-identities\n")
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    return out / "report.json"


class TestExport:
    def test_ladder_norms_monotone(self, report, tmp_path):
        p = tmp_path / "norms.csv"
        assert main(["export", "--report", str(report), "--series", "ladder_decay_norms", "--out", str(p)]) == 0
        rows = list(csv.reader(p.open()))
        assert rows[0] == ["index", "value"]
        vals = [float(r[1]) for r in rows[1:]]
        assert len(vals) >= 2 and all(b <= a for a, b in zip(vals, vals[1:]))

    def test_commutator_diagonal_rows(self, report, tmp_path):
        p = tmp_path / "diag.csv"
        main(["export", "--report", str(report), "--series", "commutator_diagonal", "--out", str(p)])
        rows = list(csv.reader(p.open()))
        K = REGISTRY["commutation-symbol"].defaults["K"]
        assert rows[0] == ["index", "re", "im"] and len(rows) - 1 == K + 1

    def test_scalar_series(self, report, tmp_path):
        p = export_csv(json.loads(report.read_text()), "mellin_convergence", tmp_path / "conv.csv")
        rows = list(csv.reader(p.open()))
        assert rows[0] == ["index", "value"] and len(rows) == 4

    def test_labeled_columns(self, tmp_path):
        doc = {"reports": [{"check": "x", "series": {"t": [{"q": 0.5, "gap": 1.0}, {"q": 0.3, "gap": 2.0}]}}]}
        rows = list(csv.reader(export_csv(doc, "t", tmp_path / "t.csv").open()))
        assert rows == [["index", "gap", "q"], ["0", "1.0", "0.5"], ["1", "2.0", "0.3"]]

    def test_empty_series_is_header_only(self, tmp_path):
        doc = {"reports": [{"check": "x", "series": {"empty": []}}]}
        p = export_csv(doc, "empty", tmp_path / "e.csv")
        assert p.read_text().splitlines() == ["index,value"]

    def test_unknown_series(self, report, tmp_path, capsys):
        code = main(["export", "--report", str(report), "--series", "nope", "--out", str(tmp_path / "x.csv")])
        assert code == 1 and "nope" in capsys.readouterr().err

    def test_deterministic(self, report, tmp_path):
        doc = json.loads(report.read_text())
        a = export_csv(doc, "commutator_diagonal", tmp_path / "a.csv").read_bytes()
        b = export_csv(doc, "commutator_diagonal", tmp_path / "b.csv").read_bytes()
        assert a == b


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, "[run]\nchecks = qbracket\n")
    proc = subprocess.run([sys.executable, "-m", "qfock", "run", "--config", str(cfg), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("pass")


def test_run_check_direct():
    rep = run_check("qbracket")
    assert rep.verdict == "pass" and rep.wall_time >= 0
