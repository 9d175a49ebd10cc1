import json
import math
import os

import pytest

from holonomy.cli import main, table_from_csv, table_to_csv
from holonomy.config import RunConfig, config_from_sources
from holonomy.fields import make_field
from holonomy.orders import LatticeSpec
from holonomy.spectrum import length_spectrum


def run_cli(args):
    return main(args)


class TestConfig:
    def test_digest_stable_and_sensitive(self):
        a = RunConfig().digest()
        b = RunConfig().digest()
        c = RunConfig(precision_bits=256).digest()
        assert a == b and a != c

    def test_precision_floor(self):
        with pytest.raises(ValueError):
            RunConfig(precision_bits=32)

    def test_file_plus_overrides(self, tmp_path):
        p = tmp_path / "cfg"
        p.write_text("precision_bits = 128\nseed = 7\n# comment\n\nstrict = true\n")
        cfg = config_from_sources(str(p), output_format="json")
        assert cfg.seed == 7 and cfg.strict and cfg.output_format == "json"


class TestCliFlows:
    def test_field_info(self, capsys):
        assert run_cli(["field", "info", "--m", "2"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["eps"] == "1+w" and out["h_K"] == 1 and "config_digest" in out

    def test_enumerate_and_stats_roundtrip(self, tmp_path, capsys):
        csv_path = str(tmp_path / "x3.csv")
        assert run_cli(["enumerate", "--m", "2", "--x", "3", "--out", csv_path]) == 0
        text = open(csv_path).read()
        assert text.startswith("# m=2 x=3")
        lines = [l for l in text.splitlines() if l and not l.startswith("#")]
        assert len(lines) == 1 + 4  # header + four trace rows
        assert run_cli(["--format", "json", "stats", "pgt", "--in", csv_path,
                        "--grid", "3"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["rows"][0]["count"] == 8.0

    def test_determinism_byte_identical(self, tmp_path):
        p1 = str(tmp_path / "a.csv")
        p2 = str(tmp_path / "b.csv")
        run_cli(["enumerate", "--m", "2", "--x", "3", "--out", p1])
        run_cli(["enumerate", "--m", "2", "--x", "3", "--out", p2])
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_cache_does_not_change_output(self, tmp_path):
        p1 = str(tmp_path / "a.csv")
        p2 = str(tmp_path / "b.csv")
        cache = str(tmp_path / "cache.jsonl")
        run_cli(["--cache", cache, "enumerate", "--m", "2", "--x", "3", "--out", p1])
        assert os.path.exists(cache)
        run_cli(["--cache", cache, "enumerate", "--m", "2", "--x", "3", "--out", p2])
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_check_narrow(self, capsys):
        assert run_cli(["check", "narrow", "--m", "3"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "h_K == h_K+ : false"
        assert run_cli(["check", "narrow", "--m", "2"]) == 0
        assert "true" in capsys.readouterr().out.splitlines()[0]

    def test_equi_rect_mu_column(self, tmp_path, capsys):
        csv_path = str(tmp_path / "x3.csv")
        run_cli(["enumerate", "--m", "2", "--x", "3", "--out", csv_path])
        assert run_cli(["--format", "json", "stats", "equi", "--in", csv_path,
                        "--rect", " -1.5707963267948966:1.5707963267948966",
                        "--N", "8"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert abs(rep["rows"][0]["mu_A"] - 0.181690113816) < 1e-9

    def test_equi_fm(self, tmp_path, capsys):
        csv_path = str(tmp_path / "x3.csv")
        run_cli(["enumerate", "--m", "2", "--x", "3", "--out", csv_path])
        assert run_cli(["--format", "json", "stats", "equi", "--in", csv_path,
                        "--fm", "2"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["rows"][0]["mu_f"] == 0.0

    def test_stats_units(self, capsys, tmp_path):
        cache = str(tmp_path / "c.jsonl")
        assert run_cli(["--cache", cache, "--format", "json", "stats", "units",
                        "--m", "2", "--T", str(math.exp(1.5))]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["kind"] == "units"

    def test_trace_geometric(self, tmp_path, capsys):
        csv_path = str(tmp_path / "x4.csv")
        run_cli(["enumerate", "--m", "2", "--x", "4", "--out", csv_path])
        assert run_cli(["trace", "geometric", "--in", csv_path, "--weight", "1",
                        "--vol", "1.0", "--testfn", "bump:3.5"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert "identity_term" in rep and "total" in rep

    def test_oracle_class_number(self, capsys):
        assert run_cli(["oracle", "class-number", "--m", "2", "--D", " -1+2*w"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["h_O"] == 1 and rep["certified"] is True

    def test_exit_codes(self, tmp_path, capsys):
        # usage error
        assert run_cli([]) == 1
        # precondition: non-squarefree field
        assert run_cli(["enumerate", "--m", "4", "--x", "2"]) == 2
        # h_K > 1 out of scope
        assert run_cli(["enumerate", "--m", "10", "--x", "2"]) == 2
        # inconclusive + strict -> 3 (tiny principality budget)
        cfg = tmp_path / "cfg"
        cfg.write_text("principality_budget = 1\n")
        code = run_cli(["--config", str(cfg), "--strict", "oracle", "class-number",
                        "--m", "2", "--D", " -1+2*w"])
        assert code == 3
        capsys.readouterr()

    def test_empty_table_csv_header_only(self, tmp_path):
        p = str(tmp_path / "empty.csv")
        assert run_cli(["enumerate", "--m", "2", "--x", "0.5", "--out", p]) == 0
        lines = open(p).read().splitlines()
        assert len(lines) == 2  # comment + header, no data rows
        assert lines[1].startswith("t_a,t_b,")

    def test_csv_structural_roundtrip(self):
        K = make_field(2)
        tab = length_spectrum(K, 3.0, LatticeSpec.hilbert(K), with_elliptic=False)
        text = table_to_csv(tab)
        back = table_from_csv(text)
        assert back.field_m == 2 and len(back.rows) == len(tab.rows)
        for a, b in zip(tab.rows, back.rows):
            assert abs(a.length - b.length) < 1e-9
            assert a.q == b.q
            assert a.multiplicity.lo == b.multiplicity.lo
