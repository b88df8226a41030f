"""Tests for cli module."""

import json

import pytest

from decilab.cli import EXIT_LIMIT_ABORT, EXIT_OK, EXIT_SPEC_ERROR, main, parse_args
from decilab.lib.dimacs import parse_dimacs, parse_sigma
from decilab.protocol import RECORD_FIELDS, decode_record


@pytest.fixture(autouse=True)
def default_limits(monkeypatch):
    """Keep oracle limits at their defaults unless a test overrides them."""
    monkeypatch.delenv("DECILAB_MAX_FREE_VARS", raising=False)
    monkeypatch.delenv("DECILAB_MAX_SOLUTIONS", raising=False)


@pytest.fixture
def or_file(temp_dir):
    """DIMACS file for (x1 or x2)."""
    path = temp_dir / "or.cnf"
    path.write_text("p cnf 2 1\n1 2 0\n")
    return path


@pytest.fixture
def spec_file(temp_dir):
    """A small planted experiment spec."""
    path = temp_dir / "spec.json"
    spec = {
        "model": "planted",
        "n": 8,
        "k": 3,
        "r": 3.0,
        "schedule": [0.0, 0.5],
        "omega": 2,
        "repetitions": 2,
        "seed": 5,
        "analyses": ["marginals", "bp", "regime"],
    }
    path.write_text(json.dumps(spec))
    return path


class TestParseArgs:
    """Test argument parsing."""

    def test_gen_requires_size(self):
        """Test gen needs one of --m and --r."""
        with pytest.raises(SystemExit):
            parse_args(["gen", "--n", "5", "--k", "3"])

    def test_phase_lists(self):
        """Test comma-separated grids."""
        args = parse_args(["phase", "--k", "20", "--rho", "5,7.5", "--theta", "1"])
        assert args.rho == [5.0, 7.5]
        assert args.theta == [1.0]

    def test_grid_ranges(self):
        """Test --grid expands inclusive ranges."""
        args = parse_args(["phase", "--k", "20", "--grid", "rho=5:7.5:1.25,theta=0.5:1:0.25"])
        assert args.grid == {"rho": [5.0, 6.25, 7.5], "theta": [0.5, 0.75, 1.0]}

    def test_bad_grid(self):
        """Test malformed grid axes are rejected."""
        with pytest.raises(SystemExit):
            parse_args(["phase", "--k", "20", "--grid", "rho=5:7"])

    def test_bad_list(self):
        """Test non-numeric grid values are rejected."""
        with pytest.raises(SystemExit):
            parse_args(["phase", "--k", "20", "--rho", "a,b", "--theta", "1"])


class TestGen:
    """Test the gen command."""

    def test_uniform(self, temp_dir):
        """Test a uniform draw written to a file."""
        out = temp_dir / "f.cnf"
        code = main(["gen", "--n", "8", "--k", "3", "--m", "12", "--seed", "4", "--out", str(out)])
        assert code == EXIT_OK
        formula = parse_dimacs(out.read_text())
        assert (formula.n, formula.k, formula.m) == (8, 3, 12)

    def test_planted_sigma(self, temp_dir):
        """Test planted output carries a satisfying sigma."""
        out, sigma_out = temp_dir / "p.cnf", temp_dir / "p.sigma"
        argv = ["gen", "--n", "8", "--k", "3", "--r", "2", "--model", "planted"]
        argv += ["--out", str(out), "--sigma-out", str(sigma_out)]
        assert main(argv) == EXIT_OK
        formula = parse_dimacs(out.read_text())
        sigma = parse_sigma(sigma_out.read_text())
        assert formula.m == 16
        assert formula.is_satisfied_by(sigma)
        assert parse_sigma(out.read_text()) == sigma

    def test_stdout(self, capsys):
        """Test DIMACS goes to stdout without --out."""
        assert main(["gen", "--n", "5", "--k", "2", "--m", "3"]) == EXIT_OK
        assert "p cnf 5 3" in capsys.readouterr().out


class TestOracle:
    """Test the oracle command."""

    def test_count_and_marginals(self, or_file, capsys):
        """Test (x1 or x2) has 3 solutions and M_x1 = 2/3."""
        assert main(["oracle", "--in", str(or_file), "--marginals"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "count 3" in out
        assert "M x1 = 2/3" in out

    def test_json_file(self, or_file, temp_dir):
        """Test --json writes the result object to a file."""
        target = temp_dir / "oracle.json"
        argv = ["oracle", "--in", str(or_file), "--marginals", "--geometry", "--json", str(target)]
        assert main(argv) == EXIT_OK
        result = json.loads(target.read_text())
        assert result["count"] == 3
        assert result["marginals"] == {"x1": "2/3", "x2": "2/3"}
        assert result["geometry"]["diameter"] == 2

    def test_limit_abort(self, or_file, monkeypatch):
        """Test an oracle limit exits with code 3."""
        monkeypatch.setenv("DECILAB_MAX_FREE_VARS", "1")
        assert main(["oracle", "--in", str(or_file)]) == EXIT_LIMIT_ABORT

    def test_missing_file(self, temp_dir):
        """Test unreadable input exits with code 2."""
        assert main(["oracle", "--in", str(temp_dir / "none.cnf")]) == EXIT_SPEC_ERROR

    def test_malformed_file(self, temp_dir):
        """Test malformed DIMACS exits with code 2."""
        path = temp_dir / "bad.cnf"
        path.write_text("p cnf two 1\n")
        assert main(["oracle", "--in", str(path)]) == EXIT_SPEC_ERROR


class TestBP:
    """Test the bp command."""

    def test_marginals(self, or_file, capsys):
        """Test one sweep on (x1 or x2)."""
        assert main(["bp", "--in", str(or_file), "--omega", "1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "omega 1" in out
        assert "mu x1 = 0.666666666666666" in out

    def test_decimation_json(self, temp_dir):
        """Test a forced chain decimates to 11."""
        path, target = temp_dir / "chain.cnf", temp_dir / "bp.json"
        path.write_text("p cnf 2 2\n1 0\n-1 2 0\n")
        argv = ["bp", "--in", str(path), "--omega", "1", "--decimate", "--json", str(target)]
        assert main(argv) == EXIT_OK
        result = json.loads(target.read_text())
        assert result["decimation"] == {"succeeded": True, "failed_at": None, "assignment": "11"}


class TestAnalyze:
    """Test the analyze command."""

    def test_embedded_sigma(self, temp_dir):
        """Test the 'c sigma' line is used and oracle fields appear."""
        path, target = temp_dir / "unit.cnf", temp_dir / "analyze.json"
        path.write_text("c sigma 101\np cnf 3 3\n1 0\n-2 0\n1 2 3 0\n")
        argv = ["analyze", "--in", str(path), "--oracle", "--json", str(target)]
        assert main(argv) == EXIT_OK
        result = json.loads(target.read_text())
        assert result["forced_fraction"] == pytest.approx(2 / 3)
        assert result["loose_fraction"] == pytest.approx(1 / 3)
        assert result["q0"]["passes"] is True
        assert result["thresholds"] == {"ln_n": 2, "ln_ln_n": 1}

    def test_missing_sigma(self, or_file):
        """Test analyze without any sigma exits with code 2."""
        assert main(["analyze", "--in", str(or_file)]) == EXIT_SPEC_ERROR


class TestPhase:
    """Test the phase command."""

    def test_grid(self, temp_dir, capsys):
        """Test verdict lines and the CSV grid."""
        target = temp_dir / "phase.csv"
        argv = ["phase", "--k", "20", "--rho", "5,7.5", "--theta", "0.9,1.0", "--csv", str(target)]
        assert main(argv) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 4
        assert "rho=7.5 theta=1.0 labels=shattered" in lines[3]
        assert target.read_text().splitlines()[0].startswith("k,rho,theta,k_theta,labels")

    def test_missing_axis(self):
        """Test phase without theta values exits with code 2."""
        assert main(["phase", "--k", "20", "--rho", "5"]) == EXIT_SPEC_ERROR

    def test_invalid_point(self):
        """Test a non-positive rho exits with code 2."""
        assert main(["phase", "--k", "20", "--rho", "0", "--theta", "1"]) == EXIT_SPEC_ERROR


class TestExperiment:
    """Test the experiment command."""

    def test_stdout_records(self, spec_file, capsys):
        """Test records stream to stdout as JSON lines."""
        assert main(["experiment", "--spec", str(spec_file)]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 4
        records = [decode_record(line) for line in lines]
        assert [r["t"] for r in records] == [0, 4, 0, 4]
        assert records[0]["m"] == 24

    def test_files(self, spec_file, temp_dir):
        """Test --json and --csv outputs."""
        jsonl, table = temp_dir / "out.jsonl", temp_dir / "out.csv"
        argv = ["experiment", "--spec", str(spec_file), "--json", str(jsonl), "--csv", str(table)]
        assert main(argv) == EXIT_OK
        assert len(jsonl.read_text().splitlines()) == 4
        assert table.read_text().splitlines()[0] == ",".join(RECORD_FIELDS)

    def test_overrides(self, spec_file, mocker):
        """Test --seed and --workers reach the runner."""
        runner = mocker.patch("decilab.cli.run_experiment", return_value=[])
        argv = ["experiment", "--spec", str(spec_file), "--seed", "9", "--workers", "3"]
        assert main(argv + ["--bp-comparison"]) == EXIT_OK
        spec, kind = runner.call_args.args
        assert spec.seed == 9
        assert spec.workers == 3
        assert kind.value == "bp-comparison"

    def test_invalid_spec(self, temp_dir):
        """Test an invalid spec exits with code 2."""
        path = temp_dir / "spec.json"
        path.write_text(json.dumps({"n": 8, "k": 3, "m": 10, "m_typo": 1}))
        assert main(["experiment", "--spec", str(path)]) == EXIT_SPEC_ERROR

    def test_bp_comparison_limit(self, spec_file, monkeypatch):
        """Test an oracle abort in a BP comparison exits with code 3."""
        monkeypatch.setenv("DECILAB_MAX_FREE_VARS", "3")
        argv = ["experiment", "--spec", str(spec_file), "--bp-comparison"]
        assert main(argv) == EXIT_LIMIT_ABORT
