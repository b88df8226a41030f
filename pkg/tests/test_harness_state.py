"""Tests for harness.state module."""

import json

import pytest

from decilab.digest import config_hash
from decilab.harness.state import RunState, load_experiment_spec, spec_from_mapping
from decilab.types import Analysis, Model, RecordKind
from decilab.utils.validation import SpecError


@pytest.fixture
def spec_data():
    """A minimal valid spec mapping."""
    return {"model": "planted", "n": 20, "k": 3, "m": 60, "schedule": [0.0, 0.5]}


class TestSpecFromMapping:
    """Test spec parsing."""

    def test_minimal(self, spec_data):
        """Test defaults fill the optional keys."""
        spec = spec_from_mapping(spec_data)
        assert spec.model is Model.PLANTED
        assert spec.schedule == (0.0, 0.5)
        assert spec.analyses == frozenset(Analysis)
        assert spec.omega == 1
        assert spec.workers == 1

    def test_density(self, spec_data):
        """Test m is derived from r when r is given."""
        del spec_data["m"]
        spec_data["r"] = 4.26
        assert spec_from_mapping(spec_data).m == 85

    def test_m_and_r_exclusive(self, spec_data):
        """Test giving both m and r is rejected."""
        spec_data["r"] = 3.0
        with pytest.raises(SpecError, match=r"exactly one of"):
            spec_from_mapping(spec_data)

    def test_unknown_key(self, spec_data):
        """Test unknown keys are reported."""
        spec_data["colour"] = "blue"
        with pytest.raises(SpecError, match=r"unknown spec keys: colour"):
            spec_from_mapping(spec_data)

    def test_missing_key(self, spec_data):
        """Test n and k are required."""
        del spec_data["k"]
        with pytest.raises(SpecError, match=r"missing spec key"):
            spec_from_mapping(spec_data)

    def test_bad_model(self, spec_data):
        """Test unknown models are rejected."""
        spec_data["model"] = "random"
        with pytest.raises(SpecError, match=r"invalid spec value"):
            spec_from_mapping(spec_data)

    @pytest.mark.parametrize(
        ("key", "value"),
        [
            ("schedule", [0.5, 0.1]),
            ("schedule", [1.5]),
            ("omega", -1),
            ("repetitions", 0),
            ("seed", -3),
            ("chi", 2.0),
            ("workers", 0),
            ("k", 1),
        ],
    )
    def test_invalid_values(self, spec_data, key, value):
        """Test out-of-range values raise SpecError."""
        spec_data[key] = value
        with pytest.raises(SpecError):
            spec_from_mapping(spec_data)

    def test_analyses(self, spec_data):
        """Test analyses parse into a set."""
        spec_data["analyses"] = ["bp", "regime", "bp"]
        assert spec_from_mapping(spec_data).analyses == {Analysis.BP, Analysis.REGIME}


class TestLoadExperimentSpec:
    """Test spec files."""

    def test_load(self, spec_data, temp_dir):
        """Test a spec file loads, with the seed overridable."""
        path = temp_dir / "spec.json"
        path.write_text(json.dumps({**spec_data, "seed": 5}))
        assert load_experiment_spec(path).seed == 5
        assert load_experiment_spec(path, seed=9).seed == 9

    def test_invalid_json(self, temp_dir):
        """Test invalid JSON raises SpecError."""
        path = temp_dir / "spec.json"
        path.write_text("{model: planted")
        with pytest.raises(SpecError, match=r"not valid JSON"):
            load_experiment_spec(path)

    def test_not_object(self, temp_dir):
        """Test a JSON list is rejected."""
        path = temp_dir / "spec.json"
        path.write_text("[]")
        with pytest.raises(SpecError, match=r"JSON object"):
            load_experiment_spec(path)

    def test_seed_override_validated(self, spec_data, temp_dir):
        """Test the override seed is validated too."""
        path = temp_dir / "spec.json"
        path.write_text(json.dumps(spec_data))
        with pytest.raises(SpecError):
            load_experiment_spec(path, seed=-1)


class TestRunState:
    """Test RunState dataclass."""

    def test_digest(self, spec_data):
        """Test the digest defaults to the config hash."""
        spec = spec_from_mapping(spec_data)
        state = RunState(spec)
        assert state.digest == config_hash(spec)
        assert state.kind is RecordKind.DECIMATION
        assert state.metrics.get_metrics()["records"] == 0
