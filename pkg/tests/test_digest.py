"""Tests for digest module."""

from dataclasses import replace
import hashlib

from decilab.digest import DIGEST_LENGTH, canonical_json, config_hash, formula_digest, sha256_hex
from decilab.lib.formula import Formula
from decilab.types import Analysis, ExperimentSpec, Model


def make_spec(**overrides) -> ExperimentSpec:
    spec = ExperimentSpec(Model.PLANTED, n=20, k=3, m=60, schedule=(0.0, 0.5), seed=7)
    return replace(spec, **overrides)


class TestSha256:
    """Test hashing primitives."""

    def test_matches_hashlib(self):
        """Test the digest agrees with a reference SHA-256."""
        payload = b"decimation"
        assert sha256_hex(payload) == hashlib.sha256(payload).hexdigest()

    def test_canonical_json(self):
        """Test keys are sorted and sets are ordered."""
        assert canonical_json({"b": frozenset({3, 1}), "a": Model.UNIFORM}) == (
            b'{"a":"uniform","b":[1,3]}'
        )


class TestConfigHash:
    """Test experiment config hashing."""

    def test_stable(self):
        """Test equal specs hash equally."""
        assert config_hash(make_spec()) == config_hash(make_spec())
        assert len(config_hash(make_spec())) == DIGEST_LENGTH

    def test_analysis_order_irrelevant(self):
        """Test analyses hash as a set."""
        first = make_spec(analyses=frozenset({Analysis.BP, Analysis.REGIME}))
        second = make_spec(analyses=frozenset({Analysis.REGIME, Analysis.BP}))
        assert config_hash(first) == config_hash(second)

    def test_output_settings_ignored(self):
        """Test paths and workers do not change the hash."""
        base = config_hash(make_spec())
        assert config_hash(make_spec(json_path="out.jsonl", workers=4)) == base

    def test_seed_changes_hash(self):
        """Test record-affecting fields change the hash."""
        assert config_hash(make_spec(seed=8)) != config_hash(make_spec())


class TestFormulaDigest:
    """Test instance digests."""

    def test_scope_matters(self):
        """Test formulas with different free variables differ."""
        clauses = ((1, 2),)
        full = Formula(n=3, k=2, clauses=clauses)
        narrow = Formula(n=3, k=2, clauses=clauses, scope=frozenset({1, 2}))
        assert formula_digest(full) != formula_digest(narrow)
        assert formula_digest(full) == formula_digest(Formula(n=3, k=2, clauses=clauses))
