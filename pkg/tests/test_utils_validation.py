"""Tests for utils.validation module."""

import pytest

from decilab.utils.validation import (
    SpecError,
    ValidationError,
    validate_int,
    validate_model_size,
    validate_probability,
    validate_schedule,
    validate_seed,
)


class TestValidateInt:
    """Test integer parameter validation."""

    def test_validate_int_valid(self):
        """Test values at or above the minimum pass."""
        validate_int("n", 0)
        validate_int("n", 5, minimum=5)

    def test_validate_int_too_small(self):
        """Test values below the minimum."""
        with pytest.raises(ValidationError, match=r"k must be >= 2 \(got 1\)"):
            validate_int("k", 1, minimum=2)

    def test_validate_int_rejects_bool_and_float(self):
        """Test non-int values are rejected."""
        with pytest.raises(ValidationError, match=r"must be an integer"):
            validate_int("n", True)
        with pytest.raises(ValidationError, match=r"must be an integer"):
            validate_int("n", 2.0)

    def test_validation_error_is_value_error(self):
        """Test the error hierarchy."""
        assert issubclass(ValidationError, ValueError)
        assert issubclass(SpecError, ValidationError)


class TestValidateModelSize:
    """Test (n, k, m) validation."""

    def test_valid_sizes(self):
        """Test typical sizes pass."""
        validate_model_size(10, 3, 0)
        validate_model_size(3, 3, 100)

    def test_k_too_small(self):
        """Test k below 2."""
        with pytest.raises(ValidationError, match=r"k must be >= 2"):
            validate_model_size(10, 1, 5)

    def test_n_below_k(self):
        """Test n smaller than k."""
        with pytest.raises(ValidationError, match=r"n must be >= 3 \(got 2\)"):
            validate_model_size(2, 3, 1)

    def test_negative_m(self):
        """Test negative clause counts."""
        with pytest.raises(ValidationError, match=r"m must be >= 0"):
            validate_model_size(5, 3, -1)


class TestValidateSeed:
    """Test seed validation."""

    def test_seed_bounds(self):
        """Test the 64-bit seed range."""
        validate_seed(0)
        validate_seed(2**64 - 1)
        with pytest.raises(ValidationError, match=r"seed must be in"):
            validate_seed(2**64)
        with pytest.raises(ValidationError, match=r"seed must be in"):
            validate_seed(-1)


class TestValidateProbabilityAndSchedule:
    """Test probability and schedule validation."""

    def test_probability(self):
        """Test the closed unit interval."""
        validate_probability("chi", 0.0)
        validate_probability("chi", 1.0)
        with pytest.raises(ValidationError, match=r"chi must lie in \[0, 1\]"):
            validate_probability("chi", 1.01)

    def test_schedule_sorted(self):
        """Test sorted schedules pass and unsorted ones fail."""
        validate_schedule([0.0, 0.25, 0.25, 1.0])
        validate_schedule([])
        with pytest.raises(ValidationError, match=r"sorted ascending"):
            validate_schedule([0.5, 0.2])

    def test_schedule_out_of_range(self):
        """Test fractions outside [0, 1]."""
        with pytest.raises(ValidationError, match=r"schedule fraction"):
            validate_schedule([0.0, 1.5])
