"""Test configuration and fixtures for decilab tests."""

from pathlib import Path

import numpy as np
import pytest

from decilab.lib.formula import Assignment, Formula
from decilab.lib.generators import PlantedPair
from decilab.lib.rng import spawn_generator


@pytest.fixture
def temp_dir(tmp_path: Path) -> Path:
    """Provide a temporary directory for tests."""
    return tmp_path


@pytest.fixture
def rng() -> np.random.Generator:
    """A seeded Philox generator."""
    return spawn_generator(1234)


@pytest.fixture
def two_clause_or() -> Formula:
    """(x1 or x2): three solutions, M_x1 = 2/3."""
    return Formula(n=2, k=2, clauses=((1, 2),))


@pytest.fixture
def chain_formula() -> Formula:
    """A small tree-shaped 2-CNF: (x1 or x2)(not x2 or x3)(x3 or not x4)."""
    return Formula(n=4, k=2, clauses=((1, 2), (-2, 3), (3, -4)))


@pytest.fixture
def unit_formula() -> Formula:
    """Unit clauses pin x1 to 1 and x2 to 0; x3 is unconstrained."""
    return Formula(n=3, k=3, clauses=((1,), (-2,), (1, 2, 3)))


@pytest.fixture
def unsat_formula() -> Formula:
    """All four 2-clauses over x1, x2."""
    return Formula(n=2, k=2, clauses=((1, 2), (1, -2), (-1, 2), (-1, -2)))


@pytest.fixture
def planted_pair() -> PlantedPair:
    """A 3-CNF on 6 variables satisfied by sigma = 101010."""
    formula = Formula(
        n=6,
        k=3,
        clauses=((1, 2, 3), (-2, 3, 5), (1, -4, 6), (-2, -4, -6), (3, 4, 5), (-1, 2, -6)),
    )
    return PlantedPair(formula, Assignment.from_bitstring("101010"))
