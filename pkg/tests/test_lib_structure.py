"""Tests for lib.structure module."""

from itertools import combinations

import numpy as np
import pytest

from decilab.lib.formula import Assignment, Formula
from decilab.lib.generators import decimate_under, gen_planted_fixed
from decilab.lib.oracle import enumerate_solutions
from decilab.lib.phase import r_from_rho
from decilab.lib.structure import (
    classify_forced,
    classify_loose,
    classify_rigid,
    classify_tame,
    classify_two_loose,
    expansion_check,
    flip_distances,
    forcing_clauses,
    max_self_contained,
    q0_check,
    structure_report,
    support_table,
    thresholds,
)
from decilab.types import AssignmentError, ExpansionMode, GenConfig, Model


def brute_force_self_contained(formula: Formula, sigma: Assignment) -> frozenset[int]:
    """Largest candidate set in which every member supports two closed clauses."""
    table = support_table(formula, sigma)
    candidates = [v for v in formula.ordered_variables if v > formula.decimated]
    supported = {
        v: [
            {abs(lit) for lit in formula.clauses[index]}
            for index in table.supported_by(sigma.true_literal(v))
        ]
        for v in candidates
    }
    for size in range(len(candidates), 0, -1):
        for members in combinations(candidates, size):
            chosen = set(members)
            if all(sum(clause <= chosen for clause in supported[v]) >= 2 for v in chosen):
                return frozenset(chosen)
    return frozenset()


@pytest.fixture
def unit_sigma() -> Assignment:
    return Assignment.from_bitstring("101")


class TestThresholds:
    """Test finite-n thresholds."""

    @pytest.mark.parametrize(
        ("n", "expected"),
        [(1, (1, 1)), (2, (1, 1)), (16, (3, 2)), (100, (5, 2))],
    )
    def test_values(self, n, expected):
        """Test ceilings of natural logs, floored at 1."""
        assert tuple(thresholds(n)) == expected


class TestSupport:
    """Test support counts."""

    def test_hand_example(self, planted_pair):
        """Test only (not x1 or x2 or not x6) has a single true literal."""
        formula, sigma = planted_pair
        table = support_table(formula, sigma)
        assert table.supporter == (None, None, None, None, None, -6)
        assert table.counts[-6] == 1
        assert table.counts[1] == 0
        assert table.supported_by(-6) == (5,)
        assert table.support_class(-6) == 1
        assert table.mean_support() == pytest.approx(1 / 6)

    def test_rejects_non_solution(self, planted_pair):
        """Test sigma must satisfy the formula."""
        formula, _ = planted_pair
        with pytest.raises(AssignmentError):
            support_table(formula, Assignment.from_bitstring("010101"))

    def test_planted_mean(self):
        """Test mean support over 200 planted instances is rho/(1 - 2^-k) within 3 SE."""
        n, k, rho = 200, 5, 2.0
        m = round(r_from_rho(k, rho) * n)
        means = []
        for stream in range(200):
            formula, sigma = gen_planted_fixed(GenConfig(n, k, m, 17, Model.PLANTED, stream))
            means.append(support_table(formula, sigma).mean_support())
        values = np.asarray(means)
        expected = m * k / (n * (2**k - 1))
        assert expected == pytest.approx(rho / (1 - 2.0**-k), rel=1e-3)
        standard_error = values.std(ddof=1) / np.sqrt(len(values))
        assert abs(values.mean() - expected) <= 3 * standard_error


class TestLooseLiterals:
    """Test 1-loose and 2-loose classification."""

    def test_hand_example(self, planted_pair):
        """Test x6 is not 1-loose but is 2-loose through x1 and x2."""
        formula, sigma = planted_pair
        loose = classify_two_loose(formula, sigma)
        assert loose.one_loose == frozenset({1, 2, 3, 4, 5})
        assert loose.two_loose == frozenset(range(1, 7))

    def test_blocked(self):
        """Test a supporter without a 1-loose companion is not 2-loose."""
        formula = Formula(n=2, k=2, clauses=((1, -2), (2, -1)))
        loose = classify_two_loose(formula, Assignment.from_bitstring("11"))
        assert loose.one_loose == frozenset()
        assert loose.two_loose == frozenset()


class TestFlipDistances:
    """Test flip distances, loose and rigid variables."""

    def test_forced_have_no_flip(self, unit_formula, unit_sigma):
        """Test variables in unit clauses have d_min = None."""
        distances = flip_distances(unit_sigma, enumerate_solutions(unit_formula))
        assert distances == {1: None, 2: None, 3: 1}
        for variable in classify_forced(unit_formula):
            assert distances[variable] is None

    def test_loose_and_rigid(self, unit_formula, unit_sigma):
        """Test loose within ceil(ln n) and rigid at omega."""
        solutions = enumerate_solutions(unit_formula)
        assert classify_loose(unit_formula, unit_sigma, solutions) == frozenset({3})
        rigid = classify_rigid(unit_formula, unit_sigma, solutions, 2)
        assert {v for v, entry in rigid.items() if entry.rigid} == {1, 2}
        assert classify_rigid(unit_formula, unit_sigma, solutions, 1)[3].rigid

    def test_sigma_must_be_solution(self, two_clause_or):
        """Test a non-solution sigma is rejected."""
        with pytest.raises(AssignmentError):
            flip_distances(Assignment.from_bitstring("00"), enumerate_solutions(two_clause_or))

    def test_matches_pairwise_scan(self, planted_pair):
        """Test d_min against a direct scan of the solution set."""
        formula, sigma = planted_pair
        solutions = enumerate_solutions(formula)
        distances = flip_distances(sigma, solutions)
        for variable in formula.ordered_variables:
            flips = [
                sigma.distance(other)
                for other in solutions.assignments()
                if other.value(variable) != sigma.value(variable)
            ]
            assert distances[variable] == (min(flips) if flips else None)


class TestForcedAndTame:
    """Test forced variables, forcing clauses and tameness."""

    def test_forcing_clause(self, planted_pair):
        """Test decimating x1, x2 leaves (not x6) as the only unit clause."""
        formula, sigma = planted_pair
        assert forcing_clauses(formula, sigma, 2) == ((5, -6),)
        assert classify_forced(decimate_under(planted_pair, 2)) == frozenset({6})

    def test_tame_chain(self, chain_formula):
        """Test the chain ends have small acyclic radius-3 balls."""
        assert classify_tame(chain_formula) == frozenset({1, 4})


class TestSelfContained:
    """Test maximum self-contained sets."""

    def test_triangle(self):
        """Test three mutually supporting variables survive peeling."""
        clauses = ((1, -2), (1, -3), (2, -1), (2, -3), (3, -1), (3, -2))
        formula = Formula(n=3, k=2, clauses=clauses)
        result = max_self_contained(formula, Assignment.from_bitstring("111"))
        assert result.variables == frozenset({1, 2, 3})
        assert result.certificate[1] == (0, 1)

    def test_triangle_collapses(self):
        """Test removing one supported clause peels everything."""
        clauses = ((1, -2), (1, -3), (2, -1), (2, -3), (3, -1))
        formula = Formula(n=3, k=2, clauses=clauses)
        result = max_self_contained(formula, Assignment.from_bitstring("111"))
        assert result.literals == frozenset()

    def test_matches_exhaustive(self):
        """Test peeling finds the largest self-contained set on small instances."""
        for stream in range(20):
            pair = gen_planted_fixed(GenConfig(12, 3, 70, 5, Model.PLANTED, stream))
            for t in (0, 3):
                formula = decimate_under(pair, t)
                result = max_self_contained(formula, pair.sigma)
                assert result.variables == brute_force_self_contained(formula, pair.sigma)
                table = support_table(formula, pair.sigma)
                for literal, (first, second) in result.certificate.items():
                    assert table.supporter[first] == literal
                    assert table.supporter[second] == literal


class TestExpansionAndQ0:
    """Test expansion and Q0 checks."""

    def test_exhaustive_violation(self):
        """Test four copies of (x1 or x2) violate expansion at |Q| = 2."""
        formula = Formula(n=10, k=2, clauses=((1, 2),) * 4)
        result = expansion_check(formula, 0.5)
        assert not result.holds
        assert result.witness == frozenset({1, 2})
        assert result.mode is ExpansionMode.EXHAUSTIVE
        assert result.radius == 5

    def test_heuristic_violation(self):
        """Test the greedy search beyond 20 variables finds the same set."""
        formula = Formula(n=30, k=2, clauses=((1, 2),) * 4)
        result = expansion_check(formula, 0.5)
        assert result.mode is ExpansionMode.HEURISTIC
        assert result.witness == frozenset({1, 2})

    def test_holds(self, chain_formula):
        """Test a sparse chain expands; a zero radius always holds."""
        assert expansion_check(chain_formula, 0.5).holds
        result = expansion_check(Formula(n=10, k=2, clauses=((1, 2),) * 4), 0.01)
        assert result.holds
        assert result.radius == 0

    def test_q0(self):
        """Test degrees and redundant clauses against the thresholds."""
        formula = Formula(n=3, k=3, clauses=((1, 2), (2, 1), (1, -1, 3)))
        result = q0_check(formula)
        assert result.duplicate_clauses == 1
        assert result.repeated_variable_clauses == 1
        assert result.redundant == 2
        assert result.heavy_variables == frozenset({1})
        assert result.max_degree == 3
        assert not result.passes
        assert q0_check(Formula(n=100, k=2, clauses=((1, 2), (3, 4)))).passes


class TestStructureReport:
    """Test the aggregate report."""

    def test_with_solutions(self, unit_formula, unit_sigma):
        """Test fractions when the solution set is available."""
        report = structure_report(unit_formula, unit_sigma, enumerate_solutions(unit_formula))
        assert report.omega == 3
        assert report.forced_fraction == pytest.approx(2 / 3)
        assert report.loose_fraction == pytest.approx(1 / 3)
        assert report.rigid_fraction == pytest.approx(2 / 3)

    def test_without_solutions(self, unit_formula, unit_sigma):
        """Test oracle-backed fractions are None without a solution set."""
        report = structure_report(unit_formula, unit_sigma)
        assert report.loose_fraction is None
        assert report.rigid_fraction is None
        assert report.omega is None
        assert report.two_loose_fraction is not None
