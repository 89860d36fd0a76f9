"""
Tests for the placement service: sorting solutions, the combined heuristic, fault weightings and the effect on V.
"""

import itertools
import logging
import math

import numpy as np
import pytest
import scipy.optimize

from gridplace.models.placement import Algorithm, PlacementResult, WeightingKind
from gridplace.schemas.report import PlacementDocument
from gridplace.services.analysis import AnalysisService
from gridplace.services.grid import GridService
from gridplace.services.placement import PlacementService
from gridplace.services.spectral import SpectralService
from gridplace.utils.exceptions import InvalidParameterError, MissingThresholdError
from tests.conftest import GridFactory


def brute_force_minimum(coefficients: np.ndarray) -> float:
    """Smallest c . x over x in {-1, 0, 1}^N with sum x = 0."""
    best = np.inf
    for shape in itertools.product((-1.0, 0.0, 1.0), repeat=coefficients.size):
        if sum(shape) == 0:
            best = min(best, float(np.dot(coefficients, shape)))
    return best


class TestSortedAssignment:
    """Test the single-target placements."""

    def test_odd_example(self, placement_service: PlacementService):
        """Test rho = (-2, 0, 5) -> r = (1, 0, -1)."""
        assert np.array_equal(placement_service.optimize_inertia([-2.0, 0.0, 5.0]), [1.0, 0.0, -1.0])

    def test_even_example(self, placement_service: PlacementService):
        """Test that the two most negative coefficients get +1."""
        r = placement_service.optimize_damping([0.3, -0.1, -0.7, 0.2])

        assert np.array_equal(r, [-1.0, 1.0, 1.0, -1.0])

    def test_ties_by_index(self, placement_service: PlacementService):
        """Test that equal coefficients are ordered by ascending bus index."""
        assert np.array_equal(placement_service.optimize_inertia([1.0, 1.0, 1.0, 1.0]), [1.0, 1.0, -1.0, -1.0])

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_brute_force(self, placement_service: PlacementService, n):
        """Test optimality against enumeration of every feasible shape."""
        rng = np.random.default_rng(n)
        for _ in range(5):
            rho = rng.normal(size=n)
            r = placement_service.optimize_inertia(rho)
            assert float(rho @ r) == pytest.approx(brute_force_minimum(rho), abs=1e-12)

    @pytest.mark.parametrize("n", [7, 10, 15])
    def test_linear_program(self, placement_service: PlacementService, n):
        """Test that the sorting solution attains the LP relaxation optimum."""
        rng = np.random.default_rng(100 + n)
        alpha = rng.normal(size=n)

        a = placement_service.optimize_damping(alpha)
        relaxed = scipy.optimize.linprog(alpha, A_eq=np.ones((1, n)), b_eq=[0.0], bounds=[(-1.0, 1.0)] * n)

        assert relaxed.success
        assert float(alpha @ a) == pytest.approx(relaxed.fun, abs=1e-9)

    def test_feasible(self, placement_service: PlacementService):
        """Test sum r = 0 and |r_i| <= 1."""
        r = placement_service.optimize_inertia(np.random.default_rng(1).normal(size=9))

        assert r.sum() == 0.0
        assert set(np.unique(r)) <= {-1.0, 0.0, 1.0}


class TestCombinedPlacement:
    """Test the joint placement with sum r a = 0."""

    def test_already_orthogonal(self, placement_service: PlacementService):
        """Test that orthogonal single-target optima are returned unchanged."""
        result = placement_service.optimize_combined([-3.0, -1.0, 1.0, 3.0], [-3.0, 1.0, -1.0, 3.0])

        assert np.array_equal(result.r, [1.0, 1.0, -1.0, -1.0])
        assert np.array_equal(result.a, [1.0, -1.0, 1.0, -1.0])
        assert result.iterations == 0
        assert result.constraint_residuals == (0.0, 0.0, 0.0)
        assert result.algorithm == Algorithm.COMBINED

    def test_tie_prefers_damping_pair(self, placement_service: PlacementService):
        """Test that an equal objective increase zeroes the a-pair."""
        result = placement_service.optimize_combined([-1.0, 1.0], [-1.0, 1.0])

        assert np.array_equal(result.r, [1.0, -1.0])
        assert np.array_equal(result.a, [0.0, 0.0])
        assert result.iterations == 1
        assert result.objective_linear == pytest.approx(-2.0)

    def test_cheaper_inertia_pair(self, placement_service: PlacementService):
        """Test that the r-pair is zeroed when it costs less."""
        result = placement_service.optimize_combined([-0.5, 0.5], [-1.0, 1.0])

        assert np.array_equal(result.r, [0.0, 0.0])
        assert np.array_equal(result.a, [1.0, -1.0])

    def test_odd_zero_alignment(self, placement_service: PlacementService):
        """Test that the zero entries are moved onto one bus before pairs are removed."""
        result = placement_service.optimize_combined([-1.0, 0.0, 1.0], [0.0, -1.0, 1.0])

        assert np.array_equal(result.r, [0.0, 0.0, 0.0])
        assert np.array_equal(result.a, [0.0, 1.0, -1.0])
        assert result.iterations == 1

    @pytest.mark.parametrize("n", range(2, 10))
    def test_always_feasible(self, placement_service: PlacementService, n):
        """Test the three constraints on random susceptibilities."""
        rng = np.random.default_rng(7 * n)
        for _ in range(10):
            result = placement_service.optimize_combined(rng.normal(size=n), rng.normal(size=n))
            assert result.constraint_residuals == (0.0, 0.0, 0.0)

    def test_not_better_than_separate(self, placement_service: PlacementService):
        """Test that the joint objective never beats the unconstrained single-target optima."""
        rng = np.random.default_rng(11)
        rho, alpha = rng.normal(size=8), rng.normal(size=8)

        result = placement_service.optimize_combined(rho, alpha)
        separate = rho @ placement_service.optimize_inertia(rho) + alpha @ placement_service.optimize_damping(alpha)

        assert result.objective_linear >= separate - 1e-12

    @pytest.mark.parametrize("n", range(2, 13))
    def test_iteration_bound(self, placement_service: PlacementService, n):
        """Test that at most ceil(N/2) pairs are removed."""
        rng = np.random.default_rng(31 * n)
        for _ in range(10):
            result = placement_service.optimize_combined(rng.normal(size=n), rng.normal(size=n))
            assert result.iterations <= math.ceil(n / 2)

    def test_optimality_gap_four_buses(self, placement_service: PlacementService):
        """Test the heuristic against enumeration of every feasible (r, a) at N = 4."""
        feasible = [
            (np.array(r), np.array(a))
            for r in itertools.product((-1.0, 0.0, 1.0), repeat=4)
            for a in itertools.product((-1.0, 0.0, 1.0), repeat=4)
            if sum(r) == 0 and sum(a) == 0 and np.dot(r, a) == 0
        ]
        rng = np.random.default_rng(4)
        removals = 0
        for _ in range(50):
            rho, alpha = rng.normal(size=4), rng.normal(size=4)
            result = placement_service.optimize_combined(rho, alpha)
            optimum = min(float(rho @ r + alpha @ a) for r, a in feasible)
            inertia_alone = brute_force_minimum(rho)
            damping_alone = brute_force_minimum(alpha)

            gap = result.objective_linear - optimum
            assert gap >= -1e-12
            assert result.objective_linear <= min(inertia_alone, damping_alone) + 1e-12
            assert gap <= min(abs(inertia_alone), abs(damping_alone)) + 1e-12
            if result.iterations == 0:
                assert gap == pytest.approx(0.0, abs=1e-12)
            removals += result.iterations

        assert removals > 0

    def test_single_bus(self, placement_service: PlacementService):
        """Test that one bus is refused."""
        with pytest.raises(InvalidParameterError, match="at least two buses"):
            placement_service.optimize_combined([1.0], [1.0])


class TestWeightScheme:
    """Test the fault weightings eta_b."""

    def test_uniform(self, placement_service: PlacementService):
        """Test all ones."""
        assert np.array_equal(placement_service.weight_scheme("uniform", [0.1, 0.2, 0.3]), np.ones(3))

    def test_squared(self, placement_service: PlacementService):
        """Test (0.1, 0.2) -> (0.01, 0.04)."""
        assert placement_service.weight_scheme(WeightingKind.SQUARED, [0.1, 0.2]) == pytest.approx([0.01, 0.04])

    def test_threshold(self, placement_service: PlacementService):
        """Test strict comparison against the threshold."""
        eta = placement_service.weight_scheme("threshold", [0.1, 0.2], m_thres=0.15)

        assert np.array_equal(eta, [0.0, 1.0])

    def test_threshold_at_maximum(self, placement_service: PlacementService):
        """Test that m_thres = max(M0) selects nothing."""
        eta = placement_service.weight_scheme("threshold", [0.1, 0.2], m_thres=0.2)

        assert np.array_equal(eta, [0.0, 0.0])

    def test_missing_threshold(self, placement_service: PlacementService):
        """Test that the threshold scheme needs m_thres."""
        with pytest.raises(MissingThresholdError):
            placement_service.weight_scheme("threshold", [0.1, 0.2])

    def test_unknown_kind(self, placement_service: PlacementService):
        """Test that an unknown scheme name is refused."""
        with pytest.raises(ValueError):
            placement_service.weight_scheme("cubic", [0.1])


class TestPlacementForTarget:
    """Test the per-target dispatch."""

    def test_inertia(self, placement_service: PlacementService):
        """Test that the inertia target leaves a at zero."""
        result = placement_service.placement_for_target("inertia", [-2.0, 0.0, 5.0], [1.0, 2.0, 3.0])

        assert np.array_equal(result.r, [1.0, 0.0, -1.0])
        assert np.array_equal(result.a, np.zeros(3))
        assert result.objective_linear == pytest.approx(-7.0)

    def test_damping(self, placement_service: PlacementService):
        """Test that the damping target leaves r at zero."""
        result = placement_service.placement_for_target(
            Algorithm.DAMPING, [1.0, 2.0], [0.5, -0.5], weighting=WeightingKind.SQUARED
        )

        assert np.array_equal(result.a, [-1.0, 1.0])
        assert np.array_equal(result.r, np.zeros(2))
        assert result.weighting == WeightingKind.SQUARED

    def test_combined_carries_weighting(self, placement_service: PlacementService):
        """Test that the combined target keeps the weighting tag."""
        result = placement_service.placement_for_target(
            "combined", [-3.0, -1.0, 1.0, 3.0], [-3.0, 1.0, -1.0, 3.0], weighting=WeightingKind.UNIFORM
        )

        assert result.algorithm == Algorithm.COMBINED
        assert result.weighting == WeightingKind.UNIFORM

    def test_vanishing_inertia_susceptibilities(self, placement_service: PlacementService, caplog):
        """Test the warning when aggregated rho vanishes, as it does under uniform weights."""
        with caplog.at_level(logging.WARNING, logger="gridplace.services.placement"):
            placement_service.placement_for_target("inertia", [1e-17, -1e-17, 0.0], [-0.2, 0.1, 0.1])

        assert "degenerate" in caplog.text

    def test_to_dict(self):
        """Test the JSON layout of a placement."""
        result = PlacementResult(
            r=[1.0, -1.0], a=[0.0, 0.0], objective_linear=-2.0, algorithm=Algorithm.COMBINED, iterations=1
        )

        document = result.to_dict()

        assert document["r"] == [1, -1]
        assert document["a"] == [0, 0]
        assert document["algorithm"] == "combined"
        assert document["weighting"] is None
        assert document["residuals"] == [0.0, 0.0, 0.0]


@pytest.mark.integration
class TestPredictedChange:
    """Test the first-order change of V predicted by each placement."""

    @pytest.mark.parametrize("target", ["inertia", "damping", "combined"])
    def test_not_positive(self, analysis_service: AnalysisService, ring10_grid, target):
        """Test that mu rho_agg . r + g alpha_agg . a <= 0 and matches the reported objective."""
        op = analysis_service.prepare(ring10_grid)

        result, frame = analysis_service.optimize(op, target, weighting="squared", mu=0.1, g=0.1)

        predicted = float(frame["rho_agg"] @ frame["r"] + frame["alpha_agg"] @ frame["a"])
        assert predicted <= 0.0
        assert predicted == pytest.approx(result.objective_linear, rel=1e-12, abs=1e-15)


@pytest.mark.slow
@pytest.mark.oracle
@pytest.mark.integration
class TestDampingPlacementEffect:
    """Test damping placement on the integrated swing equations, gamma = 0.2 and g = 0.1."""

    @pytest.mark.parametrize("kind, n", [("tree", 12), ("star", 9)])
    def test_lowers_vulnerability(
        self, analysis_service: AnalysisService, grid_service: GridService, spectral_service: SpectralService, kind, n
    ):
        """Test that a = +1 sits on the largest slow-mode amplitudes and the oracle V goes down."""
        op = analysis_service.prepare(grid_service.load_grid(GridFactory.synthetic(kind, n)))

        result, _ = analysis_service.optimize(op, "damping", weighting="uniform", g=0.1, gamma=0.2)

        amplitude = spectral_service.slow_mode_amplitude(analysis_service.spectrum(op))
        top = np.argsort(-amplitude, kind="stable")[: n // 2]
        assert set(np.flatnonzero(result.a == 1.0)) == set(top.tolist())

        placement = PlacementDocument(algorithm="damping", r=[0.0] * n, a=result.a.tolist())
        report = analysis_service.report_vulnerability(op, placement, mu=0.1, g=0.1, gamma=0.2)
        assert report.vulnerability_after < report.vulnerability_before
        assert report.reduction_percent > 0.0
