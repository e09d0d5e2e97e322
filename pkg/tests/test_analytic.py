"""
Unit tests for the analytic outage evaluators.
"""

import itertools
import math
import warnings

import numpy as np
import pytest
from scipy.integrate import IntegrationWarning

from faslab.analytic import (
    AsymptoticApproximationWarning,
    SeriesConfig,
    algorithm1_nstar,
    bivariate_cdf_quadrature,
    bivariate_pdf_quadrature,
    diversity_gain,
    effective_ports,
    flop_estimate,
    indicator_tables,
    joint_cdf_series,
    joint_pdf_series,
    mrc_independent_outage,
    outage_eq15,
    outage_high_snr,
    outage_theorem1,
    pair_from_index,
    pair_index,
    reduce_to_nstar,
    series_terms,
    siso_outage,
)
from faslab.correlation import build_correlation, numerical_rank, reference_rank_nprime
from faslab.exceptions import (
    DomainError,
    NearSingularError,
    NumericalError,
    SeriesCapError,
    SeriesConvergenceError,
)
from faslab.interfaces import Method, OutageQuery
from faslab.simulate import Scheme


def brute_force_counts(n_ports, s0):
    """Weighted admissible-v counts by direct enumeration of every (k, v)."""
    pairs = [(m, n) for m in range(n_ports) for n in range(m + 1, n_ports)]
    counts = {}
    for k in itertools.product(range(s0 + 1), repeat=len(pairs)):
        if sum(k) > s0:
            continue
        total = 0
        for v in itertools.product(*(range(kt + 1) for kt in k)):
            phase = [0] * n_ports
            weight = 1
            for (m, n), kt, vt in zip(pairs, k, v):
                gamma = 2 * vt - kt
                phase[m] += gamma
                phase[n] -= gamma
                weight *= math.comb(kt, vt)
            if not any(phase):
                total += weight
        if total:
            counts[k] = total
    return counts


def slope(values, snr_db):
    return float(np.polyfit(np.asarray(snr_db) / 10.0, np.log10(values), 1)[0])


class TestPairIndex:
    """Test cases for the port pair mapping."""

    @pytest.mark.parametrize("n_ports", [2, 3, 4, 7])
    def test_round_trip(self, n_ports):
        """Test every pair maps to a distinct index and back."""
        seen = []
        for m in range(1, n_ports):
            for n in range(m + 1, n_ports + 1):
                t = pair_index(m, n, n_ports)
                assert pair_from_index(t, n_ports) == (m, n)
                seen.append(t)
        assert sorted(seen) == list(range(1, n_ports * (n_ports - 1) // 2 + 1))

    def test_endpoints(self):
        assert pair_index(1, 2, 5) == 1
        assert pair_index(4, 5, 5) == 10

    def test_invalid_pair_raises(self):
        with pytest.raises(DomainError):
            pair_index(2, 2, 3)
        with pytest.raises(DomainError):
            pair_from_index(4, 3)


class TestIndicatorTables:
    """Test cases for the admissible multi-index tables."""

    def test_two_ports_central_binomials(self):
        """Test N = 2 keeps even orders with count C(2j, j)."""
        # Act
        tables = indicator_tables(2, 8)

        # Assert
        assert [row[0] for row in tables.multi_indices] == [0, 2, 4, 6, 8]
        assert tables.counts == (1, 2, 6, 20, 70)

    @pytest.mark.parametrize("n_ports,s0", [(3, 6), (4, 4)])
    def test_matches_brute_force(self, n_ports, s0):
        """Test the pruned enumeration against exhaustive search."""
        # Arrange
        expected = brute_force_counts(n_ports, s0)

        # Act
        found = dict(series_terms(indicator_tables(n_ports, s0)))

        # Assert
        assert found == expected

    def test_zero_index_weight(self):
        """Test g(0) = (2 pi)^N."""
        tables = indicator_tables(3, 4)
        assert tables.weight([0, 0, 0]) == pytest.approx((2 * math.pi) ** 3)

    def test_inadmissible_weight_is_zero(self):
        assert indicator_tables(2, 4).weight([1]) == 0.0

    def test_weight_formula(self):
        """Test g(k) = (2 pi)^N 2^{-|k|} count."""
        assert indicator_tables(2, 4).weight([2]) == pytest.approx((2 * math.pi) ** 2 * 2 / 4)

    def test_terms_ordered_by_total_order(self):
        totals = [sum(k) for k, _ in series_terms(indicator_tables(3, 6))]
        assert totals == sorted(totals)

    def test_cached(self):
        assert indicator_tables(3, 5) is indicator_tables(3, 5)

    def test_incidence(self):
        """Test each pair row marks exactly its two ports."""
        tables = indicator_tables(4, 2)
        assert tables.incidence.shape == (6, 4)
        assert np.all(tables.incidence.sum(axis=1) == 2)


class TestJointSeries:
    """Test cases for the joint PDF and CDF series."""

    def test_single_port_pdf(self):
        """Test the N = 1 density is Rayleigh, 2/e at r = 1."""
        model = build_correlation(1, 0.5)
        assert joint_pdf_series(model, [1.0]).value == pytest.approx(2.0 / math.e, rel=1e-12)

    def test_single_port_cdf(self):
        model = build_correlation(1, 0.5)
        result = joint_cdf_series(model, [0.7])
        assert result.value == pytest.approx(-math.expm1(-0.49), rel=1e-12)

    def test_zero_envelope(self, two_port_model):
        """Test a zero envelope or radius gives zero."""
        assert joint_pdf_series(two_port_model, [0.0, 1.0]).value == 0.0
        assert joint_cdf_series(two_port_model, [0.0, 1.0]).value == 0.0

    def test_two_port_cdf_tends_to_one(self, two_port_model):
        result = joint_cdf_series(two_port_model, [10.0, 10.0])
        assert result.raw_value == pytest.approx(1.0, abs=1e-6)
        assert result.value <= 1.0

    def test_three_port_cdf_tends_to_one(self, three_port_model):
        result = joint_cdf_series(three_port_model, [10.0, 10.0, 10.0])
        assert result.raw_value == pytest.approx(1.0, abs=1e-4)

    def test_zeroth_order_term(self, two_port_model):
        """Test s0 = 0 reduces to the independent-port product."""
        # Arrange
        det = two_port_model.det_j
        radius = 0.8

        # Act
        result = joint_cdf_series(two_port_model, [radius, radius], SeriesConfig(s0=0, escalation=0))

        # Assert
        expected = det * (-math.expm1(-radius ** 2 / det)) ** 2
        assert result.raw_value == pytest.approx(expected, rel=1e-12)
        assert result.terms == 1

    def test_cdf_matches_quadrature_oracle(self, two_port_model):
        """Test the two-port series outage against 2-D quadrature."""
        for omega in np.linspace(0.1, 2.0, 20):
            # Act
            series = joint_cdf_series(two_port_model, [omega, omega]).value
            oracle = bivariate_cdf_quadrature(two_port_model, omega, omega)

            # Assert
            assert abs(series - oracle) <= 1e-3

    def test_pdf_matches_quadrature_oracle(self, two_port_model):
        series = joint_pdf_series(two_port_model, [0.5, 0.5]).value
        oracle = bivariate_pdf_quadrature(two_port_model, 0.5, 0.5)
        assert series == pytest.approx(oracle, abs=1e-8)

    def test_pdf_is_mixed_derivative_of_cdf(self, two_port_model):
        """Test the density against a central difference of the CDF."""
        # Arrange
        r, h = 0.5, 1e-3

        def cdf(a, b):
            return joint_cdf_series(two_port_model, [a, b]).raw_value

        # Act
        difference = (cdf(r + h, r + h) - cdf(r + h, r - h) - cdf(r - h, r + h) + cdf(r - h, r - h)) / (4 * h * h)

        # Assert
        assert difference == pytest.approx(joint_pdf_series(two_port_model, [r, r]).value, abs=1e-4)

    def test_truncation_converged(self, two_port_model):
        """Test raising s0 by five changes the outage by less than 1e-6."""
        low = joint_cdf_series(two_port_model, [1.0, 1.0], SeriesConfig(s0=20, escalation=0)).raw_value
        high = joint_cdf_series(two_port_model, [1.0, 1.0], SeriesConfig(s0=25, escalation=0)).raw_value
        assert abs(high - low) < 1e-6

    def test_wrong_length_raises(self, two_port_model):
        with pytest.raises(DomainError):
            joint_cdf_series(two_port_model, [1.0])

    def test_cap_raises(self):
        """Test more than four ports is refused."""
        model = build_correlation(5, 2.0)
        with pytest.raises(SeriesCapError) as exc_info:
            joint_cdf_series(model, [1.0] * 5)
        assert exc_info.value.n_ports == 5
        assert exc_info.value.max_ports == 4


class TestOutageTheorem1:
    """Test cases for outage_theorem1."""

    def test_estimate_fields(self, two_port_model):
        estimate = outage_theorem1(two_port_model, OutageQuery.from_db(10.0, 30.0))
        assert estimate.method is Method.SERIES
        assert estimate.truncation_order == 20
        assert estimate.uncertainty == 20.0
        assert 0.0 < estimate.probability < 1.0

    def test_monotone_in_omega(self, two_port_model):
        """Test outage falls as SNR rises."""
        values = [
            outage_theorem1(two_port_model, OutageQuery.from_db(10.0, snr)).probability
            for snr in range(0, 41, 5)
        ]
        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_single_port_equals_siso(self):
        model = build_correlation(1, 0.5)
        query = OutageQuery.from_db(10.0, 30.0)
        assert outage_theorem1(model, query).probability == pytest.approx(siso_outage(query.omega), rel=1e-12)

    @pytest.mark.parametrize("n_ports", [1, 2, 3])
    def test_high_snr_slope(self, n_ports):
        """Test the series slope over 40 to 50 dB approaches -N."""
        # Arrange
        model = build_correlation(n_ports, 1.0)
        grid = [40.0, 45.0, 50.0]

        # Act
        values = [outage_theorem1(model, OutageQuery.from_db(10.0, snr)).probability for snr in grid]

        # Assert
        assert slope(values, grid) == pytest.approx(-n_ports, abs=0.3)


class TestSeriesConvergence:
    """Test cases for the truncation-order gate of the series CDF."""

    def setup_method(self):
        """Set up test fixtures."""
        # Strongly coupled triple: three ports over half a wavelength.
        self.model = build_correlation(3, 0.5)

    def test_order_rises_until_settled(self):
        """Test a threshold that needs more than s0 = 20 terms is still evaluated."""
        # Act
        estimate = outage_theorem1(self.model, OutageQuery.from_db(10.0, 27.0))

        # Assert
        assert estimate.truncation_order > 20
        assert estimate.probability == pytest.approx(0.6945, abs=2e-3)
        assert estimate.raw_value == pytest.approx(estimate.probability, abs=1e-6)

    def test_fixed_order_rejects_out_of_range_sum(self):
        """Test a divergent sum at a fixed order raises instead of clamping to 1."""
        with pytest.raises(SeriesConvergenceError) as exc_info:
            outage_theorem1(self.model, OutageQuery.from_db(10.0, 24.0), SeriesConfig(escalation=0))
        assert exc_info.value.s0 == 20
        assert exc_info.value.raw_value > 1.0

    def test_divergent_threshold_raises(self):
        """Test a threshold beyond double-precision reach is refused."""
        # Act
        with pytest.raises(SeriesConvergenceError) as exc_info:
            outage_theorem1(self.model, OutageQuery.from_db(10.0, 20.0))

        # Assert
        assert isinstance(exc_info.value, NumericalError)
        assert exc_info.value.s0 <= SeriesConfig().max_s0
        assert "did not converge" in exc_info.value.message

    def test_term_budget_stops_escalation(self):
        """Test the order is not raised past the multi-index budget."""
        cfg = SeriesConfig(max_terms=math.comb(23, 3))
        with pytest.raises(SeriesConvergenceError) as exc_info:
            outage_theorem1(self.model, OutageQuery.from_db(10.0, 27.0), cfg)
        assert exc_info.value.s0 == 20

    @pytest.mark.parametrize("changes", [{"escalation": -1}, {"step": 0}, {"tol": 0.0}])
    def test_invalid_config_raises(self, changes):
        with pytest.raises(DomainError):
            SeriesConfig(**changes)


class TestSeriesAgainstMonteCarlo:
    """Series outage against simulation over 20 to 40 dB."""

    GRID = [float(snr) for snr in range(20, 41)]

    def _compare(self, simulator, n_ports, width, seed):
        model = build_correlation(n_ports, width)
        simulated = simulator.mc_outage_curve(Scheme.fas(n_ports, width), 10.0, self.GRID, 1_000_000, seed)
        results = {}
        for snr_db, mc in simulated:
            try:
                series = outage_theorem1(model, OutageQuery.from_db(10.0, snr_db)).probability
            except SeriesConvergenceError:
                results[snr_db] = None
                continue
            results[snr_db] = abs(series - mc.probability)
        return results

    @pytest.mark.parametrize("n_ports,width,seed", [(2, 0.5, 21), (2, 1.0, 22), (3, 1.0, 23)])
    def test_moderate_coupling(self, simulator, n_ports, width, seed):
        """Test every grid point converges and lies within 5e-3 of simulation."""
        results = self._compare(simulator, n_ports, width, seed)
        assert all(gap is not None and gap <= 5e-3 for gap in results.values())

    def test_strong_coupling(self, simulator):
        """Test three ports over half a wavelength never return a wrong value."""
        # Act
        results = self._compare(simulator, 3, 0.5, 24)

        # Assert
        assert results[20.0] is None
        assert all(results[snr] is not None for snr in self.GRID if snr >= 27.0)
        assert all(gap <= 5e-3 for gap in results.values() if gap is not None)


class TestOutageHighSnr:
    """Test cases for outage_high_snr."""

    def test_single_port(self):
        model = build_correlation(1, 0.5)
        query = OutageQuery.from_db(10.0, 50.0)
        with pytest.warns(AsymptoticApproximationWarning):
            value = outage_high_snr(model, query)
        assert value == pytest.approx(query.omega ** 2, rel=1e-12)

    def test_two_ports(self, two_port_model):
        """Test Omega^4 / det J at N = 2, W = 0.5."""
        query = OutageQuery.from_db(10.0, 50.0)
        with pytest.warns(AsymptoticApproximationWarning):
            value = outage_high_snr(two_port_model, query)
        assert value == pytest.approx(query.omega ** 4 / 0.907437, rel=1e-6)

    @pytest.mark.parametrize("n_ports", [1, 2, 3])
    def test_exact_slope(self, n_ports):
        model = build_correlation(n_ports, 1.0)
        grid = [20.0, 30.0, 40.0]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AsymptoticApproximationWarning)
            values = [outage_high_snr(model, OutageQuery.from_db(10.0, snr)) for snr in grid]
        assert slope(values, grid) == pytest.approx(-n_ports, abs=1e-9)

    def test_near_singular_suggests_nstar(self, dense_model):
        """Test a dense aperture is refused with a reduced port count."""
        with pytest.raises(NearSingularError) as exc_info:
            outage_high_snr(dense_model, OutageQuery.from_db(10.0, 30.0))
        assert exc_info.value.suggested_ports == 3


    def test_ratio_to_simulation_near_one_in_a_thousand(self, simulator, two_port_model):
        """Test the asymptote is within 15% of simulation where outage is about 1e-3."""
        # Arrange
        query = OutageQuery.from_db(10.0, 46.0)

        # Act
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AsymptoticApproximationWarning)
            asymptote = outage_high_snr(two_port_model, query)
        simulated = simulator.mc_outage(Scheme.fas(2, 0.5), query, 10_000_000, 31)

        # Assert
        assert 5e-4 < simulated.probability < 2e-3
        assert 0.85 <= asymptote / simulated.probability <= 1.15


class TestOutageEq15:
    """Test cases for the single-integral approximation."""

    def test_effective_ports(self, three_port_model, dense_model):
        assert effective_ports(build_correlation(1, 0.5)) == 1.0
        assert effective_ports(three_port_model) == pytest.approx(1.52 * 2 / (2 * math.pi))
        assert effective_ports(dense_model) == pytest.approx(1.52 * 49 / math.pi)
        assert effective_ports(build_correlation(3, 10.0)) <= 3.0

    def test_single_port_equals_siso(self):
        model = build_correlation(1, 0.5)
        query = OutageQuery.from_db(10.0, 30.0)
        estimate = outage_eq15(model, query, 1)
        assert estimate.probability == pytest.approx(siso_outage(query.omega), rel=1e-12)
        assert estimate.method is Method.EQ15

    def test_full_rank_closed_form(self, three_port_model):
        """Test eps_rank = N leaves no residual and gives a closed form."""
        # Arrange
        query = OutageQuery.from_db(10.0, 30.0)
        exponent = 3 / effective_ports(three_port_model)

        # Act
        estimate = outage_eq15(three_port_model, query, 3)

        # Assert
        expected = min(1.0, siso_outage(query.omega) ** exponent)
        assert estimate.probability == pytest.approx(expected, rel=1e-9)

    def test_partial_rank_is_probability(self, three_port_model):
        estimate = outage_eq15(three_port_model, OutageQuery.from_db(10.0, 30.0), 1)
        assert 0.0 < estimate.probability < 1.0

    @pytest.mark.parametrize("eps_rank", [0, 4])
    def test_invalid_eps_rank_raises(self, three_port_model, eps_rank):
        with pytest.raises(DomainError):
            outage_eq15(three_port_model, OutageQuery.from_db(10.0, 30.0), eps_rank)


    def test_dense_aperture_against_simulation(self, simulator, dense_model):
        """Test the N* eps-rank approximation at N = 50, W = 0.5 overshoots simulation."""
        # Arrange
        query = OutageQuery.from_db(10.0, 30.0)

        # Act
        with warnings.catch_warnings():
            warnings.simplefilter("error", IntegrationWarning)
            estimate = outage_eq15(dense_model, query, 3)
        simulated = simulator.mc_outage(Scheme.fas(50, 0.5), query, 1_000_000, 32)

        # Assert
        assert estimate.probability == pytest.approx(0.370, abs=2e-3)
        assert simulated.probability == pytest.approx(0.295, abs=5e-3)
        assert estimate.probability - simulated.probability > 0.05


class TestClosedForms:
    """Test cases for the SISO and independent MRC oracles."""

    def test_siso(self):
        assert siso_outage(1.0, 2.0) == pytest.approx(1.0 - math.exp(-0.5))

    def test_mrc_two_branches(self):
        """Test P(2, x) = 1 - (1 + x) e^{-x}."""
        x = 1.023
        assert mrc_independent_outage(2, math.sqrt(x)) == pytest.approx(1.0 - (1.0 + x) * math.exp(-x), rel=1e-12)


class TestDiversityAndNStar:
    """Test cases for diversity_gain, algorithm1_nstar and friends."""

    def test_diversity_single_port(self):
        assert diversity_gain(build_correlation(1, 0.5)) == 1

    def test_diversity_wide_aperture(self):
        assert diversity_gain(build_correlation(3, 10.0)) == 3

    def test_diversity_dense_aperture(self, dense_model):
        """Test a dense array is limited to N' rather than N."""
        assert diversity_gain(dense_model) == reference_rank_nprime(0.5)
        assert diversity_gain(dense_model) < 50

    def test_nstar_golden_values(self):
        """Test N* for fifty ports at eps_tol = 0.01."""
        # Act
        values = [
            algorithm1_nstar(build_correlation(50, width), 0.01)
            for width in (0.5, 1.0, 2.0, 3.0, 4.0)
        ]

        # Assert
        assert values == [3, 4, 6, 8, 10]

    def test_loose_tolerance(self, dense_model):
        assert algorithm1_nstar(dense_model, 1.0) == 1

    def test_tighter_tolerance_never_decreases(self, dense_model):
        loose = algorithm1_nstar(dense_model, 0.01)
        tight = algorithm1_nstar(dense_model, 0.001)
        assert tight >= loose

    def test_bounded_by_numerical_rank(self, dense_model):
        n_star = algorithm1_nstar(dense_model, 1e-300)
        assert 1 <= n_star <= numerical_rank(dense_model).numerical_rank

    def test_invalid_tolerance_raises(self, dense_model):
        with pytest.raises(DomainError):
            algorithm1_nstar(dense_model, 0.0)

    def test_flop_estimate(self):
        assert flop_estimate(50, 3) == 2_640_009
        assert flop_estimate(1, 1) == 29

    def test_flop_estimate_rejects_large_nstar(self):
        with pytest.raises(DomainError):
            flop_estimate(3, 4)

    def test_reduce_to_nstar(self, dense_model):
        """Test the reduced model keeps the aperture and is invertible."""
        reduced = reduce_to_nstar(dense_model, 0.01)
        assert reduced.n_ports == 3
        assert reduced.width == 0.5
        assert not reduced.near_singular
