import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smallball.kernels import (
    ProcessKind,
    ProcessSpec,
    covariance,
    covariance_matrix,
    default_xi_law,
    fou_variance,
    sawtooth_profile,
    variogram,
)
from smallball.quadrature import gamma_function


class TestSpecValidation:
    def test_constructors_round_trip(self):
        assert ProcessSpec.fbm(0.7).hurst == 0.7
        assert ProcessSpec.stationary_ou(2.0).theta == 2.0
        assert ProcessSpec.tempered(1.0, 0.5).alpha == 0.5
        assert ProcessSpec.periodic_bridge().kind is ProcessKind.PERIODIC_BRIDGE
        assert ProcessSpec.random_sawtooth().xi_law is default_xi_law()

    @pytest.mark.parametrize(
        "bad",
        [
            lambda: ProcessSpec.fbm(0.0),
            lambda: ProcessSpec.fbm(1.0),
            lambda: ProcessSpec.stationary_ou(0.0),
            lambda: ProcessSpec.stationary_ou(-1.0),
            lambda: ProcessSpec.fractional_ou(0.5),
            lambda: ProcessSpec.fractional_ou(0.7, theta=0.0),
            lambda: ProcessSpec.tempered(1.0, 0.0),
            lambda: ProcessSpec(ProcessKind.FRACTIONAL_OU, hurst=0.4, theta=1.0),
        ],
    )
    def test_rejects_bad_parameters(self, bad):
        with pytest.raises(ValueError):
            bad()

    def test_labels_are_parseable_words(self):
        assert ProcessSpec.fbm(0.7).label() == "fbm(hurst=0.7)"
        assert ProcessSpec.periodic_bridge().label() == "bridge"


class TestFrozenCovarianceValues:
    def test_fbm_half_is_brownian(self):
        # min(1, 2) = 1
        assert covariance(ProcessSpec.fbm(0.5), 1.0, 2.0).value == pytest.approx(1.0)

    def test_ou_variance(self):
        assert covariance(ProcessSpec.stationary_ou(1.0), 3.0, 3.0).value == (
            pytest.approx(0.5)
        )

    def test_fbm_three_quarters(self):
        got = covariance(ProcessSpec.fbm(0.75), 1.0, 2.0).value
        assert got == pytest.approx(math.sqrt(2.0), abs=5e-7)
        assert got == pytest.approx(1.414214, abs=5e-7)

    def test_ou_variogram_at_log_two(self):
        spec = ProcessSpec.stationary_ou(1.0)
        assert variogram(spec, 0.0, math.log(2.0)) == pytest.approx(0.5)

    def test_bridge_same_interval_lag_half(self):
        spec = ProcessSpec.periodic_bridge()
        assert variogram(spec, 0.25, 0.75) == pytest.approx(0.25)
        # anchored at an integer the value itself vanishes
        assert covariance(spec, 3.0, 3.4).value == 0.0

    def test_variogram_vanishes_on_diagonal(self):
        for spec in (
            ProcessSpec.fbm(0.6),
            ProcessSpec.periodic_bridge(),
            ProcessSpec.stationary_ou(0.7),
            ProcessSpec.tempered(1.0, 0.5),
        ):
            assert variogram(spec, 1.3, 1.3) == 0.0


class TestFouVariance:
    def test_against_closed_form(self):
        # hurst * Gamma(2 * hurst)
        assert fou_variance(0.75) == pytest.approx(0.664670, abs=1e-5)
        assert fou_variance(0.6) == pytest.approx(0.6 * gamma_function(1.2), abs=1e-7)
        assert fou_variance(0.6) == pytest.approx(0.5509012454, abs=1e-7)

    def test_brownian_limit(self):
        # as hurst -> 1/2 the variance approaches the OU value 1/2
        assert fou_variance(0.5001) == pytest.approx(0.5, abs=2e-3)

    @pytest.mark.parametrize("hurst", [0.6, 0.75])
    def test_identity_within_tolerance(self, hurst):
        assert abs(fou_variance(hurst) - hurst * gamma_function(2 * hurst)) < 1e-4

    def test_covariance_diagonal_matches(self):
        spec = ProcessSpec.fractional_ou(0.7, theta=1.0)
        assert covariance(spec, 2.0, 2.0).value == pytest.approx(
            fou_variance(0.7), abs=1e-9
        )

    def test_theta_scaling(self):
        # var_theta = theta**(-2H) var_1
        h = 0.7
        v1 = covariance(ProcessSpec.fractional_ou(h, 1.0), 0.0, 0.0).value
        v2 = covariance(ProcessSpec.fractional_ou(h, 2.0), 0.0, 0.0).value
        assert v2 == pytest.approx(2.0 ** (-2 * h) * v1, rel=1e-10)


class TestKernelInequalities:
    def test_ou_variogram_two_sided_bound(self):
        # exp(-1) * tau <= V(tau) <= tau on (0, 1)
        spec = ProcessSpec.stationary_ou(1.0)
        for tau in np.linspace(1e-4, 0.999, 50):
            v = variogram(spec, 0.0, float(tau))
            assert math.exp(-1.0) * tau <= v <= tau

    @pytest.mark.parametrize("hurst", [0.6, 0.75])
    def test_fou_variogram_short_lag_ratio(self, hurst):
        spec = ProcessSpec.fractional_ou(hurst, 1.0)
        tau = 1e-3
        ratio = variogram(spec, 0.0, tau) / tau ** (2 * hurst)
        assert 0.9 <= ratio <= 1.1

    def test_fbm_positive_increment_correlation(self):
        # hurst > 1/2: disjoint increments correlate positively
        spec = ProcessSpec.fbm(0.7)
        for (u, v, s, t) in [(0, 1, 2, 3), (0.5, 1.0, 1.5, 2.5), (1, 4, 6, 7)]:
            c = (
                covariance(spec, v, t).value
                - covariance(spec, v, s).value
                - covariance(spec, u, t).value
                + covariance(spec, u, s).value
            )
            assert c >= 0.0

    def test_bridge_negative_increment_correlation(self):
        # within one interval, disjoint increments: exactly -(v - u)(t - s)
        spec = ProcessSpec.periodic_bridge()
        u, v, s, t = 0.1, 0.3, 0.6, 0.9
        c = (
            covariance(spec, v, t).value
            - covariance(spec, v, s).value
            - covariance(spec, u, t).value
            + covariance(spec, u, s).value
        )
        assert c == pytest.approx(-(v - u) * (t - s))
        assert c < 0.0

    def test_tempered_correlation_decays(self):
        spec = ProcessSpec.tempered(1.0, 0.5)
        assert abs(covariance(spec, 0.0, 20.0).value) < 1e-3

    def test_tempered_variance_closed_form(self):
        # Gamma(2 alpha + 1) / (2 theta)**(2 alpha + 1)
        for theta, alpha in [(1.0, 0.5), (2.0, 0.5), (1.0, 1.0)]:
            spec = ProcessSpec.tempered(theta, alpha)
            expected = gamma_function(2 * alpha + 1) / (2 * theta) ** (2 * alpha + 1)
            assert covariance(spec, 0.0, 0.0).value == pytest.approx(expected, rel=1e-9)


def _min_eig(spec, times):
    m = covariance_matrix(spec, times)
    return float(np.linalg.eigvalsh(m).min()), float(np.trace(m))


class TestPositiveSemidefinite:
    @given(
        st.lists(
            st.floats(min_value=0.0, max_value=10.0),
            min_size=2,
            max_size=64,
            unique=True,
        )
    )
    @settings(max_examples=40, deadline=None)
    def test_closed_form_kinds_random_grids(self, times):
        times = sorted(times)
        for spec in (
            ProcessSpec.fbm(0.3),
            ProcessSpec.fbm(0.7),
            ProcessSpec.periodic_bridge(),
            ProcessSpec.stationary_ou(1.3),
            ProcessSpec.random_sawtooth(),
        ):
            lo, tr = _min_eig(spec, times)
            assert lo >= -1e-10 * max(tr, 1.0)

    @pytest.mark.parametrize(
        "spec",
        [
            ProcessSpec.fractional_ou(0.7, 1.0),
            ProcessSpec.fractional_ou(0.9, 2.0),
            ProcessSpec.tempered(1.0, 0.5),
        ],
    )
    def test_quadrature_kinds_uniform_grids(self, spec):
        times = np.linspace(0.0, 8.0, 33)
        lo, tr = _min_eig(spec, times)
        assert lo >= -1e-10 * max(tr, 1.0)

    def test_matrix_matches_pointwise(self):
        times = np.linspace(0.0, 3.0, 9)
        for spec in (
            ProcessSpec.fbm(0.65),
            ProcessSpec.periodic_bridge(),
            ProcessSpec.fractional_ou(0.7, 1.0),
        ):
            m = covariance_matrix(spec, times)
            for i in (0, 3, 8):
                for j in (1, 5):
                    assert m[i, j] == pytest.approx(
                        covariance(spec, float(times[i]), float(times[j])).value,
                        abs=1e-10,
                    )


class TestXiLaw:
    def test_frozen_constants(self):
        law = default_xi_law()
        assert law.tail_front == pytest.approx(11.2266387, rel=1e-6)
        assert law.second_moment == pytest.approx(0.7100165268, rel=1e-8)
        assert law.fourth_moment == pytest.approx(0.5420033054, rel=1e-8)

    def test_tail_bound_dominates_cdf(self):
        law = default_xi_law()
        for x in np.linspace(0.05, 1.0, 30):
            assert law.abs_cdf(float(x)) <= law.tail_front * math.exp(
                -1.0 / x**2
            ) * (1 + 1e-12)

    def test_sampler_moments(self):
        rng = np.random.default_rng(7)
        xs = default_xi_law().sample(rng, 40000)
        assert np.all(np.abs(xs) <= 1.0)
        assert np.all(np.abs(xs) > 0.0)
        se2 = np.std(xs**2) / math.sqrt(xs.size)
        assert np.mean(xs**2) == pytest.approx(0.7100165, abs=4 * se2)
        assert abs(np.mean(np.sign(xs))) < 4.0 / math.sqrt(xs.size) + 0.02

    def test_profile_shape(self):
        assert sawtooth_profile(0.0) == 0.0
        assert sawtooth_profile(0.5) == 0.5
        assert sawtooth_profile(1.0) == 1.0
        assert sawtooth_profile(2.0) == 0.0
        assert sawtooth_profile(3.0) == 1.0
        assert sawtooth_profile(2.25) == 0.25
        assert sawtooth_profile(-0.25) == 0.25
        # unit slope everywhere, so increments never exceed the gap
        ts = np.linspace(0.0, 4.0, 101)
        assert np.all(np.abs(np.diff(sawtooth_profile(ts))) <= np.diff(ts) + 1e-12)
