import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from smsd.analysis import (
    BoundSpec,
    DomainError,
    pairwise_error_probability,
    pr_outside_sphere,
    regularized_lower_gamma,
    regularized_upper_gamma,
    sm_pair_table,
    solve_alpha,
    union_bound_ber,
    zeta,
)
from smsd.channel import make_stream
from smsd.modem import build_constellation


class TestIncompleteGamma:
    @settings(max_examples=200)
    @given(st.floats(0.1, 40), st.floats(0, 120))
    def test_against_scipy(self, a, x):
        assert regularized_lower_gamma(a, x) == pytest.approx(special.gammainc(a, x), abs=1e-12)
        q = special.gammaincc(a, x)
        assert regularized_upper_gamma(a, x) == pytest.approx(q, rel=1e-9, abs=1e-300)

    @pytest.mark.parametrize("a, x", [(1, 30.0), (2, 40.0), (4, 60.0)])
    def test_deep_tail_relative_accuracy(self, a, x):
        assert regularized_upper_gamma(a, x) == pytest.approx(special.gammaincc(a, x), rel=1e-10)

    def test_exponential_case(self):
        # a = 1: P(1, x) = 1 - exp(-x)
        for x in (0.1, 1.0, 5.0):
            assert regularized_lower_gamma(1, x) == pytest.approx(1 - math.exp(-x), rel=1e-14)

    def test_limits(self):
        assert regularized_lower_gamma(3, 0) == 0.0
        assert regularized_upper_gamma(3, 0) == 1.0
        assert regularized_lower_gamma(3, math.inf) == 1.0

    @pytest.mark.parametrize("a, x", [(0, 1), (-1, 1), (1, -1), (1, math.nan)])
    def test_domain(self, a, x):
        with pytest.raises(DomainError):
            regularized_lower_gamma(a, x)

    @given(st.floats(0.5, 10), st.floats(0, 20), st.floats(0, 20))
    def test_monotone(self, a, x1, x2):
        lo, hi = sorted((x1, x2))
        assert regularized_lower_gamma(a, lo) <= regularized_lower_gamma(a, hi) + 1e-15


class TestSphereMiss:
    @pytest.mark.parametrize("nr, alpha", [(1, 13.8), (2, 8.3), (4, 5.3)])
    def test_listed_alphas(self, nr, alpha):
        assert solve_alpha(nr) == pytest.approx(alpha, abs=0.1)

    @pytest.mark.parametrize("nr", [1, 2, 3, 4, 8])
    def test_solution_hits_target(self, nr):
        a = solve_alpha(nr, 1e-4)
        assert pr_outside_sphere(a * nr, 1.0, nr) == pytest.approx(1e-4, rel=1e-8)

    def test_chi_square_oracle(self):
        # ||n||^2 / (s2 / 2) is chi-square with 2 nr degrees of freedom
        nr, s2, r2 = 3, 0.7, 4.0
        assert pr_outside_sphere(r2, s2, nr) == pytest.approx(stats.chi2.sf(2 * r2 / s2, 2 * nr))

    def test_monte_carlo(self):
        rng = make_stream(21)
        nr, s2 = 2, 0.5
        n = (rng.standard_normal((200_000, nr)) + 1j * rng.standard_normal((200_000, nr)))
        n *= math.sqrt(s2 / 2)
        r2 = 2.0
        emp = np.mean(np.sum(np.abs(n) ** 2, axis=1) > r2)
        p = pr_outside_sphere(r2, s2, nr)
        assert abs(emp - p) < 4 * math.sqrt(p * (1 - p) / 200_000)

    def test_alpha_decreases_with_nr(self):
        vals = [solve_alpha(n) for n in (1, 2, 4, 8)]
        assert vals == sorted(vals, reverse=True)

    @pytest.mark.parametrize("nr, target", [(0, 1e-6), (2, 0.0), (2, 1.0)])
    def test_domain(self, nr, target):
        with pytest.raises(DomainError):
            solve_alpha(nr, target)


class TestPairwise:
    def test_zeta_values(self):
        assert zeta(0.0) == 0.5
        assert zeta(math.inf) == 0.0
        assert zeta(1.0) == pytest.approx(0.5 * (1 - math.sqrt(0.5)))

    def test_zeta_domain(self):
        with pytest.raises(DomainError):
            zeta(-1.0)

    @pytest.mark.parametrize("nr", [1, 2, 4])
    @pytest.mark.parametrize("sigma_s2, sigma_n2", [(2.0, 0.1), (0.4, 0.5), (1.0, 0.01)])
    def test_rayleigh_average_by_quadrature(self, nr, sigma_s2, sigma_n2):
        # E_g[Q(sqrt(sigma_s2 g / (2 sigma_n2)))], g ~ Gamma(nr, 1)
        def f(g):
            return stats.norm.sf(math.sqrt(sigma_s2 * g / (2 * sigma_n2))) * stats.gamma.pdf(g, nr)

        ref, _ = integrate.quad(f, 0, np.inf, epsabs=1e-14)
        assert pairwise_error_probability(sigma_s2, sigma_n2, nr) == pytest.approx(ref, rel=1e-6)

    def test_monte_carlo_pairwise(self):
        rng = make_stream(22)
        nr, s2, n = 2, 0.5, 200_000
        dx = 1.0 + 0.5j
        h = (rng.standard_normal((n, nr)) + 1j * rng.standard_normal((n, nr))) / math.sqrt(2)
        w = (rng.standard_normal((n, nr)) + 1j * rng.standard_normal((n, nr))) * math.sqrt(s2 / 2)
        # the transmitted point loses when the wrong one is closer
        wrong = np.sum(np.abs(h * dx + w) ** 2, axis=1) < np.sum(np.abs(w) ** 2, axis=1)
        p = pairwise_error_probability(abs(dx) ** 2, s2, nr)
        assert abs(wrong.mean() - p) < 4 * math.sqrt(p / n)

    def test_zero_distance(self):
        assert pairwise_error_probability(0.0, 1.0, 2) == pytest.approx(0.5)


class TestUnionBound:
    def test_pair_table(self):
        c = build_constellation(4)
        s2, nb = sm_pair_table(2, c)
        assert s2.shape == (8, 8)
        assert np.all(np.diag(s2) == 0) and np.all(s2[~np.eye(8, dtype=bool)] > 0)
        assert s2[0, 5] == pytest.approx(abs(c.points[0]) ** 2 + abs(c.points[1]) ** 2)
        assert s2[1, 2] == pytest.approx(abs(c.points[1] - c.points[2]) ** 2)
        assert nb[0, 7] == 3

    def test_direct_double_sum(self):
        spec = BoundSpec(2, 2, 4, (10.0,))
        c = build_constellation(4)
        pts = [(l, s) for l in range(2) for s in range(4)]
        total = 0.0
        for lt, st_ in pts:
            for l, s in pts:
                if (lt, st_) == (l, s):
                    continue
                x1, x2 = np.zeros(2, complex), np.zeros(2, complex)
                x1[lt], x2[l] = c.points[st_], c.points[s]
                nb = bin((lt * 4 + st_) ^ (l * 4 + s)).count("1")
                total += nb * pairwise_error_probability(np.sum(np.abs(x1 - x2) ** 2), 0.1, 2)
        assert union_bound_ber(spec)[0] == pytest.approx(total / (3 * 8), rel=1e-12)

    def test_decreasing(self):
        ber = union_bound_ber(BoundSpec(4, 4, 16, tuple(range(0, 31, 5))))
        assert np.all(np.diff(ber) < 0)

    def test_diversity_slope(self):
        # high-SNR slope equals the number of receive antennas
        ber = union_bound_ber(BoundSpec(4, 2, 4, (40.0, 50.0)))
        assert math.log10(ber[0] / ber[1]) == pytest.approx(2.0, abs=0.05)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            BoundSpec(3, 2, 4, (10.0,))
        with pytest.raises(ValueError):
            BoundSpec(2, 0, 4, (10.0,))
        with pytest.raises(ValueError):
            BoundSpec(2, 2, 4, ())
