import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
import mpmath

from qfock.checks import convergence_order
from qfock.mellin import (
    GeoStepFunction, check_transform_identities, dilate, log_grid, mellin_exact, mellin_numeric,
    mellin_weighted, power_substitute, random_step_function, sample_piece,
)


def quad_mellin(f: GeoStepFunction, s: complex) -> complex:
    """Tanh-sinh quadrature of int x^{s-1} f(x) dx piece by piece at 30 digits."""
    with mpmath.workdps(30):
        ms = mpmath.mpc(s)
        total = sum(mpmath.mpc(c) * mpmath.quad(lambda x: x ** (ms - 1), [a, b]) for a, b, c in f.pieces)
        return complex(total)


seeds = st.integers(0, 2 ** 32 - 1)
svals = st.builds(complex, st.floats(-1.5, 2.5), st.floats(-4, 4))


class TestStepFunction:
    def test_rejects_bad_pieces(self):
        with pytest.raises(ValueError):
            GeoStepFunction(((0.0, 1.0, 1),))
        with pytest.raises(ValueError):
            GeoStepFunction(((1.0, 0.5, 1),))
        with pytest.raises(ValueError):
            GeoStepFunction(((1, 3, 1), (2, 4, 1)))

    def test_norm(self):
        f = GeoStepFunction(((0.5, 1, 2), (2, 3, 1j)))
        assert f.norm_sq() == pytest.approx(4 * 0.5 + 1)

    def test_addition_merges_breakpoints(self):
        f = GeoStepFunction.indicator(1, 3) + GeoStepFunction.indicator(2, 4, 2.0)
        assert [p[:2] for p in f.pieces] == [(1, 2), (2, 3), (3, 4)]
        assert [p[2] for p in f.pieces] == [1, 3, 2]

    def test_rows_round_trip(self):
        f = GeoStepFunction(((0.5, 1, 2 - 1j), (2, 3, 1j)))
        assert GeoStepFunction.from_rows(f.to_rows()).pieces == f.pieces


class TestExact:
    def test_half_interval_at_two(self):
        assert mellin_exact(GeoStepFunction.indicator(0.5, 1), 2) == pytest.approx(3 / 8, abs=1e-16)

    @pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
    def test_haar_closed_form_and_limit(self, q):
        f = GeoStepFunction.indicator(q, 1)
        s = 0.7 + 0.2j
        assert mellin_exact(f, s) == pytest.approx((1 - q ** s) / s, rel=1e-14)
        assert mellin_exact(f, 0) == pytest.approx(np.log(1 / q), rel=1e-15)

    def test_zero_function(self):
        assert mellin_exact(GeoStepFunction(), 1.3 + 2j) == 0

    @pytest.mark.parametrize("s", [1e-16, 1e-12, 3e-9 + 1e-9j, 5e-7, 2e-6])
    def test_continuous_through_origin(self, s):
        f = GeoStepFunction(((0.1, 0.7, 1), (1.3, 9.0, -2j)))
        # Taylor expansion in s of sum c (b^s - a^s)/s to second order, independent of the series branch
        def term(a, b):
            La, Lb = np.log(a), np.log(b)
            return (Lb - La) + s * (Lb ** 2 - La ** 2) / 2 + s ** 2 * (Lb ** 3 - La ** 3) / 6
        want = sum(c * term(a, b) for a, b, c in f.pieces)
        assert abs(mellin_exact(f, s) - want) < 1e-13

    @settings(max_examples=40)
    @given(seeds, svals)
    def test_matches_adaptive_quadrature(self, seed, s):
        f = random_step_function(np.random.default_rng(seed))
        want = quad_mellin(f, s)
        assert abs(mellin_exact(f, s) - want) <= 1e-13 * max(1, abs(want))

    @given(seeds, seeds, svals, st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
    def test_linear(self, s1, s2, s, alpha, beta):
        f = random_step_function(np.random.default_rng(s1))
        g = random_step_function(np.random.default_rng(s2))
        lhs = mellin_exact(f * alpha + g * beta, s)
        rhs = alpha * mellin_exact(f, s) + beta * mellin_exact(g, s)
        scale = 1 + abs(alpha) * sum(abs(mellin_exact(GeoStepFunction.indicator(a, b), s)) for a, b, _ in f.pieces) \
            + abs(beta) * sum(abs(mellin_exact(GeoStepFunction.indicator(a, b), s)) for a, b, _ in g.pieces)
        assert abs(lhs - rhs) <= 1e-14 * scale * 10


class TestNumeric:
    def test_half_interval(self):
        xs, fs = sample_piece(GeoStepFunction.indicator(0.5, 1), 10_000)
        assert abs(mellin_numeric(xs, fs, 2) - 3 / 8) < 1e-6

    def test_zero_samples(self):
        assert mellin_numeric(log_grid(1, 2, 10), np.zeros(10), 1.5) == 0

    def test_linear_function(self):
        xs = log_grid(1, 2, 10_000)
        assert abs(mellin_numeric(xs, xs, 1) - 1.5) < 1e-6

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            mellin_numeric([1.0], [1.0], 1)

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            mellin_numeric([1.0, 0.5], [1.0, 1.0], 1)

    def test_second_order_convergence(self):
        order, errs = convergence_order(GeoStepFunction.indicator(0.2, 5.0), 0.7 + 2j)
        assert order >= 1.8
        assert errs[0] > errs[1] > errs[2]


class TestCoordinateChanges:
    def test_dilate_example(self):
        f = dilate(GeoStepFunction.indicator(1, 2), 3)
        assert f.pieces[0][:2] == pytest.approx((1 / 3, 2 / 3))

    def test_dilate_by_one(self):
        f = GeoStepFunction(((0.2, 0.4, 1), (1, 2, 3)))
        assert dilate(f, 1).pieces == f.pieces

    @pytest.mark.parametrize("k", [-2, 1, 3])
    def test_dilate_geometric_shift(self, k):
        q = 0.5
        f = dilate(GeoStepFunction.indicator(q, 1), q ** (-k))
        assert f.pieces[0][:2] == pytest.approx((q ** (k + 1), q ** k), rel=1e-15)

    def test_power_examples(self):
        assert power_substitute(GeoStepFunction.indicator(0.25, 1), 2).pieces[0][:2] == pytest.approx((0.5, 1))
        f = GeoStepFunction(((0.2, 0.4, 1),))
        assert power_substitute(f, 1).pieces == f.pieces
        q, N = 0.3, 3
        assert power_substitute(GeoStepFunction.indicator(q, 1), N).pieces[0][:2] == pytest.approx((q ** (1 / N), 1))

    def test_rejects_nonpositive_parameter(self):
        f = GeoStepFunction.indicator(1, 2)
        for fn in (dilate, power_substitute):
            with pytest.raises(ValueError):
                fn(f, 0)

    @given(seeds, st.floats(0.1, 10))
    def test_preserve_piece_count(self, seed, a):
        f = random_step_function(np.random.default_rng(seed))
        assert len(dilate(f, a).pieces) == len(f.pieces) == len(power_substitute(f, a).pieces)

    def test_identities_example(self):
        rep = check_transform_identities(GeoStepFunction.indicator(0.5, 1), 3, 2)
        assert rep.passed and rep.max_residual < 1e-12

    def test_identities_zero(self):
        rep = check_transform_identities(GeoStepFunction(), 2, 1 + 1j)
        assert rep.residuals == {"dilation": 0, "power": 0, "weight": 0}

    @pytest.mark.parametrize("k", [-2, 0, 3])
    def test_wave_coefficient_form(self, k):
        q, s = 0.5, 1.3
        f = GeoStepFunction.indicator(q, 1)
        assert mellin_exact(dilate(f, q ** k), s) == pytest.approx(q ** (-k * s) * (1 - q ** s) / s, rel=1e-13)

    def test_weight_rule_oracle(self):
        f = GeoStepFunction(((0.3, 0.8, 1 + 1j), (1.5, 4, -2)))
        a, s = 0.5, 1.1 - 0.4j
        assert abs(mellin_weighted(f, a, s) - quad_mellin(f, s + a)) < 1e-12

    @settings(max_examples=60)
    @given(seeds, st.sampled_from([1 / 3, 0.5, 2.0, 3.0]), st.sampled_from([-1.0, 0.5, 2.0]),
           st.floats(-4, 4))
    def test_identities_hold(self, seed, a, re, im):
        f = random_step_function(np.random.default_rng(seed))
        assert check_transform_identities(f, a, complex(re, im)).max_residual < 1e-12
