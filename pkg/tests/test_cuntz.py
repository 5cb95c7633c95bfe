import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfock.cuntz import (
    FourierTruncation, TruncatedOperator, adjoint, build_subband_operator, compare_with_polyphase, compose,
    cuntz_completeness_residual, cuntz_isometry_residual, multiplication_operator, polyphase_symbol,
    subband_family,
)
from qfock.filterbank import (
    FilterBank, LaurentPolynomial, haar_bank, polyphase_matrix, random_paraunitary_bank,
)

R2 = 1 / np.sqrt(2)


def column(op, n):
    tr = op.domain
    return {m: op.matrix[tr.pos(m), tr.pos(n)] for m in tr.indices if op.matrix[tr.pos(m), tr.pos(n)] != 0}


def brute_force(m: LaurentPolynomial, N: int, M: int) -> np.ndarray:
    """Apply (S f)(z) = m(z) f(z^N) to each basis function sampled on a fine grid and read off
    Fourier coefficients with the FFT."""
    L = 8 * N * M + 64
    z = np.exp(2j * np.pi * np.arange(L) / L)
    out = np.zeros((2 * M + 1, 2 * M + 1), dtype=complex)
    for j, n in enumerate(range(-M, M + 1)):
        vals = m.evaluate(z) * z ** (N * n)
        c = np.fft.fft(vals) / L
        for i, r in enumerate(range(-M, M + 1)):
            out[i, j] = c[r % L]
    return out


class TestBuild:
    def test_haar_low_pass_column(self):
        S = build_subband_operator(haar_bank().filters[0], 2, 4)
        col = column(S, 1)
        assert set(col) == {2, 3}
        assert col[2] == pytest.approx(R2) and col[3] == pytest.approx(R2)

    def test_unit_filter_doubles_index(self):
        S = build_subband_operator(LaurentPolynomial({0: 1}), 2, 6)
        for n in range(-3, 4):
            assert column(S, n) == {2 * n: 1}

    def test_haar_high_pass_column(self):
        S = build_subband_operator(haar_bank().filters[1], 2, 4)
        col = column(S, 0)
        assert col[0] == pytest.approx(R2) and col[1] == pytest.approx(-R2)

    def test_rejects_small_truncation(self):
        with pytest.raises(ValueError):
            build_subband_operator(LaurentPolynomial({5: 1}), 2, 3)

    @settings(max_examples=20, deadline=None)
    @given(st.dictionaries(st.integers(-3, 3), st.floats(-2, 2).filter(lambda x: x != 0), min_size=1,
                           max_size=4), st.integers(2, 3))
    def test_matches_fft_oracle(self, coeffs, N):
        m = LaurentPolynomial(coeffs)
        S = build_subband_operator(m, N, 8)
        np.testing.assert_allclose(S.matrix, brute_force(m, N, 8), atol=1e-12)

    def test_interior_columns_are_exact(self):
        m = haar_bank().filters[0]
        S = build_subband_operator(m, 2, 10)
        for n in S.interior:
            assert abs(np.linalg.norm(S.matrix[:, S.domain.pos(n)]) - 1) < 1e-14


class TestAdjoint:
    def test_involution(self):
        S = build_subband_operator(haar_bank().filters[0], 2, 5)
        SS = adjoint(adjoint(S))
        np.testing.assert_array_equal(SS.matrix, S.matrix)
        assert SS.interior == S.interior and SS.exact_rows == S.exact_rows

    def test_haar_adjoint_action(self):
        S = build_subband_operator(haar_bank().filters[0], 2, 5)
        assert column(adjoint(S), 2) == {1: pytest.approx(R2)}

    def test_zero_operator(self):
        S = build_subband_operator(LaurentPolynomial(), 2, 3)
        assert not adjoint(S).matrix.any()

    def test_frobenius_norm_preserved(self):
        S = build_subband_operator(LaurentPolynomial({0: 1, 1: 2j, -1: 0.5}), 3, 7)
        assert np.linalg.norm(S.matrix) == np.linalg.norm(adjoint(S).matrix)


class TestCuntzRelations:
    def test_haar_isometry(self):
        rep = cuntz_isometry_residual(subband_family(haar_bank(), 64))
        assert rep.max_residual < 1e-12 and rep.passed

    def test_unit_filter_isometry(self):
        S = build_subband_operator(LaurentPolynomial({0: 1}), 2, 8)
        assert cuntz_isometry_residual([S]).max_residual == 0

    def test_duplicated_filter_fails(self):
        m = LaurentPolynomial({0: R2, 1: R2})
        rep = cuntz_isometry_residual(subband_family(FilterBank(2, (m, m)), 16), tol=1e-10)
        assert rep.table[0, 1] == pytest.approx(1.0)
        assert not rep.passed

    def test_haar_completeness(self):
        assert cuntz_completeness_residual(subband_family(haar_bank(), 64)).max_residual < 1e-12

    def test_single_isometry_incomplete(self):
        S = build_subband_operator(LaurentPolynomial({0: 1}), 2, 8)
        assert cuntz_completeness_residual([S]).max_residual == pytest.approx(1.0)

    def test_scaled_copies_project_onto_multiples(self):
        ops = [build_subband_operator(LaurentPolynomial({0: 1 / np.sqrt(3)}), 3, 9) for _ in range(3)]
        assert cuntz_completeness_residual(ops).max_residual == pytest.approx(1.0)

    def test_empty_interior_is_error(self):
        # built operators always keep column 0 exact, so strip the interior by hand
        S = build_subband_operator(LaurentPolynomial({1: 1}), 2, 2)
        bare = TruncatedOperator(S.matrix, S.domain, frozenset(), frozenset())
        with pytest.raises(ValueError):
            cuntz_isometry_residual([bare])
        with pytest.raises(ValueError):
            cuntz_completeness_residual([bare])

    def test_residuals_do_not_grow_with_truncation(self):
        iso, comp = [], []
        for M in (16, 64, 256):
            ops = subband_family(haar_bank(), M)
            iso.append(cuntz_isometry_residual(ops).max_residual)
            comp.append(cuntz_completeness_residual(ops).max_residual)
        # exact zero entries or ulp-level values; never an increase beyond one ulp of 1
        for seq in (iso, comp):
            assert all(b <= a + 2.3e-16 for a, b in zip(seq, seq[1:]))

    @settings(max_examples=10, deadline=None)
    @given(st.integers(2, 3), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
    def test_random_orthonormal_banks(self, N, degree, seed):
        bank = random_paraunitary_bank(N, degree, np.random.default_rng(seed))
        ops = subband_family(bank, 20)
        assert cuntz_isometry_residual(ops).max_residual < 1e-12
        assert cuntz_completeness_residual(ops).max_residual < 1e-12


class TestCompose:
    def test_product_exactness_propagates(self):
        ops = subband_family(haar_bank(), 12)
        P = compose(adjoint(ops[0]), ops[0])
        pos = P.positions(P.interior)
        np.testing.assert_allclose(P.matrix[np.ix_(pos, pos)], np.eye(len(pos)), atol=1e-15)

    def test_truncation_mismatch(self):
        a = build_subband_operator(LaurentPolynomial({0: 1}), 2, 3)
        b = build_subband_operator(LaurentPolynomial({0: 1}), 2, 4)
        with pytest.raises(ValueError):
            compose(a, b)


class TestPolyphaseCorrespondence:
    def test_haar(self):
        ops = subband_family(haar_bank(), 16)
        A = polyphase_matrix(haar_bank())
        for i in range(2):
            for j in range(2):
                cmp = compare_with_polyphase(ops, A, i, j)
                assert cmp.residuals["AAstar"] < 1e-12 and cmp.passed

    def test_single_filter_diagonal_symbol(self):
        m = LaurentPolynomial({0: 0.3, 1: 0.4j, 2: -0.5})
        bank = FilterBank(2, (m, LaurentPolynomial({0: 1})))
        A = polyphase_matrix(bank)
        sym = polyphase_symbol(A, 0, 0, "AAstar")
        assert sym.coeffs[0] == pytest.approx(m.energy())
        S = build_subband_operator(m, 2, 8)
        n = 0
        assert np.linalg.norm(S.matrix[:, S.domain.pos(n)]) ** 2 == pytest.approx(m.energy())

    def test_zero_filter(self):
        bank = FilterBank(2, (LaurentPolynomial({0: 1}), LaurentPolynomial()))
        ops = subband_family(bank, 6)
        cmp = compare_with_polyphase(ops, polyphase_matrix(bank), 0, 1)
        assert cmp.residuals == {"AAstar": 0.0, "AstarA": 0.0}

    def test_dimension_mismatch(self):
        ops = subband_family(haar_bank(), 6)
        bank3 = random_paraunitary_bank(3, 1, np.random.default_rng(0))
        with pytest.raises(ValueError):
            compare_with_polyphase(ops, polyphase_matrix(bank3), 0, 0)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(2, 3), st.integers(0, 2 ** 32 - 1))
    def test_nonorthogonal_bank_symbol(self, N, seed):
        """Row-Gram ordering reproduces S_i* S_j for arbitrary (non-orthonormal) filters."""
        rng = np.random.default_rng(seed)
        bank = FilterBank(N, tuple(LaurentPolynomial({t: complex(*rng.standard_normal(2)) for t in range(-2, 3)})
                                   for _ in range(N)))
        ops = subband_family(bank, 20)
        A = polyphase_matrix(bank)
        for i in range(N):
            for j in range(N):
                assert compare_with_polyphase(ops, A, i, j).residuals["AAstar"] < 1e-12


def test_multiplication_operator_matches_symbol():
    tr = FourierTruncation(6)
    X = multiplication_operator(LaurentPolynomial({1: 2.0, -1: 1j}), tr)
    assert X.matrix[tr.pos(3), tr.pos(2)] == 2.0
    assert X.matrix[tr.pos(1), tr.pos(2)] == 1j
    assert 6 not in X.interior and 5 in X.interior
