"""Filter systems on the unit circle and their loop matrices.

Filters are Laurent polynomials ``m(z) = sum_t a_t z**t``.  Filter indexing is
0-based throughout (``m_0`` is the low-pass filter).  Every matrix function
built here (condition-(a) modulation matrix, polyphase matrix, q-polyphase
matrix, doubled matrix) is again a matrix of Laurent polynomials, so all
"for every z on the circle" claims are checked by sampling a ``LoopMatrix``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

UNIT_TOL = 1e-12


def _check_unit(z) -> None:
    if abs(abs(z) - 1.0) > UNIT_TOL:
        raise ValueError(f"z={z!r} is not on the unit circle (| |z|-1 | > {UNIT_TOL})")


@dataclass(frozen=True, eq=False)
class LaurentPolynomial:
    """Finitely supported coefficients ``{t: a_t}``; absent exponents are zero."""

    coeffs: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(t): complex(a) for t, a in dict(self.coeffs).items() if a != 0}
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def monomial(cls, t: int, a: complex = 1.0) -> "LaurentPolynomial":
        return cls({t: a})

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def max_abs_exponent(self) -> int:
        return max((abs(t) for t in self.coeffs), default=0)

    def energy(self) -> float:
        """``sum |a_t|^2``; the squared L2(T) norm."""
        return float(sum(abs(a) ** 2 for a in self.coeffs.values()))

    def evaluate(self, z):
        """Evaluate at scalar or array ``z`` without the unit-circle check."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for t, a in self.coeffs.items():
            out = out + a * z ** t
        return out if out.ndim else complex(out)

    def __call__(self, z):
        return eval_filter(self, z)

    def conj(self) -> "LaurentPolynomial":
        """Pointwise complex conjugate on the circle: ``a_t z^t -> conj(a_t) z^-t``."""
        return LaurentPolynomial({-t: np.conj(a) for t, a in self.coeffs.items()})

    def __add__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        out = dict(self.coeffs)
        for t, a in other.coeffs.items():
            out[t] = out.get(t, 0) + a
        return LaurentPolynomial(out)

    def __neg__(self) -> "LaurentPolynomial":
        return LaurentPolynomial({t: -a for t, a in self.coeffs.items()})

    def __sub__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LaurentPolynomial):
            out: dict[int, complex] = {}
            for t, a in self.coeffs.items():
                for u, b in other.coeffs.items():
                    out[t + u] = out.get(t + u, 0) + a * b
            return LaurentPolynomial(out)
        return LaurentPolynomial({t: a * other for t, a in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"LaurentPolynomial({self.coeffs})"


ZERO = LaurentPolynomial()


def eval_filter(p: LaurentPolynomial, z: complex) -> complex:
    """Evaluate ``p`` at a point of the unit circle."""
    _check_unit(z)
    return complex(p.evaluate(z))


@dataclass(frozen=True, eq=False)
class FilterBank:
    N: int
    filters: tuple[LaurentPolynomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(self.filters))
        if self.N < 2:
            raise ValueError("a filter bank needs scale N >= 2")
        if len(self.filters) != self.N:
            raise ValueError(f"expected {self.N} filters, got {len(self.filters)}")

    @classmethod
    def from_coefficients(cls, N: int, coeffs: Sequence[Mapping[int, complex]]) -> "FilterBank":
        return cls(N, tuple(LaurentPolynomial(c) for c in coeffs))

    @classmethod
    def from_polyphase(cls, P: "LoopMatrix") -> "FilterBank":
        """Inverse of ``polyphase_matrix(bank, 1/N)``: ``a_{Nr+k} = [z^r] P[j][k]``."""
        N = P.shape[0]
        filters = []
        for j in range(N):
            c: dict[int, complex] = {}
            for k in range(N):
                for r, a in P.entries[j][k].coeffs.items():
                    c[N * r + k] = a
            filters.append(LaurentPolynomial(c))
        return cls(N, tuple(filters))

    def __add__(self, other: "FilterBank") -> "FilterBank":
        if other.N != self.N:
            raise ValueError("scale mismatch")
        return FilterBank(self.N, tuple(a + b for a, b in zip(self.filters, other.filters)))

    def max_abs_exponent(self) -> int:
        return max(f.max_abs_exponent() for f in self.filters)


def haar_bank() -> FilterBank:
    r = 1 / np.sqrt(2)
    return FilterBank.from_coefficients(2, [{0: r, 1: r}, {0: r, 1: -r}])


def zero_bank(N: int) -> FilterBank:
    return FilterBank(N, tuple(ZERO for _ in range(N)))


@dataclass(frozen=True, eq=False)
class LoopMatrix:
    """Matrix of Laurent polynomials, evaluated pointwise on the circle."""

    entries: tuple[tuple[LaurentPolynomial, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        if len({len(r) for r in rows}) > 1:
            raise ValueError("ragged loop matrix")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def constant(cls, matrix) -> "LoopMatrix":
        m = np.atleast_2d(np.asarray(matrix, dtype=complex))
        return cls(tuple(tuple(LaurentPolynomial({0: v}) for v in row) for row in m))

    @classmethod
    def identity(cls, n: int) -> "LoopMatrix":
        return cls.constant(np.eye(n))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), (len(self.entries[0]) if self.entries else 0)

    def __call__(self, z) -> np.ndarray:
        _check_unit(z)
        return self.evaluate(z)

    def evaluate(self, z) -> np.ndarray:
        """Scalar ``z`` gives an (r, c) array; an array of points gives (n, r, c)."""
        z = np.asarray(z, dtype=complex)
        r, c = self.shape
        out = np.zeros(z.shape + (r, c), dtype=complex)
        for j, row in enumerate(self.entries):
            for k, p in enumerate(row):
                out[..., j, k] = p.evaluate(z)
        return out

    def adjoint(self) -> "LoopMatrix":
        r, c = self.shape
        return LoopMatrix(tuple(tuple(self.entries[j][k].conj() for j in range(r)) for k in range(c)))

    def __mul__(self, scalar) -> "LoopMatrix":
        return LoopMatrix(tuple(tuple(p * scalar for p in row) for row in self.entries))

    __rmul__ = __mul__

    def __add__(self, other: "LoopMatrix") -> "LoopMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return LoopMatrix(tuple(tuple(a + b for a, b in zip(r1, r2))
                                for r1, r2 in zip(self.entries, other.entries)))

    def __matmul__(self, other: "LoopMatrix") -> "LoopMatrix":
        r, n = self.shape
        n2, c = other.shape
        if n != n2:
            raise ValueError("shape mismatch")
        out = []
        for j in range(r):
            row = []
            for k in range(c):
                acc = ZERO
                for m in range(n):
                    acc = acc + self.entries[j][m] * other.entries[m][k]
                row.append(acc)
            out.append(tuple(row))
        return LoopMatrix(tuple(out))

    def equals(self, other: "LoopMatrix") -> bool:
        return self.shape == other.shape and all(
            a == b for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2))


def condition_a_loop(bank: FilterBank) -> LoopMatrix:
    """``M[j][k](z) = m_j(rho^k z) / sqrt(N)`` as a loop matrix, ``rho = exp(2 pi i/N)``."""
    N = bank.N
    rho = np.exp(2j * np.pi / N)
    rows = []
    for m in bank.filters:
        rows.append(tuple(
            LaurentPolynomial({t: a * rho ** (k * t) / np.sqrt(N) for t, a in m.coeffs.items()})
            for k in range(N)))
    return LoopMatrix(tuple(rows))


def condition_a_matrix(bank: FilterBank, z: complex) -> np.ndarray:
    _check_unit(z)
    N = bank.N
    rho = np.exp(2j * np.pi / N)
    return np.array([[m.evaluate(rho ** k * z) for k in range(N)] for m in bank.filters]) / np.sqrt(N)


def polyphase_matrix(bank: FilterBank, prefactor: float | None = None, offset: int = 0) -> LoopMatrix:
    """``A[j][k](z) = prefactor * sum_{w^N = z} m_j(w) w^{-(k+offset)}``.

    Computed in closed form: the root sum keeps exponents ``t = k+offset mod N``
    and gives ``prefactor * N * sum a_t z^{(t-k-offset)/N}``.  ``prefactor``
    defaults to ``1/N``.  ``offset=1`` gives the 1..N column labelling.
    """
    N = bank.N
    if prefactor is None:
        prefactor = 1.0 / N
    if prefactor <= 0:
        raise ValueError("prefactor must be positive")
    rows = []
    for m in bank.filters:
        row = []
        for k in range(N):
            kk = k + offset
            row.append(LaurentPolynomial({(t - kk) // N: prefactor * N * a
                                          for t, a in m.coeffs.items() if (t - kk) % N == 0}))
        rows.append(tuple(row))
    return LoopMatrix(tuple(rows))


def q_polyphase_matrix(bank: FilterBank, q: float) -> LoopMatrix:
    """``A~[k][l](z) = sum_{w^N = z} (q w)^{-l} m_k(w)``, with no 1/N prefactor."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    N = bank.N
    rows = []
    for m in bank.filters:
        rows.append(tuple(
            LaurentPolynomial({(t - l) // N: q ** (-l) * N * a
                               for t, a in m.coeffs.items() if (t - l) % N == 0})
            for l in range(N)))
    return LoopMatrix(tuple(rows))


def polyphase_root_sum(bank: FilterBank, z: complex, prefactor: float | None = None) -> np.ndarray:
    """Brute-force polyphase matrix at ``z`` by summing over the N roots ``w^N = z``.

    Independent of the closed form in :func:`polyphase_matrix`; the roots are
    ``rho^m * z^{1/N}`` with the principal root.
    """
    _check_unit(z)
    N = bank.N
    if prefactor is None:
        prefactor = 1.0 / N
    w0 = complex(z) ** (1.0 / N)
    roots = w0 * np.exp(2j * np.pi * np.arange(N) / N)
    out = np.zeros((N, N), dtype=complex)
    for j, m in enumerate(bank.filters):
        vals = m.evaluate(roots)
        for k in range(N):
            out[j, k] = prefactor * np.sum(vals * roots ** (-k))
    return out


def circle_samples(sample_count: int, seed: int = 0) -> np.ndarray:
    """``sample_count`` equispaced points followed by as many seeded random points."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    eq = np.exp(2j * np.pi * np.arange(sample_count) / sample_count)
    rng = np.random.default_rng(seed)
    rand = np.exp(2j * np.pi * rng.random(sample_count))
    return np.concatenate([eq, rand])


@dataclass
class SampledResidual:
    """Max over sampled circle points of a matrix residual."""

    residual: float
    worst_z: complex
    tol: float
    sample_count: int
    seed: int
    norm: str

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tol)

    def to_dict(self) -> dict:
        return {"residual": self.residual, "worst_z": [self.worst_z.real, self.worst_z.imag],
                "tol": self.tol, "sample_count": self.sample_count, "seed": self.seed,
                "norm": self.norm, "passed": self.passed}


def _sampled_max(values: np.ndarray, zs: np.ndarray, tol, sample_count, seed, norm) -> SampledResidual:
    i = int(np.argmax(values))
    return SampledResidual(float(values[i]), complex(zs[i]), tol, sample_count, seed, norm)


def check_unitarity(mat: LoopMatrix, sample_count: int = 64, tol: float = 1e-12,
                    seed: int = 0) -> SampledResidual:
    """max_z ||A(z)^* A(z) - I||_F over equispaced plus seeded random points."""
    zs = circle_samples(sample_count, seed)
    A = mat.evaluate(zs)
    n = mat.shape[1]
    prod = np.conj(np.swapaxes(A, -1, -2)) @ A - np.eye(n)
    return _sampled_max(np.linalg.norm(prod, axis=(-2, -1)), zs, tol, sample_count, seed, "frobenius")


def check_biorthogonality(A: LoopMatrix, Atilde: LoopMatrix, sample_count: int = 64,
                          tol: float = 1e-12, seed: int = 0) -> SampledResidual:
    """max_z max_{ij} |sum_k conj(A[k][i]) A~[k][j] - delta_ij|."""
    if A.shape != Atilde.shape:
        raise ValueError(f"dimension mismatch {A.shape} vs {Atilde.shape}")
    zs = circle_samples(sample_count, seed)
    a, b = A.evaluate(zs), Atilde.evaluate(zs)
    prod = np.conj(np.swapaxes(a, -1, -2)) @ b - np.eye(A.shape[1])
    return _sampled_max(np.abs(prod).max(axis=(-2, -1)), zs, tol, sample_count, seed, "max-abs")


def build_doubled_matrix(A: LoopMatrix) -> LoopMatrix:
    """``B(z) = diag(A(z), A(z)^*)``."""
    r, c = A.shape
    Astar = A.adjoint()
    rows = [tuple(A.entries[j]) + (ZERO,) * r for j in range(r)]
    rows += [(ZERO,) * c + tuple(Astar.entries[j]) for j in range(c)]
    return LoopMatrix(tuple(rows))


def check_car_identity(B: LoopMatrix, Btilde: LoopMatrix, sample_count: int = 64,
                       tol: float = 1e-10, seed: int = 0) -> SampledResidual:
    """max_z ||B B~^* + B~^* B - I||_F."""
    if B.shape != Btilde.shape or B.shape[0] != B.shape[1]:
        raise ValueError(f"dimension mismatch {B.shape} vs {Btilde.shape}")
    zs = circle_samples(sample_count, seed)
    b, bt = B.evaluate(zs), Btilde.evaluate(zs)
    bts = np.conj(np.swapaxes(bt, -1, -2))
    res = b @ bts + bts @ b - np.eye(B.shape[0])
    return _sampled_max(np.linalg.norm(res, axis=(-2, -1)), zs, tol, sample_count, seed, "frobenius")


def gram_spectrum(mat: LoopMatrix, sample_count: int = 64, seed: int = 0) -> dict:
    """Range of the eigenvalues of ``A(z)^* A(z)`` over the sampled points."""
    zs = circle_samples(sample_count, seed)
    a = mat.evaluate(zs)
    ev = np.linalg.eigvalsh(np.conj(np.swapaxes(a, -1, -2)) @ a)
    return {"min": float(ev.min()), "max": float(ev.max())}


def random_paraunitary_bank(N: int, degree: int, rng: np.random.Generator) -> FilterBank:
    """Orthonormal bank from a random paraunitary polyphase matrix.

    ``P(z) = V0 * prod_i (I - v_i v_i^* + z v_i v_i^*)`` with Haar-random
    unitary ``V0`` and random unit vectors ``v_i``; each factor is unitary on
    the circle, so the bank satisfies the orthonormality conditions exactly.
    """
    def unitary(n):
        z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    P = LoopMatrix.constant(unitary(N))
    for _ in range(degree):
        v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        v /= np.linalg.norm(v)
        proj = np.outer(v, v.conj())
        P = P @ LoopMatrix(tuple(
            tuple(LaurentPolynomial({0: np.eye(N)[j, k] - proj[j, k], 1: proj[j, k]}) for k in range(N))
            for j in range(N)))
    return FilterBank.from_polyphase(P)


def q_deformed_bank(bank: FilterBank, q: float) -> FilterBank:
    """Orthonormal q-deformation of a bank with constant polyphase matrix.

    The polyphase rows are weighted column-wise by ``q^l`` (so the low-pass
    filter becomes ``m_0(q w)``) and re-orthonormalised in order by
    Gram-Schmidt.  The result is again orthonormal and tends to ``bank`` as
    ``q -> 1``.
    """
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    P = polyphase_matrix(bank)
    if any(t != 0 for row in P.entries for p in row for t in p.support):
        raise ValueError("q-deformation is only defined for constant polyphase matrices")
    U = P.evaluate(1.0) * (q ** np.arange(bank.N))[None, :]
    rows: list[np.ndarray] = []
    for j in range(bank.N):
        v = U[j].copy()
        for r in rows:
            v = v - (r.conj() @ v) * r
        rows.append(v / np.linalg.norm(v))
    return FilterBank.from_polyphase(LoopMatrix.constant(np.array(rows)))


def bank_from_triples(N: int, filters: Iterable[Iterable[tuple[int, float, float]]]) -> FilterBank:
    """Config form: one list of ``(exponent, re, im)`` triples per filter."""
    return FilterBank.from_coefficients(
        N, [{int(t): complex(re, im) for t, re, im in f} for f in filters])
