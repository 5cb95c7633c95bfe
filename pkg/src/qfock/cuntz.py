"""Subband operators ``(S f)(z) = m(z) f(z^N)`` on a truncated Fourier basis.

The basis is ``e_n(z) = z^n`` for ``-M <= n <= M``; ``S e_n = sum_t a_t e_{Nn+t}``.
Truncation drops coefficients that leave the window, so every operator
carries the set of columns (``interior``) and rows (``exact_rows``) on which
it agrees with the infinite-dimensional operator.  Relations are only
asserted on those blocks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .filterbank import LaurentPolynomial, LoopMatrix


@dataclass(frozen=True)
class FourierTruncation:
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("truncation M must be >= 1")

    @property
    def dim(self) -> int:
        return 2 * self.M + 1

    @property
    def indices(self) -> range:
        return range(-self.M, self.M + 1)

    def pos(self, n: int) -> int:
        return n + self.M

    def contains(self, n: int) -> bool:
        return -self.M <= n <= self.M


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    matrix: np.ndarray
    domain: FourierTruncation
    interior: frozenset[int]
    exact_rows: frozenset[int]

    def positions(self, idx) -> np.ndarray:
        return np.array(sorted(self.domain.pos(n) for n in idx), dtype=int)

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return compose(self, other)


def build_subband_operator(m: LaurentPolynomial, N: int, M: int) -> TruncatedOperator:
    if N < 2:
        raise ValueError("N must be >= 2")
    if M < m.max_abs_exponent():
        raise ValueError(f"truncation M={M} smaller than filter degree {m.max_abs_exponent()}")
    tr = FourierTruncation(M)
    S = np.zeros((tr.dim, tr.dim), dtype=complex)
    interior = set()
    for n in tr.indices:
        exact = True
        for t, a in m.coeffs.items():
            r = N * n + t
            if tr.contains(r):
                S[tr.pos(r), tr.pos(n)] += a
            else:
                exact = False
        if exact:
            interior.add(n)
    # row r is exact when every column feeding it in infinite dimensions is present
    exact_rows = set()
    for r in tr.indices:
        if all(tr.contains((r - t) // N) for t in m.coeffs if (r - t) % N == 0):
            exact_rows.add(r)
    return TruncatedOperator(S, tr, frozenset(interior), frozenset(exact_rows))


def adjoint(op: TruncatedOperator) -> TruncatedOperator:
    return TruncatedOperator(op.matrix.conj().T, op.domain, op.exact_rows, op.interior)


def compose(A: TruncatedOperator, B: TruncatedOperator) -> TruncatedOperator:
    """Product ``A B`` with exactness propagated through the sparsity pattern."""
    if A.domain != B.domain:
        raise ValueError("operators live on different truncations")
    tr = A.domain
    C = A.matrix @ B.matrix
    interior = set()
    for n in B.interior:
        rows = np.nonzero(B.matrix[:, tr.pos(n)])[0] - tr.M
        if all(int(r) in A.interior for r in rows):
            interior.add(n)
    exact_rows = set()
    for m in A.exact_rows:
        cols = np.nonzero(A.matrix[tr.pos(m), :])[0] - tr.M
        if all(int(c) in B.exact_rows for c in cols):
            exact_rows.add(m)
    return TruncatedOperator(C, tr, frozenset(interior), frozenset(exact_rows))


def multiplication_operator(symbol: LaurentPolynomial, tr: FourierTruncation) -> TruncatedOperator:
    """Multiplication by ``symbol(z)``: ``e_n -> sum_r c_r e_{n+r}``."""
    X = np.zeros((tr.dim, tr.dim), dtype=complex)
    for n in tr.indices:
        for r, c in symbol.coeffs.items():
            if tr.contains(n + r):
                X[tr.pos(n + r), tr.pos(n)] = c
    interior = frozenset(n for n in tr.indices if all(tr.contains(n + r) for r in symbol.coeffs))
    exact_rows = frozenset(n for n in tr.indices if all(tr.contains(n - r) for r in symbol.coeffs))
    return TruncatedOperator(X, tr, interior, exact_rows)


@dataclass
class CuntzReport:
    relation: str
    max_residual: float
    table: np.ndarray
    block_size: int
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.max_residual < self.tol)

    def to_dict(self) -> dict:
        return {"relation": self.relation, "max_residual": self.max_residual,
                "table": np.asarray(self.table).tolist(), "block_size": self.block_size,
                "tol": self.tol, "passed": self.passed}


def _common_domain(ops: Sequence[TruncatedOperator]) -> FourierTruncation:
    if not ops:
        raise ValueError("need at least one operator")
    tr = ops[0].domain
    if any(op.domain != tr for op in ops):
        raise ValueError("operators live on different truncations")
    return tr


def cuntz_isometry_residual(ops: Sequence[TruncatedOperator], tol: float = 1e-12) -> CuntzReport:
    """max_{ij} max-abs of ``S_i^* S_j - delta_ij I`` on the common interior block."""
    _common_domain(ops)
    common = frozenset.intersection(*(op.interior for op in ops))
    if not common:
        raise ValueError("empty interior: truncation too small")
    pos = ops[0].positions(common)
    n = len(ops)
    table = np.zeros((n, n))
    for i, Si in enumerate(ops):
        for j, Sj in enumerate(ops):
            P = (Si.matrix.conj().T @ Sj.matrix)[np.ix_(pos, pos)]
            if i == j:
                P = P - np.eye(len(pos))
            table[i, j] = np.abs(P).max()
    return CuntzReport("isometry", float(table.max()), table, len(pos), tol)


def cuntz_completeness_residual(ops: Sequence[TruncatedOperator], tol: float = 1e-12) -> CuntzReport:
    """max-abs of ``sum_i S_i S_i^* - I`` on rows exact for every ``S_i``."""
    _common_domain(ops)
    rows = frozenset.intersection(*(op.exact_rows for op in ops))
    if not rows:
        raise ValueError("empty interior: truncation too small")
    pos = ops[0].positions(rows)
    total = sum(op.matrix @ op.matrix.conj().T for op in ops)
    R = total[np.ix_(pos, pos)] - np.eye(len(pos))
    r = float(np.abs(R).max())
    return CuntzReport("completeness", r, np.array([[r]]), len(pos), tol)


def polyphase_symbol(A: LoopMatrix, i: int, j: int, ordering: str) -> LaurentPolynomial:
    """Symbol predicted for ``S_i^* S_j``.

    ``"AAstar"``: row Gram ``sum_k conj(A[i][k]) A[j][k]``.
    ``"AstarA"``: column Gram ``sum_k conj(A[k][i]) A[k][j]``.
    Both conjugate the first index, matching the inner product of ``S_i^* S_j``.
    """
    n = A.shape[0]
    acc = LaurentPolynomial()
    if ordering == "AAstar":
        for k in range(n):
            acc = acc + A.entries[i][k].conj() * A.entries[j][k]
    elif ordering == "AstarA":
        for k in range(n):
            acc = acc + A.entries[k][i].conj() * A.entries[k][j]
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    return acc


ORDERINGS = ("AAstar", "AstarA")


@dataclass
class PolyphaseComparison:
    i: int
    j: int
    residuals: dict
    requested: str
    tol: float

    @property
    def best(self) -> str:
        return min(self.residuals, key=self.residuals.get)

    @property
    def passed(self) -> bool:
        return bool(self.residuals[self.requested] < self.tol)

    def to_dict(self) -> dict:
        return {"i": self.i, "j": self.j, "residuals": self.residuals,
                "requested": self.requested, "best": self.best, "passed": self.passed}


def compare_with_polyphase(ops: Sequence[TruncatedOperator], A: LoopMatrix, i: int, j: int,
                           ordering: str = "AAstar", tol: float = 1e-10) -> PolyphaseComparison:
    """Compare ``S_i^* S_j`` with multiplication by the polyphase symbol on the interior block.

    ``A`` must be the prefactor-``1/N`` polyphase matrix of the bank that built ``ops``.
    """
    tr = _common_domain(ops)
    if A.shape[0] != len(ops):
        raise ValueError(f"loop matrix of size {A.shape} does not match {len(ops)} operators")
    Si, Sj = ops[i], ops[j]
    block = Si.interior & Sj.interior
    if not block:
        raise ValueError("empty interior: truncation too small")
    pos = Si.positions(block)
    lhs = (Si.matrix.conj().T @ Sj.matrix)[np.ix_(pos, pos)]
    residuals = {}
    for o in ORDERINGS:
        X = multiplication_operator(polyphase_symbol(A, i, j, o), tr).matrix[np.ix_(pos, pos)]
        residuals[o] = float(np.abs(lhs - X).max())
    return PolyphaseComparison(i, j, residuals, ordering, tol)


def subband_family(bank, M: int) -> list[TruncatedOperator]:
    return [build_subband_operator(m, bank.N, M) for m in bank.filters]
