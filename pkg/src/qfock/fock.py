"""Fock spaces of a completely positive map and their creation operators.

A CP map on matrix units is given in factored form ``Phi(E_ij) = R_i^* R_j``
(compressed to ``H = C^d``).  The factors are ``D x D`` matrices on an ambient
space ``C^D`` containing ``H`` as its first ``d`` coordinates; ``D = d`` is the
common case, ``D > d`` is needed e.g. for the Cuntz-Toeplitz factor.

Words over letters ``1..N`` act through ``V_w = R_{i_1} R_{i_2} ... R_{i_k}``
so that prefixing a letter multiplies on the left, ``V_{iw} = R_i V_w``.
The level-k form is

    <w (x) e_a, w' (x) e_b> = sqrt(tau(w) tau(w')) <V_w e_a, V_w' e_b>

with twist weights ``tau(w) = prod_letters lambda_i``.  Words of different
length are orthogonal.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cuntz import TruncatedOperator, multiplication_operator, polyphase_symbol, ORDERINGS
from .filterbank import (
    FilterBank, build_doubled_matrix, check_car_identity, check_biorthogonality,
    gram_spectrum, polyphase_matrix, q_deformed_bank, q_polyphase_matrix,
)
from .cuntz import subband_family

LEVEL_CAP = 4096
KERNEL_TOL = 1e-10

Word = tuple


def words(N: int, k: int):
    """Words of length ``k`` over ``1..N`` in lexicographic order."""
    return itertools.product(range(1, N + 1), repeat=k)


@dataclass(frozen=True, eq=False)
class CPFactor:
    N: int
    d: int
    R: tuple[np.ndarray, ...]

    def __post_init__(self):
        R = tuple(np.asarray(r, dtype=complex) for r in self.R)
        if len(R) != self.N:
            raise ValueError(f"expected {self.N} factors, got {len(R)}")
        D = R[0].shape[0] if R else self.d
        for r in R:
            if r.shape != (D, D):
                raise ValueError("factors must be square and of equal size")
        if D < self.d:
            raise ValueError("ambient dimension smaller than d")
        object.__setattr__(self, "R", R)

    @property
    def D(self) -> int:
        return self.R[0].shape[0]

    def phi(self, i: int, j: int) -> np.ndarray:
        """``Phi(E_ij)`` for letters ``i, j`` in ``1..N``."""
        return (self.R[i - 1].conj().T @ self.R[j - 1])[: self.d, : self.d]

    def choi(self) -> np.ndarray:
        return np.block([[self.phi(i, j) for j in range(1, self.N + 1)] for i in range(1, self.N + 1)])


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    blocks: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        b = tuple(tuple(np.atleast_2d(np.asarray(x, dtype=complex)) for x in row) for row in self.blocks)
        shapes = {x.shape for row in b for x in row}
        if len(shapes) != 1 or len({len(row) for row in b}) != 1 or len(b) != len(b[0]):
            raise ValueError("blocks must form an N x N array of equal-size square matrices")
        (d1, d2), = shapes
        if d1 != d2:
            raise ValueError("blocks must be square")
        object.__setattr__(self, "blocks", b)

    @classmethod
    def from_matrix(cls, P: np.ndarray, N: int) -> "ChoiMatrix":
        d = P.shape[0] // N
        return cls(tuple(tuple(P[i * d:(i + 1) * d, j * d:(j + 1) * d] for j in range(N)) for i in range(N)))

    @property
    def N(self) -> int:
        return len(self.blocks)

    @property
    def d(self) -> int:
        return self.blocks[0][0].shape[0]

    def assemble(self) -> np.ndarray:
        return np.block([list(row) for row in self.blocks])


@dataclass(frozen=True)
class TwistWeights:
    lam: tuple[float, ...]

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lam)
        if any(x <= 0 for x in lam):
            raise ValueError("twist weights must be positive")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def untwisted(cls, N: int) -> "TwistWeights":
        return cls((1.0,) * N)

    @classmethod
    def q_twist(cls, N: int, q: float) -> "TwistWeights":
        """Built-in twist ``lambda_i = q^{2(i-1)}``; the weights sum to ``(1-q^{2N})/(1-q^2)``."""
        return cls(tuple(q ** (2 * i) for i in range(N)))

    def tau(self, w: Word) -> float:
        return float(np.prod([self.lam[i - 1] for i in w])) if w else 1.0


@dataclass
class ChoiReport:
    hermiticity: float
    min_eig: float
    max_eig: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.min_eig >= -self.tol * max(self.max_eig, 0.0)


def choi_validate(P: ChoiMatrix, tol: float = 1e-12) -> ChoiReport:
    A = P.assemble()
    herm = float(np.abs(A - A.conj().T).max())
    ev = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    return ChoiReport(herm, float(ev.min()), float(ev.max()), tol)


def choi_factor(P: ChoiMatrix, tol: float = 1e-12) -> CPFactor:
    """Factor ``P_ij = R_i^* R_j`` from the eigendecomposition, clipping negative eigenvalues."""
    rep = choi_validate(P, tol)
    if not rep.passed or rep.hermiticity > tol * max(1.0, rep.max_eig):
        raise ValueError(f"Choi matrix is not positive semidefinite: {rep}")
    N, d = P.N, P.d
    A = P.assemble()
    mu, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    keep = mu > tol * max(mu.max(), 0.0)
    W = np.sqrt(mu[keep])[:, None] * V[:, keep].conj().T  # r x Nd, A = W^* W
    r = W.shape[0]
    D = max(d, r)
    R = []
    for i in range(N):
        Ri = np.zeros((D, D), dtype=complex)
        Ri[:r, :d] = W[:, i * d:(i + 1) * d]
        R.append(Ri)
    return CPFactor(N, d, tuple(R))


def word_operator(factor: CPFactor, w: Word) -> np.ndarray:
    """``V_w = R_{i_1} ... R_{i_k}``; the empty word gives the identity."""
    V = np.eye(factor.D, dtype=complex)
    for i in reversed(w):
        if not 1 <= i <= factor.N:
            raise ValueError(f"letter {i} outside 1..{factor.N}")
        V = factor.R[i - 1] @ V
    return V


def level_columns(factor: CPFactor, twist: TwistWeights, k: int, cap: int = LEVEL_CAP) -> np.ndarray:
    """``D x (N^k d)`` matrix whose columns are ``sqrt(tau(w)) V_w e_a`` in length-lex order."""
    n = factor.N ** k * factor.d
    if n > cap:
        raise ValueError(f"level {k} has dimension {n} > cap {cap}")
    if len(twist.lam) != factor.N:
        raise ValueError("twist length does not match the alphabet")
    X = np.eye(factor.D, factor.d, dtype=complex)
    for _ in range(k):
        X = np.hstack([np.sqrt(twist.lam[i]) * (factor.R[i] @ X) for i in range(factor.N)])
    return X


def gram_level(factor: CPFactor, twist: TwistWeights, k: int, cap: int = LEVEL_CAP) -> np.ndarray:
    X = level_columns(factor, twist, k, cap)
    return X.conj().T @ X


@dataclass
class Quotient:
    dim: int
    to_quotient: np.ndarray  # r x n
    lift: np.ndarray  # n x r
    kernel: np.ndarray  # n x (n - r), orthonormal
    eigenvalues: np.ndarray


def quotient(G: np.ndarray, tol: float = KERNEL_TOL) -> Quotient:
    """Quotient of the form ``G`` by its numerical kernel (eigenvalues <= ``tol * max``)."""
    mu, U = np.linalg.eigh(0.5 * (G + G.conj().T))
    top = max(float(mu.max()), 0.0) if mu.size else 0.0
    if mu.size and mu.min() < -max(tol * top, 1e-300):
        raise ValueError(f"form is not positive semidefinite: min eigenvalue {mu.min():.3e}")
    keep = mu > tol * top
    Uk, mk = U[:, keep], mu[keep]
    return Quotient(int(keep.sum()), np.sqrt(mk)[:, None] * Uk.conj().T, Uk / np.sqrt(mk)[None, :],
                    U[:, ~keep], mu)


def quotient_from_columns(X: np.ndarray, tol: float = KERNEL_TOL) -> Quotient:
    """Same quotient as ``quotient(X^* X)`` computed from the SVD of ``X``.

    Kernel vectors come out with ``||X v|| ~ eps ||X||`` instead of ``sqrt(eps)``.
    """
    n = X.shape[1]
    U, sv, Vh = np.linalg.svd(X, full_matrices=True)
    s_full = np.zeros(n)
    s_full[: sv.size] = sv
    top = s_full.max() if n else 0.0
    keep = s_full ** 2 > tol * top ** 2
    V = Vh.conj().T
    Vk, sk = V[:, keep], s_full[keep]
    return Quotient(int(keep.sum()), sk[:, None] * Vk.conj().T, Vk / sk[None, :], V[:, ~keep], s_full ** 2)


@dataclass(eq=False)
class TwistedFock:
    """Truncated quotient Fock space, levels ``0..L``, with creation operators ``T_1..T_N``."""

    factor: CPFactor
    twist: TwistWeights
    L: int
    tol: float = KERNEL_TOL
    cap: int = LEVEL_CAP
    columns: list = field(init=False)
    quotients: list = field(init=False)
    offsets: list = field(init=False)
    creation: list = field(init=False)
    kernel_stability: float = field(init=False)

    def __post_init__(self):
        f = self.factor
        self.columns = [level_columns(f, self.twist, k, self.cap) for k in range(self.L + 1)]
        self.quotients = [quotient_from_columns(X, self.tol) for X in self.columns]
        dims = [qq.dim for qq in self.quotients]
        self.offsets = list(np.concatenate([[0], np.cumsum(dims)]))
        total = self.offsets[-1]
        self.creation = []
        worst = 0.0
        for i in range(1, f.N + 1):
            T = np.zeros((total, total), dtype=complex)
            for k in range(self.L):
                raw_k = f.N ** k * f.d
                lo = (i - 1) * raw_k
                Qn, Lk = self.quotients[k + 1].to_quotient, self.quotients[k].lift
                T[self._sl(k + 1), self._sl(k)] = Qn[:, lo:lo + raw_k] @ Lk
                worst = max(worst, self._stability(i, k))
            self.creation.append(T)
        self.kernel_stability = worst
        if worst > 1e-8:
            raise ValueError(f"creation operators are not well defined on the quotient "
                             f"(kernel image {worst:.3e})")

    def _sl(self, k: int) -> slice:
        return slice(self.offsets[k], self.offsets[k + 1])

    def _stability(self, i: int, k: int) -> float:
        """Largest form norm of ``T_i`` applied to a unit raw kernel vector, relative to ``||X_{k+1}||``."""
        K = self.quotients[k].kernel
        if K.shape[1] == 0:
            return 0.0
        Xn = self.columns[k + 1]
        raw_k = self.factor.N ** k * self.factor.d
        img = Xn[:, (i - 1) * raw_k:i * raw_k] @ K
        scale = np.linalg.norm(Xn, 2)
        if scale == 0:
            return 0.0
        return float(np.linalg.norm(img, axis=0).max() / scale)

    @property
    def dim(self) -> int:
        return int(self.offsets[-1])

    @property
    def level_dims(self) -> list[int]:
        return [qq.dim for qq in self.quotients]

    def T(self, i: int) -> np.ndarray:
        return self.creation[i - 1]

    def Tstar(self, i: int) -> np.ndarray:
        return self.creation[i - 1].conj().T

    def level_block(self, expr: np.ndarray, k: int) -> np.ndarray:
        return expr[self._sl(k), self._sl(k)]

    def vacuum_compress(self, expr: np.ndarray) -> np.ndarray:
        """Level-0 block of ``expr`` as a ``d x d`` operator on ``H``."""
        q0 = self.quotients[0]
        return q0.lift @ self.level_block(expr, 0) @ q0.to_quotient


def build_creation(factor: CPFactor, twist: TwistWeights, L: int, tol: float = KERNEL_TOL) -> TwistedFock:
    return TwistedFock(factor, twist, L, tol)


def vacuum_compress(fock: TwistedFock, expr: np.ndarray) -> np.ndarray:
    return fock.vacuum_compress(expr)


def cuntz_toeplitz_factor(N: int, d: int, depth: int) -> CPFactor:
    """Left creation operators on the full Fock space over ``C^N`` (levels ``0..depth``) tensor ``C^d``.

    ``R_i^* R_j = delta_ij`` on levels below ``depth``, so ``Phi(E_ij) = delta_ij I_d``.
    """
    sizes = [N ** k * d for k in range(depth + 1)]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    D = int(offs[-1])
    R = []
    for i in range(N):
        Ri = np.zeros((D, D), dtype=complex)
        for k in range(depth):
            n = sizes[k]
            rows = offs[k + 1] + i * n + np.arange(n)
            cols = offs[k] + np.arange(n)
            Ri[rows, cols] = 1.0
        R.append(Ri)
    return CPFactor(N, d, tuple(R))


def random_cp_factor(rng: np.random.Generator, N: int, d: int) -> CPFactor:
    R = [(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2 * d) for _ in range(N)]
    return CPFactor(N, d, tuple(R))


def subband_factor(ops: Sequence[TruncatedOperator]) -> CPFactor:
    """Factor whose letters act by the given truncated operators; ``Phi(E_ij) = S_i^* S_j``."""
    d = ops[0].matrix.shape[0]
    return CPFactor(len(ops), d, tuple(op.matrix for op in ops))


def _interior_positions(ops: Sequence[TruncatedOperator]) -> np.ndarray:
    common = frozenset.intersection(*(op.interior for op in ops))
    return ops[0].positions(common)


def _symbol_residuals(V: np.ndarray, bank: FilterBank, tr, i: int, j: int, pos) -> dict:
    A = polyphase_matrix(bank)
    out = {}
    for o in ORDERINGS:
        X = multiplication_operator(polyphase_symbol(A, i, j, o), tr).matrix
        out[o] = float(np.abs((V - X)[np.ix_(pos, pos)]).max())
    return out


@dataclass
class TheoremReport:
    """Residual tables of one theorem instance; ``asserted`` maps gating residual names to tolerances."""

    residuals: dict
    tables: dict
    asserted: dict
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.residuals[k] < t for k, t in self.asserted.items())

    @property
    def failures(self) -> list[str]:
        return [k for k, t in self.asserted.items() if not self.residuals[k] < t]

    def to_dict(self) -> dict:
        def conv(v):
            if isinstance(v, np.ndarray):
                v = v.tolist()
            if isinstance(v, complex):
                return [v.real, v.imag]
            if isinstance(v, dict):
                return {str(k): conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            if isinstance(v, np.generic):
                return v.item() if not np.iscomplexobj(v) else [float(v.real), float(v.imag)]
            return v
        return {"residuals": conv(self.residuals), "tables": conv(self.tables),
                "asserted": dict(self.asserted), "passed": self.passed,
                "extra": conv(self.extra)}


def _doubled_fock(S, St, twist: TwistWeights, L: int) -> TwistedFock:
    return TwistedFock(subband_factor(list(S) + list(St)), twist, L)


def vacuum_tables(fock: TwistedFock, N: int) -> dict:
    """Vacuum compressions of the mixed products used by both theorem checks.

    Letters ``1..N`` are ``T_i`` and ``N+1..2N`` are the tilde operators.
    """
    vc = fock.vacuum_compress
    T = lambda i: fock.T(i)  # noqa: E731
    Ts = lambda i: fock.Tstar(i)  # noqa: E731
    tabs = {"TsT": {}, "TtsTt": {}, "car": {}, "C": {}, "TtsTt_rev": {}}
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            tabs["TsT"][(i, j)] = vc(Ts(i) @ T(j))
            tabs["TtsTt"][(i, j)] = vc(Ts(N + i) @ T(N + j))
            tabs["TtsTt_rev"][(i, j)] = vc(Ts(N + j) @ T(N + i))
            tabs["car"][(i, j)] = vc(T(i) @ Ts(N + j)) + vc(Ts(N + j) @ T(i))
            tabs["C"][(i, j)] = vc(T(N + i) @ Ts(j)) - vc(Ts(j) @ T(N + i))
    return tabs


def check_thm_con2(bank: FilterBank, bank_tilde: FilterBank, M: int = 8, L: int = 3,
                   tol: float = 1e-10, sample_count: int = 64, seed: int = 0) -> TheoremReport:
    """Doubled wavelet system on ``F_{2N}(H, P)`` with ``P = [X_a^* X_b]``, ``X = (S, S~)``.

    Asserted: identities 1 and 2 (vacuum ``T^*T`` against ``S^*S`` and against the
    best polyphase ordering on the interior), the CAR combination in the Haar
    self-dual case, and the doubled loop-matrix identity with the ``1/sqrt 2`` scaling.
    """
    N = bank.N
    S, St = subband_family(bank, M), subband_family(bank_tilde, M)
    tr = S[0].domain
    fock = _doubled_fock(S, St, TwistWeights.untwisted(2 * N), L)
    tabs = vacuum_tables(fock, N)
    pos = _interior_positions(S + St)
    res = {"identity1_direct": 0.0, "identity2_direct": 0.0}
    sym1 = {o: 0.0 for o in ORDERINGS}
    sym2 = {o: 0.0 for o in ORDERINGS}
    for i in range(N):
        for j in range(N):
            V1, V2 = tabs["TsT"][(i + 1, j + 1)], tabs["TtsTt"][(i + 1, j + 1)]
            res["identity1_direct"] = max(res["identity1_direct"],
                                          float(np.abs(V1 - S[i].matrix.conj().T @ S[j].matrix).max()))
            res["identity2_direct"] = max(res["identity2_direct"],
                                          float(np.abs(V2 - St[i].matrix.conj().T @ St[j].matrix).max()))
            for o, v in _symbol_residuals(V1, bank, tr, i, j, pos).items():
                sym1[o] = max(sym1[o], v)
            for o, v in _symbol_residuals(V2, bank_tilde, tr, i, j, pos).items():
                sym2[o] = max(sym2[o], v)
    res["identity1_symbol"] = min(sym1.values())
    res["identity2_symbol"] = min(sym2.values())
    car = 0.0
    for (i, j), V in tabs["car"].items():
        target = np.eye(len(pos)) if i == j else 0
        car = max(car, float(np.abs(V[np.ix_(pos, pos)] - target).max()))
    res["car_vacuum"] = car
    A, At = polyphase_matrix(bank), polyphase_matrix(bank_tilde)
    B, Bt = build_doubled_matrix(A) * (1 / np.sqrt(2)), build_doubled_matrix(At) * (1 / np.sqrt(2))
    res["car_loop"] = check_car_identity(B, Bt, sample_count, tol, seed).residual
    res["biorthogonality"] = check_biorthogonality(A, At, sample_count, tol, seed).residual
    self_dual = bank_tilde is bank or all(a == b for a, b in zip(bank.filters, bank_tilde.filters))
    asserted = {k: tol for k in ("identity1_direct", "identity2_direct", "identity1_symbol",
                                 "identity2_symbol", "car_loop")}
    if self_dual and N == 2:
        asserted["car_vacuum"] = tol
    tables = {"car_vacuum_diag": [float(np.abs(tabs["car"][(i, i)][np.ix_(pos, pos)]
                                               - np.eye(len(pos))).max()) for i in range(1, N + 1)],
              "identity1_orderings": sym1, "identity2_orderings": sym2,
              "level_dims": fock.level_dims}
    return TheoremReport(res, tables, asserted,
                         {"kernel_stability": fock.kernel_stability, "interior": len(pos)})


def _osc_run(bank: FilterBank, q: float | None, M: int, L: int):
    """Doubled run with q-deformed tilde letters; ``q=None`` is the untwisted self-dual configuration."""
    N = bank.N
    S = subband_family(bank, M)
    if q is None:
        St, lam = S, (1.0,) * (2 * N)
    else:
        St = subband_family(q_deformed_bank(bank, q), M)
        lam = (1.0,) * N + TwistWeights.q_twist(N, q).lam
    fock = _doubled_fock(S, St, TwistWeights(lam), L)
    return S, St, fock, vacuum_tables(fock, N)


def check_thm_osc1(bank: FilterBank, q: float, M: int = 8, L: int = 3, tol: float = 1e-10,
                   q_limit: float = 1 - 1e-9, limit_tol: float = 1e-8,
                   sample_count: int = 64, seed: int = 0) -> TheoremReport:
    """q-deformed doubled system with the built-in twist on the tilde letters.

    Asserted: (iii) the vacuum matrix of ``T~_j^* T~_i`` is diagonal in the letters
    and its letter-trace equals ``(1-q^{2N})/(1-q^2)`` on the interior block; (iv) at
    ``q_limit`` every vacuum table matches the untwisted self-dual run within
    ``limit_tol``.  The commutator ``T~_i T_j^* - T_j^* T~_i`` is reported next to
    the candidate right-hand sides ``[N]_q`` and ``q^N - q^-N`` but not asserted.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    N = bank.N
    S, St, fock, tabs = _osc_run(bank, q, M, L)
    pos = _interior_positions(S + St)
    blk = lambda V: V[np.ix_(pos, pos)]  # noqa: E731
    expected = (1 - q ** (2 * N)) / (1 - q ** 2)
    trace = sum(blk(tabs["TtsTt_rev"][(i, i)]) for i in range(1, N + 1))
    offdiag = max((float(np.abs(blk(tabs["TtsTt_rev"][(i, j)])).max())
                   for i in range(1, N + 1) for j in range(1, N + 1) if i != j), default=0.0)
    res = {"vacuum_twist_trace": float(np.abs(trace - expected * np.eye(len(pos))).max()),
           "vacuum_twist_offdiag": offdiag}
    # q -> 1 continuity against the self-dual untwisted configuration
    _, _, _, lim = _osc_run(bank, q_limit, M, L)
    _, _, _, ref = _osc_run(bank, None, M, L)
    cont = 0.0
    for name in ("TsT", "TtsTt", "car", "C"):
        for key in ref[name]:
            cont = max(cont, float(np.abs(lim[name][key] - ref[name][key]).max()))
    res["q_limit_continuity"] = cont
    # main q-commutator identity: report only
    Nq = (1 - q ** N) / (1 - q)
    diag = [complex(np.mean(np.diag(blk(tabs["C"][(i, i)])))) for i in range(1, N + 1)]
    C_off = max((float(np.abs(blk(tabs["C"][(i, j)])).max())
                 for i in range(1, N + 1) for j in range(1, N + 1) if i != j), default=0.0)
    A = polyphase_matrix(bank)
    At = q_polyphase_matrix(q_deformed_bank(bank, q), q)
    extra = {
        "commutator_diagonal_mean": diag,
        "commutator_offdiag_max": C_off,
        "candidates": {"[N]_q": Nq, "q^N-q^-N": q ** N - q ** (-N), "measured": diag},
        "expected_twist_trace": expected,
        "q_polyphase_gram_spectrum": gram_spectrum(At, sample_count, seed),
        "generalized_biorthogonality": _generalized_biorthogonality(A, At, sample_count, seed),
        "kernel_stability": fock.kernel_stability,
        "interior": len(pos),
    }
    tables = {"level_dims": fock.level_dims}
    asserted = {"vacuum_twist_trace": tol, "vacuum_twist_offdiag": tol, "q_limit_continuity": limit_tol}
    return TheoremReport(res, tables, asserted, extra)


def _generalized_biorthogonality(A, At, sample_count: int, seed: int) -> dict:
    """max_z |sum_k A_ik conj(A~_jk) - delta_ij| for the raw and the ``1/N``-rescaled ``A~``."""
    from .filterbank import circle_samples

    zs = circle_samples(sample_count, seed)
    a, at = A.evaluate(zs), At.evaluate(zs)
    out = {}
    n = A.shape[0]
    for name, scale in (("raw", 1.0), ("over_N", 1.0 / n)):
        prod = a @ np.conj(np.swapaxes(at * scale, -1, -2)) - np.eye(n)
        out[name] = float(np.abs(prod).max())
    return out
