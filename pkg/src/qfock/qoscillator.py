"""q-brackets and truncated ladder operators built from filter coefficients ``b_k``.

Basis ``e_0 .. e_K``; column ``k`` of a matrix is the image of ``e_k``.

    a_minus e_k = q/(1-q) * b_k q^{-k s}     e_{k-1}   (a_minus e_0 = 0)
    a_plus  e_k = q/(1+q) * b_k q^{-(k+1)s}  e_{k+1}   (a_plus e_K = 0, truncation)
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

SIGMA_CONVENTIONS = ("Ns", "s/N")


def qbracket(s, q):
    """``[s]_q = (1 - q^s) / (1 - q)``, equal to ``s`` in the limit ``q -> 1``.

    Exact when ``q`` is a :class:`~fractions.Fraction` and ``s`` an integer.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    if isinstance(q, Fraction) and isinstance(s, int):
        return s if q == 1 else (1 - q ** s) / (1 - q)
    if abs(1 - q) < 1e-12:
        return s
    return (1 - q ** s) / (1 - q)


def _coeff_list(b, K: int) -> np.ndarray:
    if isinstance(b, Mapping):
        return np.array([complex(b.get(k, 0)) for k in range(K + 1)])
    b = list(b)
    return np.array([complex(b[k]) if k < len(b) else 0j for k in range(K + 1)])


@dataclass(frozen=True, eq=False)
class LadderSystem:
    K: int
    b: np.ndarray
    q: float
    s: float
    a_minus: np.ndarray
    a_plus: np.ndarray
    number_op: np.ndarray

    def f_of_number(self, f: Callable[[int], float], shift: int = 0) -> np.ndarray:
        """Diagonal ``f(N + shift)``."""
        return np.diag([f(k + shift) for k in range(self.K + 1)]).astype(complex)


def build_ladder(K: int, b, q: float, s: float) -> LadderSystem:
    if K < 2:
        raise ValueError("truncation K must be >= 2")
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    bb = _coeff_list(b, K)
    am = np.zeros((K + 1, K + 1), dtype=complex)
    ap = np.zeros((K + 1, K + 1), dtype=complex)
    for k in range(1, K + 1):
        am[k - 1, k] = q / (1 - q) * bb[k] * q ** (-k * s)
    for k in range(K):
        ap[k + 1, k] = q / (1 + q) * bb[k] * q ** (-(k + 1) * s)
    return LadderSystem(K, bb, q, s, am, ap, np.diag(np.arange(K + 1)).astype(complex))


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch {A.shape} vs {B.shape}")
    return A @ B - B @ A


@dataclass
class ShiftReport:
    minus_residual: float
    plus_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.minus_residual, self.plus_residual) < self.tol


def check_shift_relations(sys: LadderSystem, f: Callable[[int], float], tol: float = 1e-13) -> ShiftReport:
    """``f(N) a^- = a^- f(N-1)`` and ``f(N) a^+ = a^+ f(N+1)`` off the truncation edge ``k = K``."""
    fN = sys.f_of_number(f)
    lhs_m = fN @ sys.a_minus - sys.a_minus @ sys.f_of_number(f, -1)
    lhs_p = fN @ sys.a_plus - sys.a_plus @ sys.f_of_number(f, +1)
    keep = slice(0, sys.K)
    rel = max(1.0, float(np.abs(fN).max()))
    return ShiftReport(float(np.abs(lhs_m[keep, keep]).max()) / rel,
                       float(np.abs(lhs_p[keep, keep]).max()) / rel, tol)


def m0_symbol(b, q: float, s) -> complex:
    """``m_0(s) = sum_k b_k q^{-k s}``."""
    items = b.items() if isinstance(b, Mapping) else enumerate(b)
    return complex(sum(complex(v) * q ** (-k * s) for k, v in items))


def sigma(s, N: int, convention: str):
    if convention == "Ns":
        return N * s
    if convention == "s/N":
        return s / N
    raise ValueError(f"unknown sigma convention {convention!r}")


def energy_symbol(m0_coeffs, s: float, N: int, sigma_convention: str = "Ns", q: float = 0.5) -> complex:
    """``m_0(s)^2 + m_0(sigma(s))^2``."""
    return m0_symbol(m0_coeffs, q, s) ** 2 + m0_symbol(m0_coeffs, q, sigma(s, N, sigma_convention)) ** 2


def ladder_f(b, q: float, s: float, K: int) -> np.ndarray:
    """``f(0) = 0``, ``f(k+1) - f(k) = b_k q^{-2ks} [s]_{q^-2}`` for ``k = 0..K``."""
    bb = _coeff_list(b, K)
    inc = bb * q ** (-2.0 * np.arange(K + 1) * s) * qbracket(s, q ** -2)
    return np.concatenate([[0], np.cumsum(inc)])


@dataclass
class SymbolReport:
    diagonal: np.ndarray
    scalar: complex
    discrepancy: np.ndarray
    plus_minus: np.ndarray
    minus_plus: np.ndarray
    m0_sq: complex
    m0_sigma_sq: dict
    f_increments: np.ndarray
    bracket: complex
    bracket_limit_gap: float

    def to_dict(self) -> dict:
        c = lambda v: [float(np.real(v)), float(np.imag(v))]  # noqa: E731
        return {
            "diagonal": [c(v) for v in self.diagonal],
            "scalar": c(self.scalar),
            "max_discrepancy": float(np.abs(self.discrepancy).max()),
            "plus_minus_diagonal": [c(v) for v in self.plus_minus],
            "minus_plus_diagonal": [c(v) for v in self.minus_plus],
            "m0_sq": c(self.m0_sq),
            "m0_sigma_sq": {k: c(v) for k, v in self.m0_sigma_sq.items()},
            "f_increments": [c(v) for v in self.f_increments],
            "bracket": c(self.bracket),
            "bracket_limit_gap": self.bracket_limit_gap,
        }


def check_commutation_vs_symbol(sys: LadderSystem, N: int = 2) -> SymbolReport:
    """Report the diagonal of ``[a^-, a^+]`` against ``m_0(s)^2 [s]_{q^-2}``; nothing is asserted."""
    D = np.diag(commutator(sys.a_minus, sys.a_plus))
    br = qbracket(sys.s, sys.q ** -2)
    m0 = m0_symbol(sys.b, sys.q, sys.s)
    scalar = m0 ** 2 * br
    pm = np.diag(sys.a_plus @ sys.a_minus)
    mp = np.diag(sys.a_minus @ sys.a_plus)
    msig = {c: m0_symbol(sys.b, sys.q, sigma(sys.s, N, c)) ** 2 for c in SIGMA_CONVENTIONS}
    f = ladder_f(sys.b, sys.q, sys.s, sys.K)
    return SymbolReport(D, scalar, D - scalar, pm, mp, m0 ** 2, msig, np.diff(f)[: sys.K + 1],
                        br, float(abs(br - sys.s)))


@dataclass
class PositionMomentum:
    X: np.ndarray
    P: np.ndarray
    x_asymmetry: float
    p_asymmetry: float
    structure_residual: float


def position_momentum(sys: LadderSystem) -> PositionMomentum:
    """``X = (a^+ + a^-)/sqrt 2``, ``P = (a^- - a^+)/sqrt 2``; self-adjointness is reported only.

    ``structure_residual`` is relative to the largest ladder entry.
    """
    h = np.sqrt(2) / 2
    X = h * (sys.a_plus + sys.a_minus)
    P = h * (sys.a_minus - sys.a_plus)
    r = np.sqrt(2)
    scale = max(1.0, float(np.abs(sys.a_minus).max()), float(np.abs(sys.a_plus).max()))
    structure = max(np.abs((X + P) / r - sys.a_minus).max(), np.abs((X - P) / r - sys.a_plus).max()) / scale
    return PositionMomentum(X, P, float(np.abs(X - X.conj().T).max()),
                            float(np.abs(P + P.conj().T).max()), float(structure))


def export_diagonal_csv(values: Sequence[complex], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "re", "im"])
        for k, v in enumerate(values):
            w.writerow([k, repr(float(np.real(v))), repr(float(np.imag(v)))])
