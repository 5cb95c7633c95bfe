"""Mellin transform of step functions on (0, inf) and its coordinate-change rules."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

S_ZERO = 1e-14
S_SERIES = 1e-6


@dataclass(frozen=True, eq=False)
class GeoStepFunction:
    """Piecewise constant ``f = sum c * chi_(a, b)`` with disjoint pieces, ``0 < a < b``."""

    pieces: tuple[tuple[float, float, complex], ...] = ()

    def __post_init__(self):
        ps = sorted(((float(a), float(b), complex(c)) for a, b, c in self.pieces if c != 0),
                    key=lambda p: p[0])
        for a, b, _ in ps:
            if not 0 < a < b:
                raise ValueError(f"invalid piece ({a}, {b}): need 0 < a < b")
        for (_, b0, _), (a1, _, _) in zip(ps, ps[1:]):
            if a1 < b0:
                raise ValueError(f"overlapping pieces at {a1} < {b0}")
        object.__setattr__(self, "pieces", tuple(ps))

    @classmethod
    def indicator(cls, a: float, b: float, c: complex = 1.0) -> "GeoStepFunction":
        return cls(((a, b, c),))

    @property
    def is_zero(self) -> bool:
        return not self.pieces

    def support(self) -> tuple[float, float] | None:
        if not self.pieces:
            return None
        return self.pieces[0][0], self.pieces[-1][1]

    def breakpoints(self) -> list[float]:
        return sorted({x for a, b, _ in self.pieces for x in (a, b)})

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for a, b, c in self.pieces:
            out = np.where((x > a) & (x < b), c, out)
        return out

    def integral(self, lo: float, hi: float) -> complex:
        """``int_lo^hi f(x) dx``."""
        total = 0j
        for a, b, c in self.pieces:
            left, right = max(a, lo), min(b, hi)
            if right > left:
                total += c * (right - left)
        return total

    def inner(self, other: "GeoStepFunction") -> complex:
        """L2(dx) inner product, linear in ``self``."""
        total = 0j
        for a, b, c in self.pieces:
            for a2, b2, c2 in other.pieces:
                left, right = max(a, a2), min(b, b2)
                if right > left:
                    total += c * np.conj(c2) * (right - left)
        return total

    def norm_sq(self) -> float:
        return float(sum(abs(c) ** 2 * (b - a) for a, b, c in self.pieces))

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))

    def __mul__(self, scalar) -> "GeoStepFunction":
        return GeoStepFunction(tuple((a, b, c * scalar) for a, b, c in self.pieces))

    __rmul__ = __mul__

    def __neg__(self) -> "GeoStepFunction":
        return self * -1

    def __add__(self, other: "GeoStepFunction") -> "GeoStepFunction":
        nodes = sorted(set(self.breakpoints()) | set(other.breakpoints()))
        pieces = []
        for a, b in zip(nodes, nodes[1:]):
            mid = 0.5 * (a + b)
            c = complex(self(mid)) + complex(other(mid))
            if c != 0:
                pieces.append((a, b, c))
        return GeoStepFunction(tuple(pieces))

    def __sub__(self, other: "GeoStepFunction") -> "GeoStepFunction":
        return self + (-other)

    def to_rows(self) -> list[tuple[float, float, float, float]]:
        """Serialised form ``(a, b, Re c, Im c)``."""
        return [(a, b, c.real, c.imag) for a, b, c in self.pieces]

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]]) -> "GeoStepFunction":
        return cls(tuple((a, b, complex(re, im)) for a, b, re, im in rows))


def _power_diff_over_s(a: float, b: float, s: complex) -> complex:
    """``(b^s - a^s) / s = a^s expm1(s ln(b/a)) / s`` without cancellation near ``s = 0``."""
    L = np.log(b / a)
    if abs(s) < S_ZERO:
        return complex(L)
    if abs(s) < S_SERIES:
        sL = s * L
        return complex(a ** s * L * (1 + sL / 2 + sL ** 2 / 6 + sL ** 3 / 24))
    return complex(a ** s * np.expm1(s * L) / s)


def mellin_exact(f: GeoStepFunction, s: complex) -> complex:
    """``M(f; s) = int_0^inf x^{s-1} f(x) dx = sum c (b^s - a^s)/s``."""
    s = complex(s)
    return complex(sum(c * _power_diff_over_s(a, b, s) for a, b, c in f.pieces))


def mellin_numeric(xs: Sequence[float], fs: Sequence[complex], s: complex) -> complex:
    """Trapezoid rule in ``u = ln x`` for ``int e^{s u} f(e^u) du``."""
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=complex)
    if xs.size < 2 or xs.size != fs.size:
        raise ValueError("need at least 2 samples with matching values")
    if np.any(xs <= 0) or np.any(np.diff(xs) <= 0):
        raise ValueError("sample points must be positive and strictly increasing")
    u = np.log(xs)
    g = np.exp(complex(s) * u) * fs
    return complex(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(u)))


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    return np.exp(np.linspace(np.log(lo), np.log(hi), n))


def sample_piece(f: GeoStepFunction, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Log grid over the support of a single-piece function, endpoints included."""
    if len(f.pieces) != 1:
        raise ValueError("sample_piece needs a single-piece function")
    a, b, c = f.pieces[0]
    return log_grid(a, b, n), np.full(n, c)


def dilate(f: GeoStepFunction, a: float) -> GeoStepFunction:
    """``x -> f(a x)``."""
    if a <= 0:
        raise ValueError("dilation factor must be positive")
    return GeoStepFunction(tuple((p / a, r / a, c) for p, r, c in f.pieces))


def power_substitute(f: GeoStepFunction, a: float) -> GeoStepFunction:
    """``x -> f(x^a)``."""
    if a <= 0:
        raise ValueError("exponent must be positive")
    return GeoStepFunction(tuple((p ** (1 / a), r ** (1 / a), c) for p, r, c in f.pieces))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def mellin_weighted(f: GeoStepFunction, a: float, s: complex) -> complex:
    """``M(x^a f(x); s)`` by Gauss-Legendre quadrature in ``ln x`` on each piece.

    Independent of the closed form used by :func:`mellin_exact`.
    """
    total = 0j
    for p, r, c in f.pieces:
        lo, hi = np.log(p), np.log(r)
        u = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
        total += c * 0.5 * (hi - lo) * np.sum(_GL_WEIGHTS * np.exp((s + a) * u))
    return complex(total)


@dataclass
class TransformReport:
    residuals: dict
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    @property
    def passed(self) -> bool:
        return bool(self.max_residual < self.tol)

    def to_dict(self) -> dict:
        return {"residuals": self.residuals, "tol": self.tol, "passed": self.passed}


def _rel(x: complex, y: complex) -> float:
    return float(abs(x - y) / max(1.0, abs(y)))


def check_transform_identities(f: GeoStepFunction, a: float, s: complex,
                               tol: float = 1e-12) -> TransformReport:
    """Residuals of the dilation, power and weight rules, relative to ``max(1, |rhs|)``."""
    if a <= 0:
        raise ValueError("a must be positive")
    s = complex(s)
    res = {
        "dilation": _rel(mellin_exact(dilate(f, a), s), a ** (-s) * mellin_exact(f, s)),
        "power": _rel(mellin_exact(power_substitute(f, a), s), mellin_exact(f, s / a) / a),
        "weight": _rel(mellin_weighted(f, a, s), mellin_exact(f, s + a)),
    }
    return TransformReport(res, tol)


def random_step_function(rng: np.random.Generator, max_pieces: int = 4,
                         lo: float = 0.05, hi: float = 20.0) -> GeoStepFunction:
    """Random complex step function with breakpoints log-uniform in (lo, hi)."""
    n = int(rng.integers(1, max_pieces + 1))
    nodes = np.sort(np.exp(rng.uniform(np.log(lo), np.log(hi), 2 * n)))
    pieces = []
    for k in range(n):
        a, b = nodes[2 * k], nodes[2 * k + 1]
        if b > a:
            pieces.append((a, b, complex(rng.standard_normal(), rng.standard_normal())))
    return GeoStepFunction(tuple(pieces))
