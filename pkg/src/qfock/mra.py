"""Geometric (Mellin) multiresolution ladder built on the Haar indicator of (q, 1).

Level ``j`` is spanned by the indicators of the intervals
``(q^{(1-k) N^j}, q^{-k N^j})``, ``k`` an integer.  Level 0 holds
``Phi(q^k x)`` with ``Phi = chi_(q,1)``; the scaling operator
``U xi(x) = xi(x^N)/sqrt(N)`` maps level ``j`` onto level ``j-1``, so the levels
decrease as ``j`` grows (level ``j`` is contained in level ``j-1``).

Node exponents ``log_q x`` are kept as exact fractions ``k N^j`` so that a node
shared by two levels is the same float on both.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .mellin import GeoStepFunction, dilate, mellin_exact, power_substitute


@dataclass(frozen=True)
class MraConfig:
    q: float
    N: int
    k_range: tuple[int, int] = (-8, 8)
    j_range: tuple[int, int] = (0, 2)

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")
        if self.N < 2:
            raise ValueError("N must be >= 2")
        for lo, hi in (self.k_range, self.j_range):
            if lo > hi:
                raise ValueError("ranges must be nonempty")

    @property
    def ks(self) -> range:
        return range(self.k_range[0], self.k_range[1] + 1)

    @property
    def js(self) -> range:
        return range(self.j_range[0], self.j_range[1] + 1)


@dataclass
class ResolutionElement:
    """``sum_k coeffs[k] * g_{j,k}`` with ``g_{j,k}`` the normalized level-j indicator."""

    level: int
    coeffs: dict[int, complex] = field(default_factory=dict)


def _scale(N: int, j: int) -> Fraction:
    return Fraction(N) ** j


def node(q: float, exponent: Fraction) -> float:
    return q ** float(exponent)


def level_interval(q: float, N: int, j: int, k: int) -> tuple[float, float]:
    sc = _scale(N, j)
    return node(q, (1 - k) * sc), node(q, -k * sc)


def level_basis_fn(q: float, N: int, j: int, k: int, normalized: bool = True) -> GeoStepFunction:
    a, b = level_interval(q, N, j, k)
    c = 1 / math.sqrt(b - a) if normalized else 1.0
    return GeoStepFunction.indicator(a, b, c)


def haar_basis_fn(q: float, k: int, normalized: bool = False) -> GeoStepFunction:
    """``x -> Phi(q^k x)`` on ``(q^{1-k}, q^{-k})``; normalized to unit L2 norm on request."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    return level_basis_fn(q, 2, 0, k, normalized)


def level_cover(lo: float, hi: float, q: float, N: int, j: int) -> tuple[int, int]:
    """Smallest index range whose level-j intervals cover ``(lo, hi)``."""
    sc = float(_scale(N, j))
    u_lo, u_hi = math.log(lo) / math.log(q), math.log(hi) / math.log(q)
    k_lo = math.floor(1 - u_lo / sc + 1e-9)
    k_hi = math.ceil(1 - u_hi / sc - 1e-9) - 1
    return min(k_lo, k_hi), max(k_lo, k_hi)


@dataclass
class GramReport:
    matrix: np.ndarray
    normalized: bool

    @property
    def offdiag_max(self) -> float:
        G = self.matrix
        return float(np.abs(G - np.diag(np.diag(G))).max()) if G.size else 0.0

    @property
    def diag_deviation(self) -> float:
        return float(np.abs(np.diag(self.matrix) - 1).max())

    @property
    def passed(self) -> bool:
        ok = self.offdiag_max == 0.0
        return ok and (self.diag_deviation < 1e-14 if self.normalized else True)


def gram_orthonormality(q: float, k_range: tuple[int, int], normalized: bool = True,
                        N: int = 2, j: int = 0) -> GramReport:
    ks = range(k_range[0], k_range[1] + 1)
    fs = [level_basis_fn(q, N, j, k, normalized) for k in ks]
    G = np.array([[f.inner(g) for g in fs] for f in fs])
    return GramReport(G, normalized)


def scaling_operator_U(f: GeoStepFunction, N: int) -> GeoStepFunction:
    """``U f(x) = f(x^N) / sqrt(N)``."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return power_substitute(f, N) * (1 / math.sqrt(N))


def dilation_operator_T(f: GeoStepFunction, q: float) -> GeoStepFunction:
    """``T f(x) = f(q x)``."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    return dilate(f, q)


@dataclass
class Projection:
    element: ResolutionElement
    approximation: GeoStepFunction
    error: float


def _project(f: GeoStepFunction, q: float, N: int, j: int, ks: Sequence[int]) -> Projection:
    coeffs: dict[int, complex] = {}
    pieces = []
    for k in ks:
        a, b = level_interval(q, N, j, k)
        integral = f.integral(a, b)
        if integral != 0:
            coeffs[k] = integral / math.sqrt(b - a)
            pieces.append((a, b, integral / (b - a)))
    approx = GeoStepFunction(tuple(pieces))
    return Projection(ResolutionElement(j, coeffs), approx, (f - approx).norm())


def project_onto_level(f: GeoStepFunction, j: int, cfg: MraConfig) -> Projection:
    """Orthogonal L2(dx) projection onto the level-j indicators with ``k`` in ``cfg.k_range``."""
    sup = f.support()
    if sup is not None:
        lo, hi = level_cover(*sup, cfg.q, cfg.N, j)
        if lo < cfg.k_range[0] or hi > cfg.k_range[1]:
            raise ValueError(f"support {sup} needs level-{j} indices {lo}..{hi}, "
                             f"outside k_range {cfg.k_range}")
    return _project(f, cfg.q, cfg.N, j, cfg.ks)


@dataclass
class NestingReport:
    max_residual: float
    residuals: dict
    boundary: list

    def to_dict(self) -> dict:
        return {"max_residual": self.max_residual,
                "residuals": {f"{j},{k}": v for (j, k), v in self.residuals.items()},
                "boundary": [list(b) for b in self.boundary]}


def nesting_residual(cfg: MraConfig) -> NestingReport:
    """``||g - P_{j-1} g|| / ||g||`` for every level-j basis function, ``j > min(j_range)``."""
    residuals, boundary = {}, []
    for j in cfg.js:
        if j == cfg.j_range[0]:
            continue
        for k in cfg.ks:
            g = level_basis_fn(cfg.q, cfg.N, j, k)
            try:
                p = project_onto_level(g, j - 1, cfg)
            except ValueError:
                boundary.append((j, k))
                continue
            residuals[(j, k)] = p.error / g.norm()
    return NestingReport(max(residuals.values(), default=0.0), residuals, boundary)


@dataclass
class LadderDecay:
    coarse_levels: list[int]
    coarse_norms: list[float]
    fine_levels: list[int]
    fine_errors: list[float]

    @staticmethod
    def _trend(v: Sequence[float]) -> int:
        if len(v) < 2:
            return 0
        return int(np.sign(np.polyfit(np.arange(len(v)), v, 1)[0]))

    @property
    def coarse_trend(self) -> int:
        return self._trend(self.coarse_norms)

    @property
    def fine_trend(self) -> int:
        return self._trend(self.fine_errors)

    @property
    def fine_strictly_decreasing(self) -> bool:
        e = self.fine_errors
        return all(b < a for a, b in zip(e, e[1:]))

    def to_dict(self) -> dict:
        return {"coarse_levels": self.coarse_levels, "coarse_norms": self.coarse_norms,
                "fine_levels": self.fine_levels, "fine_errors": self.fine_errors,
                "coarse_trend": self.coarse_trend, "fine_trend": self.fine_trend}


def ladder_decay(f: GeoStepFunction, cfg: MraConfig, levels: int = 4, start: int = 0) -> LadderDecay:
    """``||P_j f||`` for ``j = start, start+1, ...`` and ``||f - P_j f||`` for ``j = start, start-1, ...``.

    Each projection uses the index range covering the support of ``f``.
    """
    def proj(j):
        sup = f.support()
        if sup is None:
            return Projection(ResolutionElement(j), GeoStepFunction(), 0.0)
        lo, hi = level_cover(*sup, cfg.q, cfg.N, j)
        return _project(f, cfg.q, cfg.N, j, range(lo, hi + 1))

    up = list(range(start, start + levels))
    down = list(range(start, start - levels, -1))
    return LadderDecay(up, [proj(j).approximation.norm() for j in up],
                       down, [proj(j).error for j in down])


def wave_operator(f: GeoStepFunction, s: complex, q: float, k_range: tuple[int, int]) -> GeoStepFunction:
    """``sum_k M(f(q^k x); s) Phi(q^k x)`` over the finite index window."""
    pieces = []
    for k in range(k_range[0], k_range[1] + 1):
        c = mellin_exact(dilate(f, q ** k), s)
        a, b, _ = haar_basis_fn(q, k).pieces[0]
        pieces.append((a, b, c))
    return GeoStepFunction(tuple(pieces))


def wave_coefficients(f: GeoStepFunction, s: complex, q: float, k_range: tuple[int, int]) -> dict[int, complex]:
    w = wave_operator(f, s, q, k_range)
    out = {}
    for k in range(k_range[0], k_range[1] + 1):
        a, b = level_interval(q, 2, 0, k)
        out[k] = w.integral(a, b) / (b - a)
    return out


@dataclass
class IntertwiningReport:
    left: dict
    right: dict
    residual: float

    def to_dict(self) -> dict:
        return {"residual": self.residual,
                "left": {str(l): [v.real, v.imag] for l, v in sorted(self.left.items())},
                "right": {str(l): [v.real, v.imag] for l, v in sorted(self.right.items())}}


def intertwining_residual(f: GeoStepFunction, s: complex, a_coeffs: Mapping[int, complex],
                          cfg: MraConfig) -> IntertwiningReport:
    """Coefficient form of ``U W = W S`` against the family ``Phi(q^l x^N)``.

    Left: the double sum over ``k`` in the window and ``j`` in the support of
    ``a``, with weight ``q^{-ksN}`` taken from the Mellin transform of the
    dilate ``f(q^{k N^2} x)`` at ``s/N`` and binned at ``l = kN + j``.
    Right: the reindexed single sum ``sum_k a_{l-kN} q^{-ls} M(f; s/N)`` in
    closed form.  ``S`` carries the same ``1/sqrt(N)`` as ``U``.
    """
    s = complex(s)
    q, N = cfg.q, cfg.N
    a = {int(j): complex(v) for j, v in a_coeffs.items() if v != 0}
    left: dict[int, complex] = {}
    for k in cfg.ks:
        mk = mellin_exact(dilate(f, q ** (k * N * N)), s / N)
        for j, aj in a.items():
            l = k * N + j
            left[l] = left.get(l, 0) + mk * q ** (-s * j) * aj / math.sqrt(N)
    m0 = mellin_exact(f, s / N)
    right: dict[int, complex] = {}
    for l in left:
        acc = sum(a.get(l - k * N, 0) for k in cfg.ks)
        right[l] = acc * q ** (-l * s) * m0 / math.sqrt(N)
    scale = max([1.0] + [abs(v) for v in right.values()])
    resid = max((abs(left[l] - right[l]) for l in left), default=0.0) / scale
    return IntertwiningReport(left, right, float(resid))


@dataclass
class FilterExtraction:
    residuals: list[float]
    symbols: list[complex]

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def level_expansion(xi_coeffs: Mapping[int, complex], q: float, N: int) -> GeoStepFunction:
    """``sum_k a_k Phi((q^k x)^N)`` as a step function."""
    out = GeoStepFunction()
    phi = haar_basis_fn(q, 0)
    for k, a in xi_coeffs.items():
        if a != 0:
            out = out + dilate(power_substitute(phi, N), q ** k) * a
    return out


def filter_symbol(xi_coeffs: Mapping[int, complex], q: float, N: int, s: complex) -> complex:
    """``m_xi(s) = sum_k a_k q^{-k s N}``."""
    return complex(sum(a * q ** (-k * complex(s) * N) for k, a in xi_coeffs.items()))


def filter_from_level(xi_coeffs: Mapping[int, complex], q: float, N: int,
                      s_samples: Sequence[complex]) -> FilterExtraction:
    """Check ``N M(U xi; N s) = m_xi(s) M(Phi; s)`` at each sample.

    ``U xi = sum_k a_k Phi((q^k x)^N)`` is built as an explicit step function and
    transformed with :func:`mellin_exact`; the right side uses the closed-form symbol.
    """
    g = level_expansion(xi_coeffs, q, N)
    phi = haar_basis_fn(q, 0)
    res, syms = [], []
    for s in s_samples:
        s = complex(s)
        lhs = N * mellin_exact(g, N * s)
        m = filter_symbol(xi_coeffs, q, N, s)
        rhs = m * mellin_exact(phi, s)
        res.append(float(abs(lhs - rhs) / max(1.0, abs(rhs))))
        syms.append(m)
    return FilterExtraction(res, syms)


@dataclass
class RefinementReport:
    coefficients: dict
    residual: float
    relative_residual: float


def refinement_residual(q: float, N: int) -> RefinementReport:
    """Best approximation of ``U Phi`` by ``sum_k a_k Phi(q^k x)`` and its irreducible residual."""
    u_phi = scaling_operator_U(haar_basis_fn(q, 0), N)
    lo, hi = level_cover(*u_phi.support(), q, N, 0)
    p = _project(u_phi, q, N, 0, range(lo, hi + 1))
    # express in the unnormalized family Phi(q^k x)
    coeffs = {}
    for k, c in p.element.coeffs.items():
        a, b = level_interval(q, N, 0, k)
        coeffs[k] = c / math.sqrt(b - a)
    return RefinementReport(coeffs, p.error, p.error / u_phi.norm())


def export_levels_csv(elements: Sequence[ResolutionElement], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "k", "re", "im"])
        for el in elements:
            for k in sorted(el.coeffs):
                c = complex(el.coeffs[k])
                w.writerow([el.level, k, repr(c.real), repr(c.imag)])
