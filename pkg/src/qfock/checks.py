"""Registry of named checks run by the command-line front end.

Each check takes a parameter dict (defaults merged with the config), a seed
and a context holding named filter banks and CP factors, and returns a
:class:`CheckReport`.  Whether a check can fail is fixed here, never by config.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__
from .cuntz import (
    compare_with_polyphase, cuntz_completeness_residual, cuntz_isometry_residual, subband_family,
)
from .filterbank import (
    FilterBank, build_doubled_matrix, check_car_identity, check_unitarity, condition_a_loop,
    haar_bank, polyphase_matrix, random_paraunitary_bank,
)
from .fock import (
    CPFactor, TwistWeights, TwistedFock, check_thm_con2, check_thm_osc1, cuntz_toeplitz_factor,
    gram_level, random_cp_factor,
)
from .mellin import (
    GeoStepFunction, check_transform_identities, mellin_exact, mellin_numeric, random_step_function,
    sample_piece,
)
from .mra import (
    MraConfig, filter_from_level, gram_orthonormality, intertwining_residual, ladder_decay,
    nesting_residual, refinement_residual,
)
from .qoscillator import build_ladder, check_commutation_vs_symbol, check_shift_relations, qbracket


class ConfigError(ValueError):
    """Raised for unknown banks, factors or out-of-range parameters."""


@dataclass
class Context:
    banks: dict[str, FilterBank] = field(default_factory=dict)
    factors: dict[str, CPFactor] = field(default_factory=dict)

    def bank(self, name: str) -> FilterBank:
        if name == "haar":
            return haar_bank()
        if name not in self.banks:
            raise ConfigError(f"unknown filter bank {name!r}")
        return self.banks[name]

    def factor(self, name: str) -> CPFactor:
        if name not in self.factors:
            raise ConfigError(f"unknown CP factor {name!r}")
        return self.factors[name]


@dataclass
class CheckReport:
    check: str
    anchor: str
    params: dict
    residuals: dict
    tolerance: dict
    verdict: str
    version: str
    seed: int
    details: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        """JSON body of the report; ``wall_time`` is excluded so the body is deterministic."""
        return {"check": self.check, "anchor": self.anchor, "params": self.params,
                "residuals": self.residuals, "tolerance": self.tolerance, "verdict": self.verdict,
                "version": self.version, "seed": self.seed, "details": self.details,
                "series": self.series}


@dataclass
class Outcome:
    residuals: dict
    tolerance: dict
    details: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CheckSpec:
    name: str
    anchor: str
    asserted: bool
    defaults: dict
    runner: Callable[[dict, int, Context], Outcome]

    @property
    def mode(self) -> str:
        return "asserted" if self.asserted else "report-only"


REGISTRY: dict[str, CheckSpec] = {}
# residuals that must vanish exactly are compared against the smallest positive tolerance
EXACT = 5e-324
TOLERANCE_KEYS = ("tol", "limit_tol")


def register(name: str, anchor: str, asserted: bool = True, **defaults):
    def deco(fn):
        REGISTRY[name] = CheckSpec(name, anchor, asserted, defaults, fn)
        return fn
    return deco


def _c(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _clean(obj):
    """Convert numpy scalars, arrays, tuples and complex numbers to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return _c(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def run_check(name: str, params: dict | None = None, seed: int = 0, tol_scale: float = 1.0,
              context: Context | None = None) -> CheckReport:
    import time

    if name not in REGISTRY:
        raise ConfigError(f"unknown check {name!r}")
    spec = REGISTRY[name]
    merged = dict(spec.defaults)
    for k, v in (params or {}).items():
        if k not in merged:
            raise ConfigError(f"check {name!r} has no parameter {k!r}")
        merged[k] = v
    for k in TOLERANCE_KEYS:
        if k in merged:
            merged[k] = float(merged[k]) * tol_scale
    t0 = time.perf_counter()
    out = spec.runner(merged, seed, context or Context())
    wall = time.perf_counter() - t0
    if spec.asserted:
        ok = all(out.residuals[k] < t for k, t in out.tolerance.items())
        verdict = "pass" if ok else "fail"
    else:
        verdict = "report-only"
    return CheckReport(name, spec.anchor, _clean(merged), _clean(out.residuals), _clean(out.tolerance),
                       verdict, __version__, seed, _clean(out.details), _clean(out.series), wall)


# -- filter banks -----------------------------------------------------------------------------------

@register("filterbank-unitarity", "M(z) = [m_j(rho^k z)]/sqrt(N) and the 1/N polyphase matrix unitary on |z| = 1",
          bank="haar", sample_count=64, tol=1e-12)
def _filterbank_unitarity(p, seed, ctx):
    bank = ctx.bank(p["bank"])
    cond = check_unitarity(condition_a_loop(bank), p["sample_count"], p["tol"], seed)
    poly = check_unitarity(polyphase_matrix(bank), p["sample_count"], p["tol"], seed)
    return Outcome({"condition_a": cond.residual, "polyphase": poly.residual},
                   {"condition_a": p["tol"], "polyphase": p["tol"]},
                   {"condition_a": cond.to_dict(), "polyphase": poly.to_dict()})


@register("car-doubled", "B = diag(A, A*)/sqrt(2): B B~* + B~* B = 1 on |z| = 1",
          bank="haar", bank_tilde="", sample_count=64, tol=1e-10)
def _car_doubled(p, seed, ctx):
    bank = ctx.bank(p["bank"])
    tilde = ctx.bank(p["bank_tilde"]) if p["bank_tilde"] else bank
    h = 1 / np.sqrt(2)
    B = build_doubled_matrix(polyphase_matrix(bank)) * h
    Bt = build_doubled_matrix(polyphase_matrix(tilde)) * h
    r = check_car_identity(B, Bt, p["sample_count"], p["tol"], seed)
    return Outcome({"car": r.residual}, {"car": p["tol"]}, r.to_dict())


# -- Cuntz relations --------------------------------------------------------------------------------

@register("cuntz-check", "S_i* S_j = delta_ij and sum_i S_i S_i* = 1 for (S_i f)(z) = m_i(z) f(z^N)",
          bank="haar", M=64, tol=1e-12)
def _cuntz_check(p, seed, ctx):
    ops = subband_family(ctx.bank(p["bank"]), int(p["M"]))
    iso = cuntz_isometry_residual(ops, p["tol"])
    comp = cuntz_completeness_residual(ops, p["tol"])
    n = len(ops)
    failing = [[i, j] for i in range(n) for j in range(n) if iso.table[i, j] >= p["tol"]]
    return Outcome({"isometry": iso.max_residual, "completeness": comp.max_residual},
                   {"isometry": p["tol"], "completeness": p["tol"]},
                   {"isometry_table": iso.table, "failing_pairs": failing,
                    "interior_size": iso.block_size, "exact_rows": comp.block_size})


@register("polyphase-correspondence", "S_i* S_j = multiplication by the row Gram of the 1/N polyphase matrix",
          bank="haar", M=24, random_count=20, degree=2, tol=1e-10)
def _polyphase_correspondence(p, seed, ctx):
    rng = np.random.default_rng(seed)
    banks = [("given", ctx.bank(p["bank"]))]
    for t in range(int(p["random_count"])):
        N = int(rng.integers(2, 4))
        banks.append((f"random{t}_N{N}", random_paraunitary_bank(N, int(p["degree"]), rng)))
    worst, per_bank, chosen = 0.0, {}, {}
    for label, bank in banks:
        ops = subband_family(bank, int(p["M"]))
        A = polyphase_matrix(bank)
        r = 0.0
        for i in range(bank.N):
            for j in range(bank.N):
                cmp = compare_with_polyphase(ops, A, i, j, tol=p["tol"])
                r = max(r, cmp.residuals[cmp.best])
                chosen[cmp.best] = chosen.get(cmp.best, 0) + 1
        per_bank[label] = r
        worst = max(worst, r)
    return Outcome({"best_ordering": worst}, {"best_ordering": p["tol"]},
                   {"per_bank": per_bank, "best_ordering_counts": dict(sorted(chosen.items()))})


# -- Mellin transform -------------------------------------------------------------------------------

def convergence_order(f: GeoStepFunction, s: complex, intervals=(32, 64, 128)) -> tuple[float, list]:
    """Fitted order of the log-trapezoid rule as the grid spacing is halved twice."""
    exact = mellin_exact(f, s)
    errs = []
    for n in intervals:
        xs, fs = sample_piece(f, n + 1)
        errs.append(abs(mellin_numeric(xs, fs, s) - exact))
    slope = -np.polyfit(np.log(intervals), np.log(errs), 1)[0]
    return float(slope), errs


@register("mellin-identities", "M(f(ax); s) = a^-s M(f; s), M(f(x^a); s) = M(f; s/a)/a, M(x^a f; s) = M(f; s+a)",
          count=100, a_values=(1 / 3, 0.5, 2.0, 3.0), re_s=(-1.0, 0.5, 2.0), tol=1e-12, min_order=1.8)
def _mellin_identities(p, seed, ctx):
    rng = np.random.default_rng(seed)
    worst = {"dilation": 0.0, "power": 0.0, "weight": 0.0}
    for t in range(int(p["count"])):
        f = random_step_function(rng)
        a = float(p["a_values"][t % len(p["a_values"])])
        s = complex(p["re_s"][(t // len(p["a_values"])) % len(p["re_s"])], rng.uniform(-3, 3))
        rep = check_transform_identities(f, a, s, p["tol"])
        for k, v in rep.residuals.items():
            worst[k] = max(worst[k], v)
    order, errs = convergence_order(GeoStepFunction.indicator(0.2, 5.0, 1.0), complex(0.7, 2.0))
    res = dict(worst)
    res["order_shortfall"] = max(0.0, p["min_order"] - order)
    tol = {k: p["tol"] for k in worst}
    tol["order_shortfall"] = EXACT
    return Outcome(res, tol, {"convergence_order": order}, {"mellin_convergence": errs})


# -- multiresolution ladder ----------------------------------------------------------------------

@register("mra-ladder", "nested levels spanned by chi(q^(k N^j) x) with trivial intersection and dense union",
          qs=(0.3, 0.5, 0.9), Ns=(2, 3), levels=3, k_range=(-6, 6), tol=1e-12,
          test_function=(0.3, 0.9), decay_q=0.5, decay_N=2, decay_levels=4)
def _mra_ladder(p, seed, ctx):
    gram_off, gram_diag, nest, boundary = 0.0, 0.0, 0.0, 0
    for q in p["qs"]:
        for N in p["Ns"]:
            g = gram_orthonormality(q, tuple(p["k_range"]), True, N)
            gram_off, gram_diag = max(gram_off, g.offdiag_max), max(gram_diag, g.diag_deviation)
            rep = nesting_residual(MraConfig(q, N, tuple(p["k_range"]), (0, int(p["levels"]) - 1)))
            nest = max(nest, rep.max_residual)
            boundary += len(rep.boundary)
    a, b = p["test_function"]
    dec = ladder_decay(GeoStepFunction.indicator(a, b), MraConfig(p["decay_q"], int(p["decay_N"])),
                       levels=int(p["decay_levels"]))
    res = {"gram_offdiag": gram_off, "gram_diag": gram_diag, "nesting": nest, "decay_not_strict": 0.0 if dec.fine_strictly_decreasing else 1.0}
    tol = {"gram_offdiag": EXACT, "gram_diag": 1e-14, "nesting": p["tol"], "decay_not_strict": 0.5}
    return Outcome(res, tol, {"boundary_functions": boundary, "decay": dec.to_dict()},
                   {"ladder_decay_errors": dec.fine_errors, "ladder_decay_norms": dec.coarse_norms})


def _random_triple(rng, max_support: int = 3):
    f = random_step_function(rng, max_pieces=3, lo=0.2, hi=5.0)
    s = complex(rng.uniform(-0.5, 0.5), rng.uniform(-2, 2))
    a = {j: complex(rng.standard_normal(), rng.standard_normal())
         for j in range(int(rng.integers(1, max_support + 1)))}
    return f, s, a


@register("intertwining", "U W_Phi = W_Phi S on coefficients of Phi(q^l x^N)",
          count=20, q=0.5, N=2, k_range=(-3, 3), tol=1e-10)
def _intertwining(p, seed, ctx):
    rng = np.random.default_rng(seed)
    cfg = MraConfig(p["q"], int(p["N"]), tuple(p["k_range"]))
    rs = [intertwining_residual(*_random_triple(rng), cfg).residual for _ in range(int(p["count"]))]
    return Outcome({"coefficient": max(rs)}, {"coefficient": p["tol"]}, {"per_triple": rs})


@register("filter-extraction", "N M(U xi; N s) = m_xi(s) M(Phi; s) with m_xi(s) = sum a_k q^(-k s N)",
          count=20, q=0.5, Ns=(2, 3), tol=1e-12)
def _filter_extraction(p, seed, ctx):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(int(p["count"])):
        N = int(rng.choice(p["Ns"]))
        xi = {int(k): complex(rng.standard_normal(), rng.standard_normal())
              for k in rng.choice(np.arange(-2, 3), size=int(rng.integers(1, 4)), replace=False)}
        ss = [complex(rng.uniform(-0.5, 0.5), rng.uniform(-3, 3)) for _ in range(4)]
        worst = max(worst, filter_from_level(xi, p["q"], N, ss).max_residual)
    return Outcome({"extraction": worst}, {"extraction": p["tol"]})


@register("refinement-eq", "U Phi = sum_k a_k Phi(q^k x) (best-approximation residual)",
          asserted=False, q=0.5, N=2)
def _refinement(p, seed, ctx):
    r = refinement_residual(p["q"], int(p["N"]))
    return Outcome({"residual": r.residual, "relative": r.relative_residual}, {},
                   {"coefficients": {str(k): _c(v) for k, v in sorted(r.coefficients.items())}})


# -- q-oscillator -----------------------------------------------------------------------------------

@register("qbracket", "[s]_q = (1 - q^s)/(1 - q), [m + n]_q = [m]_q + q^m [n]_q, [s]_q -> s as q -> 1",
          qs=(0.3, 0.5, 0.9), max_int=8, tol=1e-13, limit_constant=10.0)
def _qbracket(p, seed, ctx):
    one = max(abs(qbracket(1, q) - 1) for q in (*p["qs"], 1.0))
    exact = 0.0 if qbracket(3, Fraction(1, 2)) == Fraction(7, 4) else 1.0
    add = 0.0
    rng = range(int(p["max_int"]) + 1)
    for q in p["qs"]:
        for m in rng:
            for n in rng:
                rhs = qbracket(m, q) + q ** m * qbracket(n, q)
                add = max(add, abs(qbracket(m + n, q) - rhs) / max(1.0, abs(rhs)))
    # |[s]_q - s| <= C (1 - q) along q = 1 - 10^-t
    ratios = [abs(qbracket(s, 1 - 10.0 ** -t) - s) / 10.0 ** -t for s in (0.5, 2.0, 3.5) for t in range(2, 9)]
    res = {"unit": one, "rational_3_half": exact, "addition": add,
           "limit_constant_excess": max(0.0, max(ratios) - p["limit_constant"]),
           "q_equal_one": abs(qbracket(2.5, 1.0) - 2.5)}
    tol = {"unit": p["tol"], "rational_3_half": EXACT, "addition": p["tol"],
           "limit_constant_excess": EXACT, "q_equal_one": EXACT}
    return Outcome(res, tol, {"limit_constant": max(ratios)})


@register("ladder-shift", "f(N) a^- = a^- f(N-1), f(N) a^+ = a^+ f(N+1), [a^-, a^+] diagonal",
          K=12, q=0.5, s=0.3, tol=1e-13)
def _ladder_shift(p, seed, ctx):
    rng = np.random.default_rng(seed)
    K, q = int(p["K"]), p["q"]
    b = rng.standard_normal(K + 1) + 1j * rng.standard_normal(K + 1)
    sys = build_ladder(K, b, q, p["s"])
    fs = {"identity": lambda n: n, "constant": lambda n: 1.0, "inverse_square_power": lambda n: q ** (-2 * n)}
    worst = 0.0
    for f in fs.values():
        r = check_shift_relations(sys, f, p["tol"])
        worst = max(worst, r.minus_residual, r.plus_residual)
    C = sys.a_minus @ sys.a_plus - sys.a_plus @ sys.a_minus
    off = float(np.abs(C - np.diag(np.diag(C))).max())
    return Outcome({"shift": worst, "commutator_offdiag": off},
                   {"shift": p["tol"], "commutator_offdiag": EXACT})


@register("commutation-symbol", "diag [a^-, a^+] against m_0(s)^2 [s]_(q^-2)",
          asserted=False, K=12, q=0.5, s=0.3, b=(0.7071067811865476, 0.7071067811865476))
def _commutation_symbol(p, seed, ctx):
    sys = build_ladder(int(p["K"]), list(p["b"]), p["q"], p["s"])
    r = check_commutation_vs_symbol(sys)
    d = r.to_dict()
    return Outcome({"max_discrepancy": d["max_discrepancy"]}, {}, d,
                   {"commutator_diagonal": list(r.diagonal)})


# -- twisted Fock space -----------------------------------------------------------------------------

@register("fock-gram", "Phi-form Gram matrices PSD, T_i(kernel) in kernel, T_i* T_j restricted to H = R_i* R_j",
          count=200, max_N=3, max_d=4, max_k=4, L=2, tol=1e-10, vacuum_tol=1e-12, factor="")
def _fock_gram(p, seed, ctx):
    rng = np.random.default_rng(seed)
    psd, stab, vac = 0.0, 0.0, 0.0
    for t in range(int(p["count"])):
        N = int(rng.integers(1, p["max_N"] + 1))
        d = int(rng.integers(1, p["max_d"] + 1))
        f = random_cp_factor(rng, N, d)
        tw = TwistWeights(tuple(rng.uniform(0.2, 1.0, size=N))) if t % 2 else TwistWeights.untwisted(N)
        for k in range(int(p["max_k"]) + 1):
            ev = np.linalg.eigvalsh(gram_level(f, tw, k))
            psd = max(psd, -ev.min() / max(ev.max(), 1e-300))
        F, v = _vacuum_run(f, tw, int(p["L"]))
        stab, vac = max(stab, F.kernel_stability), max(vac, v)
    if p["factor"]:
        f = ctx.factor(p["factor"])
        F, v = _vacuum_run(f, TwistWeights.untwisted(f.N), int(p["L"]))
        stab, vac = max(stab, F.kernel_stability), max(vac, v)
    ct = _cuntz_toeplitz_residual()
    res = {"gram_psd": psd, "kernel_stability": stab, "vacuum": vac, **ct}
    tol = {"gram_psd": p["tol"], "kernel_stability": p["tol"], "vacuum": p["vacuum_tol"],
           "toeplitz_isometry": p["vacuum_tol"], "toeplitz_sum_excess": p["vacuum_tol"]}
    return Outcome(res, tol)


def _vacuum_run(f: CPFactor, tw: TwistWeights, L: int):
    F = TwistedFock(f, tw, L)
    worst = 0.0
    for i in range(1, f.N + 1):
        for j in range(1, f.N + 1):
            want = np.sqrt(tw.lam[i - 1] * tw.lam[j - 1]) * f.phi(i, j)
            worst = max(worst, float(np.abs(F.vacuum_compress(F.Tstar(i) @ F.T(j)) - want).max()))
    return F, worst


def _cuntz_toeplitz_residual(N: int = 2, d: int = 2, depth: int = 4, L: int = 3) -> dict:
    F = TwistedFock(cuntz_toeplitz_factor(N, d, depth), TwistWeights.untwisted(N), L)
    inner = slice(0, F.offsets[L])  # levels 0..L-1 are not touched by the truncation
    iso = 0.0
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            P = (F.Tstar(i) @ F.T(j))[inner, inner]
            iso = max(iso, float(np.abs(P - (i == j) * np.eye(P.shape[0])).max()))
    top = float(np.linalg.eigvalsh(sum(F.T(i) @ F.Tstar(i) for i in range(1, N + 1))).max())
    return {"toeplitz_isometry": iso, "toeplitz_sum_excess": max(0.0, top - 1.0)}


def _bank_pair(p, ctx):
    bank = ctx.bank(p["bank"])
    return bank, ctx.bank(p["bank_tilde"]) if p["bank_tilde"] else bank


@register("thm-con2", "T_i* T_j|H = (A A*)_ij, T~_i* T~_j|H = (A~ A~*)_ij, T_i T~_j* + T~_j* T_i = delta_ij on H",
          bank="haar", bank_tilde="", M=8, L=3, tol=1e-10)
def _thm_con2(p, seed, ctx):
    bank, tilde = _bank_pair(p, ctx)
    r = check_thm_con2(bank, tilde, int(p["M"]), int(p["L"]), p["tol"], seed=seed)
    d = r.to_dict()
    return Outcome(dict(r.residuals), dict(r.asserted), {"tables": d["tables"], "extra": d["extra"]},
                   {"car_table": d["tables"]["car_vacuum_diag"]})


@register("thm-osc1-vacuum", "T~_j* T~_i|H = delta_ij (1 - q^2N)/(1 - q^2) and the q -> 1 limit of the doubled system",
          bank="haar", qs=(0.3, 0.5), M=8, L=3, tol=1e-10, limit_tol=1e-8)
def _thm_osc1_vacuum(p, seed, ctx):
    res, tol, details = {}, {}, {}
    for q in p["qs"]:
        r = check_thm_osc1(ctx.bank(p["bank"]), q, int(p["M"]), int(p["L"]), p["tol"],
                           limit_tol=p["limit_tol"], seed=seed)
        for k, v in r.residuals.items():
            res[f"{k}@q={q}"] = v
        for k, v in r.asserted.items():
            tol[f"{k}@q={q}"] = v
        details[f"q={q}"] = {"expected_twist_trace": r.extra["expected_twist_trace"]}
    return Outcome(res, tol, details)


@register("thm-osc1", "T~_i T_j*|H - T_j* T~_i|H against [N]_q, q^N - q^-N and the measured value",
          asserted=False, bank="haar", q=0.5, M=8, L=3)
def _thm_osc1(p, seed, ctx):
    r = check_thm_osc1(ctx.bank(p["bank"]), p["q"], int(p["M"]), int(p["L"]), seed=seed)
    d = r.to_dict()["extra"]
    meas = r.extra["commutator_diagonal_mean"]
    return Outcome({"offdiag": r.extra["commutator_offdiag_max"],
                    "gap_to_[N]_q": max(abs(m - r.extra["candidates"]["[N]_q"]) for m in meas),
                    "gap_to_q^N-q^-N": max(abs(m - r.extra["candidates"]["q^N-q^-N"]) for m in meas)},
                   {}, d, {"commutator_vacuum_diagonal": meas})
