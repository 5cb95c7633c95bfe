"""Log-trapezoid Mellin quadrature error against the exact step-function transform.

    python3 scripts/mellin_convergence.py --s 0.7 2.0 --intervals 16 32 64 128 256
"""
import argparse
from dataclasses import dataclass

import numpy as np

from qfock.mellin import GeoStepFunction, mellin_exact, mellin_numeric, sample_piece


@dataclass
class ConvergenceConfig:
    a: float = 0.2
    b: float = 5.0
    s: complex = 0.7 + 2j
    intervals: tuple[int, ...] = (16, 32, 64, 128, 256)


def errors(cfg: ConvergenceConfig) -> list[float]:
    f = GeoStepFunction.indicator(cfg.a, cfg.b)
    exact = mellin_exact(f, cfg.s)
    out = []
    for n in cfg.intervals:
        xs, fs = sample_piece(f, n + 1)
        out.append(abs(mellin_numeric(xs, fs, cfg.s) - exact))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--s", type=float, nargs=2, default=[0.7, 2.0], metavar=("RE", "IM"))
    ap.add_argument("--interval", type=float, nargs=2, default=[0.2, 5.0], metavar=("A", "B"))
    ap.add_argument("--intervals", type=int, nargs="+", default=list(ConvergenceConfig.intervals))
    a = ap.parse_args()
    cfg = ConvergenceConfig(a.interval[0], a.interval[1], complex(*a.s), tuple(a.intervals))
    errs = errors(cfg)
    print(f"{'n':>6s} {'error':>11s} {'order':>6s}")
    for k, (n, e) in enumerate(zip(cfg.intervals, errs)):
        order = "" if k == 0 else f"{np.log(errs[k - 1] / e) / np.log(n / cfg.intervals[k - 1]):6.2f}"
        print(f"{n:6d} {e:11.3e} {order:>6s}")


if __name__ == "__main__":
    main()
