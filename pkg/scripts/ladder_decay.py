"""Projection of a fixed step function onto successively finer MRA levels.

    python3 scripts/ladder_decay.py --q 0.5 --N 2 --levels 5 --csv decay.csv
"""
import argparse
import csv
from dataclasses import dataclass

from qfock.mellin import GeoStepFunction
from qfock.mra import MraConfig, ladder_decay


@dataclass
class DecayConfig:
    q: float = 0.5
    N: int = 2
    levels: int = 4
    support: tuple[float, float] = (0.3, 0.9)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=float, default=DecayConfig.q)
    ap.add_argument("--N", type=int, default=DecayConfig.N)
    ap.add_argument("--levels", type=int, default=DecayConfig.levels)
    ap.add_argument("--support", type=float, nargs=2, default=list(DecayConfig.support))
    ap.add_argument("--csv", help="write level, coarse norm and fine error columns")
    a = ap.parse_args()
    cfg = DecayConfig(a.q, a.N, a.levels, tuple(a.support))
    f = GeoStepFunction.indicator(*cfg.support)
    dec = ladder_decay(f, MraConfig(cfg.q, cfg.N, (-60, 60)), levels=cfg.levels)
    rows = list(zip(range(cfg.levels), dec.coarse_norms, dec.fine_errors))
    print(f"{'step':>4s} {'coarse norm':>12s} {'fine error':>12s}")
    for step, c, e in rows:
        print(f"{step:4d} {c:12.6f} {e:12.6f}")
    print("fine errors strictly decreasing:", dec.fine_strictly_decreasing)
    if a.csv:
        with open(a.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "coarse_norm", "fine_error"])
            w.writerows(rows)


if __name__ == "__main__":
    main()
