"""Cuntz-relation residuals against the Fourier truncation size.

    python3 scripts/cuntz_sweep.py --Ms 16 64 256 --random 5
"""
import argparse
from dataclasses import dataclass

import numpy as np

from qfock.cuntz import cuntz_completeness_residual, cuntz_isometry_residual, subband_family
from qfock.filterbank import haar_bank, random_paraunitary_bank


@dataclass
class SweepConfig:
    Ms: tuple[int, ...] = (16, 64, 256)
    random: int = 5
    N: int = 3
    degree: int = 2
    seed: int = 0


def sweep(cfg: SweepConfig) -> list[tuple[str, int, float, float]]:
    rng = np.random.default_rng(cfg.seed)
    banks = [("haar", haar_bank())]
    banks += [(f"random{t}", random_paraunitary_bank(cfg.N, cfg.degree, rng)) for t in range(cfg.random)]
    rows = []
    for label, bank in banks:
        for M in cfg.Ms:
            ops = subband_family(bank, M)
            rows.append((label, M, cuntz_isometry_residual(ops).max_residual,
                         cuntz_completeness_residual(ops).max_residual))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--Ms", type=int, nargs="+", default=list(SweepConfig.Ms))
    ap.add_argument("--random", type=int, default=SweepConfig.random)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    print(f"{'bank':10s} {'M':>5s} {'isometry':>11s} {'completeness':>13s}")
    for label, M, iso, comp in sweep(SweepConfig(tuple(a.Ms), a.random, seed=a.seed)):
        print(f"{label:10s} {M:5d} {iso:11.3e} {comp:13.3e}")


if __name__ == "__main__":
    main()
