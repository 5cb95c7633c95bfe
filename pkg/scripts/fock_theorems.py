"""Doubled-system identities on the twisted Fock space across q.

Prints the asserted residuals and the report-only commutator next to the
candidate right-hand sides for each q.

    python3 scripts/fock_theorems.py --qs 0.3 0.5 0.7 0.9 --L 3
"""
import argparse
from dataclasses import dataclass

from qfock.filterbank import haar_bank
from qfock.fock import check_thm_con2, check_thm_osc1


@dataclass
class TheoremConfig:
    qs: tuple[float, ...] = (0.3, 0.5, 0.7, 0.9)
    M: int = 8
    L: int = 3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qs", type=float, nargs="+", default=list(TheoremConfig.qs))
    ap.add_argument("--M", type=int, default=TheoremConfig.M)
    ap.add_argument("--L", type=int, default=TheoremConfig.L)
    a = ap.parse_args()
    cfg = TheoremConfig(tuple(a.qs), a.M, a.L)
    bank = haar_bank()
    con = check_thm_con2(bank, bank, cfg.M, cfg.L)
    print("self-dual doubled system")
    for k, v in con.residuals.items():
        flag = "asserted" if k in con.asserted else "reported"
        print(f"  {k:20s} {v:10.3e}  {flag}")
    print(f"  level dimensions     {con.tables['level_dims']}")
    print()
    print(f"{'q':>5s} {'trace res':>10s} {'limit res':>10s} {'[N]_q':>8s} {'q^N-q^-N':>9s} {'measured':>22s}")
    for q in cfg.qs:
        r = check_thm_osc1(bank, q, cfg.M, cfg.L)
        c = r.extra["candidates"]
        meas = ", ".join(f"{m.real:+.4f}" for m in c["measured"])
        print(f"{q:5.2f} {r.residuals['vacuum_twist_trace']:10.2e} {r.residuals['q_limit_continuity']:10.2e} "
              f"{c['[N]_q']:8.4f} {c['q^N-q^-N']:9.4f} {meas:>22s}")


if __name__ == "__main__":
    main()
