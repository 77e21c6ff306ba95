"""Trace a short branch from the first-order wave and export it.

Usage: python scripts/run_branch.py [--regime fixed_period] [--steps 20] [--out DIR]
"""

import argparse
import logging
from pathlib import Path

from rotwaves.continuation import ContinuationConfig, continue_branch, export_branch
from rotwaves.dispersion import find_tau_star
from rotwaves.linear_wave import REGIMES, build_linear_wave
from rotwaves.uniform_stream import solve_uniform_stream
from rotwaves.vorticity import polynomial


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--regime", choices=REGIMES, default="fixed_period")
    ap.add_argument("--lam", type=float, default=0.5)
    ap.add_argument("--coefs", type=float, nargs="+", default=[0.5, 0.3, 0.4])
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--ds", type=float, default=0.005)
    ap.add_argument("--out", type=Path, default=Path("branch_out"))
    ap.add_argument("-v", "--verbose", action="store_true")
    a = ap.parse_args()
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING)

    s = solve_uniform_stream(polynomial(a.coefs), 1.0, a.lam)
    tau, _ = find_tau_star(s)
    seed = build_linear_wave(s, tau, 1e-3, a.regime)
    b = continue_branch(seed, ContinuationConfig(ds=a.ds, max_steps=a.steps))
    export_branch(b, a.out)
    print(f"tau*={tau:.10g} points={len(b.points)} termination={b.termination}")
    for p in b.points:
        props = p.nodal.booleans() if p.nodal is not None else {}
        ok = all(v is True for v in props.values()) if props else None
        print(f"{p.index:3d} t={p.t:+.6e} p={p.parameter:.10f} res={p.newton_residual:.1e} nodal={ok}")


if __name__ == "__main__":
    main()
