"""Scan sigma(tau) for a few streams and report the bifurcation frequency.

Usage: python scripts/dispersion_scan.py [--lam 0.8] [--tau-max 10] [--out DIR]
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from rotwaves.dispersion import find_tau_star, sigma_scan, transversality
from rotwaves.uniform_stream import solve_uniform_stream
from rotwaves.vorticity import linear, polynomial, zero

CASES = {
    "irrotational": zero(),
    "constant": linear(0.0, 1.0),
    "linear": linear(3.0, 0.0),
    "quadratic": polynomial([0.5, 0.3, 0.4]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=0.5)
    ap.add_argument("--h", type=float, default=1.0)
    ap.add_argument("--tau-max", type=float, default=10.0)
    ap.add_argument("--samples", type=int, default=101)
    ap.add_argument("--out", type=Path, default=None)
    a = ap.parse_args()

    taus = np.linspace(0.0, a.tau_max, a.samples)
    for name, vort in CASES.items():
        s = solve_uniform_stream(vort, a.h, a.lam)
        curve = sigma_scan(s, taus)
        try:
            tau, mode = find_tau_star(s)
            tr = transversality(vort, a.h, a.lam, tau)
            msg = f"tau*={tau:.12g} ({mode}), dsigma/dlambda={tr.value:.6g}"
        except Exception as e:  # report and keep scanning
            msg = f"{type(e).__name__}: {e}"
        print(f"{name:12s} m={s.m:.6g} Q={s.Q:.6g} ratio={curve.asymptotic_ratio:.4f} {msg}")
        if a.out is not None:
            a.out.mkdir(parents=True, exist_ok=True)
            with open(a.out / f"sigma_{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["tau", "sigma"])
                w.writerows(zip(taus.tolist(), curve.sigma.tolist()))


if __name__ == "__main__":
    main()
