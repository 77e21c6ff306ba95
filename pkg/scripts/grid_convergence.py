"""Grid study: parameter of a fixed-amplitude wave as ny and nx are refined.

The vertical differences are fourth order, so successive differences in the
parameter should shrink by roughly 16 per doubling of ny.
"""

import argparse

from rotwaves.continuation import Discretization, PinAmplitude, newton_solve
from rotwaves.dispersion import find_tau_star
from rotwaves.field import from_linear_wave
from rotwaves.linear_wave import build_linear_wave
from rotwaves.uniform_stream import solve_uniform_stream
from rotwaves.vorticity import polynomial


def solve(s, tau, t, nx, ny):
    w = build_linear_wave(s, tau, t)
    f0 = from_linear_wave(w, nx=nx, ny=ny)
    disc = Discretization(s.vort, s.h, w.regime, w.Lambda_star, s.lam, nx, ny)
    return newton_solve(f0, PinAmplitude(t), disc=disc).lam


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=float, default=0.02)
    ap.add_argument("--nx", type=int, default=12)
    a = ap.parse_args()

    s = solve_uniform_stream(polynomial([0.5, 0.3, 0.4]), 1.0, 0.5)
    tau, _ = find_tau_star(s)
    prev = prev_d = None
    for ny in (12, 24, 48, 96):
        lam = solve(s, tau, a.t, a.nx, ny)
        d = None if prev is None else lam - prev
        ratio = "" if d is None or prev_d is None else f" ratio={prev_d / d:.2f}"
        print(f"ny={ny:3d} lambda={lam:.14f}" + ("" if d is None else f" diff={d:.3e}") + ratio)
        prev, prev_d = lam, d


if __name__ == "__main__":
    main()
