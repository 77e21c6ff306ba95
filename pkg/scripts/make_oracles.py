"""Freeze closed-form reference values into tests/oracles.json.

Everything here is computed with mpmath from closed forms that do not touch
the package, so the tests compare the shooting/continuation code against an
independent source.
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40
OUT = Path(__file__).resolve().parents[1] / "tests" / "oracles.json"


def sigma_affine(tau, lam, h, a, b=0):
    """sigma for omega(p) = a p + b: gamma = sinh(s y)/sinh(s h), s^2 = tau^2 - a."""
    s = mp.sqrt(mp.mpf(tau) ** 2 - a)
    if s == 0:
        gp = 1 / mp.mpf(h)
    else:
        gp = mp.re(s * mp.cosh(s * h) / mp.sinh(s * h))
    rho0 = (1 - lam * b) / lam**2
    return lam * (gp - rho0)


def irrotational_tau(lam, h=1):
    f = lambda t: lam**2 * t - mp.tanh(t * h)
    return mp.findroot(f, (mp.mpf("1e-3"), mp.mpf(20)), solver="anderson")


def main():
    out = {}
    out["irrotational_tau_star"] = {
        str(lam): float(irrotational_tau(mp.mpf(lam))) for lam in ("0.5", "0.8", "0.95")
    }
    lam = mp.mpf("0.8")
    t = irrotational_tau(lam)
    out["irrotational_transversality_0.8"] = float(t / mp.tanh(t) + 1 / lam**2)
    out["constant_vorticity_m"] = float(1 * 1 + mp.mpf(1) / 2)  # lam h + h^2/2 at lam = h = 1
    r3 = mp.sqrt(3)
    out["linear3_m"] = float(-mp.sin(r3 * (0 - 1)) / r3)  # m = -Psi(0), Psi = sin(sqrt3 (y-h))/sqrt3
    out["linear_mu1"] = {
        f"{b},{h}": float(mp.pi**2 / mp.mpf(h) ** 2 - b) for b in (-5, 0, 3) for h in (1, 2)
    }
    # omega = 2 pi^2 p, h = lam = 1: resonance at tau = pi, root to its right
    # (the exact root is sqrt(2) pi, where s = 0 and gamma is linear)
    a = 2 * mp.pi**2
    f = lambda tau: sigma_affine(tau, mp.mpf(1), mp.mpf(1), a)
    lo, hi = mp.pi + mp.mpf("1e-6"), mp.mpf(20)
    out["linear_2pi2_tau_star"] = float(mp.findroot(f, (lo, hi), solver="anderson"))
    out["linear_2pi2_pole_coefficient"] = float(-1 * 2 * mp.pi**2)  # -kappa * (sqrt(2) pi)^2
    OUT.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(OUT.read_text())


if __name__ == "__main__":
    main()
