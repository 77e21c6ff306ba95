"""Uniform (x-independent) shear flows Psi(y) under a flat surface."""

from dataclasses import dataclass

import numpy as np

from ._rk4 import DenseRK4, rk4
from .errors import DegenerateLambda, IntegrationFailure, OutOfRange
from .vorticity import VorticityFn

EXTENSION = 0.2  # fraction of the depth the dense output reaches past [0, h]
DEFAULT_NODES = 512
MAX_NODES = 2**18


def stream_rhs(vort):
    def rhs(s):
        return np.stack([s[..., 1], -vort.eval(s[..., 0])], axis=-1)

    return rhs


@dataclass(frozen=True, eq=False)
class UniformStream:
    """Solution of Psi'' + omega(Psi) = 0 with Psi(h) = 0, Psi'(h) = lam.

    ``m = -Psi(0)`` and ``Q = lam**2 / 2`` are the bed value and Bernoulli
    constant; ``kappa`` is the surface velocity Psi'(h), equal to ``lam``.
    """

    vort: VorticityFn
    h: float
    lam: float
    n: int
    m: float
    Q: float
    kappa: float
    error_estimate: float
    dense: DenseRK4

    @property
    def grid(self):
        """Nodes on [0, h] as arrays ``(y, Psi, dPsi)``."""
        xs, st = self.dense.xs, self.dense.states
        dy = self.h / self.n
        i0 = int(round((0.0 - xs[0]) / dy))
        sl = slice(i0, i0 + self.n + 1)
        return xs[sl], st[sl, 0], st[sl, 1]

    def __call__(self, y):
        return eval_stream(self, y)

    def psi(self, y, extend=True):
        return self._state(y, extend)[..., 0]

    def _state(self, y, extend=True):
        y = np.asarray(y, dtype=float)
        margin = EXTENSION * self.h if extend else 0.0
        tol = 1e-12 * self.h
        if np.any(y < -margin - tol) or np.any(y > self.h + margin + tol):
            raise OutOfRange(
                f"y outside [{-margin:.6g}, {self.h + margin:.6g}] for depth h={self.h:.6g}"
            )
        return self.dense(y)


def _integrate(vort, h, lam, n):
    rhs = stream_rhs(vort)
    n_ext = int(np.ceil(EXTENSION * n)) + 1
    dy = h / n
    top = np.array([0.0, lam])
    ys_dn, st_dn, bad = rk4(rhs, h, -n_ext * dy, top, n + n_ext)
    if bad is not None:
        raise IntegrationFailure("uniform stream solution blew up", y=ys_dn[bad])
    ys_up, st_up, bad = rk4(rhs, h, h + n_ext * dy, top, n_ext)
    if bad is not None:
        raise IntegrationFailure("uniform stream extension blew up", y=ys_up[bad])
    ys = np.concatenate([ys_dn[::-1], ys_up[1:]])
    st = np.concatenate([st_dn[::-1], st_up[1:]])
    return DenseRK4(rhs, ys, st), st_dn[n]


def solve_uniform_stream(vort, h, lam, n=DEFAULT_NODES, tol=1e-12):
    """Integrate the shear-flow Cauchy problem downward from the surface.

    The node count is doubled until the Richardson estimate of the error in
    (Psi(0), Psi'(0)) drops below ``tol`` (scaled by the solution size).
    """
    if not (h > 0 and np.isfinite(h)):
        raise ValueError(f"depth must be positive and finite, got {h!r}")
    if lam == 0:
        raise DegenerateLambda("lambda = 0 gives a zero surface velocity kappa = Psi'(h)")
    if not np.isfinite(lam):
        raise ValueError("lambda must be finite")
    if n < 16:
        raise ValueError("need at least 16 nodes")
    n = int(n)
    dense, bed = _integrate(vort, h, lam, n)
    while True:
        dense2, bed2 = _integrate(vort, h, lam, 2 * n)
        scale = max(1.0, float(np.max(np.abs(bed2))))
        err = float(np.max(np.abs(bed2 - bed))) / 15.0
        n, dense, bed = 2 * n, dense2, bed2
        if err <= tol * scale:
            break
        if n >= MAX_NODES:
            raise IntegrationFailure(
                f"step halving did not reach tolerance {tol:g} (estimate {err:.3g})", y=0.0
            )
    return UniformStream(
        vort=vort, h=float(h), lam=float(lam), n=n, m=-float(bed[0]),
        Q=0.5 * lam * lam, kappa=float(lam), error_estimate=err, dense=dense,
    )


def eval_stream(s, y):
    """Return ``(Psi, Psi', Psi'')`` at ``y`` (scalar or array).

    Evaluation is allowed up to ``0.2*h`` outside [0, h], where the same
    ODE is simply continued.
    """
    st = s._state(y)
    psi, dpsi = st[..., 0], st[..., 1]
    ddpsi = -s.vort.eval(psi)
    if np.ndim(y) == 0:
        return float(psi), float(dpsi), float(ddpsi)
    return psi, dpsi, ddpsi
