"""Fixed-step classical Runge-Kutta integration with dense evaluation.

All right-hand sides used in this package are autonomous, so ``rhs`` takes the
state only. States have shape ``(..., dim)``.
"""

import numpy as np


def rk4_step(rhs, s, dx):
    k1 = rhs(s)
    k2 = rhs(s + 0.5 * dx * k1)
    k3 = rhs(s + 0.5 * dx * k2)
    k4 = rhs(s + dx * k3)
    return s + dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4(rhs, x0, x1, s0, n):
    """Integrate from ``x0`` to ``x1`` in ``n`` equal steps.

    Returns the node abscissae and the states at every node; integration
    stops early (with NaN-filled tail) if the state becomes non-finite, and
    the index of the first bad node is returned as the third value
    (``None`` when the run is clean).
    """
    s0 = np.asarray(s0, dtype=float)
    xs = np.linspace(x0, x1, n + 1)
    dx = (x1 - x0) / n
    out = np.full((n + 1,) + s0.shape, np.nan)
    out[0] = s0
    s = s0
    for i in range(n):
        s = rk4_step(rhs, s, dx)
        if not np.all(np.isfinite(s)):
            return xs, out, i + 1
        out[i + 1] = s
    return xs, out, None


class DenseRK4:
    """Node states from :func:`rk4` plus a one-step dense evaluator.

    Evaluation at ``x`` takes a single RK4 step from the nearest node, so the
    dense error is of the same order as the node error.
    """

    def __init__(self, rhs, xs, states):
        self.rhs = rhs
        self.xs = np.asarray(xs, dtype=float)
        self.states = np.asarray(states, dtype=float)
        self.x0 = self.xs[0]
        self.dx = (self.xs[-1] - self.xs[0]) / (len(self.xs) - 1)

    @property
    def lo(self):
        return min(self.xs[0], self.xs[-1])

    @property
    def hi(self):
        return max(self.xs[0], self.xs[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        idx = np.clip(np.rint((flat - self.x0) / self.dx).astype(int), 0, len(self.xs) - 1)
        step = (flat - self.xs[idx])[:, None]
        s = rk4_step(self.rhs, self.states[idx], step)
        return s.reshape(x.shape + self.states.shape[1:])


def linear_propagate(c_nodes, c_mid, dx, s0):
    """RK4 for the linear system w'' = c(y) w, vectorized over columns.

    ``c_nodes`` has shape ``(n+1, m)`` (coefficient at the nodes) and
    ``c_mid`` shape ``(n, m)`` (at the midpoints). The RK4 step of a linear
    system is itself a 2x2 matrix, so all step matrices are formed at once
    and only the running product is sequential. Returns states of shape
    ``(n+1, m, 2)`` holding ``(w, w')``.
    """
    c0, c1, cm = c_nodes[:-1], c_nodes[1:], c_mid
    h2 = 0.5 * dx
    # stage matrices K = A (I + a K_prev), with A = [[0, 1], [c, 0]]
    # K1 = A0
    k1 = (np.zeros_like(c0), np.ones_like(c0), c0, np.zeros_like(c0))
    k2 = _stage(cm, k1, h2)
    k3 = _stage(cm, k2, h2)
    k4 = _stage(c1, k3, dx)
    f = dx / 6.0
    m00 = 1.0 + f * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    m01 = f * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    m10 = f * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    m11 = 1.0 + f * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
    n = c0.shape[0]
    out = np.empty((n + 1,) + c0.shape[1:] + (2,))
    w, dw = np.array(s0[..., 0], dtype=float), np.array(s0[..., 1], dtype=float)
    out[0, ..., 0], out[0, ..., 1] = w, dw
    for i in range(n):
        w, dw = m00[i] * w + m01[i] * dw, m10[i] * w + m11[i] * dw
        out[i + 1, ..., 0], out[i + 1, ..., 1] = w, dw
    return out


def _stage(c, kp, a):
    # A (I + a Kp) with A = [[0, 1], [c, 0]]
    p00, p01, p10, p11 = 1.0 + a * kp[0], a * kp[1], a * kp[2], 1.0 + a * kp[3]
    return (p10, p11, c * p00, c * p01)
