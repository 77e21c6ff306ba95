"""Half-period computational grid: cosine/sine collocation in X, 4th-order FD in Y."""

from functools import lru_cache
from math import factorial

import numpy as np


def fd_weights(offsets, order):
    """Finite-difference weights for the ``order``-th derivative on ``offsets``.

    Offsets are in units of the grid spacing; the stencil is exact for
    polynomials of degree ``len(offsets) - 1``.
    """
    offsets = np.asarray(offsets, dtype=float)
    k = np.arange(len(offsets))
    A = offsets[None, :] ** k[:, None] / np.array([factorial(i) for i in k])[:, None]
    rhs = np.zeros(len(offsets))
    rhs[order] = 1.0
    return np.linalg.solve(A, rhs)


@lru_cache(maxsize=32)
def fd_matrices(n):
    """4th-order first and second derivative matrices on n+1 unit-spaced nodes."""
    if n < 6:
        raise ValueError("need at least 6 intervals for the boundary stencils")
    D1 = np.zeros((n + 1, n + 1))
    D2 = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        if 2 <= i <= n - 2:
            s1 = s2 = np.arange(i - 2, i + 3)
        elif i < 2:
            s1, s2 = np.arange(0, 5), np.arange(0, 6)
        else:
            s1, s2 = np.arange(n - 4, n + 1), np.arange(n - 5, n + 1)
        D1[i, s1] = fd_weights(s1 - i, 1)
        D2[i, s2] = fd_weights(s2 - i, 2)
    return D1, D2


@lru_cache(maxsize=32)
def _spectral(nx):
    j = np.arange(nx)
    theta = np.pi * j / (nx - 1)
    k = np.arange(nx)
    C = np.cos(np.outer(theta, k))
    S = np.sin(np.outer(theta, k))
    Cinv = np.linalg.inv(C)
    ki = np.arange(1, nx - 1)
    Sint = np.sin(np.outer(theta[1:-1], ki))
    Sinv = np.linalg.inv(Sint)
    return theta, C, S, Cinv, ki, Sinv


class Grid:
    """Tensor grid on [0, Lambda_star/2] x [y0, y0 + h].

    X nodes include both ends (cosine collocation, so even functions are
    represented exactly by their node values); Y nodes are uniform with the
    bed at index 0 and the surface at index ``ny``. Arrays on the grid have
    shape ``(ny + 1, nx)``.
    """

    def __init__(self, nx, ny, Lambda_star, h, y0=0.0):
        if nx < 4:
            raise ValueError("nx must be at least 4")
        self.nx, self.ny = int(nx), int(ny)
        self.Lambda_star, self.h, self.y0 = float(Lambda_star), float(h), float(y0)
        self.tau = 2 * np.pi / self.Lambda_star
        theta, C, S, Cinv, ki, Sinv = _spectral(self.nx)
        self.X = theta / self.tau
        self.Y = self.y0 + self.h * np.arange(self.ny + 1) / self.ny
        k = np.arange(self.nx)
        tau = self.tau
        self.to_coeffs = Cinv
        self.from_coeffs = C
        # even node values -> derivative values (odd) / second derivative (even)
        self.DX_even = -tau * (S * k) @ Cinv
        self.DXX_even = -tau**2 * (C * k**2) @ Cinv
        # odd node values (ends ignored, they vanish) -> derivatives
        DXo = np.zeros((self.nx, self.nx))
        DXo[:, 1:-1] = tau * (C[:, 1:-1] * ki) @ Sinv
        self.DX_odd = DXo
        DXXo = np.zeros((self.nx, self.nx))
        DXXo[:, 1:-1] = -tau**2 * (S[:, 1:-1] * ki**2) @ Sinv
        self.DXX_odd = DXXo
        D1, D2 = fd_matrices(self.ny)
        dY = self.h / self.ny
        self.DY = D1 / dY
        self.DYY = D2 / dY**2

    def key(self):
        return (self.nx, self.ny, self.Lambda_star, self.h, self.y0)

    # grid functions of shape (ny+1, nx)
    def dX_even(self, f):
        return f @ self.DX_even.T

    def dXX_even(self, f):
        return f @ self.DXX_even.T

    def dX_odd(self, f):
        return f @ self.DX_odd.T

    def dY(self, f):
        return self.DY @ f

    def dYY(self, f):
        return self.DYY @ f

    def cosine_coefficients(self, values):
        """Coefficients a_k with values = sum_k a_k cos(k tau X) at the nodes."""
        return self.to_coeffs @ np.asarray(values, dtype=float)

    def eval_cosine(self, coeffs, X, nu=0):
        k = np.arange(len(coeffs))
        arg = np.outer(np.atleast_1d(X), k) * self.tau
        kt = (k * self.tau) ** nu
        if nu % 4 == 0:
            basis = np.cos(arg)
        elif nu % 4 == 1:
            basis = -np.sin(arg)
        elif nu % 4 == 2:
            basis = -np.cos(arg)
        else:
            basis = np.sin(arg)
        out = basis @ (kt * coeffs)
        return out if np.ndim(X) else float(out[0])
