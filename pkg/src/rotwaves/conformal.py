"""Periodic Hilbert transform and the conformal strip-to-fluid map.

A real Lambda-periodic function is stored by its nonnegative-frequency
coefficients c_k, so that u(X) = c_0 + 2 Re sum_{k>=1} c_k exp(i k tau X).
The strip is -h < Y < 0 with the bed at Y = -h.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMap, NonzeroMean

DEFAULT_MODES = 128
GRADIENT_FLOOR = 1e-8
INTERSECTION_TOL = 1e-8


@dataclass(frozen=True)
class PeriodicFunction:
    Lambda: float
    coeffs: np.ndarray  # complex, k = 0..K

    def __post_init__(self):
        if not self.Lambda > 0:
            raise ValueError("Lambda must be positive")
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("coefficients must be a nonempty 1-d array")
        object.__setattr__(self, "coeffs", c)

    @property
    def tau(self):
        return 2 * np.pi / self.Lambda

    @property
    def mean(self):
        return self.coeffs[0].real

    @property
    def is_even(self):
        return bool(np.all(np.abs(self.coeffs.imag) <= 1e-14 * max(1.0, np.max(np.abs(self.coeffs)))))

    @classmethod
    def from_samples(cls, values, Lambda):
        """Coefficients from samples at X_j = j Lambda / N, j = 0..N-1."""
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            raise ValueError("no samples")
        return cls(Lambda, np.fft.rfft(v) / v.size)

    @classmethod
    def cosine(cls, Lambda, amplitudes, mean=0.0):
        """mean + sum_k amplitudes[k-1] cos(k tau X)."""
        return cls(Lambda, np.concatenate([[mean], 0.5 * np.asarray(amplitudes, dtype=float)]))

    def _modes(self, X, nu):
        k = np.arange(len(self.coeffs))
        e = np.exp(1j * self.tau * np.multiply.outer(np.asarray(X, dtype=float), k))
        return e * (1j * k * self.tau) ** nu

    def __call__(self, X, nu=0):
        c = self.coeffs.copy()
        c[1:] *= 2
        if nu > 0:
            c[0] = 0
        return (self._modes(X, nu) @ c).real

    def samples(self, n):
        X = np.arange(n) * self.Lambda / n
        return X, self(X)

    def energy(self):
        """Mean square of the function, sum over k != 0 of 2 |c_k|^2 plus c_0^2."""
        return float(abs(self.coeffs[0]) ** 2 + 2 * np.sum(np.abs(self.coeffs[1:]) ** 2))


def hilbert_multiplier(k, tau, h):
    """-i coth(k tau h) for k >= 1."""
    return -1j / np.tanh(np.asarray(k) * tau * h)


def periodic_hilbert(u, h):
    """Apply the multiplier -i coth(k tau h) to every mode of a zero-mean function."""
    scale = max(1.0, float(np.max(np.abs(u.coeffs))))
    if abs(u.coeffs[0]) > 1e-14 * scale:
        raise NonzeroMean(f"mean {u.coeffs[0].real:.3g} must vanish")
    if not h > 0:
        raise ValueError("h must be positive")
    c = np.zeros_like(u.coeffs)
    k = np.arange(1, len(c))
    c[1:] = hilbert_multiplier(k, u.tau, h) * u.coeffs[1:]
    return PeriodicFunction(u.Lambda, c)


def _ratios(k, tau, Y, h):
    """sinh(k tau (Y+h)) / sinh(k tau h) and the cosh analogue, overflow free."""
    kt = np.multiply.outer(np.asarray(Y, dtype=float), k * tau)
    a = np.exp(kt)  # Y <= 0, so this stays bounded
    b = np.exp(-np.multiply.outer(2 * (np.asarray(Y, dtype=float) + h), k * tau))
    d = -np.expm1(-2 * k * tau * h)
    return a * (1 - b) / d, a * (1 + b) / d


@dataclass(frozen=True)
class ConformalMap:
    """Harmonic pair (U, V) on the strip with V = w + h on top and V = 0 on the bed."""

    h_conf: float
    w: PeriodicFunction

    @property
    def Lambda(self):
        return self.w.Lambda

    def evaluate(self, X, Y):
        """U, V and first and second derivatives at broadcast points.

        Returns a dict with keys U, V, U_X, U_Y, V_X, V_Y, V_XX, V_YY.
        """
        X, Y = np.broadcast_arrays(np.asarray(X, dtype=float), np.asarray(Y, dtype=float))
        h, tau = self.h_conf, self.w.tau
        c = self.w.coeffs
        drift = 1 + c[0].real / h
        k = np.arange(1, len(c))
        out = {
            "U": X * drift, "V": (Y + h) * drift,
            "U_X": np.full(X.shape, drift), "U_Y": np.zeros(X.shape),
            "V_X": np.zeros(X.shape), "V_Y": np.full(X.shape, drift),
            "V_XX": np.zeros(X.shape), "V_YY": np.zeros(X.shape),
        }
        if len(k) == 0:
            return out
        e = np.exp(1j * tau * X[..., None] * k) * (2 * c[1:])
        sr, cr = _ratios(k, tau, Y, h)
        kt = k * tau
        out["V"] += (e * sr).real.sum(-1)
        out["U"] += (-1j * e * cr).real.sum(-1)
        out["V_X"] += (1j * kt * e * sr).real.sum(-1)
        out["V_Y"] += (kt * e * cr).real.sum(-1)
        out["U_X"] += (kt * e * cr).real.sum(-1)
        out["U_Y"] += (-1j * kt * e * sr).real.sum(-1)
        out["V_XX"] += (-(kt**2) * e * sr).real.sum(-1)
        out["V_YY"] += (kt**2 * e * sr).real.sum(-1)
        return out

    def U(self, X, Y):
        return self.evaluate(X, Y)["U"]

    def V(self, X, Y):
        return self.evaluate(X, Y)["V"]

    def surface(self, X):
        """Parametric free surface (x, y) = (X + C_h w, w + h)."""
        d = self.evaluate(X, np.zeros_like(np.asarray(X, dtype=float)))
        return d["U"], d["V"]

    def cauchy_riemann_residual(self, X, Y):
        d = self.evaluate(X, Y)
        return float(max(np.max(np.abs(d["U_X"] - d["V_Y"])), np.max(np.abs(d["U_Y"] + d["V_X"]))))

    def harmonic_residual(self, X, Y):
        d = self.evaluate(X, Y)
        return float(np.max(np.abs(d["V_XX"] + d["V_YY"])))


def _winding(dz):
    ang = np.unwrap(np.angle(np.append(dz, dz[0])))
    return int(round((ang[-1] - ang[0]) / (2 * np.pi)))


def gradient_check(cmap, nX=512, nY=65):
    """min |grad V| on a strip grid and the winding numbers of H' on both edges."""
    X = np.arange(nX) * cmap.Lambda / nX
    Y = np.linspace(-cmap.h_conf, 0.0, nY)
    d = cmap.evaluate(X[None, :], Y[:, None])
    g = np.hypot(d["V_X"], d["V_Y"])
    Xf = np.arange(8 * nX) * cmap.Lambda / (8 * nX)
    top = cmap.evaluate(Xf, np.zeros_like(Xf))
    bot = cmap.evaluate(Xf, np.full_like(Xf, -cmap.h_conf))
    w_top = _winding(top["V_Y"] + 1j * top["V_X"])
    w_bot = _winding(bot["V_Y"] + 1j * bot["V_X"])
    return float(np.min(g)), w_top, w_bot


def build_conformal_map(w, h, check=True):
    """Conformal map of the strip -h < Y < 0 whose top trace is V = w + h.

    Raises DegenerateMap when |grad V| drops below the floor on the closed
    strip or when dH/dz has a zero inside (different winding on the edges).
    """
    if not h > 0:
        raise ValueError("conformal depth must be positive")
    cmap = ConformalMap(float(h), w)
    if check:
        gmin, wt, wb = gradient_check(cmap)
        if gmin < GRADIENT_FLOOR:
            raise DegenerateMap(f"min |grad V| = {gmin:.3g} below {GRADIENT_FLOOR:g}")
        if wt != wb or wb != 0:
            raise DegenerateMap(f"dH/dz vanishes inside the strip (winding {wt} vs {wb})")
    return cmap


def critical_amplitude(Lambda, h):
    """Amplitude at which a single cosine mode stalls the map on the surface."""
    tau = 2 * np.pi / Lambda
    return float(np.tanh(tau * h) / tau)


# -- self-intersection -------------------------------------------------------


@dataclass
class IntersectionReport:
    intersects: bool
    min_distance: float
    location: object  # (x, y) of the closest approach or crossing, or None
    pair: object

    def to_dict(self):
        return {
            "intersects": self.intersects,
            "min_distance": self.min_distance if np.isfinite(self.min_distance) else "inf",
            "location": None if self.location is None else [float(v) for v in self.location],
            "pair": None if self.pair is None else [int(v) for v in self.pair],
        }


def _point_segment(p, a, b):
    ab = b - a
    L = np.einsum("...i,...i->...", ab, ab)
    s = np.clip(np.einsum("...i,...i->...", p - a, ab) / np.where(L > 0, L, 1.0), 0.0, 1.0)
    q = a + s[..., None] * ab
    return np.linalg.norm(p - q, axis=-1), q


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def polyline_self_intersection(x, y, window=2, tol=INTERSECTION_TOL):
    """Closest approach of non-adjacent segments of an open polyline.

    Only pairs more than ``window`` segments apart whose x-extents overlap
    are compared; a graph over x therefore reports +inf.
    """
    P = np.column_stack([x, y]).astype(float)
    A, B = P[:-1], P[1:]
    n = len(A)
    lo = np.minimum(A[:, 0], B[:, 0])
    hi = np.maximum(A[:, 0], B[:, 0])
    i, j = np.nonzero(np.triu(np.ones((n, n), dtype=bool), window + 1))
    keep = (lo[i] <= hi[j]) & (lo[j] <= hi[i])
    # touching extents at a shared abscissa only (monotone graphs) do not count
    keep &= ~((hi[i] == lo[j]) | (hi[j] == lo[i]))
    i, j = i[keep], j[keep]
    if len(i) == 0:
        return IntersectionReport(False, np.inf, None, None)
    a, b, c, d = A[i], B[i], A[j], B[j]
    d1, d2 = _cross(b - a, c - a), _cross(b - a, d - a)
    d3, d4 = _cross(d - c, a - c), _cross(d - c, b - c)
    crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
    cands = [_point_segment(a, c, d), _point_segment(b, c, d), _point_segment(c, a, b), _point_segment(d, a, b)]
    dist = np.min([cd[0] for cd in cands], axis=0)
    dist = np.where(crossing, 0.0, dist)
    k = int(np.argmin(dist))
    if crossing[k]:
        t = d1[k] / (d1[k] - d2[k])
        loc = c[k] + t * (d[k] - c[k])
    else:
        which = int(np.argmin([cd[0][k] for cd in cands]))
        loc = cands[which][1][k]
    md = float(dist[k])
    return IntersectionReport(md < tol, md, tuple(loc), (int(i[k]), int(j[k])))


def surface_self_intersection(cmap, n=1024, guard=0.5):
    """Sample the surface over one period plus guard margins and test it."""
    L = cmap.Lambda
    X = np.linspace(-guard * L, (1 + guard) * L, int(round(n * (1 + 2 * guard))) + 1)
    x, y = cmap.surface(X)
    return polyline_self_intersection(x, y)


def conformal_depth(eta, h_phys, n=256, modes=DEFAULT_MODES, tol=1e-12, max_iter=200):
    """Conformal depth and surface trace for a graph surface y = h_phys + eta(x).

    Fixed-point iteration on w(X) = h_phys + eta(X + C_h w) - h_conf with
    h_conf set each sweep so that w has zero mean. ``eta`` is a
    PeriodicFunction in the physical variable.
    """
    L = eta.Lambda
    X = np.arange(n) * L / n
    w = PeriodicFunction(L, np.zeros(n // 2 + 1, dtype=complex))
    h = float(h_phys)
    for _ in range(max_iter):
        shift = periodic_hilbert(w, h)(X)
        g = h_phys + eta(X + shift)
        new = PeriodicFunction.from_samples(g, L)
        h_new = new.mean
        c = new.coeffs.copy()
        c[0] = 0
        c[modes + 1 :] = 0
        w_new = PeriodicFunction(L, c)
        err = max(abs(h_new - h), float(np.max(np.abs(w_new(X) - w(X)))))
        w, h = w_new, h_new
        if err < tol:
            return h, w
    raise DegenerateMap("conformal depth iteration did not converge")
