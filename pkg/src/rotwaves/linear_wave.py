"""First-order Stokes waves and the graph-domain coordinate maps.

The small-amplitude wave on top of a uniform stream Psi is

    psi(x, y; t) = Psi(y) + c* t gamma(y; tau*) cos(tau* x),
    eta(x; t)    = t cos(tau* x),

with c* = -Psi'(h) so that psi vanishes on y = h + eta to first order.
"""

from dataclasses import dataclass

import numpy as np

from .dispersion import gamma_profile
from .errors import AmplitudeTooLarge, OutOfDomain, SurfaceTouchesBed

FIXED_PERIOD = "fixed_period"
VARIABLE_PERIOD = "variable_period"
REGIMES = (FIXED_PERIOD, VARIABLE_PERIOD)
AMPLITUDE_WINDOW = 0.2


def check_regime(regime):
    if regime not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}, got {regime!r}")
    return regime


def bed_offset(regime, h):
    """Computational Y of the bed: 0 for fixed period, -h for variable period."""
    return 0.0 if check_regime(regime) == FIXED_PERIOD else -h


@dataclass(frozen=True)
class CosineSeries:
    """Even periodic function sum_k a_k cos(2 pi k x / period)."""

    coeffs: tuple
    period: float

    def __call__(self, x, nu=0):
        a = np.asarray(self.coeffs, dtype=float)
        k = np.arange(len(a)) * (2 * np.pi / self.period)
        arg = np.multiply.outer(np.asarray(x, dtype=float), k)
        basis = {0: np.cos, 1: lambda z: -np.sin(z), 2: lambda z: -np.cos(z)}[nu](arg)
        return basis @ (a * k**nu)

    def minimum(self, samples=2048):
        x = np.linspace(0, self.period / 2, samples)
        return float(np.min(self(x)))


@dataclass(frozen=True)
class CoordinateMap:
    """Map between a graph fluid domain and the computational rectangle.

    fixed period:    X = x,                 Y = h y / (h + eta(x))
    variable period: X = Lambda_star x / Lambda, Y = h (y - h - eta) / (h + eta)

    The rectangle is (0, Lambda_star/2) x (y0, y0 + h) with the bed at
    ``y0`` (0 or -h) and the free surface at ``y0 + h``.
    """

    regime: str
    h: float
    Lambda: float
    Lambda_star: float
    eta: CosineSeries

    @property
    def alpha(self):
        return self.Lambda_star / self.Lambda

    @property
    def y0(self):
        return bed_offset(self.regime, self.h)

    def _H(self, x, nu=0):
        return (self.h if nu == 0 else 0.0) + self.eta(x, nu)

    def forward(self, x, y):
        H = self._H(x)
        return self.alpha * np.asarray(x), self.y0 + self.h * np.asarray(y) / H

    def inverse(self, X, Y):
        x = np.asarray(X) / self.alpha
        return x, (np.asarray(Y) - self.y0) * self._H(x) / self.h

    def jacobian(self, X, Y):
        """d(x, y)/d(X, Y) of the inverse map, shape ``(..., 2, 2)``."""
        x = np.asarray(X) / self.alpha
        H, Hx = self._H(x), self._H(x, 1)
        s = np.asarray(Y) - self.y0
        J = np.zeros(np.broadcast(x, s).shape + (2, 2))
        J[..., 0, 0] = 1.0 / self.alpha
        J[..., 1, 0] = s * Hx / (self.h * self.alpha)
        J[..., 1, 1] = H / self.h
        return J

    def inverse_derivatives(self, X, Y):
        """Derivatives of (X, Y) with respect to (x, y) at computational points.

        Returns ``alpha, Y_x, Y_y, Y_xx, Y_xy``; X_x = alpha and all other
        derivatives of X vanish, as does Y_yy.
        """
        x = np.asarray(X) / self.alpha
        H, Hx, Hxx = self._H(x), self._H(x, 1), self._H(x, 2)
        s = np.asarray(Y) - self.y0
        Yx = -s * Hx / H
        Yy = self.h / H + 0.0 * s
        Yxx = s * (2 * Hx**2 - H * Hxx) / H**2
        Yxy = -self.h * Hx / H**2 + 0.0 * s
        return self.alpha, Yx, Yy, Yxx, Yxy


def coordinate_map(regime, h, Lambda, Lambda_star, eta):
    """Build a :class:`CoordinateMap`; ``eta`` is a CosineSeries or coefficient list."""
    check_regime(regime)
    if not isinstance(eta, CosineSeries):
        eta = CosineSeries(tuple(float(a) for a in np.atleast_1d(eta)), float(Lambda))
    if abs(eta.period - Lambda) > 1e-12 * Lambda:
        raise ValueError("eta must be periodic with the physical period Lambda")
    if regime == FIXED_PERIOD and abs(Lambda - Lambda_star) > 1e-12 * Lambda_star:
        raise ValueError("fixed-period maps need Lambda == Lambda_star")
    if h + eta.minimum() <= 0:
        raise SurfaceTouchesBed(f"min(eta) + h = {h + eta.minimum():.3g} <= 0")
    return CoordinateMap(regime, float(h), float(Lambda), float(Lambda_star), eta)


@dataclass(frozen=True, eq=False)
class LinearWave:
    stream: object
    tau_star: float
    c_star: float
    t: float
    regime: str
    sample: object

    @property
    def h(self):
        return self.stream.h

    @property
    def Lambda_star(self):
        return 2 * np.pi / self.tau_star

    def eta(self, x, nu=0):
        tau = self.tau_star
        x = np.asarray(x, dtype=float)
        if nu == 0:
            return self.t * np.cos(tau * x)
        if nu == 1:
            return -self.t * tau * np.sin(tau * x)
        return -self.t * tau**2 * np.cos(tau * x)

    def _parts(self, x, y):
        s = self.stream
        y = np.asarray(y, dtype=float)
        st = s._state(y)
        psi0, dpsi0 = st[..., 0], st[..., 1]
        ddpsi0 = -s.vort.eval(psi0)
        g = self.sample.gamma
        cos = np.cos(self.tau_star * np.asarray(x))
        sin = np.sin(self.tau_star * np.asarray(x))
        return psi0, dpsi0, ddpsi0, g(y), g(y, 1), g(y, 2), cos, sin

    def psi(self, x, y):
        psi0, _, _, g, _, _, cos, _ = self._parts(x, y)
        return psi0 + self.c_star * self.t * g * cos

    def derivatives(self, x, y):
        """Analytic (psi_x, psi_y, psi_xx, psi_xy, psi_yy) of the expansion."""
        _, d0, dd0, g, dg, ddg, cos, sin = self._parts(x, y)
        a, tau = self.c_star * self.t, self.tau_star
        return (
            -a * tau * g * sin,
            d0 + a * dg * cos,
            -a * tau**2 * g * cos,
            -a * tau * dg * sin,
            dd0 + a * ddg * cos,
        )

    def field_residual(self, x, y):
        """Delta psi + omega(psi) of the first-order field."""
        px, py, pxx, pxy, pyy = self.derivatives(x, y)
        return pxx + pyy + self.stream.vort.eval(self.psi(x, y))

    def surface(self, x):
        return self.h + self.eta(x)

    def bernoulli_residual(self, x):
        """|grad psi|^2/2 + y - h - Q on y = h + eta(x)."""
        y = self.surface(x)
        px, py, *_ = self.derivatives(x, y)
        return 0.5 * (px**2 + py**2) + (y - self.h) - self.stream.Q

    def kinematic_residual(self, x):
        return self.psi(x, self.surface(x))


def build_linear_wave(stream, tau_star, t, regime=FIXED_PERIOD, c_star_at="surface", sign=1.0):
    """First-order wave of amplitude ``t`` bifurcating at frequency ``tau_star``.

    ``c_star_at`` picks where -Psi' is evaluated: "surface" (y = h, the
    choice that satisfies the kinematic condition at first order) or "bed"
    (y = 0). ``sign`` flips c* and with it the branch direction.
    """
    check_regime(regime)
    if abs(t) > AMPLITUDE_WINDOW * stream.h:
        raise AmplitudeTooLarge(f"|t|={abs(t):.3g} exceeds {AMPLITUDE_WINDOW}*h")
    if c_star_at == "surface":
        c = -stream.kappa
    elif c_star_at == "bed":
        c = -float(stream._state(0.0)[1])
    else:
        raise ValueError("c_star_at must be 'surface' or 'bed'")
    sample = gamma_profile(stream, tau_star)
    return LinearWave(stream, float(tau_star), float(sign) * c, float(t), regime, sample)


def linear_wave_slope(w, x, y):
    """psi_x of the first-order field at a point of the closed fluid domain."""
    tol = 1e-12 * w.h
    if y < -tol or y > w.surface(x) + tol:
        raise OutOfDomain(f"({x:.6g}, {y:.6g}) lies outside the fluid domain")
    return float(w.derivatives(x, y)[0])
