"""Discrete wave fields on the half-period cell and their diagnostics.

A :class:`WaveField` stores the stream function ``phi`` on the computational
rectangle (cosine collocation in X, uniform nodes in Y) together with the
cosine coefficients of the surface elevation. Physical derivatives are
obtained by pushing computational derivatives through the coordinate map.
"""

import json
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from ._grid import Grid
from .errors import DegenerateField
from .linear_wave import (
    FIXED_PERIOD,
    CosineSeries,
    bed_offset,
    check_regime,
    coordinate_map,
)
from .vorticity import VorticityFn

FORMAT = "wavefield-v1"
STRICT_TOL = 1e-10
DEGENERATE_TOL = 1e-12
GRAPH_THRESHOLD = 0.1


@dataclass(frozen=True, eq=False)
class WaveField:
    """Stream function and surface on the half cell ``(0, Lambda_star/2) x (y0, y0+h)``.

    ``phi`` has shape ``(ny + 1, nx)`` with row 0 on the bed and row ``ny``
    on the surface; ``eta`` holds ``nx`` cosine coefficients in X.
    """

    regime: str
    Lambda: float
    Lambda_star: float
    lam: float
    Q: float
    m: float
    t: float
    h: float
    vort: VorticityFn
    phi: np.ndarray
    eta: np.ndarray
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        check_regime(self.regime)
        phi = np.asarray(self.phi, dtype=float)
        if phi.ndim != 2 or len(self.eta) != phi.shape[1]:
            raise ValueError("phi must be (ny+1, nx) with nx eta coefficients")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float))

    @property
    def nx(self):
        return self.phi.shape[1]

    @property
    def ny(self):
        return self.phi.shape[0] - 1

    @cached_property
    def grid(self):
        return Grid(self.nx, self.ny, self.Lambda_star, self.h, bed_offset(self.regime, self.h))

    @cached_property
    def map(self):
        series = CosineSeries(tuple(self.eta), self.Lambda)
        return coordinate_map(self.regime, self.h, self.Lambda, self.Lambda_star, series)

    def eta_nodes(self, nu=0):
        """Surface elevation (or its x-derivatives) at the X nodes."""
        return self.map.eta(self.grid.X / self.map.alpha, nu)

    def physical_nodes(self):
        """Physical coordinates (x, y) of every grid node."""
        Xg, Yg = np.meshgrid(self.grid.X, self.grid.Y)
        return self.map.inverse(Xg, Yg)

    @cached_property
    def _metric(self):
        Xg, Yg = np.meshgrid(self.grid.X, self.grid.Y)
        return self.map.inverse_derivatives(Xg, Yg)

    @cached_property
    def computational_derivatives(self):
        """phi_X, phi_Y, phi_XX, phi_XY, phi_YY on the grid."""
        g, p = self.grid, self.phi
        pX = g.dX_even(p)
        return pX, g.dY(p), g.dXX_even(p), g.dY(pX), g.dYY(p)

    @cached_property
    def derivatives(self):
        """Physical psi_x, psi_y, psi_xx, psi_xy, psi_yy on the grid."""
        return physical_derivatives(self.computational_derivatives, self._metric)

    def with_phi(self, phi, **changes):
        kw = dict(
            regime=self.regime, Lambda=self.Lambda, Lambda_star=self.Lambda_star,
            lam=self.lam, Q=self.Q, m=self.m, t=self.t, h=self.h, vort=self.vort,
            phi=phi, eta=self.eta, meta=dict(self.meta),
        )
        kw.update(changes)
        return WaveField(**kw)

    def to_dict(self):
        return {
            "format": FORMAT,
            "regime": self.regime,
            "Lambda": self.Lambda,
            "Lambda_star": self.Lambda_star,
            "lambda": self.lam,
            "Q": self.Q,
            "m": self.m,
            "t": self.t,
            "h": self.h,
            "vorticity": self.vort.to_dict(),
            "nx": self.nx,
            "ny": self.ny,
            "eta": [float(a) for a in self.eta],
            "phi": [[float(v) for v in row] for row in self.phi],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != FORMAT:
            raise ValueError(f"not a {FORMAT} document")
        phi = np.array(d["phi"], dtype=float)
        if phi.shape != (d["ny"] + 1, d["nx"]) or not np.all(np.isfinite(phi)):
            raise ValueError("phi array does not match the declared grid")
        return cls(
            regime=d["regime"], Lambda=float(d["Lambda"]), Lambda_star=float(d["Lambda_star"]),
            lam=float(d["lambda"]), Q=float(d["Q"]), m=float(d["m"]), t=float(d["t"]),
            h=float(d["h"]), vort=VorticityFn.from_dict(d["vorticity"]), phi=phi,
            eta=np.array(d["eta"], dtype=float), meta=dict(d.get("meta", {})),
        )


def physical_derivatives(comp, metric):
    """Chain rule from (X, Y) derivatives of phi to (x, y) derivatives of psi."""
    pX, pY, pXX, pXY, pYY = comp
    a, Yx, Yy, Yxx, Yxy = metric
    px = a * pX + Yx * pY
    py = Yy * pY
    pxx = a * a * pXX + 2 * a * Yx * pXY + Yx * Yx * pYY + Yxx * pY
    pxy = a * Yy * pXY + Yx * Yy * pYY + Yxy * pY
    pyy = Yy * Yy * pYY
    return px, py, pxx, pxy, pyy


def dumps(obj):
    """Deterministic JSON: repr floats, fixed key order."""
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def save_field(f, path):
    with open(path, "w") as fh:
        fh.write(dumps(f.to_dict()))


def load_field(path):
    with open(path) as fh:
        return WaveField.from_dict(json.load(fh))


# -- constructors ------------------------------------------------------------


def from_stream(stream, Lambda_star, nx=16, ny=64, regime=FIXED_PERIOD, Lambda=None):
    """Sample a uniform stream on the flat-surface grid."""
    Lambda = Lambda_star if Lambda is None else Lambda
    y0 = bed_offset(regime, stream.h)
    g = Grid(nx, ny, Lambda_star, stream.h, y0)
    col = stream.psi(g.Y - y0)
    phi = np.repeat(col[:, None], nx, axis=1)
    phi[-1] = 0.0
    return WaveField(
        regime=regime, Lambda=Lambda, Lambda_star=Lambda_star, lam=stream.lam,
        Q=stream.Q, m=stream.m, t=0.0, h=stream.h, vort=stream.vort,
        phi=phi, eta=np.zeros(nx),
    )


def from_linear_wave(w, nx=16, ny=64, Lambda=None):
    """Sample a first-order wave; the surface row holds psi on y = h + eta."""
    Lambda_star = w.Lambda_star
    Lambda = Lambda_star if Lambda is None else Lambda
    eta = np.zeros(nx)
    eta[1] = w.t
    f = WaveField(
        regime=w.regime, Lambda=Lambda, Lambda_star=Lambda_star, lam=w.stream.lam,
        Q=w.stream.Q, m=w.stream.m, t=w.t, h=w.h, vort=w.stream.vort,
        phi=np.zeros((ny + 1, nx)), eta=eta,
    )
    x, y = f.physical_nodes()
    # the expansion lives in physical units with period Lambda_star
    phi = w.psi(x * f.map.alpha, y)
    return f.with_phi(phi)


# -- residuals ---------------------------------------------------------------


def pde_residual(f):
    """Delta psi + omega(psi) on interior rows, shape ``(ny - 1, nx)``."""
    _, _, pxx, _, pyy = f.derivatives
    r = pxx + pyy + f.vort.eval(f.phi)
    return r[1:-1]


def bernoulli_residual(f):
    """Surface residual of |grad psi|^2/2 + y - h - Q; returns (sup, profile)."""
    px, py, *_ = f.derivatives
    prof = 0.5 * (px[-1] ** 2 + py[-1] ** 2) + f.eta_nodes() - f.Q
    return float(np.max(np.abs(prof))), prof


def stagnation_margin(f):
    """Smallest physical speed |grad psi| over the surface nodes."""
    px, py, *_ = f.derivatives
    return float(np.min(np.hypot(px[-1], py[-1])))


def robin_residual(f, threshold=GRAPH_THRESHOLD):
    """Sup of |d_nu(psi_x) - rho psi_x| over graph-like surface nodes.

    ``rho = (1 + psi_x psi_xy + psi_y psi_yy) / (psi_y |grad psi|)`` follows
    from differentiating the Bernoulli condition along y = f(x) with
    f' = -psi_x / psi_y. Nodes with |psi_y| < threshold |grad psi| are skipped.
    """
    px, py, pxx, pxy, pyy = (d[-1] for d in f.derivatives)
    g = np.hypot(px, py)
    ok = np.abs(py) >= threshold * g
    if not np.any(ok):
        return 0.0, ok
    px, py, pxx, pxy, pyy, g = (a[ok] for a in (px, py, pxx, pxy, pyy, g))
    rho = (1 + px * pxy + py * pyy) / (py * g)
    res = (px * pxx + py * pxy) / g - rho * px
    return float(np.max(np.abs(res))), ok


def min_surface_height(f):
    return float(f.h + f.map.eta.minimum())


def surface_monotone(f, samples=257):
    """Sign of eta' when it is strictly one-signed on (0, Lambda/2), else 0."""
    x = np.linspace(0, f.Lambda / 2, samples)[1:-1]
    d = f.map.eta(x, 1)
    scale = max(float(np.max(np.abs(d))), 1e-300)
    if np.all(d < -STRICT_TOL * scale):
        return -1
    if np.all(d > STRICT_TOL * scale):
        return 1
    return 0


# -- nodal checker -----------------------------------------------------------


@dataclass
class Verdict:
    """Strict-sign test outcome; ``holds`` is None when indeterminate."""

    holds: object
    margin: float

    @classmethod
    def of(cls, values, scale):
        m = float(np.min(values)) if np.size(values) else np.inf
        band = STRICT_TOL * scale
        if m > band:
            return cls(True, m)
        if m < -band:
            return cls(False, m)
        return cls(None, m)


@dataclass
class NodalReport:
    orientation: int
    mode: str
    property_i: Verdict
    property_ii_left: Verdict
    property_ii_right: Verdict
    property_ii_bed: Verdict
    property_iii_left: Verdict
    property_iii_right: Verdict
    stagnation_margin: float
    bernoulli_sup: float
    robin_sup: float
    surface_monotone: int

    KEYS = (
        "property_i", "property_ii_left", "property_ii_right", "property_ii_bed",
        "property_iii_left", "property_iii_right",
    )

    def booleans(self):
        return {k: getattr(self, k).holds for k in self.KEYS}

    @property
    def all_pass(self):
        return all(v is True for v in self.booleans().values())

    def to_dict(self):
        d = {k: getattr(self, k).holds for k in self.KEYS}
        d["stagnation_margin"] = self.stagnation_margin
        d["bernoulli_sup"] = self.bernoulli_sup
        d["robin_sup"] = self.robin_sup
        d["surface_monotone"] = self.surface_monotone
        d["orientation"] = self.orientation
        d["mode"] = self.mode
        d["margins"] = {k: getattr(self, k).margin for k in self.KEYS}
        return d


def _slope_derivatives(f, v):
    g = f.grid
    vX = g.dX_odd(v)
    vY = g.dY(v)
    return vX, vY, g.dY(vX), g.dYY(v)


def _orientation(f, orientation):
    px = f.derivatives[0]
    scale = max(float(np.max(np.abs(f.phi))), f.h * abs(f.lam), 1e-300)
    if float(np.max(np.abs(px))) <= DEGENERATE_TOL * scale:
        raise DegenerateField("psi_x vanishes identically; the field is a uniform stream")
    if orientation == "auto":
        return 1 if np.sum(px) >= 0 else -1
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1, -1 or 'auto'")
    return int(orientation)


def check_nodal(f, orientation="auto", mode="computational"):
    """Sign tests of u = orientation * psi_x on the half cell.

    mode "computational" tests u, u_X, u_Y, u_XY on the rectangle;
    "physical" pushes those derivatives to (x, y) first. Both cover the
    same node sets: interior plus surface for (i), the two sides and the
    bed for (ii), the two bottom corners for (iii).
    """
    if mode not in ("computational", "physical"):
        raise ValueError("mode must be 'computational' or 'physical'")
    sgn = _orientation(f, orientation)
    v = sgn * f.derivatives[0]
    vX, vY, vXY, vYY = _slope_derivatives(f, v)
    if mode == "physical":
        a, Yx, Yy, _, Yxy = f._metric
        vX, vY, vXY = a * vX + Yx * vY, Yy * vY, a * Yy * vXY + Yx * Yy * vYY + Yxy * vY
    inner = slice(1, -1)
    scale_v = float(np.max(np.abs(v)))
    scale_d = max(float(np.max(np.abs(vX))), float(np.max(np.abs(vY))))
    scale_c = float(np.max(np.abs(vXY)))
    return NodalReport(
        orientation=sgn,
        mode=mode,
        property_i=Verdict.of(v[1:, inner], scale_v),
        property_ii_left=Verdict.of(vX[1:, 0], scale_d),
        property_ii_right=Verdict.of(-vX[1:, -1], scale_d),
        property_ii_bed=Verdict.of(vY[0, inner], scale_d),
        property_iii_left=Verdict.of(vXY[0, :1], scale_c),
        property_iii_right=Verdict.of(-vXY[0, -1:], scale_c),
        stagnation_margin=stagnation_margin(f),
        bernoulli_sup=bernoulli_residual(f)[0],
        robin_sup=robin_residual(f)[0],
        surface_monotone=surface_monotone(f),
    )
