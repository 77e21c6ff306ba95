"""Newton solver and pseudo-arclength continuation of graph-surface waves.

Unknowns are the interior rows of the grid stream function, the surface
elevation at the X nodes and one scalar parameter: the surface velocity
``lambda`` (fixed period) or the physical period ``Lambda`` (variable
period). Equations are the transformed field equation on interior rows and
the Bernoulli condition on the surface row, closed by one extra constraint.
"""

import csv
import io
import logging
import os
from dataclasses import asdict, dataclass, field as dc_field
from functools import lru_cache

import numpy as np
from scipy.linalg import lapack, lu_factor, lu_solve

from ._grid import Grid
from .dispersion import transversality
from .errors import DegenerateField, NewtonFailure, SolverFailure
from .field import (
    WaveField,
    bernoulli_residual,
    check_nodal,
    dumps,
    from_linear_wave,
    min_surface_height,
    physical_derivatives,
    stagnation_margin,
    surface_monotone,
)
from .linear_wave import FIXED_PERIOD, VARIABLE_PERIOD, bed_offset, check_regime
from .uniform_stream import solve_uniform_stream

log = logging.getLogger(__name__)

TERMINATIONS = (
    "max_steps", "stagnation_approach", "bed_approach", "unbounded_solution",
    "period_degenerate", "loop_detected", "newton_failure",
)
COND_LIMIT = 1e14


@lru_cache(maxsize=512)
def _stream(vort, h, lam):
    return solve_uniform_stream(vort, h, lam)


@dataclass
class ContinuationConfig:
    ds: float = 0.005
    max_steps: int = 20
    nx: int = 12
    ny: int = 48
    tol: float = 1e-9
    max_iter: int = 25
    retries: int = 3
    eps_stag: float = 1e-3  # times lambda*
    eps_bed: float = 1e-3  # times h
    unbounded: float = 1e3  # times the norm of the first point
    period_range: float = 100.0
    loop_radius: float = 1e-6

    def __post_init__(self):
        for k in ("ds", "tol", "eps_stag", "eps_bed", "unbounded", "loop_radius"):
            v = getattr(self, k)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{k} must be positive and finite, got {v!r}")
        if self.period_range <= 1:
            raise ValueError("period_range must exceed 1")
        if self.max_steps < 0 or self.max_iter < 1 or self.retries < 0:
            raise ValueError("max_steps, max_iter and retries must be nonnegative")
        if self.nx < 4 or self.ny < 6:
            raise ValueError("grid needs nx >= 4 and ny >= 6")


class Discretization:
    """Residual map F(z) for z = (phi interior rows, eta nodes, parameter)."""

    def __init__(self, vort, h, regime, Lambda_star, lam_star, nx, ny):
        self.vort, self.h, self.regime = vort, float(h), check_regime(regime)
        self.Lambda_star, self.lam_star = float(Lambda_star), float(lam_star)
        self.grid = Grid(nx, ny, Lambda_star, h, bed_offset(regime, h))
        self.nx, self.ny = nx, ny
        self.n_phi = (ny - 1) * nx
        self.size = self.n_phi + nx + 1
        s = _stream(vort, self.h, self.lam_star)
        self._mQ_star = (s.m, s.Q)
        self.p_star = self.lam_star if regime == FIXED_PERIOD else self.Lambda_star
        self._s = (self.grid.Y - self.grid.y0)[:, None]

    def m_Q(self, p):
        if self.regime == VARIABLE_PERIOD:
            return self._mQ_star
        s = _stream(self.vort, self.h, float(p))
        return s.m, s.Q

    def alpha(self, p):
        return np.ones_like(p) if self.regime == FIXED_PERIOD else self.Lambda_star / p

    def unpack(self, Z):
        Z = np.atleast_2d(Z)
        K = Z.shape[0]
        phi_int = Z[:, : self.n_phi].reshape(K, self.ny - 1, self.nx)
        eta = Z[:, self.n_phi : self.n_phi + self.nx]
        return phi_int, eta, Z[:, -1]

    def full_phi(self, phi_int, p):
        K = phi_int.shape[0]
        phi = np.zeros((K, self.ny + 1, self.nx))
        phi[:, 1:-1] = phi_int
        phi[:, 0] = -np.array([self.m_Q(q)[0] for q in p])[:, None]
        return phi

    def residual(self, Z):
        """Field and Bernoulli residuals for a batch of states, shape (K, size-1)."""
        g = self.grid
        phi_int, eta, p = self.unpack(Z)
        phi = self.full_phi(phi_int, p)
        Q = np.array([self.m_Q(q)[1] for q in p])
        a = self.alpha(p)
        H = self.h + eta
        Hx = a[:, None] * (eta @ g.DX_even.T)
        Hxx = (a * a)[:, None] * (eta @ g.DXX_even.T)
        H, Hx, Hxx = H[:, None, :], Hx[:, None, :], Hxx[:, None, :]
        s = self._s[None]
        metric = (
            a[:, None, None],
            -s * Hx / H,
            self.h / H,
            s * (2 * Hx**2 - H * Hxx) / H**2,
            -self.h * Hx / H**2,
        )
        pX = phi @ g.DX_even.T
        comp = (pX, g.DY @ phi, phi @ g.DXX_even.T, g.DY @ pX, g.DYY @ phi)
        px, py, pxx, _, pyy = physical_derivatives(comp, metric)
        pde = (pxx + pyy + self.vort.eval(phi))[:, 1:-1].reshape(len(p), -1)
        bern = 0.5 * (px[:, -1] ** 2 + py[:, -1] ** 2) + eta - Q[:, None]
        return np.concatenate([pde, bern], axis=1)

    def jacobian(self, z, columns=None, central=False, chunk=256):
        """Finite-difference Jacobian of :meth:`residual` at ``z``."""
        cols = np.arange(self.size) if columns is None else np.asarray(columns)
        steps = 1e-7 * np.maximum(1.0, np.abs(z[cols]))
        if central:
            steps = 1e-5 * np.maximum(1.0, np.abs(z[cols]))
        f0 = None if central else self.residual(z)[0]
        J = np.empty((self.size - 1, len(cols)))
        for lo in range(0, len(cols), chunk):
            c, hs = cols[lo : lo + chunk], steps[lo : lo + chunk]
            Zp = np.repeat(z[None], len(c), axis=0)
            Zp[np.arange(len(c)), c] += hs
            if central:
                Zm = np.repeat(z[None], len(c), axis=0)
                Zm[np.arange(len(c)), c] -= hs
                J[:, lo : lo + len(c)] = ((self.residual(Zp) - self.residual(Zm)) / (2 * hs[:, None])).T
            else:
                J[:, lo : lo + len(c)] = ((self.residual(Zp) - f0) / hs[:, None]).T
        return J

    # state <-> field
    def pack(self, f):
        z = np.empty(self.size)
        z[: self.n_phi] = f.phi[1:-1].ravel()
        z[self.n_phi : -1] = self.grid.from_coeffs @ f.eta
        z[-1] = f.lam if self.regime == FIXED_PERIOD else f.Lambda
        return z

    def coefficients(self, z):
        return self.grid.to_coeffs @ z[self.n_phi : -1]

    def field(self, z, **meta):
        phi_int, eta, p = self.unpack(z)
        p = float(p[0])
        phi = self.full_phi(phi_int, [p])[0]
        m, Q = self.m_Q(p)
        coeffs = self.coefficients(z)
        lam = p if self.regime == FIXED_PERIOD else self.lam_star
        Lam = self.Lambda_star if self.regime == FIXED_PERIOD else p
        return WaveField(
            regime=self.regime, Lambda=Lam, Lambda_star=self.Lambda_star, lam=lam,
            Q=Q, m=m, t=float(coeffs[1]), h=self.h, vort=self.vort, phi=phi,
            eta=coeffs, meta=dict(meta),
        )

    def trivial(self, p):
        """State vector of the uniform stream at parameter ``p``."""
        lam = p if self.regime == FIXED_PERIOD else self.lam_star
        s = _stream(self.vort, self.h, lam)
        col = s.psi(self.grid.Y - self.grid.y0)
        z = np.zeros(self.size)
        z[: self.n_phi] = np.repeat(col[1:-1, None], self.nx, axis=1).ravel()
        z[-1] = p
        return z

    def metric_vector(self, z):
        """Coordinates used for arclength: eta coefficients / h and p / p*."""
        return np.concatenate([self.coefficients(z) / self.h, [z[-1] / self.p_star]])

    @classmethod
    def for_field(cls, f):
        return cls(f.vort, f.h, f.regime, f.Lambda_star, f.lam, f.nx, f.ny)


# -- constraints -------------------------------------------------------------


@dataclass(frozen=True)
class PinAmplitude:
    """First cosine coefficient of eta equals ``t``."""

    t: float

    def __call__(self, disc, z):
        return disc.coefficients(z)[1] - self.t


@dataclass(frozen=True)
class PinParameter:
    value: float

    def __call__(self, disc, z):
        return (z[-1] - self.value) / disc.p_star


@dataclass(frozen=True)
class Arclength:
    """Distance ``ds`` from ``center`` in the (eta / h, p / p*) metric."""

    center: tuple
    ds: float

    def __call__(self, disc, z):
        d = disc.metric_vector(z) - np.asarray(self.center)
        return (d @ d - self.ds**2) / (2 * self.ds)


def _constraint_row(disc, z, con):
    base = con(disc, z)
    row = np.empty(disc.size)
    eps = 1e-7 * np.maximum(1.0, np.abs(z))
    # the constraints touch only eta nodes and the parameter
    row[: disc.n_phi] = 0.0
    for j in range(disc.n_phi, disc.size):
        zp = z.copy()
        zp[j] += eps[j]
        row[j] = (con(disc, zp) - base) / eps[j]
    return base, row


def _full_residual(disc, z, con):
    return np.concatenate([disc.residual(z)[0], [con(disc, z)]])


def _newton(disc, z, con, tol, max_iter):
    for it in range(max_iter + 1):
        if np.min(disc.h + z[disc.n_phi : -1]) <= 0:
            raise NewtonFailure("surface touches the bed during Newton", it, np.inf)
        F = _full_residual(disc, z, con)
        res = float(np.max(np.abs(F)))
        if not np.isfinite(res):
            raise NewtonFailure("non-finite residual", it, res)
        if res <= tol:
            return z, it, res
        if it == max_iter:
            raise NewtonFailure(f"no convergence in {max_iter} iterations", it, res)
        J = np.empty((disc.size, disc.size))
        J[:-1] = disc.jacobian(z)
        J[-1] = _constraint_row(disc, z, con)[1]
        lu, piv = lu_factor(J, check_finite=False)
        rcond, info = lapack.dgecon(lu, np.linalg.norm(J, 1), norm="1")
        if info != 0 or rcond * COND_LIMIT < 1:
            raise NewtonFailure(f"singular Jacobian (condition ~ {1 / max(rcond, 1e-300):.3g})", it, res)
        z = z - lu_solve((lu, piv), F, check_finite=False)
    raise AssertionError("unreachable")


def newton_solve(initial, constraint=None, tol=1e-9, max_iter=25, disc=None):
    """Solve the discrete free-boundary problem starting from ``initial``.

    ``constraint`` defaults to pinning the amplitude at ``initial.t``.
    Returns the converged WaveField; its ``meta`` records the iteration
    count and the final scaled residual.
    """
    disc = disc or Discretization.for_field(initial)
    con = constraint if constraint is not None else PinAmplitude(initial.t)
    z, it, res = _newton(disc, disc.pack(initial), con, tol, max_iter)
    return disc.field(z, iterations=it, newton_residual=res)


# -- bifurcation point --------------------------------------------------------


def _det_sign(disc, p):
    z = disc.trivial(p)
    J = disc.jacobian(z, columns=np.arange(disc.size - 1), central=True)
    sign, _ = np.linalg.slogdet(J)
    return sign


def discrete_bifurcation(disc, rel_tol=1e-12, max_expand=12):
    """Parameter where the trivial-branch Jacobian changes sign, near p*."""
    p = disc.p_star
    s0 = _det_sign(disc, p)
    for k in range(max_expand):
        d = 1e-3 * 2**k * p
        for q in (p - d, p + d):
            if q > 0 and _det_sign(disc, q) != s0:
                lo, hi = sorted((p, q))
                slo = _det_sign(disc, lo)
                while hi - lo > rel_tol * p:
                    mid = 0.5 * (lo + hi)
                    if _det_sign(disc, mid) == slo:
                        lo = mid
                    else:
                        hi = mid
                return 0.5 * (lo + hi)
    raise SolverFailure("no sign change of the trivial-branch Jacobian near the bifurcation")


# -- branches ----------------------------------------------------------------


@dataclass
class BranchPoint:
    index: int
    t: float
    parameter: float
    arclength: float
    newton_residual: float
    iterations: int
    Q: float
    m: float
    stagnation_margin: float
    bernoulli_sup: float
    min_surface_height: float
    eta_sup: float
    norm: float
    surface_monotone: int
    nodal: object = None
    metric: np.ndarray = None
    field: WaveField = None

    def row(self):
        b = self.nodal.booleans() if self.nodal is not None else {}
        keys = (
            "property_i", "property_ii_left", "property_ii_right", "property_ii_bed",
            "property_iii_left", "property_iii_right",
        )
        return [
            self.index, self.t, self.parameter, self.Q, self.m, self.newton_residual,
            self.stagnation_margin, self.bernoulli_sup,
            *[_fmt_bool(b.get(k, "degenerate")) for k in keys],
            self.nodal.orientation if self.nodal is not None else 0,
            self.min_surface_height, self.eta_sup,
        ]


CSV_HEADER = [
    "index", "t", "parameter", "Q", "m", "newton_residual", "stagnation_margin",
    "bernoulli_sup", "property_i", "property_ii_left", "property_ii_right",
    "property_ii_bed", "property_iii_left", "property_iii_right", "orientation",
    "min_surface_height", "eta_sup",
]


def _fmt_bool(v):
    return {True: "true", False: "false", None: "indeterminate"}.get(v, v)


@dataclass
class LoopReport:
    certificate: object  # (i, j, distance) or None
    uniform_hits: list
    artifact_warning: bool

    def to_dict(self):
        return {
            "certificate": None if self.certificate is None else list(self.certificate),
            "uniform_hits": [list(u) for u in self.uniform_hits],
            "artifact_warning": self.artifact_warning,
        }


@dataclass
class Branch:
    regime: str
    points: list
    termination: str = None
    loop: LoopReport = None
    trivial: bool = False
    header: dict = dc_field(default_factory=dict)

    @property
    def parameters(self):
        return np.array([p.parameter for p in self.points])

    @property
    def amplitudes(self):
        return np.array([p.t for p in self.points])

    def orientations(self):
        return [p.nodal.orientation for p in self.points if p.nodal is not None]


def _point(disc, z, index, arclength, res, it, orientation="auto"):
    f = disc.field(z)
    try:
        nodal = check_nodal(f, orientation)
    except DegenerateField:
        nodal = None
    return BranchPoint(
        index=index, t=f.t, parameter=float(z[-1]), arclength=arclength,
        newton_residual=res, iterations=it, Q=f.Q, m=f.m,
        stagnation_margin=stagnation_margin(f), bernoulli_sup=bernoulli_residual(f)[0],
        min_surface_height=min_surface_height(f), eta_sup=float(np.max(np.abs(z[disc.n_phi : -1]))),
        norm=float(np.max(np.abs(z[:-1]))), surface_monotone=surface_monotone(f),
        nodal=nodal, metric=disc.metric_vector(z), field=f,
    )


def loop_certificate(vectors, arclength, radius):
    """First non-adjacent pair (i, j, distance) closer than ``radius``.

    A pair only counts when the arclength between the two points exceeds
    ``radius``, i.e. the curve returns to a point it left.
    """
    V = np.asarray(vectors, dtype=float)
    s = np.asarray(arclength, dtype=float)
    for j in range(2, len(V)):
        d = np.linalg.norm(V[: j - 1] - V[j], axis=1)
        hits = np.nonzero((d < radius) & (np.abs(s[j] - s[: j - 1]) > radius))[0]
        if len(hits):
            i = int(hits[0])
            return (i, j, float(d[i]))
    return None


def detect_loop(b, radius=1e-6, min_points=10):
    """Closed-curve certificate and the list of near-uniform-stream points."""
    hits = [(p.index, p.parameter) for p in b.points if p.eta_sup < radius]
    distinct = []
    for _, q in hits:
        if all(abs(q - r) > radius * max(1.0, abs(r)) for r in distinct):
            distinct.append(q)
    warn = b.regime == VARIABLE_PERIOD and len(distinct) > 1
    cert = None
    if len(b.points) >= min_points:
        cert = loop_certificate([p.metric for p in b.points], [p.arclength for p in b.points], radius)
    return LoopReport(cert, hits, warn)


@dataclass
class Thresholds:
    stagnation: float
    bed: float
    unbounded: float
    Lambda_min: float
    Lambda_max: float
    loop_radius: float
    max_steps: int


def thresholds_for(config, lam_star, h, initial_norm, Lambda_star):
    return Thresholds(
        stagnation=config.eps_stag * abs(lam_star),
        bed=config.eps_bed * h,
        unbounded=config.unbounded * initial_norm,
        Lambda_min=Lambda_star / config.period_range,
        Lambda_max=Lambda_star * config.period_range,
        loop_radius=config.loop_radius,
        max_steps=config.max_steps,
    )


def detect_termination(b, th):
    """First triggered termination reason at the last point, or None."""
    last = b.points[-1]
    if last.stagnation_margin < th.stagnation:
        return "stagnation_approach"
    if last.min_surface_height < th.bed:
        return "bed_approach"
    if last.norm > th.unbounded:
        return "unbounded_solution"
    if b.regime == VARIABLE_PERIOD and not (th.Lambda_min <= last.parameter <= th.Lambda_max):
        return "period_degenerate"
    if len(b.points) >= 10:
        rep = detect_loop(b, th.loop_radius)
        if rep.certificate is not None:
            b.loop = rep
            return "loop_detected"
    if len(b.points) - 1 >= th.max_steps:
        return "max_steps"
    return None


def _seed_direction(disc, seed, p0, ds):
    """Predictor increment from the bifurcation point along the linear wave."""
    t1 = np.copysign(ds * disc.h, seed.t)
    w = type(seed)(seed.stream, seed.tau_star, seed.c_star, t1, seed.regime, seed.sample)
    f = from_linear_wave(w, disc.nx, disc.ny, Lambda=None)
    z1 = disc.pack(f)
    z1[-1] = p0
    return z1 - disc.trivial(p0)


def continue_branch(seed, config=None):
    """Trace the branch through the seed's bifurcation point.

    Point 0 is the discrete bifurcation point on the uniform-stream branch;
    later points are spaced ``ds`` apart in the (eta / h, p / p*) metric.
    A seed with ``t == 0`` follows the uniform-stream branch instead.
    """
    cfg = config or ContinuationConfig()
    s = seed.stream
    disc = Discretization(s.vort, s.h, seed.regime, seed.Lambda_star, s.lam, cfg.nx, cfg.ny)
    trivial = seed.t == 0
    p0 = disc.p_star if trivial else discrete_bifurcation(disc)
    header = {
        "regime": seed.regime, "vorticity": s.vort.to_dict(), "h": s.h,
        "lambda_star": s.lam, "tau_star": seed.tau_star, "Lambda_star": seed.Lambda_star,
        "c_star": seed.c_star, "seed_t": seed.t, "parameter_bifurcation": p0,
        "config": asdict(cfg),
    }
    # logged in both regimes rather than assumed
    tr = transversality(s.vort, s.h, s.lam, seed.tau_star)
    header.update(transversality=tr.value, transversality_error=tr.error)
    log.info("dsigma/dlambda at tau*: %.6g (+- %.1e)", tr.value, tr.error)
    b = Branch(seed.regime, [], trivial=trivial, header=header)
    z = disc.trivial(p0)
    z, it, res = _newton(disc, z, PinParameter(p0), cfg.tol, cfg.max_iter)
    b.points.append(_point(disc, z, 0, 0.0, res, it))
    th = thresholds_for(cfg, s.lam, s.h, b.points[0].norm, seed.Lambda_star)
    if trivial:
        log.warning("seed amplitude is zero; following the uniform-stream branch")
    step = _seed_direction(disc, seed, p0, cfg.ds) if not trivial else None
    z_prev, ds_prev = None, cfg.ds
    while b.termination is None:
        ds = cfg.ds
        for attempt in range(cfg.retries + 1):
            if trivial:
                p_next = z[-1] + ds * disc.p_star
                guess = disc.trivial(p_next)
                con = PinParameter(p_next)
            else:
                inc = step * (ds / cfg.ds) if z_prev is None else (z - z_prev) * (ds / ds_prev)
                guess = z + inc
                con = Arclength(tuple(disc.metric_vector(z)), ds)
            try:
                z_new, it, res = _newton(disc, guess, con, cfg.tol, cfg.max_iter)
                break
            except NewtonFailure as e:
                log.info("step %d failed (%s); halving ds", len(b.points), e)
                ds *= 0.5
        else:
            b.termination = "newton_failure"
            break
        d = float(np.linalg.norm(disc.metric_vector(z_new) - disc.metric_vector(z)))
        z_prev, z, ds_prev = z, z_new, ds
        pt = _point(disc, z, len(b.points), b.points[-1].arclength + d, res, it)
        b.points.append(pt)
        log.info("point %d: t=%.6g p=%.12g residual=%.2e", pt.index, pt.t, pt.parameter, res)
        b.termination = detect_termination(b, th)
    if b.loop is None:
        b.loop = detect_loop(b, cfg.loop_radius)
    return b


# -- export ------------------------------------------------------------------


def _csv_value(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v) + 0.0, ".17g")
    return str(v)


def branch_csv(b):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in b.points:
        w.writerow([_csv_value(v) for v in p.row()])
    return buf.getvalue()


def branch_summary(b):
    d = dict(b.header)
    d["termination"] = b.termination
    d["trivial"] = b.trivial
    d["points"] = len(b.points)
    d["loop"] = b.loop.to_dict() if b.loop is not None else None
    d["orientations"] = sorted(set(b.orientations()))
    return d


def export_branch(b, out_dir, fields=True):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "branch.json"), "w") as fh:
        fh.write(dumps(branch_summary(b)))
    with open(os.path.join(out_dir, "branch.csv"), "w") as fh:
        fh.write(branch_csv(b))
    if fields:
        fdir = os.path.join(out_dir, "fields")
        os.makedirs(fdir, exist_ok=True)
        for p in b.points:
            f = p.field
            f.meta.update(
                index=p.index,
                nodal=p.nodal.booleans() if p.nodal is not None else None,
                orientation=p.nodal.orientation if p.nodal is not None else 0,
            )
            with open(os.path.join(fdir, f"point_{p.index:04d}.json"), "w") as fh:
                fh.write(dumps(f.to_dict()))
