"""Profile problem, dispersion function and bifurcation-frequency selection.

For a uniform stream Psi the linearized problem around it reduces to

    -w'' - omega'(Psi(y)) w = mu w,     w(0) = w(h) = 0          (spectrum)
    -g'' - omega'(Psi(y)) g + tau^2 g = 0, g(0) = 0, g(h) = 1    (profile)

and the dispersion function is sigma(tau) = kappa * (g'(h; tau) - rho0) with
rho0 = (1 + Psi'(h) Psi''(h)) / Psi'(h)**2. Both problems are solved by
shooting from the bed with the linear RK4 propagator.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from ._rk4 import linear_propagate
from .errors import NoBifurcation, ResonantTau, SolverFailure
from .uniform_stream import EXTENSION, solve_uniform_stream

RESONANCE_BAND = 1e-6
MU_LIMIT = 1e6
GAMMA_TOL = 1e-11
MAX_SHOOT_NODES = 2**16


class Profile:
    """A solution w of w'' = (s - omega'(Psi)) w sampled on a uniform grid.

    Values between nodes come from cubic Hermite interpolation of (w, w');
    the second derivative is taken from the ODE itself.
    """

    def __init__(self, stream, s_coef, ys, w, dw, scale=1.0):
        self.stream = stream
        self.s_coef = float(s_coef)
        self.ys = ys
        self.values = w * scale
        self.derivs = dw * scale
        self._spline = CubicHermiteSpline(ys, self.values, self.derivs, extrapolate=False)

    def __call__(self, y, nu=0):
        y = np.asarray(y, dtype=float)
        if nu == 2:
            v = self._spline(y)
            return (self.s_coef - self.stream.vort.eval_deriv(self.stream.psi(y))) * v
        out = self._spline(y, nu)
        if np.any(np.isnan(out)):
            raise ValueError("profile evaluated outside its sampled range")
        return out

    def residual(self, y):
        """Return -w'' - omega'(Psi) w + s w, with w'' from 4th-order differences."""
        y = np.asarray(y, dtype=float)
        d = 1e-3 * self.stream.h
        f = self._spline
        w2 = (-f(y + 2 * d) + 16 * f(y + d) - 30 * f(y) + 16 * f(y - d) - f(y - 2 * d)) / (12 * d * d)
        q = self.stream.vort.eval_deriv(self.stream.psi(y))
        return -w2 - q * f(y) + self.s_coef * f(y)


def _coefficients(stream, ys, s_coefs):
    mids = 0.5 * (ys[:-1] + ys[1:])
    qn = stream.vort.eval_deriv(stream.psi(ys))
    qm = stream.vort.eval_deriv(stream.psi(mids))
    s = np.asarray(s_coefs, dtype=float)[None, :]
    return s - np.asarray(qn)[:, None], s - np.asarray(qm)[:, None]


def shoot(stream, s_coefs, n, y_end=None):
    """Solve w'' = (s - omega'(Psi)) w, w(0)=0, w'(0)=1 on [0, y_end].

    ``s_coefs`` is a 1-D array (tau**2 for the profile, -mu for the
    spectrum). Returns ``(ys, states)`` with states of shape
    ``(len(ys), len(s_coefs), 2)``.
    """
    h = stream.h
    steps = n if y_end is None else int(round(n * y_end / h))
    y_end = h if y_end is None else steps * h / n
    ys = np.linspace(0.0, y_end, steps + 1)
    cn, cm = _coefficients(stream, ys, s_coefs)
    s0 = np.zeros((len(s_coefs), 2))
    s0[:, 1] = 1.0
    return ys, linear_propagate(cn, cm, h / n, s0)


def _shoot_below(stream, s_coefs, n, steps):
    # same problem continued from y=0 down to y=-steps*h/n
    h = stream.h
    ys = np.linspace(0.0, -steps * h / n, steps + 1)
    cn, cm = _coefficients(stream, ys, s_coefs)
    s0 = np.zeros((len(s_coefs), 2))
    s0[:, 1] = 1.0
    return ys, linear_propagate(cn, cm, -h / n, s0)


# ---------------------------------------------------------------------------
# Spectrum
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EigenSpectrum:
    mus: np.ndarray
    eigenfunctions: List[Profile]
    zero_counts: tuple
    nodes: int


def _prufer_angle(stream, mus, n):
    """Continuous Prufer angle theta(h; mu) of the bed-normalized solution."""
    ys, st = shoot(stream, -np.asarray(mus, dtype=float), n)
    theta = np.unwrap(np.arctan2(st[..., 0], st[..., 1]), axis=0)
    return theta[-1]


def _nodes_for(stream, mu, base):
    qmax = _q_range(stream)[1]
    k = np.sqrt(max(mu + qmax, 1.0))
    need = int(np.ceil(16 * k * stream.h))
    n = base
    while n < need:
        n *= 2
    return n


@lru_cache(maxsize=256)
def _q_range(stream):
    _, psi, _ = stream.grid
    q = np.asarray(stream.vort.eval_deriv(psi), dtype=float)
    if q.ndim == 0:
        q = np.full_like(psi, float(q))
    return float(q.min()), float(q.max())


def eigenvalue_count(stream, mu, n=None):
    """Number of eigenvalues strictly below ``mu`` (Sturm oscillation count)."""
    n = n or _nodes_for(stream, mu, 256)
    return int(np.floor(_prufer_angle(stream, [mu], n)[0] / np.pi))


def _one_eigenvalue(stream, j, lo, hi, n):
    def f(mu):
        return _prufer_angle(stream, [mu], n)[0] - j * np.pi

    return brentq(f, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=200)


def eigen_spectrum(stream, k=1, tol=1e-10):
    """First ``k`` eigenvalues and L2-normalized eigenfunctions.

    Brackets come from the oscillation count; each eigenvalue is then the
    root of theta(h; mu) = j*pi, refined under step halving until two
    consecutive node counts agree to ``tol``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    qmin, qmax = _q_range(stream)
    h = stream.h
    lo = -qmax - 1.0
    hi = max(lo + 1.0, (k * np.pi / h) ** 2 - qmin + 1.0)
    while eigenvalue_count(stream, hi) < k:
        hi = 2 * abs(hi)
        if hi > MU_LIMIT:
            raise SolverFailure(f"could not bracket eigenvalue {k} below |mu|={MU_LIMIT:g}")
    n = _nodes_for(stream, hi, 256)
    mus, funcs, counts = [], [], []
    prev = lo
    for j in range(1, k + 1):
        mu = _one_eigenvalue(stream, j, prev, hi, n)
        while True:
            mu2 = _one_eigenvalue(stream, j, prev, hi, 2 * n)
            n *= 2
            if abs(mu2 - mu) / 15.0 <= tol * max(1.0, abs(mu2)):
                mu = mu2
                break
            mu = mu2
            if n > MAX_SHOOT_NODES:
                raise SolverFailure(f"eigenvalue {j} did not converge under step halving")
        ys, st = shoot(stream, [-mu], n)
        w, dw = st[:, 0, 0], st[:, 0, 1]
        norm = np.sqrt(simpson(w * w, x=ys))
        prof = Profile(stream, -mu, ys, w, dw, scale=1.0 / norm)
        interior = prof.values[1:-1]
        tiny = 1e-8 * np.max(np.abs(interior))
        sig = np.sign(interior[np.abs(interior) > tiny])
        count = int(np.count_nonzero(sig[1:] != sig[:-1]))
        if count != j - 1:
            raise SolverFailure(f"eigenfunction {j} has {count} interior zeros, expected {j - 1}")
        mus.append(mu)
        funcs.append(prof)
        counts.append(count)
        prev = mu
    return EigenSpectrum(np.array(mus), funcs, tuple(counts), n)


@lru_cache(maxsize=256)
def nonpositive_eigenvalues(stream):
    """All eigenvalues mu_j <= RESONANCE_BAND (those that can resonate)."""
    count = eigenvalue_count(stream, RESONANCE_BAND)
    if count == 0:
        return np.array([])
    return eigen_spectrum(stream, count).mus


@lru_cache(maxsize=256)
def first_eigenvalue(stream):
    return float(eigen_spectrum(stream, 1).mus[0])


# ---------------------------------------------------------------------------
# Profile gamma and dispersion function sigma
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DispersionSample:
    tau: float
    gamma: Optional[Profile]
    gamma_prime_h: float
    sigma: float
    rho0: float
    kappa: float
    sign_definite: bool
    resonant: bool = False


@dataclass(frozen=True, eq=False)
class DispersionCurve:
    taus: np.ndarray
    samples: list
    asymptotic_ratio: float
    nodes: int

    @property
    def sigma(self):
        return np.array([np.nan if s.resonant else s.sigma for s in self.samples])

    @property
    def gamma_prime_h(self):
        return np.array([np.nan if s.resonant else s.gamma_prime_h for s in self.samples])


def rho0(stream):
    kappa = stream.kappa
    ddpsi_h = -stream.vort.eval(0.0)
    return (1.0 + kappa * ddpsi_h) / kappa**2


def sigma_crosscheck(stream, gamma_prime_h):
    """Alternative algebraic form kappa*g'(h) - 1/kappa + omega(0).

    It agrees with kappa*(g'(h) - rho0) identically; the vorticity is taken
    at the surface value Psi(h) = 0.
    """
    k = stream.kappa
    return k * gamma_prime_h - 1.0 / k + float(stream.vort.eval(0.0))


def _check_resonance(stream, taus):
    mus = nonpositive_eigenvalues(stream)
    bad = np.zeros(len(taus), dtype=bool)
    which = np.full(len(taus), np.nan)
    for mu in mus:
        hit = np.abs(np.asarray(taus) ** 2 + mu) <= RESONANCE_BAND
        which[hit & ~bad] = mu
        bad |= hit
    return bad, which


def _gamma_h(stream, taus, n):
    _, st = shoot(stream, np.asarray(taus, dtype=float) ** 2, n)
    return st[-1, :, 0], st[-1, :, 1]


def choose_nodes(stream, taus, tol=GAMMA_TOL, n=None):
    """Node count at which g'(h) is converged to ``tol`` for every tau."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if n is None:
        n = 256
        while n < 4 * np.max(taus) * stream.h:
            n *= 2
    w, dw = _gamma_h(stream, taus, n)
    g = dw / w
    while True:
        w2, dw2 = _gamma_h(stream, taus, 2 * n)
        g2 = dw2 / w2
        err = np.abs(g2 - g) / 15.0
        n *= 2
        ok = err <= tol * np.maximum(1.0, np.abs(g2))
        if np.all(ok | ~np.isfinite(g2)):
            return n
        if n >= MAX_SHOOT_NODES:
            return n
        g = g2


def gamma_profile(stream, tau, n=None):
    """Profile g(y; tau) with g(0)=0, g(h)=1 and the dispersion data at tau."""
    tau = float(tau)
    if tau < 0 or not np.isfinite(tau):
        raise ValueError("tau must be finite and nonnegative")
    bad, which = _check_resonance(stream, [tau])
    if bad[0]:
        raise ResonantTau(tau, which[0])
    n = n or choose_nodes(stream, [tau])
    ext = int(np.floor(EXTENSION * n)) - 1
    ys_up, st_up = shoot(stream, [tau * tau], n, y_end=stream.h + ext * stream.h / n)
    ys_dn, st_dn = _shoot_below(stream, [tau * tau], n, ext)
    w_h = st_up[n, 0, 0]
    ys = np.concatenate([ys_dn[::-1], ys_up[1:]])
    w = np.concatenate([st_dn[::-1, 0, 0], st_up[1:, 0, 0]])
    dw = np.concatenate([st_dn[::-1, 0, 1], st_up[1:, 0, 1]])
    prof = Profile(stream, tau * tau, ys, w, dw, scale=1.0 / w_h)
    gph = st_up[n, 0, 1] / w_h
    r0 = rho0(stream)
    inner = prof.values[ext + 1 : ext + n + 1]
    return DispersionSample(
        tau=tau, gamma=prof, gamma_prime_h=float(gph),
        sigma=float(stream.kappa * (gph - r0)), rho0=r0, kappa=stream.kappa,
        sign_definite=bool(np.all(inner > 0)),
    )


def sigma_values(stream, taus, n):
    """sigma at many frequencies with a fixed node count (no resonance check)."""
    w, dw = _gamma_h(stream, np.atleast_1d(taus), n)
    return stream.kappa * (dw / w - rho0(stream))


def sigma_scan(stream, taus, n=None):
    """Dispersion data on an ascending tau grid; resonant points are marked."""
    taus = np.asarray(taus, dtype=float)
    if np.any(np.diff(taus) <= 0):
        raise ValueError("taus must be strictly ascending")
    bad, _ = _check_resonance(stream, taus)
    good = taus[~bad]
    n = n or (choose_nodes(stream, good) if len(good) else 256)
    samples = []
    r0 = rho0(stream)
    if len(good):
        ys, st = shoot(stream, good**2, n)
        w, dw = st[..., 0], st[..., 1]
        gph = dw[-1] / w[-1]
        sdef = np.all(w[1:] / w[-1] > 0, axis=0)
    it = iter(range(len(good)))
    for tau, b in zip(taus, bad):
        if b:
            samples.append(DispersionSample(tau, None, np.nan, np.nan, r0, stream.kappa, False, True))
            continue
        i = next(it)
        samples.append(DispersionSample(
            tau=float(tau), gamma=None, gamma_prime_h=float(gph[i]),
            sigma=float(stream.kappa * (gph[i] - r0)), rho0=r0, kappa=stream.kappa,
            sign_definite=bool(sdef[i]),
        ))
    last = samples[-1]
    ratio = last.sigma / (stream.kappa * last.tau) if last.tau > 0 and not last.resonant else np.nan
    return DispersionCurve(taus, samples, float(ratio), n)


# ---------------------------------------------------------------------------
# Frequency selection
# ---------------------------------------------------------------------------

MU1_POSITIVE = "mu1_positive"
MU1_NONPOSITIVE = "mu1_nonpositive"


def _root(stream, lo, hi, n):
    f = lambda tau: float(sigma_values(stream, [tau], n)[0])
    flo, fhi = f(lo), f(hi)
    target = np.sign(flo)
    while np.sign(fhi) == target:
        hi *= 2.0
        if hi > 1e4:
            raise SolverFailure("no sign change of sigma found below tau=1e4")
        fhi = f(hi)
    n2 = choose_nodes(stream, [hi])
    if n2 > n:
        return _root(stream, lo, hi, n2)
    return brentq(f, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=200)


def find_tau_star(stream):
    """Select the bifurcation frequency tau*.

    Returns ``(tau_star, mode)``. With mu1 > 0 a root exists only when
    sigma(0) has the sign opposite to kappa; with mu1 <= 0 the root to the
    right of the last resonance sqrt(-mu1) is taken.
    """
    mu1 = first_eigenvalue(stream)
    kappa = stream.kappa
    if mu1 > 0:
        n = choose_nodes(stream, [1.0])
        s0 = float(sigma_values(stream, [0.0], n)[0])
        if s0 * kappa >= 0:
            raise NoBifurcation(
                f"sigma(0)={s0:.6g} has the sign of kappa={kappa:.6g}; no positive root"
            )
        tau = _root(stream, 0.0, 1.0, n)
        mode = MU1_POSITIVE
    else:
        pole = np.sqrt(-mu1)
        n = choose_nodes(stream, [pole + 1.0])
        eps = 1e-5
        lo = np.sqrt(pole**2 + eps)
        while np.sign(sigma_values(stream, [lo], n)[0]) != -np.sign(kappa):
            eps /= 10.0
            if eps < 1e-12:
                raise SolverFailure("sigma does not diverge at the first resonance as expected")
            lo = np.sqrt(pole**2 + eps)
        tau = _root(stream, lo, lo + 1.0, n)
        mode = MU1_NONPOSITIVE
    sample = gamma_profile(stream, tau)
    if mode == MU1_NONPOSITIVE and not sample.sign_definite:
        raise SolverFailure("profile at the selected root changes sign")
    return float(tau), mode


@dataclass(frozen=True)
class Transversality:
    value: float
    error: float
    step: float

    @property
    def holds(self):
        return self.value != 0 and abs(self.value) > self.error


def transversality(vort, h, lam, tau_star, step=1e-4):
    """d sigma / d lambda at fixed tau*, by Richardson-extrapolated central differences.

    Streams are rebuilt at lambda +- step and lambda +- step/2 with a common
    node count so the discretization error is smooth in lambda.
    """
    base = solve_uniform_stream(vort, h, lam)
    ns = base.n
    n = choose_nodes(base, [tau_star])

    def sig(l):
        s = solve_uniform_stream(vort, h, l, n=ns // 2, tol=np.inf)
        return float(sigma_values(s, [tau_star], n)[0])

    d1 = (sig(lam + step) - sig(lam - step)) / (2 * step)
    d2 = (sig(lam + step / 2) - sig(lam - step / 2)) / step
    value = (4 * d2 - d1) / 3.0
    return Transversality(value=value, error=abs(d2 - d1) / 3.0, step=step)


# ---------------------------------------------------------------------------
# Diagnostics near resonances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PoleFit:
    tau_pole: float
    fitted: float
    predicted: float

    @property
    def relative_error(self):
        return abs(self.fitted - self.predicted) / abs(self.predicted)


def pole_fit(stream, j=1, offsets=None):
    """Fit sigma ~ c/(tau^2 - tau_j^2) + d near the resonance tau_j^2 = -mu_j.

    ``predicted`` is -kappa * phi_j'(h)**2 for the L2-normalized
    eigenfunction.
    """
    spec = eigen_spectrum(stream, j)
    mu = spec.mus[j - 1]
    if mu >= 0:
        raise ValueError(f"eigenvalue {j} is nonnegative; no real resonance")
    tp2 = -mu
    offsets = np.asarray(offsets if offsets is not None else [-4e-3, -2e-3, -1e-3, 1e-3, 2e-3, 4e-3])
    taus = np.sqrt(tp2 + offsets)
    n = choose_nodes(stream, taus)
    sig = sigma_values(stream, taus, n)
    A = np.column_stack([1.0 / offsets, np.ones_like(offsets)])
    (c, _), *_ = np.linalg.lstsq(A, sig, rcond=None)
    phi = spec.eigenfunctions[j - 1]
    pred = -stream.kappa * phi(stream.h, 1) ** 2
    return PoleFit(float(np.sqrt(tp2)), float(c), float(pred))
