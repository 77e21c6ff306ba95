"""Command-line front end: ``rotwaves <subcommand>``.

Configuration is an INI file with the sections below; every key is
optional and unknown keys are rejected. ``--set section.key=value``
overrides single entries.

    [problem]       vorticity, coefficients, a, b, h, lambda, regime
    [dispersion]    tau_max, samples
    [wave]          t, c_star_at, sign, nx, ny
    [continuation]  ds, max_steps, nx, ny, tol, max_iter, retries, eps_stag,
                    eps_bed, unbounded, period_range, loop_radius
    [hilbert]       h, period
    [run]           seed
"""

import argparse
import configparser
import csv
import io
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import vorticity as vmod
from .conformal import PeriodicFunction, hilbert_multiplier, periodic_hilbert
from .continuation import ContinuationConfig, continue_branch, export_branch
from .dispersion import (
    find_tau_star,
    first_eigenvalue,
    sigma_scan,
    transversality,
)
from .errors import (
    ConfigError,
    DegenerateField,
    NoBifurcation,
    NonzeroMean,
    WaveError,
)
from .field import (
    bernoulli_residual,
    check_nodal,
    dumps,
    from_linear_wave,
    load_field,
    pde_residual,
    save_field,
    stagnation_margin,
)
from .linear_wave import REGIMES, build_linear_wave
from .uniform_stream import solve_uniform_stream

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_NO_BIFURCATION, EXIT_DEGENERATE = 0, 2, 3, 4, 5

log = logging.getLogger("rotwaves")


@dataclass
class ProblemConfig:
    vorticity: str = "zero"
    coefficients: tuple = ()
    a: float = 0.0
    b: float = 0.0
    h: float = 1.0
    lam: float = 0.8
    regime: str = "fixed_period"

    def vort(self):
        if self.vorticity == "zero":
            return vmod.zero()
        if self.vorticity == "linear":
            return vmod.linear(self.a, self.b)
        if self.vorticity == "polynomial":
            return vmod.polynomial(self.coefficients)
        raise ConfigError(f"unknown vorticity {self.vorticity!r}")


@dataclass
class DispersionConfig:
    tau_max: float = 10.0
    samples: int = 200


@dataclass
class WaveConfig:
    t: float = 0.01
    c_star_at: str = "surface"
    sign: float = 1.0
    nx: int = 16
    ny: int = 64


@dataclass
class HilbertConfig:
    h: float = 1.0
    period: float = 0.0  # 0 infers the period from the sample spacing


@dataclass
class RunConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    dispersion: DispersionConfig = field(default_factory=DispersionConfig)
    wave: WaveConfig = field(default_factory=WaveConfig)
    continuation: ContinuationConfig = field(default_factory=ContinuationConfig)
    hilbert: HilbertConfig = field(default_factory=HilbertConfig)
    seed: int = 0


_ALIASES = {("problem", "lambda"): "lam"}
_POSITIVE = {
    ("problem", "h"), ("dispersion", "tau_max"), ("dispersion", "samples"),
    ("wave", "nx"), ("wave", "ny"), ("hilbert", "h"),
}


def _convert(raw, default, name):
    try:
        if isinstance(default, tuple):
            return tuple(float(v) for v in raw.replace(",", " ").split())
        if isinstance(default, bool):
            return raw.strip().lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            v = float(raw)
            if not np.isfinite(v):
                raise ValueError
            return v
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None


def load_config(path=None, overrides=()):
    """Parse the INI file plus ``section.key=value`` overrides into a RunConfig."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    if path is not None:
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} is not section.key=value")
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, name, value)
    cfg = RunConfig()
    parts = {
        "problem": ProblemConfig, "dispersion": DispersionConfig, "wave": WaveConfig,
        "continuation": ContinuationConfig, "hilbert": HilbertConfig,
    }
    for section in cp.sections():
        if section == "run":
            for k, v in cp.items(section):
                if k != "seed":
                    raise ConfigError(f"unknown key run.{k}")
                cfg.seed = _convert(v, 0, "run.seed")
            continue
        if section not in parts:
            raise ConfigError(f"unknown section [{section}]")
        defaults = {f.name: f.default for f in fields(parts[section])}
        defaults.update({f.name: () for f in fields(parts[section]) if f.name == "coefficients"})
        values = {}
        for k, v in cp.items(section):
            name = _ALIASES.get((section, k), k)
            if name not in defaults:
                raise ConfigError(f"unknown key {section}.{k}")
            val = _convert(v, defaults[name], f"{section}.{k}")
            if (section, k) in _POSITIVE and not val > 0:
                raise ConfigError(f"{section}.{k} must be positive")
            values[name] = val
        try:
            current = asdict(getattr(cfg, section))
            current.update(values)
            setattr(cfg, section, parts[section](**current))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"[{section}] {e}") from None
    if cfg.problem.regime not in REGIMES:
        raise ConfigError(f"problem.regime must be one of {REGIMES}")
    if cfg.wave.c_star_at not in ("surface", "bed"):
        raise ConfigError("wave.c_star_at must be 'surface' or 'bed'")
    if cfg.problem.vorticity not in vmod.KINDS:
        raise ConfigError(f"problem.vorticity must be one of {vmod.KINDS}")
    return cfg


# -- output helpers ----------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v) + 0.0, ".17g")
    return str(v)


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(_plain(obj)))


def _plain(o):
    if isinstance(o, dict):
        return {k: _plain(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_plain(v) for v in o]
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, float) and not np.isfinite(o):
        return repr(o)
    return o


# -- subcommands -------------------------------------------------------------


def _stream(cfg):
    p = cfg.problem
    return solve_uniform_stream(p.vort(), p.h, p.lam)


def cmd_stream(cfg, args):
    s = _stream(cfg)
    y, psi, dpsi = s.grid
    ddpsi = -s.vort.eval(psi)
    write_csv(os.path.join(args.out, "stream.csv"), ["y", "Psi", "dPsi", "ddPsi"], zip(y, psi, dpsi, ddpsi))
    summary = {
        "h": s.h, "lambda": s.lam, "m": s.m, "Q": s.Q, "kappa": s.kappa,
        "mu_1": first_eigenvalue(s), "nodes": s.n, "error_estimate": s.error_estimate,
    }
    write_json(os.path.join(args.out, "stream.json"), summary)
    return summary


def cmd_dispersion(cfg, args):
    s = _stream(cfg)
    d = cfg.dispersion
    taus = np.linspace(0.0, d.tau_max, d.samples + 1)
    curve = sigma_scan(s, taus)
    rows = [(c.tau, c.sigma, c.gamma_prime_h, c.resonant, c.sign_definite) for c in curve.samples]
    write_csv(
        os.path.join(args.out, "dispersion.csv"),
        ["tau", "sigma", "gamma_prime_h", "resonant", "sign_definite"], rows,
    )
    sig = np.array([c.sigma for c in curve.samples if not c.resonant])
    steps = np.sign(s.kappa) * np.diff(sig)
    summary = {"kappa": s.kappa, "mu_1": first_eigenvalue(s), "monotone": bool(np.all(steps > 0))}
    write_json(os.path.join(args.out, "dispersion.json"), summary)  # overwritten below on success
    tau, mode = find_tau_star(s)
    tr = transversality(s.vort, s.h, s.lam, tau)
    summary.update(
        tau_star=tau, Lambda_star=2 * np.pi / tau, mode=mode,
        transversality=tr.value, transversality_error=tr.error,
    )
    write_json(os.path.join(args.out, "dispersion.json"), summary)
    return summary


def _seed(cfg, t=None):
    s = _stream(cfg)
    tau, _ = find_tau_star(s)
    w = cfg.wave
    return build_linear_wave(
        s, tau, w.t if t is None else t, regime=cfg.problem.regime,
        c_star_at=w.c_star_at, sign=w.sign,
    )


def cmd_smallwave(cfg, args):
    lw = _seed(cfg)
    f = from_linear_wave(lw, cfg.wave.nx, cfg.wave.ny)
    save_field(f, os.path.join(args.out, "smallwave.json"))
    x = np.linspace(0, lw.Lambda_star / 2, 65)
    summary = {
        "tau_star": lw.tau_star, "Lambda_star": lw.Lambda_star, "c_star": lw.c_star, "t": lw.t,
        "bernoulli_sup": float(np.max(np.abs(lw.bernoulli_residual(x)))),
        "grid_pde_sup": float(np.max(np.abs(pde_residual(f)))),
        "grid_bernoulli_sup": bernoulli_residual(f)[0],
        "stagnation_margin": stagnation_margin(f),
    }
    write_json(os.path.join(args.out, "smallwave_summary.json"), summary)
    return summary


def cmd_continue(cfg, args):
    lw = _seed(cfg)
    b = continue_branch(lw, cfg.continuation)
    export_branch(b, args.out)
    if b.trivial:
        print("warning: seed amplitude is zero, branch consists of uniform streams", file=sys.stderr)
    return {"termination": b.termination, "points": len(b.points), "trivial": b.trivial}


def cmd_check(cfg, args):
    try:
        f = load_field(args.field)
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"cannot read field file {args.field}: {e}") from None
    rep = check_nodal(f, args.orientation if args.orientation == "auto" else int(args.orientation), args.mode)
    d = rep.to_dict()
    write_json(os.path.join(args.out, "nodal.json"), d)
    return d


def _read_signal(path):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    if not rows or [c.strip() for c in rows[0]] != ["x", "u"]:
        raise ConfigError("signal file needs the header 'x,u'")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError:
        raise ConfigError("signal file holds non-numeric entries") from None
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 2 or not np.all(np.isfinite(data)):
        raise ConfigError("signal file needs at least two finite (x, u) rows")
    return data[:, 0], data[:, 1]


def cmd_hilbert(cfg, args):
    x, u = _read_signal(args.signal)
    dx = np.diff(x)
    if np.any(dx <= 0) or np.ptp(dx) > 1e-9 * dx[0]:
        raise ConfigError("samples must be uniformly spaced and increasing")
    period = cfg.hilbert.period or len(x) * dx[0]
    f = PeriodicFunction.from_samples(u, period)
    h = cfg.hilbert.h if args.h is None else args.h
    if not h > 0:
        raise ConfigError("h must be positive")
    try:
        g = periodic_hilbert(f, h)
    except NonzeroMean as e:
        raise ConfigError(str(e)) from None
    k = np.arange(len(f.coeffs))
    mult = np.concatenate([[0j], hilbert_multiplier(k[1:], f.tau, h)])
    rows = [
        (int(kk), f.coeffs[i].real, f.coeffs[i].imag, mult[i].imag, g.coeffs[i].real, g.coeffs[i].imag)
        for i, kk in enumerate(k)
    ]
    write_csv(
        os.path.join(args.out, "hilbert.csv"),
        ["k", "re_in", "im_in", "multiplier_im", "re_out", "im_out"], rows,
    )
    write_csv(os.path.join(args.out, "hilbert_samples.csv"), ["x", "Cu"], zip(x, g(x - x[0])))
    return {"period": period, "h": h, "modes": len(k)}


COMMANDS = {
    "stream": cmd_stream,
    "dispersion": cmd_dispersion,
    "smallwave": cmd_smallwave,
    "continue": cmd_continue,
    "check": cmd_check,
    "hilbert": cmd_hilbert,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="rotwaves", description="Steady rotational water waves.")
    ap.add_argument("--config", help="INI configuration file")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--verbose", action="store_true")
    ap.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("stream", help="uniform stream profile")
    sub.add_parser("dispersion", help="dispersion scan and bifurcation frequency")
    sub.add_parser("smallwave", help="export the first-order wave as a field file")
    sub.add_parser("continue", help="continue the branch from the first-order wave")
    pc = sub.add_parser("check", help="nodal checker on a field file")
    pc.add_argument("field")
    pc.add_argument("--orientation", default="auto", choices=["auto", "1", "-1"])
    pc.add_argument("--mode", default="computational", choices=["computational", "physical"])
    ph = sub.add_parser("hilbert", help="periodic Hilbert transform of a sampled signal")
    ph.add_argument("signal")
    ph.add_argument("--h", type=float, default=None)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config, args.set)
        np.random.seed(cfg.seed)
        os.makedirs(args.out, exist_ok=True)
        result = COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NoBifurcation as e:
        print(f"no bifurcation: {e}", file=sys.stderr)
        return EXIT_NO_BIFURCATION
    except DegenerateField as e:
        print(f"degenerate field: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (WaveError, ValueError, FloatingPointError) as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    if args.verbose:
        print(json.dumps(_plain(result), indent=1))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
