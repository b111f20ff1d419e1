"""Configuration-driven rate grids and maximum-tolerable-noise curves.

Configuration files are INI documents (``configparser`` dialect, no
interpolation, keys are case sensitive). Recognised sections and keys::

    [scenario]      state (required), distribution, scheme, key, beta, zeta,
                    V, V_N, post_reference
    [scan]          mode (required: point | grid | threshold), output, seed
    [point]         t, eps
    [t_grid]        min, max, steps
    [eps_grid]      min, max, steps
    [eps_bisection] hi, tol
    [finite_size]   N_total (required if the section is present), n_key, k,
                    ordering, estimator (analytic | sampled), trials, sample_size

Everything except the two required keys has a default. Unknown sections or
keys are rejected.
"""
import configparser
import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .finite_size import (
    EC_AFTER_PE,
    EC_BEFORE_PE,
    ORDERINGS,
    EstimationError,
    FiniteSizeParams,
    correlation_multiplicity,
    finite_key_rate,
    simulate_estimation,
)
from .gaussian import ChannelParams
from .keyrates import CKA, DR, REMOTE, ScenarioSpec, key_rate
from .states import SqueezerSpec

POINT, GRID, THRESHOLD = "point", "grid", "threshold"
MODES = (POINT, GRID, THRESHOLD)
ANALYTIC, SAMPLED = "analytic", "sampled"

NO_KEY = float("-inf")


class ConfigError(ValueError):
    """Invalid or incomplete scan configuration."""


class ThresholdError(RuntimeError):
    """The key rate does not change sign once along the bisected noise interval."""


@dataclass(frozen=True)
class Range:
    min: float
    max: float
    steps: int

    def values(self):
        if self.steps == 1:
            return np.array([self.min])
        return np.linspace(self.min, self.max, self.steps)


@dataclass(frozen=True)
class Bisection:
    hi: float = 1.0
    tol: float = 1e-4
    lo: float = 0.0


@dataclass(frozen=True)
class FiniteSizeConfig:
    N_total: int
    n_key: Optional[int] = None
    k: Optional[int] = None
    ordering: Optional[str] = None
    estimator: str = ANALYTIC
    trials: int = 64
    sample_size: int = 10_000


@dataclass(frozen=True)
class ScanConfig:
    scenario: ScenarioSpec
    mode: str
    t_grid: Range = Range(0.5, 1.0, 11)
    eps_grid: Range = Range(0.0, 0.5, 11)
    point: tuple = (1.0, 0.0)
    eps_bisection: Bisection = field(default_factory=Bisection)
    finite_size: Optional[FiniteSizeConfig] = None
    output_path: Optional[str] = None
    seed: int = 0


@dataclass(frozen=True)
class ThresholdPoint:
    t: float
    eps_max: float
    rate_at_zero_eps: float


# ---------------------------------------------------------------- parsing

_SCHEMA = {
    "scenario": {"state", "distribution", "scheme", "key", "beta", "zeta", "V", "V_N",
                 "post_reference"},
    "scan": {"mode", "output", "seed"},
    "point": {"t", "eps"},
    "t_grid": {"min", "max", "steps"},
    "eps_grid": {"min", "max", "steps"},
    "eps_bisection": {"hi", "tol"},
    "finite_size": {"N_total", "n_key", "k", "ordering", "estimator", "trials", "sample_size"},
}


class _Section:
    def __init__(self, name, items):
        self.name = name
        self.items = items

    def get(self, key, conv, default=None, required=False):
        if key not in self.items:
            if required:
                raise ConfigError(f"[{self.name}] {key}: missing required key")
            return default
        raw = self.items[key].strip()
        try:
            return conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{self.name}] {key}: cannot parse {raw!r} ({exc})") from None


def _to_int(s):
    v = float(s)
    if not v.is_integer():
        raise ValueError("not an integer")
    return int(v)


def _to_opt_int(s):
    return None if s.lower() in ("", "none") else _to_int(s)


def _range(sec, default):
    r = Range(sec.get("min", float, default.min), sec.get("max", float, default.max),
              sec.get("steps", _to_int, default.steps))
    if r.steps < 1:
        raise ConfigError(f"[{sec.name}] steps: must be >= 1, got {r.steps}")
    if r.min > r.max:
        raise ConfigError(f"[{sec.name}] min > max ({r.min} > {r.max})")
    return r


def parse_config(text):
    """Parse and validate an INI scan configuration."""
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    for name in cp.sections():
        if name not in _SCHEMA:
            raise ConfigError(f"[{name}]: unknown section")
        for key in cp[name]:
            if key not in _SCHEMA[name]:
                raise ConfigError(f"[{name}] {key}: unknown key")
    secs = {n: _Section(n, dict(cp[n]) if cp.has_section(n) else {}) for n in _SCHEMA}
    if not cp.has_section("scenario"):
        raise ConfigError("[scenario]: missing required section")
    if not cp.has_section("scan"):
        raise ConfigError("[scan]: missing required section")

    sc = secs["scenario"]
    try:
        squeezer = SqueezerSpec(sc.get("V", float, 0.1), sc.get("V_N", float, 0.0))
    except ValueError as exc:
        raise ConfigError(f"[scenario] V/V_N: {exc}") from None
    state = sc.get("state", str, required=True)
    try:
        scenario = ScenarioSpec(
            state=state,
            scheme=sc.get("scheme", str, DR),
            distribution=sc.get("distribution", _to_opt_int, None),
            key=sc.get("key", str, CKA),
            beta=sc.get("beta", float, 1.0),
            zeta=sc.get("zeta", float, 1.0),
            squeezer=squeezer,
            post_reference=sc.get("post_reference", str, REMOTE),
        )
    except ValueError as exc:
        raise ConfigError(f"[scenario]: {exc}") from None

    mode = secs["scan"].get("mode", str, required=True)
    if mode not in MODES:
        raise ConfigError(f"[scan] mode: must be one of {MODES}, got {mode!r}")
    seed = secs["scan"].get("seed", _to_int, 0)
    if seed < 0:
        raise ConfigError(f"[scan] seed: must be >= 0, got {seed}")
    output = secs["scan"].get("output", str, None) or None

    t_grid = _range(secs["t_grid"], ScanConfig.t_grid)
    if not (0.0 < t_grid.min and t_grid.max <= 1.0):
        raise ConfigError(f"[t_grid]: t range must lie in (0, 1], got [{t_grid.min}, {t_grid.max}]")
    eps_grid = _range(secs["eps_grid"], ScanConfig.eps_grid)
    if eps_grid.min < 0.0:
        raise ConfigError(f"[eps_grid] min: excess noise must be >= 0, got {eps_grid.min}")

    pt = secs["point"]
    point = (pt.get("t", float, 1.0), pt.get("eps", float, 0.0))
    if not 0.0 < point[0] <= 1.0:
        raise ConfigError(f"[point] t: must be in (0, 1], got {point[0]}")
    if point[1] < 0.0:
        raise ConfigError(f"[point] eps: must be >= 0, got {point[1]}")

    bs = secs["eps_bisection"]
    bis = Bisection(bs.get("hi", float, 1.0), bs.get("tol", float, 1e-4))
    if not bis.hi > 0.0:
        raise ConfigError(f"[eps_bisection] hi: must be > 0, got {bis.hi}")
    if not bis.tol > 0.0:
        raise ConfigError(f"[eps_bisection] tol: must be > 0, got {bis.tol}")

    fsc = None
    if cp.has_section("finite_size"):
        fsc = _parse_finite_size(secs["finite_size"])

    return ScanConfig(scenario, mode, t_grid, eps_grid, point, bis, fsc, output, seed)


def _parse_finite_size(sec):
    fsc = FiniteSizeConfig(
        N_total=sec.get("N_total", _to_int, required=True),
        n_key=sec.get("n_key", _to_opt_int, None),
        k=sec.get("k", _to_opt_int, None),
        ordering=sec.get("ordering", str, None),
        estimator=sec.get("estimator", str, ANALYTIC),
        trials=sec.get("trials", _to_int, 64),
        sample_size=sec.get("sample_size", _to_int, 10_000),
    )
    if fsc.N_total < 1:
        raise ConfigError(f"[finite_size] N_total: must be >= 1, got {fsc.N_total}")
    if fsc.n_key is not None and not 1 <= fsc.n_key <= fsc.N_total:
        raise ConfigError(f"[finite_size] n_key: must be in [1, N_total], got {fsc.n_key}")
    if fsc.k is not None and fsc.k < 1:
        raise ConfigError(f"[finite_size] k: must be >= 1, got {fsc.k}")
    if fsc.ordering is not None and fsc.ordering not in ORDERINGS:
        raise ConfigError(f"[finite_size] ordering: must be one of {ORDERINGS}, got {fsc.ordering!r}")
    if fsc.estimator not in (ANALYTIC, SAMPLED):
        raise ConfigError(f"[finite_size] estimator: must be analytic or sampled, got {fsc.estimator!r}")
    if fsc.trials < 2:
        raise ConfigError(f"[finite_size] trials: must be >= 2, got {fsc.trials}")
    if fsc.sample_size < 1:
        raise ConfigError(f"[finite_size] sample_size: must be >= 1, got {fsc.sample_size}")
    return fsc


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def emit_config(cfg):
    """INI text that parses back to an equal ``ScanConfig``."""
    s = cfg.scenario
    out = ["[scenario]",
           f"state = {s.state}",
           f"distribution = {'none' if s.distribution is None else s.distribution}",
           f"scheme = {s.scheme}",
           f"key = {s.key}",
           f"beta = {_fmt(s.beta)}",
           f"zeta = {_fmt(s.zeta)}",
           f"V = {_fmt(s.squeezer.V)}",
           f"V_N = {_fmt(s.squeezer.V_N)}",
           f"post_reference = {s.post_reference}",
           "",
           "[scan]",
           f"mode = {cfg.mode}",
           f"seed = {cfg.seed}"]
    if cfg.output_path:
        out.append(f"output = {cfg.output_path}")
    out += ["", "[point]", f"t = {_fmt(cfg.point[0])}", f"eps = {_fmt(cfg.point[1])}"]
    for name, r in (("t_grid", cfg.t_grid), ("eps_grid", cfg.eps_grid)):
        out += ["", f"[{name}]", f"min = {_fmt(r.min)}", f"max = {_fmt(r.max)}", f"steps = {r.steps}"]
    b = cfg.eps_bisection
    out += ["", "[eps_bisection]", f"hi = {_fmt(b.hi)}", f"tol = {_fmt(b.tol)}"]
    f = cfg.finite_size
    if f is not None:
        out += ["", "[finite_size]", f"N_total = {f.N_total}",
                f"n_key = {'none' if f.n_key is None else f.n_key}",
                f"k = {'none' if f.k is None else f.k}"]
        if f.ordering is not None:
            out.append(f"ordering = {f.ordering}")
        out += [f"estimator = {f.estimator}", f"trials = {f.trials}", f"sample_size = {f.sample_size}"]
    return "\n".join(out) + "\n"


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read configuration ({exc.strerror})") from None
    return parse_config(text)


# ---------------------------------------------------------------- evaluation

def _finite_params(cfg):
    f = cfg.finite_size
    scen = cfg.scenario
    occasional = scen.estimation().occasional
    ordering = f.ordering or (EC_AFTER_PE if occasional else EC_BEFORE_PE)
    n_key = f.n_key
    if n_key is None:
        n_key = f.N_total // 2 if ordering == EC_AFTER_PE else f.N_total
    k = f.k if f.k is not None else correlation_multiplicity(scen)
    return FiniteSizeParams(f.N_total, n_key, k), ordering


def rate_at(cfg, t, eps):
    """Configured key rate at one channel point; ``-inf`` when estimation fails."""
    ch = ChannelParams(float(t), float(eps))
    if cfg.finite_size is None:
        return float(key_rate(cfg.scenario, ch).rate_bits_per_use)
    fs, ordering = _finite_params(cfg)
    stats = None
    if cfg.finite_size.estimator == SAMPLED:
        stats = _sampled_stats(cfg, ch, fs, ordering)
    try:
        return float(finite_key_rate(cfg.scenario, ch, fs, ordering, stats=stats))
    except EstimationError:
        return NO_KEY


def _sampled_stats(cfg, ch, fs, ordering):
    # simulate at a manageable size, then rescale: both deviations go as 1/sqrt(n)
    f = cfg.finite_size
    scen = cfg.scenario
    n_est = fs.N_total - fs.n_key if ordering == EC_AFTER_PE else fs.N_total
    try:
        emp = simulate_estimation(scen.state, scen.squeezer, ch, f.sample_size, fs.k,
                                  f.trials, cfg.seed, scen.estimation())
    except ValueError as exc:
        raise EstimationError(str(exc)) from None
    scale = np.sqrt(f.sample_size / n_est)
    return type(emp)(emp.sigma_t * scale, emp.sigma_eps * scale, emp.var_xdxu)


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def run_point(cfg):
    t, eps = cfg.point
    return [(t, eps, rate_at(cfg, t, eps))]


def run_grid(cfg, threads=1):
    """Rows ``(t, eps, rate)``, t-major."""
    pts = [(float(t), float(e)) for t in cfg.t_grid.values() for e in cfg.eps_grid.values()]
    rates = _map(lambda p: rate_at(cfg, *p), pts, threads)
    return [(t, e, r) for (t, e), r in zip(pts, rates)]


def threshold_at(cfg, t):
    """Largest tolerable excess noise at transmission ``t`` by bisection on the rate sign."""
    b = cfg.eps_bisection
    r0 = rate_at(cfg, t, b.lo)
    if r0 < 0:
        return ThresholdPoint(float(t), 0.0, r0)
    r_hi = rate_at(cfg, t, b.hi)
    if r_hi >= 0:
        raise ThresholdError(
            f"t={t:.12g}: rate {r_hi:.6g} still >= 0 at the upper bracket eps={b.hi}; raise [eps_bisection] hi")
    lo, hi = b.lo, b.hi
    while hi - lo > b.tol:
        mid = 0.5 * (lo + hi)
        if rate_at(cfg, t, mid) >= 0:
            lo = mid
        else:
            hi = mid
    below = rate_at(cfg, t, max(lo - b.tol, 0.0))
    above = rate_at(cfg, t, lo + b.tol)
    if not (below >= 0 > above):
        raise ThresholdError(
            f"t={t:.12g}: sign pattern not monotone near eps={lo:.12g}: "
            f"rate(eps-tol)={below:.6g}, rate(eps+tol)={above:.6g}")
    return ThresholdPoint(float(t), float(lo), r0)


def run_threshold_scan(cfg, threads=1):
    return _map(lambda t: threshold_at(cfg, float(t)), list(cfg.t_grid.values()), threads)


# ---------------------------------------------------------------- CSV

def _num(x):
    return f"{x:.12g}"


def to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def threshold_csv(points):
    return to_csv(("t", "eps_max", "rate_at_zero_eps"),
                  [(p.t, p.eps_max, p.rate_at_zero_eps) for p in points])


def rate_csv(rows):
    return to_csv(("t", "eps", "rate"), rows)


def with_overrides(cfg, **changes):
    """Copy of ``cfg`` with top-level fields replaced (None values ignored)."""
    changes = {k: v for k, v in changes.items() if v is not None}
    known = {f.name for f in fields(ScanConfig)}
    bad = set(changes) - known
    if bad:
        raise ConfigError(f"unknown configuration fields {sorted(bad)}")
    return replace(cfg, **changes)

