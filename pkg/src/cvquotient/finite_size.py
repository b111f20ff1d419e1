"""Finite-size key rates from conservatively estimated channel parameters.

The channel transmission is estimated from the dealer/user product moment
``C_du = (1/n) sum d_i u_i``, whose mean is ``sqrt(t) C`` with ``C`` the
pre-channel x-covariance. Using ``k`` symmetric correlations divides the
variance of the transmission estimator by ``k``. The excess noise estimator is
``V_eps = mean(u^2) + t (1 - Var[x_u]) - 1`` with ``V_eps = t eps``.

Two orderings of error correction (EC) and parameter estimation (PE) are
supported: with EC after PE the ``N - n`` disclosed signals are lost for the
key, with EC before PE every signal serves both purposes.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .gaussian import ChannelParams, apply_lossy_channel, quad_indices
from .keyrates import Estimation, key_rate
from .states import DAN, GHZ, SIX, build_state

EC_AFTER_PE = "EC_after_PE"
EC_BEFORE_PE = "EC_before_PE"
ORDERINGS = (EC_AFTER_PE, EC_BEFORE_PE)

Z_CONF = 6.5
# log2(2e10): failure probability 1e-10 inside the mutual-information penalty
_LOG_TERM = np.log2(2e10)
_CORR_TOL = 1e-12
_CHUNK = 1 << 18


class EstimationError(ValueError):
    """Channel parameters cannot be estimated (no usable correlation, or t_low <= 0)."""


@dataclass(frozen=True)
class FiniteSizeParams:
    N_total: int
    n_key: int
    k: int = 1
    z_conf: float = Z_CONF

    def __post_init__(self):
        if not 1 <= self.n_key <= self.N_total:
            raise ValueError(f"need 1 <= n_key <= N_total, got n_key={self.n_key}, N_total={self.N_total}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.z_conf < 0:
            raise ValueError(f"z_conf must be >= 0, got {self.z_conf}")


@dataclass(frozen=True)
class EstimatorStats:
    sigma_t: float
    sigma_eps: float
    var_xdxu: float

    def __post_init__(self):
        for name in ("sigma_t", "sigma_eps", "var_xdxu"):
            v = getattr(self, name)
            if not v >= 0.0:
                raise ValueError(f"{name} must be non-negative, got {v}")


def delta_n(n):
    """Mutual-information penalty ``7 sqrt(log2(2e10) / n)`` in bits."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 7.0 * np.sqrt(_LOG_TERM / n)


def var_xdxu(state_kind, spec, t):
    """``Var[x_d x~_u]`` for a dealer mode and a user mode after a pure-loss channel.

    For jointly Gaussian zero-mean variables this is
    ``Var[x_d] Var[x~_u] + Cov[x_d, x~_u]^2``; the expressions below are that
    identity written out for each resource.
    """
    V, VN = spec.V, spec.V_N
    a = VN + 1.0 / V
    if state_kind == SIX:
        return t / 16.0 * (5 * a**2 + 5 * V**2 + 6 * a * V) + (1 - t) * (1 + V * (VN + V)) / (2 * V)
    if state_kind == GHZ:
        return t / 9.0 * (2 * a**2 + 5 * V**2 + 2 * a * V) + (1 - t) * (1 + V * (VN + 2 * V)) / (3 * V)
    if state_kind == DAN:
        return t / 4.0 * (a**2 + a + V**2 + V) + (1 - t) * (a + V) / 2.0
    raise ValueError(f"unknown state kind {state_kind!r}")


def _default_estimation(state_kind):
    if state_kind in (GHZ, DAN):
        return Estimation((0,), (1,))
    if state_kind == SIX:
        return Estimation((0,), (2,))
    raise ValueError(f"unknown state kind {state_kind!r}")


def correlated_pairs(state_kind, spec, estimation=None):
    """Retained/user mode pairs with non-zero pre-channel x-covariance, with that covariance."""
    est = estimation or _default_estimation(state_kind)
    cm = build_state(state_kind, spec)
    scale = np.max(np.abs(np.diag(cm)))
    out = []
    for d in est.retained:
        for u in est.user:
            c = cm[2 * d, 2 * u]
            if abs(c) > _CORR_TOL * scale:
                out.append((d, u, float(c)))
    return out


def correlation_multiplicity(scenario):
    return len(correlated_pairs(scenario.state, scenario.squeezer, scenario.estimation()))


def finite_size_params(scenario, N_total, n_key=None):
    """Parameters with ``k`` counted from the scenario's estimation modes.

    Occasional-retention scenarios default to a half split of the signals.
    """
    if n_key is None:
        n_key = N_total // 2 if scenario.estimation().occasional else N_total
    return FiniteSizeParams(int(N_total), int(n_key), correlation_multiplicity(scenario))


def estimator_variances(state_kind, spec, ch, fs, n_est=None, estimation=None):
    """Analytic standard deviations of the transmission and excess-noise estimators.

    ``n_est`` is the number of signals used for estimation (default ``fs.N_total``).
    """
    pairs = correlated_pairs(state_kind, spec, estimation)
    if not pairs:
        raise EstimationError("no retained mode is correlated with the user's modes (C = 0)")
    n = fs.N_total if n_est is None else int(n_est)
    if n < 1:
        raise EstimationError(f"no signals left for estimation (n_est={n})")
    c = np.mean([abs(p[2]) for p in pairs])
    var = var_xdxu(state_kind, spec, ch.t)
    var_t = 4.0 * ch.t * var / (fs.k * n * c**2)

    cm = build_state(state_kind, spec)
    u = pairs[0][1]
    var_xu = cm[2 * u, 2 * u]
    var_xu_ch = ch.t * (var_xu + ch.eps - 1.0) + 1.0
    var_eps = 2.0 / n * var_xu_ch**2 + var_t * (1.0 - var_xu) ** 2
    return EstimatorStats(float(np.sqrt(var_t)), float(np.sqrt(var_eps)), float(var))


def conservative_channel(ch, stats, z_conf=Z_CONF):
    """Channel at ``t_low = t - z sigma_t`` and ``eps_up = (t eps + z sigma_eps) / t_low``."""
    t_low = ch.t - z_conf * stats.sigma_t
    if t_low <= 0.0:
        raise EstimationError(
            f"t_low = {t_low:.6g} <= 0 (t={ch.t}, sigma_t={stats.sigma_t:.6g})")
    t_low = min(t_low, ch.t)
    v_up = ch.t * ch.eps + z_conf * stats.sigma_eps
    return ChannelParams(t_low, v_up / t_low)


def finite_key_rate(scenario, ch, fs, ordering=EC_BEFORE_PE, stats=None):
    """Finite-size rate in bits per signal.

    EC after PE: ``(n/N) [K(t_low, eps_up) - Delta(n)]`` with estimation on the
    ``N - n`` disclosed signals. EC before PE: ``K(t_low, eps_up) - Delta(N)``
    with estimation on all ``N`` signals. ``stats`` replaces the analytic
    estimator deviations, e.g. with sampled ones.
    """
    est = scenario.estimation()
    if ordering == EC_AFTER_PE:
        if fs.n_key >= fs.N_total:
            raise ValueError("EC after PE needs n_key < N_total")
        n_est = fs.N_total - fs.n_key
    elif ordering == EC_BEFORE_PE:
        if est.occasional:
            raise ValueError("estimation rounds are separate from key rounds here; use EC after PE")
        n_est = fs.N_total
    else:
        raise ValueError(f"ordering must be one of {ORDERINGS}, got {ordering!r}")
    if stats is None:
        stats = estimator_variances(scenario.state, scenario.squeezer, ch, fs, n_est, est)
    low = conservative_channel(ch, stats, fs.z_conf)
    k_inf = key_rate(scenario, low).rate_bits_per_use
    if ordering == EC_AFTER_PE:
        return fs.n_key / fs.N_total * (k_inf - delta_n(fs.n_key))
    return k_inf - delta_n(fs.N_total)


# ---------------------------------------------------------------- sampling

def _trial_rng(seed, trial):
    ss = np.random.SeedSequence(seed, spawn_key=(trial,))
    return np.random.Generator(np.random.Philox(ss))


def _sampling_setup(state_kind, spec, ch, k, estimation):
    pairs = correlated_pairs(state_kind, spec, estimation)
    if len(pairs) < k:
        raise ValueError(f"only {len(pairs)} correlated pairs available, k={k} requested")
    pairs = pairs[:k]
    modes = sorted({p[0] for p in pairs} | {p[1] for p in pairs})
    users = sorted({p[1] for p in pairs})
    cm = apply_lossy_channel(build_state(state_kind, spec), users, ch)
    x = quad_indices(modes, "x")
    chol = np.linalg.cholesky(cm[np.ix_(x, x)])
    d_idx = np.array([modes.index(p[0]) for p in pairs])
    u_idx = np.array([modes.index(p[1]) for p in pairs])
    signs = np.sign([p[2] for p in pairs])
    c = float(np.mean([abs(p[2]) for p in pairs]))
    ref = modes.index(pairs[0][1])
    var_xu = build_state(state_kind, spec)[2 * pairs[0][1], 2 * pairs[0][1]]
    return chol, d_idx, u_idx, signs, c, ref, var_xu


def _one_trial(setup, n, seed, trial):
    chol, d_idx, u_idx, signs, _, ref, _ = setup
    rng = _trial_rng(seed, trial)
    prod = sq = 0.0
    left = n
    while left:
        m = min(left, _CHUNK)
        z = rng.standard_normal((m, chol.shape[0]))
        p, s = _kernels.product_moments(z, chol, d_idx, u_idx, signs, ref)
        prod += p
        sq += s
        left -= m
    return prod / (len(d_idx) * n), sq / n


def simulate_estimation_samples(state_kind, spec, ch, n, k, trials, seed, estimation=None, threads=1):
    """Per-trial estimates ``(C_du, t_hat, V_eps_hat)`` as arrays of length ``trials``.

    Trial ``i`` draws from a Philox stream keyed by ``(seed, i)`` only, so the
    result does not depend on ``threads``.
    """
    if trials < 2:
        raise ValueError(f"trials must be >= 2, got {trials}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    setup = _sampling_setup(state_kind, spec, ch, k, estimation)
    c, var_xu = setup[4], setup[6]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            res = list(pool.map(lambda i: _one_trial(setup, n, seed, i), range(trials)))
    else:
        res = [_one_trial(setup, n, seed, i) for i in range(trials)]
    c_du = np.array([r[0] for r in res])
    u2 = np.array([r[1] for r in res])
    t_hat = (c_du / c) ** 2
    v_hat = u2 + t_hat * (1.0 - var_xu) - 1.0
    return c_du, t_hat, v_hat


def simulate_estimation(state_kind, spec, ch, n, k, trials, seed, estimation=None, threads=1):
    """Empirical estimator statistics over ``trials`` simulated estimation rounds.

    ``var_xdxu`` is ``n`` times the empirical variance of ``C_du``, the
    per-signal variance of the (combined) product moment.
    """
    c_du, t_hat, v_hat = simulate_estimation_samples(
        state_kind, spec, ch, n, k, trials, seed, estimation, threads)
    return EstimatorStats(
        float(np.std(t_hat, ddof=1)),
        float(np.std(v_hat, ddof=1)),
        float(n * np.var(c_du, ddof=1)),
    )
