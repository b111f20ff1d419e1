"""Acceptance checks, one per criterion.

Run with pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""
import os
import subprocess
import sys
import tempfile
import time

import numpy as np
import pytest

from cvquotient.finite_size import (
    EC_AFTER_PE,
    EC_BEFORE_PE,
    EstimationError,
    FiniteSizeParams,
    delta_n,
    estimator_variances,
    finite_key_rate,
    finite_size_params,
    simulate_estimation,
)
from cvquotient.gaussian import (
    ChannelParams,
    condition_on_homodyne,
    homodyne_mutual_information,
    symplectic_spectrum,
    von_neumann_entropy,
)
from cvquotient.keyrates import (
    DEALER,
    DR,
    INDEPENDENT,
    MID,
    POST_CKA,
    REMOTE,
    RR,
    ScenarioSpec,
    conference_key_rate,
    independent_bipartite_sum,
)
from cvquotient.quotient import build_dual_rail, finite_quotient_closed_form, quotient_covariance
from cvquotient.scan import THRESHOLD, Bisection, ScanConfig, threshold_at
from cvquotient.states import (
    SqueezerSpec,
    build_dan,
    build_ghz_like,
    build_six_mode,
    extend_with_trusted_ancillas,
)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

PURE = SqueezerSpec(0.1, 0.0)
NOISY = SqueezerSpec(0.1, 10.0)
STRICT = 1e-6


def _report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return bool(ok)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# ---------------------------------------------------------------- 1

def check_purity():
    def run():
        mats = {"six": build_six_mode(PURE), "ghz": build_ghz_like(PURE), "dan": build_dan(PURE)}
        for kind in ("six", "ghz", "dan"):
            mats[f"{kind}+ancillas"] = extend_with_trusted_ancillas(kind, NOISY)[0]
        worst_nu = max(float(np.max(np.abs(symplectic_spectrum(m) - 1.0))) for m in mats.values())
        worst_s = max(von_neumann_entropy(m) for m in mats.values())
        return worst_nu, worst_s

    (worst_nu, worst_s), dt = _timed(run)
    ok = worst_nu <= 1e-9 and worst_s <= 1e-9 and dt < 1.0
    return _report(1, ok, f"max |nu-1| = {worst_nu:.2e}, max entropy = {worst_s:.2e} bits, {dt:.2f} s")


# ---------------------------------------------------------------- 2

def check_quotient():
    def run():
        ident = max(
            float(np.max(np.abs(quotient_covariance(build_dual_rail(n, PURE)) - finite_quotient_closed_form(PURE, n))))
            for n in (1, 10, 50))
        cxx = abs(build_six_mode(PURE)[0, 4])
        ratios = []
        for n in (10, 100, 1000):
            err = float(np.max(np.abs(quotient_covariance(build_dual_rail(n, PURE)) - build_six_mode(PURE))))
            ratios.append(round(float(err / (cxx / n)), 6))
        return ident, ratios

    (ident, ratios), dt = _timed(run)
    ok = ident <= 1e-12 and all(r <= 1.1 for r in ratios) and dt < 10.0
    return _report(2, ok, f"identity error {ident:.1e}; n*err/|Cxx| = {ratios}; {dt:.2f} s")


# ---------------------------------------------------------------- 3

def check_epr():
    mu = 5.0
    c = np.sqrt(mu**2 - 1.0)
    z = np.diag([1.0, -1.0])
    s = np.block([[mu * np.eye(2), c * z], [c * z, mu * np.eye(2)]])
    var = condition_on_homodyne(s, [0])[0, 0]
    mi = homodyne_mutual_information(s, [0], [1])
    ok = abs(var - 0.2) <= 1e-12 and abs(mi - 0.5 * np.log2(25.0)) <= 1e-9
    return _report(3, ok, f"conditional variance {var:.15f}, mutual information {mi:.12f}")


# ---------------------------------------------------------------- 4

def check_entropy():
    s = von_neumann_entropy(np.diag([3.0, 3.0]))
    return _report(4, abs(s - 2.0) <= 1e-12, f"S(Diag(3,3)) = {s!r}")


# ---------------------------------------------------------------- 5

LOSSLESS_CASES = [("GHZ-DR", "ghz", DR, None), ("GHZ-RR", "ghz", RR, None), ("GHZ-Mid", "ghz", MID, None),
                  ("D1-DR", "six", DR, 1), ("D2-DR", "six", DR, 2), ("D1-RR", "six", RR, 1),
                  ("D2-RR", "six", RR, 2), ("D3-Mid", "six", MID, 3), ("D4-Mid", "six", MID, 4)]


def check_lossless():
    rates = {name: conference_key_rate(ScenarioSpec(st, sc, d, squeezer=PURE), ChannelParams(1.0)).rate_bits_per_use
             for name, st, sc, d in LOSSLESS_CASES}
    ok = all(r > 0 for r in rates.values())
    return _report(5, ok, ", ".join(f"{k}={v:.4f}" for k, v in rates.items()))


# ---------------------------------------------------------------- 6

def _eps_max(state, scheme, dist, t):
    cfg = ScanConfig(ScenarioSpec(state, scheme, dist, squeezer=NOISY), THRESHOLD,
                     eps_bisection=Bisection(1.0, 1e-9))
    return threshold_at(cfg, t).eps_max


def check_orderings():
    t0 = time.perf_counter()
    ts = np.round(np.linspace(0.5, 1.0, 51), 10)
    ghz = [_eps_max("ghz", DR, None, t) for t in ts]
    d1 = [_eps_max("six", DR, 1, t) for t in ts]
    window = [(t, g, d) for t, g, d in zip(ts, ghz, d1) if 0.08 < g < 0.5]
    ok_a = bool(window) and all(d - g > STRICT for _, g, d in window)
    worst_a = min(d - g for _, g, d in window) if window else float("nan")

    ok_b, parts_b = True, []
    for t in (0.5, 0.7, 0.9):
        g, e1, e2 = (_eps_max("ghz", RR, None, t), _eps_max("six", RR, 1, t), _eps_max("six", RR, 2, t))
        ok = (g - e1 > STRICT) and (e1 - e2 > STRICT)
        ok_b &= ok
        parts_b.append(f"t={t}: {g:.6f}/{e1:.6f}/{e2:.6f}{'' if ok else ' (violated)'}")

    ok_c, parts_c = True, []
    for t in (0.7, 0.9):
        ch = ChannelParams(t, 0.01)
        d5 = independent_bipartite_sum(ScenarioSpec("six", DR, 5, key=INDEPENDENT, squeezer=NOISY), ch)
        dan = independent_bipartite_sum(ScenarioSpec("dan", DR, None, key=INDEPENDENT, squeezer=NOISY), ch)
        ok = d5.rate_bits_per_use - dan.rate_bits_per_use > STRICT
        ok_c &= ok
        parts_c.append(f"t={t}: {d5.rate_bits_per_use:.4f} vs {dan.rate_bits_per_use:.4f}")
    dt = time.perf_counter() - t0
    ok = ok_a and ok_b and ok_c and dt < 120.0
    detail = (f"(a) {'ok' if ok_a else 'FAILED'} on {len(window)} t-points, min margin {worst_a:.4f}; "
              f"(b) {'ok' if ok_b else 'FAILED'} GHZ/D1/D2 RR eps_max {'; '.join(parts_b)}; "
              f"(c) {'ok' if ok_c else 'FAILED'} D5 vs DAN {'; '.join(parts_c)}; {dt:.1f} s")
    return _report(6, ok, detail)


# ---------------------------------------------------------------- 7

POST_GHZ = [(DR, REMOTE), (RR, DEALER), (RR, REMOTE), (MID, REMOTE)]
POST_SIX = [(DR, 1, REMOTE), (DR, 2, REMOTE), (RR, 1, DEALER), (RR, 2, DEALER), (RR, 1, REMOTE),
            (RR, 2, REMOTE), (MID, 3, REMOTE), (MID, 4, REMOTE)]


def _finite_post(state, scheme, dist, ref, ch):
    scen = ScenarioSpec(state, scheme, dist, key=POST_CKA, post_reference=ref, beta=0.95, squeezer=NOISY)
    fs = finite_size_params(scen, 10**7)
    ordering = EC_AFTER_PE if scen.estimation().occasional else EC_BEFORE_PE
    try:
        return finite_key_rate(scen, ch, fs, ordering)
    except EstimationError:
        return float("-inf")


def check_post_cka():
    hits, ghz_everywhere = [], True
    for t in np.linspace(0.9, 1.0, 5):
        for e in np.linspace(0.0, 0.01, 5):
            ch = ChannelParams(float(t), float(e))
            g = max(_finite_post("ghz", s, None, r, ch) for s, r in POST_GHZ)
            six = max(_finite_post("six", s, d, r, ch) for s, d, r in POST_SIX)
            ghz_everywhere &= g <= 0
            if g <= 0 < six:
                hits.append((round(float(t), 4), round(float(e), 4), g, six))
    ok = bool(hits)
    ex = hits[0] if hits else None
    detail = (f"{len(hits)}/25 grid points with every GHZ variant <= 0 and a six-mode rate > 0"
              + (f", e.g. t={ex[0]}, eps={ex[1]}: GHZ max {ex[2]:.4f}, six-mode max {ex[3]:.4f}" if ex else "")
              + f"; GHZ <= 0 on the whole region: {ghz_everywhere}")
    return _report(7, ok, detail)


# ---------------------------------------------------------------- 8

def check_finite_arithmetic():
    d = delta_n(1e7)
    ok_delta = abs(d - 0.012950) <= 1e-6
    ch = ChannelParams(0.9, 0.02)
    s1 = estimator_variances("ghz", PURE, ch, FiniteSizeParams(10**7, 10**7, 1)).sigma_t
    s4 = estimator_variances("ghz", PURE, ch, FiniteSizeParams(10**7, 10**7, 4)).sigma_t
    ok_k = abs(s4 - s1 / 2) <= 1e-12
    scen = ScenarioSpec("six", DR, 2, beta=0.95, squeezer=NOISY)
    before_fs = finite_size_params(scen, 10**7)
    after_fs = FiniteSizeParams(10**7, 5 * 10**6, before_fs.k)
    worst = np.inf
    for t in np.linspace(0.8, 1.0, 5):
        for e in np.linspace(0.0, 0.02, 5):
            c = ChannelParams(float(t), float(e))
            worst = min(worst, finite_key_rate(scen, c, before_fs, EC_BEFORE_PE)
                        - finite_key_rate(scen, c, after_fs, EC_AFTER_PE))
    ok_grid = worst >= 0
    ok = ok_delta and ok_k and ok_grid
    detail = (f"Delta(1e7) = {d:.9f} (target 0.012950 +/- 1e-6: {'ok' if ok_delta else 'off by %.1e' % abs(d - 0.01295)}); "
              f"sigma_t k=1 {s1:.6e}, k=4 {s4:.6e} ({'ok' if ok_k else 'FAILED'}); "
              f"min(EC-before - EC-after) on 5x5 grid = {worst:.4f}")
    return _report(8, ok, detail)


# ---------------------------------------------------------------- 9

def check_monte_carlo():
    ch = ChannelParams(0.9, 0.02)

    def run():
        return (simulate_estimation("ghz", PURE, ch, 10**5, 1, 200, seed=0),
                simulate_estimation("ghz", PURE, ch, 10**5, 1, 200, seed=0))

    (a, b), dt = _timed(run)
    analytic = estimator_variances("ghz", PURE, ch, FiniteSizeParams(10**5, 10**5, 1)).sigma_t ** 2
    rel = a.sigma_t**2 / analytic - 1.0
    same = a == b
    ok = abs(rel) <= 0.10 and same and dt < 30.0
    return _report(9, ok, f"Var[t_hat] empirical {a.sigma_t**2:.4e} vs analytic {analytic:.4e} "
                          f"({rel:+.2%}), repeat identical: {same}, {dt:.1f} s")


# ---------------------------------------------------------------- 10

CLI_CONFIG = """[scenario]
state = six
distribution = 1
scheme = DR
V = 0.1
V_N = 10

[scan]
mode = threshold

[t_grid]
min = 0.55
max = 1.0
steps = 20
"""


def check_cli():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "scan.ini")
        with open(cfg, "w") as fh:
            fh.write(CLI_CONFIG)
        outs = []
        for i, threads in enumerate((1, 1, 8)):
            path = os.path.join(tmp, f"out{i}.csv")
            res = subprocess.run([sys.executable, "-m", "cvquotient", "threshold", "--config", cfg,
                                  "--out", path, "--threads", str(threads)], capture_output=True, text=True)
            if res.returncode != 0:
                return _report(10, False, f"exit code {res.returncode}: {res.stderr.strip()}")
            with open(path, "rb") as fh:
                outs.append(fh.read())
    rows = outs[0].count(b"\n") - 1
    ok = outs[0] == outs[1] == outs[2] and rows == 20
    return _report(10, ok, f"{rows} rows, identical across runs and threads 1/8: {outs[0] == outs[1] == outs[2]}")


CHECKS = [check_purity, check_quotient, check_epr, check_entropy, check_lossless, check_orderings,
          check_post_cka, check_finite_arithmetic, check_monte_carlo, check_cli]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [check() for check in CHECKS]
    sys.exit(0 if all(results) else 1)
