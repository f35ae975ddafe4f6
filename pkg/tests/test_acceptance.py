"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one ``ACCEPTANCE <k> <name>: PASS|FAIL`` line (run pytest
with ``-s`` to watch them stream).  Criterion 13's tail clause is asserted
exactly as specified and is expected to fail: with total noise variance
6*ln(n)^2/eps^2 the error is Gaussian with sigma = sqrt(6)*ln(n)/eps, so
P[|error| > 6*ln(n)/eps] = erfc(sqrt(3)) ~= 0.0143 for every log base, which
is not < 0.01.  The variance clause of criterion 13 passes.  See
tests/README note in the repository README for details.
"""

import itertools
import math
import time

import numpy as np
import pytest

from dpdist import audit, distributed as ds, local_model as lm
from dpdist.core import GapParams, min_window_weight, min_window_weight_gridded
from dpdist.fixtures import (
    ChainProtocol,
    NoisyParityProtocol,
    RelayProtocol,
    SharedModularSumProtocol,
    fixture_topology,
)
from dpdist.mechanisms import SensitivitySpec, flip_bias_for, laplace_mechanism
from dpdist.seeding import derive_rng

SEED = 20260809


def report(k, name, ok, detail, started, budget):
    elapsed = time.time() - started
    verdict = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {k:>2} {name}: {verdict} ({detail}; {elapsed:.1f}s/{budget}s)")
    assert elapsed < budget, f"criterion {k} exceeded its {budget}s runtime budget"
    return ok


def test_criterion_01_randomized_response_accuracy():
    started = time.time()
    n, eps, trials = 10_000, 1.0, 10_000
    x = np.zeros(n, dtype=np.uint8)
    x[: n // 2] = 1
    true = n // 2
    ests = np.empty(trials)
    for k in range(trials):
        ests[k], _ = lm.randomized_response_sum(x, eps, derive_rng(SEED, 1, k))
    target = math.sqrt(2 * n)
    std = ests.std(ddof=1)
    ok = abs(std - target) / target < 0.10 and abs(ests.mean() - true) < 5 * target / math.sqrt(
        trials
    )
    assert report(
        1,
        "randomized-response accuracy",
        ok,
        f"std {std:.2f} vs {target:.2f} +-10%",
        started,
        30,
    )


def test_criterion_02_exact_epsilon_of_flip():
    started = time.time()
    worst = 0.0
    for eps in (0.1, 0.5, 1.0):
        measured = audit.exact_epsilon(lm.flip_sanitizer(flip_bias_for(eps)))
        expected = math.log1p(eps)
        worst = max(worst, abs(measured - expected) / expected)
    ok = worst <= 1e-12
    assert report(
        2, "exact privacy of randomized response", ok, f"max rel err {worst:.2e}", started, 1
    )


def test_criterion_03_laplace_mechanism_tails():
    started = time.time()
    trials, eps = 1_000_000, 1.0
    err = np.abs(
        laplace_mechanism(0.0, SensitivitySpec(1.0), eps, derive_rng(SEED, 3), size=trials)
    )
    devs = {k: abs(float(np.mean(err > k / eps)) - math.exp(-k)) for k in (1, 2, 3)}
    ok = all(v < 0.003 for v in devs.values())
    assert report(
        3,
        "laplace mechanism tails",
        ok,
        "devs " + ", ".join(f"k={k}:{v:.4f}" for k, v in devs.items()),
        started,
        60,
    )


@pytest.fixture(scope="module")
def million_view_panel():
    p = audit.SparseBernoulli(n=10_000, eps=1.0, d=4.0)
    panel = audit.flip_panel(p, flip_bias_for(1.0), 1_000_000, derive_rng(SEED, 4))
    return p, panel


def test_criterion_04_hard_ratio_bounds(million_view_panel):
    started = time.time()
    p, panel = million_view_panel
    bound = 4.0 * p.density * p.eps
    ok = panel.hard_violations == 0 and panel.max_abs <= bound
    assert report(
        4,
        "hard per-party ratio bounds",
        ok,
        f"violations {panel.hard_violations}, max |V| {panel.max_abs:.5f} <= {bound:.5f}",
        started,
        120,
    )


def test_criterion_05_mean_log_ratio_bound(million_view_panel):
    started = time.time()
    p, panel = million_view_panel
    bound = 32.0 / p.d
    mean = panel.mean_log_total()
    ok = mean <= bound + 3 * panel.log_total_se()
    assert report(
        5, "mean total log ratio", ok, f"mean {mean:.4f} <= {bound:.1f} + 3se", started, 120
    )


def test_criterion_06_hoeffding_tail(million_view_panel):
    started = time.time()
    p, panel = million_view_panel
    check = audit.hoeffding_tail_check(panel.log_totals, nu=64.0, d=p.d)
    ok = check.passed and check.bound == pytest.approx(math.exp(-8.0), rel=1e-12)
    assert report(
        6,
        "view-ratio concentration tail",
        ok,
        f"rate {check.empirical_rate:.2e} <= {check.bound:.2e} + 3se",
        started,
        120,
    )


def test_criterion_07_chernoff_lower_tail():
    started = time.time()
    p = audit.SparseBernoulli(n=10_000, eps=1.0, d=4.0)
    sums = audit.sample_sparse_sums(p, 100_000, derive_rng(SEED, 7))
    check = audit.chernoff_tail_check(sums, p, gamma=0.5)
    expected_bound = math.exp(-0.25 * math.sqrt(p.n) / (2 * p.eps * math.sqrt(p.d)))
    ok = check.passed and check.bound == pytest.approx(expected_bound, rel=1e-12)
    assert report(
        7,
        "planted-sum lower tail",
        ok,
        f"rate {check.empirical_rate:.2e} <= {check.bound:.2e} + 3se",
        started,
        60,
    )


def test_criterion_08_phase_transition():
    started = time.time()
    n, eps, trials = 10_000, 1.0, 10_000
    p = audit.SparseBernoulli(n=n, eps=eps, d=4.0)

    def rr_gap(tau):
        return lm.sum_to_gap(
            lambda x, rng: lm.randomized_response_sum(x, eps, rng), GapParams(0, int(tau))
        )

    tau_low = 0.1 * math.sqrt(n) / eps
    tau_high = 10 * math.sqrt(n) / eps
    low = audit.distinguisher_experiment(
        rr_gap(tau_low), p, tau=tau_low, trials=trials, rng=derive_rng(SEED, 8, 0)
    )
    high = audit.distinguisher_experiment(
        rr_gap(tau_high), p, tau=tau_high, trials=trials, rng=derive_rng(SEED, 8, 1)
    )
    ok = low.max_error >= 0.005 and high.max_error <= 0.01
    assert report(
        8,
        "sqrt(n)/eps phase transition",
        ok,
        f"error {low.max_error:.3f} >= 0.005 at tau={tau_low:g}; "
        f"{high.max_error:.4f} <= 0.01 at tau={tau_high:g}",
        started,
        120,
    )


def test_criterion_09_compiler_preserves_distributions():
    started = time.time()
    worst = 0.0
    rounds_ok = True
    for protocol in [
        NoisyParityProtocol(flip_bias_for(1.0)),
        SharedModularSumProtocol(modulus=3),
        RelayProtocol(keep_prob=0.8),
    ]:
        topo = fixture_topology(protocol)
        compiled = ds.compile_to_local(protocol, topo)
        rounds_ok &= compiled.rounds == protocol.rounds + 1
        for bits in itertools.product((0, 1), repeat=protocol.n):
            x = np.array(bits, dtype=np.uint8)
            original = ds.output_distribution(protocol, topo, x)
            local = compiled.output_distribution(x)
            for key in set(original) | set(local):
                worst = max(worst, abs(original.get(key, 0.0) - local.get(key, 0.0)))
    ok = worst <= 1e-12 and rounds_ok
    assert report(
        9,
        "distributed-to-local compiler",
        ok,
        f"max dist diff {worst:.1e}, rounds = original+1: {rounds_ok}",
        started,
        10,
    )


def test_criterion_10_lonely_party_count():
    started = time.time()
    n = 64
    worst = n
    for t in (1, 3, 7):
        cap = n * (t + 1) // 4
        for k in range(100):
            rng = derive_rng(SEED, 10, t, k)
            topo = ds.random_topology(n, int(rng.integers(0, cap + 1)), rng)
            worst = min(worst, len(ds.classify(topo, t).lonely))
    ok = worst >= n // 2
    assert report(
        10, "lonely parties under message cap", ok, f"min lonely {worst} >= {n // 2}", started, 5
    )


def test_criterion_11_transcript_product_law():
    started = time.time()
    worst = 0.0
    for protocol in [
        RelayProtocol(keep_prob=0.8),
        NoisyParityProtocol(flip_bias_for(1.0)),
        ChainProtocol(flip_bias_for(0.5)),
    ]:
        topo = fixture_topology(protocol)
        for bits in itertools.product((0, 1), repeat=protocol.n):
            x = np.array(bits, dtype=np.uint8)
            for key, prob in ds.enumerate_executions(protocol, topo, x).items():
                product = 1.0
                for i in range(protocol.n):
                    product *= ds.consistent_probability(protocol, i, int(x[i]), key)
                worst = max(worst, abs(product - prob))
    # non-interactive product law: mixed-view ratio equals per-party product
    sanitizers = [lm.flip_sanitizer(flip_bias_for(1.0))] * 4
    p = audit.SparseBernoulli(n=4, eps=1.0, d=4.0)
    zero_dist = lm.enumerate_noninteractive(sanitizers, [0, 0, 0, 0])
    for c in itertools.product((0, 1), repeat=4):
        mixed = 0.0
        for bits in itertools.product((0, 1), repeat=4):
            w = 1.0
            for b in bits:
                w *= p.density if b else 1.0 - p.density
            for s, b, sym in zip(sanitizers, bits, c):
                w *= s.output_prob(b, sym)
            mixed += w
        stats = audit.likelihood_ratios(sanitizers, lm.CuratorView(answers=(c,)), p)
        worst = max(worst, abs(stats.total_ratio - mixed / zero_dist[c]))
    ok = worst <= 1e-12
    assert report(
        11, "transcript probability factorization", ok, f"max abs diff {worst:.1e}", started, 10
    )


def test_criterion_12_windowed_min_protocol():
    started = time.time()
    n, eps, delta, t, alpha_exp = 4096, 1.0, 0.01, 7, 0.75
    window, interval = ds.windowed_min_sizes(n, alpha_exp)

    matches = 0
    for k in range(1000):
        rng = derive_rng(SEED, 12, 0, k)
        x = (rng.random(n) < 0.5).astype(np.uint8)
        est, _ = ds.windowed_min_protocol(
            x, eps, delta, t, alpha_exp, rng, zero_noise=True, record=False
        )
        matches += est == min_window_weight_gridded(x, window, interval)

    gn, gw, gi = 16, 4, 2
    codes = np.arange(1 << gn, dtype=np.uint32)
    bits = ((codes[:, None] >> np.arange(gn)[None, :]) & 1).astype(np.int64)
    csum = np.cumsum(bits, axis=1)
    wsums = csum[:, gw - 1 :].copy()
    wsums[:, 1:] -= csum[:, : gn - gw]
    full = wsums.min(axis=1)
    grid = wsums[:, ::gi].min(axis=1)
    grid_ok = bool(np.all(grid >= full) and np.all(grid <= full + (gi - 1)))

    r_base = ds.noise_base_variance(eps, delta)
    bound = interval * (1.0 + 6.0 * math.sqrt(2.0 * r_base) / interval)
    within = 0
    noise_trials = 200
    for k in range(noise_trials):
        rng = derive_rng(SEED, 12, 1, k)
        x = (rng.random(n) < 0.5).astype(np.uint8)
        est, _ = ds.windowed_min_protocol(x, eps, delta, t, alpha_exp, rng, record=False)
        within += abs(est - min_window_weight(x, window)) <= bound
    rate = within / noise_trials
    ok = matches == 1000 and grid_ok and rate >= 0.9
    assert report(
        12,
        "secret-shared windowed minimum",
        ok,
        f"zero-noise {matches}/1000 exact, grid bound {grid_ok}, "
        f"noisy within {bound:.1f}: {rate:.2f} >= 0.9",
        started,
        60,
    )


def test_criterion_13_gaussian_aggregator():
    started = time.time()
    n, eps, trials = 10_000, 1.0, 10_000
    x = np.zeros(n, dtype=np.uint8)
    x[: n // 2] = 1
    true = n // 2
    errors = np.empty(trials)
    for k in range(trials):
        est, _ = ds.gaussian_aggregator_sum(x, eps, derive_rng(SEED, 13, k), record=False)
        errors[k] = est - true
    target_var = 6.0 * math.log(n) ** 2 / eps**2
    var = errors.var(ddof=1)
    var_ok = abs(var - target_var) / target_var < 0.05
    tail = float(np.mean(np.abs(errors) > 6.0 * math.log(n) / eps))
    tail_ok = tail < 0.01
    ok = var_ok and tail_ok
    report(
        13,
        "gaussian aggregator",
        ok,
        f"var {var:.1f} vs {target_var:.1f} +-5% ({'ok' if var_ok else 'off'}); "
        f"tail {tail:.4f} < 0.01 ({'ok' if tail_ok else 'off'}, analytic erfc(sqrt(3)) = 0.0143)",
        started,
        30,
    )
    assert var_ok, "noise variance off target"
    # Expected to fail: the specified threshold sits at sqrt(6) sigma, where
    # the two-sided Gaussian tail is erfc(sqrt(3)) ~= 0.0143 > 0.01.
    assert tail_ok, (
        f"P[|error| > 6 ln(n)/eps] = {tail:.4f}; for noise variance 6 ln(n)^2/eps^2 "
        "this probability is erfc(sqrt(3)) ~= 0.0143 regardless of log base, so the "
        "< 0.01 requirement cannot be met by a faithful implementation"
    )


def test_criterion_14_symmetry():
    started = time.time()
    eps = 1.0
    params = flip_bias_for(eps)
    base = (1, 1, 0, 0)
    ref = lm.rr_count_distribution(np.array(base, dtype=np.uint8), params)
    worst = 0.0
    for perm in itertools.permutations(range(4)):
        permuted = np.array([base[i] for i in perm], dtype=np.uint8)
        dist = lm.rr_count_distribution(permuted, params)
        for k, pr in ref.items():
            worst = max(worst, abs(dist[k] - pr))
    exact_ok = worst <= 1e-12

    n, trials = 100, 100_000
    rng = derive_rng(SEED, 14)
    x = np.zeros(n, dtype=np.uint8)
    x[: n // 2] = 1
    pi_x = x[rng.permutation(n)]
    est_x = np.empty(trials)
    est_p = np.empty(trials)
    for k in range(trials):
        est_x[k], _ = lm.randomized_response_sum(x, eps, rng)
        est_p[k], _ = lm.randomized_response_sum(pi_x, eps, rng)
    from scipy import stats as scipy_stats

    edges = np.linspace(
        min(est_x.min(), est_p.min()), max(est_x.max(), est_p.max()) + 1e-9, 21
    )
    hx, _ = np.histogram(est_x, bins=edges)
    hp, _ = np.histogram(est_p, bins=edges)
    keep = (hx + hp) > 0
    _, pvalue, _, _ = scipy_stats.chi2_contingency(np.array([hx[keep], hp[keep]]))
    chi_ok = pvalue > 0.001
    ok = exact_ok and chi_ok
    assert report(
        14,
        "output symmetry",
        ok,
        f"exact n=4 diff {worst:.1e}; chi2 p={pvalue:.3f} > 0.001",
        started,
        60,
    )


def test_criterion_15_definition_equivalence():
    started = time.time()
    cases = [
        [lm.flip_sanitizer(flip_bias_for(1.0))],
        [lm.flip_sanitizer(flip_bias_for(1.0))] * 2,
        [lm.flip_sanitizer(flip_bias_for(0.5)), lm.flip_sanitizer(flip_bias_for(1.0))],
        [
            lm.flip_sanitizer(flip_bias_for(0.3)),
            lm.flip_sanitizer(flip_bias_for(1.0)),
            lm.constant_sanitizer(0),
        ],
        [lm.flip_sanitizer(flip_bias_for(0.25))] * 4,
    ]
    ok = True
    for sanitizers in cases:
        ok &= audit.definition_equivalence_check(sanitizers).passed
    assert report(
        15, "privacy definition equivalence", ok, f"{len(cases)} fixtures, tol 1e-12", started, 10
    )
