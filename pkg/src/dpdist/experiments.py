"""Named experiments reproducing the artifact's headline results at desk scale.

Each experiment resolves its parameters from an ``ExperimentConfig``, runs
deterministically from the master seed (trial k uses the generator derived
from (seed, k); batched experiments derive one generator per batch and say
so in their description), and yields (trial, metric, value) rows for the
CSV writer in ``cli``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import stats as scipy_stats

from . import audit, distributed, fixtures, local_model
from .core import min_window_weight, min_window_weight_gridded
from .mechanisms import SensitivitySpec, flip_bias_for, laplace_mechanism
from .seeding import derive_rng

__all__ = ["ExperimentConfig", "ExperimentDef", "EXPERIMENTS", "run_rows"]

_BATCH = 1 << 16


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved knobs for one experiment run; None means experiment default."""

    experiment: str
    seed: int = 0
    trials: Optional[int] = None
    n: Optional[int] = None
    eps: Optional[float] = None
    delta: Optional[float] = None
    t: Optional[int] = None
    rounds: Optional[int] = None
    tau: Optional[float] = None
    kappa: Optional[int] = None
    d: Optional[float] = None
    nu: Optional[float] = None
    alpha_exp: Optional[float] = None
    out: Optional[str] = None


Row = Tuple[int, str, float]
Runner = Callable[[ExperimentConfig], Tuple[Dict[str, Any], List[Row]]]


@dataclass(frozen=True)
class ExperimentDef:
    name: str
    description: str
    reproduces: str
    runner: Runner


def _pos_int(name: str, value, default: int) -> int:
    v = default if value is None else value
    if not isinstance(v, (int, np.integer)) or v <= 0:
        raise ValueError(f"{name}: expected a positive integer, got {v!r}")
    return int(v)


def _pos_float(name: str, value, default: float) -> float:
    v = default if value is None else value
    v = float(v)
    if not v > 0:
        raise ValueError(f"{name}: expected a positive number, got {v!r}")
    return v


def _unit_float(name: str, value, default: float) -> float:
    v = default if value is None else float(value)
    if not 0.0 < v < 1.0:
        raise ValueError(f"{name}: expected a value in (0, 1), got {v!r}")
    return v


def _half_ones(n: int) -> np.ndarray:
    x = np.zeros(n, dtype=np.uint8)
    x[: n // 2] = 1
    return x


# ---------------------------------------------------------------------------
# Accuracy of the sum protocols
# ---------------------------------------------------------------------------


def _rr_sum_error(cfg: ExperimentConfig):
    n = _pos_int("n", cfg.n, 10_000)
    eps = _pos_float("eps", cfg.eps, 1.0)
    trials = _pos_int("trials", cfg.trials, 10_000)
    x = _half_ones(n)
    true = int(x.sum())
    params = {"n": n, "eps": eps, "trials": trials, "seed": cfg.seed, "input_sum": true}
    rows: List[Row] = []
    for k in range(trials):
        est, _ = local_model.randomized_response_sum(x, eps, derive_rng(cfg.seed, k))
        rows.append((k, "error", est - true))
        rows.append((k, "abs_error", abs(est - true)))
    return params, rows


def _rr_exact_epsilon(cfg: ExperimentConfig):
    eps_values = [0.1, 0.5, 1.0]
    if cfg.eps is not None and cfg.eps not in eps_values:
        eps_values.append(_pos_float("eps", cfg.eps, 1.0))
    params = {"eps_values": eps_values, "seed": cfg.seed}
    rows: List[Row] = []
    for k, eps in enumerate(eps_values):
        measured = audit.exact_epsilon(local_model.flip_sanitizer(flip_bias_for(eps)))
        expected = math.log1p(eps)
        rows.append((k, "eps", eps))
        rows.append((k, "exact_epsilon", measured))
        rows.append((k, "expected_log1p_eps", expected))
        rows.append((k, "rel_error", abs(measured - expected) / expected))
    return params, rows


def _laplace_tails(cfg: ExperimentConfig):
    trials = _pos_int("trials", cfg.trials, 1_000_000)
    eps = _pos_float("eps", cfg.eps, 1.0)
    spec = SensitivitySpec(1.0)
    params = {"trials": trials, "eps": eps, "gs": 1.0, "seed": cfg.seed, "batch": _BATCH}
    exceed = {1: 0, 2: 0, 3: 0}
    done = 0
    batch_idx = 0
    while done < trials:
        m = min(_BATCH, trials - done)
        rng = derive_rng(cfg.seed, batch_idx)
        err = np.abs(laplace_mechanism(0.0, spec, eps, rng, size=m))
        for k in exceed:
            exceed[k] += int(np.count_nonzero(err > k / eps))
        done += m
        batch_idx += 1
    rows: List[Row] = []
    for k in sorted(exceed):
        rate = exceed[k] / trials
        rows.append((k, "tail_rate", rate))
        rows.append((k, "expected", math.exp(-k)))
        rows.append((k, "abs_dev", abs(rate - math.exp(-k))))
    return params, rows


def _gaussian_aggregator(cfg: ExperimentConfig):
    n = _pos_int("n", cfg.n, 10_000)
    eps = _pos_float("eps", cfg.eps, 1.0)
    trials = _pos_int("trials", cfg.trials, 10_000)
    x = _half_ones(n)
    true = int(x.sum())
    params = {
        "n": n,
        "eps": eps,
        "trials": trials,
        "seed": cfg.seed,
        "noise_variance": 6.0 * math.log(n) ** 2 / eps**2,
    }
    rows: List[Row] = []
    for k in range(trials):
        est, _ = distributed.gaussian_aggregator_sum(
            x, eps, derive_rng(cfg.seed, k), record=False
        )
        rows.append((k, "error", est - true))
    return params, rows


# ---------------------------------------------------------------------------
# Likelihood-ratio audits (batched; one generator per batch)
# ---------------------------------------------------------------------------


def _panel_params(cfg: ExperimentConfig):
    n = _pos_int("n", cfg.n, 10_000)
    eps = _pos_float("eps", cfg.eps, 1.0)
    d = _pos_float("d", cfg.d, 4.0)
    trials = _pos_int("trials", cfg.trials, 1_000_000)
    dist = audit.SparseBernoulli(n=n, eps=eps, d=d)
    return dist, flip_bias_for(eps), trials


def _panel_batches(cfg: ExperimentConfig, dist, flip, trials):
    done = 0
    batch_idx = 0
    while done < trials:
        m = min(_BATCH, trials - done)
        yield batch_idx, audit.flip_panel(dist, flip, m, derive_rng(cfg.seed, batch_idx))
        done += m
        batch_idx += 1


def _v_bounds(cfg: ExperimentConfig):
    dist, flip, trials = _panel_params(cfg)
    params = {
        "n": dist.n,
        "eps": dist.eps,
        "d": dist.d,
        "density": dist.density,
        "trials": trials,
        "hard_bound": 4.0 * dist.density * dist.eps,
        "sum_mean_bound": 32.0 / dist.d,
        "seed": cfg.seed,
        "batch": _BATCH,
    }
    rows: List[Row] = []
    for b, panel in _panel_batches(cfg, dist, flip, trials):
        rows.append((b, "views", panel.trials))
        rows.append((b, "hard_violations", panel.hard_violations))
        rows.append((b, "max_abs_v", panel.max_abs))
        rows.append((b, "sum_v_total", float(panel.log_totals.sum())))
        rows.append((b, "sum_v_sq_total", float((panel.log_totals**2).sum())))
    return params, rows


def _hoeffding_tail(cfg: ExperimentConfig):
    dist, flip, trials = _panel_params(cfg)
    nu = _pos_float("nu", cfg.nu, 64.0)
    if nu <= 32:
        raise ValueError(f"nu: must exceed 32, got {nu}")
    bound = audit.hoeffding_bound(nu, dist.d)
    params = {
        "n": dist.n,
        "eps": dist.eps,
        "d": dist.d,
        "nu": nu,
        "trials": trials,
        "bound": bound,
        "threshold_log_ratio": nu / dist.d,
        "seed": cfg.seed,
        "batch": _BATCH,
    }
    rows: List[Row] = []
    for b, panel in _panel_batches(cfg, dist, flip, trials):
        rows.append((b, "views", panel.trials))
        rows.append((b, "exceed_count", int(np.count_nonzero(panel.log_totals > nu / dist.d))))
    return params, rows


def _chernoff_tail(cfg: ExperimentConfig):
    n = _pos_int("n", cfg.n, 10_000)
    eps = _pos_float("eps", cfg.eps, 1.0)
    d = _pos_float("d", cfg.d, 4.0)
    trials = _pos_int("trials", cfg.trials, 100_000)
    gamma = 0.5
    dist = audit.SparseBernoulli(n=n, eps=eps, d=d)
    bound = audit.chernoff_lower_tail_bound(dist, gamma)
    params = {
        "n": n,
        "eps": eps,
        "d": d,
        "gamma": gamma,
        "trials": trials,
        "bound": bound,
        "threshold": (1.0 - gamma) * dist.expected_sum,
        "seed": cfg.seed,
        "batch": _BATCH,
    }
    rows: List[Row] = []
    done = 0
    b = 0
    while done < trials:
        m = min(_BATCH, trials - done)
        sums = audit.sample_sparse_sums(dist, m, derive_rng(cfg.seed, b))
        rows.append((b, "draws", m))
        rows.append(
            (b, "low_count", int(np.count_nonzero(sums <= (1.0 - gamma) * dist.expected_sum)))
        )
        done += m
        b += 1
    return params, rows


def _phase_transition(cfg: ExperimentConfig):
    n = _pos_int("n", cfg.n, 10_000)
    eps = _pos_float("eps", cfg.eps, 1.0)
    d = _pos_float("d", cfg.d, 4.0)
    trials = _pos_int("trials", cfg.trials, 10_000)
    if cfg.tau is not None:
        taus = [float(cfg.tau)]
    else:
        taus = [m * math.sqrt(n) / eps for m in (0.1, 0.3, 1.0, 3.0, 10.0)]
    dist = audit.SparseBernoulli(n=n, eps=eps, d=d)
    flip = flip_bias_for(eps)
    params = {
        "n": n,
        "eps": eps,
        "d": d,
        "density": dist.density,
        "trials": trials,
        "taus": taus,
        "seed": cfg.seed,
    }
    # One batch of planted and all-zero runs, reused across the tau sweep.
    # The report count is Bin(s, keep) + Bin(n-s, 1-keep) given the input
    # sum s, which matches the bit-by-bit protocol exactly in distribution.
    rng = derive_rng(cfg.seed, 0)
    s = rng.binomial(n, dist.density, size=trials)
    k_planted = rng.binomial(s, flip.keep_prob) + rng.binomial(n - s, 1.0 - flip.keep_prob)
    est_planted = local_model.rr_debias(k_planted.astype(float), n, flip)
    est_zero = local_model.rr_estimate_batch(np.zeros(n, dtype=np.uint8), eps, trials, rng)
    rows: List[Row] = []
    for idx, tau in enumerate(taus):
        thr = tau / 2.0
        err_i = float(np.mean((s >= tau) & (est_planted <= thr)))
        err_ii = float(np.mean(est_zero > thr))
        rows.append((idx, "tau", tau))
        rows.append((idx, "error_case_i", err_i))
        rows.append((idx, "error_case_ii", err_ii))
        rows.append((idx, "max_error", max(err_i, err_ii)))
        rows.append((idx, "qualifying_rate", float(np.mean(s >= tau))))
    return params, rows


# ---------------------------------------------------------------------------
# Structural checks: compiler, topology counting, factorization
# ---------------------------------------------------------------------------


def _compiler_fixtures():
    return [
        fixtures.RelayProtocol(keep_prob=0.8),
        fixtures.NoisyParityProtocol(flip_bias_for(1.0)),
        fixtures.SharedModularSumProtocol(modulus=3),
    ]


def _messages_preserved(protocol, topology) -> bool:
    """Check record-by-record conservation on one deterministic run."""
    spaces = [protocol.tape_space(i) for i in range(protocol.n)]
    tapes = [space[0][0] for space in spaces]
    e = distributed.run_protocol_with_tapes(protocol, topology, [1] * protocol.n, tapes)
    compiled = distributed.compile_to_local(protocol, topology)
    _, view = local_model.run_interactive_with_tapes(
        compiled.parties, compiled.curator, [1] * protocol.n, compiled.rounds, tapes
    )
    original = sorted(e.transcript)
    up = []  # party -> curator copies, from the answers
    for rnd, roundmsgs in enumerate(view.answers[:-1], start=1):
        for sender, answer in enumerate(roundmsgs):
            for receiver, symbol in answer:
                up.append(distributed.Message(rnd, sender, receiver, symbol))
    down = []  # curator -> party copies, from the queries, shifted one round
    for rnd, roundq in enumerate(view.queries):
        for receiver, query in enumerate(roundq):
            for sender, symbol in query:
                down.append(distributed.Message(rnd, sender, receiver, symbol))
    tag, _ = view.answers[-1][protocol.output_party]
    return sorted(up) == original and sorted(down) == original and tag == "output"


def _compile_to_local(cfg: ExperimentConfig):
    params = {"seed": cfg.seed}
    rows: List[Row] = []
    for idx, protocol in enumerate(_compiler_fixtures()):
        topology = fixtures.fixture_topology(protocol)
        compiled = distributed.compile_to_local(protocol, topology)
        worst = 0.0
        for bits in np.ndindex(*((2,) * protocol.n)):
            dist_orig = distributed.output_distribution(
                protocol, topology, np.array(bits, dtype=np.uint8)
            )
            dist_comp = compiled.output_distribution(np.array(bits, dtype=np.uint8))
            for key in set(dist_orig) | set(dist_comp):
                worst = max(worst, abs(dist_orig.get(key, 0.0) - dist_comp.get(key, 0.0)))
        rows.append((idx, "max_output_dist_diff", worst))
        rows.append((idx, "rounds_in", protocol.rounds))
        rows.append((idx, "rounds_out", compiled.rounds))
        rows.append((idx, "messages_preserved", float(_messages_preserved(protocol, topology))))
    return params, rows


def _lonely_parties(cfg: ExperimentConfig):
    n = _pos_int("n", cfg.n, 64)
    trials = _pos_int("trials", cfg.trials, 100)
    t_values = [cfg.t] if cfg.t is not None else [1, 3, 7]
    params = {"n": n, "t_values": t_values, "trials": trials, "seed": cfg.seed}
    rows: List[Row] = []
    idx = 0
    for t in t_values:
        cap = n * (t + 1) // 4
        for k in range(trials):
            rng = derive_rng(cfg.seed, t, k)
            n_channels = int(rng.integers(0, cap + 1))
            topo = distributed.random_topology(n, n_channels, rng)
            lonely = len(distributed.classify(topo, t).lonely)
            rows.append((idx, "t", t))
            rows.append((idx, "channels", n_channels))
            rows.append((idx, "lonely", lonely))
            rows.append((idx, "meets_half", float(lonely >= n // 2)))
            idx += 1
    return params, rows


def _factorization_fixtures():
    return [
        fixtures.RelayProtocol(keep_prob=0.8),
        fixtures.NoisyParityProtocol(flip_bias_for(1.0)),
        fixtures.ChainProtocol(flip_bias_for(0.5)),
    ]


def _transcript_factorization(cfg: ExperimentConfig):
    params = {"seed": cfg.seed}
    rows: List[Row] = []
    for idx, protocol in enumerate(_factorization_fixtures()):
        topology = fixtures.fixture_topology(protocol)
        worst = 0.0
        checked = 0
        for bits in np.ndindex(*((2,) * protocol.n)):
            x = np.array(bits, dtype=np.uint8)
            for key, prob in distributed.enumerate_executions(protocol, topology, x).items():
                product = 1.0
                for i in range(protocol.n):
                    product *= distributed.consistent_probability(protocol, i, int(x[i]), key)
                worst = max(worst, abs(product - prob))
                checked += 1
        rows.append((idx, "max_abs_diff", worst))
        rows.append((idx, "transcripts_checked", checked))
    return params, rows


def _message_accounting(cfg: ExperimentConfig):
    seed = cfg.seed
    params = {"seed": seed}
    rows: List[Row] = []

    n_rr = 100
    e = distributed.randomized_response_distributed(
        _half_ones(n_rr), 1.0, derive_rng(seed, 0), record=True
    )
    rows.append((0, "rr_messages", distributed.message_count(e)))
    rows.append((0, "rr_expected", 2 * (n_rr - 1)))
    rows.append((0, "rr_rounds", distributed.round_count(e)))

    n_wm, t, alpha_exp = 256, 7, 0.75
    _, e = distributed.windowed_min_protocol(
        _half_ones(n_wm), 1.0, 0.01, t, alpha_exp, derive_rng(seed, 1), record=True
    )
    _, interval = distributed.windowed_min_sizes(n_wm, alpha_exp)
    expected = (t + 1) * (n_wm - 1) + t * (n_wm // interval) + (n_wm - 1)
    rows.append((1, "windowed_min_messages", distributed.message_count(e)))
    rows.append((1, "windowed_min_expected", expected))
    rows.append((1, "windowed_min_rounds", distributed.round_count(e)))

    n_g = 64
    _, e = distributed.gaussian_aggregator_sum(_half_ones(n_g), 1.0, derive_rng(seed, 2))
    rows.append((2, "gaussian_messages", distributed.message_count(e)))
    rows.append((2, "gaussian_expected", 2 * (n_g - 1)))
    rows.append((2, "gaussian_rounds", distributed.round_count(e)))
    return params, rows


def _rr_distributed(cfg: ExperimentConfig):
    n = _pos_int("n", cfg.n, 16)
    eps = _pos_float("eps", cfg.eps, 1.0)
    trials = _pos_int("trials", cfg.trials, 20_000)
    x = _half_ones(n)
    params = {"n": n, "eps": eps, "trials": trials, "seed": cfg.seed}
    rng_d = derive_rng(cfg.seed, 0)
    rng_l = derive_rng(cfg.seed, 1)
    dist_counts: Dict[float, int] = {}
    local_counts: Dict[float, int] = {}
    for _ in range(trials):
        e = distributed.randomized_response_distributed(x, eps, rng_d, record=False)
        dist_counts[e.output] = dist_counts.get(e.output, 0) + 1
        est, _ = local_model.randomized_response_sum(x, eps, rng_l)
        local_counts[est] = local_counts.get(est, 0) + 1
    support = sorted(set(dist_counts) | set(local_counts))
    table = np.array(
        [
            [dist_counts.get(v, 0) for v in support],
            [local_counts.get(v, 0) for v in support],
        ]
    )
    keep = table.sum(axis=0) > 0
    chi2, pvalue, _, _ = scipy_stats.chi2_contingency(table[:, keep])
    rows: List[Row] = [
        (0, "chi2_stat", float(chi2)),
        (0, "chi2_pvalue", float(pvalue)),
        (0, "reject_at_0.001", float(pvalue < 0.001)),
    ]
    e = distributed.randomized_response_distributed(x, eps, derive_rng(cfg.seed, 2))
    rows.append((0, "messages", distributed.message_count(e)))
    rows.append((0, "expected_messages", 2 * (n - 1)))
    e1 = distributed.randomized_response_distributed([1], eps, derive_rng(cfg.seed, 3))
    rows.append((0, "n1_messages", distributed.message_count(e1)))
    return params, rows


# ---------------------------------------------------------------------------
# Windowed minimum
# ---------------------------------------------------------------------------


def _dist_alpha(cfg: ExperimentConfig):
    n = _pos_int("n", cfg.n, 4096)
    eps = _pos_float("eps", cfg.eps, 1.0)
    delta = _unit_float("delta", cfg.delta, 0.01)
    alpha_exp = _unit_float("alpha_exp", cfg.alpha_exp, 0.75)
    t = _pos_int("t", cfg.t, 7)
    if 2 * t >= n:
        raise ValueError(f"t: need 2t < n, got t={t}, n={n}")
    trials = _pos_int("trials", cfg.trials, 1000)
    noise_trials = max(trials // 5, 50)
    window, interval = distributed.windowed_min_sizes(n, alpha_exp)
    r_base = distributed.noise_base_variance(eps, delta)
    error_bound = interval * (1.0 + 6.0 * math.sqrt(2.0 * r_base) / interval)
    params = {
        "n": n,
        "eps": eps,
        "delta": delta,
        "t": t,
        "alpha_exp": alpha_exp,
        "window": window,
        "interval": interval,
        "trials": trials,
        "noise_trials": noise_trials,
        "error_bound": error_bound,
        "seed": cfg.seed,
    }
    rows: List[Row] = []

    matches = 0
    for k in range(trials):
        rng = derive_rng(cfg.seed, 0, k)
        x = (rng.random(n) < 0.5).astype(np.uint8)
        est, _ = distributed.windowed_min_protocol(
            x, eps, delta, t, alpha_exp, rng, zero_noise=True, record=False
        )
        if est == min_window_weight_gridded(x, window, interval):
            matches += 1
    rows.append((0, "zero_noise_matches", matches))
    rows.append((0, "zero_noise_trials", trials))

    # exhaustive grid-vs-full comparison on every 16-bit input
    gn, gw, gi = 16, 4, 2
    codes = np.arange(1 << gn, dtype=np.uint32)
    bits = ((codes[:, None] >> np.arange(gn)[None, :]) & 1).astype(np.int64)
    csum = np.cumsum(bits, axis=1)
    wsums = csum[:, gw - 1 :].copy()
    wsums[:, 1:] -= csum[:, : gn - gw]
    full = wsums.min(axis=1)
    grid = wsums[:, ::gi].min(axis=1)
    violations = int(np.count_nonzero((grid < full) | (grid > full + (gi - 1))))
    rows.append((1, "grid_bound_violations", violations))
    rows.append((1, "grid_inputs_checked", 1 << gn))

    within = 0
    for k in range(noise_trials):
        rng = derive_rng(cfg.seed, 1, k)
        x = (rng.random(n) < 0.5).astype(np.uint8)
        est, _ = distributed.windowed_min_protocol(
            x, eps, delta, t, alpha_exp, rng, record=False
        )
        if abs(est - min_window_weight(x, window)) <= error_bound:
            within += 1
    rows.append((2, "noise_within_bound", within))
    rows.append((2, "noise_trials", noise_trials))
    rows.append((2, "within_rate", within / noise_trials))
    return params, rows


# ---------------------------------------------------------------------------
# Symmetry and privacy-definition checks
# ---------------------------------------------------------------------------


def _symmetry(cfg: ExperimentConfig):
    eps = _pos_float("eps", cfg.eps, 1.0)
    n_big = _pos_int("n", cfg.n, 100)
    trials = _pos_int("trials", cfg.trials, 100_000)
    flip = flip_bias_for(eps)
    params = {"eps": eps, "n": n_big, "trials": trials, "seed": cfg.seed}
    rows: List[Row] = []

    # exact part: count distribution identical under every permutation (n=4)
    import itertools as _it

    base = (1, 1, 0, 0)
    ref = local_model.rr_count_distribution(np.array(base, dtype=np.uint8), flip)
    worst = 0.0
    for perm in _it.permutations(range(4)):
        permuted = np.array([base[j] for j in perm], dtype=np.uint8)
        dist = local_model.rr_count_distribution(permuted, flip)
        for kk in ref:
            worst = max(worst, abs(ref[kk] - dist[kk]))
    rows.append((0, "max_perm_distance_n4", worst))

    # sampled part: chi-squared homogeneity of estimates on x vs pi(x)
    rng = derive_rng(cfg.seed, 0)
    x = np.zeros(n_big, dtype=np.uint8)
    x[: n_big // 2] = 1
    pi_x = x[rng.permutation(n_big)]
    est_x = np.empty(trials)
    est_p = np.empty(trials)
    for k in range(trials):
        est_x[k], _ = local_model.randomized_response_sum(x, eps, rng)
        est_p[k], _ = local_model.randomized_response_sum(pi_x, eps, rng)
    lo = min(est_x.min(), est_p.min())
    hi = max(est_x.max(), est_p.max())
    edges = np.linspace(lo, hi + 1e-9, 21)
    hx, _ = np.histogram(est_x, bins=edges)
    hp, _ = np.histogram(est_p, bins=edges)
    keep = (hx + hp) > 0
    chi2, pvalue, _, _ = scipy_stats.chi2_contingency(np.array([hx[keep], hp[keep]]))
    rows.append((1, "chi2_stat", float(chi2)))
    rows.append((1, "chi2_pvalue", float(pvalue)))
    rows.append((1, "reject_at_0.001", float(pvalue < 0.001)))
    return params, rows


def _definition_equivalence(cfg: ExperimentConfig):
    params = {"seed": cfg.seed}
    cases = [
        ("single_flip", [local_model.flip_sanitizer(flip_bias_for(1.0))]),
        ("two_flips", [local_model.flip_sanitizer(flip_bias_for(1.0))] * 2),
        (
            "mixed_eps",
            [
                local_model.flip_sanitizer(flip_bias_for(0.3)),
                local_model.flip_sanitizer(flip_bias_for(1.0)),
                local_model.constant_sanitizer(0),
            ],
        ),
        (
            "four_parties",
            [
                local_model.flip_sanitizer(flip_bias_for(0.5)),
                local_model.flip_sanitizer(flip_bias_for(1.0)),
                local_model.flip_sanitizer(flip_bias_for(0.1)),
                local_model.constant_sanitizer(1),
            ],
        ),
    ]
    rows: List[Row] = []
    for idx, (name, sanitizers) in enumerate(cases):
        report = audit.definition_equivalence_check(sanitizers)
        rows.append((idx, "collective", report.collective))
        rows.append((idx, "individual", report.individual))
        rows.append((idx, "passed", float(report.passed)))
    params["cases"] = [name for name, _ in cases]
    return params, rows


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

EXPERIMENTS: Dict[str, ExperimentDef] = {
    e.name: e
    for e in [
        ExperimentDef(
            "rr-sum-error",
            "per-trial signed and absolute error of the randomized-response sum",
            "local-model sum accuracy at the sqrt(n)/eps scale",
            _rr_sum_error,
        ),
        ExperimentDef(
            "rr-exact-epsilon",
            "exact privacy loss of the bit flip vs the closed form ln(1+eps)",
            "tight privacy of randomized response",
            _rr_exact_epsilon,
        ),
        ExperimentDef(
            "laplace-tails",
            "empirical tail rates of the sensitivity-calibrated Laplace mechanism",
            "e^-k tails of Laplace noise at scale 1/eps",
            _laplace_tails,
        ),
        ExperimentDef(
            "v-bounds",
            "hard range and mean bounds on per-party view log ratios (batched)",
            "per-party likelihood-ratio bounds under planted sparse inputs",
            _v_bounds,
        ),
        ExperimentDef(
            "hoeffding-tail",
            "tail rate of the total view ratio vs its concentration bound (batched)",
            "Hoeffding tail of the planted-vs-zero view ratio",
            _hoeffding_tail,
        ),
        ExperimentDef(
            "chernoff-tail",
            "lower tail of the planted input sum vs its Chernoff bound (batched)",
            "concentration of the planted input weight",
            _chernoff_tail,
        ),
        ExperimentDef(
            "phase-transition",
            "distinguisher error of the randomized-response gap protocol across tau",
            "sqrt(n)/eps error phase transition for gap threshold",
            _phase_transition,
        ),
        ExperimentDef(
            "compile-to-local",
            "output-distribution equality and round count of the curator compiler",
            "rerouting a point-to-point protocol through a curator, one extra round",
            _compile_to_local,
        ),
        ExperimentDef(
            "lonely-parties",
            "lonely-party counts on random topologies under the message cap",
            "at most n(t+1)/4 channels forces at least n/2 lonely parties",
            _lonely_parties,
        ),
        ExperimentDef(
            "transcript-factorization",
            "per-party product form of transcript probabilities vs enumeration",
            "independence factorization of transcript probabilities",
            _transcript_factorization,
        ),
        ExperimentDef(
            "dist-alpha",
            "secret-shared windowed-minimum: zero-noise exactness, grid bound, noisy error",
            "3-round windowed-minimum protocol accuracy",
            _dist_alpha,
        ),
        ExperimentDef(
            "gaussian-aggregator",
            "per-trial error of Gaussian submissions to an ideal aggregator",
            "computational-model sum protocol with log(n)/eps error",
            _gaussian_aggregator,
        ),
        ExperimentDef(
            "symmetry",
            "permutation invariance of the randomized-response output distribution",
            "symmetric output distributions of the sum protocols",
            _symmetry,
        ),
        ExperimentDef(
            "definition-equivalence",
            "collective vs per-party privacy maxima on exhaustive fixtures",
            "equivalence of the two local-model privacy definitions",
            _definition_equivalence,
        ),
        ExperimentDef(
            "message-accounting",
            "message and round counts of the built-in protocols vs closed forms",
            "message-complexity accounting of the distributed protocols",
            _message_accounting,
        ),
        ExperimentDef(
            "rr-distributed",
            "distributed randomized response vs its local-model twin (chi-squared)",
            "star-topology randomized response with 2(n-1) messages",
            _rr_distributed,
        ),
    ]
}


def run_rows(cfg: ExperimentConfig) -> Tuple[Dict[str, Any], List[Row]]:
    """Resolve and run an experiment, returning (params, rows)."""
    if cfg.experiment not in EXPERIMENTS:
        known = ", ".join(sorted(EXPERIMENTS))
        raise KeyError(f"unknown experiment {cfg.experiment!r}; known: {known}")
    return EXPERIMENTS[cfg.experiment].runner(cfg)
