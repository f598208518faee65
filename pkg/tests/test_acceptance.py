"""Acceptance gate.

Each test checks one criterion at its stated tolerance and prints a single
``[PASS]`` / ``[FAIL]`` line (visible with ``pytest -v`` as well as ``-s``).
"""

import filecmp
import os
import time
from decimal import Decimal

import numpy as np
import pytest

import oracle
from conftest import random_dict_pmf
from jigsaw.cli import main
from jigsaw.complexity import ComplexityParams, measure_scaling, operation_count
from jigsaw.metrics import MaxCutInstance, arg, fidelity, maxcut_expectation, tvd
from jigsaw.noise_sim import ghz, random_planted, spatial_profile
from jigsaw.pipeline import run_pipeline
from jigsaw.pmf import Marginal, SparsePmf, hellinger, marginalize
from jigsaw.reconstruction import (ODDS, PROBABILITY, ReconstructionConfig, bayesian_reconstruction,
                                   bayesian_update, reconstruction_round)
from jigsaw.subsetting import (estimate_trials, multilayer_plan, random_plan, sliding_window_plan,
                               split_trials)
from test_subsetting import coupon_coverage


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"
    return emit


def _info(capsys, label, detail):
    with capsys.disabled():
        print(f"\n[INFO] {label}: {detail}")


# 1 ---------------------------------------------------------------------------

def _max_err(pmf, want):
    keys = set(pmf) | set(want)
    return max(abs(pmf.prob(k) - want.get(k, 0.0)) for k in keys)


def test_c1_algorithm_fidelity(report):
    t0 = time.perf_counter()
    odds = ReconstructionConfig(weighting=ODDS)
    uniform = SparsePmf({"00": 0.25, "01": 0.25, "10": 0.25, "11": 0.25})
    skew = Marginal((0,), SparsePmf({"0": 0.8, "1": 0.2}))
    corr = SparsePmf({"00": 0.4, "01": 0.1, "10": 0.1, "11": 0.4})
    # hand traces: group weights 0.5*4 vs 0.5*0.25 over 4.25, then averaged with the prior
    hand = [
        (bayesian_update(SparsePmf({"11": 1.0}), Marginal((1, 0), SparsePmf({"11": 1.0})), odds),
         {"11": 1.0}),
        (bayesian_update(uniform, skew, odds),
         {"00": 2 / 4.25, "10": 2 / 4.25, "01": 0.125 / 4.25, "11": 0.125 / 4.25}),
        (bayesian_update(corr, Marginal((0,), SparsePmf({"0": 0.5, "1": 0.5})), odds),
         corr.to_dict()),
        (reconstruction_round(uniform, [skew], odds),
         {"00": (0.25 + 2 / 4.25) / 2, "10": (0.25 + 2 / 4.25) / 2,
          "01": (0.25 + 0.125 / 4.25) / 2, "11": (0.25 + 0.125 / 4.25) / 2}),
    ]
    hand_err = max(_max_err(p, want) for p, want in hand)

    rng = np.random.default_rng(2024)
    engine_err = {ODDS: 0.0, PROBABILITY: 0.0}
    for _ in range(200):
        width = int(rng.integers(2, 4))
        p = random_dict_pmf(rng, width)
        truth = random_dict_pmf(rng, width, sparse=False)
        ms = []
        for _ in range(int(rng.integers(1, 4))):
            qs = tuple(int(q) for q in rng.permutation(width)[:int(rng.integers(1, width + 1))])
            ms.append((qs, oracle.marginalize(truth, qs)))
        for w in engine_err:
            want, _ = oracle.reconstruct(p, ms, w)
            got = bayesian_reconstruction(SparsePmf(p), [Marginal(q, SparsePmf(m)) for q, m in ms],
                                          ReconstructionConfig(weighting=w))
            engine_err[w] = max(engine_err[w], _max_err(got, want))
    elapsed = time.perf_counter() - t0
    ok = hand_err <= 1e-9 and max(engine_err.values()) <= 1e-9 and elapsed < 1.0
    report("C1 algorithm fidelity", ok,
           f"hand-trace err {hand_err:.1e}, oracle err odds {engine_err[ODDS]:.1e} / "
           f"probability {engine_err[PROBABILITY]:.1e} on 200 instances, {elapsed:.2f}s (<1s)")


# 2 ---------------------------------------------------------------------------

def _fixed_point_run(weighting, n=100, seed=77):
    rng = np.random.default_rng(seed)
    cfg = ReconstructionConfig(weighting=weighting)
    worst_err, worst_rounds = 0.0, 0
    for _ in range(n):
        width = int(rng.integers(2, 11))
        p = SparsePmf(random_dict_pmf(rng, width, max_entries=400))
        subsets = [tuple(sorted({i, (i + 1) % width})) for i in range(width)]
        subsets += [tuple(int(q) for q in rng.permutation(width)[:int(rng.integers(1, width + 1))])
                    for _ in range(3)]
        trace = []
        out = bayesian_reconstruction(p, [marginalize(p, qs) for qs in subsets], cfg, trace)
        worst_err = max(worst_err, float(np.max(np.abs(out.probs - p.probs))))
        worst_rounds = max(worst_rounds, len(trace))
    return worst_err, worst_rounds


def test_c2_fixed_point(report, capsys):
    err, rounds = _fixed_point_run(PROBABILITY)
    odds_err, odds_rounds = _fixed_point_run(ODDS)
    _info(capsys, "C2 odds weighting (not the default)",
          f"max deviation {odds_err:.3f} after up to {odds_rounds} rounds; consistent marginals "
          "are not a fixed point under odds weighting")
    report("C2 fixed point", err <= 1e-9 and rounds <= 2,
           f"default weighting: max deviation {err:.1e} (<=1e-9), max rounds {rounds} (<=2), 100 PMFs up to width 10")


# 3 ---------------------------------------------------------------------------

def test_c3_order_invariance(report):
    rng = np.random.default_rng(3)
    truth = random_dict_pmf(rng, 8, sparse=False)
    p = SparsePmf(random_dict_pmf(rng, 8, max_entries=200))
    ms = [marginalize(SparsePmf(truth), (i, (i + 1) % 8)) for i in range(8)]
    ms += [marginalize(SparsePmf(truth), (i, (i + 3) % 8, (i + 5) % 8)) for i in range(4)]
    ref = bayesian_reconstruction(p, ms)
    ref_round = reconstruction_round(p, ms)
    worst = 0.0
    for _ in range(100):
        order = rng.permutation(len(ms))
        shuffled = [ms[i] for i in order]
        worst = max(worst, float(np.max(np.abs(bayesian_reconstruction(p, shuffled).probs - ref.probs))),
                    float(np.max(np.abs(reconstruction_round(p, shuffled).probs - ref_round.probs))))
    report("C3 order invariance", worst <= 1e-12, f"max change {worst:.1e} over 100 shuffles (<=1e-12)")


# 4 ---------------------------------------------------------------------------

def _gm(x):
    return float(np.exp(np.mean(np.log(x))))


def test_c4_fidelity_improvement(report):
    t0 = time.perf_counter()
    lines, ok = [], True
    for name in ("GHZ-8", "planted-10"):
        single, multi, wins = [], [], 0
        for seed in range(100):
            profile = spatial_profile(27, 0.027, 0.222, seed=seed)
            spec = ghz(8) if name == "GHZ-8" else random_planted(10, 0.5, 16, seed=seed)
            plan = sliding_window_plan(spec.width, 2)
            res = run_pipeline(spec, profile, plan, split_trials(65536, plan), seed=seed)
            plan_m = multilayer_plan(spec.width, 2, 5)
            res_m = run_pipeline(spec, profile, plan_m, split_trials(65536, plan_m), seed=seed)
            single.append(res.pst_ratio)
            multi.append(res_m.pst_ratio)
            wins += res.report.pst >= res.baseline.pst
        g1, gm = _gm(single), _gm(multi)
        ok &= wins >= 90 and g1 >= 1.2 and gm >= g1
        lines.append(f"{name} wins {wins}/100, GM ratio {g1:.3f}, JigSaw-M {gm:.3f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    report("C4 fidelity improvement", ok, "; ".join(lines) + f"; {elapsed:.0f}s (<300s)")


# 5 ---------------------------------------------------------------------------

SATURATION_COUNTS = (8, 12, 24, 36, 48, 66)
SATURATION_REPS = 200


def test_c5_saturation(report):
    t0 = time.perf_counter()
    gains = []
    for count in SATURATION_COUNTS:
        ratios = []
        for rep in range(SATURATION_REPS):
            seed = 1000 + rep
            profile = spatial_profile(27, 0.027, 0.222, seed=seed)
            spec = random_planted(12, 0.5, 16, seed=seed)
            plan = random_plan(12, 2, count, seed=seed * 100 + count)
            res = run_pipeline(spec, profile, plan, split_trials(65536, plan), seed=seed)
            ratios.append(res.pst_ratio)
        gains.append(float(np.mean(ratios)))
    elapsed = time.perf_counter() - t0
    rel = gains[-1] / gains[SATURATION_COUNTS.index(12)] - 1
    non_decreasing = all(b >= a for a, b in zip(gains, gains[1:]))
    ok = non_decreasing and rel < 0.05 and elapsed < 600
    curve = ", ".join(f"{n}:{g:.3f}" for n, g in zip(SATURATION_COUNTS, gains))
    report("C5 saturation", ok,
           f"mean PST ratio {curve}; gain(66)/gain(12)-1 = {rel:.2%} (<5%), "
           f"non-decreasing {non_decreasing}, {elapsed:.0f}s (<600s)")


# 6 ---------------------------------------------------------------------------

def test_c6_trial_estimator(report):
    t = estimate_trials(2, 0.9999)
    cover = coupon_coverage(4, t, 10_000, seed=6)
    report("C6 trial estimator", abs(t - 148) <= 2 and cover >= 0.999,
           f"estimate {t} (148+-2), Monte Carlo coverage {cover:.4f} (>=0.999) over 10,000 repetitions")


# 7 ---------------------------------------------------------------------------

# (n, eps, T, JigSaw OPs, JigSaw-M OPs) in millions, as printed
TABLE_OPS = [
    (100, 0.05, 32 * 1024, "0.66", "2.64"),
    (100, 0.05, 1024 * 1024, "21.0", "83.9"),
    (100, 1.0, 32 * 1024, "13.1", "52.4"),
    (100, 1.0, 1024 * 1024, "419", "1677"),
    (500, 0.05, 32 * 1024, "3.28", "13.12"),
    (500, 0.05, 1024 * 1024, "105", "419"),
    (500, 1.0, 32 * 1024, "65.5", "262"),
    (500, 1.0, 1024 * 1024, "2097", "8388"),
]


def _as_printed(ops, text):
    digits = Decimal(text)
    return Decimal(ops / 1e6).quantize(digits) == digits


def test_c7_complexity_model(report):
    mismatches = []
    for n, eps, T, j_text, m_text in TABLE_OPS:
        j = operation_count(ComplexityParams(n=n, N=n, T=T, epsilon=eps, delta=eps, s=5))
        m = operation_count(ComplexityParams(n=n, N=n, T=T, epsilon=eps, delta=eps, s=5, layers=4))
        if not _as_printed(j, j_text) or m != 4 * j or abs(m / 1e6 / float(m_text) - 1) > 0.01:
            mismatches.append((n, eps, T, j, m))

    engine_cfg = ReconstructionConfig(hellinger_tolerance=1e-300, max_rounds=10)
    rows = measure_scaling([2 ** 14, 2 ** 15, 2 ** 16, 2 ** 17], (20,), width=40, repeats=7,
                           engine=lambda p, ms: bayesian_reconstruction(p, ms, engine_cfg))
    ratios = [b.seconds / a.seconds for a, b in zip(rows, rows[1:])]
    linear = all(1.7 <= r <= 2.3 for r in ratios)
    report("C7 complexity model", not mismatches and linear,
           f"OPs table rows matched {8 - len(mismatches)}/8 (JigSaw-M = 4x exactly); "
           f"time ratios per doubling {', '.join(f'{r:.2f}' for r in ratios)} (within [1.7, 2.3])")


# 8 ---------------------------------------------------------------------------

def test_c8_metric_suite(report):
    rng = np.random.default_rng(8)
    bad = 0
    for _ in range(10_000):
        width = int(rng.integers(1, 5))
        p, q, r = (SparsePmf(random_dict_pmf(rng, width)) for _ in range(3))
        for dist in (tvd, hellinger):
            d = dist(p, q)
            if not (0 <= d <= 1 and abs(d - dist(q, p)) <= 1e-15
                    and d <= dist(p, r) + dist(r, q) + 1e-12):
                bad += 1
        f_pq, f_qp = fidelity(p, q)[1], fidelity(q, p)[1]
        if not (0 <= f_pq <= 1 and abs(f_pq - f_qp) <= 1e-15):
            bad += 1
    triangle = MaxCutInstance.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    uniform = SparsePmf({format(i, "03b"): 0.125 for i in range(8)})
    expectation = maxcut_expectation(uniform, triangle)
    qaoa_like = SparsePmf({"011": 0.3, "101": 0.3, "000": 0.2, "110": 0.2})
    arg_same = arg(qaoa_like, qaoa_like, triangle)
    report("C8 metric suite", bad == 0 and arg_same == 0.0 and expectation == 1.5,
           f"{bad} property violations in 10,000 triples; ARG(identical) = {arg_same}; "
           f"uniform triangle MaxCut = {expectation}")


# 9 ---------------------------------------------------------------------------

def _same_tree(a, b):
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.funny_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    return not mismatch and not errors and all(
        _same_tree(os.path.join(a, d), os.path.join(b, d)) for d in cmp.common_dirs)


def test_c9_determinism(report, tmp_path, monkeypatch):
    args = ["pipeline", "--workload", "planted", "--width", "8", "--trials", "20000", "--seed", "9"]
    runs = []
    for i, threads in enumerate(("1", "1", "3")):
        monkeypatch.setenv("JIGSAW_THREADS", threads)
        out = tmp_path / f"run{i}"
        assert main(args + ["--out", str(out)]) == 0
        runs.append(out)
    n_files = sum(len(files) for _, _, files in os.walk(runs[0]))
    same = _same_tree(runs[0], runs[1])
    threaded = _same_tree(runs[0], runs[2])
    report("C9 determinism", same and threaded,
           f"repeated run byte-identical: {same}; 3-thread run identical: {threaded}; {n_files} files")
