"""Acceptance suite: each criterion at its stated tolerance and time budget.

A summary line per criterion is printed at the end of the run.
"""
import time

import numpy as np
import pytest

from domstab import (L1, L2, LINF, FiniteScenario, ProbeConfig, derive_rng_stream, dense_blocker_scan,
                     emit_report, estimate_machine_epsilon, is_dense_at_resolution, oracle_dense,
                     oracle_stability_table, parse_scenario, reverify_witness, run_scenario, sample_ball,
                     test_accumulation_point, test_stability_via_series, test_stable_point)
from domstab.catalog import (alternating_lattice, interior_probes, open_box, open_disk, random_finite_cases,
                             unit_circle_probes)
from domstab.stability import MEMBERSHIP, STABLE, UNSTABLE, agreement_category, exit_margin
from domstab.precision import representability_floor


def timed(fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t


# 1 ------------------------------------------------------------------------
def test_criterion_1_epsilon_calibration(criterion):
    t = time.perf_counter()
    halving = estimate_machine_epsilon(1.0, "halving")
    fast = estimate_machine_epsilon(1.0, "compounding")
    elapsed = time.perf_counter() - t
    e = halving.epsilon_prev
    ok = (1.0 + e > 1.0 and 1.0 + e / 2 == 1.0 and 1.0e-16 <= e <= 5.0e-16
          and 1.0 + fast.epsilon == 1.0 and 1.0 + fast.epsilon_prev > 1.0 and elapsed < 1e-3)
    criterion(1, "epsilon calibration", ok,
              f"epsilon_prev={e:.4g}, compounding variant stops after {fast.iterations} steps, {elapsed * 1e3:.3f} ms")
    assert ok


# 2 ------------------------------------------------------------------------
def test_criterion_2_alternating_lattice(criterion):
    t = time.perf_counter()
    c = alternating_lattice()
    S = c.ambient.support
    fs = FiniteScenario.from_classifier(c)
    counts = {}
    for mode, rho in (("strict", None), ("resolution", 0.005)):
        cfg = ProbeConfig(mode=mode, rho=rho)
        oracle = sum(st for st, _ in oracle_stability_table(fs, mode, rho))
        tester = sum(test_stable_point(c, p, cfg, probe_index=k).stable for k, p in enumerate(S))
        counts[mode] = (oracle, tester)
    dense = [oracle_dense(fs, k, 0.02) for k in range(2)]
    dense_sets = [is_dense_at_resolution(s, S, 0.02).dense for s in fs_sets(c)]
    elapsed = time.perf_counter() - t
    ok = all(v == (0, 0) for v in counts.values()) and all(dense) and all(dense_sets) and elapsed < 1.0
    criterion(2, "alternating lattice has no stable points", ok,
              f"(oracle, tester) stable counts {counts}, dense at 0.02 {dense}, {elapsed:.2f} s")
    assert ok


def fs_sets(c):
    from domstab import FiniteSet
    S = c.ambient.support
    return [FiniteSet(S[s.contains(S)]) for s in c.sets]


# finite suite shared by 3, 5 and 7 ----------------------------------------
@pytest.fixture(scope="module")
def finite_suite():
    cases = random_finite_cases(seed=0, count=50, max_points=500, max_dim=3)
    out = []
    t = time.perf_counter()
    for case in cases:
        c, m = case.classifier, case.metric
        fs = FiniteScenario.from_classifier(c, m, case.rho)
        per_mode = {}
        for mode in ("strict", "resolution"):
            cfg = ProbeConfig(mode=mode, rho=case.rho if mode == "resolution" else None)
            oracle = oracle_stability_table(fs, mode, case.rho)
            verdicts = [test_stable_point(c, p, cfg, m, probe_index=k) for k, p in enumerate(case.support)]
            per_mode[mode] = (cfg, oracle, verdicts)
        out.append((case, fs, per_mode))
    return out, time.perf_counter() - t


def test_criterion_3_dense_blocker_consistency(criterion, finite_suite):
    suite, build = finite_suite
    t = time.perf_counter()
    bad = checks = 0
    for case, fs, per_mode in suite:
        dense = {(k, r): oracle_dense(fs, k, r) for k in range(len(fs.labels)) for r in case.resolutions}
        for mode, (cfg, oracle, verdicts) in per_mode.items():
            for i, (v, (ost, ocert)) in enumerate(zip(verdicts, oracle)):
                for (k, r), d in dense.items():
                    if not d or fs.assignment[i] == k:
                        continue
                    checks += 1
                    bad += v.stable and v.certified_delta >= r
                    bad += ost and ocert >= r
            rep = dense_blocker_scan(case.classifier, case.support, case.resolutions, cfg, case.metric, verdicts)
            bad += len(rep.violations)
    elapsed = build + time.perf_counter() - t
    ok = len(suite) >= 50 and max(len(c.support) for c, _, _ in suite) <= 500 and bad == 0 and elapsed < 30
    criterion(3, "dense-blocker consistency", ok,
              f"{len(suite)} scenarios, {checks} certificate checks, {bad} violations, {elapsed:.1f} s")
    assert ok


# 4 ------------------------------------------------------------------------
def test_criterion_4_cross_check(criterion):
    c = open_box()
    P = interior_probes(1000, margin=0.05)
    cfg = ProbeConfig(samples_per_radius=64)
    t = time.perf_counter()
    agree = 0
    cert_ok = True
    D = c.sets[0]
    for k, p in enumerate(P):
        v = test_stable_point(c, p, cfg, probe_index=k)
        a = test_accumulation_point(D, p, cfg, probe_index=k, space=c.ambient)
        margin = exit_margin(D, p)
        cat = agreement_category(v, a, margin, representability_floor(p), cfg.lower_radius(p))
        agree += cat is not None and cat[0] == cat[1]
        if v.stable:
            cert_ok &= v.certified_delta <= margin
    elapsed = time.perf_counter() - t
    ok = agree == len(P) and cert_ok and elapsed < 10
    criterion(4, "stable-point vs accumulation-point agreement", ok,
              f"{agree}/{len(P)} agree, certificates within margin: {cert_ok}, {elapsed:.2f} s")
    assert ok


# 5 ------------------------------------------------------------------------
def test_criterion_5_series_agreement(criterion, finite_suite):
    c = open_box()
    P = interior_probes(1000, margin=0.05)
    cfg = ProbeConfig(samples_per_radius=64)
    t = time.perf_counter()
    cont = sum(test_stable_point(c, p, cfg, probe_index=k).outcome
               == test_stability_via_series(c, p, cfg=cfg, probe_index=k, eligible=True).outcome
               for k, p in enumerate(P))
    fin = fin_total = 0
    for case, _, per_mode in finite_suite[0]:
        for cfg_f, _, verdicts in per_mode.values():
            for k, (p, v) in enumerate(zip(case.support, verdicts)):
                w = test_stability_via_series(case.classifier, p, cfg=cfg_f, metric=case.metric, probe_index=k)
                fin += w.outcome == v.outcome
                fin_total += 1
    elapsed = time.perf_counter() - t
    ok = cont == len(P) and fin == fin_total and elapsed < 30
    criterion(5, "series tester agrees with ball tester", ok,
              f"continuum {cont}/{len(P)}, finite {fin}/{fin_total}, {elapsed:.1f} s")
    assert ok


# 6 ------------------------------------------------------------------------
def test_criterion_6_boundary_instability(criterion):
    c = open_disk()
    P = unit_circle_probes(200)
    cfg = ProbeConfig(samples_per_radius=64)
    t = time.perf_counter()
    verdicts = [test_stable_point(c, p, cfg, probe_index=k) for k, p in enumerate(P)]
    elapsed = time.perf_counter() - t
    good = sum(v.outcome == UNSTABLE and v.clause == MEMBERSHIP and reverify_witness(c, p, v)
               for p, v in zip(P, verdicts))
    ok = good == len(P) and elapsed < 5
    criterion(6, "unit circle is unstable", ok,
              f"{good}/{len(P)} Unstable(ii-membership) with re-verified witnesses, {elapsed:.2f} s")
    assert ok


# 7 ------------------------------------------------------------------------
def test_criterion_7_oracle_equivalence(criterion, finite_suite):
    mismatches = total = 0
    for case, _, per_mode in finite_suite[0]:
        for _, oracle, verdicts in per_mode.values():
            for (ost, ocert), v in zip(oracle, verdicts):
                total += 1
                mismatches += ost != v.stable or (v.stable and not v.certified_delta <= ocert)
    ok = mismatches == 0
    criterion(7, "tester matches oracle point for point", ok,
              f"{total} verdicts over {len(finite_suite[0])} scenarios in both modes, {mismatches} mismatches")
    assert ok


# 8 ------------------------------------------------------------------------
SCENARIOS = ["alternating_lattice.json", "run_lattice.json", "open_box.json", "open_disk.json",
             "external_model.json"]


def without_timestamp(text):
    return "\n".join(line for line in text.splitlines() if '"created"' not in line)


def test_criterion_8_determinism(criterion, demo_dir):
    same = 0
    for name in SCENARIOS:
        texts = []
        for workers in (1, 1, 4):
            sc = parse_scenario(demo_dir / name)
            try:
                texts.append(without_timestamp(emit_report(run_scenario(sc, workers=workers))))
            finally:
                sc.close()
        same += texts[0] == texts[1] == texts[2]
    ok = same == len(SCENARIOS)
    criterion(8, "byte-identical reports", ok, f"{same}/{len(SCENARIOS)} scenarios identical across reruns and workers")
    assert ok


# 9 ------------------------------------------------------------------------
@pytest.mark.parametrize("metric", [L1, L2, LINF], ids=lambda m: m.name)
def test_criterion_9_metric_axioms(criterion, metric):
    g = derive_rng_stream(9, 0, 0x7E1).generator()
    counts = {}
    for dim in range(1, 6):
        P, Q, R = (g.uniform(-1.0, 1.0, (100_000, dim)) for _ in range(3))
        dpq, dqp = metric.pairwise(P, Q), metric.pairwise(Q, P)
        dqr, dpr = metric.pairwise(Q, R), metric.pairwise(P, R)
        v = int(np.sum(dpq < 0) + np.sum((dpq == 0) & np.any(P != Q, axis=1)))
        v += int(np.sum(metric.pairwise(P, P) != 0))
        v += int(np.sum(dpq != dqp))
        v += int(np.sum(dpr > dpq + dqr))
        counts[dim] = v
    ok = sum(counts.values()) == 0
    criterion(9, "metric axioms and ball uniformity", ok, f"{metric.name} violations per dim {counts}")
    assert ok, f"{metric.name}: floating-point axiom violations per dimension {counts}"


def test_criterion_9_ball_uniformity(criterion):
    results = {}
    for metric in (L1, L2, LINF):
        for dim in range(1, 6):
            stream = derive_rng_stream(9, dim, 0xBA11)
            X = sample_ball(np.zeros(dim), 1.0, 10_000, metric, stream)
            r = metric.pairwise(X, np.zeros_like(X))
            mean = dim / (dim + 1)
            sd = np.sqrt(dim / (dim + 2) - mean ** 2)
            z = (r.mean() - mean) / (sd / np.sqrt(len(r)))
            results[(metric.name, dim)] = float(z)
    worst = max(abs(z) for z in results.values())
    ok = worst <= 3.0
    criterion(9, "metric axioms and ball uniformity", ok, f"mean-norm |z| <= {worst:.2f} over 15 (metric, dim) cases")
    assert ok
