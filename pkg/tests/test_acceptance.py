"""Acceptance criteria 1-10.

Each test prints one ``PASS``/``FAIL`` line (bypassing output capture) and then
asserts. Tolerances are the stated ones; none are loosened to make a run green.
"""

import math
import time

import numpy as np
import pytest

from dqc1chaos.dqc1 import Dqc1Config, dqc1_estimate, padding_correction
from dqc1chaos.ensembles import (
    RngStream,
    sample_coe,
    sample_cse,
    sample_cue,
    sample_direct_sum,
    sample_poisson,
)
from dqc1chaos.experiments import ExperimentConfig, run_experiment
from dqc1chaos.kickedtop import TopParams, floquet, interpolate_params
from dqc1chaos.linalg import UnitaryMatrix, direct_sum, eigenphases, mat_mul, trace
from dqc1chaos.spectral import (
    Decision,
    cumulative_t_statistics,
    deduplicate_doublets,
    form_factor,
    form_factor_series,
    hypothesis_test,
    t_statistics,
    wigner_surmise,
)

SEED = 7305


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {criterion:>2}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return emit


def test_c01_oracle_equivalence(report):
    start = time.perf_counter()
    base = RngStream(SEED, 1)
    worst = 0.0
    for k in range(20):
        dim = 1 + k * 31 // 19
        u = sample_cue(dim, base.child(k))
        power = UnitaryMatrix.identity(dim)
        spec = eigenphases(u)
        for n in range(1, 11):
            power = mat_mul(power, u)
            oracle = abs(trace(power)) ** 2
            got = form_factor(spec, n)
            worst = max(worst, abs(got - oracle) / max(oracle, 1e-300))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 10
    report(1, ok, f"max relative deviation {worst:.2e} (tol 1e-6), {elapsed:.1f}s (< 10s)")
    assert ok


def _mean_and_se(sampler, dim, samples, stream, dedup=False):
    base = RngStream(SEED, stream)
    vals = []
    for k in range(samples):
        spec = eigenphases(sampler(dim, base.child(k)))
        if dedup:
            spec = deduplicate_doublets(spec)
        series = form_factor_series(spec, 16)
        vals.append([series[1], series[4], series[16]])
    vals = np.array(vals)
    return vals.mean(0), vals.std(0, ddof=1) / math.sqrt(samples)


def test_c02_surmise_agreement(report):
    start = time.perf_counter()
    cases = [("CUE", 2, sample_cue, 256, False), ("COE", 1, sample_coe, 256, False),
             ("CSE", 4, sample_cse, 128, True)]
    ok, parts = True, []
    for i, (name, beta, sampler, dim, dedup) in enumerate(cases):
        mean, se = _mean_and_se(sampler, dim, 200, 20 + i, dedup)
        for n, m, s in zip((1, 4, 16), mean, se):
            target = wigner_surmise(beta, n, dim)
            z = (m - target) / s
            ok &= abs(z) <= 4
            parts.append(f"{name} n={n}: {m:.3f} vs {target:.3f} ({z:+.1f} se)")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    report(2, ok, "; ".join(parts) + f"; {elapsed:.0f}s")
    assert ok


def test_c03_ergodic_theorem(report, cue600_series):
    # shared fixture: 50 CUE(600) samples
    t1 = np.array([cumulative_t_statistics(s)[1] for s in cue600_series])
    mean30 = t1[:, 29].mean()
    tol = 3 * (1 / math.sqrt(30)) / math.sqrt(50)
    stds = {dn: t1[:, dn - 1].std(ddof=1) for dn in (10, 20, 30)}
    ok = abs(mean30 - 1) <= tol and all(stds[dn] <= 2 / math.sqrt(dn) for dn in stds)
    detail = f"<t1>(30) = {mean30:.4f} (|dev| <= {tol:.4f}); " + ", ".join(
        f"std(dn={dn}) {v:.3f} <= {2 / math.sqrt(dn):.3f}" for dn, v in stds.items())
    report(3, ok, detail)
    assert ok


def test_c04_discrimination(report, poisson600_series, cue600_series):
    verdicts = {
        "poisson": [hypothesis_test(s, 30, 3.0).decision for s in poisson600_series],
        "cue": [hypothesis_test(s, 30, 3.0).decision for s in cue600_series],
    }
    correct = verdicts["poisson"].count(Decision.REGULAR) + verdicts["cue"].count(Decision.CHAOTIC)
    cross = verdicts["poisson"].count(Decision.CHAOTIC) + verdicts["cue"].count(Decision.REGULAR)
    ok = correct >= 0.95 * 100 and cross == 0
    report(4, ok, f"{correct}/100 correct (>= 95), {cross} cross-category errors (== 0)")
    assert ok


def test_c05_subspace_detection(report):
    # no window size is fixed, so the default guard delta_n = N/10 is used
    base = RngStream(SEED, 5)
    ok, parts = True, []
    for k in (2, 3):
        dim = 200 * k
        dn = dim // 10
        hits = 0
        estimates = []
        for t in range(50):
            u = sample_direct_sum(2, 200, k, base.child(k).child(t))
            v = hypothesis_test(form_factor_series(eigenphases(u), dn), dn)
            estimates.append(v.k_estimate)
            hits += v.decision is Decision.CHAOTIC and v.k_estimate == k
        ok &= hits >= 45
        counts = {e: estimates.count(e) for e in sorted(set(estimates), key=str)}
        parts.append(f"k={k} (dn={dn}): {hits}/50 correct (>= 45), estimates {counts}")
    report(5, ok, "; ".join(parts))
    assert ok


def test_c06_kicked_top_regimes(report):
    grid = range(10, 251, 10)
    reg, cha = [], []
    for j in grid:
        t0, _ = t_statistics(form_factor_series(eigenphases(floquet(TopParams.regular(j))), 30), 30)
        _, t1 = t_statistics(form_factor_series(eigenphases(floquet(TopParams.chaotic(j))), 30), 30)
        reg.append(0.4 <= t0 <= 1.8)
        cha.append(0.4 <= t1 <= 1.8)
    n = len(grid)
    ok = sum(reg) >= 0.9 * n and sum(cha) >= 0.9 * n
    report(6, ok, f"regular t0 in band {sum(reg)}/{n}, chaotic t1 in band {sum(cha)}/{n} (>= 90%)")
    assert ok


def test_c07_transition(report):
    eps_grid = np.linspace(0, 1, 21)
    ok, parts = True, []
    for j in (50, 100, 200):
        t0 = []
        for eps in eps_grid:
            p = interpolate_params(TopParams.regular(j), TopParams.chaotic(j), float(eps))
            t0.append(t_statistics(form_factor_series(eigenphases(floquet(p)), 30), 30)[0])
        t0 = np.array(t0)
        lo, hi = t0[eps_grid <= 0.2 + 1e-12].mean(), t0[eps_grid >= 0.8 - 1e-12].mean()
        ok &= abs(t0[0] - 1) <= 5 / math.sqrt(30) and hi < lo
        if j == 200:
            ok &= t0[-1] < 0.1
        parts.append(f"j={j}: t0(0)={t0[0]:.3f} t0(1)={t0[-1]:.4f} mean[0,.2]={lo:.3f} mean[.8,1]={hi:.3f}")
    report(7, ok, "; ".join(parts))
    assert ok


def test_c08_dqc1_exactness(report):
    base = RngStream(SEED, 8)
    operators = {
        "cue16": sample_cue(16, base.child(0)),
        "poisson9": sample_poisson(9, base.child(1)),
        "coe12": sample_coe(12, base.child(2)),
        "top_j20": floquet(TopParams.chaotic(20)),
        "identity5": UnitaryMatrix.identity(5),
        "sum_cue3+3": direct_sum(sample_cue(3, base.child(3)), sample_cue(3, base.child(4))),
    }
    worst = 0.0
    for u in operators.values():
        phases = eigenphases(u).phases
        for n in (1, 2, 5):
            cfg = Dqc1Config(u.dim, n)
            cor = padding_correction(dqc1_estimate(u, cfg), u.dim, cfg.num_qubits)
            exact = np.exp(-1j * n * phases).sum() / u.dim
            worst = max(worst, abs(cor.value - exact))

    u = operators["cue16"]
    exact = dqc1_estimate(u, Dqc1Config(16, 3))
    reps = RngStream(SEED, 81)
    within, small, large = 0, [], []
    for r in range(200):
        e = dqc1_estimate(u, Dqc1Config(16, 3, 4096), reps.child(r))
        within += abs(e.re - exact.re) <= 4 * e.std_error_re and abs(e.im - exact.im) <= 4 * e.std_error_im
        large.append(e.re)
        small.append(dqc1_estimate(u, Dqc1Config(16, 3, 1024), reps.child(1000 + r)).re)
    ratio = np.std(large, ddof=1) / np.std(small, ddof=1)
    ok = worst <= 1e-8 and within >= 190 and abs(ratio / 0.5 - 1) <= 0.2
    report(8, ok, f"analytic max error {worst:.1e} (<= 1e-8); {within}/200 within 4 se (>= 190); "
                  f"spread ratio 4096/1024 shots {ratio:.3f} (0.5 +- 20%)")
    assert ok


@pytest.mark.slow
def test_c09_resource_scaling(report):
    start = time.perf_counter()
    table = run_experiment(ExperimentConfig("resource-scaling", {"trials": 100}, master_seed=SEED))
    ids = table.metadata["schedule_ids"]
    rows = {name: [r for r in table.rows if r[1] == sid] for name, sid in ids.items()}
    const = [r[5] for r in rows["constant"]]
    prop = rows["proportional"]
    ok_const = all(b >= a for a, b in zip(const, const[1:]))
    # a later rate may not exceed the earlier one's 95% upper bound
    ok_prop = all(later[5] <= earlier[7] for earlier, later in zip(prop, prop[1:]))
    ok_prop &= all(r[5] <= prop[0][7] for r in prop[1:])
    elapsed = time.perf_counter() - start
    ok = ok_const and ok_prop and elapsed < 900
    fmt = lambda rs: ", ".join(f"N={r[0]}: {r[5]:.3f} [{r[6]:.3f}, {r[7]:.3f}]" for r in rs)  # noqa: E731
    report(9, ok, f"constant shots {fmt(rows['constant'])}; proportional {fmt(prop)}; {elapsed:.0f}s")
    assert ok


REPRO_CASES = [
    ("ensemble-convergence", {"dim": 80, "samples": 4, "delta_n_max": 8, "workers": 2}),
    ("ensemble-convergence", {"beta": 4, "dim": 20, "samples": 3, "delta_n_max": 2}),
    ("kicked-top-scan", {"j_list": [10, 20], "delta_n": 2}),
    ("walk", {"j": 10}),
    ("transition", {"j_list": [10], "delta_n": 3, "eps_steps": 4}),
    ("dqc1-run", {"source": "cue", "dim": 20, "n_max": 5, "shots": 2000, "workers": 2}),
    ("dqc1-run", {"source": "poisson", "dim": 12, "n_max": 3, "shots": 1000}),
    ("resource-scaling", {"sizes": [16, 32], "trials": 3, "delta_n": 4}),
]


def test_c10_reproducibility(report):
    mismatched = []
    for experiment, params in REPRO_CASES:
        runs = [run_experiment(ExperimentConfig(experiment, params, master_seed=SEED)) for _ in range(2)]
        csv_rows = ["\n".join(r.data_lines()).encode() for r in runs]
        if csv_rows[0] != csv_rows[1]:
            mismatched.append(experiment)
    ok = not mismatched
    report(10, ok, f"{len(REPRO_CASES) - len(mismatched)}/{len(REPRO_CASES)} configurations byte-identical"
                   + (f"; mismatched {mismatched}" if mismatched else ""))
    assert ok
