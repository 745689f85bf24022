"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines and timings.  Every stochastic criterion uses a fixed master seed and
is executed twice with different worker counts; the pair of runs must be
byte-identical (criterion 10).

Two sub-checks are mathematically unattainable at their stated tolerances
and are marked strict-xfail rather than silently loosened, with the
quantitative reason in the xfail message and printed by the test:

* the r=2 two-term xi expansion differs from the solution by
  (6 - 2/dbar) * dbar^2 * e^(-3 dbar), above the 5 * dbar^2 * e^(-3 dbar)
  band that holds for r >= 3 (whose constant is 3/2 + O(1/dbar));
* the joint (l1, m1) law at n=20000, d=6 has correlation
  sqrt(r*d)*e^(-d/2) ~ 0.211 (vanishing only as d grows), which a
  product-form Gaussian reference misses by ~trials * rho^2 ~ 8900 in the
  chi-square statistic -- unreachable at any fixed significance with 2e5
  trials.
"""

import math
import time

import numpy as np
import pytest

from hyperconn import branching
from hyperconn.analytic import bcm
from hyperconn.analytic.fixed_point import (
    critical_degree,
    mean_degree_log,
    solve_xi_from_d,
    solve_xi_from_dbar,
    xi_expansion_gap,
)
from hyperconn.analytic.formulas import (
    conn_prefactor,
    conn_rate,
    conn_rate_expansion_gap,
    log_connectivity,
)
from hyperconn.enumeration import (
    brute_force_connected,
    exact_connected_table,
    exact_log_p,
    load_table,
    save_table,
)
from hyperconn.simulation import BatchParams, export_batch, run_batch, trial_rng
from hyperconn.stats import (
    chi_square_from_bins,
    chi_square_pvalue,
    connectivity_check,
    llt_check,
    sweep_exact_vs_asymptotic,
    tree_census_check,
)

SEED_LLT = 7
SEED_BP = 11
SEED_CONN = 5
SEED_CENSUS = 13

LLT_TRIALS = 200_000
BP_TRIALS = 1_000_000
CONN_TRIALS = 100_000
CENSUS_TRIALS = 100_000

BP_EDGE_CAP = 60  # tail mass above it is ~e^(-155), far below Monte Carlo noise


def _line(criterion, passed, text):
    status = "PASS" if passed else "FAIL"
    print(f"[criterion {criterion:>2}] {status}  {text}", flush=True)


# ---------------------------------------------------------------------------
# 1. fixed-point correctness
# ---------------------------------------------------------------------------

def test_criterion_1_fixed_point_sweep():
    t0 = time.time()
    worst = 0.0
    for r in (2, 3, 4, 5):
        grid = np.geomspace(critical_degree(r) + 1e-6, 700.0, 200)
        for dbar in grid:
            fp = solve_xi_from_dbar(r, float(dbar))
            residual = abs(mean_degree_log(r, fp.log_xi) - dbar) / dbar
            worst = max(worst, residual)
    elapsed = time.time() - t0
    ok = worst <= 1e-10 and elapsed < 1.0
    _line(1, ok, f"fixed-point sweep: worst residual {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 1e-10
    assert elapsed < 1.0


# ---------------------------------------------------------------------------
# 2. expansion agreement
# ---------------------------------------------------------------------------

def _expansion_grid():
    return np.linspace(20.0, 40.0, 81)


def test_criterion_2_expansion_agreement():
    t0 = time.time()
    worst = 0.0
    for dbar in _expansion_grid():
        tol = 5.0 * dbar**2 * math.exp(-3.0 * dbar)
        for r in (3, 4):
            worst = max(worst, abs(xi_expansion_gap(r, float(dbar))) / tol)
        for r in (2, 3, 4):
            worst = max(worst, abs(conn_rate_expansion_gap(r, float(dbar))) / tol)
    elapsed = time.time() - t0
    ok = worst <= 1.0 and elapsed < 1.0
    _line(2, ok, f"expansion bands (xi r>=3, rate r=2 and r>=3): worst gap/tol "
                 f"{worst:.3f}, {elapsed:.2f}s")
    assert worst <= 1.0
    assert elapsed < 1.0


@pytest.mark.xfail(
    strict=True,
    reason="the r=2 xi expansion gap equals (6 - 2/dbar) dbar^2 e^(-3 dbar), "
    "strictly above the 5 dbar^2 e^(-3 dbar) band on [20, 40]; the band is "
    "achievable only for r >= 3 where the constant is 3/2 + O(1/dbar)",
)
def test_criterion_2_r2_xi_expansion_band():
    worst = 0.0
    for dbar in _expansion_grid():
        tol = 5.0 * dbar**2 * math.exp(-3.0 * dbar)
        worst = max(worst, abs(xi_expansion_gap(2, float(dbar))) / tol)
    _line(2, worst <= 1.0,
          f"r=2 xi expansion band: worst gap/tol {worst:.3f} "
          "(expected FAIL: true constant is 6 - 2/dbar > 5)")
    assert worst <= 1.0


# ---------------------------------------------------------------------------
# 3. published r=2 formula equivalence
# ---------------------------------------------------------------------------

def test_criterion_3_bcm_equivalence():
    t0 = time.time()
    xs = np.exp(np.linspace(math.log(1.02), math.log(20.0), 50))
    worst_a = worst_f = worst_y = 0.0
    for x in xs:
        x = float(x)
        g = conn_prefactor(2, 2.0 * x)
        worst_a = max(worst_a, abs(math.exp(bcm.bcm_a(x)) - g) / (1e-9 * g))
        worst_f = max(worst_f, abs(bcm.bcm_log_term(x) + conn_rate(2, 2.0 * x)) / 1e-10)
        xi = solve_xi_from_dbar(2, 2.0 * x).xi
        worst_y = max(worst_y, abs(bcm.bcm_y(x) - (1.0 - xi) / (1.0 + xi)) / 1e-10)
    elapsed = time.time() - t0
    ok = max(worst_a, worst_f, worst_y) <= 1.0 and elapsed < 1.0
    _line(3, ok, f"published-formula identities on 50 grid points: "
                 f"prefactor {worst_a:.3f}, rate {worst_f:.3f}, y {worst_y:.3f} "
                 f"(fractions of tolerance), {elapsed:.2f}s")
    assert worst_a <= 1.0 and worst_f <= 1.0 and worst_y <= 1.0
    assert elapsed < 1.0


# ---------------------------------------------------------------------------
# 4. oracle equivalence
# ---------------------------------------------------------------------------

def test_criterion_4_oracle_equivalence():
    t0 = time.time()
    for r, s_hi in ((2, 7), (3, 6)):
        table = exact_connected_table(r, s_hi)
        for s in range(1, s_hi + 1):
            for m in range(math.comb(s, r) + 1):
                assert table.get(s, m) == brute_force_connected(r, s, m), (r, s, m)
    t2 = exact_connected_table(2, 9)
    for s in range(2, 10):
        assert t2.get(s, s - 1) == branching.tree_count(2, s - 1)
    t3 = exact_connected_table(3, 9)
    for s in (3, 5, 7, 9):
        assert t3.get(s, (s - 1) // 2) == branching.tree_count(3, (s - 1) // 2)
    elapsed = time.time() - t0
    _line(4, elapsed < 120.0,
          f"recurrence == brute force (r=2 s<=7, r=3 s<=6) and tree columns "
          f"match the labeled-tree counts (s<=9), {elapsed:.1f}s")
    assert elapsed < 120.0


# ---------------------------------------------------------------------------
# 5. asymptotic convergence at desk scale
# ---------------------------------------------------------------------------

def test_criterion_5_desk_scale_convergence(tmp_path):
    t0 = time.time()
    table = exact_connected_table(2, 40, m_max=80)
    build = time.time() - t0
    # persistence: the sweep consumes the reloaded file
    path = tmp_path / "counts_r2_s40.txt"
    save_table(table, path)
    table = load_table(path)
    gaps = []
    for s in (20, 30, 40):
        m = 2 * s  # dbar = 4
        gaps.append(abs(exact_log_p(table, s, m) - log_connectivity(2, s, m).log_value))
    report = sweep_exact_vs_asymptotic(table, [20, 30, 40], 4.0)
    ok = (
        gaps[0] > gaps[1] > gaps[2]
        and gaps[2] <= 0.15
        and report.passed
        and build <= 600.0
    )
    _line(5, ok, f"exact vs asymptotic at dbar=4: gaps "
                 f"{gaps[0]:.4f} > {gaps[1]:.4f} > {gaps[2]:.4f} (<= 0.15), "
                 f"table build {build:.1f}s")
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] <= 0.15
    assert report.passed, report.to_text()
    assert build <= 600.0


# ---------------------------------------------------------------------------
# 6. giant-component local-limit suite
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def llt_batches():
    batches = {}
    for threads in (1, 2):
        t0 = time.time()
        batches[threads] = run_batch(
            BatchParams(
                model="gnp", r=3, n=20000, d=6.0, trials=LLT_TRIALS,
                master_seed=SEED_LLT, threads=threads,
            )
        )
        print(f"[setup] llt batch threads={threads}: {time.time() - t0:.0f}s", flush=True)
    return batches


def test_criterion_6_llt_means_and_variances(llt_batches):
    t0 = time.time()
    report = llt_check(llt_batches[2])
    by_name = {c.name: c for c in report.checks}
    for name in ("mean_l1", "mean_m1", "var_l1_ratio", "var_m1_ratio"):
        check = by_name[name]
        _line(6, check.passed, check.line())
        assert check.passed, check.line()
    corr = by_name["corr_l1_vs_corrected_m1"]
    _line(6, True, f"informational: {corr.line()}")
    assert time.time() - t0 < 60.0


@pytest.mark.xfail(
    strict=True,
    reason="at n=20000, d=6 the true joint law has correlation "
    "sqrt(r d) e^(-d/2) ~ 0.211 between vertex and edge counts; the "
    "product-form Gaussian reference is off by ~trials*rho^2 ~ 8.9e3 "
    "chi-square units, so the 0.001-significance test cannot pass at 2e5 "
    "trials for any achievable degree",
)
def test_criterion_6_llt_joint_chi_square(llt_batches):
    report = llt_check(llt_batches[2])
    check = {c.name: c for c in report.checks}["joint_pmf_chi_square"]
    _line(6, check.passed, check.line() + "  (expected FAIL: product form is "
          "asymptotic-only at these parameters)")
    assert check.passed, check.line()


# ---------------------------------------------------------------------------
# 7. branching process suite
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def bp_results():
    t0 = time.time()
    first = branching.simulate_batch(3, 5.0, BP_TRIALS, trial_rng(SEED_BP, 0), BP_EDGE_CAP)
    second = branching.simulate_batch(3, 5.0, BP_TRIALS, trial_rng(SEED_BP, 0), BP_EDGE_CAP)
    print(f"[setup] bp batches: {time.time() - t0:.0f}s", flush=True)
    return first, second


def test_criterion_7_branching_suite(bp_results):
    t0 = time.time()
    out, _ = bp_results
    r, d = 3, 5.0
    trials = out.size

    worst_se = 0.0
    for k in range(11):
        pk = branching.edge_pmf(r, d, k)
        freq = float(np.mean(out == k))
        se = math.sqrt(max(pk * (1 - pk), 1e-300) / trials)
        worst_se = max(worst_se, abs(freq - pk) / (4.0 * se))
    freq_ok = worst_se <= 1.0

    # chi-square over k=0..10 plus the censored tail, pooling expected
    # counts below 10 into the tail bin
    counts = {k: int(np.count_nonzero(out == k)) for k in range(11)}
    censored = int(np.count_nonzero(out == branching.CENSORED))
    other = trials - censored - sum(counts.values())
    pairs = []
    pooled_obs = censored + other
    pooled_exp = float(trials)
    for k in range(11):
        expected = trials * branching.edge_pmf(r, d, k)
        if expected >= 10.0:
            pairs.append((counts[k], expected))
            pooled_exp -= expected
        else:
            pooled_obs += counts[k]
    pairs.append((pooled_obs, pooled_exp))
    stat, dof = chi_square_from_bins(pairs)
    pvalue = chi_square_pvalue(stat, dof)
    chi_ok = pvalue > 1e-3

    xi = solve_xi_from_d(r, d).xi
    cens_freq = censored / trials
    slack = 4.0 * math.sqrt(xi * (1 - xi) / trials) + branching.tail_bound(r, d, BP_EDGE_CAP + 1)
    cens_ok = abs(cens_freq - (1.0 - xi)) <= slack

    series = sum(branching.edge_pmf(3, 0.3, k) / (1 + 2 * k) for k in range(10**4 + 1))
    neg_ok = abs(series - 0.8) <= 1e-10

    elapsed = time.time() - t0
    ok = freq_ok and chi_ok and cens_ok and neg_ok and elapsed < 120.0
    _line(7, ok, f"branching suite: worst |freq-pmf|/4SE {worst_se:.3f}, "
                 f"chi2 p={pvalue:.4f}, censored gap "
                 f"{abs(cens_freq - (1 - xi)):.2e} <= {slack:.2e}, "
                 f"negative-moment residual {abs(series - 0.8):.2e}, {elapsed:.1f}s")
    assert freq_ok and chi_ok and cens_ok and neg_ok
    assert elapsed < 120.0


# ---------------------------------------------------------------------------
# 8. connectivity Monte Carlo
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def conn_reports():
    s = 200
    m = math.ceil(s * (math.log(s) - 1.0) / 3.0)
    t0 = time.time()
    reports = {
        threads: connectivity_check(3, s, m, CONN_TRIALS, SEED_CONN, threads=threads)
        for threads in (1, 2)
    }
    print(f"[setup] connectivity checks: {time.time() - t0:.0f}s", flush=True)
    return m, reports


def test_criterion_8_connectivity(conn_reports):
    m, reports = conn_reports
    report = reports[2]
    (check,) = report.checks
    dbar = 3 * m / 200
    dense_only = math.exp(-200.0 * conn_rate(3, dbar))
    _line(8, check.passed, check.line())
    _line(8, True, f"informational: bare exp(-s*rate) = {dense_only:.5f} "
                   f"(prediction with prefactor: {check.predicted:.5f})")
    assert m == 287
    assert check.passed, check.line()
    assert 0.05 <= check.predicted <= 0.08  # the stated "P ~ 0.066" scale


# ---------------------------------------------------------------------------
# 9. tree census
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def census_batches():
    batches = {}
    for threads in (1, 2):
        t0 = time.time()
        batches[threads] = run_batch(
            BatchParams(
                model="gnp", r=3, n=10000, d=4.0, trials=CENSUS_TRIALS,
                master_seed=SEED_CENSUS, threads=threads,
            )
        )
        print(f"[setup] census batch threads={threads}: {time.time() - t0:.0f}s", flush=True)
    return batches


def test_criterion_9_tree_census(census_batches):
    t0 = time.time()
    report = tree_census_check(census_batches[2], k_max=3)
    for check in report.checks:
        _line(9, check.passed, check.line())
        assert check.passed, check.line()
    assert time.time() - t0 < 600.0


# ---------------------------------------------------------------------------
# 10. determinism
# ---------------------------------------------------------------------------

def test_criterion_10_determinism(llt_batches, census_batches, conn_reports, bp_results):
    llt_same = export_batch(llt_batches[1]) == export_batch(llt_batches[2])
    llt_report_same = llt_check(llt_batches[1]).to_json() == llt_check(llt_batches[2]).to_json()
    census_same = export_batch(census_batches[1]) == export_batch(census_batches[2])
    census_report_same = (
        tree_census_check(census_batches[1], k_max=3).to_json()
        == tree_census_check(census_batches[2], k_max=3).to_json()
    )
    _, reports = conn_reports
    conn_same = reports[1].to_json() == reports[2].to_json()
    bp_same = np.array_equal(bp_results[0], bp_results[1])
    ok = llt_same and llt_report_same and census_same and census_report_same and conn_same and bp_same
    _line(10, ok, "byte-identical reruns under different worker counts: "
                  f"llt batch {llt_same}, llt report {llt_report_same}, "
                  f"census batch {census_same}, census report {census_report_same}, "
                  f"connectivity report {conn_same}, branching arrays {bp_same}")
    assert llt_same and llt_report_same
    assert census_same and census_report_same
    assert conn_same
    assert bp_same
