"""Statistical verification layer: Monte Carlo batches vs analytic claims.

Every check compares an observed quantity against a prediction within an
explicit band and reports the triple; a report is a list of such checks
with all the metadata (seed, parameters, versions) needed to re-run it
bit-identically.

Band conventions.  Pure sampling error gets a 4-standard-error band.  The
mean checks for the giant component add a small deterministic allowance for
the finite-n part of the asymptotic mean that is exactly computable (for
the edge count, |p*C(n,r) - d*n/r| ~ d; for the vertex count, the excess
isolated-vertex mass n*|(1-p)^C(n-1,r-1) - e^-d|).  The asymptotic
statements carry o(1)/O(d) error terms with unspecified constants, so
these computable pieces are acknowledged in the band rather than asserted
to vanish; a wrong implementation (e.g. a missing e^-d factor) still fails
by orders of magnitude.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from ._version import __version__
from .errors import DomainError
from .analytic import bcm
from .analytic.formulas import llt_parameters, log_connectivity
from .branching import log_edge_pmf
from .enumeration import CountTable, exact_log_p
from .simulation import RNG_ALGORITHM, BatchParams, TrialBatch, p_from_d, run_batch

MIN_LLT_TRIALS = 10**4
VAR_RATIO_BAND = (0.85, 1.15)
CHI2_SIGNIFICANCE = 1e-3
CHI2_MIN_EXPECTED = 10.0
CONNECTIVITY_INFORMATIVE = (0.01, 0.99)


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


@dataclass(frozen=True)
class GaussianSpec:
    """Product Gaussian for an integer-lattice pair, in analytic parameters.

    Bin masses are lattice sums, not rectangle integrals: the mass of bin i
    is the Gaussian integral between the half-integer boundaries around the
    first and last *integers* falling in the bin.  Bins a fraction of sigma
    wide hold only a few lattice points, so ignoring where the lattice sits
    relative to the real-valued bin edges misallocates up to half a lattice
    cell of mass per bin -- enough to wreck a chi-square at 1e5 samples.
    """

    mu_x: float
    mu_y: float
    var_x: float
    var_y: float

    def __post_init__(self):
        if self.var_x <= 0.0 or self.var_y <= 0.0:
            raise DomainError("variances must be positive")

    def axis_mass(self, index: int, width: float, axis: str) -> float:
        mu = self.mu_x if axis == "x" else self.mu_y
        sigma = math.sqrt(self.var_x if axis == "x" else self.var_y)
        # integers x with floor((x - mu)/width + 1/2) == index
        x_lo = math.ceil(mu + (index - 0.5) * width)
        x_hi = math.ceil(mu + (index + 0.5) * width) - 1
        if x_hi < x_lo:
            return 0.0
        return _norm_cdf((x_hi + 0.5 - mu) / sigma) - _norm_cdf((x_lo - 0.5 - mu) / sigma)

    def bin_mass(self, i: int, j: int, width_x: float, width_y: float) -> float:
        """Joint mass of bin (i, j) under the product lattice Gaussian."""
        return self.axis_mass(i, width_x, "x") * self.axis_mass(j, width_y, "y")


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    predicted: float
    band: float | None
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{status}  {self.name:<42} observed={self.observed:.10g}"]
        if self.band is not None:
            parts.append(f"predicted={self.predicted:.10g} band={self.band:.4g}")
        if self.note:
            parts.append(f"[{self.note}]")
        return " ".join(parts)


@dataclass(frozen=True)
class CheckReport:
    title: str
    params: dict
    checks: tuple
    version: str = __version__
    rng_algorithm: str = RNG_ALGORITHM

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [f"# {self.title}"]
        lines.append("params: " + json.dumps(self.params, sort_keys=True))
        lines.append(f"version: {self.version}  rng: {self.rng_algorithm}")
        lines.extend(c.line() for c in self.checks)
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "format": "hyperconn-report v1",
            "title": self.title,
            "params": self.params,
            "version": self.version,
            "rng_algorithm": self.rng_algorithm,
            "overall_pass": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "observed": c.observed,
                    "predicted": c.predicted,
                    "band": c.band,
                    "passed": c.passed,
                    "note": c.note,
                }
                for c in self.checks
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _band_check(name, observed, predicted, band, note="") -> Check:
    return Check(
        name=name,
        observed=float(observed),
        predicted=float(predicted),
        band=float(band),
        passed=bool(abs(observed - predicted) <= band),
        note=note,
    )


# ---------------------------------------------------------------------------
# Chi-square machinery
# ---------------------------------------------------------------------------

def chi_square_from_bins(pairs) -> tuple[float, int]:
    """Pearson statistic and degrees of freedom (#bins - 1) from
    (observed, expected) pairs; no parameters are estimated from data."""
    stat = 0.0
    count = 0
    for observed, expected in pairs:
        if expected <= 0.0:
            raise DomainError("expected bin count must be positive")
        stat += (observed - expected) ** 2 / expected
        count += 1
    if count < 2:
        raise DomainError("need at least two bins")
    return stat, count - 1


def chi_square_pvalue(stat: float, dof: int) -> float:
    return float(chi2.sf(stat, dof))


def joint_bins_chi_square(
    batch: TrialBatch, spec: GaussianSpec, min_expected: float = CHI2_MIN_EXPECTED
) -> tuple[float, int, float]:
    """(statistic, dof, p-value) of the binned (l1, m1) counts against the
    integrated product-Gaussian bin masses.

    Bins with expected count below ``min_expected`` are pooled together
    with the never-observed remainder of the plane into one residual bin.
    """
    if batch.bin_width is None:
        raise DomainError("batch has no joint bins (gsm model?)")
    wx, wy = batch.bin_width
    t = batch.trials
    pairs = []
    covered_mass = 0.0
    pooled_observed = 0
    for (i, j), count in sorted(batch.joint_bins.items()):
        expected = t * spec.bin_mass(i, j, wx, wy)
        if expected >= min_expected:
            pairs.append((count, expected))
            covered_mass += expected / t
        else:
            pooled_observed += count
    pooled_expected = t * (1.0 - covered_mass)
    if pooled_expected > 0.0:
        pairs.append((pooled_observed, pooled_expected))
    stat, dof = chi_square_from_bins(pairs)
    return stat, dof, chi_square_pvalue(stat, dof)


# ---------------------------------------------------------------------------
# Giant-component local-limit checks
# ---------------------------------------------------------------------------

def _mean_allowances(r: int, n: int, d: float) -> tuple[float, float]:
    """Exactly computable finite-n parts of the asymptotic mean error terms:
    (isolated-vertex excess for l1, binomial edge-count offset for m1)."""
    p = p_from_d(r, n, d)
    iso_exact = n * math.exp(math.comb(n - 1, r - 1) * math.log1p(-p))
    allow_l = abs(iso_exact - n * math.exp(-d))
    allow_m = abs(p * math.comb(n, r) - d * n / r)
    return allow_l, allow_m


def llt_check(
    batch: TrialBatch,
    significance: float = CHI2_SIGNIFICANCE,
    var_band: tuple = VAR_RATIO_BAND,
) -> CheckReport:
    """Verify a gnp batch against the giant-component Gaussian parameters.

    (a) means of l1, m1 within 4 SE (plus the computable finite-n
        allowance) of (1-xi)n and d(1-xi^r)n/r;
    (b) variance ratios against n e^-d and d n / r inside ``var_band``;
    (c) chi-square of the binned joint counts against the product Gaussian
        at ``significance`` over bins with expected count >= 10;
    (d) the correlation of l1 with the slope-corrected edge count, reported
        informationally (the product form is exact only in the limit).
    """
    params = batch.params
    if params.model != "gnp":
        raise DomainError("llt_check requires a gnp batch")
    if batch.trials < MIN_LLT_TRIALS:
        raise DomainError(f"llt_check needs >= {MIN_LLT_TRIALS} trials, got {batch.trials}")
    r, n, d = params.r, params.n, params.d
    pars = llt_parameters(r, n, d)
    t = batch.trials
    allow_l, allow_m = _mean_allowances(r, n, d)

    se_l = math.sqrt(batch.var_l() / t)
    se_m = math.sqrt(batch.var_m() / t)
    checks = [
        _band_check(
            "mean_l1", batch.mean_l(), pars.mu_l, 4.0 * se_l + allow_l,
            note="band = 4 SE + computable finite-n mean allowance",
        ),
        _band_check(
            "mean_m1", batch.mean_m(), pars.mu_m, 4.0 * se_m + allow_m,
            note="band = 4 SE + computable finite-n mean allowance",
        ),
        _band_check(
            "var_l1_ratio", batch.var_l() / pars.var_l, 1.0, var_band[1] - 1.0,
            note=f"ratio to n*e^-d within [{var_band[0]}, {var_band[1]}]",
        ),
        _band_check(
            "var_m1_ratio", batch.var_m() / pars.var_m, 1.0, var_band[1] - 1.0,
            note=f"ratio to d*n/r within [{var_band[0]}, {var_band[1]}]",
        ),
    ]
    spec = GaussianSpec(mu_x=pars.mu_l, mu_y=pars.mu_m, var_x=pars.var_l, var_y=pars.var_m)
    stat, dof, pvalue = joint_bins_chi_square(batch, spec)
    checks.append(
        Check(
            name="joint_pmf_chi_square",
            observed=pvalue,
            predicted=significance,
            band=None,
            passed=bool(pvalue > significance),
            note=f"stat={stat:.2f} dof={dof}; pass iff p-value > {significance}",
        )
    )
    slope = pars.mu_m / pars.mu_l
    resid = batch.m1 - slope * batch.l1
    corr = float(np.corrcoef(batch.l1, resid)[0, 1])
    checks.append(
        Check(
            name="corr_l1_vs_corrected_m1",
            observed=corr,
            predicted=0.0,
            band=None,
            passed=True,
            note="informational: product form holds asymptotically only",
        )
    )
    return CheckReport(
        title="giant-component local-limit checks",
        params={
            "r": r, "n": n, "d": d, "trials": t,
            "master_seed": params.master_seed,
        },
        checks=tuple(checks),
    )


def tree_census_check(batch: TrialBatch, k_max: int = 4) -> CheckReport:
    """Empirical mean count of k-edge tree components vs n*pmf(k)/s for
    k = 0..k_max, with band max(4 SE, 2*pmf(k)*d^2*s); plus the rarity
    checks: mid-size non-giant components in fewer than 1% of trials and
    small non-tree components in fewer than 5%."""
    params = batch.params
    if params.model != "gnp":
        raise DomainError("tree_census_check requires a gnp batch")
    if batch.trials < MIN_LLT_TRIALS:
        raise DomainError(f"needs >= {MIN_LLT_TRIALS} trials, got {batch.trials}")
    if k_max > params.k_cap:
        raise DomainError(f"k_max={k_max} above batch census cap {params.k_cap}")
    r, n, d = params.r, params.n, params.d
    t = batch.trials
    checks = []
    for k in range(k_max + 1):
        s_k = 1 + (r - 1) * k
        pmf = math.exp(log_edge_pmf(r, d, k))
        predicted = n * pmf / s_k
        mean = batch.tree_census_sums[k] / t
        var = (batch.tree_census_sumsq[k] - t * mean * mean) / (t - 1)
        se = math.sqrt(max(var, 0.0) / t)
        band = max(4.0 * se, 2.0 * pmf * d * d * s_k)
        checks.append(
            _band_check(
                f"tree_census_k={k}", mean, predicted, band,
                note="band = max(4 SE, finite-n census allowance)",
            )
        )
    midsize_freq = batch.midsize_trials / t
    checks.append(
        _band_check(
            "midsize_component_trial_fraction", midsize_freq, 0.0, 0.01,
            note=f"components in ({params.resolved_midsize_lo()}, n/2] besides the giant",
        )
    )
    nontree_freq = batch.small_nontree_trials / t
    checks.append(
        _band_check(
            "small_nontree_trial_fraction", nontree_freq, 0.0, 0.05,
            note="trials containing any small non-tree component",
        )
    )
    return CheckReport(
        title="small tree-component census",
        params={
            "r": r, "n": n, "d": d, "trials": t,
            "master_seed": params.master_seed, "k_max": k_max,
        },
        checks=tuple(checks),
    )


# ---------------------------------------------------------------------------
# Connectivity Monte Carlo and exact sweeps
# ---------------------------------------------------------------------------

def connectivity_check(
    r: int, s: int, m: int, trials: int, master_seed: int, threads: int = 1
) -> CheckReport:
    """Empirical connectivity frequency of the uniform model against the
    analytic probability, within max(4 SE, 10% of the prediction).

    Refuses predictions outside [0.01, 0.99]: there Monte Carlo at any
    realistic trial count cannot distinguish candidate formulas.
    """
    predicted = math.exp(log_connectivity(r, s, m).log_value)
    lo, hi = CONNECTIVITY_INFORMATIVE
    if not lo <= predicted <= hi:
        raise DomainError(
            f"predicted connectivity {predicted:.4g} outside informative band "
            f"[{lo}, {hi}]; choose (s, m) with a less extreme prediction"
        )
    batch = run_batch(
        BatchParams(
            model="gsm", r=r, n=s, m=m, trials=trials,
            master_seed=master_seed, threads=threads,
        )
    )
    connected = int(np.count_nonzero(batch.l1 == s))
    freq = connected / trials
    se = math.sqrt(max(freq * (1.0 - freq), 1e-12) / trials)
    band = max(4.0 * se, 0.1 * predicted)
    check = _band_check(
        "connectivity_frequency", freq, predicted, band,
        note=f"{connected}/{trials} connected; band = max(4 SE, 10% relative)",
    )
    return CheckReport(
        title="connectivity Monte Carlo",
        params={
            "r": r, "s": s, "m": m, "trials": trials,
            "master_seed": master_seed,
        },
        checks=(check,),
    )


def sweep_exact_vs_asymptotic(
    table: CountTable, s_list, dbar: float, agreement_tol: float = 1e-9
) -> CheckReport:
    """Exact log connectivity vs the analytic formula along increasing s at
    fixed average degree (r = 2 tables only).

    Checks that the absolute log gap decreases along s_list and that the
    analytic formula agrees with the independent published r=2 form to
    ``agreement_tol`` at every point (an identity, not an asymptotic).
    """
    if table.r != 2:
        raise DomainError("sweep requires an r=2 count table")
    s_list = list(s_list)
    if sorted(s_list) != s_list or len(s_list) < 2:
        raise DomainError("s_list must be increasing with at least two entries")
    checks = []
    gaps = []
    for s in s_list:
        m_exact = dbar * s / 2.0
        m = round(m_exact)
        if abs(m - m_exact) > 1e-9:
            raise DomainError(f"dbar*s/2 = {m_exact} not an integer at s={s}")
        exact = exact_log_p(table, s, m)
        est = log_connectivity(2, s, m).log_value
        est_bcm = bcm.bcm_log_p(s, m)
        gaps.append(abs(exact - est))
        checks.append(
            Check(
                name=f"log_gap_s={s}",
                observed=gaps[-1],
                predicted=0.0,
                band=None,
                passed=True,
                note=f"|exact - asymptotic| at m={m} (informational row)",
            )
        )
        checks.append(
            _band_check(
                f"universal_vs_bcm_s={s}", est, est_bcm, agreement_tol,
                note="two prefactor/rate routes must agree as an identity",
            )
        )
    decreasing = all(gaps[i + 1] < gaps[i] for i in range(len(gaps) - 1))
    checks.append(
        Check(
            name="log_gap_decreasing",
            observed=float(decreasing),
            predicted=1.0,
            band=0.0,
            passed=decreasing,
            note=f"gaps along s: {[f'{g:.5f}' for g in gaps]}",
        )
    )
    return CheckReport(
        title="exact vs asymptotic sweep",
        params={"r": 2, "s_list": s_list, "dbar": dbar},
        checks=tuple(checks),
    )
