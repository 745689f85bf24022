"""Connectivity rate, prefactor, and the asymptotic probability/count formulas.

The probability that a uniformly random m-edge r-uniform hypergraph on s
vertices is connected behaves like

    P(s, m) ~ prefactor(r, dbar) * exp(-s * rate(r, dbar)),   dbar = r*m/s,

valid whenever m - s/(r-1) -> infinity.  ``conn_rate`` is the per-vertex
exponential rate; ``conn_prefactor`` the order-one factor, which tends to 1
for large degree and to e^(r/2 + [r==2]) * sqrt(3(r-1)/2) at the sparse
boundary dbar -> r/(r-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from ..errors import DomainError, NumericsError
from .fixed_point import (
    FixedPoint,
    _check_expansion_domain,
    _solve_w_dbar,
    check_uniformity,
    critical_degree,
    solve_xi_from_d,
    solve_xi_from_dbar,
    xi_expansion_gap,
)

# Boundary band below which the prefactor is only defined as a limit and the
# estimate is flagged rather than extrapolated.
SPARSE_BAND = 1e-6
# Thresholds are engineering cutoffs, not mathematics: the full formula is
# always the reference path and the shortcuts agree with it to <= 1e-12.
VERY_DENSE_MARGIN = 10.0
DENSE_OFFSET = 10.0
_PREFACTOR_UNIT_TOL = 1e-12


class Regime(Enum):
    SPARSE = "sparse"
    MIDDLE = "middle"
    DENSE = "dense"
    VERY_DENSE = "very_dense"


# ---------------------------------------------------------------------------
# Rate F
# ---------------------------------------------------------------------------

def conn_rate_xi_form(r: int, dbar: float, xi: float) -> float:
    """Rate from the xi-side formula; preferred for xi <= 1/2."""
    l1 = math.log1p(-xi)
    return (
        dbar * l1
        - (dbar / r) * math.log1p(-(xi**r))
        - xi / (1.0 - xi) * math.log(xi)
        - l1
    )


def conn_rate_rho_form(r: int, dbar: float, rho: float) -> float:
    """Rate from the rho = 1 - xi side; preferred for xi > 1/2.

    For rho < 1e-3 the four raw terms individually blow up like log(rho)
    while their sum stays order one, so the divergent logs are grouped
    analytically:

        rate = (dbar*(r-1)/r - 1) * log(rho) - (dbar/r)*(log r + log Q(rho))
               + S(rho),

    with Q(rho) = (1-(1-rho)^r)/(r*rho) -> 1 and
    S(rho) = -((1-rho)/rho) * log(1-rho) = 1 - sum_{k>=1} rho^k/(k(k+1)).
    """
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0,1), got {rho!r}")
    lx = math.log1p(-rho)  # log(xi)
    if rho < 1e-3:
        coef = dbar * (r - 1) / r - 1.0
        q = -math.expm1(r * lx) / (r * rho)
        s = 1.0 - rho * (
            0.5 + rho * (1.0 / 6.0 + rho * (1.0 / 12.0 + rho * (0.05 + rho / 30.0)))
        )
        return coef * math.log(rho) - (dbar / r) * (math.log(r) + math.log(q)) + s
    lr = math.log(rho)
    return (
        dbar * lr
        - (dbar / r) * math.log(-math.expm1(r * lx))
        - ((1.0 - rho) / rho) * lx
        - lr
    )


def conn_rate(r: int, dbar: float, point: FixedPoint | None = None) -> float:
    """Per-vertex exponential rate of the connectivity probability.

    Dispatches to the xi-side formula for xi <= 1/2 and to the rho-side
    formula above it; the two agree to 1e-12 relative across the overlap.
    Degrees so large that xi underflows give rate 0.0 (the true value is
    below the smallest positive double).
    """
    fp = point if point is not None else solve_xi_from_dbar(r, dbar)
    if fp.xi == 0.0:
        return 0.0
    if fp.xi <= 0.5:
        return conn_rate_xi_form(r, dbar, fp.xi)
    return conn_rate_rho_form(r, dbar, fp.rho)


def conn_rate_expansion(r: int, dbar: float) -> float:
    """Two-term large-degree expansion of the rate:
    e^-dbar + (dbar+1)/2 * e^(-2 dbar) for r >= 3, and
    e^-dbar + (dbar+1/2) * e^(-2 dbar) for r = 2."""
    _check_expansion_domain(r, dbar)
    beta = dbar + 0.5 if r == 2 else 0.5 * (dbar + 1.0)
    return math.exp(-dbar) + beta * math.exp(-2.0 * dbar)


def _rate_series_coefficient(r: int, dbar: float, k: int) -> float:
    """Coefficient of xi^k in the rate expanded at the fixed point.

    Uses log(xi) = -dbar*(1-xi^(r-1))(1-xi)/(1-xi^r), valid only at the
    solved xi, to turn all four rate terms into a single power series.
    """
    a = -(dbar - 1.0) / k
    if k % r == 0:
        a += dbar / k - dbar
    if k % r == 1:
        a += dbar
    return a


def conn_rate_series(r: int, dbar: float, k_max: int = 60) -> float:
    """Rate via its fixed-point power series; agrees with conn_rate to
    machine precision for dbar >= 5 and is the basis of the gap below."""
    _check_expansion_domain(r, dbar)
    w = _solve_w_dbar(r, dbar)
    xi = math.exp(w - dbar)
    total, p = 0.0, 1.0
    for k in range(1, k_max + 1):
        p *= xi
        total += _rate_series_coefficient(r, dbar, k) * p
    return total


def conn_rate_expansion_gap(r: int, dbar: float, k_max: int = 60) -> float:
    """conn_rate - conn_rate_expansion, evaluated without cancellation.

    Term-by-term against the expansion: the xi^1 piece is the xi expansion
    gap, the xi^2 piece pairs with the remaining e^(-2 dbar) coefficient
    (which equals the series a_2 exactly, for both r cases), and everything
    from xi^3 on is a plain tiny series.  Result carries ~13 significant
    digits at the Theta(dbar^2 e^(-3 dbar)) scale of the true gap.
    """
    _check_expansion_domain(r, dbar)
    w = _solve_w_dbar(r, dbar)
    ed = math.exp(-dbar)
    xi = math.exp(w - dbar)
    gap = xi_expansion_gap(r, dbar)
    a2 = _rate_series_coefficient(r, dbar, 2)
    gap += a2 * (ed * math.expm1(w)) * (xi + ed)  # a2 * (xi^2 - e^(-2 dbar))
    p = xi * xi
    for k in range(3, k_max + 1):
        p *= xi
        gap += _rate_series_coefficient(r, dbar, k) * p
    return gap


# ---------------------------------------------------------------------------
# Prefactor G
# ---------------------------------------------------------------------------

def sparse_prefactor_limit(r: int) -> float:
    """Limit of the prefactor as dbar -> r/(r-1):
    e^(r/2 + [r==2]) * sqrt(3(r-1)/2)."""
    check_uniformity(r)
    return math.exp(0.5 * r + (1.0 if r == 2 else 0.0)) * math.sqrt(1.5 * (r - 1))


def _one_minus_pow(xi: float, rho: float, k: int) -> float:
    """1 - xi^k without cancellation on either side of xi = 1/2."""
    if k == 0:
        return 0.0
    if xi <= 0.5:
        return 1.0 - xi**k
    return -math.expm1(k * math.log1p(-rho))


def conn_prefactor(r: int, dbar: float, point: FixedPoint | None = None) -> float:
    """Order-one prefactor of the connectivity probability.

    Raises NumericsError if the variance-like discriminant under the square
    root is non-positive or the leading factor is non-positive; values are
    reported as-is, never clamped.
    """
    fp = point if point is not None else solve_xi_from_dbar(r, dbar)
    xi, rho = fp.xi, fp.rho
    if r == 2:
        a = 1.0 + xi - dbar * xi
        b = (1.0 + xi) ** 2 - 2.0 * dbar * xi
        g = (2.0 * dbar + dbar * dbar) * xi / (2.0 * (1.0 + xi))
    else:
        omr = _one_minus_pow(xi, rho, r)
        omr1 = _one_minus_pow(xi, rho, r - 1)
        a = omr - rho * (r - 1) * dbar * xi ** (r - 1)
        b = (omr + dbar * (r - 1) * xi * _one_minus_pow(xi, rho, r - 2)) * omr
        b -= r * dbar * xi * omr1 * omr1
        # xi - 2*xi^r + xi^(r-1) = xi * ((1-xi^(r-1)) + xi^(r-2)*rho)
        h = omr1 + xi ** (r - 2) * rho
        g = (r - 1) * dbar * xi * h / (2.0 * omr)
    if b <= 0.0:
        raise NumericsError(
            f"prefactor discriminant b = {b!r} <= 0 at r={r}, dbar={dbar}"
        )
    if a <= 0.0:
        raise NumericsError(f"prefactor numerator a = {a!r} <= 0 at r={r}, dbar={dbar}")
    return a / math.sqrt(b) * math.exp(g)


# ---------------------------------------------------------------------------
# Probability and count estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogEstimate:
    """Natural log of a probability or count, with regime metadata.

    ``components`` records the additive pieces (log prefactor, -s*rate, and
    for counts the binomial/Stirling terms).  ``flags`` carries warnings
    such as 'not_asymptotic' (sparse boundary band) or 'stirling_validity'
    (m within a factor 10 of the s^(4/3) ceiling).
    """

    log_value: float
    regime: Regime
    components: dict = field(default_factory=dict)
    flags: tuple = ()

    @property
    def not_asymptotic(self) -> bool:
        return "not_asymptotic" in self.flags


def _classify(r: int, s: int, dbar: float) -> Regime:
    if dbar - math.log(s) >= VERY_DENSE_MARGIN:
        return Regime.VERY_DENSE
    if s > 15 and dbar >= 2.0 * math.log(math.log(s)) + DENSE_OFFSET:
        return Regime.DENSE
    if dbar <= critical_degree(r) + SPARSE_BAND:
        return Regime.SPARSE
    return Regime.MIDDLE


def _check_sm(r: int, s: int, m: int) -> float:
    check_uniformity(r)
    if s < r:
        raise DomainError(f"need s >= r, got s={s}, r={r}")
    if m < 0 or m > math.comb(s, r):
        raise DomainError(f"m={m} outside [0, C(s,{r})] for s={s}")
    if m * (r - 1) <= s:
        raise DomainError(
            f"m={m} must strictly exceed s/(r-1) = {s / (r - 1):.6g} "
            "(below it the connectivity formulas do not apply)"
        )
    return r * m / s


def log_connectivity(r: int, s: int, m: int) -> LogEstimate:
    """log of the asymptotic probability that a uniform m-edge r-uniform
    hypergraph on s vertices is connected: log prefactor - s * rate.

    Full formula on every path; in the dense regimes a certified
    |prefactor - 1| < 1e-12 bound replaces the prefactor solve, and inside
    the sparse boundary band the limit prefactor is used and the estimate is
    flagged 'not_asymptotic' rather than extrapolated.
    """
    dbar = _check_sm(r, s, m)
    regime = _classify(r, s, dbar)
    flags = []
    if regime in (Regime.DENSE, Regime.VERY_DENSE) and 10.0 * dbar * math.exp(-dbar) < _PREFACTOR_UNIT_TOL:
        log_g = 0.0  # certified: |prefactor - 1| <= 10*dbar*e^-dbar < 1e-12
    elif regime is Regime.SPARSE:
        log_g = math.log(sparse_prefactor_limit(r))
        flags.append("not_asymptotic")
    else:
        log_g = math.log(conn_prefactor(r, dbar))
    rate_term = -float(s) * conn_rate(r, dbar)
    return LogEstimate(
        log_value=log_g + rate_term,
        regime=regime,
        components={"log_prefactor": log_g, "rate_term": rate_term, "dbar": dbar},
        flags=tuple(flags),
    )


_LOG_COMB_LOOP_MAX = 2**26


def _log_comb(n: float, k: float) -> float:
    """log C(n, k) accurate for k << n.

    The lgamma difference lgamma(n+1) - lgamma(n-k+1) loses up to
    ulp(n log n) absolutely, which reaches order 1 once n ~ 1e14; for
    moderate k the summed form k log n + sum log(1-i/n) keeps absolute
    error ~1e-9 instead.
    """
    if k > n / 2 or k > _LOG_COMB_LOOP_MAX:
        return math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)
    ki = int(k)
    correction = float(np.sum(np.log1p(-np.arange(ki, dtype=np.float64) / n)))
    return ki * math.log(n) + correction - math.lgamma(k + 1.0)


class CountForm(Enum):
    EXACT_BINOMIAL = "exact_binomial"
    STIRLING = "stirling"


def log_connected_count(
    r: int, s: int, m: int, form: CountForm = CountForm.EXACT_BINOMIAL
) -> LogEstimate:
    """log of the asymptotic number of connected m-edge r-uniform
    hypergraphs on s labeled vertices.

    EXACT_BINOMIAL adds log C(C(s,r), m) (by log-gamma) to the probability
    estimate.  STIRLING evaluates the direct product form
        r*m*log(s) - log m! - m*log r! - (r-1)*dbar/2 - [r==2]*dbar^2/4
        - s*rate,
    which requires m = o(s^(4/3)); m above s^(4/3) is rejected and m above
    s^(4/3)/10 is flagged 'stirling_validity'.
    """
    dbar = _check_sm(r, s, m)
    if form is CountForm.EXACT_BINOMIAL:
        prob = log_connectivity(r, s, m)
        big_n = math.comb(s, r)
        if big_n > 1e300:
            raise DomainError("edge universe too large for log-gamma evaluation")
        lb = _log_comb(float(big_n), float(m))
        comps = dict(prob.components)
        comps["log_binom"] = lb
        return LogEstimate(
            log_value=prob.log_value + lb,
            regime=prob.regime,
            components=comps,
            flags=prob.flags,
        )
    ceiling = s ** (4.0 / 3.0)
    if m > ceiling:
        raise DomainError(f"Stirling count form requires m <= s^(4/3) = {ceiling:.4g}")
    flags = ["stirling_validity"] if m > ceiling / 10.0 else []
    regime = _classify(r, s, dbar)
    if regime is Regime.SPARSE:
        flags.append("not_asymptotic")
    rate_term = -float(s) * conn_rate(r, dbar)
    stirling = (
        r * m * math.log(s)
        - math.lgamma(m + 1.0)
        - m * math.log(math.factorial(r))
        - 0.5 * (r - 1) * dbar
        - (0.25 * dbar * dbar if r == 2 else 0.0)
    )
    return LogEstimate(
        log_value=stirling + rate_term,
        regime=regime,
        components={"stirling_term": stirling, "rate_term": rate_term, "dbar": dbar},
        flags=tuple(flags),
    )


# ---------------------------------------------------------------------------
# Local-limit-theorem parameters for the giant component
# ---------------------------------------------------------------------------

class LltParameters(NamedTuple):
    mu_l: float
    mu_m: float
    var_l: float
    var_m: float


def llt_parameters(r: int, n: int, d: float) -> LltParameters:
    """Gaussian parameters of (vertices, edges) of the largest component of
    the binomial random hypergraph with per-group mean d:
    ((1-xi)n, d(1-xi^r)n/r, n e^-d, d n / r).  Requires (r-1)d > 1."""
    check_uniformity(r)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if (r - 1) * d <= 1.0:
        raise DomainError(
            f"supercritical d > 1/(r-1) = {1 / (r - 1):.6g} required, got {d}"
        )
    bp = solve_xi_from_d(r, d)
    xi = bp.xi
    return LltParameters(
        mu_l=(1.0 - xi) * n,
        mu_m=d * (1.0 - xi**r) / r * n,
        var_l=n * math.exp(-d),
        var_m=d * n / r,
    )
