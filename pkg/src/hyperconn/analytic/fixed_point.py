"""Solvers for the extinction parameter xi and its large-degree expansions.

Two parametrizations of the same quantity appear throughout the package:

* enumerative: the average degree ``dbar = r*m/s`` of an m-edge r-uniform
  hypergraph determines xi in (0,1) through the strictly decreasing map

      mean_degree(r, xi) = log(1/xi) * (1-xi^r) / ((1-xi^(r-1)) * (1-xi)),

  a bijection from (0,1) onto (r/(r-1), infinity);

* probabilistic: the Poisson group mean ``d`` of the associated branching
  process determines xi as the smallest root of xi = exp(-d*(1-xi^(r-1))),
  which is < 1 exactly when (r-1)*d > 1.

Numerical strategy.  Both maps are smooth and strictly monotone, so a
bracketing bisection followed by safeguarded Newton converges
unconditionally.  For large degree (> 30) xi is of order e^-degree and the
solve is carried out in the offset variable w = log(xi) + degree, which
stays well scaled down to degrees around 1e4 where xi itself underflows;
the returned ``log_xi`` field remains exact there even when ``xi`` rounds
to 0.0 (which happens past degree ~745).

The *_expansion_gap functions evaluate the difference between the solved
xi (or the connectivity rate, see formulas.py) and its two-term
large-degree expansion without catastrophic cancellation.  This matters
because the gap is of order degree^2 * e^(-3*degree), many orders of
magnitude below one ulp of xi itself for degrees past ~21, so a literal
subtraction of doubles would return rounding noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ConvergenceError, DomainError

# Hybrid solver controls: bisect the bracket down to this width (in log xi),
# then polish with Newton until the relative step is below _STEP_TOL.
_BISECT_WIDTH = 1e-3
_STEP_TOL = 1e-14
_MAX_ITER = 200
_RESIDUAL_TOL = 1e-12
# Degree above which the solve switches to the offset variable w.
_LOG_SOLVE_THRESHOLD = 30.0


def check_uniformity(r) -> int:
    if not isinstance(r, (int,)) or isinstance(r, bool) or r < 2:
        raise DomainError(f"uniformity r must be an integer >= 2, got {r!r}")
    return r


def critical_degree(r: int) -> float:
    """Lower edge of the enumerative degree domain, r/(r-1)."""
    check_uniformity(r)
    return r / (r - 1)


@dataclass(frozen=True)
class FixedPoint:
    """Solution of mean_degree(r, xi) = dbar.

    ``rho`` is 1 - xi computed in double precision; ``log_xi`` is the exact
    log of the solution and stays informative when xi underflows.
    """

    r: int
    dbar: float
    xi: float
    rho: float
    log_xi: float


@dataclass(frozen=True)
class BranchingPoint:
    """Smallest root of xi = exp(-d*(1-xi^(r-1))) together with the dual
    parameter d_star = d * xi^(r-1).  Subcritical inputs give xi = 1 and
    d_star = d."""

    r: int
    d: float
    xi: float
    d_star: float
    log_xi: float


def mean_degree(r: int, xi: float) -> float:
    """Average degree corresponding to extinction parameter xi in (0,1).

    Strictly decreasing in xi.  Near xi = 1 every factor vanishes; the
    evaluation switches to rho = 1 - xi with log1p/expm1 so the two ratios
    log(1/xi)/(1-xi) -> 1 and (1-xi^r)/(1-xi^(r-1)) -> r/(r-1) are formed
    without cancellation.
    """
    check_uniformity(r)
    if not 0.0 < xi < 1.0:
        raise DomainError(f"xi must lie in (0,1), got {xi!r}")
    if xi >= 0.5:
        rho = 1.0 - xi  # exact for xi in [0.5, 1)
        lx = math.log1p(-rho)
        num = (-lx) * (-math.expm1(r * lx))
        den = (-math.expm1((r - 1) * lx)) * rho
    else:
        lx = math.log(xi)
        num = (-lx) * (1.0 - xi**r)
        den = (1.0 - xi ** (r - 1)) * (1.0 - xi)
    return num / den


def mean_degree_log(r: int, log_xi: float) -> float:
    """mean_degree evaluated from log(xi); stable for log_xi << -700."""
    check_uniformity(r)
    t = log_xi
    if not t < 0.0:
        raise DomainError(f"log_xi must be negative, got {t!r}")
    u1 = -math.expm1(t)
    ur1 = -math.expm1((r - 1) * t)
    ur = -math.expm1(r * t)
    return (-t) * ur / (ur1 * u1)


def _mean_degree_dxi(r: int, xi: float) -> float:
    """d/dxi of mean_degree via logarithmic differentiation."""
    phi = mean_degree(r, xi)
    lx = math.log(xi)
    term = 1.0 / (xi * lx)
    term -= r * xi ** (r - 1) / (1.0 - xi**r)
    term += (r - 1) * xi ** (r - 2) / (1.0 - xi ** (r - 1))
    term += 1.0 / (1.0 - xi)
    return phi * term


def _bracket_log(fn_log, target: float, t_lo: float):
    """Shrink an upper bracket endpoint toward 0- until fn(t_hi) < target.

    ``fn_log`` is strictly decreasing in t = log(xi).  The lower endpoint is
    supplied by the caller (any t with fn >= target works).
    """
    t_hi = -0.5
    for _ in range(80):
        if fn_log(t_hi) < target:
            return t_lo, t_hi
        t_hi *= 0.5
    raise ConvergenceError(
        f"could not bracket the root above t={t_hi}; target {target} is too "
        "close to the domain boundary"
    )


def _bisect_log(fn_log, target: float, t_lo: float, t_hi: float, width: float):
    while t_hi - t_lo > width:
        mid = 0.5 * (t_lo + t_hi)
        if fn_log(mid) > target:
            t_lo = mid
        else:
            t_hi = mid
    return t_lo, t_hi


def _newton_in_xi(fn, dfn, target, x_lo, x_hi):
    """Safeguarded Newton on a strictly decreasing fn, bracket kept valid."""
    x = 0.5 * (x_lo + x_hi)
    for _ in range(_MAX_ITER):
        f = fn(x) - target
        if f > 0.0:
            x_lo = max(x_lo, x)
        else:
            x_hi = min(x_hi, x)
        step = f / dfn(x)
        x_new = x - step
        if not x_lo < x_new < x_hi:
            x_new = 0.5 * (x_lo + x_hi)
        if abs(x_new - x) <= _STEP_TOL * x_new:
            return x_new
        x = x_new
    return x


def _corr_from_xi_dbar(r: int, dbar: float, xi: float) -> float:
    """w = log(xi) + dbar expressed through xi at the enumerative fixed point:
    w = dbar * xi * (1 + xi^(r-2) - 2 xi^(r-1)) / (1 - xi^r)."""
    return dbar * xi * (1.0 + xi ** (r - 2) - 2.0 * xi ** (r - 1)) / (1.0 - xi**r)


def _solve_w_dbar(r: int, dbar: float) -> float:
    """Offset solve for the enumerative fixed point, valid for dbar >= 5.

    The iteration w -> dbar*xi*h(xi)/(1-xi^r) with xi = e^(w-dbar) is a
    contraction with factor about w itself (< 0.07 on the whole domain), so
    a couple of iterations reach machine precision.
    """
    w = (2.0 if r == 2 else 1.0) * dbar * math.exp(-dbar)
    for _ in range(_MAX_ITER):
        xi = math.exp(w - dbar)
        w_new = _corr_from_xi_dbar(r, dbar, xi)
        if abs(w_new - w) <= 1e-16 * w_new:
            return w_new
        w = w_new
    return w


def solve_xi_from_dbar(r: int, dbar: float) -> FixedPoint:
    """Invert mean_degree: find xi in (0,1) with mean_degree(r, xi) = dbar.

    Requires dbar > r/(r-1).  The relative residual of the returned point is
    verified to be <= 1e-12; a violation raises ConvergenceError (and would
    indicate a bug, since the map is a smooth strictly monotone bijection).
    """
    check_uniformity(r)
    dc = critical_degree(r)
    if not dbar > dc:
        raise DomainError(f"dbar must exceed r/(r-1) = {dc}, got {dbar!r}")

    if dbar > _LOG_SOLVE_THRESHOLD:
        w = _solve_w_dbar(r, dbar)
        t = w - dbar
        xi = math.exp(t)
    else:
        fn_log = lambda t: mean_degree_log(r, t)
        t_lo, t_hi = _bracket_log(fn_log, dbar, -dbar - 2.0)
        t_lo, t_hi = _bisect_log(fn_log, dbar, t_lo, t_hi, _BISECT_WIDTH)
        xi = _newton_in_xi(
            lambda x: mean_degree(r, x),
            lambda x: _mean_degree_dxi(r, x),
            dbar,
            math.exp(t_lo),
            math.exp(t_hi),
        )
        t = math.log(xi)

    residual = abs(mean_degree_log(r, t) - dbar) / dbar
    if residual > _RESIDUAL_TOL:
        raise ConvergenceError(
            f"fixed-point residual {residual:.3e} exceeds {_RESIDUAL_TOL} "
            f"at r={r}, dbar={dbar}"
        )
    return FixedPoint(r=r, dbar=float(dbar), xi=xi, rho=1.0 - xi, log_xi=t)


def branching_mean(point: FixedPoint) -> float:
    """Poisson mean d = log(1/xi) / (1 - xi^(r-1)) associated with an
    enumerative fixed point; solve_xi_from_d(r, d) recovers the same xi."""
    r, t = point.r, point.log_xi
    return (-t) / (-math.expm1((r - 1) * t))


def _g_log(r: int, t: float) -> float:
    """log(1/xi)/(1-xi^(r-1)) evaluated from t = log(xi)."""
    return (-t) / (-math.expm1((r - 1) * t))


def solve_xi_from_d(r: int, d: float) -> BranchingPoint:
    """Smallest root in (0,1] of xi = exp(-d*(1-xi^(r-1))).

    Returns xi = 1 exactly when (r-1)*d <= 1 (extinction is certain), and
    otherwise the unique root below 1.  Also carries the dual parameter
    d_star = d * xi^(r-1).
    """
    check_uniformity(r)
    if not d > 0.0:
        raise DomainError(f"branching mean d must be positive, got {d!r}")
    if (r - 1) * d <= 1.0:
        return BranchingPoint(r=r, d=float(d), xi=1.0, d_star=float(d), log_xi=0.0)

    if d > _LOG_SOLVE_THRESHOLD:
        w = d * math.exp(-(r - 1) * d)  # seed below the root
        for _ in range(_MAX_ITER):
            w_new = d * math.exp((r - 1) * (w - d))
            if abs(w_new - w) <= 1e-16 * w_new:
                w = w_new
                break
            w = w_new
        t = w - d
        xi = math.exp(t)
        d_star = w
    else:
        fn_log = lambda t: _g_log(r, t)
        t_lo, t_hi = _bracket_log(fn_log, d, -d - 2.0)
        t_lo, t_hi = _bisect_log(fn_log, d, t_lo, t_hi, _BISECT_WIDTH)

        def g(x):
            if x >= 0.5:
                lx = math.log1p(-(1.0 - x))
            else:
                lx = math.log(x)
            return (-lx) / (-math.expm1((r - 1) * lx))

        def dg(x):
            val = g(x)
            lx = math.log(x)
            return val * (
                1.0 / (x * lx) + (r - 1) * x ** (r - 2) / (1.0 - x ** (r - 1))
            )

        xi = _newton_in_xi(g, dg, d, math.exp(t_lo), math.exp(t_hi))
        t = math.log(xi)
        d_star = d * xi ** (r - 1)

    residual = abs(_g_log(r, t) - d) / d
    if residual > _RESIDUAL_TOL:
        raise ConvergenceError(
            f"branching fixed-point residual {residual:.3e} exceeds "
            f"{_RESIDUAL_TOL} at r={r}, d={d}"
        )
    return BranchingPoint(r=r, d=float(d), xi=xi, d_star=d_star, log_xi=t)


# ---------------------------------------------------------------------------
# Large-degree expansions and their cancellation-free gaps
# ---------------------------------------------------------------------------

_EXPANSION_MIN_DEGREE = 5.0


def _check_expansion_domain(r, dbar):
    check_uniformity(r)
    if not dbar >= _EXPANSION_MIN_DEGREE:
        raise DomainError(f"expansion requires dbar >= {_EXPANSION_MIN_DEGREE}")


def xi_second_coefficient(r: int) -> float:
    """Coefficient of dbar*e^(-2*dbar) in the two-term xi expansion."""
    return 2.0 if r == 2 else 1.0


def xi_expansion(r: int, dbar: float) -> float:
    """Two-term large-degree expansion of xi:
    e^-dbar + dbar*e^(-2 dbar) for r >= 3, with the second coefficient
    doubled for r = 2.  Also used to seed the offset solver."""
    _check_expansion_domain(r, dbar)
    return math.exp(-dbar) + xi_second_coefficient(r) * dbar * math.exp(-2.0 * dbar)


def _expm1_minus_x(x: float) -> float:
    """exp(x) - 1 - x for small |x|, to full relative precision."""
    return x * x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)))


def xi_expansion_gap(r: int, dbar: float) -> float:
    """xi - xi_expansion(r, dbar), evaluated without cancellation.

    With w = log(xi) + dbar the gap equals
        e^-dbar * ((e^w - 1 - w) + (w - c_r*dbar*e^-dbar)),
    and both brackets are computed from multiplicative small-term formulas,
    so the result keeps ~14 significant digits even where it is far below
    one ulp of xi.  The true gap is Theta(dbar^2 e^(-3 dbar)); its leading
    constant is 3/2 + 1/dbar-corrections for r >= 3 but 6 - 2/dbar for
    r = 2, which is worth knowing before asserting bounds against it.
    """
    _check_expansion_domain(r, dbar)
    w = _solve_w_dbar(r, dbar)
    xi = math.exp(w - dbar)
    emw = math.exp(-w)
    if r == 2:
        # w - 2*dbar*e^-dbar = dbar*xi*M/(1-xi^2), M free of cancellation
        m = 2.0 * (-math.expm1(-w) - xi * (1.0 - xi * emw))
    else:
        m = -math.expm1(-w) + xi ** (r - 2) * (1.0 - 2.0 * xi + xi * xi * emw)
    u = dbar * xi * m / (1.0 - xi**r)
    return math.exp(-dbar) * (_expm1_minus_x(w) + u)
