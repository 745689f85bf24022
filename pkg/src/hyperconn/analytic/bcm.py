"""Bender-Canfield-McKay connectivity formula for graphs (r = 2).

Published form: with x = m/s > 1 and y = y(x) the positive root of
2xy = log((1+y)/(1-y)),

    P(s, m) ~ exp(a(x)) * (2 e^-x y^(1-x) / sqrt(1-y^2))^s,
    a(x) = x(x+1)(1-y) + log(1-x+xy) - log(1-x+xy^2)/2.

This is an independent route to the same asymptotics as the general-r
formulas: exp(a(x)) equals conn_prefactor(2, 2x), the per-vertex log factor
equals -conn_rate(2, 2x), and y = (1-xi)/(1+xi).  Those identities are
exact, not asymptotic, and the test suite pins them to 1e-9/1e-10.

Internally everything is solved in z = 1 - y: past x ~ 18, y is within one
double ulp of 1 while z ~ 2e^-2x remains perfectly representable, and every
formula piece (1-y, 1-x+xy = 1-xz, 1-y^2 = z(2-z), log y = log1p(-z)) is a
stable function of z.
"""

from __future__ import annotations

import math

from ..errors import DomainError

_V_TOL = 1e-15
_MAX_ITER = 200


def _solve_v(x: float) -> float:
    """Positive root of v = x * tanh(v), where v = atanh(y).

    v/tanh(v) is strictly increasing from 1, so bisection on [eps, x] is
    safe (v < x since tanh < 1); Newton-free because tanh saturates exactly
    to 1.0 past v ~ 19 and the map becomes the identity there.
    """
    if not x > 1.0:
        raise DomainError(f"edge ratio x = m/s must exceed 1, got {x!r}")
    lo, hi = 1e-12, x
    for _ in range(_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid / math.tanh(mid) < x:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _V_TOL * hi:
            break
    return 0.5 * (lo + hi)


def _y_z(x: float) -> tuple[float, float]:
    """(y, z=1-y); z via 2/(e^2v + 1) so it never collapses to 0."""
    v = _solve_v(x)
    y = math.tanh(v)
    if 2.0 * v > 700.0:
        z = 2.0 * math.exp(-2.0 * v)
    else:
        z = 2.0 / (math.exp(2.0 * v) + 1.0)
    return y, z


def bcm_y(x: float) -> float:
    """Root y in (0,1) of 2xy = log((1+y)/(1-y)); equals (1-xi)/(1+xi) at
    the r=2 fixed point with dbar = 2x.  Saturates to 1.0 in double
    precision for x beyond ~18 (as does the identity's right side)."""
    return _y_z(x)[0]


def bcm_a(x: float) -> float:
    """Prefactor exponent a(x); exp(bcm_a(x)) = conn_prefactor(2, 2x)."""
    y, z = _y_z(x)
    return (
        x * (x + 1.0) * z
        + math.log1p(-x * z)
        - 0.5 * math.log1p(-x * z * (2.0 - z))
    )


def bcm_log_term(x: float) -> float:
    """Per-vertex log factor log(2 e^-x y^(1-x) / sqrt(1-y^2));
    equals -conn_rate(2, 2x)."""
    y, z = _y_z(x)
    return (
        math.log(2.0)
        - x
        + (1.0 - x) * math.log1p(-z)
        - 0.5 * (math.log(z) + math.log(2.0 - z))
    )


def bcm_log_p(s: int, m: int) -> float:
    """log of the connectivity probability estimate a(x) + s*log_term(x),
    x = m/s.  The published result assumes m - s -> infinity; this evaluates
    pointwise and leaves the regime judgment to the caller."""
    if s < 2:
        raise DomainError(f"need s >= 2, got {s}")
    if m <= s:
        raise DomainError(f"need m > s for the r=2 formula, got m={m}, s={s}")
    x = m / s
    return bcm_a(x) + s * bcm_log_term(x)
