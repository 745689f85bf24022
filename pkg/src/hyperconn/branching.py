"""Galton-Watson process with Poisson(d) groups of r-1 children.

Viewed as a random r-uniform tree (one hyperedge per group, containing the
group and its parent), the process has vertices = 1 + (r-1)*edges.  The
probability of ending with exactly k edges has the closed form

    pmf(k) = s^(k-1) d^k e^(-d s) / k!,    s = 1 + (r-1)k,

equivalently (1/s) * P(Poisson(d s) = k) (a cycle-rotation identity).  The
total mass sum_k pmf(k) is the extinction probability xi(d), which is < 1
exactly when (r-1)d > 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotApplicableError
from .analytic.fixed_point import check_uniformity, solve_xi_from_d

#: Outcome marker for trajectories stopped at the edge cap.  Supercritical
#: trajectories are infinite with probability 1 - xi, so a cap is the only
#: way a simulation can terminate; -1 keeps batch results in plain int64
#: arrays.
CENSORED = -1

DEFAULT_EDGE_CAP = 10**6


def _check_dk(d: float, k: int) -> None:
    if not d > 0.0:
        raise DomainError(f"d must be positive, got {d!r}")
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")


def log_edge_pmf(r: int, d: float, k: int) -> float:
    """log of P(process tree has exactly k edges).

    Always formed in log space: the exponent d*s reaches thousands well
    before the pmf matters for tails.
    """
    check_uniformity(r)
    _check_dk(d, k)
    s = 1 + (r - 1) * k
    return (k - 1) * math.log(s) + k * math.log(d) - math.lgamma(k + 1) - d * s


def edge_pmf(r: int, d: float, k: int) -> float:
    """P(process tree has exactly k edges); e^-d at k = 0."""
    return math.exp(log_edge_pmf(r, d, k))


def tail_decay_threshold(r: int) -> float:
    """Smallest d with e*r*d*e^(-(r-1)d/2) <= 1, the validity edge of the
    geometric tail bound below.  Solved numerically; the defining function
    is decreasing past its maximum at d = 2/(r-1)."""
    check_uniformity(r)
    f = lambda d: math.e * r * d * math.exp(-0.5 * (r - 1) * d)
    lo = 2.0 / (r - 1)
    if f(lo) <= 1.0:
        return lo
    hi = lo
    while f(hi) > 1.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return hi


def tail_bound(r: int, d: float, k_from: int) -> float:
    """Upper bound on sum_{k >= k_from} pmf(k) via pmf(k) <= e^(-d(s+1)/2):
    a geometric series with ratio e^(-d(r-1)/2).

    Only valid for d >= tail_decay_threshold(r); below it raises
    NotApplicableError.
    """
    check_uniformity(r)
    _check_dk(d, k_from)
    if d < tail_decay_threshold(r):
        raise NotApplicableError(
            f"tail bound needs d >= {tail_decay_threshold(r):.6g} for r={r}, got {d}"
        )
    log_q = -0.5 * d * (r - 1)
    return math.exp(-d + k_from * log_q) / (-math.expm1(log_q))


@dataclass(frozen=True)
class PointMassTable:
    """pmf values for k = 0..k_max in log space plus a tail bound (None when
    d is below the geometric-bound threshold)."""

    r: int
    d: float
    k_max: int
    log_pmf: np.ndarray
    tail: float | None

    @property
    def pmf(self) -> np.ndarray:
        return np.exp(self.log_pmf)


def pmf_table(r: int, d: float, k_max: int) -> PointMassTable:
    logs = np.array([log_edge_pmf(r, d, k) for k in range(k_max + 1)])
    try:
        tail = tail_bound(r, d, k_max + 1)
    except NotApplicableError:
        tail = None
    return PointMassTable(r=r, d=float(d), k_max=k_max, log_pmf=logs, tail=tail)


def extinction_partial_sum(r: int, d: float, k_max: int) -> tuple[float, float]:
    """(sum_{k <= k_max} pmf(k), xi from the fixed-point solver).

    The partial sum increases to xi; with the tail bound applicable the
    sandwich sum <= xi <= sum + tail_bound(k_max+1) is tight.
    """
    check_uniformity(r)
    total = 0.0
    for k in range(k_max + 1):
        total += edge_pmf(r, d, k)
    return total, solve_xi_from_d(r, d).xi


def negative_size_moment(r: int, d: float) -> float:
    """E[1/vertices] of the tree in the subcritical case: 1 - (r-1)d/r.

    Cross-checked numerically against sum_k pmf(k)/s in the tests; requires
    (r-1)d < 1.
    """
    check_uniformity(r)
    if d < 0.0:
        raise DomainError(f"d must be >= 0, got {d}")
    if (r - 1) * d >= 1.0:
        raise DomainError(f"negative moment formula needs (r-1)d < 1, got d={d}")
    return 1.0 - (r - 1) * d / r


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def simulate(r: int, d: float, rng: np.random.Generator, edge_cap: int = DEFAULT_EDGE_CAP) -> int:
    """One trajectory of the sequential exploration; returns the edge count,
    or CENSORED once more than edge_cap edges have been generated.

    Individuals are explored one at a time; each contributes Poisson(d)
    groups of r-1 new individuals, and the walk stops when the explored
    count catches up with the prepared count.
    """
    check_uniformity(r)
    if not d > 0.0:
        raise DomainError(f"d must be positive, got {d!r}")
    if edge_cap < 1:
        raise DomainError(f"edge_cap must be >= 1, got {edge_cap}")
    explored, prepared, edges = 0, 1, 0
    while explored < prepared:
        a = int(rng.poisson(d))
        edges += a
        if edges > edge_cap:
            return CENSORED
        prepared += (r - 1) * a
        explored += 1
    return edges


def simulate_batch(
    r: int,
    d: float,
    trials: int,
    rng: np.random.Generator,
    edge_cap: int = DEFAULT_EDGE_CAP,
    block_cols: int = 32,
) -> np.ndarray:
    """Vectorized batch of trajectories; int64 array of edge counts with
    CENSORED entries for capped runs.

    Same stopping rule as simulate(), expressed as a first passage: with
    group counts a_1, a_2, ... the surplus Q_j = 1 + sum((r-1)a_i - 1) hits
    0 exactly when the tree is complete, and the edge total crossing the cap
    first censors the trial.  Group counts are drawn in blocks of
    ``block_cols`` per still-active trial, so the work per batch is a few
    dense Poisson panels rather than a Python loop per individual.
    """
    check_uniformity(r)
    if not d > 0.0:
        raise DomainError(f"d must be positive, got {d!r}")
    if trials < 0:
        raise DomainError(f"trials must be >= 0, got {trials}")
    if edge_cap < 1:
        raise DomainError(f"edge_cap must be >= 1, got {edge_cap}")
    out = np.empty(trials, dtype=np.int64)
    active = np.arange(trials)
    carry_q = np.ones(trials, dtype=np.int64)
    carry_e = np.zeros(trials, dtype=np.int64)
    while active.size:
        a = rng.poisson(d, size=(active.size, block_cols)).astype(np.int64)
        e = carry_e[active, None] + np.cumsum(a, axis=1)
        q = carry_q[active, None] + np.cumsum((r - 1) * a - 1, axis=1)
        finished = q == 0
        capped = e > edge_cap
        either = finished | capped
        resolved = either.any(axis=1)
        first = np.argmax(either, axis=1)
        rows = np.flatnonzero(resolved)
        cols = first[rows]
        idx = active[rows]
        out[idx] = np.where(capped[rows, cols], CENSORED, e[rows, cols])
        rest = np.flatnonzero(~resolved)
        carry_q[active[rest]] = q[rest, -1]
        carry_e[active[rest]] = e[rest, -1]
        active = active[rest]
    return out


# ---------------------------------------------------------------------------
# Tree counts
# ---------------------------------------------------------------------------

def tree_count(r: int, k: int) -> int:
    """Exact number of k-edge r-uniform trees on a fixed set of
    s = 1 + (r-1)k labeled vertices (Selivanov's count):

        s^(k-1) * (s-1)! / (k! * (r-1)!^k).

    Reduces to Cayley's s^(s-2) for r = 2.
    """
    check_uniformity(r)
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if k == 0:
        return 1
    s = 1 + (r - 1) * k
    num = s ** (k - 1) * math.factorial(s - 1)
    den = math.factorial(k) * math.factorial(r - 1) ** k
    q, rem = divmod(num, den)
    if rem:
        raise AssertionError("tree count formula must divide exactly")
    return q
