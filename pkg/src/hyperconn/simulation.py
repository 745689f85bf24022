"""Seeded samplers for random r-uniform hypergraphs and component analysis.

Two models: the binomial model (every r-set an edge independently with
probability p) and the uniform fixed-edge-count model (a uniform m-subset
of the C(n,r) possible edges).  Component analysis reports the largest
component's vertex and edge counts, a small tree-component census, and
structure indicators; batches of trials aggregate these with exact integer
sums so results are byte-identical regardless of worker count.

Reproducibility.  Every stochastic entry point takes either an explicit
numpy Generator or a master seed.  Batch trial i draws from the stream
PCG64(SeedSequence(master_seed, spawn_key=(0, i))) -- documented as
algorithm id "pcg64-seedseq-v1" in all exports -- so any subset of trials
can be recomputed independently and parallel scheduling cannot change
results.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numba import njit
from numpy.random import PCG64, Generator, SeedSequence

from ._version import __version__
from .errors import BudgetError, DomainError
from .analytic.fixed_point import check_uniformity
from .analytic.formulas import llt_parameters

RNG_ALGORITHM = "pcg64-seedseq-v1"
_STREAM_TRIAL = 0  # spawn_key namespace for per-trial streams

#: Complement sampling materializes the whole edge universe.
_COMPLEMENT_UNIVERSE_CAP = 2 * 10**6


def trial_rng(master_seed: int, trial_index: int) -> Generator:
    """The per-trial stream; the only randomness derivation in the package."""
    return Generator(PCG64(SeedSequence(master_seed, spawn_key=(_STREAM_TRIAL, trial_index))))


# ---------------------------------------------------------------------------
# Hypergraphs and sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Hypergraph:
    """n vertices labeled 0..n-1 and an (m, r) array of edges, each row a
    strictly increasing vertex tuple; rows pairwise distinct."""

    n: int
    r: int
    edges: np.ndarray

    def validate(self) -> None:
        e = self.edges
        if e.ndim != 2 or e.shape[1] != self.r:
            raise DomainError(f"edge array must be (m, {self.r}), got {e.shape}")
        if e.size:
            if e.min() < 0 or e.max() >= self.n:
                raise DomainError("edge vertex out of range")
            if not (np.diff(e, axis=1) > 0).all():
                raise DomainError("edge rows must be strictly increasing")
            if len({tuple(row) for row in e.tolist()}) != e.shape[0]:
                raise DomainError("duplicate edges")

    def edge_set(self) -> set:
        return {tuple(row) for row in self.edges.tolist()}


def p_from_d(r: int, n: int, d: float) -> float:
    """Edge probability p = d (r-1)! / n^(r-1) giving expected vertex degree
    p*C(n-1, r-1) = d(1+O(1/n)).  Rejects p outside [0, 1].
    """
    check_uniformity(r)
    if n < r:
        raise DomainError(f"need n >= r, got n={n}")
    if d < 0.0:
        raise DomainError(f"d must be >= 0, got {d}")
    p = d * math.factorial(r - 1) / float(n) ** (r - 1)
    if p > 1.0:
        raise DomainError(f"p = {p} > 1 at r={r}, n={n}, d={d}")
    return p


def _code_shift(n: int, r: int) -> int:
    """Bits per vertex for shift-packed edge codes, or 0 when r vertices do
    not fit in 62 bits and base-n packing must be used instead."""
    bits = max(1, (n - 1).bit_length())
    return bits if r * bits <= 62 else 0


def _pack(cols, n: int, r: int) -> np.ndarray:
    bits = _code_shift(n, r)
    codes = cols[0].copy()
    for col in cols[1:]:
        if bits:
            codes <<= bits
            codes |= col
        else:
            codes *= n
            codes += col
    return codes


def _candidate_codes(cand: np.ndarray, n: int, r: int) -> np.ndarray:
    """Sorted-tuple codes of the rows of ``cand`` whose vertices are all
    distinct (invalid rows dropped); one masked copy total."""
    if r == 2:
        a = np.minimum(cand[:, 0], cand[:, 1])
        b = np.maximum(cand[:, 0], cand[:, 1])
        return _pack([a, b], n, r)[a != b]
    if r == 3:
        a = np.minimum(np.minimum(cand[:, 0], cand[:, 1]), cand[:, 2])
        c = np.maximum(np.maximum(cand[:, 0], cand[:, 1]), cand[:, 2])
        b = cand[:, 0] + cand[:, 1] + cand[:, 2] - a - c
        return _pack([a, b, c], n, r)[(a != b) & (b != c)]
    srt = np.sort(cand, axis=1)
    ok = (np.diff(srt, axis=1) > 0).all(axis=1)
    return _pack([srt[:, j] for j in range(r)], n, r)[ok]


def _decode(codes: np.ndarray, n: int, r: int) -> np.ndarray:
    bits = _code_shift(n, r)
    out = np.empty((codes.size, r), dtype=np.int64)
    rest = codes
    for j in range(r - 1, -1, -1):
        if bits:
            out[:, j] = rest & ((1 << bits) - 1)
            rest = rest >> bits
        else:
            out[:, j] = rest % n
            rest = rest // n
    return out


def _sample_distinct_codes(r: int, n: int, m: int, rng: Generator) -> np.ndarray:
    """Uniform m-subset of the edge universe as distinct int64 codes.

    Rejection sampling in rounds: each round draws exactly as many
    candidates as still needed and accepts every *new distinct* valid
    r-set.  Accepting the whole set of new values (rather than a prefix)
    keeps the outcome identical in distribution to one-at-a-time rejection,
    because no round can overshoot.  The first (bulk) round stays sorted
    for fast membership checks; later rounds are a handful of values.
    """
    if float(n) ** r >= 2**63:
        raise DomainError(f"edge codes for n={n}, r={r} exceed int64")
    if m == 0:
        return np.empty(0, dtype=np.int64)
    base = np.empty(0, dtype=np.int64)
    extras: list = []
    count = 0
    while count < m:
        cand = rng.integers(0, n, size=(m - count, r), dtype=np.int64)
        codes = np.unique(_candidate_codes(cand, n, r))
        if base.size:
            pos = np.searchsorted(base, codes)
            pos[pos == base.size] = base.size - 1
            codes = codes[base[pos] != codes]
            for prev in extras:
                if prev.size and codes.size:
                    codes = codes[~np.isin(codes, prev)]
            extras.append(codes)
        else:
            base = codes
        count = base.size + sum(part.size for part in extras)
    if not extras:
        return base
    return np.concatenate([base] + extras)


def _universe_codes(r: int, n: int) -> np.ndarray:
    n_edges = math.comb(n, r)
    if n_edges > _COMPLEMENT_UNIVERSE_CAP:
        raise BudgetError(
            f"complement sampling would materialize {n_edges} edges "
            f"(cap {_COMPLEMENT_UNIVERSE_CAP})"
        )
    arr = np.fromiter(
        (e for tup in combinations(range(n), r) for e in tup),
        dtype=np.int64,
        count=n_edges * r,
    ).reshape(n_edges, r)
    return _pack([arr[:, j] for j in range(r)], n, r)


def _sample_m_edges(r: int, n: int, m: int, rng: Generator) -> np.ndarray:
    n_edges = math.comb(n, r)
    if m > n_edges // 2 and m < n_edges:
        universe = _universe_codes(r, n)
        drop = _sample_distinct_codes(r, n, n_edges - m, rng)
        codes = np.setdiff1d(universe, drop, assume_unique=True)
    elif m == n_edges:
        codes = _universe_codes(r, n)
    else:
        codes = _sample_distinct_codes(r, n, m, rng)
    return _decode(codes, n, r)


def sample_gnp(r: int, n: int, p: float, rng: Generator) -> Hypergraph:
    """Binomial model: edge count ~ Binomial(C(n,r), p), then a uniform
    set of that many distinct edges (exactly the product measure)."""
    check_uniformity(r)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0,1], got {p}")
    if n < r:
        raise DomainError(f"need n >= r, got n={n}")
    n_edges = math.comb(n, r)
    if n_edges >= 2**63:
        raise DomainError(f"C(n,r) = {n_edges} not representable in 64 bits")
    m = int(rng.binomial(n_edges, p))
    return Hypergraph(n=n, r=r, edges=_sample_m_edges(r, n, m, rng))


def sample_gsm(r: int, s: int, m: int, rng: Generator) -> Hypergraph:
    """Uniform model: a uniformly random m-subset of the C(s,r) edges."""
    check_uniformity(r)
    if s < r:
        raise DomainError(f"need s >= r, got s={s}")
    n_edges = math.comb(s, r)
    if m < 0 or m > n_edges:
        raise DomainError(f"m={m} outside [0, {n_edges}]")
    return Hypergraph(n=s, r=r, edges=_sample_m_edges(r, s, m, rng))


# ---------------------------------------------------------------------------
# Component analysis
# ---------------------------------------------------------------------------

@njit(cache=True)
def _component_arrays_from_codes(codes, n, r, bits):  # pragma: no cover - jitted
    """Union-find over packed edge codes; the r vertices of each edge are
    unpacked inline (shift/mask, or divmod in the base-n fallback) to avoid
    materializing the edge matrix.  Union by smaller root index keeps each
    root the component minimum, so ascending roots realize the
    deterministic largest-component tie rule."""
    parent = np.arange(n, dtype=np.int64)
    m = codes.shape[0]
    first = np.empty(m, dtype=np.int64)
    mask = (np.int64(1) << bits) - np.int64(1)
    for i in range(m):
        rest = codes[i]
        a = np.int64(-1)
        for j in range(r):
            if bits:
                v = rest & mask
                rest >>= bits
            else:
                v = rest % n
                rest //= n
            if j == r - 1:
                first[i] = v  # highest digits = smallest vertex of the edge
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            if a == -1 or a == v:
                a = v
            elif a < v:
                parent[v] = a
            else:
                parent[a] = v
                a = v
    for v in range(n):
        x = v
        while parent[x] != x:
            x = parent[x]
        parent[v] = x
    nv = np.zeros(n, dtype=np.int64)
    ne = np.zeros(n, dtype=np.int64)
    for v in range(n):
        nv[parent[v]] += 1
    for i in range(m):
        ne[parent[first[i]]] += 1
    roots = np.flatnonzero(parent == np.arange(n))
    return nv[roots], ne[roots]


def _component_arrays_py(edges: np.ndarray, n: int, r: int):
    """Reference implementation of the numba kernel: union by smaller root
    index (so each root is its component's minimum vertex) with path
    halving; roots come out in ascending order on both paths."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for row in edges.tolist():
        a = find(row[0])
        for j in range(1, r):
            b = find(row[j])
            if a == b:
                continue
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
                a = b
    roots = [find(v) for v in range(n)]
    nv = [0] * n
    ne = [0] * n
    for root in roots:
        nv[root] += 1
    for row in edges.tolist():
        ne[roots[row[0]]] += 1
    ids = [v for v in range(n) if roots[v] == v]
    return (
        np.array([nv[v] for v in ids], dtype=np.int64),
        np.array([ne[v] for v in ids], dtype=np.int64),
    )


@dataclass(frozen=True)
class ComponentSummary:
    """Per-hypergraph component census.

    The largest component is the one with the most vertices; among ties,
    the one containing the smallest vertex index (deterministic rule, and
    what the ascending-root representation yields for free).  A component
    with v vertices and e edges is a tree iff v = 1 + (r-1)e.  "Small"
    means at most k_cap*(r-1)+1 vertices; mid_size counts components above
    that and at most n/2 vertices.
    """

    n: int
    r: int
    k_cap: int
    l1: int
    m1: int
    component_sizes: tuple
    tree_counts: dict
    non_tree_small_count: int
    isolated_count: int
    mid_size_count: int

    def has_midsize_nongiant(self, lower: int) -> bool:
        """Any component other than the largest with size in (lower, n/2]."""
        seen_giant = False
        for size in self.component_sizes:  # descending
            if size == self.l1 and not seen_giant:
                seen_giant = True
                continue
            if size <= lower:
                return False
            if size <= self.n // 2:
                return True
        return False


def _summary_from_arrays(n, r, k_cap, comp_v, comp_e) -> ComponentSummary:
    l1 = int(comp_v.max())
    giant = int(np.argmax(comp_v == l1))  # first root, i.e. smallest vertex
    m1 = int(comp_e[giant])
    is_tree = comp_v == 1 + (r - 1) * comp_e
    tree_counts = {}
    for k in range(k_cap + 1):
        tree_counts[k] = int(np.count_nonzero(is_tree & (comp_e == k)))
    small_cap = k_cap * (r - 1) + 1
    small = comp_v <= small_cap
    return ComponentSummary(
        n=n,
        r=r,
        k_cap=k_cap,
        l1=l1,
        m1=m1,
        component_sizes=tuple(sorted(comp_v.tolist(), reverse=True)),
        tree_counts=tree_counts,
        non_tree_small_count=int(np.count_nonzero(small & ~is_tree)),
        isolated_count=int(np.count_nonzero(comp_v == 1)),
        mid_size_count=int(np.count_nonzero((comp_v > small_cap) & (comp_v <= n // 2))),
    )


def components(h: Hypergraph, k_cap: int = 20, *, fast: bool = False) -> ComponentSummary:
    """Component census of a hypergraph; ``fast`` switches the union-find to
    the compiled kernel (identical output; the pure-Python path is the
    reference the tests compare against)."""
    if k_cap < 0:
        raise DomainError(f"k_cap must be >= 0, got {k_cap}")
    edges = np.ascontiguousarray(h.edges, dtype=np.int64)
    if fast:
        if float(h.n) ** h.r >= 2**63:
            raise DomainError(f"fast path needs n^r < 2^63, got n={h.n}, r={h.r}")
        codes = _pack([edges[:, j] for j in range(h.r)], h.n, h.r)
        comp_v, comp_e = _component_arrays_from_codes(
            codes, h.n, h.r, _code_shift(h.n, h.r)
        )
    else:
        comp_v, comp_e = _component_arrays_py(edges, h.n, h.r)
    return _summary_from_arrays(h.n, h.r, k_cap, comp_v, comp_e)


# ---------------------------------------------------------------------------
# Trial batches
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BatchParams:
    """Parameters of a Monte Carlo batch.

    model 'gnp' uses (n, d): p = d(r-1)!/n^(r-1), per-trial edge count
    binomial.  model 'gsm' uses (n, m): exactly m uniform edges per trial.
    ``midsize_lo`` defaults to ceil(1000*log(n)/degree), the size scale
    above which non-giant components should essentially never occur in the
    supercritical regime.  ``block_size`` only groups trials into work
    units; per-trial seeding makes results independent of it and of
    ``threads``.
    """

    model: str
    r: int
    n: int
    trials: int
    master_seed: int
    d: float | None = None
    m: int | None = None
    k_cap: int = 20
    midsize_lo: int | None = None
    threads: int = 1
    block_size: int = 256

    def degree(self) -> float:
        if self.model == "gnp":
            return float(self.d)
        return self.r * self.m / self.n

    def resolved_midsize_lo(self) -> int:
        if self.midsize_lo is not None:
            return self.midsize_lo
        return math.ceil(1000.0 * math.log(self.n) / self.degree())

    def validate(self) -> None:
        if self.model not in ("gnp", "gsm"):
            raise DomainError(f"model must be 'gnp' or 'gsm', got {self.model!r}")
        check_uniformity(self.r)
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.model == "gnp":
            if self.d is None:
                raise DomainError("gnp model requires d")
            p_from_d(self.r, self.n, self.d)
        else:
            if self.m is None:
                raise DomainError("gsm model requires m")
            if not 0 <= self.m <= math.comb(self.n, self.r):
                raise DomainError("m outside edge universe")
        if self.threads < 1 or self.block_size < 1:
            raise DomainError("threads and block_size must be >= 1")


@dataclass(frozen=True)
class TrialBatch:
    """Results of a batch: per-trial (l1, m1) plus exact-integer aggregates.

    Sums (and the binned joint counts) are integers, so aggregation order
    cannot perturb them; derived moments are computed once from the exact
    sums.  ``joint_bins`` maps rectangle indices to counts for gnp batches,
    with rectangles of side (sigma_l/2, sigma_m/2) centered on the analytic
    means (empty for gsm batches, where no analytic center is defined).
    """

    params: BatchParams
    l1: np.ndarray
    m1: np.ndarray
    sum_l: int
    sum_m: int
    sum_ll: int
    sum_mm: int
    sum_lm: int
    tree_census_sums: dict
    tree_census_sumsq: dict
    midsize_trials: int
    small_nontree_trials: int
    joint_bins: dict
    bin_center: tuple | None
    bin_width: tuple | None

    @property
    def trials(self) -> int:
        return self.params.trials

    def mean_l(self) -> float:
        return self.sum_l / self.trials

    def mean_m(self) -> float:
        return self.sum_m / self.trials

    def var_l(self) -> float:
        t = self.trials
        return (self.sum_ll - self.sum_l * self.sum_l / t) / (t - 1)

    def var_m(self) -> float:
        t = self.trials
        return (self.sum_mm - self.sum_m * self.sum_m / t) / (t - 1)

    def cov_lm(self) -> float:
        t = self.trials
        return (self.sum_lm - self.sum_l * self.sum_m / t) / (t - 1)


def _gnp_binomial_n(params: BatchParams) -> int:
    n_edges = math.comb(params.n, params.r)
    if n_edges >= 2**63:
        raise DomainError(f"C(n,r) = {n_edges} not representable in 64 bits")
    return n_edges


def _run_block(params: BatchParams, lo: int, hi: int) -> dict:
    """Worker for one block of trials [lo, hi); pure function of params."""
    r, n = params.r, params.n
    k_cap = params.k_cap
    midsize_lo = params.resolved_midsize_lo()
    if params.model == "gnp":
        n_edges = _gnp_binomial_n(params)
        p = p_from_d(r, n, params.d)
    bits = _code_shift(n, r)
    mu_sig = None
    if params.model == "gnp" and (r - 1) * params.d > 1.0:
        pars = llt_parameters(r, n, params.d)
        mu_sig = (pars.mu_l, pars.mu_m, 0.5 * math.sqrt(pars.var_l), 0.5 * math.sqrt(pars.var_m))
    count = hi - lo
    l1 = np.empty(count, dtype=np.int64)
    m1 = np.empty(count, dtype=np.int64)
    census = dict.fromkeys(range(k_cap + 1), 0)
    census_sq = dict.fromkeys(range(k_cap + 1), 0)
    midsize = 0
    small_nontree = 0
    bins: dict = {}
    for idx in range(lo, hi):
        rng = trial_rng(params.master_seed, idx)
        if params.model == "gnp":
            m_t = int(rng.binomial(n_edges, p))
        else:
            m_t = params.m
        codes = _sample_distinct_codes(r, n, m_t, rng)
        comp_v, comp_e = _component_arrays_from_codes(codes, n, r, bits)
        summary = _summary_from_arrays(n, r, k_cap, comp_v, comp_e)
        l1[idx - lo] = summary.l1
        m1[idx - lo] = summary.m1
        for k in range(k_cap + 1):
            tk = summary.tree_counts[k]
            census[k] += tk
            census_sq[k] += tk * tk
        if summary.has_midsize_nongiant(midsize_lo):
            midsize += 1
        if summary.non_tree_small_count > 0:
            small_nontree += 1
        if mu_sig is not None:
            bi = math.floor((summary.l1 - mu_sig[0]) / mu_sig[2] + 0.5)
            bj = math.floor((summary.m1 - mu_sig[1]) / mu_sig[3] + 0.5)
            bins[(bi, bj)] = bins.get((bi, bj), 0) + 1
    return {
        "l1": l1,
        "m1": m1,
        "census": census,
        "census_sq": census_sq,
        "midsize": midsize,
        "small_nontree": small_nontree,
        "bins": bins,
        "mu_sig": mu_sig,
    }


def run_batch(params: BatchParams) -> TrialBatch:
    """Run the batch; identical results for any threads/block_size because
    every trial owns the stream derived from (master_seed, trial index) and
    aggregation walks blocks in index order with integer arithmetic."""
    params.validate()
    t = params.trials
    blocks = [(lo, min(lo + params.block_size, t)) for lo in range(0, t, params.block_size)]
    if params.threads > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=params.threads) as pool:
            results = list(pool.map(_run_block, [params] * len(blocks),
                                    [b[0] for b in blocks], [b[1] for b in blocks]))
    else:
        results = [_run_block(params, lo, hi) for lo, hi in blocks]

    l1 = np.concatenate([res["l1"] for res in results])
    m1 = np.concatenate([res["m1"] for res in results])
    census = dict.fromkeys(range(params.k_cap + 1), 0)
    census_sq = dict.fromkeys(range(params.k_cap + 1), 0)
    bins: dict = {}
    midsize = 0
    small_nontree = 0
    for res in results:
        for k, v in res["census"].items():
            census[k] += v
        for k, v in res["census_sq"].items():
            census_sq[k] += v
        for key, v in res["bins"].items():
            bins[key] = bins.get(key, 0) + v
        midsize += res["midsize"]
        small_nontree += res["small_nontree"]
    mu_sig = results[0]["mu_sig"]
    l1_int = [int(v) for v in l1]
    m1_int = [int(v) for v in m1]
    return TrialBatch(
        params=params,
        l1=l1,
        m1=m1,
        sum_l=sum(l1_int),
        sum_m=sum(m1_int),
        sum_ll=sum(v * v for v in l1_int),
        sum_mm=sum(v * v for v in m1_int),
        sum_lm=sum(a * b for a, b in zip(l1_int, m1_int)),
        tree_census_sums=census,
        tree_census_sumsq=census_sq,
        midsize_trials=midsize,
        small_nontree_trials=small_nontree,
        joint_bins=bins,
        bin_center=(mu_sig[0], mu_sig[1]) if mu_sig else None,
        bin_width=(mu_sig[2], mu_sig[3]) if mu_sig else None,
    )


def export_batch(batch: TrialBatch) -> str:
    """Deterministic JSON export: parameters, RNG identification, exact
    aggregate sums, derived moments, census means, and the joint bins.
    Per-trial arrays are deliberately not exported."""
    p = batch.params
    doc = {
        "format": "hyperconn-batch v1",
        "version": __version__,
        "rng_algorithm": RNG_ALGORITHM,
        "params": {
            "model": p.model,
            "r": p.r,
            "n": p.n,
            "trials": p.trials,
            "master_seed": p.master_seed,
            "d": p.d,
            "m": p.m,
            "k_cap": p.k_cap,
            "midsize_lo": p.resolved_midsize_lo(),
        },
        "sums": {
            "l": batch.sum_l,
            "m": batch.sum_m,
            "ll": batch.sum_ll,
            "mm": batch.sum_mm,
            "lm": batch.sum_lm,
        },
        "moments": {
            "mean_l": batch.mean_l(),
            "mean_m": batch.mean_m(),
            "var_l": batch.var_l(),
            "var_m": batch.var_m(),
            "cov_lm": batch.cov_lm(),
        },
        "tree_census_sums": {str(k): v for k, v in sorted(batch.tree_census_sums.items())},
        "tree_census_sumsq": {str(k): v for k, v in sorted(batch.tree_census_sumsq.items())},
        "midsize_trials": batch.midsize_trials,
        "small_nontree_trials": batch.small_nontree_trials,
        "bin_center": list(batch.bin_center) if batch.bin_center else None,
        "bin_width": list(batch.bin_width) if batch.bin_width else None,
        "joint_bins": [[i, j, c] for (i, j), c in sorted(batch.joint_bins.items())],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
