"""Exact arbitrary-precision counting of connected r-uniform hypergraphs.

C(s, m) counts connected m-edge r-uniform hypergraphs on s labeled vertices
(every vertex covered: an isolated vertex disconnects).  Desk-scale exact
values are the ground truth that the asymptotic formulas are validated
against, computed two independent ways:

* a vertex-deletion recurrence over the component of vertex 1 (fast,
  memoized, big-int exact), and
* brute-force enumeration of all m-subsets of the edge universe with a
  union-find connectivity test (slow, unimpeachable).

Table files are line-oriented text with a fixed header so sweeps can reuse
a table across runs bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .errors import BudgetError, DomainError
from .analytic.fixed_point import check_uniformity

#: Default recurrence budget (max s) per uniformity; configuration, not a law.
DEFAULT_S_BUDGET = {2: 40, 3: 20}
DEFAULT_S_BUDGET_HIGHER = 14

#: Brute force enumerates C(C(s,r), m) subsets; keep it honest.
DEFAULT_ENUM_BUDGET = 10**8

FILE_FORMAT = "hyperconn-counts v1"


def total_count(r: int, s: int, m: int) -> int:
    """Exact number of m-edge r-uniform hypergraphs on s labeled vertices:
    C(C(s,r), m)."""
    check_uniformity(r)
    if s < 1:
        raise DomainError(f"s must be >= 1, got {s}")
    n_edges = math.comb(s, r)
    if m < 0 or m > n_edges:
        raise DomainError(f"m={m} outside [0, {n_edges}] for s={s}, r={r}")
    return math.comb(n_edges, m)


@dataclass(frozen=True)
class CountTable:
    """Exact connected counts for 1 <= s <= s_max and 0 <= m <= min(C(s,r),
    m_max).  ``m_max`` None means the full edge range."""

    r: int
    s_max: int
    m_max: int | None
    entries: dict = field(default_factory=dict)

    def get(self, s: int, m: int) -> int:
        if (s, m) not in self.entries:
            raise DomainError(
                f"(s={s}, m={m}) not in table (r={self.r}, s_max={self.s_max}, "
                f"m_max={self.m_max})"
            )
        return self.entries[(s, m)]

    def m_limit(self, s: int) -> int:
        n_edges = math.comb(s, self.r)
        return n_edges if self.m_max is None else min(n_edges, self.m_max)


def exact_connected_table(
    r: int,
    s_max: int,
    m_max: int | None = None,
    *,
    s_budget: int | None = None,
) -> CountTable:
    """Build the connected-count table by the component-of-vertex-1
    recurrence:

        C(s,m) = C(N(s), m)
                 - sum_{j=1}^{s-1} C(s-1, j-1) * sum_i C(j,i) * C(N(s-j), m-i),

    where N(t) = C(t, r).  The subtracted sum splits off the component
    containing vertex 1 (j vertices, i edges) and leaves the rest
    unconstrained.  All arithmetic exact.

    Restricting to m <= m_max is closed under the recurrence and keeps the
    r=2, s=40 sweep table in seconds instead of minutes.
    """
    check_uniformity(r)
    if s_max < 1:
        raise DomainError(f"s_max must be >= 1, got {s_max}")
    budget = s_budget if s_budget is not None else DEFAULT_S_BUDGET.get(r, DEFAULT_S_BUDGET_HIGHER)
    if s_max > budget:
        raise BudgetError(
            f"s_max={s_max} exceeds budget {budget} for r={r}; pass s_budget to raise it"
        )
    comb = math.comb
    entries: dict[tuple[int, int], int] = {(1, 0): 1}
    # rows[j] = list of (i, C(j,i)) with nonzero C, for the inner sums
    rows: dict[int, list[tuple[int, int]]] = {1: [(0, 1)]}
    for s in range(2, s_max + 1):
        n_edges = comb(s, r)
        hi = n_edges if m_max is None else min(n_edges, m_max)
        row = []
        for m in range(hi + 1):
            sub = 0
            for j in range(1, s):
                cj = comb(s - 1, j - 1)
                n_rest = comb(s - j, r)
                acc = 0
                for i, cji in rows[j]:
                    if i > m:
                        break
                    acc += cji * comb(n_rest, m - i)
                sub += cj * acc
            val = comb(n_edges, m) - sub
            entries[(s, m)] = val
            if val:
                row.append((m, val))
        rows[s] = row
    return CountTable(r=r, s_max=s_max, m_max=m_max, entries=entries)


def brute_force_connected(
    r: int, s: int, m: int, *, enum_budget: int = DEFAULT_ENUM_BUDGET
) -> int:
    """Count connected hypergraphs by enumerating every m-subset of the edge
    universe and testing spanning connectivity via bitmask closure.

    Completely independent of the recurrence; the enumeration size
    C(C(s,r), m) is checked against ``enum_budget`` first.
    """
    check_uniformity(r)
    if s < 1:
        raise DomainError(f"s must be >= 1, got {s}")
    n_edges = math.comb(s, r)
    if m < 0 or m > n_edges:
        raise DomainError(f"m={m} outside [0, {n_edges}]")
    if math.comb(n_edges, m) > enum_budget:
        raise BudgetError(
            f"C({n_edges},{m}) = {math.comb(n_edges, m)} exceeds enumeration "
            f"budget {enum_budget}"
        )
    if m == 0:
        return 1 if s == 1 else 0
    masks = [sum(1 << v for v in e) for e in combinations(range(s), r)]
    full = (1 << s) - 1
    count = 0
    for subset in combinations(masks, m):
        cover = 1  # grow from vertex 0
        pending = list(subset)
        changed = True
        while changed:
            changed = False
            rest = []
            for em in pending:
                if em & cover:
                    cover |= em
                    changed = True
                else:
                    rest.append(em)
            pending = rest
        if cover == full:
            count += 1
    return count


def exact_log_p(table: CountTable, s: int, m: int) -> float:
    """log(C(s,m) / C(N,m)) from exact integers; relative error is that of
    log on a big int (~1e-15).  Raises DomainError when the connected count
    is zero (log undefined) or the entry is missing."""
    c = table.get(s, m)
    if c == 0:
        raise DomainError(f"C(s={s}, m={m}) = 0; log probability undefined")
    return math.log(c) - math.log(total_count(table.r, s, m))


# ---------------------------------------------------------------------------
# Table persistence
# ---------------------------------------------------------------------------

def dump_table(table: CountTable) -> str:
    """Serialize to the versioned line format: header then `s m C` lines in
    (s, m) order, exact decimal, newline-terminated; bit-exact everywhere."""
    header = f"{FILE_FORMAT} r={table.r} s_max={table.s_max}"
    if table.m_max is not None:
        header += f" m_max={table.m_max}"
    lines = [header]
    for (s, m) in sorted(table.entries):
        lines.append(f"{s} {m} {table.entries[(s, m)]}")
    return "\n".join(lines) + "\n"


def save_table(table: CountTable, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dump_table(table))


def parse_table(text: str) -> CountTable:
    lines = text.splitlines()
    if not lines:
        raise DomainError("empty count table")
    head = lines[0].split()
    if " ".join(head[:2]) != FILE_FORMAT or len(head) < 4:
        raise DomainError(f"bad count table header: {lines[0]!r}")
    fields = dict(tok.split("=", 1) for tok in head[2:])
    r = int(fields["r"])
    s_max = int(fields["s_max"])
    m_max = int(fields["m_max"]) if "m_max" in fields else None
    entries = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        s_str, m_str, c_str = line.split()
        entries[(int(s_str), int(m_str))] = int(c_str)
    return CountTable(r=r, s_max=s_max, m_max=m_max, entries=entries)


def load_table(path) -> CountTable:
    with open(path, "r", encoding="ascii") as fh:
        return parse_table(fh.read())
