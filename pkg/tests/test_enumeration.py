"""Exact counting: recurrence vs brute force vs closed forms."""

import math

import pytest

from hyperconn import enumeration as en
from hyperconn.branching import tree_count
from hyperconn.errors import BudgetError, DomainError


def comb_by_factorials(n, k):
    # independent binomial for cross-checking total_count
    return math.factorial(n) // (math.factorial(k) * math.factorial(n - k))


def test_total_count_values():
    assert en.total_count(2, 3, 2) == 3
    assert en.total_count(3, 4, 2) == 6
    assert en.total_count(2, 10, 20) == comb_by_factorials(45, 20)


def test_total_count_domain():
    with pytest.raises(DomainError):
        en.total_count(2, 4, 7)
    with pytest.raises(DomainError):
        en.total_count(2, 4, -1)


def test_brute_force_values():
    assert en.brute_force_connected(2, 2, 1) == 1
    assert en.brute_force_connected(2, 4, 6) == 1  # complete graph
    assert en.brute_force_connected(3, 5, 2) == 15
    assert en.brute_force_connected(2, 1, 0) == 1
    assert en.brute_force_connected(2, 3, 0) == 0


def test_brute_force_budget():
    with pytest.raises(BudgetError):
        en.brute_force_connected(2, 10, 20, enum_budget=10**6)


def test_recurrence_small_values():
    t = en.exact_connected_table(2, 4)
    assert t.get(1, 0) == 1
    assert t.get(3, 2) == 3
    assert t.get(4, 3) == 16
    assert t.get(4, 2) == 0  # two edges cannot span four vertices
    t3 = en.exact_connected_table(3, 4)
    assert t3.get(4, 2) == 6


@pytest.mark.parametrize("r,s_hi", [(2, 5), (3, 5)])
def test_recurrence_vs_brute_force(r, s_hi):
    table = en.exact_connected_table(r, s_hi)
    for s in range(1, s_hi + 1):
        for m in range(math.comb(s, r) + 1):
            assert table.get(s, m) == en.brute_force_connected(r, s, m), (s, m)


def test_tree_column_matches_tree_count():
    t2 = en.exact_connected_table(2, 7)
    for s in range(2, 8):
        assert t2.get(s, s - 1) == tree_count(2, s - 1)
    t3 = en.exact_connected_table(3, 7)
    for s in (3, 5, 7):
        assert t3.get(s, (s - 1) // 2) == tree_count(3, (s - 1) // 2)


def test_recurrence_residual_zero():
    # re-adding the component-of-vertex-1 decomposition reproduces the
    # unrestricted count exactly
    r, s_max = 2, 6
    table = en.exact_connected_table(r, s_max)
    for s in range(2, s_max + 1):
        n_edges = math.comb(s, r)
        for m in range(n_edges + 1):
            total = 0
            for j in range(1, s + 1):
                cj = math.comb(s - 1, j - 1)
                rest = math.comb(s - j, r)
                for i in range(min(m, math.comb(j, r)) + 1):
                    total += table.get(j, i) * cj * math.comb(rest, m - i)
            assert total == math.comb(n_edges, m), (s, m)


def test_monotone_connectivity_in_m():
    table = en.exact_connected_table(2, 6)
    s = 6
    n_edges = math.comb(s, 2)
    for m in range(n_edges):
        # P(m+1) >= P(m) via exact cross-multiplication
        lhs = table.get(s, m + 1) * math.comb(n_edges, m)
        rhs = table.get(s, m) * math.comb(n_edges, m + 1)
        assert lhs >= rhs


def test_exact_log_p():
    table = en.exact_connected_table(2, 5)
    assert en.exact_log_p(table, 3, 2) == 0.0
    assert en.exact_log_p(table, 4, 3) == pytest.approx(math.log(16 / 20), rel=1e-14)
    with pytest.raises(DomainError):
        en.exact_log_p(table, 4, 2)  # zero count
    with pytest.raises(DomainError):
        en.exact_log_p(table, 9, 5)  # missing entry


def test_m_capped_table_consistent():
    full = en.exact_connected_table(2, 6)
    capped = en.exact_connected_table(2, 6, m_max=4)
    for (s, m), value in capped.entries.items():
        assert value == full.get(s, m)
    assert capped.m_limit(6) == 4
    with pytest.raises(DomainError):
        capped.get(6, 9)


def test_budget_and_override():
    with pytest.raises(BudgetError):
        en.exact_connected_table(2, 41)
    with pytest.raises(BudgetError):
        en.exact_connected_table(4, 15)
    t = en.exact_connected_table(4, 5, s_budget=5)
    assert t.get(5, 1) == 0
    assert t.get(5, 2) > 0


def test_table_roundtrip_bit_exact(tmp_path):
    table = en.exact_connected_table(3, 6, m_max=8)
    text = en.dump_table(table)
    assert text.splitlines()[0] == "hyperconn-counts v1 r=3 s_max=6 m_max=8"
    again = en.parse_table(text)
    assert again.entries == table.entries
    assert en.dump_table(again) == text
    path = tmp_path / "counts.txt"
    en.save_table(table, path)
    assert en.load_table(path).entries == table.entries
    assert en.dump_table(en.load_table(path)) == text


def test_parse_rejects_garbage():
    with pytest.raises(DomainError):
        en.parse_table("not a table\n1 2 3\n")
    with pytest.raises(DomainError):
        en.parse_table("")
