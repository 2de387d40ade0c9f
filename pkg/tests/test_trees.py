"""Ternary tree enumeration and structure queries."""

import math

import pytest

from mkdv_series import (
    TernaryTree,
    enumerate_trees,
    fuss_catalan,
    graft,
    node_level,
    odd_even_partition,
    split_subtrees,
)


def binom_count(k):
    # independent big-integer evaluation of C(3k, k) / (2k + 1)
    return math.factorial(3 * k) // (math.factorial(k) * math.factorial(2 * k)) // (2 * k + 1)


def test_census_small():
    assert len(enumerate_trees(0)) == 1
    assert len(enumerate_trees(1)) == 1
    assert len(enumerate_trees(2)) == 3
    assert len(enumerate_trees(3)) == 12
    assert len(enumerate_trees(4)) == 55


@pytest.mark.parametrize("k", range(7))
def test_census_matches_independent_formula(k):
    assert len(enumerate_trees(k)) == binom_count(k) == fuss_catalan(k)


@pytest.mark.parametrize("k", range(5))
def test_enumeration_valid_and_duplicate_free(k):
    trees = enumerate_trees(k)
    seen = set()
    for t in trees:
        s = t.to_string()
        assert s not in seen
        seen.add(s)
        assert t.internal_count == k
        assert t.size == 3 * k + 1
        assert len(t.leaves) == 2 * k + 1
        for v in range(t.size):
            ch = t.children[v]
            assert ch is None or len(ch) == 3
    assert trees == sorted(trees, key=lambda t: t.to_string())


def test_negative_k_rejected():
    with pytest.raises(ValueError):
        enumerate_trees(-1)


def test_node_levels():
    t = enumerate_trees(2)[0]  # root with first child internal
    assert node_level(t, 0) == 0
    for c in t.children[0]:
        assert node_level(t, c) == 1
    inner = t.children[0][0]
    for c in t.children[inner]:
        assert node_level(t, c) == 2
    with pytest.raises(ValueError):
        node_level(t, 99)


def test_odd_even_partition():
    k1 = enumerate_trees(1)[0]
    odd, even = odd_even_partition(k1)
    assert odd == set() and even == {0}
    for k in (2, 3, 4):
        for t in enumerate_trees(k):
            odd, even = odd_even_partition(t)
            assert odd | even == set(t.internal_nodes)
            assert odd & even == set()
            assert len(odd) + len(even) == k


def test_split_examples():
    k1 = enumerate_trees(1)[0]
    subs = split_subtrees(k1)
    assert all(s.size == 1 for s in subs)
    chain = TernaryTree.from_string("IILLLLL")
    t1, t2, t3 = split_subtrees(chain)
    assert t1.to_string() == "ILLL" and t2.to_string() == "L" and t3.to_string() == "L"
    with pytest.raises(ValueError):
        split_subtrees(TernaryTree.leaf())


@pytest.mark.parametrize("k", range(1, 5))
def test_split_graft_round_trip(k):
    trees = enumerate_trees(k)
    strings = {t.to_string() for t in trees}
    for t in trees:
        t1, t2, t3 = split_subtrees(t)
        assert t1.internal_count + t2.internal_count + t3.internal_count == k - 1
        back = graft(t1, t2, t3)
        assert back.to_string() == t.to_string()
        assert back.to_string() in strings


def test_graft_split_bijection():
    # ordered triples with total internal count k-1 <-> trees with k nodes
    k = 3
    triples = set()
    for t in enumerate_trees(k):
        triples.add(tuple(s.to_string() for s in split_subtrees(t)))
    count = 0
    for k1 in range(k):
        for k2 in range(k - k1):
            k3 = k - 1 - k1 - k2
            count += len(enumerate_trees(k1)) * len(enumerate_trees(k2)) * len(enumerate_trees(k3))
    assert len(triples) == count == len(enumerate_trees(k))


def test_string_round_trip():
    for k in range(4):
        for t in enumerate_trees(k):
            assert TernaryTree.from_string(t.to_string()).to_string() == t.to_string()
    assert enumerate_trees(1)[0].to_string() == "ILLL"
    with pytest.raises(ValueError):
        TernaryTree.from_string("IL")
    with pytest.raises(ValueError):
        TernaryTree.from_string("ILLLX")
