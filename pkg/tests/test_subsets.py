import itertools
import json
import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lasgap.subsets import (
    CapacityError,
    DomainError,
    MomentVector,
    PseudoDistribution,
    alt_binomial_sum,
    enumerate_subsets,
    from_labels,
    index_map,
    mobius_transform,
    popcount,
    random_pseudo_distribution,
    to_labels,
    zeta_transform,
)


def labels(masks):
    return [to_labels(m) for m in masks]


def test_enumerate_small():
    assert labels(enumerate_subsets(2, 1)) == [[], [1], [2]]
    assert len(enumerate_subsets(3, 3)) == 8


def test_enumerate_count_n16_d2():
    assert len(enumerate_subsets(16, 2)) == 1 + 16 + comb(16, 2) == 137


def test_enumerate_order_is_cardinality_then_colex():
    subs = enumerate_subsets(4, 4)
    assert labels(subs[5:11]) == [[1, 2], [1, 3], [2, 3], [1, 4], [2, 4], [3, 4]]
    keys = [(popcount(m), sorted(to_labels(m), reverse=True)) for m in subs]
    assert keys == sorted(keys)


def test_index_map_inverts_enumeration():
    subs = enumerate_subsets(7, 3)
    pos = index_map(7, 3)
    assert all(pos[m] == i for i, m in enumerate(subs))
    assert enumerate_subsets(7, 3) is subs or enumerate_subsets(7, 3) == subs


def test_capacity():
    with pytest.raises(CapacityError):
        enumerate_subsets(65, 1)


def test_zeta_point_mass_at_empty_set():
    m = zeta_transform(PseudoDistribution(3, {0: Fraction(1)}), 1)
    assert m[0] == 1
    assert all(m[s] == 0 for s in enumerate_subsets(3, 2) if s)


def test_zeta_uniform_on_two_elements():
    p = PseudoDistribution(2, {s: Fraction(1, 4) for s in range(4)})
    m = zeta_transform(p, 1)
    assert (m[0], m[0b01], m[0b10], m[0b11]) == (1, Fraction(1, 2), Fraction(1, 2), Fraction(1, 4))


def test_zeta_out_of_range_moment_is_domain_error():
    m = zeta_transform(PseudoDistribution(5, {0: Fraction(1)}), 1)
    with pytest.raises(DomainError):
        m[0b111]


@pytest.mark.parametrize("n", range(1, 11))
def test_profile_closed_form_matches_sparse(n):
    rng = random.Random(n)
    smax = rng.randint(0, n)
    profile = {s: Fraction(rng.randint(-4, 4), rng.randint(1, 5)) for s in range(smax + 1)}
    p_profile = PseudoDistribution.from_profile(n, profile)
    p_sparse = PseudoDistribution(n, dict(p_profile.weights))
    d = (n + 1) // 2
    a, b = zeta_transform(p_profile, d), zeta_transform(p_sparse, d)
    assert a.by_size is not None and b.by_size is None
    for s in enumerate_subsets(n, min(2 * d, n)):
        assert a[s] == b[s]


def test_profile_uniform_moment_formula():
    alpha = Fraction(1, 7)
    p = PseudoDistribution.from_profile(6, {s: alpha for s in range(4)})
    m = zeta_transform(p, 3)
    for s in range(7):
        assert m.by_size[s] == alpha * sum(comb(6 - s, j - s) for j in range(s, 4))


def test_mobius_all_ones():
    m = MomentVector(2, 1, {s: Fraction(1) for s in range(4)})
    p = mobius_transform(m)
    assert dict(p.weights) == {0b11: 1}


def test_mobius_point_mass_and_product_measure():
    assert dict(mobius_transform(MomentVector(3, 2, {0: Fraction(1)})).weights) == {0: 1}
    # independent fair coins: y_I = 2^-|I| gives p_H = 1/8 everywhere
    m = MomentVector(3, 2, {s: Fraction(1, 2 ** popcount(s)) for s in range(8)})
    p = mobius_transform(m)
    assert all(p.weight(h) == Fraction(1, 8) for h in range(8))


def test_mobius_of_single_moment_is_signed_row():
    # y = indicator of K gives p_H = (-1)^{|K \ H|} for H <= K
    n, k = 4, from_labels([1, 2, 4])
    p = mobius_transform(MomentVector(n, 2, {k: Fraction(1)}))
    for h in range(1 << n):
        expected = (-1) ** popcount(k & ~h) if h & ~k == 0 else 0
        assert p.weight(h) == expected


def test_mobius_needs_full_power_set():
    with pytest.raises(DomainError):
        mobius_transform(MomentVector(5, 2, {0: Fraction(1)}))


def test_round_trip_random():
    rng = random.Random(7)
    for _ in range(50):
        n = rng.randint(1, 10)
        p = random_pseudo_distribution(n, rng)
        back = mobius_transform(zeta_transform(p, (n + 1) // 2))
        assert dict(back.weights) == {k: v for k, v in p.weights.items() if v}


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.data())
def test_round_trip_property(n, data):
    items = data.draw(st.dictionaries(st.integers(0, (1 << n) - 1),
                                      st.fractions(min_value=-3, max_value=3, max_denominator=7),
                                      max_size=10))
    p = PseudoDistribution(n, {k: v for k, v in items.items() if v})
    assert mobius_transform(zeta_transform(p, (n + 1) // 2)).weights == p.weights


def test_alt_binomial_sum_examples():
    assert alt_binomial_sum(0, 3) == 1
    assert alt_binomial_sum(3, 1) == -2
    assert alt_binomial_sum(4, 4) == 0
    assert alt_binomial_sum(5, -1) == 0


@pytest.mark.parametrize("m", range(1, 13))
def test_alt_binomial_sum_identities(m):
    assert alt_binomial_sum(m, m) == 0
    for r in range(m):
        assert alt_binomial_sum(m, r) == (-1) ** r * comb(m - 1, r)
        assert alt_binomial_sum(m, r) == sum((-1) ** i * comb(m, i) for i in range(r + 1))


def test_pseudo_distribution_json_round_trip():
    p = PseudoDistribution(4, {from_labels([1, 3]): Fraction(2, 3), 0: Fraction(-1, 5)})
    text = json.dumps(p.to_json())
    data = json.loads(text)
    assert data["n"] == 4
    assert {"set": [1, 3], "value": "2/3"} in data["weights"]
    assert PseudoDistribution.from_json(text).weights == p.weights


def test_pseudo_distribution_rejects_out_of_range():
    with pytest.raises(DomainError):
        PseudoDistribution(2, {0b100: Fraction(1)})
    with pytest.raises(DomainError):
        PseudoDistribution.from_json({"n": 2, "weights": [{"set": [0], "value": "1"}]})


def test_normalized_flag_checks_mass():
    with pytest.raises(DomainError):
        PseudoDistribution(2, {0: Fraction(1, 2)}, normalized=True)
    p = PseudoDistribution.from_profile(3, {0: Fraction(1, 4), 1: Fraction(1, 4)}, normalized=True)
    assert p.total_mass() == 1
    assert len(p.support()) == 4


def test_profile_expansion_is_exactly_the_sparse_form():
    p = PseudoDistribution.from_profile(5, {1: Fraction(1, 3), 2: Fraction(-1, 2)})
    expected = {}
    for s, w in ((1, Fraction(1, 3)), (2, Fraction(-1, 2))):
        for c in itertools.combinations(range(5), s):
            expected[sum(1 << i for i in c)] = w
    assert dict(p.weights) == expected
