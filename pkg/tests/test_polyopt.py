from fractions import Fraction
from math import comb

import pytest

from lasgap import polyopt
from lasgap.moments import moment_matrix
from lasgap.psd import FEASIBLE, PSD, exact_inertia
from lasgap.subsets import PseudoDistribution, from_labels, full_set, popcount, zeta_transform

F = Fraction


def test_objective_n3_k2():
    f = polyopt.build_objective(3, 2)
    assert {m: c for m, c in f.coeffs.items() if popcount(m) == 1} == {1: 2, 2: 2, 4: 2}
    assert {m: c for m, c in f.coeffs.items() if popcount(m) == 2} == {3: -1, 5: -1, 6: -1}
    assert f.degree == 2


@pytest.mark.parametrize("n", range(1, 6))
def test_objective_top_coefficient(n):
    f = polyopt.build_objective(n, n)
    assert f.coeffs[full_set(n)] == (-1) ** (n + 1)


@pytest.mark.parametrize("n,k", [(3, 1), (4, 2), (5, 3), (6, 2), (6, 4)])
def test_objective_counts_hit_sets(n, k):
    f = polyopt.build_objective(n, k)
    for mask in range(1 << n):
        expected = polyopt.hit_count(n, k, mask)
        assert f.evaluate(mask) == expected


def test_integral_optima():
    assert polyopt.integral_optimum((4, 2)) == 6
    assert polyopt.integral_optimum((3, 3)) == 1
    assert polyopt.integral_optimum((5, 1)) == 5


def test_certificate_n4_k2():
    eps = F(1, 10)
    p = polyopt.make_certificate(4, 2, eps)
    big = [m for m in p.weights if popcount(m) >= 3]
    assert len(big) == 5 and all(p.weights[m] == (1 + eps) / 5 for m in big)
    assert p.weights[0] == -eps
    assert p.total_mass() == 1


def test_zero_eps_is_a_distribution():
    p = polyopt.make_certificate(5, 3, 0)
    assert all(w > 0 for w in p.weights.values())
    res = exact_inertia(moment_matrix(zeta_transform(p, 2), 2))
    assert res.status == PSD


def test_pseudo_objective_values():
    f = polyopt.build_objective(4, 2)
    p = polyopt.make_certificate(4, 2, F(1, 64))
    assert polyopt.pseudo_objective(p, f) == 6 * F(65, 64)
    point = PseudoDistribution(4, {full_set(4): F(1)})
    assert polyopt.pseudo_objective(point, f) == comb(4, 2)
    genuine = PseudoDistribution(4, {from_labels([1]): F(1, 2), from_labels([2, 3]): F(1, 2)})
    assert polyopt.pseudo_objective(genuine, f) <= 6


@pytest.mark.parametrize("n,k", [(4, 2), (5, 3)])
def test_verify_polyopt_gap(n, k):
    rep = polyopt.verify_polyopt(n, k)
    assert rep.status == FEASIBLE
    assert rep.integral_optimum == comb(n, k)
    assert rep.pseudo_value == (1 + rep.eps) * comb(n, k) > rep.integral_optimum
    assert rep.diagonalizer["weyl_status"] == PSD


def test_eps_zero_no_gap():
    rep = polyopt.verify_polyopt(4, 2, [0])
    assert rep.status == FEASIBLE and rep.pseudo_value == rep.integral_optimum


def test_ladder_without_passing_rung():
    rep = polyopt.verify_polyopt(4, 2, [F(1, 2), F(1, 4)])
    assert rep.status == polyopt.INCONCLUSIVE_FOR_LADDER
    assert rep.eps is None
    assert [r["status"] for r in rep.rungs] == ["NOT_PSD", "NOT_PSD"]
