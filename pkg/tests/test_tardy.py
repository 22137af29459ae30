import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lasgap import tardy
from lasgap.psd import FEASIBLE, INFEASIBLE
from lasgap.subsets import from_labels
from lasgap.tardy import (
    GapInstance,
    ParameterError,
    brute_force_integral_cover,
    brute_force_min_tardy,
    build_instance,
    fractional_point,
    lp_constraints,
    make_certificate,
    moore_hodgson,
    point_is_feasible,
    verify_gap,
)

F = Fraction


def test_instance_m2_p2():
    inst = build_instance(2, 2)
    assert inst.jobs() == [(2, 3), (2, 3), (4, 9), (4, 9)]
    assert [inst.demand(i) for i in (1, 2)] == [1, 3]


def test_instance_m1():
    inst = build_instance(1, 2)
    assert inst.deadline(1) == 1 and inst.demand(1) == 1


@pytest.mark.parametrize("m,P", [(3, 5), (4, 2), (5, 10)])
def test_demand_identity(m, P):
    inst = build_instance(m, P)
    for i in range(1, m + 1):
        assert inst.demand_from_jobs(i) == inst.demand(i)


def test_instance_parameter_errors():
    with pytest.raises(ParameterError):
        GapInstance(0, 2)
    with pytest.raises(ParameterError):
        GapInstance(2, 1)
    assert GapInstance.from_json(build_instance(3, 7).to_json()) == build_instance(3, 7)


def test_lp_example():
    cons = lp_constraints(build_instance(2, 2), 2)
    assert cons[0].name == "cardinality"
    assert cons[1].coeffs == {0: 2, 1: 2} and cons[1].rhs == 1
    assert cons[2].coeffs == {0: 2, 1: 2, 2: 4, 3: 4} and cons[2].rhs == 3


@pytest.mark.parametrize("m", range(1, 6))
@pytest.mark.parametrize("P", [2, 10, 1000])
def test_fractional_point_feasible(m, P):
    inst = build_instance(m, P)
    x, T = fractional_point(inst)
    assert T == F(m, P)
    assert point_is_feasible(lp_constraints(inst, T), x)


def test_all_ones_feasible_at_n():
    inst = build_instance(3, 4)
    x = {v: F(1) for v in range(inst.n)}
    assert point_is_feasible(lp_constraints(inst, inst.n), x)


def test_moore_hodgson_examples():
    assert moore_hodgson(build_instance(2, 2).jobs())[0] == 2
    assert moore_hodgson([(3, 5)]) == (0, [])
    assert moore_hodgson(build_instance(3, 3).jobs())[0] == 3


def test_moore_hodgson_tardy_set_is_valid():
    rng = random.Random(1)
    for _ in range(50):
        jobs = [(rng.randint(1, 9), rng.randint(1, 25)) for _ in range(rng.randint(1, 10))]
        count, late = moore_hodgson(jobs)
        on_time = [k for k in range(len(jobs)) if k not in late]
        assert count == len(late)
        assert tardy.on_time_feasible(jobs, on_time)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 12), st.integers(1, 40)), min_size=1, max_size=9))
def test_moore_hodgson_is_optimal(jobs):
    assert moore_hodgson(jobs)[0] == brute_force_min_tardy(jobs)


@pytest.mark.parametrize("m", range(1, 5))
def test_integral_cover_needs_m(m):
    # covering view: fewest variables meeting every demand equals the tardy count
    inst = build_instance(m, 2)
    assert brute_force_integral_cover(inst) == m == moore_hodgson(inst.jobs())[0]


def test_certificate_examples():
    spec, dist = make_certificate(16, 2, 2)
    assert (spec.t, spec.threshold, spec.alpha) == (1, 2, F(1, 137))
    assert dist.total_mass() == 1
    spec, _ = make_certificate(36, 2, 1)
    assert (spec.t, spec.threshold) == (1, 3)
    assert spec.alpha == F(1, 1 + 36 + 630 + 7140)
    with pytest.raises(ParameterError):
        make_certificate(16, 3, 2)
    with pytest.raises(ParameterError):
        make_certificate(15, 1, 2)
    with pytest.raises(ParameterError):
        make_certificate(16, 2, 1)  # (4 - 2) / 4 is not integral


def test_theorem1_shift():
    inst = build_instance(4, 10)
    assert tardy.theorem1_shift(inst, 2, 1) == from_labels([5, 6])


def test_verify_theorem2_level1():
    rep = verify_gap(16, 2, 2, level=1, p_ladder=(10 ** 3, 10 ** 6), mode="exact")
    assert rep.status == FEASIBLE
    assert rep.gap == 2
    assert rep.statement() == "gap 2 at level 1"
    assert rep.report.condition2["dim"] == 137


def test_verify_theorem2_level2_infeasible_with_witness():
    rep = verify_gap(16, 2, 2, level=2, p_ladder=(10 ** 3,), mode="exact")
    assert rep.status == INFEASIBLE
    wit = rep.extras["diagonal_witnesses"]
    assert wit and all(F(w["diagonal_value"]) < 0 for w in wit)


def test_verify_theorem1_n9():
    rep = verify_gap(9, 1, 1, level=1, p_ladder=(10 ** 3,), mode="exact")
    assert rep.status == FEASIBLE
    assert rep.gap == 1 and rep.certificate.T == 3


def test_ladder_exhausted_is_inconclusive_for_ladder():
    rep = verify_gap(16, 2, 2, level=1, p_ladder=(2,), mode="exact")
    assert rep.status == tardy.INCONCLUSIVE_FOR_LADDER
    assert rep.passing_P is None


def test_min_p_search_walks_whole_ladder():
    rep = verify_gap(16, 2, 2, level=1, p_ladder=(10, 1000, 10 ** 6), stop_on_pass=False, mode="exact")
    assert [r["P"] for r in rep.rungs] == [10, 1000, 10 ** 6]
    assert rep.passing_P == 1000
    assert rep.rungs[0]["overall"] == INFEASIBLE


def test_report_json_round_trip_fields():
    rep = verify_gap(16, 2, 2, level=1, p_ladder=(10 ** 3,), mode="exact", weyl=True)
    data = rep.to_json()
    assert data["gap"] == "2" and data["T"] == "2" and data["integral_optimum"] == 4
    assert data["certificate"]["alpha"] == "1/137"
    assert len(data["weyl"]) == 4
