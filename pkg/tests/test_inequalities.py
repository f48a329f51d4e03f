import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpoly.harness import _bell_zero
from qpoly.inequalities import (
    CHECKS,
    Bound,
    PremiseStatus,
    SizeGuardError,
    Status,
    check_cor2,
    check_prop1,
    check_prop2,
    check_thm1,
    check_thm2,
    check_thm3,
    compare,
    prop1_candidate_residual,
    prop2_candidate_residual,
    q_threshold,
    worst,
)
from qpoly.measures import BoundedValue, Direction, OptimizationBudget, Rank1Measurement
from qpoly.states import (
    InvalidStateError,
    basis_state,
    bell_state,
    ghz_state,
    haar_isometry,
    random_density,
    random_pure,
)

LN2 = math.log(2)
BUDGET = OptimizationBudget(rng_seed=3)
PRODUCT3 = basis_state([0, 0, 0], [2, 2, 2])


def _bv(v, direction):
    return BoundedValue(v, direction)


# --- bound algebra on synthetic values ---------------------------------------

finite = st.floats(-5, 5, allow_nan=False)
directions = st.sampled_from(list(Direction))


@st.composite
def bounded_with_truth(draw):
    """A reported value plus a true value consistent with its direction."""
    direction = draw(directions)
    truth = draw(finite)
    slack = draw(st.floats(0, 3))
    if direction is Direction.EXACT:
        reported = truth
    elif direction is Direction.LOWER_BOUND_OF_MAX:
        reported = truth - slack
    else:
        reported = truth + slack
    return _bv(reported, direction), truth


@given(bounded_with_truth(), bounded_with_truth(), st.floats(0, 1))
def test_violated_implies_true_violation(small, big, pad):
    (s, ts), (b, tb) = small, big
    # analytic floors / ceilings that also contain the truth
    sb = Bound.of(s, floor=ts - pad, ceiling=ts + pad)
    bb = Bound.of(b, floor=tb - pad, ceiling=tb + pad)
    assert sb.lo <= ts <= sb.hi and bb.lo <= tb <= bb.hi
    status, _ = compare(sb, bb)
    if status is Status.VIOLATED:
        assert ts > tb
    if status is Status.CERTIFIED:
        assert ts <= tb + 1e-6


def test_one_sided_bounds_never_falsify_without_ceiling():
    # the reported max is below the exact left side, but the true max could be anything above
    status, margin = compare(Bound.exact(1.0), Bound.of(_bv(0.2, Direction.LOWER_BOUND_OF_MAX)))
    assert status is Status.INCONCLUSIVE and margin == pytest.approx(-0.8)
    # with the ceiling below the left side the violation is airtight
    status, _ = compare(Bound.exact(1.0), Bound.of(_bv(0.2, Direction.LOWER_BOUND_OF_MAX), ceiling=0.5))
    assert status is Status.VIOLATED


def test_upper_bound_of_min_certifies_small_side():
    status, margin = compare(Bound.of(_bv(0.4, Direction.UPPER_BOUND_OF_MIN), floor=0.0), Bound.exact(0.5))
    assert status is Status.CERTIFIED and margin == pytest.approx(0.1)
    status, _ = compare(Bound.of(_bv(0.6, Direction.UPPER_BOUND_OF_MIN), floor=0.0), Bound.exact(0.5))
    assert status is Status.INCONCLUSIVE


def test_bound_sum_and_scale():
    a = Bound(1.0, 0.5, 2.0)
    b = Bound.exact(1.0)
    assert a + b == Bound(2.0, 1.5, 3.0)
    assert a.scaled(-2.0) == Bound(-2.0, -4.0, -1.0)
    assert worst(Status.CERTIFIED, Status.INCONCLUSIVE) is Status.INCONCLUSIVE
    assert worst(Status.VIOLATED, Status.CERTIFIED) is Status.VIOLATED


# --- identities ---------------------------------------------------------------

def _pool(d, n, seed):
    rng = np.random.default_rng(seed)
    return [Rank1Measurement.from_isometry(haar_isometry(d * d, d, rng)) for _ in range(n)]


def test_prop1_ghz_candidates():
    psi = ghz_state(3)
    for m in _pool(2, 100, 0):
        assert abs(prop1_candidate_residual(psi, m, 2.0)) <= 1e-9


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0])
@settings(max_examples=15)
@given(seed=st.integers(0, 2**31))
def test_prop_layer_a_random(seed, q):
    psi = random_pure([2, 2, 2], seed=seed)
    for m in _pool(2, 5, seed):
        assert abs(prop1_candidate_residual(psi, m, q)) <= 1e-9
        assert abs(prop2_candidate_residual(psi, m, q)) <= 1e-9


@pytest.mark.parametrize("check", [check_prop1, check_prop2])
@pytest.mark.parametrize("state", [PRODUCT3, ghz_state(3), _bell_zero()], ids=["product", "ghz", "bell0"])
def test_prop_checks_certify_examples(check, state):
    v = check(state, 2.0, BUDGET, pool_size=20)
    assert v.status is Status.CERTIFIED
    assert v.details["worst_candidate_residual"] <= 1e-9
    assert v.premise_status is PremiseStatus.NOT_APPLICABLE


def test_prop1_product_all_zero():
    v = check_prop1(PRODUCT3, 1.5, BUDGET, pool_size=10)
    assert all(abs(c.value) < 1e-12 for c in v.components.values())


def test_prop_random_state_layer_b():
    psi = random_pure([2, 2, 2], seed=7)
    for check in (check_prop1, check_prop2):
        v = check(psi, 2.0, BUDGET, pool_size=30)
        assert v.status is not Status.VIOLATED
        assert v.details["optimized_residual"] < 1e-6


def test_identity_checks_need_pure_three_party():
    with pytest.raises(InvalidStateError):
        check_prop1(random_density([2, 2, 2], seed=1), 2.0, BUDGET)
    with pytest.raises(InvalidStateError):
        check_prop2(bell_state(2), 2.0, BUDGET)
    with pytest.raises(ValueError):
        check_prop1(PRODUCT3, 0.5, BUDGET)


# --- threshold ----------------------------------------------------------------

def test_threshold_values():
    assert q_threshold(2) == pytest.approx(1.69424, abs=1e-4)
    vals = [q_threshold(d) for d in range(2, 65)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert max(vals) <= 2 and min(vals) > 1
    with pytest.raises(ValueError):
        q_threshold(1)


# --- inequalities -------------------------------------------------------------

def test_thm1_bell_q2():
    v = check_thm1(bell_state(2), 2.0, BUDGET)
    assert v.status is Status.CERTIFIED
    assert v.premise_status is PremiseStatus.FAILS
    assert abs(v.margin) <= 1e-6
    assert v.components["I_q"].value == pytest.approx(1.0, abs=1e-9)
    assert v.components["uE"].value == pytest.approx(0.5, abs=1e-6)
    assert v.components["ccq_gap"].value == pytest.approx(-0.25, abs=1e-9)
    assert v.details["threshold_cleared"] is True


def test_thm1_product():
    v = check_thm1(basis_state([0, 1], [2, 2]), 2.0, BUDGET)
    assert v.status is Status.CERTIFIED and abs(v.margin) < 1e-9


def test_thm2_examples():
    v = check_thm2(PRODUCT3, 2.0, BUDGET)
    assert v.status is Status.CERTIFIED and abs(v.margin) < 1e-9
    v = check_thm2(ghz_state(3), 1.0, BUDGET)
    assert v.status is Status.CERTIFIED
    assert v.premise_status is PremiseStatus.HOLDS
    assert v.margin == pytest.approx(LN2, abs=1e-6)


def test_cor2_examples():
    v = check_cor2(PRODUCT3, 2.0, BUDGET)
    assert v.status is Status.CERTIFIED
    v = check_cor2(ghz_state(3), 1.0, BUDGET)
    assert v.status is Status.CERTIFIED
    assert v.details == {"monogamy_status": "CERTIFIED", "polygamy_status": "CERTIFIED"}


def test_thm3_examples():
    v = check_thm3(basis_state([0] * 4, [2] * 4), 2.0, BUDGET)
    assert v.status is Status.CERTIFIED
    v = check_thm3(ghz_state(4), 1.0, BUDGET)
    assert v.status is Status.CERTIFIED
    assert v.margin == pytest.approx(2 * LN2, abs=1e-6)
    assert v.components["Ea_A(rest)"].direction is Direction.EXACT


def test_thm3_mixed_and_guard():
    v = check_thm3(random_density([2, 2, 2], seed=4), 2.0, BUDGET)
    assert v.status is not Status.VIOLATED
    assert v.components["Ea_A(rest)"].direction is Direction.LOWER_BOUND_OF_MAX
    with pytest.raises(SizeGuardError):
        check_thm3(basis_state([0] * 6, [3] * 6), 2.0, BUDGET)
    with pytest.raises(InvalidStateError):
        check_thm3(bell_state(2), 2.0, BUDGET)


@pytest.mark.parametrize("seed", range(4))
def test_thm2_q1_premise_holds(seed):
    v = check_thm2(random_pure([2, 2, 2], seed=seed), 1.0, BUDGET)
    assert v.premise_status is PremiseStatus.HOLDS
    assert v.status is Status.CERTIFIED


@pytest.mark.parametrize("name", ["thm1", "thm2", "cor2", "thm3"])
def test_small_budget_never_violates(name):
    dims = {"thm1": [2, 2], "thm3": [2, 2, 2, 2]}.get(name, [2, 2, 2])
    for seed in range(3):
        state = random_density(dims, seed=seed) if name == "thm1" else random_pure(dims, seed=seed)
        for budget in (OptimizationBudget(restarts=1, max_iterations=3, rng_seed=seed),
                       OptimizationBudget(restarts=1, max_iterations=1, rng_seed=seed)):
            assert CHECKS[name](state, 2.0, budget).status is not Status.VIOLATED


def test_verdict_dict_schema():
    d = check_thm1(random_density([2, 2], seed=2), 2.0, BUDGET).as_dict()
    assert set(d) == {"check", "q", "dims", "seed", "status", "premise_status", "margin", "components", "details"}
    assert d["components"]["uE"]["direction"] == "UPPER_BOUND_OF_MIN"
