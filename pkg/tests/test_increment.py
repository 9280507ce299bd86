import numpy as np
import pytest

from apdiff.errors import PreconditionFailed
from apdiff.fourier import GFunction, constant, indicator
from apdiff.increment import (TowerValue, increment_step, mean_cube_density,
                              plan_upper_bound, run_increment)
from apdiff.space import Space, full_space, subspace_from_constraints


def _greedy_cap(sp):
    """A progression-free set, greedily: skip x if it completes any 3-AP."""
    pows, p = sp.pows, sp.p
    digs = (np.arange(sp.N)[:, None] // pows) % p
    members, banned = [], set()
    for x in range(sp.N):
        if x in banned:
            continue
        for a in members:
            banned.add(int(((-digs[a] - digs[x]) % p) @ pows))
        members.append(x)
    return np.array(members, dtype=np.int64)


def test_mean_cube_density_endpoints():
    sp = Space(3, 3)
    f = GFunction(sp, np.random.default_rng(0).random(sp.N))
    # full group: single coset, b = alpha^3
    assert mean_cube_density(f, full_space(sp)) == pytest.approx(f.density**3)
    # trivial subgroup: every point its own coset, b = E[f^3]
    point = subspace_from_constraints(sp, [1, 3, 9])
    assert mean_cube_density(f, point) == pytest.approx(
        float(np.mean(f.values**3)))


def test_increment_precondition_dense_function():
    sp = Space(3, 4)
    f = constant(sp, 0.5)
    with pytest.raises(PreconditionFailed):
        increment_step(f, full_space(sp), epsilon=0.05, eta=0.3)


def test_increment_trace_on_cap_set():
    sp = Space(3, 5)
    cap = _greedy_cap(sp)
    f = indicator(sp, cap)
    alpha = f.density
    eps = alpha**3 * 0.97
    assert 4 * alpha / eps < sp.N  # parameters leave room for a step
    trace = run_increment(f, epsilon=eps, eta_schedule=0.35)
    assert trace.steps, "expected at least one successful step"
    prev_b = 0.0
    for st in trace.steps:
        assert st.b_after >= 2 * st.b - st.mean_lambda - 6 * st.eta_used - 1e-9
        assert st.b >= prev_b - 1e-12
        assert st.b_after >= st.b - 1e-12  # refinement never loses
        assert st.b_after <= alpha + 1e-9
        prev_b = st.b_after
    assert trace.termination in ("SmallSubspace", "PreconditionFailed", "Budget")


def test_tower_value_ordering_and_exact():
    t0 = TowerValue(3, 0, 27.0)
    assert t0.exact() == 27
    assert t0.canonical() == (2, 1.0)  # 27 = 3^3^1
    assert TowerValue(3, 2, 1.5) < TowerValue(3, 3, 1.1)
    assert TowerValue(3, 0, 5.0) < TowerValue(3, 1, 2.0)  # 5 < 9
    assert TowerValue(3, 1, 1.0).exact() == 3
    assert str(TowerValue(3, 7, 1.25)) == "3^^7(1.25)"


def test_upper_plan_heights_closed_form():
    import math
    for k in range(1, 8):
        eps = 0.375 / 2**k
        plan = plan_upper_bound(3, eps, 0.5)
        assert plan.height == math.ceil(math.log2((0.5 - 0.125) / eps)) + 5
    plan = plan_upper_bound(3, 0.1, 0.5)
    assert plan.height == 7
    assert plan.all_checks_pass


def test_upper_plan_domain_errors():
    with pytest.raises(ValueError):
        plan_upper_bound(3, 0.5, 0.5)  # epsilon >= alpha - alpha^3
    with pytest.raises(ValueError):
        plan_upper_bound(3, -0.1, 0.5)
