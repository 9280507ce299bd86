import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apdiff.space import (Space, add, coords_of, cosets, full_space, intersect,
                          neg, pad_subspace, point_of, rref_mod_p, scalar_mul,
                          solve_mod_p, subspace_from_constraints)


def test_space_validates_prime():
    with pytest.raises(ValueError):
        Space(4, 2)
    with pytest.raises(ValueError):
        Space(2, 3)


def test_indexing_little_endian():
    sp = Space(3, 3)
    assert point_of(sp, [1, 0, 0]) == 1
    assert point_of(sp, [0, 1, 0]) == 3
    assert point_of(sp, [0, 0, 1]) == 9
    assert list(coords_of(sp, 14)) == [2, 1, 1]  # 2 + 3 + 9


@given(st.sampled_from([(3, 2), (3, 4), (5, 2), (7, 1)]),
       st.integers(0, 10**6), st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_group_laws(pn, a, b):
    sp = Space(*pn)
    a, b = a % sp.N, b % sp.N
    assert add(sp, a, neg(sp, a)) == 0
    assert add(sp, a, b) == add(sp, b, a)
    assert scalar_mul(sp, sp.p, a) == 0


def test_rref_and_solve():
    p = 5
    a = np.array([[2, 1, 0], [4, 2, 1], [1, 0, 3]])
    r = rref_mod_p(a, p)
    assert r.shape[0] == 3  # full rank
    x = solve_mod_p(a.T, np.array([1, 2, 3]), p)
    assert np.array_equal((a.T @ x) % p, [1, 2, 3])


def test_subspace_members_and_contains():
    sp = Space(3, 3)
    h = subspace_from_constraints(sp, [1])  # x_1 = 0
    assert h.codim == 1 and h.size == 9
    mem = h.members()
    assert mem.size == 9
    assert all(coords_of(sp, int(x))[0] == 0 for x in mem)
    assert h.contains(0) and not h.contains(1)


def test_coset_partition_covers_group():
    sp = Space(3, 4)
    h = subspace_from_constraints(sp, [1, 3])
    part = cosets(h)
    ids = h.coset_ids()
    assert len(part.representatives) == sp.p**h.codim
    assert np.bincount(ids).tolist() == [h.size] * sp.p**h.codim
    # representatives are the minimal member of each coset
    for r in part.representatives:
        assert ids[r] == ids[int(r)]
        assert int(r) == int(np.nonzero(ids == ids[r])[0][0])


def test_intersect_and_pad():
    sp = Space(3, 4)
    a = subspace_from_constraints(sp, [1])
    b = subspace_from_constraints(sp, [3])
    ab = intersect(a, b)
    assert ab.codim == 2
    padded = pad_subspace(a, 3)
    assert padded.codim == 3
    # padding only shrinks: every padded member lies in the original
    assert all(a.contains(int(x)) for x in padded.members())


def test_duplicate_constraints_collapse():
    sp = Space(3, 3)
    h = subspace_from_constraints(sp, [1, 2, 1])  # 2 = 2*1 mod-p dependent
    assert h.codim == 1
