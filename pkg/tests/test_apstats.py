import numpy as np
import pytest

from apdiff import oracle
from apdiff.apstats import (lambda3, lambda3_coset, lambda_nontrivial,
                            mean_lambda_over_cosets, rho_all, rho_scan)
from apdiff.errors import BudgetExceeded, PreconditionFailed
from apdiff.fourier import GFunction, constant, indicator
from apdiff.space import Space, full_space, subspace_from_constraints


def _random_f(sp, seed):
    return GFunction(sp, np.random.default_rng(seed).random(sp.N))


def test_constant_function_rho():
    sp = Space(3, 2)
    r = rho_all(constant(sp, 0.4))
    assert np.allclose(r, 0.4**3)


@pytest.mark.parametrize("pn,seed", [((3, 1), 0), ((3, 3), 1), ((3, 4), 2),
                                     ((5, 2), 3), ((7, 2), 4)])
def test_rho_all_matches_naive(pn, seed):
    f = _random_f(Space(*pn), seed)
    r = rho_all(f)
    for d in range(f.space.N):
        assert r[d] == pytest.approx(oracle.naive_rho(f, d), abs=1e-10)


def test_mean_rho_is_lambda():
    f = _random_f(Space(3, 4), 7)
    assert np.mean(rho_all(f)) == pytest.approx(lambda3(f), abs=1e-10)


def test_lambda_spectral_matches_naive():
    for seed, pn in enumerate([(3, 2), (3, 5), (5, 3), (7, 2)]):
        f = _random_f(Space(*pn), seed)
        assert lambda3(f) == pytest.approx(oracle.naive_lambda(f), abs=1e-9)


def test_line_indicator_fixture():
    # indicator of {x: x_1 = 0} at p=3, n=2: rho = 1/3 when d_1 = 0, else 0
    sp = Space(3, 2)
    f = indicator(sp, [0, 3, 6])
    r = rho_all(f)
    for d in range(9):
        assert r[d] == pytest.approx(1 / 3 if d % 3 == 0 else 0.0)


def test_rho_scan_report_fields():
    f = _random_f(Space(3, 3), 9)
    rep = rho_scan(f)
    assert rep.alpha == pytest.approx(f.density)
    assert rep.z == pytest.approx(rep.rho[0])
    assert rep.lam == pytest.approx(float(np.mean(rep.rho)), abs=1e-12)
    d_max, v_max = rep.max_nonzero
    assert v_max == rep.rho[1:].max() and d_max >= 1
    d_min, v_min = rep.min_nonzero
    assert v_min == rep.rho[1:].min() and d_min >= 1


def test_rho_budget_guard():
    f = constant(Space(3, 3), 0.5)
    with pytest.raises(BudgetExceeded):
        rho_all(f, budget=10)


def test_coset_lambda_decomposition():
    # Lambda(f) is the coset-size-weighted mean of per-coset AP densities
    # only when H is the full group; here check the full-group identities.
    sp = Space(3, 2)
    f = _random_f(sp, 11)
    g = full_space(sp)
    assert lambda3_coset(f, g, 0) == pytest.approx(lambda3(f), abs=1e-12)
    lam_nt = lambda_nontrivial(f, g, 0)
    n = sp.N
    expected = (lambda3(f) * n**2 - n * np.mean(f.values**3)) / (n * (n - 1))
    assert lam_nt == pytest.approx(expected, abs=1e-12)
    assert mean_lambda_over_cosets(f, g) == pytest.approx(lam_nt, abs=1e-12)


def test_lambda_nontrivial_point_fixture():
    # single point subgroup has no nontrivial APs to count
    sp = Space(3, 1)
    f = indicator(sp, [0])
    with pytest.raises(PreconditionFailed):
        lambda_nontrivial(f, subspace_from_constraints(sp, [1]), 0)


def test_exact_count_oracle_full_and_empty():
    sp = Space(5, 1)
    assert oracle.exact_count_3aps(sp, np.arange(5), 2) == 5
    assert oracle.exact_count_3aps(sp, np.array([], dtype=int), 1) == 0
