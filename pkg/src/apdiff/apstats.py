"""3-AP density statistics: global Lambda, per-difference rho, coset lambda.

rho_scan is the performance-critical path: a direct O(N^2) scan over all
common differences, JIT-compiled and parallelized over d.  Each rho[d] is a
sequential sum over x, so results are independent of the thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import BudgetExceeded, NonRealResult, PreconditionFailed
from .fourier import GFunction, dft
from .space import Space, Subspace, add, cosets

RHO_SCAN_BUDGET = 6e9  # triple evaluations; n=10 at p=3 is ~3.5e9
LAMBDA_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class APReport:
    """Summary of the per-difference 3-AP density vector of one function."""

    alpha: float
    lam: float
    rho: np.ndarray = field(compare=False)
    z: float
    min_nonzero: tuple[int, float]
    max_nonzero: tuple[int, float]

    def margin(self, eps: float = 0.0) -> float:
        """alpha^3 - eps - max_{d != 0} rho[d]; positive when every nonzero
        difference stays below the random bound minus eps."""
        return self.alpha**3 - eps - self.max_nonzero[1]


@numba.njit(parallel=True, cache=True)
def _rho_kernel(vals, p, n, pows):  # pragma: no cover - exercised via rho_scan
    N = vals.size
    rho = np.empty(N)
    for d in numba.prange(N):
        off1 = np.empty((n, p), dtype=np.int64)
        off2 = np.empty((n, p), dtype=np.int64)
        for k in range(n):
            dk = (d // pows[k]) % p
            d2k = (2 * dk) % p
            for xk in range(p):
                off1[k, xk] = ((xk + dk) % p - xk) * pows[k]
                off2[k, xk] = ((xk + d2k) % p - xk) * pows[k]
        digits = np.zeros(n, dtype=np.int64)
        s1 = np.int64(0)
        s2 = np.int64(0)
        for k in range(n):
            s1 += off1[k, 0]
            s2 += off2[k, 0]
        acc = 0.0
        for x in range(N):
            acc += vals[x] * vals[x + s1] * vals[x + s2]
            k = 0
            while k < n:  # odometer increment of the digits of x
                dk = digits[k] + 1
                s1 -= off1[k, dk - 1]
                s2 -= off2[k, dk - 1]
                if dk == p:
                    digits[k] = 0
                    s1 += off1[k, 0]
                    s2 += off2[k, 0]
                    k += 1
                else:
                    digits[k] = dk
                    s1 += off1[k, dk]
                    s2 += off2[k, dk]
                    break
        rho[d] = acc / N
    return rho


def rho_all(f: GFunction, budget: float = RHO_SCAN_BUDGET) -> np.ndarray:
    """rho[d] = E_x[f(x) f(x+d) f(x+2d)] for every d, by direct scan."""
    sp = f.space
    if float(sp.N) ** 2 > budget:
        raise BudgetExceeded(f"N^2 = {sp.N**2:.2e} exceeds scan budget {budget:.2e}")
    if sp.n == 0:
        return np.array([float(f.values[0] ** 3)])
    return _rho_kernel(f.values, sp.p, sp.n, np.asarray(sp.pows))


def rho_scan(f: GFunction, budget: float = RHO_SCAN_BUDGET) -> APReport:
    """Full per-difference report; cost is N^2 triple evaluations."""
    rho = rho_all(f, budget)
    alpha = f.density
    lam = float(rho.mean())
    z = float(rho[0])
    if rho.size > 1:
        nz = rho[1:]
        dmin = 1 + int(np.argmin(nz))
        dmax = 1 + int(np.argmax(nz))
        min_nz = (dmin, float(rho[dmin]))
        max_nz = (dmax, float(rho[dmax]))
    else:
        min_nz = max_nz = (0, z)
    return APReport(alpha=alpha, lam=lam, rho=rho, z=z,
                    min_nonzero=min_nz, max_nonzero=max_nz)


def _neg2_perm(space: Space) -> np.ndarray:
    """Index permutation t -> -2t (the character pairing in the Lambda identity)."""
    return ((-2 * space.digits) % space.p) @ space.pows


def lambda3_spectral(f1: GFunction, f2: GFunction, f3: GFunction,
                     imag_tol: float = LAMBDA_IMAG_TOL) -> float:
    """Lambda(f1,f2,f3) = sum_t f1hat(t) f2hat(-2t) f3hat(t)."""
    if not (f1.space == f2.space == f3.space):
        raise ValueError("functions live in different spaces")
    s1 = dft(f1).coeffs
    s2 = dft(f2).coeffs[_neg2_perm(f1.space)]
    s3 = dft(f3).coeffs
    total = complex(np.sum(s1 * s2 * s3))
    if abs(total.imag) > imag_tol:
        raise NonRealResult(f"imaginary residue {total.imag:.3e} in Lambda")
    return total.real


def lambda3(f: GFunction) -> float:
    """Lambda(f) = E_{x-2y+z=0}[f(x) f(y) f(z)], trivial progressions included."""
    return lambda3_spectral(f, f, f)


def _coset_triple_sums(f: GFunction, points: np.ndarray) -> tuple[float, float]:
    """(sum over ordered (x,y) in the coset of f(x)f(y)f(2y-x), sum of f^3)."""
    sp = f.space
    p, pows = sp.p, sp.pows
    digs = (points[:, None] // pows) % p
    vals = f.values[points]
    total = 0.0
    for i in range(points.size):
        z_idx = ((2 * digs - digs[i]) % p) @ pows
        total += vals[i] * float(vals @ f.values[z_idx])
    cube = float(np.sum(vals**3))
    return total, cube


def lambda3_coset(f: GFunction, h: Subspace, g: int) -> float:
    """Lambda(H+g): all 3-APs inside the affine coset, trivial included."""
    points = add(h.space, h.members(), np.int64(g))
    total, _ = _coset_triple_sums(f, np.sort(points))
    return total / points.size**2


def lambda_nontrivial(f: GFunction, h: Subspace, g: int) -> float:
    """lambda(H+g): density over distinct-triple 3-APs in the affine coset."""
    m = h.size
    if m < 2:
        raise PreconditionFailed("lambda undefined on a singleton coset")
    points = np.sort(add(h.space, h.members(), np.int64(g)))
    total, cube = _coset_triple_sums(f, points)
    # ordered pairs (x, y) with x == y are exactly the trivial progressions
    return (total - cube) / (m * (m - 1))


def mean_lambda_over_cosets(f: GFunction, h: Subspace) -> float:
    """E_j[lambda(H_j)] over the coset partition of h."""
    if h.size < 2:
        raise PreconditionFailed("lambda undefined on singleton cosets")
    part = cosets(h)
    vals = [lambda_nontrivial(f, h, int(g)) for g in part.representatives]
    return float(np.mean(vals))
