"""Slow reference implementations, straight from the definitions.

These validate the fast paths and generate test fixtures.  They share no code
with the implementations they check, accept only small inputs, and fail hard
beyond their budgets so they cannot sneak into benchmarks.
"""

from __future__ import annotations

import numpy as np

from .errors import BudgetExceeded
from .fourier import GFunction, Spectrum
from .space import Space

NAIVE_DFT_BUDGET = 3**8
NAIVE_RHO_BUDGET = 3**7
_CHUNK = 512


def _digit_table(space: Space) -> np.ndarray:
    idx = np.arange(space.N, dtype=np.int64)
    return (idx[:, None] // space.pows[None, :]) % space.p


def naive_dft(f: GFunction) -> Spectrum:
    """O(N^2) transform: fhat(t) = (1/N) sum_x f(x) omega^(t.x)."""
    sp = f.space
    if sp.N > NAIVE_DFT_BUDGET:
        raise BudgetExceeded(f"N={sp.N} exceeds naive DFT budget {NAIVE_DFT_BUDGET}")
    digs = _digit_table(sp)
    omega = np.exp(2j * np.pi / sp.p)
    out = np.empty(sp.N, dtype=np.complex128)
    for start in range(0, sp.N, _CHUNK):
        t_digs = digs[start:start + _CHUNK]
        dots = (t_digs @ digs.T) % sp.p
        out[start:start + _CHUNK] = (omega**dots) @ f.values
    return Spectrum(sp, out / sp.N)


def naive_rho(f: GFunction, d: int) -> float:
    """E_x[f(x) f(x+d) f(x+2d)] by literal summation."""
    sp = f.space
    if sp.N > NAIVE_RHO_BUDGET:
        raise BudgetExceeded(f"N={sp.N} exceeds naive rho budget {NAIVE_RHO_BUDGET}")
    p, pows = sp.p, sp.pows
    d_digs = (d // pows) % p
    total = 0.0
    for x in range(sp.N):
        x_digs = (x // pows) % p
        x1 = int(((x_digs + d_digs) % p) @ pows)
        x2 = int(((x_digs + 2 * d_digs) % p) @ pows)
        total += f.values[x] * f.values[x1] * f.values[x2]
    return total / sp.N


def naive_lambda(f: GFunction) -> float:
    """E over (x, y) with z = 2y - x of f(x) f(y) f(z), by full enumeration."""
    sp = f.space
    if sp.N > NAIVE_RHO_BUDGET:
        raise BudgetExceeded(f"N={sp.N} exceeds naive lambda budget {NAIVE_RHO_BUDGET}")
    digs = _digit_table(sp)
    vals = f.values
    total = 0.0
    for x in range(sp.N):
        z_idx = ((2 * digs - digs[x]) % sp.p) @ sp.pows
        total += vals[x] * float(vals @ vals[z_idx])
    return total / sp.N**2


def exact_count_3aps(space: Space, members, d: int) -> int:
    """#{x : x, x+d, x+2d all in the set}, exact integer arithmetic."""
    in_set = set(int(m) for m in members)
    p, pows = space.p, space.pows
    d_digs = (d // pows) % p
    count = 0
    for x in in_set:
        x_digs = (x // pows) % p
        x1 = int(((x_digs + d_digs) % p) @ pows)
        x2 = int(((x_digs + 2 * d_digs) % p) @ pows)
        if x1 in in_set and x2 in in_set:
            count += 1
    return count
