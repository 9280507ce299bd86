"""Characters of F_p^n, the normalized Fourier transform, and coset averaging.

Conventions: the character indexed by t is chi_t(x) = omega^(t.x) with
omega = exp(2*pi*i/p), and fhat(t) = (1/N) * sum_x f(x) * omega^(t.x) with no
conjugation.  Inversion is f(x) = sum_t fhat(t) * omega^(-t.x).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NonRealResult
from .space import Space, Subspace, cosets

IMAG_TOL = 1e-10


@dataclass(frozen=True)
class GFunction:
    """A dense real-valued function on F_p^n; values indexed by point index.

    Weighted sets have values in [0, 1]; differences of such functions are
    allowed when ``signed`` is set.
    """

    space: Space
    values: np.ndarray = field(compare=False)
    signed: bool = False

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.shape != (self.space.N,):
            raise ValueError(f"expected {self.space.N} values, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        if not self.signed and (vals.min() < -1e-12 or vals.max() > 1 + 1e-12):
            raise ValueError("unsigned function values must lie in [0, 1]")
        object.__setattr__(self, "values", vals)
        vals.setflags(write=False)

    @property
    def density(self) -> float:
        return float(self.values.mean())

    def __sub__(self, other: "GFunction") -> "GFunction":
        if self.space != other.space:
            raise ValueError("functions live in different spaces")
        return GFunction(self.space, self.values - other.values, signed=True)


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients fhat(chi_t), indexed by t."""

    space: Space
    coeffs: np.ndarray = field(compare=False)

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.space.N,):
            raise ValueError(f"expected {self.space.N} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)
        c.setflags(write=False)


def constant(space: Space, value: float) -> GFunction:
    return GFunction(space, np.full(space.N, float(value)))


def indicator(space: Space, indices) -> GFunction:
    vals = np.zeros(space.N)
    vals[np.asarray(indices, dtype=np.int64)] = 1.0
    return GFunction(space, vals)


@lru_cache(maxsize=None)
def _char_matrix(p: int, sign: int) -> np.ndarray:
    """p x p matrix omega^(sign * t * x)."""
    t = np.arange(p)
    w = np.exp(sign * 2j * np.pi / p)
    return w ** np.outer(t, t)


def _apply_stages(values: np.ndarray, p: int, n: int, w: np.ndarray) -> np.ndarray:
    """Apply the p x p stage matrix along every tensor axis, fixed order."""
    arr = values.reshape((p,) * n) if n else values.copy()
    for axis in range(n):
        left = p**axis
        right = p ** (n - axis - 1)
        mid = arr.reshape(left, p, right)
        # einsum keeps summation order fixed and single-threaded
        arr = np.einsum("tp,apb->atb", w, mid, optimize=False)
    return arr.reshape(-1)


def dft(f: GFunction) -> Spectrum:
    """Forward transform via n radix-p tensor stages, O(N*n*p) operations."""
    sp = f.space
    out = _apply_stages(f.values.astype(np.complex128), sp.p, sp.n,
                        _char_matrix(sp.p, +1))
    return Spectrum(sp, out / sp.N)


def idft(s: Spectrum, imag_tol: float = IMAG_TOL) -> GFunction:
    """Inverse transform; raises NonRealResult if the output is not real."""
    sp = s.space
    out = _apply_stages(np.ascontiguousarray(s.coeffs), sp.p, sp.n,
                        _char_matrix(sp.p, -1))
    resid = float(np.abs(out.imag).max()) if sp.N else 0.0
    if resid > imag_tol:
        raise NonRealResult(f"imaginary residue {resid:.3e} exceeds {imag_tol:.1e}")
    return GFunction(sp, out.real, signed=True)


def average_over(f: GFunction, h: Subspace) -> GFunction:
    """The coset-average function, constant on each coset of h."""
    ids = h.coset_ids()
    n_cosets = f.space.p**h.codim
    sums = np.bincount(ids, weights=f.values, minlength=n_cosets)
    means = sums / h.size
    return GFunction(f.space, means[ids], signed=f.signed)


def sup_fourier_gap(f: GFunction, g: GFunction) -> tuple[float, int]:
    """max_t |(f-g)^(chi_t)| and the first argmax index."""
    if f.space != g.space:
        raise ValueError("functions live in different spaces")
    mags = np.abs(dft(f - g).coeffs)
    t = int(np.argmax(mags))
    return float(mags[t]), t
