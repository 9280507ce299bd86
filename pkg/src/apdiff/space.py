"""The ambient group F_p^n: point indexing, arithmetic, subspaces, cosets.

Points are integers in [0, p^n) under little-endian mixed-radix encoding:
index = sum_k x_k * p^(k-1), coordinate 1 fastest.  Subspaces are stored by
dual constraints in reduced row-echelon form, so equal subspaces compare
equal syntactically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BudgetExceeded

_SMALL_PRIMES = {3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47}


def _is_odd_prime(p: int) -> bool:
    if p in _SMALL_PRIMES:
        return True
    if p < 3 or p % 2 == 0:
        return False
    return all(p % q for q in range(3, int(p**0.5) + 1, 2))


@dataclass(frozen=True)
class Space:
    """F_p^n for a small odd prime p."""

    p: int
    n: int

    def __post_init__(self):
        if not _is_odd_prime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.n < 0:
            raise ValueError(f"dimension must be nonnegative, got {self.n}")
        if self.p**self.n > 2**62:
            raise ValueError("p^n exceeds machine-integer range")

    @property
    def N(self) -> int:
        return self.p**self.n

    @property
    def pows(self) -> np.ndarray:
        """Mixed-radix place values [1, p, p^2, ...]."""
        return _pows(self.p, self.n)

    @property
    def digits(self) -> np.ndarray:
        """(N, n) table of coordinates for every index."""
        return _digits(self.p, self.n)


@lru_cache(maxsize=None)
def _pows(p: int, n: int) -> np.ndarray:
    out = p ** np.arange(n, dtype=np.int64)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _digits(p: int, n: int) -> np.ndarray:
    idx = np.arange(p**n, dtype=np.int64)
    out = (idx[:, None] // _pows(p, n)[None, :]) % p
    out.setflags(write=False)
    return out


def point_of(space: Space, coords) -> int:
    """Index of the point with the given coordinates (coordinate 1 first)."""
    coords = np.asarray(coords, dtype=np.int64)
    if coords.shape != (space.n,):
        raise ValueError(f"expected {space.n} coordinates, got {coords.shape}")
    if np.any(coords < 0) or np.any(coords >= space.p):
        raise ValueError(f"coordinates must lie in [0, {space.p})")
    return int(coords @ space.pows)


def coords_of(space: Space, index: int) -> np.ndarray:
    """Coordinate vector of a point index."""
    if not 0 <= index < space.N:
        raise ValueError(f"index {index} out of range [0, {space.N})")
    return ((index // space.pows) % space.p).astype(np.int64)


def add(space: Space, a, b):
    """Coordinatewise sum of point indices (scalars or arrays)."""
    p = space.p
    pows = space.pows
    da = (np.asarray(a)[..., None] // pows) % p
    db = (np.asarray(b)[..., None] // pows) % p
    out = ((da + db) % p) @ pows
    return int(out) if np.isscalar(a) and np.isscalar(b) else out


def neg(space: Space, a):
    """Coordinatewise negation of point indices."""
    p = space.p
    pows = space.pows
    da = (np.asarray(a)[..., None] // pows) % p
    out = ((-da) % p) @ pows
    return int(out) if np.isscalar(a) else out


def scalar_mul(space: Space, c: int, a):
    """Scalar multiple c*a of point indices."""
    p = space.p
    pows = space.pows
    da = (np.asarray(a)[..., None] // pows) % p
    out = ((c % p) * da % p) @ pows
    return int(out) if np.isscalar(a) else out


def rref_mod_p(rows: np.ndarray, p: int) -> np.ndarray:
    """Reduced row-echelon form of an integer matrix mod p, zero rows dropped."""
    a = np.array(rows, dtype=np.int64) % p
    if a.size == 0:
        return a.reshape(0, rows.shape[1] if rows.ndim == 2 else 0)
    nrows, ncols = a.shape
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if a[i, c] % p:
                piv = i
                break
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, p)) % p
        for i in range(nrows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        r += 1
        if r == nrows:
            break
    return a[:r]


def solve_mod_p(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """One solution x of a @ x = b (mod p); raises if inconsistent."""
    a = np.asarray(a, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    aug = np.hstack([a, b[:, None]])
    red = rref_mod_p(aug, p)
    ncols = a.shape[1]
    x = np.zeros(ncols, dtype=np.int64)
    for row in red:
        nz = np.nonzero(row[:ncols])[0]
        if nz.size == 0:
            if row[ncols]:
                raise ValueError("inconsistent linear system mod p")
            continue
        x[nz[0]] = row[ncols]
    return x


@dataclass(frozen=True)
class Subspace:
    """Subspace {x : t.x = 0 for all constraint rows t}, constraints in RREF."""

    space: Space
    constraints: np.ndarray = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "constraints", rref_mod_p(
            np.asarray(self.constraints, dtype=np.int64).reshape(-1, self.space.n),
            self.space.p))
        self.constraints.setflags(write=False)

    def __eq__(self, other):
        return (isinstance(other, Subspace) and self.space == other.space
                and self.constraints.shape == other.constraints.shape
                and bool(np.all(self.constraints == other.constraints)))

    def __hash__(self):
        return hash((self.space, self.constraints.tobytes()))

    @property
    def codim(self) -> int:
        return self.constraints.shape[0]

    @property
    def dim(self) -> int:
        return self.space.n - self.codim

    @property
    def size(self) -> int:
        return self.space.p ** self.dim

    def syndromes(self, indices=None) -> np.ndarray:
        """Constraint values t.x mod p for each point, as a (m, codim) array."""
        sp = self.space
        digs = sp.digits if indices is None else (
            (np.asarray(indices, dtype=np.int64)[:, None] // sp.pows) % sp.p)
        return (digs @ self.constraints.T) % sp.p

    def contains(self, index: int) -> bool:
        return not np.any(self.syndromes(np.array([index]))[0])

    def members(self) -> np.ndarray:
        """Indices of all points of the subspace, ascending."""
        syn = self.syndromes()
        return np.nonzero(~np.any(syn, axis=1))[0].astype(np.int64)

    def basis(self) -> np.ndarray:
        """(dim, n) spanning basis of the subspace in RREF."""
        return nullspace_basis(self.constraints, self.space.p, self.space.n)

    def coset_ids(self) -> np.ndarray:
        """Coset label of every point; labels are dense in [0, p^codim)."""
        syn = self.syndromes()
        radix = self.space.p ** np.arange(self.codim, dtype=np.int64)
        return syn @ radix


def nullspace_basis(constraints: np.ndarray, p: int, n: int) -> np.ndarray:
    """Basis of the solution space of constraints @ x = 0 over F_p."""
    red = rref_mod_p(np.asarray(constraints, dtype=np.int64).reshape(-1, n), p)
    pivots = []
    for row in red:
        nz = np.nonzero(row)[0]
        pivots.append(int(nz[0]))
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, c in enumerate(free):
        basis[k, c] = 1
        for r, piv in enumerate(pivots):
            basis[k, piv] = (-red[r, c]) % p
    return rref_mod_p(basis, p) if len(free) else basis


def subspace_from_constraints(space: Space, ts) -> Subspace:
    """Annihilator of the given dual vectors (point indices or coordinate rows)."""
    ts = list(ts)
    if not ts:
        return Subspace(space, np.zeros((0, space.n), dtype=np.int64))
    rows = np.array([coords_of(space, t) if np.isscalar(t) or isinstance(t, (int, np.integer))
                     else np.asarray(t, dtype=np.int64) for t in ts])
    return Subspace(space, rows)


def full_space(space: Space) -> Subspace:
    return subspace_from_constraints(space, [])


def intersect(a: Subspace, b: Subspace) -> Subspace:
    if a.space != b.space:
        raise ValueError("subspaces live in different spaces")
    return Subspace(a.space, np.vstack([a.constraints, b.constraints]))


def pad_subspace(h: Subspace, target_codim: int) -> Subspace:
    """Shrink h to exactly target_codim by adding independent constraints.

    Added constraints are standard dual vectors, chosen in index order, so the
    result is deterministic and contained in h.
    """
    if not h.codim <= target_codim <= h.space.n:
        raise ValueError(
            f"target codim {target_codim} outside [{h.codim}, {h.space.n}]")
    rows = list(h.constraints)
    for k in range(h.space.n):
        if len(rows) == target_codim:
            break
        e = np.zeros(h.space.n, dtype=np.int64)
        e[k] = 1
        cand = rref_mod_p(np.array(rows + [e]), h.space.p)
        if cand.shape[0] > len(rows):
            rows = list(cand)
    return Subspace(h.space, np.array(rows))


@dataclass(frozen=True)
class CosetPartition:
    """The affine translates of a subspace, with canonical representatives."""

    subspace: Subspace
    representatives: np.ndarray

    @property
    def space(self) -> Space:
        return self.subspace.space

    def __len__(self):
        return len(self.representatives)

    def coset_points(self, k: int) -> np.ndarray:
        """All points of the k-th coset, ascending."""
        return add(self.space, self.subspace.members(),
                   np.int64(self.representatives[k]))


def cosets(h: Subspace, max_cosets: int = 1 << 22) -> CosetPartition:
    """Enumerate the cosets of h; representatives are minimal-index members."""
    n_cosets = h.space.p**h.codim
    if n_cosets > max_cosets:
        raise BudgetExceeded(f"{n_cosets} cosets exceed budget {max_cosets}")
    ids = h.coset_ids()
    # first occurrence over ascending indices is the minimal-index member
    _, first = np.unique(ids, return_index=True)
    return CosetPartition(h, np.sort(first).astype(np.int64))
