"""The upper-bound engine: mean cube density, the increment step, and planners.

The increment step takes the regularity parameter eta as a caller-supplied
knob (the textbook value eta = epsilon/12 forces codimensions that are far
beyond desk scale) and asserts the proof-chain inequality
b(H') >= 2 b(H) - E_j[lambda(H_j)] - 6 eta on every successful call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .apstats import mean_lambda_over_cosets
from .errors import BudgetExceeded, CertificationFailed, PreconditionFailed
from .fourier import GFunction
from .regularity import weak_regular_subspace
from .space import Space, Subspace, add, cosets, full_space, solve_mod_p

B_TOL = 1e-9
DEFAULT_CONSTRAINT_BUDGET = 50_000


# ---------------------------------------------------------------------------
# tower-valued integers

@dataclass(frozen=True)
class TowerValue:
    """base ^ base ^ ... ^ top, iterated ``height`` times (height 0 is top).

    Exact as a machine integer when small; otherwise compared through the
    canonical form with top in [1, base).
    """

    base: int
    height: int
    top: float

    def canonical(self) -> tuple[int, float]:
        h, t = self.height, float(self.top)
        logb = math.log(self.base)
        while t >= self.base:
            t = math.log(t) / logb
            h += 1
        while h > 0 and t < 1:
            t = self.base**t
            h -= 1
        return h, t

    def exact(self) -> int | None:
        """The integer value when it fits machine range, else None."""
        h, t = self.height, float(self.top)
        while h > 0 and t < 62:
            t = self.base**t
            h -= 1
        if h == 0 and t < 2**62:
            return round(t)
        return None

    def _key(self):
        return self.canonical()

    def __lt__(self, other):
        return self._key() < other._key()

    def __le__(self, other):
        return self._key() <= other._key()

    def tower_up(self) -> "TowerValue":
        """base ** self."""
        return TowerValue(self.base, self.height + 1, self.top)

    def __str__(self):
        e = self.exact()
        if e is not None:
            return str(e)
        h, t = self.canonical()
        return f"{self.base}^^{h}({t:.6g})"


# ---------------------------------------------------------------------------
# mean cube density and the increment step

def mean_cube_density(f: GFunction, h: Subspace) -> float:
    """b(H) = E_g[alpha(H+g)^3] over the coset partition of h."""
    ids = h.coset_ids()
    n_cosets = f.space.p**h.codim
    means = np.bincount(ids, weights=f.values, minlength=n_cosets) / h.size
    return float(np.mean(means**3))


@dataclass(frozen=True)
class StepRecord:
    codim: int
    b: float
    mean_lambda: float
    eta_used: float
    codim_after: int
    b_after: float


@dataclass(frozen=True)
class IncrementTrace:
    steps: list[StepRecord] = field(default_factory=list)
    termination: str = "Budget"  # SmallSubspace | PreconditionFailed | Budget
    measured_mean_lambda: float | None = None
    final_codim: int | None = None


def _coset_function(f: GFunction, sub_space: Space, basis: np.ndarray,
                    rep: int) -> tuple[GFunction, np.ndarray]:
    """f restricted to the coset basis-span + rep, in subspace coordinates."""
    sp = f.space
    coords = (sub_space.digits @ basis) % sp.p
    base_idx = coords @ sp.pows
    idx = add(sp, base_idx, np.int64(rep))
    return GFunction(sub_space, f.values[idx]), idx


def increment_step(f: GFunction, h: Subspace, epsilon: float, eta: float,
                   max_new_constraints: int = DEFAULT_CONSTRAINT_BUDGET,
                   ) -> tuple[Subspace, StepRecord]:
    """One mean-cube-density increment: per-coset weak regularity, intersect.

    Preconditions: |H| > alpha / (3 eta) and E_j[lambda(H_j)] < alpha^3 - eps.
    Postconditions (asserted): the codimension bound and
    b(H') >= 2 b(H) - E_j[lambda(H_j)] - 6 eta.
    """
    sp = f.space
    alpha = f.density
    if h.size <= alpha / (3 * eta) or h.size < 2:
        raise PreconditionFailed(
            f"|H| = {h.size} too small for eta = {eta} (need > alpha/(3 eta))")
    mean_lam = mean_lambda_over_cosets(f, h)
    if mean_lam >= alpha**3 - epsilon:
        raise PreconditionFailed(
            "mean nontrivial 3-AP density is not small: a good difference "
            f"exists in H (measured {mean_lam:.6g} >= {alpha**3 - epsilon:.6g})",
            measured=mean_lam)
    codim_cap = math.floor(eta**-2)
    n_cosets = sp.p**h.codim
    if n_cosets * codim_cap > max_new_constraints:
        raise BudgetExceeded(
            f"{n_cosets} cosets x {codim_cap} constraints exceed budget "
            f"{max_new_constraints}")

    basis = h.basis()
    sub_space = Space(sp.p, h.dim)
    part = cosets(h)
    b_before = mean_cube_density(f, h)

    pulled = [h.constraints]
    for rep in part.representatives:
        fj, _ = _coset_function(f, sub_space, basis, int(rep))
        cert = weak_regular_subspace(fj, eta, pad=True)
        for t_sub in cert.subspace.constraints:
            pulled.append(solve_mod_p(basis, t_sub, sp.p)[None, :])
    h_new = Subspace(sp, np.vstack(pulled))

    codim_bound = h.codim + codim_cap * n_cosets
    if h_new.codim > codim_bound:
        raise CertificationFailed(
            f"codim {h_new.codim} exceeds bound {codim_bound}")
    b_after = mean_cube_density(f, h_new)
    if b_after < 2 * b_before - mean_lam - 6 * eta - B_TOL:
        raise CertificationFailed(
            f"increment inequality violated: b(H') = {b_after:.9g} < "
            f"2 b(H) - mean_lambda - 6 eta = "
            f"{2 * b_before - mean_lam - 6 * eta:.9g}")
    record = StepRecord(codim=h.codim, b=b_before, mean_lambda=mean_lam,
                        eta_used=eta, codim_after=h_new.codim, b_after=b_after)
    return h_new, record


def run_increment(f: GFunction, epsilon: float, eta_schedule,
                  max_steps: int = 16,
                  max_new_constraints: int = DEFAULT_CONSTRAINT_BUDGET,
                  ) -> IncrementTrace:
    """Iterate increment_step from the full space until a stop condition."""
    alpha = f.density
    etas = ([float(eta_schedule)] * max_steps if np.isscalar(eta_schedule)
            else list(eta_schedule)[:max_steps])
    h = full_space(f.space)
    steps: list[StepRecord] = []
    termination = "Budget"
    measured = None
    for eta in etas:
        if h.size < max(4 * alpha / epsilon, 2):
            termination = "SmallSubspace"
            break
        try:
            h, record = increment_step(f, h, epsilon, eta, max_new_constraints)
        except PreconditionFailed as exc:
            termination = "PreconditionFailed"
            measured = exc.measured
            break
        except BudgetExceeded:
            termination = "Budget"
            break
        steps.append(record)
        if record.codim_after == record.codim:
            # regularity added nothing; no further refinement is possible
            termination = "Budget"
            break
    return IncrementTrace(steps=steps, termination=termination,
                          measured_mean_lambda=measured, final_codim=h.codim)


# ---------------------------------------------------------------------------
# tower-height planner for the upper bound

@dataclass(frozen=True)
class UpperPlan:
    p: int
    epsilon: float
    alpha: float
    height: int
    tower: TowerValue  # height-many p's with 1/epsilon on top
    max_steps: float   # bound on the number of increment iterations
    codim_checks: list[dict] = field(default_factory=list)

    @property
    def all_checks_pass(self) -> bool:
        return all(c["pass"] for c in self.codim_checks)


def plan_upper_bound(p: int, epsilon: float, alpha: float) -> UpperPlan:
    """Tower height ceil(log2((alpha - alpha^3)/epsilon)) + 5, with 1/eps on
    top, plus the log-space codimension recursion checks."""
    gap = alpha - alpha**3
    if not 0 < epsilon < gap:
        raise ValueError(
            f"epsilon must lie in (0, alpha - alpha^3) = (0, {gap:.6g})")
    height = math.ceil(math.log2(gap / epsilon)) + 5
    max_steps = 2 + math.log2(gap / epsilon)

    # codim recursion c_{i+1} = c_i + p^{c_i} * 144 / eps^2, tracked in log2
    log2p = math.log2(p)
    log2_term = math.log2(144) - 2 * math.log2(epsilon)
    rhs_const = math.log2(145**2) - 4 * math.log2(epsilon)
    checks = []
    c = 0.0  # linear codim, saturates to inf; log-space carries the checks on
    for i in range(max(1, math.ceil(max_steps))):
        growth = c * log2p + log2_term  # log2 of the p^codim * 144/eps^2 term
        log2_cnext = (float(np.logaddexp2(math.log2(c), growth)) if c > 0
                      else growth)
        lhs = 1 + log2_cnext
        rhs = max(rhs_const, 2 * c * log2p)
        checks.append({"step": i, "log2_codim": log2_cnext,
                       "pass": bool(lhs <= rhs)})
        c = 2.0**log2_cnext if log2_cnext < 1023 else math.inf
    tower = TowerValue(p, height, 1.0 / epsilon)
    return UpperPlan(p=p, epsilon=epsilon, alpha=alpha, height=height,
                     tower=tower, max_steps=max_steps, codim_checks=checks)
