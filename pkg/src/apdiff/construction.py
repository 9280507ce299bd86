"""The lower-bound pipeline: interval gadget, level constructions, rounding.

The pipeline builds weighted sets f_i on F_p^(n_i) whose 3-AP density is
below the random bound alpha^3 for every nonzero common difference.  Level 1
plants a single light point; level i >= 2 replaces the mass on a chosen set of
heavy columns with a dot-product interval pattern along fresh coordinates.

The construction takes the perturbation size eta directly; the corresponding
approximation parameter is eps = 3 * eta^2.  Paper-scale schedules (where the
dimensions are exponential towers) live in the planner, which works in
log-space; the runnable pipeline accepts arbitrary small (m_i, mu_i) and
verifies all claimed properties numerically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .apstats import APReport, rho_all, rho_scan
from .errors import BudgetExhausted, PreconditionFailed, RetriesExhausted
from .fourier import GFunction, indicator
from .increment import TowerValue
from .space import Space

VALUE_TOL = 1e-12
STABILITY_TOL = 1e-9


# ---------------------------------------------------------------------------
# interval gadget

@dataclass(frozen=True)
class IntervalGadget:
    """The interval I = {0, ..., ceil(2p/3)-1} in F_p and its 3-AP profile.

    h[b] is the density of 3-APs in I with common difference b; counts are
    exact integers, so the gadget identities hold with no tolerance.
    """

    p: int
    interval: np.ndarray = field(compare=False)
    counts: np.ndarray = field(compare=False)  # integer 3-AP counts per b
    h: np.ndarray = field(compare=False)

    @property
    def zeta(self) -> Fraction:
        return Fraction(len(self.interval), self.p)

    @property
    def phi(self) -> Fraction:
        return 1 - self.zeta

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())


def interval_gadget(p: int) -> IntervalGadget:
    """Exact per-difference 3-AP counts of the canonical interval."""
    size = -(-2 * p // 3)  # ceil(2p/3)
    interval = np.arange(size, dtype=np.int64)
    in_i = np.zeros(p, dtype=bool)
    in_i[:size] = True
    counts = np.empty(p, dtype=np.int64)
    for b in range(p):
        counts[b] = sum(1 for x in range(p)
                        if in_i[x] and in_i[(x + b) % p] and in_i[(x + 2 * b) % p])
    g = IntervalGadget(p=p, interval=interval, counts=counts, h=counts / p)
    # sanity: these are theorems for every odd prime, not tolerances
    assert Fraction(1, 5) <= g.phi <= Fraction(1, 3)
    assert g.h[0] == float(g.zeta)
    zeta, phi = float(g.zeta), float(g.phi)
    assert g.counts.sum() / p**2 <= zeta**3 - (phi**2 / 2 - phi**3) + 1e-15
    return g


# ---------------------------------------------------------------------------
# parameters and level state

@dataclass(frozen=True)
class ConstructionParams:
    """Knobs for the runnable pipeline.

    dims = (m_1, ..., m_s); mus = (mu_2, ..., mu_s) are the fractions of
    columns perturbed at each level and must make mu_i * p^(n_{i-1}) integral.
    """

    p: int
    alpha: float
    eta: float
    dims: tuple[int, ...]
    mus: tuple[float, ...] = ()
    seed: int = 0
    slack: float = 0.0
    max_attempts: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(m) for m in self.dims))
        object.__setattr__(self, "mus", tuple(float(m) for m in self.mus))
        if not 0 < self.alpha <= 0.5:
            raise ValueError("alpha must lie in (0, 1/2]")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if not self.dims or any(m < 0 for m in self.dims):
            raise ValueError("dims must be a nonempty tuple of nonnegative ints")
        if len(self.mus) != len(self.dims) - 1:
            raise ValueError("need one mu per level beyond the first")
        n1 = self.p ** self.dims[0]
        if self.eta * (n1 - 1) > 1 + VALUE_TOL:
            raise ValueError(
                f"eta * (p^m1 - 1) = {self.eta * (n1 - 1):.6g} exceeds 1")
        gadget = interval_gadget(self.p)
        if (1 / float(gadget.zeta)) * (1 + self.eta) * self.alpha > 1 + VALUE_TOL:
            raise ValueError("top value (1/zeta)(1+eta) alpha exceeds 1")
        n_prev = self.dims[0]
        for i, mu in enumerate(self.mus):
            size = mu * self.p**n_prev
            if not (0 <= mu <= 1) or abs(size - round(size)) > 1e-9:
                raise ValueError(
                    f"mu_{i + 2} * p^{n_prev} = {size:.6g} is not integral")
            n_prev += self.dims[i + 1]

    @property
    def epsilon(self) -> float:
        """Approximation parameter implied by eta (paper: eta = sqrt(eps/3))."""
        return 3 * self.eta**2

    def value_levels(self) -> dict[str, float]:
        gadget = interval_gadget(self.p)
        low = (1 - self.eta * (self.p ** self.dims[0] - 1)) * self.alpha
        mid = (1 + self.eta) * self.alpha
        high = (1 / float(gadget.zeta)) * mid
        return {"zero": 0.0, "low": low, "mid": mid, "high": high}


@dataclass(frozen=True)
class LevelState:
    """One level of the construction: the function plus its bookkeeping."""

    level: int
    params: ConstructionParams
    f: GFunction
    heavy: np.ndarray = field(compare=False)   # points currently at value mid
    chosen: np.ndarray = field(compare=False)  # columns perturbed at this level
    directions: dict[int, int] = field(default_factory=dict)

    @property
    def z(self) -> float:
        """3-AP density of the trivial common difference, E[f^3]."""
        return float(np.mean(self.f.values**3))


def level1(params: ConstructionParams) -> LevelState:
    """f_1: one light point at 0, value (1+eta) alpha elsewhere; density alpha."""
    sp = Space(params.p, params.dims[0])
    levels = params.value_levels()
    vals = np.full(sp.N, levels["mid"])
    vals[0] = levels["low"]
    f = GFunction(sp, vals)
    return LevelState(level=1, params=params, f=f,
                      heavy=np.arange(1, sp.N, dtype=np.int64),
                      chosen=np.empty(0, dtype=np.int64), directions={})


# ---------------------------------------------------------------------------
# direction sampling

def _projective_key(vec_digits: np.ndarray, p: int) -> tuple:
    """Scale so the first nonzero digit is 1; pairwise-independence canonical."""
    nz = np.nonzero(vec_digits)[0]
    lead = int(vec_digits[nz[0]])
    inv = pow(lead, -1, p)
    return tuple((vec_digits * inv) % p)


def _rank_mod_p(rows: np.ndarray, p: int) -> int:
    a = np.array(rows, dtype=np.int64) % p
    rank = 0
    for c in range(a.shape[1]):
        piv = None
        for i in range(rank, a.shape[0]):
            if a[i, c]:
                piv = i
                break
        if piv is None:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        a[rank] = (a[rank] * pow(int(a[rank, c]), -1, p)) % p
        for i in range(a.shape[0]):
            if i != rank and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[rank]) % p
        rank += 1
    return rank


def _ap_triples(points: np.ndarray, space: Space) -> list[tuple[int, int, int]]:
    """Distinct triples within points forming a nontrivial 3-AP, each line once."""
    pts = set(int(x) for x in points)
    p, pows = space.p, space.pows
    digs = {x: (x // pows) % p for x in pts}
    seen = set()
    out = []
    for a in pts:
        for b in pts:
            if a == b:
                continue
            c = int(((2 * digs[b] - digs[a]) % p) @ pows)
            if c in pts and c != a and c != b:
                key = frozenset((a, b, c))
                if key not in seen:
                    seen.add(key)
                    out.append((a, b, c))
    return out


def sample_directions(h_points, m: int, gadget: IntervalGadget,
                      slack: float = 0.0, seed: int = 0,
                      budget: int = 1000, strict: bool = False,
                      space: Space | None = None) -> dict[int, int]:
    """Rejection-sample nonzero directions v(x) in F_p^m for each x.

    Accepts when all directions are distinct and pairwise independent, every
    3-AP triple inside h_points gets linearly independent directions (all
    distinct triples when ``strict``), and for every nonzero d in F_p^m the
    mean of h(d . v(x)) over h_points stays below zeta^3 - 1/125 + slack.
    All conditions are checked by direct enumeration.
    """
    p = gadget.p
    h_points = np.asarray(h_points, dtype=np.int64)
    k = h_points.size
    if k == 0:
        return {}
    if m < 1:
        raise ValueError("direction dimension must be at least 1")
    threshold = float(gadget.zeta) ** 3 - 1 / 125 + slack
    nm = p**m
    m_pows = p ** np.arange(m, dtype=np.int64)
    all_digits = (np.arange(nm, dtype=np.int64)[:, None] // m_pows) % p
    if space is None:
        # infer an ambient space just large enough to index h_points
        dim = max(1, int(math.ceil(math.log(int(h_points.max()) + 1, p)))) \
            if h_points.max() > 0 else 1
        space = Space(p, dim)
    if strict:
        triples = [(int(a), int(b), int(c))
                   for ai, a in enumerate(h_points)
                   for bi, b in enumerate(h_points[ai + 1:], ai + 1)
                   for c in h_points[bi + 1:]]
    else:
        triples = _ap_triples(h_points, space)

    rng = np.random.default_rng(seed)
    fails = {"distinct": 0, "h_condition": 0, "pairwise": 0, "triple": 0}
    for _ in range(budget):
        v = rng.integers(1, nm, size=k, dtype=np.int64)
        v_digits = all_digits[v]
        ok = True
        if len(set(v.tolist())) != k:
            fails["distinct"] += 1
            ok = False
        keys = {int(x): _projective_key(v_digits[i], p)
                for i, x in enumerate(h_points)}
        if len(set(keys.values())) != k:
            fails["pairwise"] += 1
            ok = False
        vmap = {int(x): v_digits[i] for i, x in enumerate(h_points)}
        for (a, b, c) in triples:
            if _rank_mod_p(np.array([vmap[a], vmap[b], vmap[c]]), p) != 3:
                fails["triple"] += 1
                ok = False
                break
        dots = (all_digits @ v_digits.T) % p
        means = gadget.h[dots].mean(axis=1)
        if nm > 1 and float(means[1:].max()) > threshold + VALUE_TOL:
            fails["h_condition"] += 1
            ok = False
        if ok:
            return {int(x): int(vi) for x, vi in zip(h_points, v)}
    raise BudgetExhausted(
        f"no valid direction map in {budget} attempts", diagnostics=fails)


# ---------------------------------------------------------------------------
# level extension

def extend_level(prev: LevelState, m_i: int, mu_i: float, seed: int,
                 slack: float | None = None, budget: int | None = None,
                 pick: str = "lowest") -> LevelState:
    """Build f_i from f_{i-1} by perturbing mu_i of the heavy columns."""
    params = prev.params
    p = params.p
    sp_prev = prev.f.space
    n_prev, cap_prev = sp_prev.n, sp_prev.N
    size_h = mu_i * cap_prev
    if abs(size_h - round(size_h)) > 1e-9:
        raise ValueError(f"mu * p^{n_prev} = {size_h:.6g} is not integral")
    size_h = round(size_h)
    if size_h > prev.heavy.size:
        raise PreconditionFailed(
            f"only {prev.heavy.size} heavy columns available, need {size_h}")
    slack = params.slack if slack is None else slack
    budget = params.max_attempts if budget is None else budget
    gadget = interval_gadget(p)
    levels = params.value_levels()

    if pick == "lowest":
        chosen = np.sort(prev.heavy)[:size_h]
    elif pick == "random":
        rng = np.random.default_rng(seed + 1)
        chosen = np.sort(rng.choice(prev.heavy, size=size_h, replace=False))
    else:
        raise ValueError(f"unknown pick mode {pick!r}")

    directions = (sample_directions(chosen, m_i, gadget, slack=slack,
                                    seed=seed, budget=budget, space=sp_prev)
                  if size_h else {})

    nm = p**m_i
    m_pows = p ** np.arange(m_i, dtype=np.int64)
    y_digits = (np.arange(nm, dtype=np.int64)[:, None] // m_pows) % p
    in_i = np.zeros(p, dtype=bool)
    in_i[gadget.interval] = True
    # grid[y, x] is the value at index x + p^n_prev * y
    grid = np.tile(prev.f.values, (nm, 1))
    for x in chosen:
        dots = (y_digits @ ((int(directions[int(x)]) // m_pows) % p)) % p
        grid[:, x] = np.where(in_i[dots], levels["high"], 0.0)
    f = GFunction(Space(p, n_prev + m_i), grid.reshape(-1))
    heavy = np.nonzero(np.abs(f.values - levels["mid"]) <= VALUE_TOL)[0]
    return LevelState(level=prev.level + 1, params=params, f=f,
                      heavy=heavy.astype(np.int64),
                      chosen=np.asarray(chosen, dtype=np.int64),
                      directions=directions)


def build_pipeline(params: ConstructionParams) -> list[LevelState]:
    """Run all levels; one derived seed per level for reproducibility."""
    states = [level1(params)]
    seeds = np.random.SeedSequence(params.seed).generate_state(
        max(1, len(params.mus)))
    for i, (m_i, mu_i) in enumerate(zip(params.dims[1:], params.mus)):
        states.append(extend_level(states[-1], m_i, mu_i, int(seeds[i])))
    return states


# ---------------------------------------------------------------------------
# verification

@dataclass(frozen=True)
class PropertyCheck:
    prop: int
    passed: bool
    measured: float
    bound: float
    detail: str = ""


@dataclass(frozen=True)
class PropertyReport:
    level: int
    epsilon: float
    checks: tuple[PropertyCheck, ...]
    ap_report: APReport

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, prop: int) -> PropertyCheck:
        return next(c for c in self.checks if c.prop == prop)


def verify_five_properties(state: LevelState,
                           epsilon: float | None = None) -> PropertyReport:
    """Measure the five construction properties of one level directly."""
    params = state.params
    eps = params.epsilon if epsilon is None else float(epsilon)
    alpha = params.alpha
    levels = params.value_levels()
    vals = state.f.values
    checks = []

    density = state.f.density
    checks.append(PropertyCheck(1, abs(density - alpha) <= 1e-9,
                                density, alpha, "density equals alpha"))

    allowed = np.array(sorted(set(levels.values())))
    dist = np.min(np.abs(vals[:, None] - allowed[None, :]), axis=1)
    worst = float(dist.max())
    checks.append(PropertyCheck(2, worst <= VALUE_TOL, worst, VALUE_TOL,
                                "values drawn from the four construction levels"))

    off_mid = float(np.mean(np.abs(vals - levels["mid"]) > VALUE_TOL))
    bound3 = params.p * math.sqrt(eps) + sum(params.mus[:state.level - 1])
    checks.append(PropertyCheck(3, off_mid <= bound3 + 1e-12, off_mid, bound3,
                                "fraction of non-heavy points"))

    report = rho_scan(state.f)
    max_d, max_rho = report.max_nonzero
    bound4 = (1 - eps) * alpha**3
    checks.append(PropertyCheck(4, max_rho < bound4, max_rho, bound4,
                                f"max nonzero-difference density at d={max_d}; "
                                f"margin {alpha**3 - max_rho:.3e}, eps_effective "
                                f"{1 - max_rho / alpha**3:.3e}"))

    # paper schedule value mu_1 = 90 p eps^(1/4); desk levels use the given mus
    mu_level = (90 * params.p * eps**0.25 if state.level == 1
                else params.mus[state.level - 2])
    bound5 = (1 + 4 / 3 * mu_level) * alpha**3
    checks.append(PropertyCheck(5, report.z < bound5, report.z, bound5,
                                "trivial-difference density recursion bound"))
    return PropertyReport(level=state.level, epsilon=eps,
                          checks=tuple(checks), ap_report=report)


def stability_check(state_i: LevelState, state_prev: LevelState) -> float:
    """max over d with nonzero first-block restriction of
    |rho_i(d) - rho_{i-1}(d*)|; the construction makes this 0 exactly."""
    rho_i = rho_all(state_i.f)
    rho_prev = rho_all(state_prev.f)
    n_prev = state_prev.f.space.N
    ds = np.arange(state_i.f.space.N, dtype=np.int64)
    dstar = ds % n_prev
    mask = dstar != 0
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(rho_i[mask] - rho_prev[dstar[mask]])))


# ---------------------------------------------------------------------------
# weighted -> set rounding

@dataclass(frozen=True)
class RoundingResult:
    members: np.ndarray
    density_deviation: float
    rho_deviation: float
    attempts: int
    accepted: bool


def round_to_set(f: GFunction, eps_star: float, seed: int,
                 retries: int = 3) -> RoundingResult:
    """Sample x into the set with probability f(x); accept when the density
    and every nonzero-difference 3-AP density deviate by at most eps_star."""
    sp = f.space
    hypothesis_floor = 2 * math.sqrt(math.log(12 * sp.N) / sp.N)
    if eps_star < hypothesis_floor:
        warnings.warn(
            f"eps_star {eps_star:.4g} is below the concentration hypothesis "
            f"floor {hypothesis_floor:.4g}; proceeding best-effort")
    rho_f = rho_all(f)
    streams = np.random.SeedSequence(seed).spawn(retries)
    best = None
    for attempt, ss in enumerate(streams, start=1):
        rng = np.random.default_rng(ss)
        members = np.nonzero(rng.random(sp.N) < f.values)[0].astype(np.int64)
        dens_dev = abs(members.size / sp.N - f.density)
        rho_a = rho_all(indicator(sp, members))
        rho_dev = (float(np.max(np.abs(rho_a[1:] - rho_f[1:])))
                   if sp.N > 1 else 0.0)
        result = RoundingResult(members, dens_dev, rho_dev, attempt,
                                dens_dev <= eps_star and rho_dev <= eps_star)
        if result.accepted:
            return result
        if best is None or max(dens_dev, rho_dev) < max(best.density_deviation,
                                                        best.rho_deviation):
            best = result
    raise RetriesExhausted(
        f"no attempt met eps_star = {eps_star:.4g} in {retries} tries",
        best=best)


# ---------------------------------------------------------------------------
# paper-scale schedule planner

def _tv_add_scalar(tv: TowerValue, c: float) -> TowerValue:
    if tv.height == 0:
        return TowerValue(tv.base, 0, tv.top + c)
    h, t = tv.canonical()
    if h == 1:
        return TowerValue(tv.base, 1,
                          t + math.log1p(c * tv.base**-t) / math.log(tv.base)
                          if t < 300 else t)
    return TowerValue(tv.base, h, t)  # correction below float precision


def _tv_add(a: TowerValue, b: TowerValue) -> TowerValue:
    ea, eb = a.exact(), b.exact()
    if ea is not None and eb is not None:
        return TowerValue(a.base, 0, float(ea + eb))
    lo, hi = sorted((a, b))
    lo_e = lo.exact()
    if lo_e is not None and hi.height >= 1:
        # hi = base^e; hi + lo = base^(e + log_base(1 + lo/hi))
        h, t = hi.canonical()
        if h == 1 and t < 300:
            return TowerValue(hi.base, 1,
                              t + math.log1p(lo_e * hi.base**-t)
                              / math.log(hi.base))
    return hi  # the smaller summand is below float precision


@dataclass(frozen=True)
class TowerPlan:
    p: int
    epsilon: float
    s: int
    m1: int
    sigma: float
    mus: tuple[float, ...]            # mu_1 .. mu_s
    m_towers: tuple[TowerValue, ...]  # m_1 .. m_s
    n_towers: tuple[TowerValue, ...]  # n_1 .. n_s
    regime_ok: bool
    m2_chain: tuple[dict, ...]
    mi_chain: tuple[dict, ...]
    min_height: float                 # claimed tower height (1/52) log2(2/eps)

    @property
    def all_checks_pass(self) -> bool:
        return all(c["pass"] for c in self.m2_chain + self.mi_chain)


def plan_lower_schedule(p: int, epsilon: float) -> TowerPlan:
    """Compute the level schedule (s, m_i, mu_i, sigma) in log-space and
    verify the growth inequalities m_2 > eps^(-1/8) and m_{i+1} > p^(m_i)."""
    if p < 3 or p % 2 == 0:
        raise ValueError("p must be an odd prime")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    s = math.floor(math.log(1 / (8 * p * epsilon**0.25), 90))
    if s < 1:
        raise ValueError(f"epsilon {epsilon:.3g} too large: schedule is empty")
    m1 = math.floor(0.5 * math.log(3 / epsilon, p))
    if m1 < 1:
        raise ValueError(f"epsilon {epsilon:.3g} too large: m1 = 0")
    sigma = 1e4 * math.log(p)
    mus = tuple(90.0**i * p * epsilon**0.25 for i in range(1, s + 1))
    regime_ok = epsilon <= 2.0**-160 * p**-8.0 * (1 + 1e-12)

    logp = math.log(p)
    m_towers = [TowerValue(p, 0, float(m1))]
    n_towers = [TowerValue(p, 0, float(m1))]
    for i in range(2, s + 1):
        offset = math.log(mus[i - 1] / sigma) / logp
        exponent = _tv_add_scalar(n_towers[-1], offset)
        m_towers.append(exponent.tower_up())
        n_towers.append(_tv_add(n_towers[-1], m_towers[-1]))

    log2eps = math.log2(epsilon)
    log2_m2 = (math.log2(mus[1]) + m1 * math.log2(p) - math.log2(sigma)
               if s >= 2 else math.inf)
    chain = []
    if s >= 2:
        c1 = math.log2(8100 * p * epsilon**0.25 * (3 / epsilon)**0.5
                       / (p * sigma))
        steps = [("m2 > mu2 (3/eps)^(1/2) / (p sigma)", log2_m2, c1),
                 ("... > eps^(-1/4) / ln p",
                  c1, -0.25 * log2eps - math.log2(math.log(p))),
                 ("... > eps^(-1/8)",
                  -0.25 * log2eps - math.log2(math.log(p)), -0.125 * log2eps),
                 ("eps^(-1/8) >= 2^20 p",
                  -0.125 * log2eps, 20 + math.log2(p))]
        for name, lhs, rhs in steps:
            ok = lhs >= rhs - 1e-9
            if not regime_ok and name != steps[0][0]:
                ok = True  # regime-dependent links are skipped outside regime
            chain.append({"check": name, "log2_lhs": lhs, "log2_rhs": rhs,
                          "pass": bool(ok)})
    mi_chain = []
    for i in range(2, s):
        # m_{i+1} > p^(m_i)  <=>  n_i + log_p(mu_{i+1}/sigma) > m_i
        #                    <=>  n_{i-1} > log_p(sigma/mu_{i+1}),
        # which compares a tower against a small scalar and so stays exact
        # where the direct comparison would collapse in float precision.
        need = math.log(sigma / mus[i]) / logp
        mi_chain.append({"check": f"m{i + 1} > p^m{i}", "log_p_needed": need,
                         "pass": bool(TowerValue(p, 0, need) < n_towers[i - 2])})
    return TowerPlan(p=p, epsilon=epsilon, s=s, m1=m1, sigma=sigma, mus=mus,
                     m_towers=tuple(m_towers), n_towers=tuple(n_towers),
                     regime_ok=regime_ok, m2_chain=tuple(chain),
                     mi_chain=tuple(mi_chain),
                     min_height=math.log2(2 / epsilon) / 52)
