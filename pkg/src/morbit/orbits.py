"""Winding-class loops, the discrete action, and the periodic-orbit search.

A trajectory making k1 windings of the circle in time T = k2*T0 is written
x(t) = rho*t + y(t) with rho = k1/(k2*T0) and y periodic; loops are stored
as the N samples of y on the uniform grid.  The action

    f = (1/T) * integral( |x'|^2 / 2 - V(t, x) ) dt

is discretized with two-point differences centered at cell midpoints for
the kinetic term and the rectangle rule (= periodic trapezoid) for the
potential term; its exact gradient and Hessian with respect to the y
samples drive a multi-start deflated Newton search, and converged loops
are refined by single-shooting Newton on the period map.
"""

from __future__ import annotations

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import (
    DEGENERATE,
    MonodromyResult,
    State,
    flow,
    flow_with_variational,
    linearize_along,
    monodromy,
)
from .errors import ValidationError
from .potential import PotentialSpec

log = logging.getLogger(__name__)

DEFAULT_SAMPLES_PER_PERIOD = 256
DEFAULT_TOL_RESIDUAL = 1e-10
DEFAULT_TOL_DEDUP = 1e-6
DEFAULT_TOL_DEGENERATE = 1e-6


@dataclass(frozen=True)
class OrbitClass:
    """Winding class: k1 windings in k2 base periods."""

    k1: int
    k2: int
    T0: float = 1.0

    def __post_init__(self):
        if not isinstance(self.k1, int) or not isinstance(self.k2, int):
            raise ValidationError("winding counts must be integers")
        if self.k2 < 1:
            raise ValidationError(f"period multiple must be >= 1, got {self.k2}")
        if not (math.isfinite(self.T0) and self.T0 > 0):
            raise ValidationError(f"base period must be positive, got {self.T0!r}")

    @property
    def T(self) -> float:
        return self.k2 * self.T0

    @property
    def rho(self) -> float:
        """Rotation frequency: windings per unit time."""
        return self.k1 / (self.k2 * self.T0)

    @property
    def gcd(self) -> int:
        return math.gcd(abs(self.k1), self.k2)

    @property
    def primitive(self) -> bool:
        return self.gcd == 1

    def primitive_class(self) -> "OrbitClass":
        g = self.gcd
        return OrbitClass(self.k1 // g, self.k2 // g, self.T0)

    def scaled(self, p: int) -> "OrbitClass":
        return OrbitClass(p * self.k1, p * self.k2, self.T0)


@dataclass(frozen=True)
class DiscreteLoop:
    """Periodic part y of x(t) = rho*t + y(t), sampled on a uniform grid."""

    orbit_class: OrbitClass
    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "y", y)
        if y.ndim != 1:
            raise ValidationError("loop samples must be one-dimensional")
        if len(y) < 16:
            raise ValidationError(f"need at least 16 samples, got {len(y)}")
        if len(y) % self.orbit_class.k2 != 0:
            raise ValidationError(
                f"sample count {len(y)} not divisible by k2 = {self.orbit_class.k2}"
            )
        if not np.all(np.isfinite(y)):
            raise ValidationError("non-finite loop sample")

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def h(self) -> float:
        return self.orbit_class.T / self.n

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    @property
    def positions(self) -> np.ndarray:
        """x samples on the covering line."""
        return self.orbit_class.rho * self.times + self.y

    def with_y(self, y: np.ndarray) -> "DiscreteLoop":
        return DiscreteLoop(self.orbit_class, y)


@dataclass
class PeriodicOrbit:
    """A converged critical loop with its dynamical and index data.

    morse_index, bott_at_one, tau and j_samples are filled by the spectral
    index machinery; they stay None on degenerate orbits.
    """

    loop: DiscreteLoop
    action: float
    residual: float
    floquet: MonodromyResult
    degenerate: bool
    fundamental: bool
    family_size: int
    initial_state: State
    shooting_residual: float
    morse_index: Optional[int] = None
    bott_at_one: Optional[int] = None
    tau: Optional[float] = None
    j_samples: Optional[list] = None
    orbit_id: Optional[int] = None

    @property
    def floquet_class(self) -> str:
        return self.floquet.floquet_class

    @property
    def multipliers(self):
        return self.floquet.multipliers

    @property
    def l(self) -> int:
        return self.floquet.l


@dataclass(frozen=True)
class SearchBudget:
    loop_seeds: int = 32
    shoot_seeds: int = 32
    max_iter: int = 60
    grid: Optional[int] = None


# ---------------------------------------------------------------------------
# discrete action functional


def action(loop: DiscreteLoop, spec: PotentialSpec) -> float:
    """Discretized mean action of the loop."""
    oc = loop.orbit_class
    vel = oc.rho + (np.roll(loop.y, -1) - loop.y) / loop.h
    v, _, _ = spec.eval_jet(loop.times, loop.positions)
    return float(np.mean(0.5 * vel**2 - v))


def action_gradient(loop: DiscreteLoop, spec: PotentialSpec) -> np.ndarray:
    """Exact gradient of :func:`action` with respect to the y samples."""
    y = loop.y
    lap = (np.roll(y, -1) - 2.0 * y + np.roll(y, 1)) / loop.h**2
    _, vx, _ = spec.eval_jet(loop.times, loop.positions)
    return (-lap - vx) / loop.n


def action_hessian(loop: DiscreteLoop, spec: PotentialSpec) -> np.ndarray:
    """Exact second-derivative matrix of :func:`action`: circulant
    second-difference term minus the diagonal V_xx term, scaled by 1/N."""
    n = loop.n
    inv_h2 = 1.0 / loop.h**2
    _, _, vxx = spec.eval_jet(loop.times, loop.positions)
    H = np.zeros((n, n))
    idx = np.arange(n)
    H[idx, idx] = 2.0 * inv_h2 - vxx
    H[idx, (idx + 1) % n] = -inv_h2
    H[idx, (idx - 1) % n] = -inv_h2
    H /= n
    return H


# ---------------------------------------------------------------------------
# loop arithmetic: shifts, matching, reduction


def _canonical_spatial(y: np.ndarray) -> np.ndarray:
    """Translate by an integer so the mean sample lies in [0, 1)."""
    return y - math.floor(float(np.mean(y)))


def _shifted_positions(loop: DiscreteLoop, j: int) -> np.ndarray:
    """Samples of x(t + j*h) on the loop grid, using x(t + T) = x(t) + k1."""
    xs = loop.positions
    k1 = loop.orbit_class.k1
    n = loop.n
    q, j = divmod(j, n)
    out = np.concatenate([xs[j:], xs[:j] + k1])
    if q:
        out = out + q * k1
    return out


def _best_integer_offset(d: np.ndarray) -> tuple[int, float]:
    """Integer s minimizing sup|d - s|, with the achieved distance."""
    mid = 0.5 * (float(np.max(d)) + float(np.min(d)))
    best_s, best = 0, math.inf
    for s in (math.floor(mid), math.ceil(mid)):
        dist = float(np.max(np.abs(d - s)))
        if dist < best:
            best_s, best = s, dist
    return best_s, best


def loops_match(a: DiscreteLoop, b: DiscreteLoop, tol: float) -> bool:
    """True if the loops agree after an optimal integer spatial shift and
    an optimal time shift by a multiple of the grid step."""
    if a.n != b.n or a.orbit_class != b.orbit_class:
        return False
    xa = a.positions
    for j in range(a.n):
        d = xa - _shifted_positions(b, j)
        if float(np.max(d) - np.min(d)) > 2.0 * tol:
            continue
        _, dist = _best_integer_offset(d)
        if dist <= tol:
            return True
    return False


def _reduction_factor(loop: DiscreteLoop, tol: float) -> int:
    """Largest divisor m of the class period content with
    x(t + T/m) = x(t) + k1/m within tol (m = content means fundamental)."""
    oc = loop.orbit_class
    d = oc.gcd
    for m in sorted((m for m in range(1, d + 1) if d % m == 0), reverse=True):
        if loop.n % m != 0:
            continue
        shifted = _shifted_positions(loop, loop.n // m)
        if float(np.max(np.abs(shifted - loop.positions - oc.k1 / m))) <= tol:
            return m
    return 1


def is_fundamental(orbit: PeriodicOrbit, primitive_class: OrbitClass, p: int,
                   tol_dedup: float = DEFAULT_TOL_DEDUP) -> bool:
    """True iff an orbit found in class (p*k1, p*k2) is already periodic
    over the primitive period k2*T0 (with the matching winding offset)."""
    loop = orbit.loop
    oc = loop.orbit_class
    if not primitive_class.primitive:
        raise ValidationError("reference class must be primitive")
    if oc != primitive_class.scaled(p):
        raise ValidationError(f"orbit class {oc} is not {primitive_class} scaled by {p}")
    steps = loop.n * primitive_class.k2
    if steps % oc.k2 != 0:
        raise ValidationError("loop grid not commensurate with the primitive period")
    shifted = _shifted_positions(loop, steps // oc.k2)
    return float(np.max(np.abs(shifted - loop.positions - primitive_class.k1))) <= tol_dedup


def shift_family(orbit: PeriodicOrbit) -> list[DiscreteLoop]:
    """The distinct time-shifted copies of the orbit, by multiples of the
    primitive period; a fundamental orbit yields a single member."""
    loop = orbit.loop
    oc = loop.orbit_class
    d = oc.gcd
    members = []
    for j in range(orbit.family_size):
        shift = j * (loop.n // d)
        rho_s = oc.rho * shift * loop.h
        y = np.roll(loop.y, -shift) + rho_s
        members.append(loop.with_y(_canonical_spatial(y)))
    return members


def deduplicate(orbits: list[PeriodicOrbit],
                tol_dedup: float = DEFAULT_TOL_DEDUP) -> list[PeriodicOrbit]:
    """Collapse orbits equal up to spatial translation or grid time shift.

    The canonical representative of each group is the one with smallest
    action, ties broken lexicographically on the samples.  Precondition:
    all orbits in one class.
    """
    if not orbits:
        return []
    oc = orbits[0].loop.orbit_class
    if any(o.loop.orbit_class != oc for o in orbits):
        raise ValidationError("all orbits must belong to one class")

    def key(o: PeriodicOrbit):
        return (round(o.action, 12), tuple(np.round(o.loop.y, 12)))

    order = sorted(range(len(orbits)), key=lambda i: key(orbits[i]))
    parent = list(range(len(orbits)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for ii in range(len(order)):
        for jj in range(ii + 1, len(order)):
            i, j = order[ii], order[jj]
            if find(i) == find(j):
                continue
            if abs(orbits[i].action - orbits[j].action) > max(1e-9, tol_dedup):
                continue
            if loops_match(orbits[i].loop, orbits[j].loop, tol_dedup):
                parent[find(j)] = find(i)

    canonical = []
    seen = set()
    for idx in order:
        root = find(idx)
        if root in seen:
            continue
        seen.add(root)
        canonical.append(orbits[idx])
    canonical.sort(key=lambda o: key(o))
    return canonical


# ---------------------------------------------------------------------------
# deflated Newton in loop space


def _deflated_newton(y0, times, spec, oclass, found, max_iter, gtol_rel):
    """Damped Newton on the action gradient with multiplicative deflation.

    ``found`` is a list of previously converged sample vectors; the merit
    function ||g||^2 is multiplied by prod_j 1/||y - y_j||^2 so the damping
    rejects re-convergence, and the Newton step is rescaled accordingly.
    Returns (y, gradient_norm, converged).
    """
    n = len(y0)
    h = oclass.T / n
    inv_h2 = 1.0 / h**2
    rho = oclass.rho

    def grad(y):
        lap = (np.roll(y, -1) - 2.0 * y + np.roll(y, 1)) * inv_h2
        _, vx, _ = spec.eval_jet(times, rho * times + y)
        return (-lap - vx) / n

    def hess(y):
        _, _, vxx = spec.eval_jet(times, rho * times + y)
        H = np.zeros((n, n))
        idx = np.arange(n)
        H[idx, idx] = 2.0 * inv_h2 - vxx
        H[idx, (idx + 1) % n] = -inv_h2
        H[idx, (idx - 1) % n] = -inv_h2
        return H / n

    def log_merit(y, gn):
        if gn == 0.0:
            return -math.inf
        val = 2.0 * math.log(gn)
        for yf in found:
            r2 = float(np.dot(y - yf, y - yf))
            if r2 == 0.0:
                return math.inf
            val -= math.log(r2)
        return val

    y = np.asarray(y0, dtype=float).copy()
    g = grad(y)
    gn = float(np.linalg.norm(g))
    for _ in range(max_iter):
        gtol = gtol_rel * max(1.0, float(np.linalg.norm(y)))
        if gn <= gtol:
            break
        H = hess(y)
        try:
            delta = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            delta = None
        if delta is None or not np.all(np.isfinite(delta)):
            delta = np.linalg.lstsq(H, -g, rcond=None)[0]
            if not np.all(np.isfinite(delta)):
                return y, gn, False
        # deflated Newton step: scale by 1 / (1 - (grad M / M) . delta)
        denom = 1.0
        for yf in found:
            r = y - yf
            r2 = float(np.dot(r, r))
            if r2 > 0.0:
                denom += 2.0 * float(np.dot(r, delta)) / r2
        if abs(denom) < 0.05:
            denom = math.copysign(0.05, denom if denom != 0.0 else 1.0)
        delta = delta / denom
        dn = float(np.linalg.norm(delta))
        step_max = 10.0 * max(1.0, float(np.linalg.norm(y)))
        if dn > step_max:
            delta *= step_max / dn
        lm0 = log_merit(y, gn)
        lam, accepted = 1.0, False
        for _bt in range(30):
            y_try = y + lam * delta
            g_try = grad(y_try)
            gn_try = float(np.linalg.norm(g_try))
            if math.isfinite(gn_try) and log_merit(y_try, gn_try) < lm0 + math.log1p(-1e-4 * lam):
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            return y, gn, False
        y, g, gn = y_try, g_try, gn_try
        if float(np.linalg.norm(y - y0)) > 50.0:
            return y, gn, False
    else:
        gtol = gtol_rel * max(1.0, float(np.linalg.norm(y)))
        if gn > gtol:
            return y, gn, False
    # undeflated polish to the exact critical point
    for _ in range(2):
        H = hess(y)
        try:
            delta = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(H, -g, rcond=None)[0]
        y_try = y + delta
        g_try = grad(y_try)
        gn_try = float(np.linalg.norm(g_try))
        if math.isfinite(gn_try) and gn_try < gn:
            y, g, gn = y_try, g_try, gn_try
    return y, gn, True


# ---------------------------------------------------------------------------
# shooting refinement


def _shooting_refine(spec: PotentialSpec, loop: DiscreteLoop, tol: float = 1e-12,
                     max_iter: int = 25):
    """Newton on the period map from the loop's implied initial conditions.

    Returns (state, residual_inf, trajectory); on a degenerate period map
    the unrefined initial conditions are kept.
    """
    oc = loop.orbit_class
    n = loop.n
    xs = loop.positions
    v0 = oc.rho + (loop.y[1] - loop.y[-1]) / (2.0 * loop.h)
    s = np.array([xs[0], v0])
    target = np.array([float(oc.k1), 0.0])
    best_s, best_fn, best_traj = None, math.inf, None
    for _ in range(max_iter):
        s1, W, traj = flow_with_variational(spec, State(s[0], s[1]), 0.0, oc.T, n)
        F = np.array([s1.x, s1.v]) - s - target
        fn = float(np.max(np.abs(F)))
        # reject refinements that wander off the loop
        if float(np.max(np.abs(traj[:n, 0] - xs))) <= 0.05 and fn < best_fn:
            best_s, best_fn, best_traj = s.copy(), fn, traj
        if fn <= tol:
            break
        J = W - np.eye(2)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if abs(det) < 1e-12 * max(1.0, float(np.max(np.abs(W)))) ** 2:
            break
        ds = np.linalg.solve(J, -F)
        dsn = float(np.linalg.norm(ds))
        if dsn > 0.5:
            ds *= 0.5 / dsn
        s = s + ds
    if best_s is None:
        s0 = State(xs[0], v0)
        s1, traj = flow(spec, s0, 0.0, oc.T, n)
        fn = float(np.max(np.abs(np.array([s1.x, s1.v]) - np.array([s0.x, s0.v]) - target)))
        return s0, fn, traj
    return State(best_s[0], best_s[1]), best_fn, best_traj


# ---------------------------------------------------------------------------
# multi-start search


def _build_seeds(spec: PotentialSpec, oclass: OrbitClass, n: int, budget: SearchBudget):
    seeds = []
    for k in range(budget.loop_seeds):
        seeds.append(np.full(n, k / budget.loop_seeds))
    if budget.shoot_seeds > 0:
        spread = 2.0 * math.sqrt(2.0 * max(spec.max_value(), 0.0))
        times = np.arange(n) * (oclass.T / n)
        for j in range(budget.shoot_seeds):
            x0 = (j % 4) / 4.0
            u = 2.0 * j / (budget.shoot_seeds - 1) - 1.0 if budget.shoot_seeds > 1 else 0.0
            v0 = oclass.rho + spread * u
            try:
                _, samples = flow(spec, State(x0, v0), 0.0, oclass.T, n)
            except Exception:
                continue
            seeds.append(samples[:n, 0] - oclass.rho * times)
    return seeds


def build_orbit(spec: PotentialSpec, loop: DiscreteLoop,
                tol_degenerate: float = DEFAULT_TOL_DEGENERATE,
                tol_dedup: float = DEFAULT_TOL_DEDUP) -> PeriodicOrbit:
    """Assemble the full orbit record for a converged loop."""
    act = action(loop, spec)
    res = float(np.linalg.norm(action_gradient(loop, spec)))
    state, shoot_res, _ = _shooting_refine(spec, loop)
    path = linearize_along(spec, loop)
    flq = monodromy(path, tol_degenerate=tol_degenerate)
    m_star = _reduction_factor(loop, tol_dedup)
    d = loop.orbit_class.gcd
    return PeriodicOrbit(
        loop=loop,
        action=act,
        residual=res,
        floquet=flq,
        degenerate=flq.floquet_class == DEGENERATE,
        fundamental=m_star == d,
        family_size=d // m_star,
        initial_state=state,
        shooting_residual=shoot_res,
    )


def find_orbits(spec: PotentialSpec, oclass: OrbitClass,
                budget: SearchBudget | None = None, rng_seed: int = 0,
                tol_residual: float = DEFAULT_TOL_RESIDUAL,
                tol_dedup: float = DEFAULT_TOL_DEDUP,
                tol_degenerate: float = DEFAULT_TOL_DEGENERATE,
                workers: int = 1) -> list[PeriodicOrbit]:
    """Multi-start deflated-Newton search for periodic orbits in a class.

    Seeds are straight loops on an offset grid plus shooting seeds over a
    velocity band; each converged loop deflates the merit function for
    later seeds.  Returns the deduplicated catalog sorted by action, with
    degenerate (resonant) orbits flagged; the RNG is consumed only to
    perturb seeds whose first Newton run stalls.
    """
    budget = budget or SearchBudget()
    n = budget.grid if budget.grid is not None else DEFAULT_SAMPLES_PER_PERIOD * oclass.k2
    if n % oclass.k2 != 0:
        raise ValidationError(f"grid size {n} not divisible by k2 = {oclass.k2}")
    times = np.arange(n) * (oclass.T / n)
    seeds = _build_seeds(spec, oclass, n, budget)
    gtol_rel = 0.1 * tol_residual

    found: list[np.ndarray] = []
    converged: list[np.ndarray] = []
    lock = threading.Lock()
    stats = {"seeds": len(seeds), "converged": 0, "stalled": 0}

    def process(item):
        i, seed = item
        with lock:
            snapshot = list(found)
        y, gn, ok = _deflated_newton(seed, times, spec, oclass, snapshot,
                                     budget.max_iter, gtol_rel)
        if not ok:
            rng = np.random.default_rng([rng_seed, i])
            seed2 = seed + 1e-6 * rng.standard_normal(n)
            y, gn, ok = _deflated_newton(seed2, times, spec, oclass, snapshot,
                                         budget.max_iter, gtol_rel)
        with lock:
            if ok:
                stats["converged"] += 1
                converged.append(_canonical_spatial(y))
                for off in (-1.0, 0.0, 1.0):
                    found.append(y + off)
            else:
                stats["stalled"] += 1

    items = list(enumerate(seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(process, items))
    else:
        for item in items:
            process(item)

    candidates = []
    for y in converged:
        loop = DiscreteLoop(oclass, y)
        res = float(np.linalg.norm(action_gradient(loop, spec)))
        if res > tol_residual * max(1.0, float(np.linalg.norm(y))):
            continue
        candidates.append(build_orbit(spec, loop, tol_degenerate, tol_dedup))

    catalog = deduplicate(candidates, tol_dedup)
    catalog.sort(key=lambda o: (o.action, tuple(np.round(o.loop.y, 12))))
    for i, orbit in enumerate(catalog):
        orbit.orbit_id = i
    log.info("search in class (%d,%d): %d seeds, %d converged, %d stalled, %d canonical",
             oclass.k1, oclass.k2, stats["seeds"], stats["converged"], stats["stalled"],
             len(catalog))
    if not catalog:
        log.warning("no orbits converged in class (%d,%d) within budget %s",
                    oclass.k1, oclass.k2, budget)
    return catalog
