"""Time integration of the equation of motion and its linearization.

The nonlinear flow solves x'' + V_x(t, x) = 0 as the first-order system
x' = v, v' = -V_x.  Along a periodic orbit the linearized (variational)
equation is y'' + A(t) y = 0 with A(t) = V_xx(t, x(t)); its fundamental
matrix over one period is the monodromy matrix, whose eigenvalues are the
Floquet multipliers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import IntegrationError, SymplecticityError, ValidationError
from .potential import PotentialSpec

ALPHA = "alpha"
BETA = "beta"
DEGENERATE = "degenerate"

DEFAULT_STEPS_PER_PERIOD = 256
DEFAULT_TOL_DEGENERATE = 1e-6


class State(NamedTuple):
    """Position on the covering line and velocity."""

    x: float
    v: float


@dataclass(frozen=True)
class CoefficientPath:
    """Sampled linearization coefficient A(t) = V_xx(t, x(t)) over [0, T].

    ``samples`` has N + 1 nodes on the uniform grid with the endpoints
    identified: A(0) = A(T) up to discretization error.
    """

    T: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if self.T <= 0 or not math.isfinite(self.T):
            raise ValidationError(f"path span must be positive, got {self.T!r}")
        if samples.ndim != 1 or len(samples) < 2:
            raise ValidationError("coefficient path needs at least two samples")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("non-finite coefficient sample")
        scale = max(1.0, float(np.max(np.abs(samples))))
        if abs(samples[0] - samples[-1]) > 1e-6 * scale:
            raise ValidationError(
                f"coefficient path endpoints differ: A(0)={samples[0]!r}, A(T)={samples[-1]!r}"
            )

    @property
    def grid_size(self) -> int:
        return len(self.samples) - 1

    def tile(self, k: int) -> "CoefficientPath":
        """Periodic extension over k copies of the span."""
        if k < 1:
            raise ValidationError("tile count must be >= 1")
        body = self.samples[:-1]
        ext = np.concatenate([body] * k + [self.samples[-1:]])
        return CoefficientPath(T=k * self.T, samples=ext)


def constant_path(a: float, T: float, grid: int = 256) -> CoefficientPath:
    """Constant-coefficient path A(t) = a on [0, T]."""
    return CoefficientPath(T=T, samples=np.full(grid + 1, float(a)))


@dataclass(frozen=True)
class MonodromyResult:
    """Fundamental matrix at time T with its Floquet data.

    ``l`` is half the number of non-real multipliers on the unit circle
    (0 or 1 in this scalar setting).
    """

    W: np.ndarray
    multipliers: tuple[complex, complex]
    floquet_class: str
    l: int


def flow(spec: PotentialSpec, s0: State, t0: float, t1: float, steps: int):
    """Fixed-step RK4 solution of the equation of motion.

    Returns (s1, samples) where samples is a (steps + 1, 2) array of
    (x, v) at every step, endpoints included.
    """
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    m, n, a, b = spec._arrays
    xs, vs = kernels.flow_rk4(m, n, a, b, spec.T0, s0.x, s0.v, t0, t1, steps)
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(vs))):
        raise IntegrationError(f"non-finite state while integrating from {tuple(s0)}")
    return State(float(xs[-1]), float(vs[-1])), np.column_stack([xs, vs])


def flow_with_variational(spec: PotentialSpec, s0: State, t0: float, t1: float, steps: int):
    """Flow plus the 2x2 state-transition matrix over [t0, t1]."""
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    m, n, a, b = spec._arrays
    xs, vs, w = kernels.flow_rk4_var(m, n, a, b, spec.T0, s0.x, s0.v, t0, t1, steps)
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(vs)) and np.all(np.isfinite(w))):
        raise IntegrationError(f"non-finite state while integrating from {tuple(s0)}")
    return State(float(xs[-1]), float(vs[-1])), w.reshape(2, 2), np.column_stack([xs, vs])


def linearize_along(spec: PotentialSpec, orbit) -> CoefficientPath:
    """Linearization coefficient A(t_i) = V_xx(t_i, x(t_i)) on the orbit grid.

    Accepts a PeriodicOrbit or a bare DiscreteLoop.
    """
    loop = getattr(orbit, "loop", orbit)
    t = loop.times
    x = loop.positions
    t_full = np.concatenate([t, [loop.orbit_class.T]])
    x_full = np.concatenate([x, [x[0] + loop.orbit_class.k1]])
    _, _, vxx = spec.eval_jet(t_full, x_full)
    return CoefficientPath(T=loop.orbit_class.T, samples=vxx)


def monodromy(path: CoefficientPath, steps: int | None = None,
              tol_degenerate: float = DEFAULT_TOL_DEGENERATE) -> MonodromyResult:
    """Integrate W' = [[0, 1], [-A(t), 0]] W from the identity over [0, T].

    A(t) is interpolated linearly between grid nodes.  Default step count
    equals the path grid so flow and monodromy nodes coincide.
    """
    if steps is None:
        steps = path.grid_size
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    w = kernels.monodromy_rk4(path.samples, path.T, steps)
    if not np.all(np.isfinite(w)):
        raise IntegrationError("non-finite entries in fundamental matrix")
    W = w.reshape(2, 2)
    cls, l, mult = classify_floquet(W, tol_degenerate)
    return MonodromyResult(W=W, multipliers=mult, floquet_class=cls, l=l)


def classify_floquet(W: np.ndarray, tol_degenerate: float = DEFAULT_TOL_DEGENERATE):
    """Classify a unimodular 2x2 matrix by its eigenvalues.

    alpha: real, positive, distinct multipliers; beta: non-real or real
    negative; degenerate: some multiplier within tol_degenerate of 1.
    Returns (floquet_class, l, multipliers).
    """
    W = np.asarray(W, dtype=float)
    det = W[0, 0] * W[1, 1] - W[0, 1] * W[1, 0]
    if abs(det - 1.0) > 1e-6:
        raise SymplecticityError(f"det W = {det!r} violates unimodularity")
    mu = np.linalg.eigvals(W)
    mu = tuple(sorted((complex(z) for z in mu), key=lambda z: (z.real, z.imag)))
    if min(abs(z - 1.0) for z in mu) <= tol_degenerate:
        return DEGENERATE, 0, mu
    nonreal = any(abs(z.imag) > tol_degenerate * max(1.0, abs(z)) for z in mu)
    if nonreal:
        return BETA, 1, mu
    if all(z.real > 0 for z in mu):
        return ALPHA, 0, mu
    return BETA, 0, mu


def multiplier_angle(result: MonodromyResult) -> float | None:
    """Angle of the non-real multiplier pair e^{+-i psi}, if any."""
    if result.l == 0:
        return None
    z = max(result.multipliers, key=lambda z: z.imag)
    return abs(cmath.phase(z))
