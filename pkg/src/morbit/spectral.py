"""Morse, Bott, and mean-index computations.

The Morse index of a periodic orbit is the number of negative eigenvalues
of the discrete action Hessian.  The Bott index j(T, sigma) counts the
negative eigenvalues of -y'' - A(t) y on functions with the twisted
boundary condition y(t + T) = sigma * y(t), |sigma| = 1; it is computed
from the Hermitian finite-difference matrix with sigma-twisted wrap
entries.  The twisting frequency is the angular average

    tau = (1 / (2 pi T)) * integral over [0, 2 pi) of j(T, e^{i w}) dw,

evaluated by midpoint quadrature over [0, pi] (conjugation symmetry)
with one level of adaptive refinement at the jumps of j.

Negative-eigenvalue counts have two independent routes: the dense
Hermitian eigensolver and an O(N) inertia count (symmetric elimination
with the wrap-coupled nodes ordered last); sweeps use the fast route and
cross-check the dense one on a subsample.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import kernels
from .dynamics import ALPHA, BETA, CoefficientPath, linearize_along, monodromy
from .errors import ConsistencyError, DegenerateOperatorError, ValidationError
from .orbits import PeriodicOrbit, action_hessian
from .potential import PotentialSpec

DEFAULT_TOL_ZERO = 1e-8
DEFAULT_ANGLE_SAMPLES = 720
DEFAULT_TAU_TOL = 0.02

# Band for the jump-avoidance perturbation inside angle sweeps.  Much
# tighter than DEFAULT_TOL_ZERO: it only has to guard integer counts
# against floating-point flips, not flag physical resonance, and a wide
# band could not be escaped by sub-step angle perturbations.
SWEEP_BAND_TOL = 1e-12


# ---------------------------------------------------------------------------
# Morse index of a symmetric matrix


def _ldl_negative_count(H: np.ndarray) -> int:
    """Inertia of a symmetric matrix from its LDL^T factorization."""
    _, d, _ = scipy.linalg.ldl(H)
    n = len(d)
    neg = 0
    i = 0
    while i < n:
        if i + 1 < n and d[i, i + 1] != 0.0:
            det = d[i, i] * d[i + 1, i + 1] - d[i, i + 1] * d[i + 1, i]
            if det < 0.0:
                neg += 1
            elif d[i, i] + d[i + 1, i + 1] < 0.0:
                neg += 2
            i += 2
        else:
            if d[i, i] < 0.0:
                neg += 1
            i += 1
    return neg


def morse_index(H: np.ndarray, tol_zero: float = DEFAULT_TOL_ZERO) -> int:
    """Number of negative eigenvalues of a symmetric matrix.

    Dense symmetric eigendecomposition, cross-checked against an
    LDL^T inertia count.  Raises DegenerateOperatorError when some
    eigenvalue lies within tol_zero * ||H|| of zero.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValidationError("Hessian must be a square matrix")
    if not np.allclose(H, H.T, rtol=0.0, atol=1e-10 * max(1.0, float(np.max(np.abs(H))))):
        raise ValidationError("Hessian must be symmetric")
    w = np.linalg.eigvalsh(H)
    scale = max(abs(float(w[0])), abs(float(w[-1])), 1e-300)
    if float(np.min(np.abs(w))) <= tol_zero * scale:
        raise DegenerateOperatorError(
            f"eigenvalue {float(np.min(np.abs(w)))!r} within {tol_zero!r} * ||H|| of zero"
        )
    count = int(np.sum(w < 0.0))
    check = _ldl_negative_count(H)
    if check != count:
        raise ConsistencyError(
            f"negative-eigenvalue count disagreement: dense {count}, inertia {check}",
            values=(count, check),
        )
    return count


# ---------------------------------------------------------------------------
# twisted operators


@dataclass(frozen=True)
class TwistedOperator:
    """Finite-difference model of -y'' - A(t) y with twisted wrap-around.

    The N x N matrix is Hermitian: diagonal 2/h^2 - A_i, off-diagonal
    -1/h^2, and wrap entries carrying the twist (entry (N, 1) has factor
    sigma, entry (1, N) its conjugate).
    """

    path: CoefficientPath
    sigma: complex
    n: int

    def __post_init__(self):
        object.__setattr__(self, "sigma", complex(self.sigma))
        if abs(abs(self.sigma) - 1.0) > 1e-12:
            raise ValidationError(f"twist must have unit modulus, got {self.sigma!r}")
        if self.n < 32:
            raise ValidationError(f"grid size must be >= 32, got {self.n}")

    @property
    def h(self) -> float:
        return self.path.T / self.n

    def coefficient_samples(self) -> np.ndarray:
        t = np.arange(self.n) * self.h
        nodes = np.linspace(0.0, self.path.T, len(self.path.samples))
        return np.interp(t, nodes, self.path.samples)

    def matrix(self) -> np.ndarray:
        inv_h2 = 1.0 / self.h**2
        a = self.coefficient_samples()
        real_twist = abs(self.sigma.imag) == 0.0
        dtype = float if real_twist else complex
        M = np.zeros((self.n, self.n), dtype=dtype)
        idx = np.arange(self.n)
        M[idx, idx] = 2.0 * inv_h2 - a
        M[idx[:-1], idx[1:]] = -inv_h2
        M[idx[1:], idx[:-1]] = -inv_h2
        M[0, self.n - 1] = -np.conj(self.sigma) * inv_h2 if not real_twist else -self.sigma.real * inv_h2
        M[self.n - 1, 0] = -self.sigma * inv_h2 if not real_twist else -self.sigma.real * inv_h2
        return M

    def _tridiagonal_parts(self):
        inv_h2 = 1.0 / self.h**2
        diag = 2.0 * inv_h2 - self.coefficient_samples()
        corner = -np.conj(self.sigma) * inv_h2
        return diag, -inv_h2, corner


def _gershgorin_scale(diag: np.ndarray, e: float) -> float:
    return float(np.max(np.abs(diag))) + 2.0 * abs(e)


def _inertia_count(op: TwistedOperator, tol_zero: float) -> int:
    """O(N) negative-eigenvalue count with a degeneracy band check."""
    diag, e, corner = op._tridiagonal_parts()
    scale = _gershgorin_scale(diag, e)
    delta = tol_zero * scale
    pivmin = 2.3e-308 * max(1.0, e * e)
    lo = kernels.neg_count_twisted(diag, e, corner.real, corner.imag, -delta, pivmin)
    hi = kernels.neg_count_twisted(diag, e, corner.real, corner.imag, +delta, pivmin)
    if lo != hi:
        raise DegenerateOperatorError(
            f"eigenvalue within {delta!r} of zero at twist {op.sigma!r}", sigma=op.sigma
        )
    return int(lo)


def _dense_count(op: TwistedOperator, tol_zero: float) -> int:
    w = np.linalg.eigvalsh(op.matrix())
    scale = max(abs(float(w[0])), abs(float(w[-1])), 1e-300)
    if float(np.min(np.abs(w))) <= tol_zero * scale:
        raise DegenerateOperatorError(
            f"operator degenerate at twist {op.sigma!r}", sigma=op.sigma
        )
    return int(np.sum(w < 0.0))


def bott_index(op: TwistedOperator, method: str = "auto",
               tol_zero: float = DEFAULT_TOL_ZERO) -> int:
    """Negative-eigenvalue count of the twisted operator.

    method: "dense" (Hermitian eigensolver), "inertia" (O(N) elimination),
    or "auto" (dense up to N = 1024, inertia beyond).  Degeneracy at this
    twist raises DegenerateOperatorError tagged with sigma.
    """
    if method == "auto":
        method = "dense" if op.n <= 1024 else "inertia"
    if method == "dense":
        return _dense_count(op, tol_zero)
    if method == "inertia":
        return _inertia_count(op, tol_zero)
    raise ValidationError(f"unknown method {method!r}")


def bott_count(path: CoefficientPath, theta: float, n: int,
               method: str = "auto", tol_zero: float = DEFAULT_TOL_ZERO) -> int:
    """j(T, e^{i theta}) for the given path."""
    return bott_index(TwistedOperator(path, cmath.exp(1j * theta), n), method, tol_zero)


# ---------------------------------------------------------------------------
# twisting frequency


def _count_with_perturbation(path, theta, n, step, method, tol_zero):
    """Count at an angle, nudging it off degeneracies by fractions of the
    quadrature step.  Returns (count, angle actually used)."""
    for off in (0.0, 0.5 * step, -0.5 * step, 0.25 * step, -0.25 * step):
        try:
            return bott_count(path, theta + off, n, method, tol_zero), theta + off
        except DegenerateOperatorError:
            continue
    raise DegenerateOperatorError(f"persistent degeneracy near angle {theta!r}")


def twisting_frequency(path: CoefficientPath, m_angles: int = DEFAULT_ANGLE_SAMPLES,
                       n: int | None = None, method: str = "inertia",
                       band_tol: float = SWEEP_BAND_TOL,
                       dense_checks: int = 5) -> float:
    """Mean index tau of the path over its own span T.

    Midpoint quadrature of j over [0, pi], doubled by conjugation
    symmetry; cells adjacent to a jump of j are refined once.  With the
    inertia engine, ``dense_checks`` samples are re-counted densely and
    must agree.
    """
    if m_angles < 8:
        raise ValidationError(f"need at least 8 angle samples, got {m_angles}")
    if n is None:
        n = max(path.grid_size, 32)
    step = math.pi / m_angles
    thetas = (np.arange(m_angles) + 0.5) * step
    counts = np.empty(m_angles, dtype=int)
    used = np.empty(m_angles)
    for i, theta in enumerate(thetas):
        counts[i], used[i] = _count_with_perturbation(path, theta, n, step, method, band_tol)
    if method == "inertia" and dense_checks > 0:
        stride = max(1, m_angles // dense_checks)
        for i in range(0, m_angles, stride):
            dense = bott_count(path, used[i], n, "dense", band_tol)
            if dense != counts[i]:
                raise ConsistencyError(
                    f"inertia count {counts[i]} != dense count {dense} at angle {used[i]!r}",
                    values=(int(counts[i]), dense),
                )
    integral = 0.0
    for i in range(m_angles):
        jump = (i > 0 and counts[i] != counts[i - 1]) or (
            i < m_angles - 1 and counts[i] != counts[i + 1]
        )
        if not jump:
            integral += counts[i] * step
            continue
        for sub in (-0.25, 0.25):
            c, _ = _count_with_perturbation(path, thetas[i] + sub * step, n,
                                            0.5 * step, method, band_tol)
            integral += c * 0.5 * step
    return 2.0 * integral / (2.0 * math.pi * path.T)


# ---------------------------------------------------------------------------
# property suite


@dataclass
class PropertyCheck:
    name: str
    passed: bool
    witnesses: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


@dataclass
class PropertyReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "witnesses": c.witnesses,
                    "skipped": c.skipped,
                }
                for c in self.checks
            ],
        }


def verify_index_properties(path: CoefficientPath, k: int, sample_angles,
                            n: int | None = None, method: str = "inertia",
                            m_angles: int = DEFAULT_ANGLE_SAMPLES,
                            tol_zero: float = DEFAULT_TOL_ZERO,
                            tau_tol: float = DEFAULT_TAU_TOL) -> PropertyReport:
    """Check the index identities on a coefficient path.

    (a) j(kT, theta) equals the sum of j(T, sigma) over the k-th roots
        sigma of e^{i theta}, exactly;
    (b) j(T, sigma) = j(T, conj(sigma)), exactly;
    (c) |j(T, s1) - j(T, s2)| <= l for twists away from +-1;
    (d) |T tau - j(T, sigma)| <= l (+ quadrature slack) away from +-1.

    Angles where the operator is degenerate are skipped and reported.
    """
    if k not in (2, 3, 5):
        raise ValidationError(f"period multiple k must be in {{2, 3, 5}}, got {k}")
    if n is None:
        n = max(path.grid_size, 32)
    angles = [float(t) for t in sample_angles]
    T = path.T
    big = path.tile(k)

    sum_check = PropertyCheck("bott_sum_over_roots", True)
    for theta in angles:
        try:
            lhs = bott_count(big, theta, k * n, method, tol_zero)
            rhs = sum(
                bott_count(path, (theta + 2.0 * math.pi * l) / k, n, method, tol_zero)
                for l in range(k)
            )
        except DegenerateOperatorError:
            sum_check.skipped.append({"theta": theta})
            continue
        if lhs != rhs:
            sum_check.passed = False
            sum_check.witnesses.append({"theta": theta, "lhs": lhs, "rhs": rhs})

    conj_check = PropertyCheck("conjugation_symmetry", True)
    for theta in angles:
        try:
            a = bott_count(path, theta, n, method, tol_zero)
            b = bott_count(path, -theta, n, method, tol_zero)
        except DegenerateOperatorError:
            conj_check.skipped.append({"theta": theta})
            continue
        if a != b:
            conj_check.passed = False
            conj_check.witnesses.append({"theta": theta, "j_plus": a, "j_minus": b})

    flq = monodromy(path)
    l = flq.l
    interior = []
    for theta in angles:
        wrapped = abs(math.remainder(theta, 2.0 * math.pi))
        if min(wrapped, abs(wrapped - math.pi)) > 1e-9:
            interior.append(theta)
    j_interior = {}
    spread_check = PropertyCheck("index_spread_bounded_by_l", True)
    for theta in interior:
        try:
            j_interior[theta] = bott_count(path, theta, n, method, tol_zero)
        except DegenerateOperatorError:
            spread_check.skipped.append({"theta": theta})
    vals = list(j_interior.values())
    if vals and max(vals) - min(vals) > l:
        spread_check.passed = False
        spread_check.witnesses.append({"j_min": min(vals), "j_max": max(vals), "l": l})

    tau = twisting_frequency(path, m_angles, n, method)
    mean_check = PropertyCheck("mean_index_bound", True)
    for theta, j in j_interior.items():
        if abs(T * tau - j) > l + tau_tol:
            mean_check.passed = False
            mean_check.witnesses.append({"theta": theta, "j": j, "T_tau": T * tau, "l": l})

    return PropertyReport(checks=[sum_check, conj_check, spread_check, mean_check])


# ---------------------------------------------------------------------------
# per-orbit index report


@dataclass
class IndexReport:
    """All index data attached to one orbit."""

    morse_index: int
    bott_at_one: int
    j_samples: list
    tau: float
    l: int
    floquet_class: str

    def to_dict(self) -> dict:
        return {
            "morse_index": self.morse_index,
            "bott_at_one": self.bott_at_one,
            "tau": self.tau,
            "l": self.l,
            "class": self.floquet_class,
            "j_samples": [{"theta": t, "j": j} for t, j in self.j_samples],
        }


def attach_indices(orbit: PeriodicOrbit, spec: PotentialSpec,
                   m_angles: int = DEFAULT_ANGLE_SAMPLES,
                   tol_zero: float = DEFAULT_TOL_ZERO,
                   tau_tol: float = DEFAULT_TAU_TOL,
                   sigma_samples: int = 16) -> IndexReport:
    """Compute and cross-validate all indices for a converged orbit.

    Fills morse_index, bott_at_one, tau and j_samples on the orbit and
    checks: morse_index equals j(T, 1); index parity matches the Floquet
    class; |T tau - j(T, sigma)| <= l + slack on sampled twists; and for
    even index, T tau equals the index within quadrature tolerance.
    """
    if orbit.degenerate:
        raise ValidationError("cannot attach indices to a degenerate orbit")
    loop = orbit.loop
    T = loop.orbit_class.T
    mi = morse_index(action_hessian(loop, spec), tol_zero)
    path = linearize_along(spec, orbit)
    b1 = bott_index(TwistedOperator(path, 1.0 + 0.0j, loop.n), "dense", tol_zero)
    if b1 != mi:
        raise ConsistencyError(
            f"Morse index {mi} != twisted count at sigma=1 {b1}; increase the grid",
            values=(mi, b1),
        )
    expected_class = ALPHA if mi % 2 == 0 else BETA
    if orbit.floquet_class != expected_class:
        raise ConsistencyError(
            f"index {mi} parity predicts {expected_class} but multipliers give "
            f"{orbit.floquet_class}; increase the grid",
            values=(mi, orbit.floquet_class),
        )
    l = orbit.floquet.l
    tau = twisting_frequency(path, m_angles, loop.n, "inertia")
    step = math.pi / m_angles
    j_samples = []
    for theta in (np.arange(sigma_samples) + 0.5) * math.pi / sigma_samples:
        count, used = _count_with_perturbation(path, float(theta), loop.n, step,
                                               "inertia", SWEEP_BAND_TOL)
        j_samples.append((float(used), int(count)))
    for theta, j in j_samples:
        if abs(T * tau - j) > l + tau_tol:
            raise ConsistencyError(
                f"|T tau - j| = {abs(T * tau - j)!r} exceeds l = {l} at angle {theta!r}",
                values=(T * tau, j, l),
            )
    if mi % 2 == 0:
        if abs(T * tau - mi) > tau_tol:
            raise ConsistencyError(
                f"even index {mi} but T tau = {T * tau!r}", values=(mi, T * tau)
            )
    else:
        if not (mi - 1 - tau_tol <= T * tau <= mi + 1 + tau_tol):
            raise ConsistencyError(
                f"odd index {mi} but T tau = {T * tau!r} outside ({mi - 1}, {mi + 1})",
                values=(mi, T * tau),
            )
    report = IndexReport(morse_index=mi, bott_at_one=b1, j_samples=j_samples,
                         tau=tau, l=l, floquet_class=orbit.floquet_class)
    orbit.morse_index = mi
    orbit.bott_at_one = b1
    orbit.tau = tau
    orbit.j_samples = list(j_samples)
    return report
