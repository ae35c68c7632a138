"""Multiplicity bookkeeping and subharmonic lower-bound predictions.

From the fundamental solutions of a primitive class, chi(tau) tallies
(number of even-index orbits) - (number of odd-index orbits) at each
twisting frequency; nu and eta are its partial sums with <= and <
boundary semantics.  For a prime p, the lower bound on solutions of
Morse index 2n in the p-fold class is nu(2n/(p k2 T0)) mod p, and for
index 2n+1 it is (-eta((2n+2)/(p k2 T0))) mod p; predictions are then
confronted with a searched catalog.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dynamics import ALPHA, BETA
from .errors import ValidationError
from .orbits import OrbitClass, PeriodicOrbit

VERDICT_SATISFIED = "satisfied"
VERDICT_VIOLATED = "violated"
VERDICT_INCONCLUSIVE = "inconclusive-degenerate"


def is_prime(p: int) -> bool:
    """Trial division; ample for desk-scale primes."""
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class ChiEntry:
    tau: float
    n_alpha: int
    n_beta: int

    @property
    def chi(self) -> int:
        return self.n_alpha - self.n_beta


@dataclass(frozen=True)
class ChiTable:
    """Per-twisting-frequency tallies of fundamental solutions.

    ``balanced`` (sum chi = 0) and ``chi0_positive`` hold whenever the
    table comes from a complete non-degenerate search; they are recorded
    as flags because an incomplete search is legal input.
    """

    rho: float
    period: float
    tol_tau: float
    entries: tuple[ChiEntry, ...]

    @property
    def balanced(self) -> bool:
        return sum(e.chi for e in self.entries) == 0

    @property
    def chi0_positive(self) -> bool:
        return self.chi(0.0) > 0

    @property
    def tau_max(self) -> float:
        return max((e.tau for e in self.entries), default=0.0)

    def chi(self, tau: float) -> int:
        return sum(e.chi for e in self.entries if abs(e.tau - tau) <= self.tol_tau)

    def nu(self, tau: float) -> int:
        """Partial sum over entries with tau' <= tau (boundary included
        when within tol_tau)."""
        return sum(e.chi for e in self.entries if e.tau <= tau + self.tol_tau)

    def eta(self, tau: float) -> int:
        """Partial sum over entries strictly below tau (boundary excluded
        when within tol_tau)."""
        return sum(e.chi for e in self.entries if e.tau < tau - self.tol_tau)

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "period": self.period,
            "tol_tau": self.tol_tau,
            "balanced": self.balanced,
            "chi0_positive": self.chi0_positive,
            "entries": [
                {"tau": e.tau, "n_alpha": e.n_alpha, "n_beta": e.n_beta, "chi": e.chi}
                for e in self.entries
            ],
        }


def _near_even_grid(tau: float, period: float, tol: float) -> bool:
    m = round(tau * period / 2.0)
    return m >= 0 and abs(tau - 2.0 * m / period) <= tol


def build_chi(orbits: list[PeriodicOrbit], tol_tau: float) -> ChiTable:
    """Group fundamental, non-degenerate, index-attached orbits by tau.

    tau values merged within tol_tau form one entry.  A bucket mixing
    alpha and beta orbits away from the even grid 2m/T, or any beta count
    on the even grid, means tol_tau is too coarse and raises.
    """
    if tol_tau <= 0:
        raise ValidationError("tol_tau must be positive")
    if not orbits:
        return ChiTable(rho=0.0, period=1.0, tol_tau=tol_tau, entries=())
    oc = orbits[0].loop.orbit_class
    for o in orbits:
        if o.loop.orbit_class != oc:
            raise ValidationError("all orbits must belong to one class")
        if o.degenerate:
            raise ValidationError("degenerate orbits cannot enter the table")
        if not o.fundamental:
            raise ValidationError("only fundamental solutions enter the table")
        if o.morse_index is None or o.tau is None:
            raise ValidationError("orbit is missing index data")
    period = oc.T
    rho = oc.rho
    ordered = sorted(orbits, key=lambda o: o.tau)
    entries = []
    bucket: list[PeriodicOrbit] = []

    def close_bucket():
        taus = [o.tau for o in bucket]
        n_alpha = sum(1 for o in bucket if o.floquet_class == ALPHA)
        n_beta = sum(1 for o in bucket if o.floquet_class == BETA)
        tau = sum(taus) / len(taus)
        if _near_even_grid(tau, period, tol_tau):
            if n_beta:
                raise ValidationError(
                    f"odd-index orbit at even-grid tau {tau!r}; tol_tau too large"
                )
        elif n_alpha:
            raise ValidationError(
                f"even-index orbit at off-grid tau {tau!r}; tol_tau too large"
            )
        entries.append(ChiEntry(tau=tau, n_alpha=n_alpha, n_beta=n_beta))

    for o in ordered:
        if bucket and o.tau - bucket[0].tau > tol_tau:
            close_bucket()
            bucket = []
        bucket.append(o)
    if bucket:
        close_bucket()
    return ChiTable(rho=rho, period=period, tol_tau=tol_tau, entries=tuple(entries))


def nu(table: ChiTable, tau: float) -> int:
    return table.nu(tau)


def eta(table: ChiTable, tau: float) -> int:
    return table.eta(tau)


# ---------------------------------------------------------------------------
# Morse polynomial


@dataclass(frozen=True)
class MorsePolynomial:
    """Counts of orbits by Morse index, as polynomial coefficients."""

    coefficients: tuple[int, ...]

    @classmethod
    def from_orbits(cls, orbits: list[PeriodicOrbit]) -> "MorsePolynomial":
        if not orbits:
            return cls(())
        top = max(o.morse_index for o in orbits)
        coeffs = [0] * (top + 1)
        for o in orbits:
            if o.morse_index is None:
                raise ValidationError("orbit is missing its Morse index")
            coeffs[o.morse_index] += 1
        return cls(tuple(coeffs))

    def divide_by_one_plus_lambda(self) -> tuple[tuple[int, ...], int]:
        """Synthetic division by (1 + lambda): quotient and remainder."""
        q = []
        prev = 0
        for c in self.coefficients:
            q.append(c - prev)
            prev = q[-1]
        if not q:
            return (), 0
        return tuple(q[:-1]), q[-1]


@dataclass
class MorseRelationReport:
    coefficients: tuple[int, ...]
    quotient: tuple[int, ...]
    divisible: bool
    quotient_nonnegative: bool
    constant_term_present: bool
    count_even: bool

    @property
    def passed(self) -> bool:
        return (self.divisible and self.quotient_nonnegative
                and self.constant_term_present and self.count_even)

    def to_dict(self) -> dict:
        return {
            "coefficients": list(self.coefficients),
            "quotient": list(self.quotient),
            "divisible": self.divisible,
            "quotient_nonnegative": self.quotient_nonnegative,
            "constant_term_present": self.constant_term_present,
            "count_even": self.count_even,
            "passed": self.passed,
        }


def morse_relation_check(orbits: list[PeriodicOrbit]) -> MorseRelationReport:
    """Check that the index counts match the free-loop-space topology:
    the polynomial must be (1 + lambda) times a nonnegative series whose
    constant term is at least 1.  Failures flag an incomplete search,
    not a code bug."""
    poly = MorsePolynomial.from_orbits(orbits)
    quotient, remainder = poly.divide_by_one_plus_lambda()
    total = sum(poly.coefficients)
    return MorseRelationReport(
        coefficients=poly.coefficients,
        quotient=quotient,
        divisible=remainder == 0,
        quotient_nonnegative=all(c >= 0 for c in quotient),
        constant_term_present=bool(quotient) and quotient[0] >= 1,
        count_even=total % 2 == 0,
    )


# ---------------------------------------------------------------------------
# predictions and confrontation


@dataclass(frozen=True)
class PredictionBound:
    morse_index: int
    predicted_type: str
    lower_bound: int


@dataclass(frozen=True)
class PredictionReport:
    p: int
    orbit_class: OrbitClass
    rho: float
    bounds: tuple[PredictionBound, ...]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "class": {"k1": self.orbit_class.k1, "k2": self.orbit_class.k2,
                      "T0": self.orbit_class.T0},
            "rho": self.rho,
            "bounds": [
                {"morse_index": b.morse_index, "predicted_type": b.predicted_type,
                 "lower_bound": b.lower_bound}
                for b in self.bounds
            ],
        }


def predict(table: ChiTable, p: int, primitive_class: OrbitClass,
            max_index: int = 6) -> PredictionReport:
    """Mod-p lower bounds on solutions of each Morse index in the
    p-fold class, from the primitive-class table."""
    if not is_prime(p):
        raise ValidationError(f"{p} is not prime")
    if not primitive_class.primitive:
        raise ValidationError("class must be primitive (coprime windings)")
    period = p * primitive_class.T
    bounds = []
    for j in range(max_index + 1):
        if j % 2 == 0:
            raw = table.nu(j / period)
            kind = ALPHA
        else:
            raw = -table.eta((j + 1) / period)
            kind = BETA
        bounds.append(PredictionBound(morse_index=j, predicted_type=kind,
                                      lower_bound=raw % p))
    return PredictionReport(p=p, orbit_class=primitive_class.scaled(p),
                            rho=primitive_class.rho, bounds=tuple(bounds))


@dataclass(frozen=True)
class VerdictRow:
    morse_index: int
    predicted_type: str
    bound: int
    found: int
    verdict: str


def confront(predictions: PredictionReport,
             found: list[PeriodicOrbit]) -> list[VerdictRow]:
    """Compare predicted lower bounds against a searched catalog.

    Each shift-family member counts individually.  Rows with bound 0 are
    vacuously satisfied; an unmet bound becomes inconclusive when
    degenerate orbits had to be excluded from the catalog.
    """
    oc = predictions.orbit_class
    degenerate_present = False
    by_index: dict[int, int] = {}
    for o in found:
        if o.loop.orbit_class != oc:
            raise ValidationError(f"catalog class {o.loop.orbit_class} is not {oc}")
        if o.degenerate:
            degenerate_present = True
            continue
        if o.morse_index is None:
            raise ValidationError("orbit is missing its Morse index")
        by_index[o.morse_index] = by_index.get(o.morse_index, 0) + o.family_size
    rows = []
    for b in predictions.bounds:
        count = by_index.get(b.morse_index, 0)
        if b.lower_bound == 0 or count >= b.lower_bound:
            verdict = VERDICT_SATISFIED
        elif degenerate_present:
            verdict = VERDICT_INCONCLUSIVE
        else:
            verdict = VERDICT_VIOLATED
        rows.append(VerdictRow(morse_index=b.morse_index,
                               predicted_type=b.predicted_type,
                               bound=b.lower_bound, found=count, verdict=verdict))
    return rows


def default_tol_tau(primitive_class: OrbitClass, p_max: int) -> float:
    """Merge tolerance keeping theorem grid points 2n/(p k2 T0) separated."""
    return 0.5 / (p_max * primitive_class.T)
