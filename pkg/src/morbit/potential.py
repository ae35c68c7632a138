"""Doubly periodic potentials V(t, x) as finite Fourier series.

V(t, x) = sum over terms of  a*cos(phi) + b*sin(phi),
phi = 2*pi*(m*t/T0 + n*x),

with integer m, n, so V is exactly T0-periodic in t and 1-periodic in x,
and all spatial derivatives are available in closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import PotentialFormatError, ValidationError

TWO_PI = 2.0 * math.pi

DEFAULT_COUPLING = 1.0 / (4.0 * math.pi**2)


@dataclass(frozen=True)
class FourierTerm:
    """One harmonic: temporal index m, spatial winding n, coefficients a, b."""

    m: int
    n: int
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.m, int) and isinstance(self.n, int)):
            raise ValidationError(f"harmonic indices must be integers, got ({self.m!r}, {self.n!r})")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValidationError("non-finite Fourier coefficient")


@dataclass(frozen=True)
class PotentialSpec:
    """Validated finite Fourier model of the potential.

    Immutable after construction; evaluation is pure and thread-safe.
    """

    T0: float
    terms: tuple[FourierTerm, ...]

    def __post_init__(self):
        if not (math.isfinite(self.T0) and self.T0 > 0):
            raise ValidationError(f"temporal period must be positive, got {self.T0!r}")
        seen = set()
        for term in self.terms:
            if (term.m, term.n) in seen:
                raise ValidationError(f"duplicate harmonic ({term.m}, {term.n}); merge coefficients first")
            seen.add((term.m, term.n))

    @cached_property
    def _arrays(self):
        m = np.array([t.m for t in self.terms], dtype=float)
        n = np.array([t.n for t in self.terms], dtype=float)
        a = np.array([t.a for t in self.terms], dtype=float)
        b = np.array([t.b for t in self.terms], dtype=float)
        return m, n, a, b

    def eval_jet(self, t, x):
        """Evaluate (V, V_x, V_xx) at (t, x); broadcasts over arrays."""
        m, n, a, b = self._arrays
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if len(self.terms) == 0:
            z = np.zeros(np.broadcast(t, x).shape)
            if z.ndim == 0:
                return 0.0, 0.0, 0.0
            return z, z.copy(), z.copy()
        phi = TWO_PI * (np.multiply.outer(m, t) / self.T0 + np.multiply.outer(n, x))
        c, s = np.cos(phi), np.sin(phi)
        shape = (-1,) + (1,) * (phi.ndim - 1)
        a_, b_, w = a.reshape(shape), b.reshape(shape), (TWO_PI * n).reshape(shape)
        v = (a_ * c + b_ * s).sum(axis=0)
        vx = (w * (-a_ * s + b_ * c)).sum(axis=0)
        vxx = (-(w**2) * (a_ * c + b_ * s)).sum(axis=0)
        if v.ndim == 0:
            return float(v), float(vx), float(vxx)
        return v, vx, vxx

    def max_value(self, samples: int = 64) -> float:
        """Maximum of V over one (t, x) period cell, on a sample grid."""
        t = np.linspace(0.0, self.T0, samples, endpoint=False)
        x = np.linspace(0.0, 1.0, samples, endpoint=False)
        v, _, _ = self.eval_jet(t[:, None], x[None, :])
        return float(np.max(v)) if len(self.terms) else 0.0

    def to_dict(self) -> dict:
        return {
            "T0": self.T0,
            "terms": [{"m": t.m, "n": t.n, "a": t.a, "b": t.b} for t in self.terms],
        }


def eval_jet(spec: PotentialSpec, t, x):
    """Functional form of :meth:`PotentialSpec.eval_jet`."""
    return spec.eval_jet(t, x)


def _merge_terms(raw: list[tuple[int, int, float, float]]) -> tuple[FourierTerm, ...]:
    acc: dict[tuple[int, int], list[float]] = {}
    order: list[tuple[int, int]] = []
    for m, n, a, b in raw:
        key = (m, n)
        if key not in acc:
            acc[key] = [0.0, 0.0]
            order.append(key)
        acc[key][0] += a
        acc[key][1] += b
    terms = []
    for key in order:
        a, b = acc[key]
        if a == 0.0 and b == 0.0:
            continue
        terms.append(FourierTerm(key[0], key[1], a, b))
    return tuple(terms)


def parse_spec(text: str) -> PotentialSpec:
    """Parse a potential configuration document (JSON).

    Expected shape: {"T0": <decimal>, "terms": [{"m", "n", "a", "b"}, ...]}.
    Duplicate (m, n) records are merged by summing coefficients; unknown
    fields are rejected.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PotentialFormatError(f"malformed potential document at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise PotentialFormatError("potential document must be a JSON object")
    unknown = set(doc) - {"T0", "terms"}
    if unknown:
        raise PotentialFormatError(f"unknown fields in potential document: {sorted(unknown)}")
    if "T0" not in doc:
        raise PotentialFormatError("potential document missing field 'T0'")
    t0 = doc["T0"]
    if not isinstance(t0, (int, float)) or isinstance(t0, bool):
        raise PotentialFormatError(f"'T0' must be a number, got {t0!r}")
    if not (math.isfinite(t0) and t0 > 0):
        raise ValidationError(f"'T0' must be positive and finite, got {t0!r}")
    raw_terms = doc.get("terms", [])
    if not isinstance(raw_terms, list):
        raise PotentialFormatError("'terms' must be a list")
    raw = []
    for i, rec in enumerate(raw_terms):
        if not isinstance(rec, dict):
            raise PotentialFormatError(f"term {i} must be an object")
        unknown = set(rec) - {"m", "n", "a", "b"}
        if unknown:
            raise PotentialFormatError(f"term {i} has unknown fields: {sorted(unknown)}")
        for key in ("m", "n"):
            if key not in rec:
                raise PotentialFormatError(f"term {i} missing field '{key}'")
            if not isinstance(rec[key], int) or isinstance(rec[key], bool):
                raise PotentialFormatError(f"term {i} field '{key}' must be an integer, got {rec[key]!r}")
        for key in ("a", "b"):
            val = rec.get(key, 0.0)
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise PotentialFormatError(f"term {i} field '{key}' must be a number, got {val!r}")
        raw.append((rec["m"], rec["n"], float(rec.get("a", 0.0)), float(rec.get("b", 0.0))))
    return PotentialSpec(T0=float(t0), terms=_merge_terms(raw))


def load_spec(path) -> PotentialSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec(fh.read())


def forced_pendulum(eps: float, c: float = DEFAULT_COUPLING, T0: float = 1.0) -> PotentialSpec:
    """Driven pendulum family V = eps*c*(1 + cos(2*pi*t/T0))*cos(2*pi*x).

    Expands into three Fourier terms.  The default coupling c = 1/(4*pi^2)
    makes the linearized coefficient V_xx order one.
    """
    return PotentialSpec(
        T0=T0,
        terms=(
            FourierTerm(0, 1, eps * c),
            FourierTerm(1, 1, eps * c / 2.0),
            FourierTerm(-1, 1, eps * c / 2.0),
        ),
    )
