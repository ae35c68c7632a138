"""Command-line driver: search, index, predict, properties, verify.

Exit codes: 0 success (including empty results), 1 property/verdict
failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .counting import (
    VERDICT_VIOLATED,
    build_chi,
    confront,
    default_tol_tau,
    is_prime,
    morse_relation_check,
    predict,
)
from .dynamics import ALPHA, constant_path, flow, linearize_along
from .errors import MorbitError, PotentialFormatError, ValidationError
from .orbits import (
    DiscreteLoop,
    OrbitClass,
    PeriodicOrbit,
    SearchBudget,
    build_orbit,
    find_orbits,
)
from .potential import PotentialSpec, load_spec
from .serialize import write_csv, write_json
from .spectral import attach_indices, verify_index_properties

log = logging.getLogger("morbit")


@dataclass(frozen=True)
class RunConfig:
    potential: Optional[Path]
    k1: int
    k2: int
    p: Optional[int]
    grid: Optional[int]
    angles: int
    seeds: int
    tol_residual: float
    tol_degenerate: float
    tol_dedup: float
    tol_tau: Optional[float]
    rng_seed: int
    workers: int
    out: Path
    max_index: int
    synthetic: Optional[str] = None
    span: float = 1.0

    def __post_init__(self):
        for name in ("tol_residual", "tol_degenerate", "tol_dedup"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.tol_tau is not None and self.tol_tau <= 0:
            raise ValidationError("tol_tau must be positive")
        if self.angles < 8:
            raise ValidationError("need at least 8 angle samples")
        if self.seeds < 1:
            raise ValidationError("need at least one seed")
        if self.workers < 1:
            raise ValidationError("need at least one worker")


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        potential=args.potential,
        k1=args.k1,
        k2=args.k2,
        p=getattr(args, "p", None),
        grid=args.grid,
        angles=args.angles,
        seeds=args.seeds,
        tol_residual=args.tol_residual,
        tol_degenerate=args.tol_degenerate,
        tol_dedup=args.tol_dedup,
        tol_tau=args.tol_tau,
        rng_seed=args.rng_seed,
        workers=args.workers,
        out=args.out,
        max_index=args.max_index,
        synthetic=getattr(args, "synthetic", None),
        span=getattr(args, "span", 1.0),
    )


# ---------------------------------------------------------------------------
# catalog records


def orbit_record(orbit: PeriodicOrbit) -> dict:
    oc = orbit.loop.orbit_class
    mu = orbit.multipliers
    return {
        "id": orbit.orbit_id,
        "class": {"k1": oc.k1, "k2": oc.k2, "T0": oc.T0},
        "grid": orbit.loop.n,
        "samples": [float(v) for v in orbit.loop.y],
        "action": orbit.action,
        "residual": orbit.residual,
        "shooting_residual": orbit.shooting_residual,
        "initial_state": [orbit.initial_state.x, orbit.initial_state.v],
        "multipliers": [[mu[0].real, mu[0].imag], [mu[1].real, mu[1].imag]],
        "floquet_class": orbit.floquet_class,
        "l": orbit.l,
        "degenerate": orbit.degenerate,
        "fundamental": orbit.fundamental,
        "family_size": orbit.family_size,
        "morse_index": orbit.morse_index,
        "bott_at_one": orbit.bott_at_one,
        "tau": orbit.tau,
        "j_samples": (
            None if orbit.j_samples is None
            else [{"theta": t, "j": j} for t, j in orbit.j_samples]
        ),
    }


def load_catalog(spec: PotentialSpec, path: Path, cfg: RunConfig) -> list[PeriodicOrbit]:
    """Rebuild orbit records from a catalog file (values recomputed from
    the stored samples, so re-emission is idempotent)."""
    with open(path, "r", encoding="utf-8") as fh:
        records = json.load(fh)
    if not isinstance(records, list):
        raise ValidationError(f"{path} does not contain an orbit catalog")
    catalog = []
    for rec in records:
        oc = OrbitClass(int(rec["class"]["k1"]), int(rec["class"]["k2"]),
                        float(rec["class"]["T0"]))
        loop = DiscreteLoop(oc, np.asarray(rec["samples"], dtype=float))
        orbit = build_orbit(spec, loop, cfg.tol_degenerate, cfg.tol_dedup)
        orbit.orbit_id = int(rec["id"])
        catalog.append(orbit)
    return catalog


def _write_catalog(cfg: RunConfig, spec: PotentialSpec, orbits: list[PeriodicOrbit]) -> None:
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_json(cfg.out / "orbits.json", [orbit_record(o) for o in orbits])
    for o in orbits:
        n = o.loop.n
        oc = o.loop.orbit_class
        _, traj = flow(spec, o.initial_state, 0.0, oc.T, n)
        t = np.arange(n + 1) * (oc.T / n)
        write_csv(cfg.out / f"orbit_{o.orbit_id}.csv", ["t", "x", "v"],
                  zip(t, traj[:, 0], traj[:, 1]))


def _print_catalog(orbits: list[PeriodicOrbit]) -> None:
    if not orbits:
        print("no orbits found")
        return
    print(f"{'id':>3} {'action':>22} {'index':>5} {'type':>10} {'tau':>10} "
          f"{'fundamental':>11} {'family':>6}")
    for o in orbits:
        idx = "-" if o.morse_index is None else str(o.morse_index)
        tau = "-" if o.tau is None else f"{o.tau:.4f}"
        print(f"{o.orbit_id:>3} {o.action:>22.15g} {idx:>5} {o.floquet_class:>10} "
              f"{tau:>10} {str(o.fundamental):>11} {o.family_size:>6}")


# ---------------------------------------------------------------------------
# pipeline pieces


def _run_find(cfg: RunConfig, spec: PotentialSpec, oclass: OrbitClass) -> list[PeriodicOrbit]:
    grid = cfg.grid * oclass.k2 if cfg.grid is not None else None
    budget = SearchBudget(loop_seeds=cfg.seeds, shoot_seeds=cfg.seeds, grid=grid)
    orbits = find_orbits(
        spec, oclass, budget,
        rng_seed=cfg.rng_seed,
        tol_residual=cfg.tol_residual,
        tol_dedup=cfg.tol_dedup,
        tol_degenerate=cfg.tol_degenerate,
        workers=cfg.workers,
    )
    for o in orbits:
        if not o.degenerate:
            attach_indices(o, spec, m_angles=cfg.angles)
    return orbits


def _load_potential(cfg: RunConfig) -> PotentialSpec:
    if cfg.potential is None:
        raise ValidationError("a potential file is required (--potential)")
    return load_spec(cfg.potential)


def cmd_find(cfg: RunConfig, _args) -> int:
    spec = _load_potential(cfg)
    oclass = OrbitClass(cfg.k1, cfg.k2, spec.T0)
    orbits = _run_find(cfg, spec, oclass)
    _write_catalog(cfg, spec, orbits)
    _print_catalog(orbits)
    if not orbits:
        log.warning("empty catalog for class (%d,%d)", cfg.k1, cfg.k2)
    elif all(o.degenerate for o in orbits):
        log.warning("all orbits in class (%d,%d) are degenerate (resonant)",
                    cfg.k1, cfg.k2)
    return 0


def cmd_index(cfg: RunConfig, _args) -> int:
    spec = _load_potential(cfg)
    catalog = load_catalog(spec, cfg.out / "orbits.json", cfg)
    for o in catalog:
        if not o.degenerate:
            attach_indices(o, spec, m_angles=cfg.angles)
    write_json(cfg.out / "orbits.json", [orbit_record(o) for o in catalog])
    _print_catalog(catalog)
    return 0


def _run_predict(cfg: RunConfig, spec: PotentialSpec,
                 primitive_orbits: Optional[list[PeriodicOrbit]] = None) -> int:
    if cfg.p is None:
        raise ValidationError("a prime p is required (--p)")
    if not is_prime(cfg.p):
        raise ValidationError(f"p = {cfg.p} is not prime")
    primitive = OrbitClass(cfg.k1, cfg.k2, spec.T0)
    if not primitive.primitive:
        raise ValidationError(f"class ({cfg.k1},{cfg.k2}) is not primitive")
    if primitive_orbits is None:
        primitive_orbits = _run_find(cfg, spec, primitive)
    fundamentals = [o for o in primitive_orbits if o.fundamental and not o.degenerate]
    tol_tau = cfg.tol_tau if cfg.tol_tau is not None else default_tol_tau(primitive, cfg.p)
    table = build_chi(fundamentals, tol_tau)
    report = predict(table, cfg.p, primitive, cfg.max_index)
    relation = morse_relation_check([o for o in primitive_orbits if not o.degenerate])
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_json(cfg.out / "predictions.json", {
        "chi_table": table.to_dict(),
        "morse_relation": relation.to_dict(),
        **report.to_dict(),
    })
    scaled = _run_find(cfg, spec, primitive.scaled(cfg.p))
    rows = confront(report, scaled)
    write_csv(cfg.out / "verdicts.csv", ["j", "type", "bound", "found", "verdict"],
              [(r.morse_index, r.predicted_type, r.bound, r.found, r.verdict)
               for r in rows])
    bad = 0
    for r in rows:
        print(f"j={r.morse_index} type={r.predicted_type} bound={r.bound} "
              f"found={r.found} -> {r.verdict}")
        if r.verdict == VERDICT_VIOLATED:
            bad += 1
    return 1 if bad else 0


def cmd_predict(cfg: RunConfig, _args) -> int:
    spec = _load_potential(cfg)
    return _run_predict(cfg, spec)


def _property_angles(count: int = 32) -> list[float]:
    angles = {0.0, 1.0}
    angles.update(math.pi * (i + 0.5) / count for i in range(count))
    return sorted(angles)


def _catalog_properties(cfg: RunConfig, spec: PotentialSpec,
                        orbits: list[PeriodicOrbit]) -> dict:
    entries = []
    for o in orbits:
        if o.degenerate:
            continue
        path = linearize_along(spec, o)
        rep = verify_index_properties(path, 2, _property_angles(16), n=o.loop.n,
                                      m_angles=cfg.angles)
        two_route = o.morse_index == o.bott_at_one
        parity = (o.morse_index % 2 == 0) == (o.floquet_class == ALPHA)
        entries.append({
            "orbit": o.orbit_id,
            "two_route_index_equal": two_route,
            "parity_matches_floquet": parity,
            "passed": rep.passed and two_route and parity,
            "report": rep.to_dict(),
        })
    return {"mode": "catalog", "entries": entries,
            "passed": all(e["passed"] for e in entries)}


def cmd_properties(cfg: RunConfig, _args) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    if cfg.synthetic is not None:
        if not cfg.synthetic.startswith("a="):
            raise ValidationError(f"synthetic mode expects a=<value>, got {cfg.synthetic!r}")
        try:
            a = float(cfg.synthetic[2:])
        except ValueError as exc:
            raise ValidationError(f"bad synthetic coefficient {cfg.synthetic!r}") from exc
        grid = cfg.grid if cfg.grid is not None else 512
        path = constant_path(a, cfg.span, grid)
        reports = {}
        for k in (2, 3):
            reports[f"k{k}"] = verify_index_properties(
                path, k, _property_angles(), n=grid, m_angles=cfg.angles
            ).to_dict()
        payload = {"mode": "synthetic", "a": a, "span": cfg.span, "reports": reports,
                   "passed": all(r["passed"] for r in reports.values())}
    else:
        spec = _load_potential(cfg)
        catalog = load_catalog(spec, cfg.out / "orbits.json", cfg)
        for o in catalog:
            if not o.degenerate:
                attach_indices(o, spec, m_angles=cfg.angles)
        payload = _catalog_properties(cfg, spec, catalog)
    write_json(cfg.out / "properties.json", payload)
    print("properties:", "pass" if payload["passed"] else "FAIL")
    return 0 if payload["passed"] else 1


def cmd_verify(cfg: RunConfig, _args) -> int:
    spec = _load_potential(cfg)
    oclass = OrbitClass(cfg.k1, cfg.k2, spec.T0)
    orbits = _run_find(cfg, spec, oclass)
    _write_catalog(cfg, spec, orbits)
    _print_catalog(orbits)
    status = 0
    if cfg.p is not None:
        status = max(status, _run_predict(cfg, spec, primitive_orbits=orbits))
    payload = _catalog_properties(cfg, spec, orbits)
    write_json(cfg.out / "properties.json", payload)
    print("properties:", "pass" if payload["passed"] else "FAIL")
    if not payload["passed"]:
        status = max(status, 1)
    return status


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--potential", type=Path, help="potential configuration file (JSON)")
    p.add_argument("--k1", type=int, default=0, help="winding count")
    p.add_argument("--k2", type=int, default=1, help="period multiple")
    p.add_argument("--grid", type=int, default=None,
                   help="loop samples per base period (default 256)")
    p.add_argument("--angles", type=int, default=720,
                   help="angle samples for the twist quadrature")
    p.add_argument("--seeds", type=int, default=32,
                   help="seed count for each of the two seeding strategies")
    p.add_argument("--tol-residual", type=float, default=1e-10)
    p.add_argument("--tol-degenerate", type=float, default=1e-6)
    p.add_argument("--tol-dedup", type=float, default=1e-6)
    p.add_argument("--tol-tau", type=float, default=None,
                   help="twisting-frequency merge tolerance (default 0.5/(p*k2*T0))")
    p.add_argument("--max-index", type=int, default=6,
                   help="largest Morse index in prediction tables")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morbit",
        description="Periodic orbits on the circle: search, indices, and "
                    "subharmonic counting checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_find = sub.add_parser("find", help="search one winding class and attach indices")
    _add_common(p_find)
    p_find.set_defaults(func=cmd_find)

    p_index = sub.add_parser("index", help="recompute indices for an existing catalog")
    _add_common(p_index)
    p_index.set_defaults(func=cmd_index)

    p_pred = sub.add_parser("predict", help="emit mod-p lower bounds and confront them")
    _add_common(p_pred)
    p_pred.add_argument("--p", type=int, default=None, help="prime period multiplier")
    p_pred.set_defaults(func=cmd_predict)

    p_prop = sub.add_parser("properties", help="run the index property suite")
    _add_common(p_prop)
    p_prop.add_argument("--synthetic", type=str, default=None, metavar="a=VALUE",
                        help="use a constant coefficient path instead of a catalog")
    p_prop.add_argument("--span", type=float, default=1.0,
                        help="time span of the synthetic path")
    p_prop.set_defaults(func=cmd_properties)

    p_verify = sub.add_parser("verify", help="find + predict + properties")
    _add_common(p_verify)
    p_verify.add_argument("--p", type=int, default=None, help="prime period multiplier")
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return args.func(cfg, args)
    except (PotentialFormatError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MorbitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
