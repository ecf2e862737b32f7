"""Command-line experiment driver.

Usage::

    nikhp <command> --config <path> [--out <dir>] [--precision <bits>]
          [--workers <k>] [--seed <u64>]

Each run writes ``<out>/<command>.csv`` (schema ``nikhp-report/1``, columns
``total,index,quantity,point,measured,predicted,rel_error,pass``) and
``<out>/<command>.json``, a summary with one boolean per criterion.

Exit status: 0 when every criterion passes, 1 when one fails, 2 for a
malformed configuration and 3 for a solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import mpmath
import numpy as np

from . import precision
from .asymptotics import (CSV_HEADER, Row, connection_check, diagonal_schedule,
                          rate_report, ratio_report, staircase_schedule, weak_report,
                          DegreeSchedule)
from .cache import FamilyCache, warm
from .config import COMMANDS, ConfigError, ExperimentConfig, load_experiment, load_system
from .hermite_pade import (NormalityFailure, at_system_probe, certify_perfectness)
from .measures import Interval, MeasureError, QuadratureError
from .polynomials import MultiIndex, all_indices
from .potential import (EquilibriumError, arcsine_measure, interaction_matrix,
                        solve_vector_equilibrium)
from .zeros import CountMismatch, MultipleRoot, interlace_check, kolmogorov_distance

REPORT_SCHEMA = "nikhp-report/1"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("nikhp")


class SolverFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# helpers


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (mpmath.mpf, mpmath.mpc)):
        return mpmath.nstr(v, 17)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_cell(v) for v in r.as_tuple()])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (mpmath.mpf, np.floating, float)):
        return float(v)
    if isinstance(v, dict):
        return {str(k): _json_value(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(u) for u in v]
    return v


def render_summary(summary: dict) -> str:
    return json.dumps(_json_value(summary), sort_keys=True, indent=1) + "\n"


def _schedule(cfg: ExperimentConfig, m: int) -> DegreeSchedule:
    spec = cfg.schedule
    if spec is None:
        raise ConfigError("schedule: required for this command")
    if spec["kind"] == "diagonal":
        return diagonal_schedule(m, range(spec["first"], spec["last"] + 1))
    if spec["kind"] == "staircase":
        return staircase_schedule(m, spec["first_total"], spec["last_total"])
    try:
        idx = tuple(MultiIndex(tuple(n)) for n in spec["indices"])
        d = max(n[1] - n[n.m] for n in idx)
        return DegreeSchedule(idx, (1 / m,) * m, d)
    except ValueError as exc:
        raise ConfigError(f"schedule.indices: {exc}") from exc


def _points(cfg: ExperimentConfig, m: int, default: list) -> dict:
    raw = cfg.test_points
    if raw is None:
        return {j: list(default) for j in range(1, m + 1)}
    if isinstance(raw, list):
        return {j: [mpmath.mpmathify(p) for p in raw] for j in range(1, m + 1)}
    return {int(k): [mpmath.mpmathify(p) for p in v] for k, v in raw.items()}


def _option(cfg: ExperimentConfig, name: str, default, kind=int):
    v = cfg.options.get(name, default)
    try:
        return kind(v) if v is not None else None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: cannot read {v!r}") from exc


def _indices(cfg: ExperimentConfig, m: int, decreasing: bool) -> list[MultiIndex]:
    if cfg.schedule is not None:
        return list(_schedule(cfg, m))
    budget = _option(cfg, "max_degree", 10)
    return [n for n in all_indices(m, budget) if n.is_decreasing() or not decreasing]


def _prefetch(ctx, indices, kind: str = "II"):
    """Solve in worker processes ahead of the serial pass, which then reads
    every family from the cache in schedule order."""
    if ctx["workers"] <= 1:
        return
    errors = warm(ctx["spec"], ctx["config"].nq, ctx["cache"].directory,
                  [(n, kind) for n in indices], ctx["workers"])
    for e in errors:
        log.info("worker: %s", e)


# ---------------------------------------------------------------------------
# commands


def cmd_certify(ctx) -> tuple[list, dict]:
    system, cfg = ctx["system"], ctx["config"]
    budget = _option(cfg, "budget", 8)
    rep = certify_perfectness(system, budget)
    rows = []
    for r in rep.rows:
        rows.append(Row(r.index.total, str(r.index), "margin_II", "", r.type_ii_margin,
                        precision.rank_tolerance(), None, r.passed))
        rows.append(Row(r.index.total, str(r.index), "margin_I", "", r.type_i_margin,
                        precision.rank_tolerance(), None, r.passed))
    flags = {"perfect": rep.passed}
    extra = {"normal_indices": sum(r.passed for r in rep.rows), "indices": len(rep.rows)}
    probe = cfg.options.get("probe")
    if probe is not None:
        try:
            iv = Interval(mpmath.mpf(str(probe["interval"][0])),
                          mpmath.mpf(str(probe["interval"][1])))
            pr = at_system_probe(system, probe["index"], int(probe.get("trials", 20)), iv,
                                 seed=cfg.seed)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"probe: {exc}") from exc
        for i, c in enumerate(pr.counts):
            rows.append(Row(pr.index.total, str(pr.index), "probe_sign_changes", str(i), c,
                            pr.bound, None, c <= pr.bound))
        flags["at_probe"] = pr.passed
    return rows, {"flags": flags, **extra}


def cmd_zeros(ctx) -> tuple[list, dict]:
    system, cfg, s2, s1 = ctx["system"], ctx["config"], ctx["solver_ii"], ctx["solver_i"]
    m = system.m
    rows, ok = [], True
    for n in _indices(cfg, m, decreasing=True):
        fam2, fam1 = s2(system, n), s1(system, n)
        zl = fam2.q_zeros()
        good = len(zl) == n.total and zl.simple
        rows.append(Row(n.total, str(n), "Q_zeros", "", len(zl), n.total, None, good))
        ok &= good
        for k in range(1, m):
            count = len(fam2.psi_zeros(k))
            good = count == n.tail(k + 1)
            rows.append(Row(n.total, str(n), f"psi_{k}_sign_changes", "", count,
                            n.tail(k + 1), None, good))
            ok &= good
        for k in range(1, m + 1):
            count = len(fam1.form_zeros(k))
            exp = max(n.tail(k) - 1, 0)
            good = count == exp
            rows.append(Row(n.total, str(n), f"form_{k}_sign_changes", "", count, exp, None,
                            good))
            ok &= good
    return rows, {"flags": {"zero_counts": ok}}


def cmd_interlace(ctx) -> tuple[list, dict]:
    system, cfg, s2, s1 = ctx["system"], ctx["config"], ctx["solver_ii"], ctx["solver_i"]
    m = system.m
    rows, ok = [], True
    for n in _indices(cfg, m, decreasing=True):
        for ell in range(1, m + 1):
            nl = n.bump(ell)
            if not nl.is_decreasing():
                continue
            a2, b2 = s2(system, n), s2(system, nl)
            r = interlace_check(a2.q_zeros(), b2.q_zeros())
            rows.append(Row(n.total, str(n), f"Q_interlace_l{ell}", "", int(r.ok), 1, None,
                            r.ok))
            ok &= r.ok
            a1, b1 = s1(system, n), s1(system, nl)
            for k in range(1, m + 1):
                za, zb = a1.form_zeros(k), b1.form_zeros(k)
                if len(za) == 0 and len(zb) <= 1:
                    continue
                r = interlace_check(za, zb)
                rows.append(Row(n.total, str(n), f"form_{k}_interlace_l{ell}", "", int(r.ok),
                                1, None, r.ok))
                ok &= r.ok
    return rows, {"flags": {"interlacing": ok}}


def _equilibrium(ctx, proportions):
    cfg, system = ctx["config"], ctx.get("system")
    if system is not None:
        E = [(float(system.interval(j).a), float(system.interval(j).b))
             for j in range(1, system.m + 1)]
    else:
        E = [tuple(float(v) for v in e) for e in cfg.options.get("intervals", [])]
        if not E:
            raise ConfigError("intervals: required when no system file is given")
    tol = _option(cfg, "kkt_tolerance", 1e-6, float)
    C = interaction_matrix(proportions)
    return E, solve_vector_equilibrium(E, C, G=cfg.grid, tol=tol)


def cmd_equilibrium(ctx) -> tuple[list, dict]:
    cfg = ctx["config"]
    system = ctx.get("system")
    m = system.m if system is not None else len(cfg.options.get("intervals", []))
    props = cfg.options.get("proportions") or [1 / m] * m
    E, sol = _equilibrium(ctx, [float(p) for p in props])
    tol = _option(cfg, "kkt_tolerance", 1e-6, float)
    rows = []
    for j in range(1, sol.m + 1):
        rows.append(Row(0, "", f"omega_{j}", "", sol.omegas[j - 1], None, None, None))
        mass = sol.lambdas[j - 1].mass
        rows.append(Row(0, "", f"mass_{j}", "", mass, 1.0, abs(mass - 1), abs(mass - 1) < 1e-12))
    flags = {"kkt": sol.kkt_residual < tol,
             "masses": all(abs(l.mass - 1) < 1e-12 for l in sol.lambdas)}
    rows.append(Row(0, "", "kkt_residual", "", sol.kkt_residual, tol, None, flags["kkt"]))
    if sol.m == 1:
        a, b = E[0]
        ks = kolmogorov_distance(sol.lambdas[0], arcsine_measure(a, b))
        omega_exact = math.log(4 / (b - a))
        err = abs(sol.omegas[0] - omega_exact)
        rows.append(Row(0, "", "kolmogorov_arcsine", "", ks, 0.0, ks, ks < 1e-3))
        rows.append(Row(0, "", "omega_closed_form", "", sol.omegas[0], omega_exact, err,
                        err < 1e-3))
        flags["arcsine"] = ks < 1e-3
        flags["omega"] = err < 1e-3
    return rows, {"flags": flags, "omegas": list(sol.omegas),
                  "omegas_scalar": list(sol.omegas_scalar)}


def cmd_weak(ctx) -> tuple[list, dict]:
    system, cfg, s2 = ctx["system"], ctx["config"], ctx["solver_ii"]
    sched = _schedule(cfg, system.m)
    _prefetch(ctx, list(sched))
    _, sol = _equilibrium(ctx, sched.proportions)
    pts = _points(cfg, system.m, [mpmath.mpf(-3), mpmath.mpc(0, 2)])
    tol = _option(cfg, "psi_tolerance", 0.15, float)
    rep = weak_report(system, sched, sol, pts, solver=s2, psi_tolerance=tol)
    return rep.rows, {"flags": rep.flags}


def cmd_rate(ctx) -> tuple[list, dict]:
    system, cfg, s2 = ctx["system"], ctx["config"], ctx["solver_ii"]
    sched = _schedule(cfg, system.m)
    _prefetch(ctx, list(sched))
    _, sol = _equilibrium(ctx, sched.proportions)
    j = _option(cfg, "j", 1)
    pts = _points(cfg, system.m, [mpmath.mpf(3)])[j]
    tol = _option(cfg, "tolerance", 0.1, float)
    rep = rate_report(system, sched, j, pts, sol, solver=s2, tolerance=tol)
    return rep.rows, {"flags": rep.flags}


def cmd_ratio(ctx) -> tuple[list, dict]:
    system, cfg, s2 = ctx["system"], ctx["config"], ctx["solver_ii"]
    sched = _schedule(cfg, system.m)
    ell = _option(cfg, "ell", 1)
    bumped = [n.bump(ell) for n in sched]
    _prefetch(ctx, list(sched) + bumped)
    pts = _points(cfg, system.m, [mpmath.mpc(0.5, 1), mpmath.mpf(-2)])[1]
    est, rep = ratio_report(system, sched, ell, pts, solver=s2,
                            boundary_points=_option(cfg, "boundary_points", 5),
                            boundary_tolerance=_option(cfg, "boundary_tolerance", 0.05, float))
    extra = {"deltas": list(est.deltas),
             "boundary_constants": [float(c) for c in est.constants]}
    return rep.rows, {"flags": rep.flags, **extra}


def cmd_connection(ctx) -> tuple[list, dict]:
    system, cfg, s2 = ctx["system"], ctx["config"], ctx["solver_ii"]
    if system.m < 2:
        raise ConfigError("connection: the system needs at least two generators")
    n = MultiIndex(tuple(cfg.options.get("index", [3] + [2] * (system.m - 1))))
    fam = s2(system, n)
    default = [mpmath.mpc(0.5, 1), mpmath.mpc(-2, 0.5), mpmath.mpf(-3), mpmath.mpc(2.5, -1),
               mpmath.mpc(5, 2)]
    pts = _points(cfg, system.m, default)[1]
    tol = _option(cfg, "tolerance", None, float)
    tol = float(precision.identity_tolerance()) if tol is None else tol
    rows, worst = [], 0.0
    for z in pts:
        for j in range(2, system.m + 1):
            res = connection_check(fam, system, j, z)
            for name in ("miracle", "con1", "con2", "inversion"):
                v = getattr(res, name)
                worst = max(worst, float(v))
                rows.append(Row(n.total, str(n), f"{name}_{j}", _point_text(z), v, 0.0, v,
                                bool(v < tol)))
    return rows, {"flags": {"connection": worst < tol}, "max_residual": worst}


def _point_text(z) -> str:
    z = complex(z)
    return f"{z.real:.6g}" if z.imag == 0 else f"{z.real:.6g}{z.imag:+.6g}j"


COMMAND_TABLE = {
    "certify": cmd_certify, "zeros": cmd_zeros, "interlace": cmd_interlace,
    "equilibrium": cmd_equilibrium, "weak": cmd_weak, "rate": cmd_rate,
    "ratio": cmd_ratio, "connection": cmd_connection,
}
assert set(COMMAND_TABLE) == set(COMMANDS)


# ---------------------------------------------------------------------------
# driver


def run(cfg: ExperimentConfig, precision_bits: int | None = None, workers: int = 1,
        seed: int | None = None, out: Path | None = None,
        cache_dir: Path | None = None) -> tuple[int, dict]:
    """Execute one experiment; returns (exit status, summary)."""
    if seed is not None:
        cfg.seed = seed
    out = Path(out) if out is not None else cfg.out
    spec = load_system(cfg.system_path) if cfg.system_path is not None else None
    bits = precision_bits or cfg.precision or (spec.precision if spec else None) \
        or precision.DEFAULT_PRECISION
    with precision.working_precision(bits):
        ctx = {"config": cfg, "workers": max(1, workers)}
        system_hash = None
        if spec is not None:
            ctx["system"] = spec.build(cfg.nq)
            system_hash = spec.content_hash()
            cache = FamilyCache(cache_dir)
            ctx["spec"], ctx["cache"] = spec, cache
            ctx["solver_ii"] = cache.solver(ctx["system"], system_hash, "II")
            ctx["solver_i"] = cache.solver(ctx["system"], system_hash, "I")
        try:
            rows, summary = COMMAND_TABLE[cfg.command](ctx)
        except (NormalityFailure, EquilibriumError, CountMismatch, MultipleRoot,
                QuadratureError) as exc:
            raise SolverFailure(f"{type(exc).__name__}: {exc}") from exc
        except MeasureError as exc:
            raise ConfigError(str(exc)) from exc
    flags = summary.pop("flags")
    passed = all(bool(v) for v in flags.values())
    summary = {"schema": REPORT_SCHEMA, "command": cfg.command, "precision": bits,
               "system_hash": system_hash, "seed": cfg.seed, "criteria": flags,
               "passed": passed, **summary}
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{cfg.command}.csv").write_text(render_csv(rows))
    (out / f"{cfg.command}.json").write_text(render_summary(summary))
    return (EXIT_OK if passed else EXIT_FAIL), summary


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nikhp", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, type=Path, help="experiment file")
    p.add_argument("--out", type=Path, default=None, help="report directory")
    p.add_argument("--precision", type=int, default=None, help="working precision in bits")
    p.add_argument("--workers", type=int, default=1, help="solver worker processes")
    p.add_argument("--seed", type=int, default=None, help="seed for random probes")
    p.add_argument("--verbose", "-v", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.precision is not None and args.precision < 64:
            raise ConfigError("--precision: must be at least 64 bits")
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed: must be an unsigned 64-bit integer")
        cfg = load_experiment(args.config)
        if cfg.command != args.command:
            raise ConfigError(f"command: config says {cfg.command!r}, "
                              f"command line says {args.command!r}")
        status, summary = run(cfg, args.precision, args.workers, args.seed, args.out)
    except ConfigError as exc:
        print(f"nikhp: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"nikhp: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for name, ok in summary["criteria"].items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return status


if __name__ == "__main__":
    sys.exit(main())
