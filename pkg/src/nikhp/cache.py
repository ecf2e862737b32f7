"""On-disk cache of solved Hermite-Padé families.

One JSON file (schema ``nikhp-family/1``) per (system hash, precision,
multi-index, type).  Coefficients are stored as round-trip decimal strings,
so a cache hit reproduces the fresh solve bit for bit.  Writers hold a file
lock and publish with an atomic rename; concurrent callers for the same key
wait on the lock and then read the winner's file.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from pathlib import Path

import mpmath
from filelock import FileLock
from mpmath.libmp import repr_dps, to_str

from . import precision
from .hermite_pade import TypeIFamily, TypeIIFamily, solve_type_i, solve_type_ii
from .measures import Interval
from .polynomials import MultiIndex, Polynomial

FAMILY_SCHEMA = "nikhp-family/1"
CACHE_ENV = "NIKHP_CACHE_DIR"

log = logging.getLogger(__name__)


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "nikhp"


def mp_text(x) -> str:
    """Decimal text that parses back to exactly ``x`` at the current precision."""
    return to_str(mpmath.mpf(x)._mpf_, repr_dps(precision.get_precision()))


def _poly_record(p: Polynomial) -> dict:
    rec = {"coefficients": [mp_text(c) for c in p.coefficients]}
    if p.cheb is not None:
        coeffs, iv = p.cheb
        rec["chebyshev"] = [mp_text(c) for c in coeffs]
        rec["interval"] = [mp_text(iv.a), mp_text(iv.b)]
    return rec


def _poly_from_record(rec: dict) -> Polynomial:
    coeffs = [mpmath.mpf(c) for c in rec["coefficients"]]
    cheb = None
    if "chebyshev" in rec:
        iv = Interval(mpmath.mpf(rec["interval"][0]), mpmath.mpf(rec["interval"][1]))
        cheb = (tuple(mpmath.mpf(c) for c in rec["chebyshev"]), iv)
    return Polynomial(coeffs, cheb=cheb)


def family_record(family, system_hash: str) -> dict:
    """Serialisable content of a solved family."""
    if isinstance(family, TypeIIFamily):
        kind, polys = "II", {"Q": _poly_record(family.Q)}
        residuals = family.residuals()
    else:
        kind = "I"
        polys = {f"a{j}": _poly_record(p) for j, p in enumerate(family.a)}
        residuals = family.orthogonality_residuals()
    worst = max((r.relative for r in residuals), default=mpmath.mpf(0))
    return {
        "schema": FAMILY_SCHEMA,
        "system_hash": system_hash,
        "precision": precision.get_precision(),
        "index": list(family.index.components),
        "type": kind,
        "margin": mp_text(family.margin),
        "polynomials": polys,
        "residuals": {"count": len(residuals),
                      "max_relative": mpmath.nstr(worst, 6)},
    }


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=1) + "\n"


class FamilyCache:
    """Directory of family files keyed by (system hash, precision, index, type)."""

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.hits = 0
        self.misses = 0

    def path(self, system_hash: str, n: MultiIndex, kind: str) -> Path:
        label = "-".join(str(c) for c in n.components)
        name = f"{system_hash[:24]}-p{precision.get_precision()}-{kind}-{label}.json"
        return self.directory / name

    def _read(self, path: Path, system, system_hash: str, n: MultiIndex, kind: str):
        rec = json.loads(path.read_text())
        if (rec.get("schema") != FAMILY_SCHEMA or rec.get("system_hash") != system_hash
                or rec.get("precision") != precision.get_precision()
                or rec.get("index") != list(n.components) or rec.get("type") != kind):
            raise ValueError("key mismatch")
        polys = rec["polynomials"]
        margin = mpmath.mpf(rec["margin"])
        if kind == "II":
            return TypeIIFamily(system, n, _poly_from_record(polys["Q"]), margin)
        a = [_poly_from_record(polys[f"a{j}"]) for j in range(system.m + 1)]
        return TypeIFamily(system, n, a, margin)

    def get_or_solve(self, system, system_hash: str, n, kind: str = "II"):
        """Cached family, or a fresh solve that is then persisted."""
        if kind not in ("I", "II"):
            raise ValueError("kind must be 'I' or 'II'")
        n = n if isinstance(n, MultiIndex) else MultiIndex(tuple(n))
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path(system_hash, n, kind)
        with FileLock(str(path) + ".lock"):
            if path.exists():
                try:
                    fam = self._read(path, system, system_hash, n, kind)
                    self.hits += 1
                    return fam
                except (ValueError, KeyError, TypeError) as exc:
                    log.warning("corrupt cache entry %s (%s); recomputing", path.name, exc)
            self.misses += 1
            fam = (solve_type_ii if kind == "II" else solve_type_i)(system, n)
            text = dumps(family_record(fam, system_hash))
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
            # return the persisted form so hits and misses agree exactly
            return self._read(path, system, system_hash, n, kind)

    def solver(self, system, system_hash: str, kind: str = "II"):
        """A ``solver(system, n)`` callable for the asymptotics harnesses."""
        memo: dict = {}

        def solve(sys_, n):
            key = tuple(n.components if isinstance(n, MultiIndex) else n)
            if key not in memo:
                memo[key] = self.get_or_solve(sys_, system_hash, key, kind)
            return memo[key]

        return solve


# ---------------------------------------------------------------------------
# Process-parallel warm-up.  mpmath precision is process-global and library
# routines change it temporarily, so threads cannot share a context safely.

_worker_state: dict = {}


def _worker_init(spec, nq, bits, directory, system_hash):
    precision.set_precision(bits)
    _worker_state["system"] = spec.build(nq)
    _worker_state["cache"] = FamilyCache(directory)
    _worker_state["hash"] = system_hash


def _worker_solve(task):
    n, kind = task
    st = _worker_state
    try:
        st["cache"].get_or_solve(st["system"], st["hash"], n, kind)
    except Exception as exc:  # reported again by the serial pass
        return f"{type(exc).__name__}: {exc}"
    return None


def warm(spec, nq, directory, tasks, workers: int) -> list:
    """Solve ``tasks`` (pairs of index and kind) in worker processes so that the
    serial pass only reads the cache.  Returns worker error messages."""
    from concurrent.futures import ProcessPoolExecutor

    tasks = [(tuple(n.components if isinstance(n, MultiIndex) else n), k) for n, k in tasks]
    if workers <= 1 or not tasks:
        return []
    args = (spec, nq, precision.get_precision(), Path(directory), spec.content_hash())
    with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                             initargs=args) as pool:
        return [e for e in pool.map(_worker_solve, tasks) if e]
