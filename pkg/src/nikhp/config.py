"""System definition files and experiment configurations.

Both are JSON documents with a ``schema`` tag.  Every non-integer number is
read from its decimal text (``parse_float=str``) and converted with mpmath, so
no literal passes through a machine double.

System file (``nikhp-system/1``)::

    {
      "schema": "nikhp-system/1",
      "kind": "nikishin",
      "precision": 256,
      "nq": 96,
      "generators": [
        {"interval": ["-1", "1"], "density_class": "chebyshev"},
        {"interval": [2, 3], "density_class": "jacobi",
         "params": {"alpha": "0.5", "beta": 0}},
        {"interval": [4, 5], "density_class": "tabulated", "table": "w.csv"}
      ]
    }

``kind`` is ``nikishin`` (default) or ``angelesco``.  A ``table`` path is
resolved against the system file's directory and read as two-column CSV.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import mpmath

from . import precision
from .measures import Interval, MeasureError, default_nq, make_measure, to_mpf

SYSTEM_SCHEMA = "nikhp-system/1"
EXPERIMENT_SCHEMA = "nikhp-experiment/1"
COMMANDS = ("certify", "zeros", "interlace", "equilibrium", "weak", "rate", "ratio",
            "connection")
DENSITY_CLASSES = ("jacobi", "legendre", "chebyshev", "polynomial-modulated", "tabulated")


class ConfigError(ValueError):
    """A malformed system or experiment file; the message names the field."""


def _load_json(path: Path) -> Any:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text, parse_float=str)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def _decimal(value, where: str) -> str:
    """Canonical decimal text of a numeric literal (str or int)."""
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    text = str(value).strip()
    try:
        mpmath.mpf(text)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {value!r} is not a real number") from exc
    return text


def _integer(value, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    try:
        out = int(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: expected an integer, got {value!r}") from exc
    if str(out) != str(value).strip():
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and out < minimum:
        raise ConfigError(f"{where}: must be at least {minimum}, got {out}")
    return out


def _read_table(path: Path, where: str) -> list[tuple[str, str]]:
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise ConfigError(f"{where}: cannot read table {path}") from exc
    out = []
    for i, row in enumerate(rows):
        if len(row) < 2:
            raise ConfigError(f"{where}: table row {i + 1} needs two columns")
        try:
            out.append((_decimal(row[0], where), _decimal(row[1], where)))
        except ConfigError:
            if i == 0:
                continue  # header line
            raise
    return out


@dataclass(frozen=True)
class GeneratorSpec:
    interval: tuple
    density_class: str
    params: tuple = ()

    def as_dict(self) -> dict:
        return {"interval": list(self.interval), "density_class": self.density_class,
                "params": {k: v for k, v in self.params}}


def _canonical_param(value, where: str):
    if isinstance(value, list):
        return tuple(_canonical_param(v, f"{where}[{i}]") for i, v in enumerate(value))
    return _decimal(value, where)


@dataclass(frozen=True)
class SystemSpec:
    """Parsed system file; decimal text is kept until measures are built."""

    kind: str
    generators: tuple
    precision: int = precision.DEFAULT_PRECISION
    nq: int | None = None

    def canonical(self) -> dict:
        def plain(v):
            return [plain(u) for u in v] if isinstance(v, tuple) else v
        return {"schema": SYSTEM_SCHEMA, "kind": self.kind, "nq": self.nq,
                "generators": [{"interval": list(g.interval),
                                "density_class": g.density_class,
                                "params": {k: plain(v) for k, v in g.params}}
                               for g in self.generators]}

    def content_hash(self) -> str:
        """SHA-256 of the canonical content (precision excluded, tables inlined)."""
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def build(self, nq: int | None = None):
        """Measures and system at the current working precision."""
        from .measures import angelesco_system, nikishin_system

        size = nq or self.nq or default_nq(32)
        measures = []
        for j, g in enumerate(self.generators, start=1):
            params = {k: ([list(r) for r in v] if k == "table" else
                          list(v) if isinstance(v, tuple) else v)
                      for k, v in g.params}
            try:
                measures.append(make_measure(Interval(to_mpf(g.interval[0]),
                                                      to_mpf(g.interval[1])),
                                             g.density_class, size, **params))
            except (MeasureError, KeyError) as exc:
                raise ConfigError(f"generators[{j - 1}]: {exc}") from exc
        try:
            if self.kind == "angelesco":
                return angelesco_system(measures, spec=self.canonical())
            return nikishin_system(measures, spec=self.canonical())
        except MeasureError as exc:
            raise ConfigError(f"generators: {exc}") from exc


def parse_system(data: dict, base: Path | None = None) -> SystemSpec:
    """Validate a decoded system document."""
    if not isinstance(data, dict):
        raise ConfigError("system: expected a JSON object")
    if data.get("schema") != SYSTEM_SCHEMA:
        raise ConfigError(f"schema: expected {SYSTEM_SCHEMA!r}, got {data.get('schema')!r}")
    kind = data.get("kind", "nikishin")
    if kind not in ("nikishin", "angelesco"):
        raise ConfigError(f"kind: unknown system kind {kind!r}")
    bits = _integer(data.get("precision", precision.DEFAULT_PRECISION), "precision", 64)
    nq = data.get("nq")
    nq = None if nq is None else _integer(nq, "nq", 1)
    gens = data.get("generators")
    if not isinstance(gens, list) or not gens:
        raise ConfigError("generators: expected a non-empty list")
    out = []
    for i, g in enumerate(gens):
        where = f"generators[{i}]"
        if not isinstance(g, dict):
            raise ConfigError(f"{where}: expected an object")
        iv = g.get("interval")
        if not isinstance(iv, list) or len(iv) != 2:
            raise ConfigError(f"{where}.interval: expected [a, b]")
        a, b = (_decimal(v, f"{where}.interval") for v in iv)
        if not mpmath.mpf(a) < mpmath.mpf(b):
            raise ConfigError(f"{where}.interval: need a < b")
        cls = g.get("density_class")
        if cls not in DENSITY_CLASSES:
            raise ConfigError(f"{where}.density_class: unknown class {cls!r}")
        raw = g.get("params", {})
        if not isinstance(raw, dict):
            raise ConfigError(f"{where}.params: expected an object")
        params = {k: _canonical_param(v, f"{where}.params.{k}") for k, v in raw.items()}
        if cls == "jacobi" and not {"alpha", "beta"} <= params.keys():
            raise ConfigError(f"{where}.params: jacobi needs alpha and beta")
        if cls == "polynomial-modulated" and "coefficients" not in params:
            raise ConfigError(f"{where}.params: coefficients are required")
        if cls == "tabulated":
            table = g.get("table")
            if not isinstance(table, str):
                raise ConfigError(f"{where}.table: a table path is required")
            path = Path(table)
            if not path.is_absolute() and base is not None:
                path = base / path
            if not path.exists():
                raise ConfigError(f"{where}.table: file {path} does not exist")
            params["table"] = tuple(_read_table(path, f"{where}.table"))
        out.append(GeneratorSpec((a, b), cls, tuple(sorted(params.items()))))
    return SystemSpec(kind, tuple(out), bits, nq)


def load_system(path) -> SystemSpec:
    path = Path(path)
    return parse_system(_load_json(path), base=path.parent)


# ---------------------------------------------------------------------------
# Experiment configuration


@dataclass
class ExperimentConfig:
    system_path: Path
    command: str
    schedule: dict | None = None
    precision: int | None = None
    nq: int | None = None
    grid: int = 2000
    test_points: Any = None
    out: Path = Path("out")
    seed: int = 0
    options: dict = field(default_factory=dict)


def _point_text(value, where: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ConfigError(f"{where}: expected a number or complex string, got {value!r}")
    text = str(value).strip().replace(" ", "")
    try:
        mpmath.mpmathify(text)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {value!r} is not a number") from exc
    return text


def _schedule(raw, where: str = "schedule") -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object")
    kind = raw.get("kind", "diagonal")
    if kind == "diagonal":
        first = _integer(raw.get("first", 1), f"{where}.first", 1)
        last = _integer(raw.get("last", raw.get("max_degree")), f"{where}.last", 1)
        if last < first:
            raise ConfigError(f"{where}: schedule is empty")
        return {"kind": kind, "first": first, "last": last}
    if kind == "staircase":
        first = _integer(raw.get("first_total", 1), f"{where}.first_total", 1)
        last = _integer(raw.get("last_total", raw.get("max_degree")), f"{where}.last_total", 1)
        if last < first:
            raise ConfigError(f"{where}: schedule is empty")
        return {"kind": kind, "first_total": first, "last_total": last}
    if kind == "list":
        idx = raw.get("indices")
        if not isinstance(idx, list) or not idx:
            raise ConfigError(f"{where}.indices: expected a non-empty list")
        return {"kind": kind, "indices": [[_integer(c, f"{where}.indices", 0) for c in n]
                                          for n in idx]}
    raise ConfigError(f"{where}.kind: unknown schedule kind {kind!r}")


def parse_experiment(data: dict, base: Path | None = None) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("experiment: expected a JSON object")
    if data.get("schema") != EXPERIMENT_SCHEMA:
        raise ConfigError(
            f"schema: expected {EXPERIMENT_SCHEMA!r}, got {data.get('schema')!r}")
    command = data.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command: expected one of {', '.join(COMMANDS)}, got {command!r}")
    sys_path = data.get("system")
    if command != "equilibrium" or sys_path is not None:
        if not isinstance(sys_path, str):
            raise ConfigError("system: a system file path is required")
        sys_path = Path(sys_path)
        if not sys_path.is_absolute() and base is not None:
            sys_path = base / sys_path
        if not sys_path.exists():
            raise ConfigError(f"system: file {sys_path} does not exist")
    schedule = data.get("schedule")
    if schedule is not None:
        schedule = _schedule(schedule)
    elif command in ("weak", "rate", "ratio"):
        raise ConfigError("schedule: required for this command")
    bits = data.get("precision")
    bits = None if bits is None else _integer(bits, "precision", 64)
    nq = data.get("nq")
    nq = None if nq is None else _integer(nq, "nq", 1)
    grid = _integer(data.get("grid", 2000), "grid", 8)
    seed = _integer(data.get("seed", 0), "seed", 0)
    pts = data.get("test_points")
    if isinstance(pts, list):
        pts = [_point_text(p, f"test_points[{i}]") for i, p in enumerate(pts)]
    elif isinstance(pts, dict):
        pts = {str(k): [_point_text(p, f"test_points.{k}") for p in v]
               for k, v in pts.items()}
    elif pts is not None:
        raise ConfigError("test_points: expected a list or an object")
    out = Path(data.get("out", "out"))
    if not out.is_absolute() and base is not None:
        out = base / out
    known = {"schema", "command", "system", "schedule", "precision", "nq", "grid", "seed",
             "test_points", "out"}
    options = {k: v for k, v in data.items() if k not in known}
    return ExperimentConfig(sys_path, command, schedule, bits, nq, grid, pts, out, seed,
                            options)


def load_experiment(path) -> ExperimentConfig:
    path = Path(path)
    return parse_experiment(_load_json(path), base=path.parent)
