"""Scheme files, patch CSVs, JSON reports and run manifests.

Everything written here is a function of its inputs only: floats use the
shortest round-trip repr, JSON keys are sorted and no timestamps are stored,
so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .groups import HeisenbergModelSet, SL2ModelSet
from .patch import Box, LatticeSet, PointPatch
from .scheme import DEFAULT_BUDGET, EuclideanScheme, ModelSet
from .windows import window_from_dict

SCHEME_TYPES = ("euclidean", "heisenberg-zsqrt2", "sl2-zsqrt2", "lattice")
COLUMNS = {"heisenberg": ["x", "y", "z"], "sl2": ["a", "b", "c", "d"]}


@dataclass
class LoadedScheme:
    kind: str
    model: object
    raw: dict

    @property
    def is_group(self) -> bool:
        return self.kind in ("heisenberg-zsqrt2", "sl2-zsqrt2")

    def sha256(self) -> str:
        return hashlib.sha256(canonical_json(self.raw).encode()).hexdigest()


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (Fraction, Path)):
        return str(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _clean(o):
    """Replace non-finite floats by strings so the output stays valid JSON."""
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (float, np.floating)) and not math.isfinite(o):
        return str(float(o))
    return o


def dumps_report(obj) -> str:
    return json.dumps(_clean(json.loads(json.dumps(obj, default=_json_default, allow_nan=True))), sort_keys=True, indent=2) + "\n"


def scheme_from_dict(raw: dict, budget: int = DEFAULT_BUDGET) -> LoadedScheme:
    if not isinstance(raw, dict):
        raise ConfigError("scheme file must hold a JSON object")
    kind = raw.get("type")
    if kind not in SCHEME_TYPES:
        raise ConfigError(f"scheme type must be one of {SCHEME_TYPES}, got {kind!r}")
    try:
        if kind == "euclidean":
            scheme = EuclideanScheme(raw["d"], raw["m"], raw["basis"], raw.get("exact_form"))
            window = window_from_dict(raw["window"], scheme.m)
            model = ModelSet(scheme, window, budget)
        elif kind == "lattice":
            model = LatticeSet(raw["basis"])
        elif kind == "heisenberg-zsqrt2":
            model = HeisenbergModelSet(raw.get("window", {}).get("half_widths", (0.8, 0.8, 0.8)), budget)
        else:
            win = raw.get("window", {})
            rho = win.get("frobenius_radius", win.get("rho", 1.3))
            model = SL2ModelSet(rho, raw.get("entry_bound", 12), budget)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed scheme description: missing or invalid {exc}") from exc
    except np.linalg.LinAlgError as exc:
        raise ConfigError(f"malformed basis: {exc}") from exc
    return LoadedScheme(kind, model, raw)


def load_scheme(path, budget: int = DEFAULT_BUDGET) -> LoadedScheme:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read scheme file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scheme file {path} is not valid JSON: {exc}") from exc
    return scheme_from_dict(raw, budget)


def parse_region(text: str) -> Box:
    try:
        return Box.from_flat(text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad region {text!r}: {exc}") from exc


def parse_t_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (stop included when hit), or a single value."""
    try:
        parts = [float(x) for x in text.split(":")]
    except ValueError as exc:
        raise ConfigError(f"bad t-grid {text!r}") from exc
    if len(parts) == 1:
        grid = np.array(parts)
    elif len(parts) == 3:
        start, stop, step = parts
        if step <= 0 or stop < start:
            raise ConfigError("t-grid needs start <= stop and a positive step")
        n = int(math.floor((stop - start) / step + 1e-9))
        grid = start + step * np.arange(n + 1)
    else:
        raise ConfigError(f"t-grid must be start:stop:step, got {text!r}")
    if np.any(grid <= 0):
        raise ConfigError("t values must be positive")
    return grid


def _header(patch: PointPatch) -> list[str]:
    name = getattr(patch.law, "name", "euclidean")
    return COLUMNS.get(name, [f"x{k + 1}" for k in range(patch.dim)])


def patch_to_csv(patch: PointPatch) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_header(patch))
    for row in patch.points:
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def patch_from_csv(text: str, region: Box) -> PointPatch:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ConfigError("empty CSV")
    try:
        pts = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float).reshape(-1, len(rows[0]))
    except ValueError as exc:
        raise ConfigError(f"bad CSV row: {exc}") from exc
    return PointPatch(pts, region)


def sigma_trace_to_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "count", "volume", "sigma"])
    for t, c, v, s in trace.rows():
        w.writerow([repr(t), c, repr(v), repr(s)])
    return buf.getvalue()


def manifest(loaded: LoadedScheme, region, count: int, command: str) -> dict:
    return {
        "tool": "modelset",
        "version": __version__,
        "command": command,
        "scheme_sha256": loaded.sha256(),
        "region": region,
        "count": int(count),
    }


def write_text(path, text: str):
    Path(path).write_text(text)
