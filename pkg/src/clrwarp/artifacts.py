"""Reading and writing run artifacts: signal CSVs, config files, summaries.

Every float goes out with 17 significant digits so a write/read cycle is
exact for doubles. Outputs of a run are registered with a
:class:`RunManifest`, which is written last and therefore marks completion.
"""

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .numerics import Grid
from .optimizer import RegistrationConfig
from .signals import Signal

__all__ = [
    "ParseError",
    "fmt",
    "read_signal_csv",
    "write_signal_csv",
    "write_warp_csv",
    "write_aligned_csv",
    "write_trace_csv",
    "read_config",
    "parse_config_text",
    "write_config",
    "write_json",
    "RunManifest",
]

CONFIG_KEYS = {
    "method": "method",
    "d": "basis_dim",
    "basis_dim": "basis_dim",
    "n": "grid_size",
    "grid_size": "grid_size",
    "lambda": "lam",
    "lam": "lam",
    "alpha": "step_size",
    "step_size": "step_size",
    "max_iters": "max_iters",
    "iters": "max_iters",
    "rel_tol": "rel_tol",
    "seed": "seed",
}
_INT_FIELDS = {"basis_dim", "grid_size", "max_iters", "seed"}


class ParseError(ValueError):
    """Input text could not be parsed; carries the 1-based line number if known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


def fmt(x):
    return format(float(x), ".17g")


def _atomic_write(path, text):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, columns):
    rows = [",".join(header)]
    cols = [np.asarray(c, dtype=float) for c in columns]
    for i in range(len(cols[0])):
        rows.append(",".join(fmt(c[i]) for c in cols))
    return "\n".join(rows) + "\n"


def read_signal_csv(path, n_points=None, label=None):
    """Load a ``t,value`` CSV as a :class:`Signal`.

    Times must be strictly increasing and span [0, 1]. If they are not the
    nodes of a uniform grid (of ``n_points`` nodes when given, otherwise of
    as many nodes as rows) the values are resampled by a natural cubic spline.

    Raises
    ------
    ParseError
        On a bad header, a non-numeric or non-finite field, wrong column count,
        or times that are not increasing over [0, 1].
    """
    ts, vs = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file, expected header 't,value'", path, 1)
        if [h.strip().lower() for h in header] != ["t", "value"]:
            raise ParseError(f"expected header 't,value', got {','.join(header)!r}", path, 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not x.strip() for x in row):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", path, line)
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                raise ParseError(f"non-numeric field in {row!r}", path, line) from None
            if not (np.isfinite(t) and np.isfinite(v)):
                raise ParseError("non-finite value", path, line)
            if ts and t <= ts[-1]:
                raise ParseError("t must be strictly increasing", path, line)
            ts.append(t)
            vs.append(v)
    if len(ts) < 4:
        raise ParseError(f"need at least 4 samples, got {len(ts)}", path)
    t = np.array(ts)
    v = np.array(vs)
    if abs(t[0]) > 1e-9 or abs(t[-1] - 1.0) > 1e-9:
        raise ParseError(f"t must span [0, 1], got [{t[0]:g}, {t[-1]:g}]", path)
    grid = Grid(n_points or len(t))
    if len(t) != grid.n_points or not np.allclose(t, grid.nodes, rtol=0, atol=1e-9):
        v = CubicSpline(t, v, bc_type="natural")(grid.nodes)
    return Signal(grid, v, label if label is not None else str(path))


def write_signal_csv(path, signal):
    _atomic_write(path, _csv_text(["t", "value"], [signal.grid.nodes, signal.values]))


def write_warp_csv(path, warp):
    cols = [warp.grid.nodes, warp.gamma, warp.gamma_prime]
    _atomic_write(path, _csv_text(["t", "gamma", "gamma_prime"], cols))


def write_aligned_csv(path, grid, f, g, warped_g, isometric=None):
    header = ["t", "f", "g", "g_warped"]
    cols = [grid.nodes, f, g, warped_g]
    if isometric is not None:
        header.append("g_warped_isometric")
        cols.append(isometric)
    _atomic_write(path, _csv_text(header, cols))


def write_trace_csv(path, result):
    n = result.iterations_run
    cols = [np.arange(1, n + 1), result.objective_trace, result.mismatch_trace, result.penalty_trace]
    text = ["iteration,objective,mismatch,penalty"]
    for k in range(n):
        text.append(f"{k + 1}," + ",".join(fmt(c[k]) for c in cols[1:]))
    _atomic_write(path, "\n".join(text) + "\n")


def parse_config_text(text, path=None):
    """Parse flat ``key = value`` text into RegistrationConfig keyword arguments.

    Blank lines and lines starting with ``#`` are ignored. Keys are matched
    case-insensitively; both short names (``d``, ``N``, ``lambda``,
    ``alpha``) and field names are accepted.
    """
    out = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {line!r}", path, i)
        key, value = (s.strip() for s in line.split("=", 1))
        name = CONFIG_KEYS.get(key.lower())
        if name is None:
            raise ParseError(f"unknown key {key!r}", path, i)
        if name in out:
            raise ParseError(f"duplicate key {key!r}", path, i)
        try:
            if name == "method":
                out[name] = value
            elif name in _INT_FIELDS:
                out[name] = int(value)
            else:
                out[name] = float(value)
        except ValueError:
            raise ParseError(f"bad value for {key!r}: {value!r}", path, i) from None
    return out


def read_config(path, **overrides):
    """Read a config file and build a validated :class:`RegistrationConfig`."""
    with open(path) as fh:
        kwargs = parse_config_text(fh.read(), path)
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RegistrationConfig(**kwargs)
    except ValueError as exc:
        raise ParseError(str(exc), path) from None


def write_config(path, config):
    lines = [f"{k} = {v}" for k, v in config.to_dict().items()]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path, obj):
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


@dataclass
class RunManifest:
    """Record of one run directory; :meth:`write` must be the last write."""

    out_dir: Path
    config: dict
    inputs: list = field(default_factory=list)
    experiment: str = None
    files: list = field(default_factory=list)

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)

    def add(self, role, path):
        rel = Path(path).relative_to(self.out_dir)
        self.files.append({"role": role, "path": rel.as_posix()})
        return path

    def write(self):
        path = self.out_dir / "manifest.json"
        write_json(path, {
            "config": self.config,
            "inputs": [str(p) for p in self.inputs],
            "output_dir": str(self.out_dir),
            "experiment": self.experiment,
            "files": self.files,
        })
        return path
