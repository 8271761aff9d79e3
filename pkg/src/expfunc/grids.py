"""Densities and distribution functions sampled on uniform grids, plus CSV I/O."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(path_or_buf, columns: dict, header: dict) -> str:
    """Write ``#``-prefixed header lines followed by the named columns.

    Numbers use the shortest decimal string that round-trips.  Returns the
    text written.
    """
    out = io.StringIO()
    for key in sorted(header):
        out.write(f"# {key}: {json.dumps(header[key], sort_keys=True)}\n")
    names = list(columns)
    out.write(",".join(names) + "\n")
    cols = [np.asarray(columns[n], dtype=float) for n in names]
    for row in zip(*cols):
        out.write(",".join(_fmt(v) for v in row) + "\n")
    text = out.getvalue()
    if path_or_buf is not None:
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w") as fh:
                fh.write(text)
    return text


def read_csv(path) -> tuple[dict, dict]:
    """Inverse of :func:`write_csv`: returns ``(columns, header)``."""
    header, rows, names = {}, [], None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                try:
                    header[key.strip()] = json.loads(val)
                except json.JSONDecodeError:
                    header[key.strip()] = val.strip()
                continue
            if names is None:
                names = [n.strip() for n in line.split(",")]
                continue
            rows.append([float(v) for v in line.split(",")])
    if names is None:
        raise ValueError(f"{path}: no column header")
    data = np.array(rows, dtype=float).reshape(-1, len(names))
    return {n: data[:, i] for i, n in enumerate(names)}, header


@dataclass
class GridCDF:
    """Distribution function on a grid; linear interpolation inside, clamped outside."""

    grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)
    evaluator: Callable | None = None

    def __call__(self, t):
        t = np.asarray(t, float)
        if self.evaluator is not None:
            return self.evaluator(t)
        return np.interp(t, self.grid, self.values, left=0.0, right=float(self.values[-1]))

    def is_monotone(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.values) >= -tol))

    def to_csv(self, path=None, header: dict | None = None) -> str:
        h = {"version": __version__, "grid": _grid_meta(self.grid)}
        h.update({k: v for k, v in self.meta.items() if _jsonable(v)})
        h.update(header or {})
        return write_csv(path, {"t": self.grid, "F": self.values}, h)


@dataclass
class GridDensity:
    """Density on a uniform grid.

    ``edge_exponent`` records the power ``p`` of the local behaviour
    ``f ~ (t - edge)**(p - 1)`` in the first cell when the solver knows it;
    cumulative integrals use it there and the trapezoid rule elsewhere.
    """

    grid: np.ndarray
    values: np.ndarray
    support: tuple = (0.0, np.inf)
    normalized: bool = False
    edge: str | None = None  # "left" or "right": side of the singular edge
    edge_exponent: float | None = None
    tail_mass: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def cumulative(self) -> np.ndarray:
        """``int_{grid[0]}^{t_i} f`` at every node."""
        f = np.where(np.isfinite(self.values), self.values, 0.0)
        h = self.h
        cells = 0.5 * h * (f[1:] + f[:-1])
        p = self.edge_exponent
        if p is not None and self.edge == "left":
            cells[0] = f[1] * h / p
        elif p is not None and self.edge == "right":
            cells[-1] = f[-2] * h / p
        return np.concatenate([[0.0], np.cumsum(cells)])

    def mass(self) -> float:
        return float(self.cumulative()[-1])

    def cdf(self) -> GridCDF:
        c = self.cumulative()
        start = 0.0
        return GridCDF(self.grid.copy(), np.clip(start + c, 0.0, 1.0), dict(self.meta))

    def derivative(self) -> np.ndarray:
        f = np.where(np.isfinite(self.values), self.values, 0.0)
        return np.gradient(f, self.h, edge_order=2)

    def laplace(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, float))
        c = self.cumulative()
        f = np.where(np.isfinite(self.values), self.values, 0.0)
        w = np.full(self.grid.size, self.h)
        w[0] = w[-1] = self.h / 2
        out = np.exp(-np.outer(u, self.grid)) @ (f * w)
        if self.edge_exponent is not None and self.edge == "left":
            # replace the first trapezoid cell by the power-law cell mass
            first = 0.5 * self.h * (f[0] + f[1])
            out += (c[1] - first) * np.exp(-u * self.grid[0])
        return out

    def to_csv(self, path=None, header: dict | None = None) -> str:
        h = {"version": __version__, "grid": _grid_meta(self.grid), "mass": self.mass(),
             "tail_mass": self.tail_mass, "support": [self.support[0], _inf(self.support[1])]}
        h.update({k: v for k, v in self.meta.items() if _jsonable(v)})
        h.update(header or {})
        return write_csv(path, {"t": self.grid, "f": self.values}, h)

    @classmethod
    def from_csv(cls, path) -> tuple["GridDensity", np.ndarray | None]:
        """Read ``t,f`` (and optional ``df``) columns; returns the density and the derivative column."""
        cols, header = read_csv(path)
        if "t" not in cols or "f" not in cols:
            raise ValueError(f"{path}: expected columns t,f")
        t = cols["t"]
        if t.size < 3 or not np.allclose(np.diff(t), t[1] - t[0], rtol=1e-6, atol=1e-12):
            raise ValueError(f"{path}: grid must be uniform with at least 3 points")
        dens = cls(t, cols["f"], meta={"source": str(path)})
        return dens, cols.get("df")


@dataclass
class ResidualReport:
    grid: np.ndarray
    residual: np.ndarray
    variant: str
    scale: float = 1.0

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residual))) if self.residual.size else 0.0

    @property
    def argmax(self) -> float:
        return float(self.grid[np.argmax(np.abs(self.residual))])

    def to_dict(self) -> dict:
        return {"variant": self.variant, "max_abs_residual": self.max_abs, "at": self.argmax,
                "n_points": int(self.grid.size), "scale": self.scale}


def _grid_meta(g) -> dict:
    g = np.asarray(g)
    return {"min": float(g[0]), "max": float(g[-1]), "n": int(g.size),
            "step": float(g[1] - g[0]) if g.size > 1 else 0.0}


def _inf(x):
    return "inf" if np.isinf(x) else float(x)


def _jsonable(v) -> bool:
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def _evaluate_density(d: GridDensity, t):
    t = np.asarray(t, float)
    f = np.where(np.isfinite(d.values), d.values, 0.0)
    return np.interp(t, d.grid, f, left=0.0, right=0.0)


GridDensity.__call__ = _evaluate_density
