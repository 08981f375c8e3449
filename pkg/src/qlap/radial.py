"""Radial discretization of integrals over R^N.

A radial function u(|x|) is stored by its nodal values on ``0 = r_0 < ... < r_{n-1} = r_max``.
Integrals of nodal data use product integration: the piecewise quadratic
interpolant (piecewise linear on a few cells next to the origin) is integrated
exactly against ``omega_{N-1} r^{N-1} dr``.  Derivatives live on
cell midpoints, one per cell, and ``|u'|^s`` is integrated with the exact
measure of each cell (annulus).  Beyond ``r_max`` functions are taken to be zero.
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class QuadratureError(ValueError):
    pass


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N (2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def _linear_weights(nodes: np.ndarray, N: int) -> np.ndarray:
    """Exact integrals of the piecewise linear hat functions against r^{N-1} dr."""
    n = nodes.size
    weights = np.zeros(n)
    if n < 2:
        return weights
    x, gw = np.polynomial.legendre.leggauss((1 + N) // 2 + 1)
    a, b = nodes[:-1], nodes[1:]
    h = b - a
    r = 0.5 * (a + b)[:, None] + 0.5 * h[:, None] * x[None, :]
    jac = 0.5 * h[:, None] * gw[None, :] * r ** (N - 1)
    phi_b = (r - a[:, None]) / h[:, None]
    np.add.at(weights, np.arange(n - 1), ((1.0 - phi_b) * jac).sum(axis=1))
    np.add.at(weights, np.arange(1, n), (phi_b * jac).sum(axis=1))
    return weights


def _quadratic_weights(nodes: np.ndarray, N: int) -> np.ndarray:
    """Same for piecewise quadratics on panels (r_{2k}, r_{2k+1}, r_{2k+2})."""
    n = nodes.size
    weights = np.zeros(n)
    if n < 3:
        return weights
    x, gw = np.polynomial.legendre.leggauss((2 + N) // 2 + 1)
    r0, r1, r2 = nodes[0:-2:2], nodes[1:-1:2], nodes[2::2]
    h = r2 - r0
    r = 0.5 * (r0 + r2)[:, None] + 0.5 * h[:, None] * x[None, :]
    jac = 0.5 * h[:, None] * gw[None, :] * r ** (N - 1)
    R0, R1, R2 = r0[:, None], r1[:, None], r2[:, None]
    l0 = (r - R1) * (r - R2) / ((R0 - R1) * (R0 - R2))
    l1 = (r - R0) * (r - R2) / ((R1 - R0) * (R1 - R2))
    l2 = (r - R0) * (r - R1) / ((R2 - R0) * (R2 - R1))
    idx = np.arange(0, n - 2, 2)
    np.add.at(weights, idx, (l0 * jac).sum(axis=1))
    np.add.at(weights, idx + 1, (l1 * jac).sum(axis=1))
    np.add.at(weights, idx + 2, (l2 * jac).sum(axis=1))
    return weights


def _product_weights(nodes: np.ndarray, N: int) -> np.ndarray:
    """Piecewise quadratic product rule with linear cells next to the origin.

    Near r = 0 the factor r^{N-1} varies too fast for quadratic panels to keep
    nonnegative weights when N >= 3; the innermost cells are therefore
    integrated with hats, as few as the parity and positivity allow.
    """
    cells = nodes.size - 1
    n_lin = cells % 2
    while n_lin <= cells:
        w = _linear_weights(nodes[: n_lin + 1], N)
        wq = _quadratic_weights(nodes[n_lin:], N)
        full = np.zeros(nodes.size)
        full[: n_lin + 1] += w
        full[n_lin:] += wq
        if np.all(full >= 0):
            return full
        n_lin += 2
    return _linear_weights(nodes, N)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Nodes on [0, r_max] for radial functions in dimension N.

    ``spacing`` is ``"uniform"`` or ``"geometric"``; geometric grids grow cell
    widths by ``ratio`` per cell, which suits slowly decaying tails.
    """

    r_max: float
    n: int
    N: int
    spacing: str = "uniform"
    ratio: float = 1.0

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"a radial grid needs at least 16 nodes, got {self.n}")
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.spacing not in ("uniform", "geometric"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "geometric" and not self.ratio > 1.0:
            raise ValueError("geometric spacing needs ratio > 1")

    @classmethod
    def uniform(cls, r_max: float, n: int, N: int) -> "RadialGrid":
        return cls(float(r_max), int(n), int(N))

    @classmethod
    def geometric(cls, r_max: float, n: int, N: int, ratio: float) -> "RadialGrid":
        return cls(float(r_max), int(n), int(N), "geometric", float(ratio))

    @property
    def tag(self) -> str:
        return "uniform" if self.spacing == "uniform" else f"geometric({self.ratio!r})"

    @classmethod
    def from_tag(cls, r_max: float, n: int, N: int, tag: str) -> "RadialGrid":
        if tag == "uniform":
            return cls.uniform(r_max, n, N)
        m = re.fullmatch(r"geometric\(([^)]+)\)", tag)
        if not m:
            raise ValueError(f"unrecognized spacing tag {tag!r}")
        return cls.geometric(r_max, n, N, float(m.group(1)))

    def __eq__(self, other):
        if not isinstance(other, RadialGrid):
            return NotImplemented
        return (self.r_max, self.n, self.N, self.spacing, self.ratio) == (
            other.r_max, other.n, other.N, other.spacing, other.ratio)

    def __hash__(self):
        return hash((self.r_max, self.n, self.N, self.spacing, self.ratio))

    @cached_property
    def r(self) -> np.ndarray:
        if self.spacing == "uniform":
            r = np.linspace(0.0, self.r_max, self.n)
        else:
            cells = self.n - 1
            h0 = self.r_max * (self.ratio - 1.0) / (self.ratio ** cells - 1.0)
            r = np.concatenate([[0.0], np.cumsum(h0 * self.ratio ** np.arange(cells))])
            r[-1] = self.r_max
        r.setflags(write=False)
        return r

    @cached_property
    def h(self) -> np.ndarray:
        h = np.diff(self.r)
        h.setflags(write=False)
        return h

    @cached_property
    def mid(self) -> np.ndarray:
        m = 0.5 * (self.r[1:] + self.r[:-1])
        m.setflags(write=False)
        return m

    @cached_property
    def omega(self) -> float:
        return sphere_area(self.N)

    @cached_property
    def weights(self) -> np.ndarray:
        """Node weights w with ``integral f dx ~ sum(w * f)`` (omega included)."""
        w = self.omega * _product_weights(np.asarray(self.r), self.N)
        w.setflags(write=False)
        return w

    @cached_property
    def cell_measure(self) -> np.ndarray:
        """Measure of each annulus ``{r_i < |x| < r_{i+1}}``."""
        rN = self.r ** self.N
        c = self.omega * np.diff(rN) / self.N
        c.setflags(write=False)
        return c

    @property
    def ball_measure(self) -> float:
        return self.omega * self.r_max ** self.N / self.N

    def fn(self, values) -> "RadialFn":
        return RadialFn(self, values)

    def sample(self, f) -> "RadialFn":
        """Evaluate a callable of r on the nodes."""
        return RadialFn(self, f(np.asarray(self.r)))


@dataclass(frozen=True, eq=False)
class RadialFn:
    grid: RadialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        bad = np.flatnonzero(~np.isfinite(v))
        if bad.size:
            i = int(bad[0])
            raise QuadratureError(f"non-finite value at node {i} (r={self.grid.r[i]:g})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    def with_values(self, values) -> "RadialFn":
        return RadialFn(self.grid, values)

    def derivative(self) -> np.ndarray:
        """Cell-midpoint slopes ``(u_{i+1} - u_i) / (r_{i+1} - r_i)``."""
        return np.diff(self.values) / self.grid.h

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def tail_ratio(self, fraction: float = 0.1) -> float:
        """``max |u|`` over the outer ``fraction`` of [0, r_max], relative to ``max |u|``.

        Large values mean the truncation radius is too small.  The outer band
        is used rather than the last node because minimizers are pinned to 0
        there (zero extension).
        """
        top = self.max_abs()
        if top == 0:
            return 0.0
        band = np.asarray(self.grid.r) >= (1.0 - fraction) * self.grid.r_max
        return float(np.max(np.abs(self.values[band]))) / top

    def __mul__(self, c: float) -> "RadialFn":
        return RadialFn(self.grid, c * self.values)

    __rmul__ = __mul__

    def __add__(self, other: "RadialFn") -> "RadialFn":
        _check_same_grid(self, other)
        return RadialFn(self.grid, self.values + other.values)

    def __sub__(self, other: "RadialFn") -> "RadialFn":
        _check_same_grid(self, other)
        return RadialFn(self.grid, self.values - other.values)

    def __neg__(self) -> "RadialFn":
        return RadialFn(self.grid, -self.values)

    def to_csv(self, path=None) -> str:
        text = dump_csv(self)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "RadialFn":
        return load_csv(source)


def _check_same_grid(a: RadialFn, b: RadialFn) -> None:
    if a.grid != b.grid:
        raise ValueError("functions live on different grids")


def integrate(f: RadialFn) -> float:
    """``integral_{B(r_max)} f(|x|) dx`` by product integration."""
    vals = np.asarray(f.values)
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        i = int(bad[0])
        raise QuadratureError(f"non-finite integrand at node {i} (r={f.grid.r[i]:g})")
    return float(np.dot(f.grid.weights, vals))


def lp_norm_pow(u: RadialFn, s: float) -> float:
    """``||u||_s^s``."""
    if s < 1:
        raise ValueError("s must be >= 1")
    return integrate(u.with_values(np.abs(u.values) ** s))


def grad_norm_pow(u: RadialFn, s: float) -> float:
    """``||grad u||_s^s`` with the slope of each cell integrated over its annulus."""
    if s < 1:
        raise ValueError("s must be >= 1")
    if u.grid.n < 3:
        raise ValueError("need at least 3 nodes")
    d = u.derivative()
    total = float(np.dot(u.grid.cell_measure, np.abs(d) ** s))
    if not math.isfinite(total):
        i = int(np.flatnonzero(~np.isfinite(d))[0]) if np.any(~np.isfinite(d)) else 0
        raise QuadratureError(f"non-finite gradient integrand in cell {i}")
    return total


def rearrange_decreasing(u: RadialFn) -> RadialFn:
    """Discrete symmetric decreasing rearrangement of |u|.

    Nodes are sorted by |u| (largest first) together with their quadrature
    measure, and the sorted values refill the grid from the origin outward, so
    each node receives the value sitting at the middle of its own measure
    interval.  Superlevel-set measures agree with those of |u| up to one cell.
    """
    a = np.abs(u.values)
    mu = np.asarray(u.grid.weights)
    order = np.argsort(-a, kind="stable")
    sorted_vals = a[order]
    cum_sorted = np.cumsum(mu[order])
    centers = np.cumsum(mu) - 0.5 * mu
    idx = np.searchsorted(cum_sorted, centers, side="right")
    idx = np.minimum(idx, a.size - 1)
    out = sorted_vals[idx]
    # the refill is monotone by construction; enforce exactly against ties in cum sums
    out = np.minimum.accumulate(out)
    return u.with_values(out)


def superlevel_measure(u: RadialFn, t: float) -> float:
    """Quadrature measure of ``{|u| > t}`` using node weights."""
    return float(np.sum(np.asarray(u.grid.weights)[np.abs(u.values) > t]))


def dump_csv(u: RadialFn) -> str:
    g = u.grid
    buf = io.StringIO()
    buf.write(f"# N={g.N} r_max={g.r_max!r} n={g.n} spacing={g.tag}\n")
    buf.write("r,value\n")
    for r, v in zip(g.r.tolist(), u.values.tolist()):
        buf.write(f"{r!r},{v!r}\n")
    return buf.getvalue()


_HEADER = re.compile(r"#\s*N=(\d+)\s+r_max=(\S+)\s+n=(\d+)\s+spacing=(\S+)")


def load_csv(source) -> RadialFn:
    """Read a RadialFn written by :func:`dump_csv` (path or text)."""
    if isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    m = _HEADER.fullmatch(lines[0].strip())
    if not m:
        raise ValueError(f"bad RadialFn CSV header: {lines[0]!r}")
    N, r_max, n, tag = int(m.group(1)), float(m.group(2)), int(m.group(3)), m.group(4)
    grid = RadialGrid.from_tag(r_max, n, N, tag)
    body = lines[1:]
    if body and body[0].startswith("r,"):
        body = body[1:]
    data = np.array([[float(x) for x in ln.split(",")] for ln in body])
    if data.shape != (n, 2):
        raise ValueError(f"expected {n} rows, found {data.shape[0]}")
    if not np.allclose(data[:, 0], grid.r, rtol=1e-12, atol=1e-300):
        raise ValueError("CSV radii do not match the grid described in the header")
    return RadialFn(grid, data[:, 1])
