"""Sampled and analytic functions on R^n (n = 1, 2).

A :class:`LatticeFunction` stores samples on a uniform grid over a box and
interpolates piecewise (bi)linearly.  Outside the box it follows an
:class:`Exterior` rule.  :class:`AnalyticFunction` wraps a vectorised formula
together with the radii along a ray where the formula stops being smooth,
which the operator quadrature uses as breakpoints.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DomainError, InsufficientExteriorDataError


@dataclass(frozen=True)
class Exterior:
    """Rule for values outside the box: ``zero``, ``analytic`` or ``bounded``."""

    kind: str = "zero"
    func: Callable | None = None
    bound: float | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "analytic", "bounded"):
            raise ConfigurationError(f"unknown exterior kind {self.kind!r}")
        if self.kind == "analytic" and self.func is None:
            raise ConfigurationError("analytic exterior needs a function")
        if self.kind == "bounded" and (self.bound is None or self.bound < 0):
            raise ConfigurationError("bounded exterior needs M >= 0")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def analytic(cls, func, bound=None):
        return cls("analytic", func=func, bound=bound)

    @classmethod
    def bounded(cls, M):
        return cls("bounded", bound=float(M))

    def describe(self):
        d = {"kind": self.kind}
        if self.bound is not None:
            d["M"] = self.bound
        return d


def as_points(x, dim):
    """Coerce to an array of shape ``(k, dim)``."""
    x = np.asarray(x, dtype=float)
    if dim == 1:
        return x.reshape(-1, 1)
    return x.reshape(-1, dim)


@dataclass(frozen=True, eq=False)
class LatticeFunction:
    values: np.ndarray
    lower: tuple
    h: float
    exterior: Exterior = field(default_factory=Exterior.zero)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.ndim not in (1, 2):
            raise ConfigurationError("only 1D and 2D lattices are supported")
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("lattice values must be finite")
        if not self.h > 0 or min(v.shape) < 2:
            raise ConfigurationError("need h > 0 and at least two nodes per axis")
        lower = tuple(float(c) for c in np.atleast_1d(self.lower))
        if len(lower) != v.ndim:
            raise ConfigurationError("lower corner does not match the value array")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "h", float(self.h))

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    @property
    def upper(self):
        return tuple(lo + (m - 1) * self.h for lo, m in zip(self.lower, self.shape))

    @property
    def box(self):
        return self.lower, self.upper

    def axes(self):
        return [lo + self.h * np.arange(m) for lo, m in zip(self.lower, self.shape)]

    def nodes(self):
        """Node coordinates, shape ``(*shape, dim)``."""
        grids = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(grids, axis=-1)

    def with_values(self, values):
        return LatticeFunction(np.asarray(values, dtype=float), self.lower, self.h, self.exterior)

    def __add__(self, other):
        if not isinstance(other, LatticeFunction) or other.shape != self.shape or other.lower != self.lower:
            raise ConfigurationError("lattice functions must share the grid")
        ext = self.exterior
        if other.exterior.kind != "zero":
            if ext.kind != "zero":
                raise ConfigurationError("cannot add two non-zero exteriors")
            ext = other.exterior
        return LatticeFunction(self.values + other.values, self.lower, self.h, ext)

    def __mul__(self, c):
        ext = self.exterior
        if ext.kind == "analytic":
            f = ext.func
            ext = Exterior.analytic(lambda p: c * f(p), None if ext.bound is None else abs(c) * ext.bound)
        elif ext.kind == "bounded":
            ext = Exterior.bounded(abs(c) * ext.bound)
        return LatticeFunction(c * self.values, self.lower, self.h, ext)

    __rmul__ = __mul__

    def inside(self, pts):
        pts = as_points(pts, self.dim)
        lo, hi = np.array(self.lower), np.array(self.upper)
        tol = 1e-12 * self.h
        return np.all((pts >= lo - tol) & (pts <= hi + tol), axis=-1)

    def interpolate(self, pts):
        """Piecewise (bi)linear interpolation; ``pts`` must lie in the box."""
        pts = as_points(pts, self.dim)
        idx = (pts - np.array(self.lower)) / self.h
        out = np.zeros(pts.shape[0])
        if self.dim == 1:
            m = self.shape[0]
            k = np.clip(np.floor(idx[:, 0]).astype(int), 0, m - 2)
            t = idx[:, 0] - k
            v = self.values
            return (1 - t) * v[k] + t * v[k + 1]
        m1, m2 = self.shape
        i = np.clip(np.floor(idx[:, 0]).astype(int), 0, m1 - 2)
        j = np.clip(np.floor(idx[:, 1]).astype(int), 0, m2 - 2)
        a = idx[:, 0] - i
        b = idx[:, 1] - j
        v = self.values
        out = (1 - a) * (1 - b) * v[i, j] + a * (1 - b) * v[i + 1, j] + (1 - a) * b * v[i, j + 1] + a * b * v[i + 1, j + 1]
        return out

    def __call__(self, pts):
        pts = as_points(pts, self.dim)
        ins = self.inside(pts)
        out = np.zeros(pts.shape[0])
        if ins.any():
            out[ins] = self.interpolate(pts[ins])
        if (~ins).any():
            if self.exterior.kind == "analytic":
                out[~ins] = self.exterior.func(pts[~ins])
            elif self.exterior.kind == "bounded":
                raise InsufficientExteriorDataError("values outside the box are only known up to a bound")
        return out

    def support_nodes(self):
        return np.argwhere(self.values != 0)

    def support_distance(self, x):
        """Distance from ``x`` to the closure of the support of the interpolant."""
        idx = self.support_nodes()
        if idx.size == 0:
            return np.inf
        x = as_points(x, self.dim)[0]
        c = np.array(self.lower) + self.h * idx
        # the interpolant of a node is supported in the cells around it
        gap = np.maximum(np.abs(c - x) - self.h, 0.0)
        return float(np.min(np.linalg.norm(gap, axis=-1)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def describe(self):
        return {
            "dim": self.dim,
            "lower": list(self.lower),
            "upper": list(self.upper),
            "shape": list(self.shape),
            "h": self.h,
            "exterior": self.exterior.describe(),
        }


def lattice_from_function(func, lower, h, shape, exterior=None) -> LatticeFunction:
    lower = tuple(float(c) for c in np.atleast_1d(lower))
    axes = [lo + h * np.arange(m) for lo, m in zip(lower, shape)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    vals = np.asarray(func(pts), dtype=float).reshape(tuple(shape))
    return LatticeFunction(vals, lower, h, exterior or Exterior.zero())


# ---------------------------------------------------------------------------
# analytic functions


@dataclass(frozen=True, eq=False)
class AnalyticFunction:
    """A formula on all of R^n.

    ``ray_breaks(x, e)`` returns radii ``r > 0`` where ``r -> u(x + r e)`` is
    not smooth.  ``support_exit(x, e)``, when given, returns the radius beyond
    which ``u`` vanishes along the ray.
    """

    func: Callable
    dim: int
    ray_breaks: Callable | None = None
    support_exit: Callable | None = None
    norms: tuple | None = None  # (sup, sup grad, sup hessian) when smooth
    name: str = "analytic"

    def __call__(self, pts):
        return np.asarray(self.func(as_points(pts, self.dim)), dtype=float)

    def breaks(self, x, e):
        if self.ray_breaks is None:
            return []
        return [float(r) for r in self.ray_breaks(x, e) if r > 0]


def _line_ball_roots(x, e, c, R):
    y = x - c
    b = float(y @ e)
    disc = b * b - (float(y @ y) - R * R)
    if disc <= 0:
        return []
    sq = np.sqrt(disc)
    return [-b - sq, -b + sq]


def power_profile(s: float) -> AnalyticFunction:
    """``u(y) = (y_+)^s`` on the line."""

    def f(p):
        return np.maximum(p[:, 0], 0.0) ** s

    def br(x, e):
        e0 = float(np.ravel(e)[0])
        r = -float(np.ravel(x)[0]) / e0
        return [r] if r > 0 else []

    def exit_(x, e):
        e0 = float(np.ravel(e)[0])
        return float(np.ravel(x)[0]) if e0 < 0 else np.inf

    return AnalyticFunction(f, 1, br, exit_, name=f"x_+^{s:g}")


def half_space_profile(s: float, dim: int = 2, axis: int = -1) -> AnalyticFunction:
    """``u(y) = (y_axis)_+^s``, the flat boundary profile in R^dim."""
    ax = axis % dim

    def f(p):
        return np.maximum(p[:, ax], 0.0) ** s

    def br(x, e):
        ea = float(np.ravel(e)[ax])
        if ea == 0:
            return []
        r = -float(np.ravel(x)[ax]) / ea
        return [r] if r > 0 else []

    def exit_(x, e):
        ea = float(np.ravel(e)[ax])
        return float(np.ravel(x)[ax]) / -ea if ea < 0 else np.inf

    return AnalyticFunction(f, dim, br, exit_, name=f"half_space^{s:g}")


def distance_power(domain, s: float) -> AnalyticFunction:
    """``d_+^s`` for a ball (any dim) or an interval, zero outside."""
    from .domains import Ball, Interval

    if isinstance(domain, Interval):
        c, R, dim = np.array([0.5 * (domain.a + domain.b)]), domain.inradius, 1
    elif isinstance(domain, Ball):
        c, R, dim = np.array(domain.center), domain.R, domain.dim
    else:
        raise DomainError("distance_power supports balls and intervals")

    def f(p):
        return np.maximum(R - np.linalg.norm(p - c, axis=-1), 0.0) ** s

    def br(x, e):
        x = np.ravel(x).astype(float)
        e = np.ravel(e).astype(float)
        out = _line_ball_roots(x, e, c, R)
        closest = -float((x - c) @ e)
        out.append(closest)
        return out

    def exit_(x, e):
        roots = _line_ball_roots(np.ravel(x).astype(float), np.ravel(e).astype(float), c, R)
        return max(roots) if roots and max(roots) > 0 else 0.0

    return AnalyticFunction(f, dim, br, exit_, name=f"d_+^{s:g}")


def gaussian_bump(center, width: float, amp: float = 1.0) -> AnalyticFunction:
    """``amp * exp(-|y - center|^2 / (2 width^2))`` with its sup norms attached."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    dim = c.size

    def f(p):
        return amp * np.exp(-np.sum((p - c) ** 2, axis=-1) / (2 * width**2))

    sup_grad = abs(amp) / width * np.exp(-0.5)
    # Hessian eigenvalues are amp/w^2 (r^2/w^2 - 1) and -amp/w^2; max modulus at r=0
    sup_hess = abs(amp) / width**2
    return AnalyticFunction(f, dim, norms=(abs(amp), sup_grad, sup_hess), name=f"gauss(w={width:g})")


# ---------------------------------------------------------------------------
# serialization


def save_lattice(u: LatticeFunction, path, extra: dict | None = None) -> tuple:
    """Write ``<path>.json`` (header) and ``<path>.bin`` (float64, C order)."""
    path = Path(path)
    header = u.describe()
    header["values_file"] = path.with_suffix(".bin").name
    header["dtype"] = "<f8"
    if extra:
        header.update(extra)
    path.with_suffix(".json").write_text(json.dumps(header, indent=2, sort_keys=True))
    u.values.astype("<f8").tofile(path.with_suffix(".bin"))
    return path.with_suffix(".json"), path.with_suffix(".bin")


def load_lattice(path) -> LatticeFunction:
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    vals = np.fromfile(path.parent / header["values_file"], dtype=header.get("dtype", "<f8"))
    vals = vals.reshape(header["shape"])
    ext = header["exterior"]
    if ext["kind"] == "zero":
        exterior = Exterior.zero()
    elif ext["kind"] == "bounded":
        exterior = Exterior.bounded(ext["M"])
    else:
        raise ConfigurationError("analytic exteriors cannot be restored from disk")
    return LatticeFunction(vals, tuple(header["lower"]), header["h"], exterior)
