"""Bounded convex domains with a signed distance (positive inside)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

# subcells per axis when estimating cut-cell volume fractions of a ball
_CUT_SUBSAMPLES = 32


def _points(x, dim):
    x = np.asarray(x, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    return x


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ConfigurationError(f"interval needs a < b (got {self.a}, {self.b})")

    dim = 1

    @property
    def bounding_box(self):
        return (self.a,), (self.b,)

    @property
    def inradius(self) -> float:
        return 0.5 * (self.b - self.a)

    def signed_distance(self, x):
        x = _points(x, 1)[..., 0]
        return np.minimum(x - self.a, self.b - x)

    def exit_distance(self, x, direction):
        """Distance from interior ``x`` to the boundary along unit ``direction``."""
        x = _points(x, 1)[..., 0]
        d = np.asarray(direction, dtype=float).reshape(-1)[0]
        return (self.b - x) if d > 0 else (x - self.a)

    def cell_fractions(self, nodes, h):
        x = _points(nodes, 1)[..., 0]
        lo = np.maximum(x - h / 2, self.a)
        hi = np.minimum(x + h / 2, self.b)
        return np.clip(hi - lo, 0.0, None) / h

    def describe(self):
        return {"kind": "interval", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Ball:
    center: tuple
    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise ConfigurationError(f"ball radius must be positive (got {self.R})")
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def bounding_box(self):
        c = np.array(self.center)
        return tuple(c - self.R), tuple(c + self.R)

    @property
    def inradius(self) -> float:
        return self.R

    def signed_distance(self, x):
        x = _points(x, self.dim)
        return self.R - np.linalg.norm(x - np.array(self.center), axis=-1)

    def exit_distance(self, x, direction):
        x = _points(x, self.dim)
        e = np.asarray(direction, dtype=float)
        y = x - np.array(self.center)
        b = np.sum(y * e, axis=-1)
        c = np.sum(y * y, axis=-1) - self.R**2
        return -b + np.sqrt(np.maximum(b * b - c, 0.0))

    def cell_fractions(self, nodes, h):
        x = _points(nodes, self.dim)
        d = self.signed_distance(x)
        half_diag = 0.5 * h * math.sqrt(self.dim)
        frac = np.where(d >= half_diag, 1.0, 0.0)
        cut = np.abs(d) < half_diag
        if cut.any():
            k = _CUT_SUBSAMPLES
            off = (np.arange(k) + 0.5) / k - 0.5
            grids = np.meshgrid(*([off] * self.dim), indexing="ij")
            sub = np.stack([g.ravel() for g in grids], axis=-1) * h
            pts = x[cut][:, None, :] + sub[None, :, :]
            frac[cut] = np.mean(self.signed_distance(pts) > 0, axis=1)
        return frac

    def describe(self):
        return {"kind": "ball", "center": list(self.center), "R": self.R}


@dataclass(frozen=True)
class Rectangle:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or not all(b > a for a, b in zip(lo, hi)):
            raise ConfigurationError(f"degenerate rectangle {lo}..{hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def bounding_box(self):
        return self.lower, self.upper

    @property
    def inradius(self) -> float:
        return 0.5 * min(b - a for a, b in zip(self.lower, self.upper))

    def signed_distance(self, x):
        x = _points(x, self.dim)
        lo, hi = np.array(self.lower), np.array(self.upper)
        inside = np.minimum(x - lo, hi - x).min(axis=-1)
        outside = np.linalg.norm(np.maximum(np.maximum(lo - x, x - hi), 0.0), axis=-1)
        return np.where(inside >= 0, inside, -outside)

    def exit_distance(self, x, direction):
        x = _points(x, self.dim)
        e = np.asarray(direction, dtype=float)
        lo, hi = np.array(self.lower), np.array(self.upper)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(e > 0, (hi - x) / e, np.where(e < 0, (lo - x) / e, np.inf))
        return t.min(axis=-1)

    def cell_fractions(self, nodes, h):
        x = _points(nodes, self.dim)
        frac = np.ones(x.shape[:-1])
        for k in range(self.dim):
            lo = np.maximum(x[..., k] - h / 2, self.lower[k])
            hi = np.minimum(x[..., k] + h / 2, self.upper[k])
            frac = frac * np.clip(hi - lo, 0.0, None) / h
        return frac

    def describe(self):
        return {"kind": "rectangle", "lower": list(self.lower), "upper": list(self.upper)}


def domain_from_config(cfg: dict):
    kind = cfg.get("kind")
    try:
        if kind == "interval":
            return Interval(float(cfg["a"]), float(cfg["b"]))
        if kind == "ball":
            return Ball(tuple(cfg.get("center", [0.0, 0.0])), float(cfg["R"]))
        if kind == "rectangle":
            return Rectangle(tuple(cfg["lower"]), tuple(cfg["upper"]))
    except KeyError as exc:
        raise ConfigurationError(f"domain {kind!r} is missing {exc}") from exc
    raise ConfigurationError(f"unknown domain kind {kind!r}")


def uniform_grid(domain, mesh_n: int):
    """Nodes per axis over the bounding box, boundary nodes included.

    Returns ``(lower, h, shape)``.  All axes share ``h``; box extents must be
    integer multiples of it.
    """
    if mesh_n < 3:
        raise ConfigurationError("mesh_n must be at least 3")
    lo, hi = (np.array(v, dtype=float) for v in domain.bounding_box)
    ext = hi - lo
    h = float(ext.min() / (mesh_n - 1))
    counts = ext / h
    if np.any(np.abs(counts - np.round(counts)) > 1e-9 * counts.max()):
        raise ConfigurationError(f"box extents {ext} are not commensurate with h={h}")
    shape = tuple(int(round(c)) + 1 for c in counts)
    return tuple(lo), h, shape
