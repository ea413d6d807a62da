"""Stereographic charts, conformal volume factors, and uniform sampling on S^{2n}.

The sphere S^{2n} is parametrized by the chart map

    lam(x) = ((|x|^2 - 1)/(|x|^2 + 1), 2x/(|x|^2 + 1)),   x in R^{2n},

which sends 0 to the pole (-1, 0, ..., 0) and the point at infinity to
(1, 0, ..., 0).  The chart carries the pull-back round metric, whose volume
density against Lebesgue measure is (2/(1+|x|^2))^{2n}.

``ChartPoint`` keeps the compactification point as an explicit symbol; the
``*_array`` functions are the vectorized fast paths used by the integrators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChartPoint",
    "SpherePoint",
    "stereo_to_sphere",
    "sphere_to_stereo",
    "conformal_volume_factor",
    "sample_sphere",
    "stereo_to_sphere_array",
    "sphere_to_stereo_array",
    "conformal_factor_array",
    "sample_sphere_array",
]

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class ChartPoint:
    """A point of the chart R^{2n}, or the distinguished symbol infinity.

    ``coords`` is a tuple of floats for finite points and None for the
    compactification point; the two cases are mutually exclusive.
    """

    coords: tuple[float, ...] | None

    @classmethod
    def of(cls, xs) -> "ChartPoint":
        return cls(tuple(float(v) for v in np.asarray(xs, dtype=float).ravel()))

    @classmethod
    def infinity(cls) -> "ChartPoint":
        return cls(None)

    @property
    def is_infinity(self) -> bool:
        return self.coords is None

    def array(self) -> np.ndarray:
        if self.coords is None:
            raise ValueError("the point at infinity has no coordinate array")
        return np.asarray(self.coords, dtype=float)


@dataclass(frozen=True)
class SpherePoint:
    """Point on S^{2n} given by its unit ambient vector in R^{2n+1}."""

    ambient: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.ambient, dtype=float)
        if abs(np.dot(v, v) - 1.0) > 1e-10:
            raise ValueError(f"ambient vector is not unit length: |v|^2 = {np.dot(v, v)!r}")

    @classmethod
    def of(cls, xs) -> "SpherePoint":
        return cls(tuple(float(v) for v in np.asarray(xs, dtype=float).ravel()))

    def array(self) -> np.ndarray:
        return np.asarray(self.ambient, dtype=float)


def stereo_to_sphere_array(x: np.ndarray) -> np.ndarray:
    """Chart points (..., 2n) -> ambient unit vectors (..., 2n+1)."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    denom = r2 + 1.0
    first = (r2 - 1.0) / denom
    rest = 2.0 * x / denom
    return np.concatenate([first, rest], axis=-1)


def sphere_to_stereo_array(p: np.ndarray) -> np.ndarray:
    """Ambient unit vectors (..., 2n+1) -> chart coordinates (..., 2n).

    The pole (1, 0, ..., 0) has no finite chart image; rows at distance
    < 1e-15 from it produce inf coordinates.
    """
    p = np.asarray(p, dtype=float)
    denom = 1.0 - p[..., :1]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = p[..., 1:] / denom
    return out


def conformal_factor_array(x: np.ndarray, n: int) -> np.ndarray:
    """Round-metric volume density (2/(1+|x|^2))^{2n} at chart points (..., 2n)."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    return (2.0 / (1.0 + r2)) ** (2 * n)


def stereo_to_sphere(x: ChartPoint, n: int) -> SpherePoint:
    """Map a chart point to the sphere; infinity goes to (1, 0, ..., 0)."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if x.is_infinity:
        v = np.zeros(2 * n + 1)
        v[0] = 1.0
        return SpherePoint.of(v)
    xs = x.array()
    if xs.shape != (2 * n,):
        raise ValueError(f"chart point has dimension {xs.shape}, expected ({2*n},)")
    return SpherePoint.of(stereo_to_sphere_array(xs))


def sphere_to_stereo(p: SpherePoint, n: int) -> ChartPoint:
    v = p.array()
    if v.shape != (2 * n + 1,):
        raise ValueError("ambient dimension mismatch")
    if 1.0 - v[0] < 1e-15:
        return ChartPoint.infinity()
    return ChartPoint.of(v[1:] / (1.0 - v[0]))


def conformal_volume_factor(x: ChartPoint, n: int) -> float:
    """Volume density of the pull-back metric at a finite chart point."""
    if x.is_infinity:
        raise ValueError("conformal volume factor is undefined at infinity")
    xs = x.array()
    if xs.shape != (2 * n,):
        raise ValueError(f"chart point has dimension {xs.shape}, expected ({2*n},)")
    return float(conformal_factor_array(xs, n))


def sample_sphere_array(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """Draw ``size`` chart points distributed uniformly w.r.t. sphere measure.

    Normalized Gaussian vectors give the uniform ambient law; the result is
    returned in chart coordinates via the inverse chart map.  Rows that land
    exactly on the chartless pole (probability zero) are kept as produced.
    """
    g = rng.standard_normal((size, 2 * n + 1))
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    return sphere_to_stereo_array(g)


def sample_sphere(rng: np.random.Generator, n: int) -> ChartPoint:
    x = sample_sphere_array(rng, n, 1)[0]
    if not np.all(np.isfinite(x)):
        return ChartPoint.infinity()
    return ChartPoint.of(x)
