"""Rank-one projection towers on sphere charts and their Chern data.

The 2x2 building block is the tautological line-bundle projection

    p(z) = (1+|z|^2)^{-1} [[|z|^2, z], [conj(z), 1]],

equal to the outer product of v(z) = (z, 1)/sqrt(1+|z|^2) and extended to
the compactification point by v(inf) = (1, 0).  Higher towers are tensor
products over n chart coordinates; a ball chart on a target manifold pulls
the tower back to a projection-valued map that is constant off the chart.

Infinity is encoded as a complex ``inf`` entry; every formula here goes
through the homogeneous vectors v(z), which removes the 0 * inf ambiguity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
from scipy import integrate

from .geometry import SpherePoint, sphere_to_stereo_array

__all__ = [
    "chart_vector",
    "tautological_projection",
    "product_projection",
    "BallChart",
    "hemisphere_chart",
    "chart_projection",
    "radial_chart_map",
    "chern_top_density",
    "integrate_chern_density",
    "cyclic_character",
    "QuadratureError",
]

INF = complex(np.inf, 0.0)


class QuadratureError(RuntimeError):
    """Raised when a quadrature rule reports non-convergence."""


def chart_vector(z) -> np.ndarray:
    """Normalized homogeneous vectors v(z), shape (..., 2).

    Finite z gives (z, 1)/sqrt(1+|z|^2); any non-finite entry gives (1, 0).
    """
    z = np.asarray(z, dtype=complex)
    finite = np.isfinite(z.real) & np.isfinite(z.imag)
    zf = np.where(finite, z, 0.0)
    norm = np.sqrt(1.0 + np.abs(zf) ** 2)
    v = np.empty(z.shape + (2,), dtype=complex)
    v[..., 0] = np.where(finite, zf / norm, 1.0)
    v[..., 1] = np.where(finite, 1.0 / norm, 0.0)
    return v


def tautological_projection(z: complex) -> np.ndarray:
    """The 2x2 hermitian rank-one projection at a single chart coordinate."""
    v = chart_vector(z)
    return np.outer(v, v.conj())


def product_projection(zs) -> np.ndarray:
    """Tensor product of tautological projections, first coordinate outermost.

    Parameters
    ----------
    zs : sequence of n complex numbers (inf allowed per coordinate)

    Returns
    -------
    (2^n, 2^n) hermitian rank-one projection.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    mats = [tautological_projection(z) for z in zs]
    return reduce(np.kron, mats)


def batched_product_projection(z: np.ndarray) -> np.ndarray:
    """Vectorized tower: z of shape (..., n) -> projections (..., 2^n, 2^n)."""
    v = chart_vector(z)  # (..., n, 2)
    n = v.shape[-2]
    out = v[..., 0, :, None] * v[..., 0, None, :].conj()
    for j in range(1, n):
        pj = v[..., j, :, None] * v[..., j, None, :].conj()
        out = np.einsum("...ab,...cd->...acbd", out, pj).reshape(
            v.shape[:-2] + (2 ** (j + 1), 2 ** (j + 1))
        )
    return out


@dataclass(frozen=True)
class BallChart:
    """Ball chart U on the target sphere S^{2n}, with its coordinate maps.

    ``nu`` identifies U with the open unit ball of R^{2n} (here: the chart
    ball of the stereographic parametrization, scaled by ``radius``), and the
    radial map v -> v/(1-|v|^2), read as n complex pairs, identifies the
    ball with C^n.  Points outside U are sent to the symbol infinity in
    every complex coordinate.
    """

    n: int
    radius: float = 1.0

    def nu(self, ambient: np.ndarray) -> np.ndarray:
        """Ball coordinates of ambient points (..., 2n+1); rows off U give |nu| >= 1."""
        return sphere_to_stereo_array(np.asarray(ambient, dtype=float)) / self.radius

    def contains(self, ambient: np.ndarray) -> np.ndarray:
        v = self.nu(ambient)
        with np.errstate(invalid="ignore"):
            return np.where(
                np.all(np.isfinite(v), axis=-1), np.sum(v * v, axis=-1) < 1.0, False
            )

    def nu_tilde(self, ambient: np.ndarray) -> np.ndarray:
        """Extended coordinate map to C^n cup {inf}, shape (..., n) complex."""
        return radial_chart_map(self.nu(ambient))


def hemisphere_chart(n: int) -> BallChart:
    """The standard chart: U = open hemisphere around the pole lam(0)."""
    return BallChart(n=n, radius=1.0)


def radial_chart_map(v: np.ndarray) -> np.ndarray:
    """Ball points (..., 2n) -> n complex coordinates via v / (1 - |v|^2).

    Points with |v| >= 1 (including non-finite rows) map to inf in every
    coordinate, matching the one-point extension of the chart.
    """
    v = np.asarray(v, dtype=float)
    r2 = np.sum(v * v, axis=-1, keepdims=True)
    inside = np.isfinite(r2) & (r2 < 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(inside, v / (1.0 - r2), np.inf)
    z = scaled[..., 0::2] + 1j * scaled[..., 1::2]
    return np.where(inside, z, INF)


def chart_projection(x: SpherePoint | np.ndarray, chart: BallChart) -> np.ndarray:
    """Projection tower pulled back through the chart: constant off U."""
    ambient = x.array() if isinstance(x, SpherePoint) else np.asarray(x, dtype=float)
    z = chart.nu_tilde(ambient)
    return product_projection(z)


def chern_top_density(z) -> np.ndarray:
    """Top Chern density of the projection tower w.r.t. Lebesgue measure on C^n.

    Equals pi^{-n} prod_j (1+|z_j|^2)^{-2}; zero at any infinite coordinate.
    """
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z[None]
    finite = np.all(np.isfinite(z.real) & np.isfinite(z.imag), axis=-1)
    zf = np.where(np.isfinite(z.real) & np.isfinite(z.imag), z, 0.0)
    n = z.shape[-1]
    dens = np.prod((1.0 + np.abs(zf) ** 2) ** -2.0, axis=-1) / math.pi**n
    return np.where(finite, dens, 0.0)


def integrate_chern_density(
    n: int,
    samples: int = 10**6,
    seed: int = 0,
    radius: float | None = None,
) -> tuple[float, float]:
    """Integrate the top Chern density over C^n; the exact value is 1.

    n = 1 uses adaptive radial quadrature (stderr returned as the quadrature
    error estimate); n >= 2 uses Monte Carlo with a product-Cauchy proposal.
    ``radius`` restricts the n = 1 integral to |z| < radius.

    Returns
    -------
    (value, error) : the estimate and its error scale (quadrature estimate
    for n = 1, one standard error for n >= 2).

    Raises
    ------
    QuadratureError if the adaptive rule signals non-convergence.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        upper = math.inf if radius is None else float(radius)
        val, err, info = integrate.quad(
            lambda r: 2.0 * r / (1.0 + r * r) ** 2, 0.0, upper, limit=200, full_output=True
        )[:3]
        if err > 1e-6:
            raise QuadratureError(f"radial quadrature did not converge: err={err}")
        return float(val), float(err)
    if radius is not None:
        raise ValueError("radius restriction implemented for n = 1 only")

    rng = np.random.Generator(np.random.Philox(seed))
    dim = 2 * n
    x = rng.standard_cauchy((samples, dim))
    # product-Cauchy proposal density
    q = np.prod(1.0 / (math.pi * (1.0 + x * x)), axis=-1)
    z = x[:, 0::2] + 1j * x[:, 1::2]
    w = chern_top_density(z) / q
    value = float(np.mean(w))
    stderr = float(np.std(w, ddof=1) / math.sqrt(samples))
    return value, stderr


def cyclic_character(points: Sequence, k: int) -> complex:
    """Normalized cyclic trace of a (2k+1)-fold product of projection towers.

    Parameters
    ----------
    points : 2k+1 coordinate tuples, each of n complex entries (inf allowed)
    k : the cyclic order; the value is (k!)^{-1} tr(prod_l p(z_l)) with the
        product indexed cyclically (z_{2k+1} = z_0).

    The trace is evaluated through chains of inner products of the
    homogeneous vectors, never through the rational coordinate expression,
    so coordinate infinities are exact.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    if pts.shape[0] != 2 * k + 1:
        raise ValueError(f"need 2k+1 = {2*k+1} points, got {pts.shape[0]}")
    v = chart_vector(pts)  # (2k+1, n, 2)
    nxt = np.roll(v, -1, axis=0)
    inner = np.sum(v.conj() * nxt, axis=-1)  # (2k+1, n)
    return complex(np.prod(inner) / math.factorial(k))
