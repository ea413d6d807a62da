"""Normalization constants for the singular and harmonic kernels on S^{2n}.

Two constants enter the kernel formulas:

* ``c_singular`` scales the Riesz-type kernel so that the induced operator
  on flat 2n-space squares to the identity (equivalently, so that its
  Fourier multiplier is a unit vector field).
* ``c_harmonic`` L^2-normalizes the weight ``(1+|x|^2)^{-n}`` against
  Lebesgue measure, which makes the rank-two harmonic kernel idempotent
  under composition.

Both have closed forms; ``calibrate_*`` recomputes them by quadrature so the
stored values carry an independent numerical provenance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

from scipy import integrate, special

__all__ = [
    "KernelConstants",
    "sphere_volume",
    "riesz_normalization",
    "singular_kernel_constant",
    "harmonic_kernel_constant",
    "calibrate_singular_constant",
    "calibrate_harmonic_constant",
]


def sphere_volume(dim: int) -> float:
    """Riemannian volume of the unit sphere S^dim embedded in R^{dim+1}."""
    if dim < 0:
        raise ValueError("dimension must be nonnegative")
    return 2.0 * math.pi ** ((dim + 1) / 2.0) / special.gamma((dim + 1) / 2.0)


def riesz_normalization(n: int) -> float:
    """Constant r_n with multiplier(-i xi_j/|xi|) <-> r_n (x_j-y_j)/|x-y|^{2n+1} on R^{2n}."""
    return special.gamma(n + 0.5) / math.pi ** (n + 0.5)


def singular_kernel_constant(n: int) -> float:
    """Scale for the antisymmetric kernel ((x-y)^ - (x-y)_) / (sqrt2 |x-y|^{2n+1}).

    The sqrt(2) cancels the one in the kernel denominator, leaving the plain
    Riesz normalization on each component; with this choice the kernel
    operator is an involution on flat L^2 forms.
    """
    return math.sqrt(2.0) * riesz_normalization(n)


def harmonic_kernel_constant(n: int) -> float:
    """Scale making g(x) = c (1+|x|^2)^{-n} a unit vector in L^2(R^{2n})."""
    return 2.0**n / math.sqrt(sphere_volume(2 * n))


@dataclass(frozen=True)
class KernelConstants:
    """Kernel normalizations for one sphere dimension, with provenance."""

    n: int
    c_singular: float
    c_harmonic: float
    provenance: str = "analytic"

    @classmethod
    def analytic(cls, n: int) -> "KernelConstants":
        return cls(
            n=n,
            c_singular=singular_kernel_constant(n),
            c_harmonic=harmonic_kernel_constant(n),
            provenance="analytic",
        )

    @classmethod
    def calibrated(cls, n: int) -> "KernelConstants":
        """Recompute both constants by quadrature instead of closed forms."""
        c1, _ = calibrate_singular_constant(n)
        c3, _ = calibrate_harmonic_constant(n)
        return cls(n=n, c_singular=c1, c_harmonic=c3, provenance="calibrated")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "KernelConstants":
        return cls(**json.loads(text))


def _angular_moment(a: float, n: int) -> float:
    """Integral of w_1 exp(a w_1) over the unit sphere S^{2n-1} in R^{2n}."""
    if n == 1:
        # circle case has a Bessel closed form
        return 2.0 * math.pi * math.exp(-abs(a)) * special.i1e(abs(a)) * math.copysign(1.0, a)
    area_lower = sphere_volume(2 * n - 2)

    def f(phi):
        return math.cos(phi) * math.exp(a * math.cos(phi)) * math.sin(phi) ** (2 * n - 2)

    val, _ = integrate.quad(f, 0.0, math.pi, limit=200)
    return area_lower * val


def calibrate_singular_constant(n: int = 1, s_max: float = 8.0) -> tuple[float, dict]:
    """Fix the Riesz normalization by applying the raw kernel to a Gaussian.

    The unnormalized vector kernel T_j with kernel (x_j-y_j)/|x-y|^{2n+1}
    satisfies sum_j (c T_j)^2 = -1 exactly when c is the Riesz normalization.
    Applying T_1 to u(y) = exp(-|y|^2/2) and comparing L^2 masses recovers c
    without any Fourier transform.  Returns (sqrt(2)*c, details).
    """
    two_n = 2 * n

    def psi(s: float) -> float:
        # radial profile of T_1 u along the x_1 axis, via polar quadrature
        def radial(r: float) -> float:
            if r == 0.0:
                return 0.0
            return math.exp(-(s * s + r * r) / 2.0) * _angular_moment(s * r, n) / r

        val, _ = integrate.quad(radial, 0.0, s_max + 10.0, limit=400)
        return val

    def norm_integrand(s: float) -> float:
        return psi(s) ** 2 * s ** (two_n - 1)

    radial_mass, _ = integrate.quad(norm_integrand, 1e-8, s_max, limit=200)
    # |T_1 u|^2 = (area(S^{2n-1})/2n) * radial_mass by symmetry of the profile
    t1_sq = sphere_volume(two_n - 1) / two_n * radial_mass
    u_sq = math.pi**n
    c_riesz = math.sqrt(u_sq / (two_n * t1_sq))
    details = {
        "method": "gaussian polar quadrature, involution matching",
        "analytic": riesz_normalization(n),
        "numeric": c_riesz,
    }
    return math.sqrt(2.0) * c_riesz, details


def calibrate_harmonic_constant(n: int = 1) -> tuple[float, dict]:
    """Fix the harmonic weight scale by L^2 normalization under quadrature."""
    two_n = 2 * n

    def integrand(r: float) -> float:
        return r ** (two_n - 1) * (1.0 + r * r) ** (-2 * n)

    val, _ = integrate.quad(integrand, 0.0, math.inf, limit=200)
    mass = sphere_volume(two_n - 1) * val
    c = 1.0 / math.sqrt(mass)
    details = {
        "method": "radial quadrature of (1+r^2)^{-2n}",
        "analytic": harmonic_kernel_constant(n),
        "numeric": c,
    }
    return c, details
