"""Mollifier kernels: construction, validation, Dirac scaling, self-convolution.

A kernel is a nonnegative, unit-mass, zero-first-moment profile with finite
second moment.  All shipped shapes are radial (in one dimension: even) and,
with the exception of the exponential attraction profile, compactly
supported.  Moment data is computed by composite midpoint quadrature with
one Richardson refinement; the radial second moment uses the unit-ball
volumes omega_1 = 2 and omega_2 = pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import KernelError

# Unit-ball volumes for the supported dimensions.
OMEGA = {1: 2.0, 2: math.pi}

SHAPES = ("box", "tent", "epanechnikov", "truncated-gaussian",
          "exponential-attraction")

DEFAULT_TOL = 1e-6

# Quadrature resolution: full-support midpoint points (1-D) and radial points.
_N_FULL = 8192
_N_RADIAL = 4096
# Tabulation resolution for self-convolved kernels.
_N_TAB_1D = 8192
_N_TAB_2D = 1024


@dataclass(frozen=True)
class Kernel:
    """A (possibly scaled or tabulated) convolution kernel.

    ``radial_profile`` evaluates phi_tilde(r) for r >= 0; the full profile is
    phi(y) = phi_tilde(|y|).  Tabulated kernels (products of
    :func:`self_convolve`) carry their sample table so that moment
    computations can use exact rectangle sums, and keep a ``parent`` link so
    that grid convolution can build their discrete weights as an exact
    discrete self-convolution of the parent weights.
    """

    shape: str
    dim: int
    support_radius: float
    radial_profile: Callable[[np.ndarray], np.ndarray]
    is_radial: bool = True
    is_mollifier: bool = True
    table: Optional[tuple] = field(default=None, repr=False)
    parent: Optional["Kernel"] = field(default=None, repr=False)

    def profile(self, y):
        """Evaluate phi(y).  1-D: array of points; 2-D: (..., 2) array."""
        y = np.asarray(y, dtype=float)
        if self.dim == 1:
            r = np.abs(y)
        else:
            r = np.sqrt(np.sum(y * y, axis=-1))
        return self.radial_profile(r)

    def spec_string(self):
        return f"{self.shape}:{self.dim}:{self.support_radius:g}"


@dataclass(frozen=True)
class MomentReport:
    """Moment data and per-assumption residuals for a kernel."""

    mass: float
    first_moment: np.ndarray
    second_moment_matrix: np.ndarray
    radial_moment: Optional[float]
    residuals: dict
    passed: dict
    tol: float

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def as_text(self) -> str:
        """Flat ``name = value`` block for CLI output."""
        lines = [f"mass = {self.mass:.17g}"]
        for i, m in enumerate(np.atleast_1d(self.first_moment)):
            lines.append(f"first_moment_{i} = {m:.17g}")
        A = np.atleast_2d(self.second_moment_matrix)
        for i in range(A.shape[0]):
            for j in range(A.shape[1]):
                lines.append(f"A_{i}{j} = {A[i, j]:.17g}")
        if self.radial_moment is not None:
            lines.append(f"a = {self.radial_moment:.17g}")
        for name, r in sorted(self.residuals.items()):
            lines.append(f"residual_{name} = {r:.17g}")
        for name, p in sorted(self.passed.items()):
            lines.append(f"pass_{name} = {int(p)}")
        lines.append(f"tol = {self.tol:.17g}")
        return "\n".join(lines) + "\n"


def make_kernel(shape: str, dim: int, support_radius: float) -> Kernel:
    """Construct a kernel from the shipped catalog.

    box: constant on the ball, unit mass.
    tent: hat function (1-D only).
    epanechnikov: quadratic cap.
    truncated-gaussian: Gaussian with sigma = R/3 restricted to the ball
        and renormalized.
    exponential-attraction: (1/2) e^{-r}; not a mollifier (no compact
        support); ``support_radius`` is its truncation radius.
    """
    if shape not in SHAPES:
        raise KernelError(f"unknown kernel shape {shape!r}; known: {SHAPES}")
    if dim not in (1, 2):
        raise KernelError(f"dim must be 1 or 2, got {dim}")
    if not (support_radius > 0):
        raise KernelError(f"support_radius must be positive, got {support_radius}")
    R = float(support_radius)

    if shape == "box":
        height = 1.0 / (2.0 * R) if dim == 1 else 1.0 / (math.pi * R * R)

        def prof(r, R=R, h=height):
            return np.where(r <= R, h, 0.0)

    elif shape == "tent":
        if dim != 1:
            raise KernelError("tent kernel is 1-D only")

        def prof(r, R=R):
            return np.maximum(0.0, 1.0 - r / R) / R

    elif shape == "epanechnikov":
        c = 3.0 / (4.0 * R) if dim == 1 else 2.0 / (math.pi * R * R)

        def prof(r, R=R, c=c):
            return np.where(r <= R, c * np.maximum(0.0, 1.0 - (r / R) ** 2), 0.0)

    elif shape == "truncated-gaussian":
        sigma = R / 3.0
        if dim == 1:
            z = sigma * math.sqrt(2.0 * math.pi) * math.erf(3.0 / math.sqrt(2.0))
        else:
            z = 2.0 * math.pi * sigma * sigma * (1.0 - math.exp(-4.5))

        def prof(r, R=R, s=sigma, z=z):
            return np.where(r <= R, np.exp(-0.5 * (r / s) ** 2) / z, 0.0)

    else:  # exponential-attraction
        if dim != 1:
            raise KernelError("exponential-attraction kernel is 1-D only")

        def prof(r, R=R):
            return np.where(r <= R, 0.5 * np.exp(-r), 0.0)

        return Kernel(shape=shape, dim=1, support_radius=R,
                      radial_profile=prof, is_radial=True, is_mollifier=False)

    return Kernel(shape=shape, dim=dim, support_radius=R, radial_profile=prof)


def _midpoints(a: float, b: float, n: int) -> np.ndarray:
    h = (b - a) / n
    return a + h * (np.arange(n) + 0.5)


def _midpoint_richardson(f: Callable[[np.ndarray], np.ndarray],
                         a: float, b: float, n: int) -> float:
    """Composite midpoint with one Richardson refinement (error O(h^4))."""
    h1 = (b - a) / n
    i1 = float(np.sum(f(_midpoints(a, b, n)))) * h1
    h2 = h1 / 2.0
    i2 = float(np.sum(f(_midpoints(a, b, 2 * n)))) * h2
    return (4.0 * i2 - i1) / 3.0


def _moments_1d(kernel: Kernel):
    R = kernel.support_radius
    p = kernel.radial_profile
    mass = _midpoint_richardson(lambda x: p(np.abs(x)), -R, R, _N_FULL)
    m1 = _midpoint_richardson(lambda x: x * p(np.abs(x)), -R, R, _N_FULL)
    m2 = _midpoint_richardson(lambda x: x * x * p(np.abs(x)), -R, R, _N_FULL)
    min_val = float(np.min(p(np.abs(_midpoints(-R, R, _N_FULL)))))
    return mass, np.array([m1]), np.array([[m2]]), min_val


def _moments_2d_radial(kernel: Kernel):
    """Moments of a radial 2-D kernel.

    Radial direction: composite midpoint + Richardson.  Angular direction:
    composite trapezoid on [0, 2pi] (exact to rounding for trigonometric
    polynomials), which makes the off-diagonal entries of the second-moment
    matrix a genuine numerical check of the sphere moment identity.
    """
    R = kernel.support_radius
    p = kernel.radial_profile
    ntheta = 2048
    theta = 2.0 * math.pi * np.arange(ntheta) / ntheta
    c, s = np.cos(theta), np.sin(theta)
    dtheta = 2.0 * math.pi / ntheta
    ang1 = np.array([np.sum(c), np.sum(s)]) * dtheta
    ang2 = np.array([[np.sum(c * c), np.sum(c * s)],
                     [np.sum(s * c), np.sum(s * s)]]) * dtheta

    mass = _midpoint_richardson(lambda r: 2.0 * math.pi * r * p(r), 0.0, R, _N_RADIAL)
    i_r2 = _midpoint_richardson(lambda r: r * r * p(r), 0.0, R, _N_RADIAL)
    i_r3 = _midpoint_richardson(lambda r: r ** 3 * p(r), 0.0, R, _N_RADIAL)
    first = ang1 * i_r2
    second = ang2 * i_r3
    min_val = float(np.min(p(_midpoints(0.0, R, _N_RADIAL))))
    return mass, first, second, min_val


def _radial_moment(kernel: Kernel) -> float:
    """a(phi) = omega_n * integral r^{n+1} phi_tilde(r) dr over the support."""
    n = kernel.dim
    R = kernel.support_radius
    p = kernel.radial_profile
    return OMEGA[n] * _midpoint_richardson(
        lambda r: r ** (n + 1) * p(r), 0.0, R, _N_RADIAL)


def _moments_from_table(kernel: Kernel):
    kind = kernel.table[0]
    if kind == "1d":
        _, xs, vs, step = kernel.table
        mass = float(np.sum(vs)) * step
        m1 = float(np.sum(xs * vs)) * step
        m2 = float(np.sum(xs * xs * vs)) * step
        return mass, np.array([m1]), np.array([[m2]]), float(np.min(vs))
    _, x0, step, vals = kernel.table  # "2d"
    n = vals.shape[0]
    coords = x0 + step * np.arange(n)
    w = step * step
    mass = float(np.sum(vals)) * w
    mx = float(np.sum(vals * coords[:, None])) * w
    my = float(np.sum(vals * coords[None, :])) * w
    axx = float(np.sum(vals * (coords[:, None] ** 2))) * w
    ayy = float(np.sum(vals * (coords[None, :] ** 2))) * w
    axy = float(np.sum(vals * coords[:, None] * coords[None, :])) * w
    return (mass, np.array([mx, my]),
            np.array([[axx, axy], [axy, ayy]]), float(np.min(vals)))


def validate(kernel: Kernel, tol: float = DEFAULT_TOL) -> MomentReport:
    """Compute moment data and flag each mollifier assumption against tol."""
    if not (tol > 0):
        raise KernelError(f"tol must be positive, got {tol}")

    if kernel.table is not None:
        mass, first, second, min_val = _moments_from_table(kernel)
    elif kernel.dim == 1:
        mass, first, second, min_val = _moments_1d(kernel)
    elif kernel.is_radial:
        mass, first, second, min_val = _moments_2d_radial(kernel)
    else:
        raise KernelError("non-radial 2-D kernels are unsupported")

    if not (np.isfinite(mass) and np.all(np.isfinite(second))):
        raise KernelError("non-integrable profile: quadrature did not converge")

    radial = None
    radial_res = np.nan
    if kernel.is_radial:
        radial = _radial_moment(kernel)
        radial_res = float(np.max(np.abs(
            second - radial * np.eye(kernel.dim))))

    residuals = {
        "positivity": max(0.0, -min_val),
        "unit_mass": abs(mass - 1.0),
        "zero_first_moment": float(np.max(np.abs(first))),
        "finite_second_moment": 0.0 if np.all(np.isfinite(second)) else np.inf,
    }
    if kernel.is_radial:
        residuals["radial_consistency"] = radial_res
    passed = {name: bool(r <= tol) for name, r in residuals.items()}
    return MomentReport(mass=mass, first_moment=first,
                        second_moment_matrix=second, radial_moment=radial,
                        residuals=residuals, passed=passed, tol=tol)


def scale(kernel: Kernel, eps: float) -> Kernel:
    """Dirac scaling: phi_eps(x) = eps^{-n} phi(x/eps)."""
    if not (eps > 0):
        raise KernelError(f"eps must be positive, got {eps}")
    if eps == 1.0:
        return kernel
    n = kernel.dim
    base = kernel.radial_profile
    fac = eps ** (-n)

    def prof(r, base=base, eps=eps, fac=fac):
        return fac * base(np.asarray(r) / eps)

    table = None
    if kernel.table is not None:
        if kernel.table[0] == "1d":
            _, xs, vs, step = kernel.table
            table = ("1d", xs * eps, vs * fac, step * eps)
        else:
            _, x0, step, vals = kernel.table
            table = ("2d", x0 * eps, step * eps, vals * fac)
    parent = scale(kernel.parent, eps) if kernel.parent is not None else None
    return replace(kernel, support_radius=kernel.support_radius * eps,
                   radial_profile=prof, table=table, parent=parent)


def _tabulate_1d(kernel: Kernel, n: int) -> tuple:
    R = kernel.support_radius
    step = 2.0 * R / n
    xs = _midpoints(-R, R, n)
    vs = kernel.radial_profile(np.abs(xs))
    return xs, vs, step


def self_convolve(kernel: Kernel) -> Kernel:
    """gamma = phi * phi, tabulated; support radius doubled.

    The table is the exact discrete self-convolution of a midpoint sampling
    of phi, so discrete moments are exactly additive: unit mass, zero first
    moment, and a doubled second-moment matrix carry over to rounding error.
    """
    if not kernel.is_mollifier:
        raise KernelError("self_convolve requires a compactly supported kernel")
    if kernel.dim == 2 and not kernel.is_radial:
        raise KernelError("self_convolve: 2-D non-radial profiles unsupported")

    R = kernel.support_radius
    if kernel.dim == 1:
        xs, vs, step = _tabulate_1d(kernel, _N_TAB_1D)
        gv = np.convolve(vs, vs) * step
        gx = xs[0] + xs[0] + step * np.arange(gv.size)
        table = ("1d", gx, gv, step)

        def prof(r, gx=gx, gv=gv):
            return np.interp(np.abs(np.asarray(r, dtype=float)), gx, gv,
                             left=0.0, right=0.0)

    else:
        from scipy.signal import fftconvolve
        n = _N_TAB_2D
        step = 2.0 * R / n
        xs = _midpoints(-R, R, n)
        grid_r = np.sqrt(xs[:, None] ** 2 + xs[None, :] ** 2)
        vs = kernel.radial_profile(grid_r)
        gvals = fftconvolve(vs, vs) * step * step
        np.maximum(gvals, 0.0, out=gvals)  # clip FFT rounding noise
        x0 = 2.0 * xs[0]
        table = ("2d", x0, step, gvals)
        m = gvals.shape[0]
        # gamma is radial; evaluate along the positive x-axis through center
        ray_x = x0 + step * np.arange(m)
        center = (m - 1) // 2
        ray = gvals[center, :]

        def prof(r, ray_x=ray_x, ray=ray):
            return np.interp(np.abs(np.asarray(r, dtype=float)), ray_x, ray,
                             left=0.0, right=0.0)

    return Kernel(shape=f"selfconv({kernel.shape})", dim=kernel.dim,
                  support_radius=2.0 * R, radial_profile=prof,
                  is_radial=kernel.is_radial, table=table, parent=kernel)
