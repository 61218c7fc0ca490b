"""The Jensen-gap functional, its second-order limit, and the decay classifier.

gap(u, f, kernel, eps) evaluates the integral of f(u) - f(u * phi_eps).
For W^{1,2} functions this decays like eps^2 with limit
(1/2) int f''(u) grad(u) . A(phi) grad(u); an eps-ladder fit of the decay
exponent therefore classifies square-integrable-gradient membership.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import GridError, NumericsError, SizeCapError
from .fields import GridFunction, convolve, gradient, kernel_weights, l2_norm_sq
from .integrands import Integrand
from .kernels import Kernel, validate

ORACLE_SIZE_CAP = 4096


@dataclass(frozen=True)
class Thresholds:
    """Classifier thresholds; defaults give known-W12 corpus a 2x margin."""

    exp_w12: float = 1.9
    exp_sub: float = 1.8
    r2_min: float = 0.99


@dataclass(frozen=True)
class DecayFit:
    """An eps-ladder of gap values with its log-log fit."""

    ladder: tuple                      # ((eps, T), ...) eps strictly decreasing
    exponent: Optional[float]
    prefactor: Optional[float]
    r_squared: Optional[float]
    limit_estimate: Optional[float]    # Richardson extrapolation of T/eps^2
    dropped: tuple = ()
    flat: bool = False                 # all gaps at rounding level
    kernel_radial_moment: Optional[float] = None


@dataclass(frozen=True)
class Verdict:
    label: str                         # W12-consistent | sub-W12 | inconclusive
    exponent: Optional[float]
    r_squared: Optional[float]
    limit_estimate: Optional[float]
    dirichlet_bound: Optional[float]   # 2 * Lambda / (c1 * a(phi))


def gap(u: GridFunction, f: Integrand, kernel: Kernel, eps: float) -> float:
    """T^eps_f(u): rectangle-sum integral of f(u) - f(u_eps)."""
    ue = convolve(u, kernel, eps)
    diff = f.f(u.values) - f.f(ue.values)
    return float(np.sum(diff)) * u.spacing ** u.dim


def limit_functional(u: GridFunction, f: Integrand, kernel: Kernel) -> float:
    """Second-order limit of gap/eps^2 for W^{1,2} inputs.

    General form uses the kernel's second-moment matrix; for radial kernels
    the scalar radial-moment form is used and both must agree to 1e-8
    relative.
    """
    report = validate(kernel)
    A = np.atleast_2d(report.second_moment_matrix)
    comps = [g.values for g in gradient(u)]
    fpp = f.f2(u.values)
    quad = np.zeros_like(u.values)
    for i in range(u.dim):
        for j in range(u.dim):
            quad += A[i, j] * comps[i] * comps[j]
    general = 0.5 * float(np.sum(fpp * quad)) * u.spacing ** u.dim
    if not kernel.is_radial or report.radial_moment is None:
        return general
    grad_sq = sum(c * c for c in comps)
    radial = 0.5 * report.radial_moment * float(np.sum(fpp * grad_sq)) \
        * u.spacing ** u.dim
    scale = max(abs(general), abs(radial), 1e-300)
    if abs(general - radial) > 1e-8 * scale:
        raise NumericsError(
            f"radial/general limit forms disagree: {radial} vs {general}")
    return radial


def quadratic_gap_forms(u: GridFunction, kernel: Kernel, eps: float,
                        size_cap: int = ORACLE_SIZE_CAP):
    """Both discrete forms of the f(v)=v^2 gap through gamma = phi*phi.

    Returns (double_sum, inner_product) where double_sum is the brute-force
    pair sum (1/2) sum_ij (u_i - u_j)^2 gamma_{i-j} dx^2 and inner_product is
    int u^2 - int (u * gamma_eps) u with the same discrete gamma weights.
    """
    if u.dim != 1:
        raise GridError("quadratic gap oracle is 1-D only")
    n = u.values.size
    if n > size_cap:
        raise SizeCapError(f"grid of {n} cells exceeds oracle cap {size_cap}")
    radius = 2.0 * eps * kernel.support_radius
    if radius > u.padding_radius + 1e-12:
        raise GridError("gamma radius exceeds padding")
    w = kernel_weights(kernel, eps, u.spacing)
    g = np.convolve(w, w) * u.spacing
    half = (g.size - 1) // 2
    dx = u.spacing
    vals = u.values

    ds = 0.0
    for k in range(-half, half + 1):
        gk = g[k + half]
        if gk == 0.0:
            continue
        shifted = np.zeros_like(vals)
        if k >= 0:
            shifted[k:] = vals[:n - k]
        else:
            shifted[:n + k] = vals[-k:]
        ds += gk * float(np.sum((vals - shifted) ** 2))
    ds *= 0.5 * dx * dx

    conv = np.convolve(vals, g, mode="same") * dx
    ip = float(np.sum(vals * vals)) * dx - float(np.sum(vals * conv)) * dx
    return ds, ip


def quadratic_gap_oracle(u: GridFunction, kernel: Kernel, eps: float,
                         size_cap: int = ORACLE_SIZE_CAP) -> float:
    """Brute-force double-sum gap; asserts the discrete quadratic identity."""
    ds, ip = quadratic_gap_forms(u, kernel, eps, size_cap=size_cap)
    scale = max(1.0, l2_norm_sq(u))
    if abs(ds - ip) > 1e-12 * scale:
        raise NumericsError(
            f"quadratic identity violated: double-sum {ds} vs inner {ip}")
    return ds


def fit_loglog(pairs: Sequence[tuple], flat_scale: float = 1.0) -> DecayFit:
    """Least-squares log-log fit of an (eps, T) ladder.

    Drops the largest rung when it degrades r^2 by more than 0.005
    (pre-asymptotic transient); an all-rounding-level ladder is marked flat.
    """
    pairs = tuple((float(e), float(t)) for e, t in pairs)
    eps = np.array([p[0] for p in pairs])
    ts = np.array([p[1] for p in pairs])
    if np.any(~np.isfinite(ts)):
        raise NumericsError("non-finite gap value in ladder")
    if np.any(np.diff(eps) >= 0):
        raise GridError("ladder eps values must be strictly decreasing")

    if np.max(np.abs(ts)) <= 1e-12 * max(1.0, flat_scale):
        return DecayFit(ladder=pairs, exponent=None, prefactor=None,
                        r_squared=None, limit_estimate=0.0, flat=True)
    if np.any(ts <= 0):
        return DecayFit(ladder=pairs, exponent=None, prefactor=None,
                        r_squared=None, limit_estimate=None)

    def _fit(e, t):
        x, y = np.log(e), np.log(t)
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
        return slope, float(np.exp(intercept)), r2

    slope, pref, r2 = _fit(eps, ts)
    dropped = ()
    if eps.size >= 5:
        slope2, pref2, r2_2 = _fit(eps[1:], ts[1:])
        if r2_2 - r2 > 0.005:
            slope, pref, r2 = slope2, pref2, r2_2
            dropped = (pairs[0],)

    limit = None
    if 1.9 <= slope <= 2.1:
        e1, t1 = pairs[-2]
        e2, t2 = pairs[-1]
        rho = e1 / e2
        q1, q2 = t1 / e1 ** 2, t2 / e2 ** 2
        limit = (rho * rho * q2 - q1) / (rho * rho - 1.0)
    return DecayFit(ladder=pairs, exponent=float(slope), prefactor=pref,
                    r_squared=r2, limit_estimate=limit, dropped=dropped)


def decay_ladder(u: GridFunction, f: Integrand, kernel: Kernel,
                 eps_list: Sequence[float]) -> DecayFit:
    """Evaluate the gap along a geometric eps-ladder and fit its decay."""
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 4:
        raise GridError("ladder needs at least 4 rungs")
    ratios = [eps_list[i] / eps_list[i + 1] for i in range(len(eps_list) - 1)]
    if max(ratios) - min(ratios) > 1e-9 * max(ratios):
        raise GridError("ladder eps values must be geometric")
    pairs = [(e, gap(u, f, kernel, e)) for e in eps_list]
    fit = fit_loglog(pairs, flat_scale=l2_norm_sq(u))
    report = validate(kernel)
    return replace(fit, kernel_radial_moment=report.radial_moment)


def classify(fit: DecayFit, f: Integrand,
             thresholds: Thresholds = Thresholds()) -> Verdict:
    """Map a fitted decay exponent to a W^{1,2} verdict.

    Exponent >= exp_w12 with a good fit is W12-consistent; <= exp_sub with a
    good fit and uniformly convex f is sub-W12; anything else (including an
    oscillatory or degenerate ladder) is inconclusive.  A rounding-level flat
    ladder decays faster than any power and is W12-consistent.
    """
    bound = None
    if (fit.limit_estimate is not None and f.c1 > 0
            and fit.kernel_radial_moment):
        bound = 2.0 * fit.limit_estimate / (f.c1 * fit.kernel_radial_moment)
    if fit.flat:
        return Verdict("W12-consistent", None, None, 0.0, bound)
    if fit.exponent is None or fit.r_squared is None \
            or fit.r_squared < thresholds.r2_min:
        return Verdict("inconclusive", fit.exponent, fit.r_squared,
                       fit.limit_estimate, bound)
    if fit.exponent >= thresholds.exp_w12:
        return Verdict("W12-consistent", fit.exponent, fit.r_squared,
                       fit.limit_estimate, bound)
    if fit.exponent <= thresholds.exp_sub and f.c1 > 0:
        return Verdict("sub-W12", fit.exponent, fit.r_squared,
                       fit.limit_estimate, bound)
    return Verdict("inconclusive", fit.exponent, fit.r_squared,
                   fit.limit_estimate, bound)
