"""Plain-text formats: grid functions, ladders, configs, kernel specs.

All numeric output uses 17 significant digits so doubles round-trip
losslessly, and no file contains timestamps: identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .bilayer import BilayerProblem, Certificate, BilayerSolution
from .errors import GridError, KernelError
from .fields import GridFunction, TestFunctionSpec
from .gap import DecayFit, Verdict
from .integrands import Integrand, get_integrand
from .kernels import Kernel, make_kernel


def fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------- kernels

def parse_kernel_spec(spec: str) -> Kernel:
    """``shape:dim:radius`` strings, e.g. ``box:1:1``."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise KernelError(f"kernel spec {spec!r} is not shape:dim:radius")
    shape, dim_s, radius_s = parts
    try:
        dim = int(dim_s)
        radius = float(radius_s)
    except ValueError:
        raise KernelError(f"kernel spec {spec!r}: bad dim or radius") from None
    return make_kernel(shape, dim, radius)


def parse_fn_spec(spec: str) -> TestFunctionSpec:
    """``family`` or ``family:param`` strings, e.g. ``cusp:0.25``."""
    parts = spec.split(":")
    family = parts[0]
    alpha = None
    if len(parts) == 2:
        try:
            alpha = float(parts[1])
        except ValueError:
            raise GridError(f"fn spec {spec!r}: bad parameter") from None
    elif len(parts) > 2:
        raise GridError(f"fn spec {spec!r} is not family[:param]")
    return TestFunctionSpec(family=family, alpha=alpha)


def parse_interval(spec: str) -> tuple:
    parts = spec.split(":")
    if len(parts) != 2:
        raise GridError(f"interval {spec!r} is not a:b")
    try:
        a, b = float(parts[0]), float(parts[1])
    except ValueError:
        raise GridError(f"interval {spec!r}: bad endpoint") from None
    if not a < b:
        raise GridError(f"interval {spec!r}: need a < b")
    return a, b


# ---------------------------------------------------------- grid functions

def grid_to_text(g: GridFunction) -> str:
    origin = " ".join(fmt(o) for o in g.origin)
    head = f"# dim={g.dim} origin={origin} dx={fmt(g.spacing)} pad={fmt(g.padding_radius)}"
    if g.dim == 1:
        body = "\n".join(fmt(v) for v in g.values)
    else:
        body = "\n".join(" ".join(fmt(v) for v in row) for row in g.values)
    return head + "\n" + body + "\n"


def grid_from_text(text: str) -> GridFunction:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise GridError("grid file must start with a '# dim=...' header")
    fields = {}
    for tok in lines[0].lstrip("#").split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            fields[k] = v
        else:
            fields.setdefault("origin", "")
            fields["origin"] += " " + tok
    dim = int(fields["dim"])
    origin = tuple(float(t) for t in fields["origin"].split())
    dx = float(fields["dx"])
    pad = float(fields.get("pad", "0"))
    data_lines = [ln for ln in lines[1:] if not ln.startswith("#")]
    if dim == 1:
        values = np.array([float(ln) for ln in data_lines])
    else:
        values = np.array([[float(t) for t in ln.split()] for ln in data_lines])
    return GridFunction(dim=dim, origin=origin, spacing=dx, values=values,
                        padding_radius=pad)


# ------------------------------------------------------------------ ladders

def ladder_to_csv(fit: DecayFit, verdict: Verdict = None,
                  requested: int = None) -> str:
    lines = ["eps,T,T_over_eps2"]
    dropped_eps = {e for e, _ in fit.dropped}
    for e, t in fit.ladder:
        if e in dropped_eps:
            continue
        lines.append(f"{fmt(e)},{fmt(t)},{fmt(t / (e * e))}")
    dropped = " ".join(fmt(e) for e, _ in fit.dropped) if fit.dropped else ""
    lines.append(f"# dropped={len(fit.dropped)}"
                 + (f" eps=[{dropped}]" if dropped else ""))
    exp = fmt(fit.exponent) if fit.exponent is not None else "nan"
    r2 = fmt(fit.r_squared) if fit.r_squared is not None else "nan"
    lim = fmt(fit.limit_estimate) if fit.limit_estimate is not None else "nan"
    vlabel = verdict.label if verdict is not None else "n/a"
    lines.append(f"# exponent={exp} r2={r2} limit={lim} verdict={vlabel}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ configs

def parse_config_text(text: str) -> dict:
    """``key = value`` lines; '#' starts a comment."""
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise GridError(f"bad config line {raw!r}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = val
    return out


_BILAYER_KEYS = {"alpha", "h", "L", "dx", "kernel", "f", "tol", "max_iter",
                 "mollifier", "eps_max", "rungs"}


def problem_from_config(cfg: dict) -> tuple:
    """Build (BilayerProblem, solver kwargs, certify kwargs) from a config."""
    unknown = set(cfg) - _BILAYER_KEYS
    if unknown:
        raise GridError(f"unknown config keys: {sorted(unknown)}")
    try:
        alpha = float(cfg.get("alpha", "4"))
        h = float(cfg.get("h", "0.5"))
        length = float(cfg.get("L", "8"))
        dx = float(cfg.get("dx", str(1.0 / 512.0)))
        tol = float(cfg.get("tol", "1e-8"))
        max_iter = int(cfg.get("max_iter", "5000"))
        eps_max = float(cfg.get("eps_max", "0.125"))
        rungs = int(cfg.get("rungs", "4"))
    except ValueError as exc:
        raise GridError(f"bad config value: {exc}") from None
    kappa = parse_kernel_spec(cfg["kernel"]) if "kernel" in cfg else None
    f = get_integrand(cfg.get("f", "entropy"))
    mollifier = parse_kernel_spec(cfg.get("mollifier", "box:1:1"))
    kwargs = dict(alpha=alpha, h=h, length=length, dx=dx, f=f)
    if kappa is not None:
        kwargs["kappa"] = kappa
    problem = BilayerProblem(**kwargs)
    solver = {"tol": tol, "max_iter": max_iter}
    cert = {"mollifier": mollifier,
            "eps_list": [eps_max * 2.0 ** (-k) for k in range(rungs)]}
    return problem, solver, cert


# -------------------------------------------------------------- summaries

def solution_to_text(sol: BilayerSolution, p: BilayerProblem) -> str:
    body = grid_to_text(sol.u)
    fr = sol.feasibility
    lines = [
        f"# energy = {fmt(sol.energy)}",
        f"# iterations = {sol.iterations}",
        f"# converged = {int(sol.converged)}",
        f"# mass_residual = {fmt(fr['mass'])}",
        f"# min_value = {fmt(fr['min'])}",
        f"# pair_residual = {fmt(fr['pair_max'])}",
        f"# alpha = {fmt(p.alpha)}",
        f"# h = {fmt(p.h)}",
        f"# f = {p.f.name}",
    ]
    return body + "\n".join(lines) + "\n"


def certificate_to_text(cert: Certificate) -> str:
    lines = ["certificate"]
    lines.append(f"ok = {int(cert.ok)}")
    lines.append(f"verdict = {cert.verdict.label}")
    exp = cert.fit.exponent
    lines.append(f"exponent = {fmt(exp) if exp is not None else 'nan'}")
    r2 = cert.fit.r_squared
    lines.append(f"r2 = {fmt(r2) if r2 is not None else 'nan'}")
    lines.append(f"flat = {int(cert.fit.flat)}")
    lines.append(f"nonlocal_ratio_spread = {fmt(cert.ratio_max_over_min)}")
    lines.append("rungs: eps gap F_diff entropy_diff nonlocal_term")
    for eps, g, fd, ed, nt in cert.rungs:
        lines.append(f"  {fmt(eps)} {fmt(g)} {fmt(fd)} {fmt(ed)} {fmt(nt)}")
    lines.append("nonlocal: eps lhs ratio")
    for eps, lhs, ratio in cert.nonlocal_rows:
        lines.append(f"  {fmt(eps)} {fmt(lhs)} {fmt(ratio)}")
    for reason in cert.reasons:
        lines.append(f"refused: {reason}")
    return "\n".join(lines) + "\n"
