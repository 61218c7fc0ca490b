"""Command-line orchestration for kernel, gap, ladder, and bilayer runs.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure
(non-convergence or a violated precondition).  All data files are
deterministic: identical configs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import bilayer as bl
from .errors import JensenLabError
from .fields import sample
from .gap import Thresholds, classify, decay_ladder, gap as gap_value
from .integrands import get_integrand
from .kernels import validate
from .serialize import (certificate_to_text, fmt, ladder_to_csv,
                        parse_config_text, parse_fn_spec, parse_interval,
                        parse_kernel_spec, problem_from_config,
                        solution_to_text)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@dataclass
class RunConfig:
    command: str
    out_dir: Path
    kernel: object = None
    fn: object = None
    integrand: object = None
    eps: Optional[float] = None
    eps_list: tuple = ()
    dx: float = 1.0 / 2048.0
    box: tuple = (-8.0, 8.0)
    tol: float = 1e-6
    thresholds: Thresholds = field(default_factory=Thresholds)
    problem: object = None
    solver: dict = field(default_factory=dict)
    certify: dict = field(default_factory=dict)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jensenlab",
        description="Jensen-gap decay experiments and bilayer minimization")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("moments", help="kernel moment report")
    sp.add_argument("--kernel", required=True, help="shape:dim:radius")
    sp.add_argument("--tol", type=float, default=1e-6)
    add_common(sp)

    for name in ("gap", "ladder"):
        sp = sub.add_parser(name)
        sp.add_argument("--kernel", required=True, help="shape:dim:radius")
        sp.add_argument("--fn", required=True, help="family[:param]")
        sp.add_argument("--f", default="square", help="integrand name")
        sp.add_argument("--dx", type=float, default=1.0 / 2048.0)
        sp.add_argument("--box", default="-8:8", help="a:b")
        if name == "gap":
            sp.add_argument("--eps", type=float, required=True)
        else:
            sp.add_argument("--eps-max", type=float, default=0.16)
            sp.add_argument("--rungs", type=int, default=5)
            sp.add_argument("--exp-w12", type=float, default=1.9)
            sp.add_argument("--exp-sub", type=float, default=1.8)
            sp.add_argument("--r2-min", type=float, default=0.99)
        add_common(sp)

    for name in ("bilayer-solve", "bilayer-certify"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value config file")
        add_common(sp)

    return parser


def _configure(args) -> RunConfig:
    cfg = RunConfig(command=args.command, out_dir=Path(args.out))
    if args.command == "moments":
        cfg.kernel = parse_kernel_spec(args.kernel)
        if not args.tol > 0:
            raise JensenLabError("tol must be positive")
        cfg.tol = args.tol
        return cfg
    if args.command in ("gap", "ladder"):
        cfg.kernel = parse_kernel_spec(args.kernel)
        cfg.fn = parse_fn_spec(args.fn)
        cfg.integrand = get_integrand(args.f)
        cfg.dx = args.dx
        if not cfg.dx > 0:
            raise JensenLabError("dx must be positive")
        cfg.box = parse_interval(args.box)
        if args.command == "gap":
            if not args.eps > 0:
                raise JensenLabError("eps must be positive")
            cfg.eps = args.eps
        else:
            if not args.eps_max > 0:
                raise JensenLabError("eps-max must be positive")
            if args.rungs < 4:
                raise JensenLabError("ladder needs at least 4 rungs")
            cfg.eps_list = tuple(args.eps_max * 2.0 ** (-k)
                                 for k in range(args.rungs))
            cfg.thresholds = Thresholds(exp_w12=args.exp_w12,
                                        exp_sub=args.exp_sub,
                                        r2_min=args.r2_min)
        return cfg
    # bilayer commands
    text = ""
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise JensenLabError(f"config file not found: {path}")
        text = path.read_text()
    problem, solver, certify = problem_from_config(parse_config_text(text))
    cfg.problem = problem
    cfg.solver = solver
    cfg.certify = certify
    return cfg


def _run(cfg: RunConfig) -> int:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)

    if cfg.command == "moments":
        report = validate(cfg.kernel, cfg.tol)
        (out / "moments.txt").write_text(report.as_text())
        print(f"wrote {out / 'moments.txt'} (ok = {report.ok})")
        return EXIT_OK

    if cfg.command in ("gap", "ladder"):
        eps_max = cfg.eps if cfg.command == "gap" else max(cfg.eps_list)
        pad = max(1.0, eps_max * cfg.kernel.support_radius)
        u = sample(cfg.fn, 1, cfg.box, cfg.dx, padding=pad)
        if cfg.command == "gap":
            value = gap_value(u, cfg.integrand, cfg.kernel, cfg.eps)
            text = (f"eps = {fmt(cfg.eps)}\n"
                    f"gap = {fmt(value)}\n"
                    f"gap_over_eps2 = {fmt(value / cfg.eps ** 2)}\n")
            (out / "gap.txt").write_text(text)
            print(text, end="")
            return EXIT_OK
        fit = decay_ladder(u, cfg.integrand, cfg.kernel, cfg.eps_list)
        verdict = classify(fit, cfg.integrand, cfg.thresholds)
        (out / "ladder.csv").write_text(ladder_to_csv(fit, verdict))
        from .report import save_ladder_figure
        save_ladder_figure(fit, str(out / "ladder.svg"),
                           title=f"{cfg.fn.family} / {cfg.kernel.spec_string()}")
        exp = fmt(fit.exponent) if fit.exponent is not None else "nan"
        print(f"exponent = {exp} verdict = {verdict.label}")
        return EXIT_OK

    # bilayer commands
    p = cfg.problem
    sol = bl.minimize(p, bl.SolverOptions(**cfg.solver))
    (out / "solution.dat").write_text(solution_to_text(sol, p))
    print(f"energy = {fmt(sol.energy)} iterations = {sol.iterations} "
          f"converged = {sol.converged}")
    if not sol.converged:
        print("solver did not converge within the iteration cap",
              file=sys.stderr)
        return EXIT_NUMERICAL
    if cfg.command == "bilayer-solve":
        return EXIT_OK

    cert = bl.certify(sol, p, cfg.certify["mollifier"],
                      cfg.certify["eps_list"])
    (out / "certificate.txt").write_text(certificate_to_text(cert))
    (out / "ladder.csv").write_text(ladder_to_csv(cert.fit, cert.verdict))
    from .report import save_ladder_figure
    save_ladder_figure(cert.fit, str(out / "ladder.svg"),
                       title="minimizer gap decay")
    print(f"certificate ok = {cert.ok} verdict = {cert.verdict.label}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        cfg = _configure(args)
    except (JensenLabError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _run(cfg)
    except JensenLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
