"""jensenlab: Jensen-gap decay experiments and constrained bilayer minimization.

The library measures the mollification gap T_f(u; eps) = int f(u) - f(u_eps)
on sampled grid functions, fits its eps-decay to classify square-integrable
gradients, and applies the same machinery to certify regularity of minimizers
of a nonlocal constrained energy.
"""

from .bilayer import (BilayerProblem, BilayerSolution, Certificate,
                      SolverOptions, certify, default_attraction_kernel,
                      minimize, project_K)
from .errors import (GridError, JensenLabError, KernelError, NumericsError,
                     ProjectionError, ResolutionError, SizeCapError)
from .fields import (GridFunction, TestFunctionSpec, convolve,
                     dirichlet_energy, gradient, integrate, kernel_weights,
                     l2_norm_sq, sample)
from .gap import (DecayFit, Thresholds, Verdict, classify, decay_ladder,
                  fit_loglog, gap, limit_functional, quadratic_gap_oracle)
from .integrands import ENTROPY, SQUARE, Integrand, get_integrand
from .kernels import Kernel, MomentReport, make_kernel, scale, self_convolve, validate

__version__ = "0.1.0"

__all__ = [
    "BilayerProblem", "BilayerSolution", "Certificate", "SolverOptions",
    "certify", "default_attraction_kernel", "minimize", "project_K",
    "GridError", "JensenLabError", "KernelError", "NumericsError",
    "ProjectionError", "ResolutionError", "SizeCapError",
    "GridFunction", "TestFunctionSpec", "convolve", "dirichlet_energy",
    "gradient", "integrate", "kernel_weights", "l2_norm_sq", "sample",
    "DecayFit", "Thresholds", "Verdict", "classify", "decay_ladder",
    "fit_loglog", "gap", "limit_functional", "quadratic_gap_oracle",
    "ENTROPY", "SQUARE", "Integrand", "get_integrand",
    "Kernel", "MomentReport", "make_kernel", "scale", "self_convolve",
    "validate",
]
