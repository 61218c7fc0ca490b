"""Nonlinearities f with derivative evaluators and curvature bounds.

Every integrand is normalized to f(0) = 0 and f'(0) = 0 so that
f(u) - f(u_eps) is integrable for compactly supported u.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Integrand:
    name: str
    f: Callable[[np.ndarray], np.ndarray]
    f1: Callable[[np.ndarray], np.ndarray]
    f2: Callable[[np.ndarray], np.ndarray]
    c1: float          # lower bound on f'' over the working range
    f2_sup: float      # upper bound on f'' over the working range

    def __post_init__(self):
        if abs(float(self.f(np.array(0.0)))) > 1e-14:
            raise ValueError(f"integrand {self.name}: f(0) != 0")
        if abs(float(self.f1(np.array(0.0)))) > 1e-14:
            raise ValueError(f"integrand {self.name}: f'(0) != 0")


def _entropy(v):
    w = np.maximum(np.asarray(v, dtype=float), -1.0 + 1e-15)
    return (1.0 + w) * np.log1p(w) - w


SQUARE = Integrand(
    name="square",
    f=lambda v: np.asarray(v) ** 2,
    f1=lambda v: 2.0 * np.asarray(v),
    f2=lambda v: np.full_like(np.asarray(v, dtype=float), 2.0),
    c1=2.0,
    f2_sup=2.0,
)

# (1+u) log(1+u) - u: strictly convex, increasing on [0, inf), with
# f'' = 1/(1+u) in [1/2, 1] on the bilayer range u in [0, 1].
ENTROPY = Integrand(
    name="entropy",
    f=_entropy,
    f1=lambda v: np.log1p(np.maximum(np.asarray(v, dtype=float), -1.0 + 1e-15)),
    f2=lambda v: 1.0 / (1.0 + np.maximum(np.asarray(v, dtype=float), -1.0 + 1e-15)),
    c1=0.5,
    f2_sup=1.0,
)

_REGISTRY = {i.name: i for i in (SQUARE, ENTROPY)}


def get_integrand(name: str) -> Integrand:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown integrand {name!r}; known: "
                         f"{sorted(_REGISTRY)}") from None
