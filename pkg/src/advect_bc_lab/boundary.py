"""Ghost cell values at the inflow (x = 0) and outflow (x = L) ends.

Inflow ghosts ``u_{1-r}, ..., u_0`` come from the inverse Lax-Wendroff
expansion of the boundary datum::

    u_l = sum_{k=0}^{K} dx^k / (k! a^k) * alpha_{k,l} * g^{(k)}(t)

Outflow ghosts ``u_{J+1}, ..., u_{J+p}`` are set so that the ``k_b``-th
backward difference vanishes at each ghost index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .oracles import DataOracle

DEFAULT_COMPATIBILITY_TOL = 1e-10


class InflowFamily(str, enum.Enum):
    CELL_AVERAGE = "cell_average"
    CELL_CENTER = "cell_center"


def ilw_alpha(family, kappa: int, ell: int) -> float:
    """Weight of ``dx^kappa g^{(kappa)} / (kappa! a^kappa)`` in ghost cell ``ell``.

    ``cell_average`` matches the mean of the Taylor polynomial over the
    ghost cell; ``cell_center`` matches its value at the cell midpoint.
    """
    family = InflowFamily(family)
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if family is InflowFamily.CELL_AVERAGE:
        return (-1) ** kappa / (kappa + 1) * (ell ** (kappa + 1) - (ell - 1) ** (kappa + 1))
    return (0.5 - ell) ** kappa


@dataclass(frozen=True)
class InflowSpec:
    family: InflowFamily
    truncation: int
    datum: DataOracle
    velocity: float

    def __post_init__(self):
        object.__setattr__(self, "family", InflowFamily(self.family))
        if self.truncation < 0:
            raise ValueError("truncation order K must be nonnegative")
        if self.truncation > self.datum.max_derivative_order:
            raise ValueError(
                f"K={self.truncation} exceeds the derivatives available from "
                f"{self.datum.name!r} (max {self.datum.max_derivative_order})"
            )
        if not self.velocity > 0:
            raise ValueError("inflow velocity must be positive")


@dataclass(frozen=True)
class OutflowSpec:
    extrapolation_order: int

    def __post_init__(self):
        if self.extrapolation_order < 0:
            raise ValueError("extrapolation order k_b must be nonnegative")


def fill_inflow_ghosts(spec: InflowSpec, t: float, dx: float, r: int) -> np.ndarray:
    """Values ``u_{1-r}, ..., u_0`` at time ``t``."""
    K, a = spec.truncation, spec.velocity
    ells = np.arange(1 - r, 1)
    out = np.zeros(r)
    for kappa in range(K + 1):
        deriv = float(spec.datum.derivative_at(kappa, t))
        factor = dx**kappa / (math.factorial(kappa) * a**kappa) * deriv
        alphas = np.array([ilw_alpha(spec.family, kappa, int(ell)) for ell in ells])
        out += factor * alphas
    return out


def extrapolation_weights(k_b: int) -> np.ndarray:
    """Weights ``w_m`` with ``u_{i} = sum_m w_m u_{i-m}``, ``m = 1..k_b``."""
    return np.array([-((-1) ** m) * math.comb(k_b, m) for m in range(1, k_b + 1)], dtype=float)


def fill_outflow_ghosts(spec: OutflowSpec, interior_tail: Sequence[float], p: int) -> np.ndarray:
    """Values ``u_{J+1}, ..., u_{J+p}`` from the last interior values.

    ``interior_tail`` ends with ``u_J``. Ghosts are built one after the
    other, each from the ``k_b`` values just before it.
    """
    k_b = spec.extrapolation_order
    tail = np.asarray(interior_tail, dtype=float)
    if tail.ndim != 1 or tail.shape[0] < k_b:
        raise ValueError(f"need at least k_b={k_b} tail values, got {tail.shape}")
    if k_b == 0:
        return np.zeros(p)
    w = extrapolation_weights(k_b)
    buf = list(tail[tail.shape[0] - k_b:])
    out = np.empty(p)
    for i in range(p):
        # buf[-m] is u_{J+i+1-m}
        val = sum(w[m - 1] * buf[-m] for m in range(1, k_b + 1))
        out[i] = val
        buf.append(val)
    return out


def backward_difference(values: Sequence, k_b: int) -> np.ndarray:
    """``(D_-^{k_b} v)_i`` for every index with ``k_b`` predecessors available."""
    return np.diff(np.asarray(values), n=k_b)


def check_compatibility(
    f: DataOracle,
    g: DataOracle,
    a: float,
    max_order: int,
    tol: float = DEFAULT_COMPATIBILITY_TOL,
) -> int:
    """Highest ``m`` such that the corner conditions hold for ``0..m``.

    The condition at order ``m`` is ``f^{(m)}(0) = (-a)^{-m} g^{(m)}(0)``.
    Returns ``-1`` when even the zeroth order fails.
    """
    last = -1
    for m in range(max_order + 1):
        fm = float(f.derivative_at(m, 0.0))
        gm = float(g.derivative_at(m, 0.0))
        if abs(fm - (-a) ** (-m) * gm) > tol:
            break
        last = m
    return last
