"""Stencil coefficient sets for explicit one-step advection schemes.

A scheme advances cell values by

    u_j^{n+1} = sum_{l=-r}^{p} a_l u_{j+l}^n

and is fully described by its weights ``a_{-r}, ..., a_p`` together with
the CFL number ``lambda * a`` they were built for.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

DEFAULT_MOMENT_TOL = 1e-12
DEFAULT_AMPLIFICATION_TOL = 1e-12
DEFAULT_AMPLIFICATION_SAMPLES = 10_000


class CFLWarning(UserWarning):
    """Issued when a scheme is built outside ``0 < cfl <= 1``."""


@dataclass(frozen=True)
class SchemeCoefficients:
    """Weights ``a_{-r}..a_p`` of an explicit two time level scheme.

    ``weights[i]`` is the coefficient of ``u_{j+l}`` with ``l = i - r``.
    ``cfl_warning`` is set when the builder was called with ``cfl > 1``.
    """

    r: int
    p: int
    weights: tuple[float, ...]
    cfl: float
    claimed_order: int
    name: str = "custom"
    cfl_warning: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.r < 0 or self.p < 0:
            raise ValueError(f"stencil widths must be nonnegative, got r={self.r}, p={self.p}")
        if len(self.weights) != self.r + self.p + 1:
            raise ValueError(
                f"expected {self.r + self.p + 1} weights for r={self.r}, p={self.p}, "
                f"got {len(self.weights)}"
            )
        if not any(self.weights):
            raise ValueError("all weights vanish")
        if not self.cfl > 0:
            raise ValueError(f"cfl must be positive, got {self.cfl}")
        if self.claimed_order < 1:
            raise ValueError("claimed_order must be a positive integer")

    @property
    def normalized(self) -> bool:
        """``a_{-r} a_p != 0``; fails only in degenerate cases such as ``cfl == 1``."""
        return self.weights[0] != 0.0 and self.weights[-1] != 0.0

    @property
    def offsets(self) -> np.ndarray:
        """Stencil offsets ``-r, ..., p``."""
        return np.arange(-self.r, self.p + 1)

    def weight(self, ell: int) -> float:
        if not -self.r <= ell <= self.p:
            raise IndexError(f"offset {ell} outside stencil [-{self.r}, {self.p}]")
        return self.weights[ell + self.r]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


@dataclass(frozen=True)
class MomentReport:
    orders_checked: tuple[int, ...]
    residuals: tuple[float, ...]
    achieved_order: int


@dataclass(frozen=True)
class AmplificationReport:
    sup_modulus: float
    argmax_theta: float
    satisfied: bool


def _check_cfl(cfl: float) -> bool:
    if not cfl > 0:
        raise ValueError(f"cfl must be positive, got {cfl}")
    if cfl > 1:
        warnings.warn(
            f"cfl={cfl} exceeds 1; the scheme is not l2-stable on the line",
            CFLWarning,
            stacklevel=3,
        )
        return True
    return False


def build_upwind(cfl: float) -> SchemeCoefficients:
    """First order upwind scheme ``u_j - cfl (u_j - u_{j-1})``."""
    flag = _check_cfl(cfl)
    return SchemeCoefficients(
        r=1, p=0, weights=(cfl, 1.0 - cfl), cfl=cfl, claimed_order=1,
        name="upwind", cfl_warning=flag,
    )


def build_lax_wendroff(cfl: float) -> SchemeCoefficients:
    """Three-point Lax-Wendroff scheme, second order.

    At ``cfl == 1`` the weights degenerate to the exact shift ``(1, 0, 0)``.
    """
    flag = _check_cfl(cfl)
    c = cfl
    return SchemeCoefficients(
        r=1, p=1, weights=(c / 2 + c * c / 2, 1 - c * c, -c / 2 + c * c / 2),
        cfl=cfl, claimed_order=2, name="lax_wendroff", cfl_warning=flag,
    )


def build_o3(cfl: float) -> SchemeCoefficients:
    """Third order scheme mixing Lax-Wendroff and Beam-Warming (r=2, p=1)."""
    flag = _check_cfl(cfl)
    c = cfl
    weights = (
        -c * (1 - c * c) / 6,
        c * (1 + c) * (2 - c) / 2,
        (1 - c * c) * (2 - c) / 2,
        -c * (1 - c) * (2 - c) / 6,
    )
    return SchemeCoefficients(
        r=2, p=1, weights=weights, cfl=cfl, claimed_order=3,
        name="o3", cfl_warning=flag,
    )


BUILDERS = {
    "upwind": build_upwind,
    "lax_wendroff": build_lax_wendroff,
    "o3": build_o3,
}


def build_scheme(name: str, cfl: float) -> SchemeCoefficients:
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; expected one of {sorted(BUILDERS)}") from None
    return builder(cfl)


def check_consistency(
    s: SchemeCoefficients, max_order: int, tol: float = DEFAULT_MOMENT_TOL
) -> MomentReport:
    """Compare the moments ``sum l^m a_l`` with ``(-cfl)^m`` for ``m <= max_order``."""
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    ell = s.offsets.astype(float)
    a = s.as_array()
    orders = tuple(range(max_order + 1))
    residuals = tuple(
        float(abs(np.sum(ell**m * a) - (-s.cfl) ** m)) for m in orders
    )
    achieved = -1
    for m, res in zip(orders, residuals):
        if res > tol:
            break
        achieved = m
    return MomentReport(orders_checked=orders, residuals=residuals, achieved_order=achieved)


def amplification_factor(s: SchemeCoefficients, theta) -> np.ndarray:
    """Symbol ``gamma(theta) = sum a_l exp(i l theta)``."""
    theta = np.asarray(theta, dtype=float)
    return np.exp(1j * np.multiply.outer(theta, s.offsets)) @ s.as_array()


def check_amplification(
    s: SchemeCoefficients,
    samples: int = DEFAULT_AMPLIFICATION_SAMPLES,
    tol: float = DEFAULT_AMPLIFICATION_TOL,
) -> AmplificationReport:
    """Estimate ``sup |gamma|`` on ``[0, 2 pi]`` by sampling then local refinement."""
    if samples < 64:
        raise ValueError("at least 64 samples are required")
    h = 2 * math.pi / samples
    theta = np.arange(samples) * h
    modulus = np.abs(amplification_factor(s, theta))
    i = int(np.argmax(modulus))
    best_theta, best = float(theta[i]), float(modulus[i])

    res = minimize_scalar(
        lambda th: -abs(complex(amplification_factor(s, th))),
        bounds=(best_theta - h, best_theta + h),
        method="bounded",
        options={"xatol": 1e-14},
    )
    if res.success and -res.fun > best:
        best, best_theta = float(-res.fun), float(res.x) % (2 * math.pi)
    return AmplificationReport(
        sup_modulus=best, argmax_theta=best_theta, satisfied=best <= 1 + tol
    )


def apply_interior(s: SchemeCoefficients, window: Sequence[float]) -> float:
    """One stencil evaluation on ``(u_{j-r}, ..., u_{j+p})``."""
    w = np.asarray(window, dtype=float)
    if w.shape != (s.r + s.p + 1,):
        raise ValueError(f"window must have length {s.r + s.p + 1}, got {w.shape}")
    return float(np.dot(s.as_array(), w))


def apply_stencil(s: SchemeCoefficients, values: np.ndarray) -> np.ndarray:
    """Vectorised stencil sweep.

    ``values`` holds ``u_{j0-r}, ..., u_{j1+p}``; the result holds the
    updated ``u_{j0}, ..., u_{j1}``.
    """
    values = np.asarray(values)
    m = values.shape[0] - s.r - s.p
    if m <= 0:
        raise ValueError("not enough values for one stencil application")
    out = np.zeros(m, dtype=values.dtype)
    for i, w in enumerate(s.weights):
        out += w * values[i : i + m]
    return out
