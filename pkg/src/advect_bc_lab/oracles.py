"""Analytic data functions with exact derivatives.

Boundary data ``g`` enters the inflow ghost cells through its time
derivatives, so every oracle carries closed-form derivatives of all the
orders it advertises. Oracles accept scalars or numpy arrays.

Catalog names understood by :func:`make_oracle`::

    sin, cos, neg_sin, poly:[c0, c1, ...], const:c

each optionally combined with ``scale`` and ``shift``, giving
``scale * base(x - shift)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial

ANALYTIC_MAX_ORDER = 64


class OracleError(ValueError):
    """Bad oracle name or a derivative request beyond the supported order."""


@dataclass(frozen=True)
class DataOracle:
    """A real function of one variable with exact derivatives.

    ``derivative(order, x)`` must return the derivative of the given order;
    ``antiderivative`` is optional and only used to speed up and sharpen
    cell averages.
    """

    name: str
    derivative: Callable[[int, np.ndarray], np.ndarray]
    max_derivative_order: int = ANALYTIC_MAX_ORDER
    antiderivative: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def value_at(self, x):
        return self.derivative_at(0, x)

    def __call__(self, x):
        return self.derivative_at(0, x)

    def derivative_at(self, order: int, x):
        if order < 0:
            raise OracleError(f"negative derivative order {order}")
        if order > self.max_derivative_order:
            raise OracleError(
                f"oracle {self.name!r} supports derivatives up to order "
                f"{self.max_derivative_order}, requested {order}"
            )
        return self.derivative(order, x)

    @property
    def has_antiderivative(self) -> bool:
        return self.antiderivative is not None

    def antiderivative_at(self, x):
        if self.antiderivative is None:
            raise OracleError(f"oracle {self.name!r} has no antiderivative")
        return self.antiderivative(x)

    def scaled(self, factor: float) -> "DataOracle":
        """``factor * self(x)``."""
        d, F = self.derivative, self.antiderivative
        return DataOracle(
            name=f"{factor}*{self.name}",
            derivative=lambda k, x: factor * d(k, x),
            max_derivative_order=self.max_derivative_order,
            antiderivative=None if F is None else (lambda x: factor * F(x)),
        )

    def shifted(self, shift: float) -> "DataOracle":
        """``self(x - shift)``."""
        d, F = self.derivative, self.antiderivative
        return DataOracle(
            name=f"{self.name}(x-{shift})",
            derivative=lambda k, x: d(k, np.subtract(x, shift)),
            max_derivative_order=self.max_derivative_order,
            antiderivative=None if F is None else (lambda x: F(np.subtract(x, shift))),
        )

    def stretched(self, slope: float) -> "DataOracle":
        """``self(slope * x)``; with ``slope = -a`` this turns ``f`` into its compatible ``g``."""
        if slope == 0:
            raise OracleError("slope must be nonzero")
        d, F = self.derivative, self.antiderivative
        return DataOracle(
            name=f"{self.name}({slope}*x)",
            derivative=lambda k, x: slope**k * d(k, np.multiply(slope, x)),
            max_derivative_order=self.max_derivative_order,
            antiderivative=None if F is None else (lambda x: F(np.multiply(slope, x)) / slope),
        )


_SIN_CYCLE = (np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x))


def sine() -> DataOracle:
    return DataOracle(
        name="sin",
        derivative=lambda k, x: _SIN_CYCLE[k % 4](x),
        antiderivative=lambda x: -np.cos(x),
    )


def cosine() -> DataOracle:
    return DataOracle(
        name="cos",
        derivative=lambda k, x: _SIN_CYCLE[(k + 1) % 4](x),
        antiderivative=np.sin,
    )


def neg_sine() -> DataOracle:
    return DataOracle(
        name="neg_sin",
        derivative=lambda k, x: -_SIN_CYCLE[k % 4](x),
        antiderivative=np.cos,
    )


def polynomial(coefficients) -> DataOracle:
    """``c0 + c1 x + c2 x^2 + ...``; derivatives past the degree vanish."""
    poly = Polynomial(np.asarray(coefficients, dtype=float))
    derivs = [poly]
    for _ in range(poly.degree() + 1):
        derivs.append(derivs[-1].deriv())
    integral = poly.integ()

    def derivative(k, x):
        out = derivs[min(k, len(derivs) - 1)](x)
        return out if np.ndim(out) else float(out)

    coeffs = ",".join(repr(float(c)) for c in poly.coef)
    return DataOracle(
        name=f"poly:[{coeffs}]",
        derivative=derivative,
        antiderivative=integral,
    )


def constant(c: float) -> DataOracle:
    c = float(c)
    return DataOracle(
        name=f"const:{c!r}",
        derivative=lambda k, x: np.full(np.shape(x), c if k == 0 else 0.0)[()],
        antiderivative=lambda x: np.multiply(c, x),
    )


def make_oracle(spec: str, scale: float = 1.0, shift: float = 0.0) -> DataOracle:
    """Resolve a catalog name into an oracle ``scale * base(x - shift)``."""
    text = spec.strip()
    if text == "sin":
        base = sine()
    elif text == "cos":
        base = cosine()
    elif text == "neg_sin":
        base = neg_sine()
    elif text.startswith("poly:"):
        try:
            coeffs = json.loads(text[len("poly:"):])
            coeffs = [float(c) for c in coeffs]
        except (ValueError, TypeError) as exc:
            raise OracleError(f"malformed polynomial oracle {spec!r}: {exc}") from None
        if not coeffs:
            raise OracleError(f"polynomial oracle {spec!r} has no coefficients")
        base = polynomial(coeffs)
    elif text.startswith("const:"):
        try:
            base = constant(float(text[len("const:"):]))
        except ValueError:
            raise OracleError(f"malformed constant oracle {spec!r}") from None
    else:
        raise OracleError(
            f"unknown oracle {spec!r}; expected sin, cos, neg_sin, poly:[...] or const:c"
        )
    if not (math.isfinite(scale) and math.isfinite(shift)):
        raise OracleError("scale and shift must be finite")
    if shift != 0.0:
        base = base.shifted(shift)
    if scale != 1.0:
        base = base.scaled(scale)
    return base
