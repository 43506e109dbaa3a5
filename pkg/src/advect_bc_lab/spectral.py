"""Characteristic polynomial, discrete steady states and boundary layer correctors.

Sequences kept fixed by one step of the scheme on the whole line are
generated by the roots of

    A(X) = sum_{l=-r}^{p} a_l X^{l+r} - X^r.

Roots outside the closed unit disk give steady states decaying towards
``j -> -inf``; near an outflow boundary they span the boundary layer that
repairs the extrapolation condition for the projected exact solution.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .scheme_core import SchemeCoefficients

CLUSTER_TOL = 1e-5
CIRCLE_TOL = 1e-8
IMAG_PRUNE_TOL = 1e-10
COND_LIMIT = 1e12


class AssumptionViolation(ValueError):
    """A structural property required by the boundary layer analysis fails."""


class Region(str, enum.Enum):
    U_OUTSIDE = "U_outside"
    S1_CIRCLE = "S1_circle"
    D_INSIDE = "D_inside"


@dataclass(frozen=True)
class CharPoly:
    """``A(X)``; ``coefficients[i]`` multiplies ``X^i``."""

    coefficients: tuple[float, ...]
    r: int
    p: int

    @property
    def degree(self) -> int:
        return self.r + self.p

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, np.asarray(self.coefficients))

    def is_proportional_to(self, other: Sequence[float], tol: float = 1e-12) -> bool:
        """True when ``other`` (ascending powers) is a nonzero multiple of ``A``."""
        a = np.asarray(self.coefficients, dtype=float)
        b = np.zeros_like(a)
        b[: len(other)] = other
        i = int(np.argmax(np.abs(a)))
        if b[i] == 0:
            return False
        return bool(np.allclose(b / b[i] * a[i], a, atol=tol * np.abs(a).max(), rtol=0))


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int
    region: Region


@dataclass(frozen=True)
class RootSet:
    roots: tuple[Root, ...]
    circle_tol: float = CIRCLE_TOL

    @property
    def tau_plus(self) -> int:
        """Number of distinct roots outside the closed unit disk."""
        return sum(1 for rt in self.roots if rt.region is Region.U_OUTSIDE)

    @property
    def total_multiplicity(self) -> int:
        return sum(rt.multiplicity for rt in self.roots)

    def unstable(self) -> list[Root]:
        """Roots in ``|z| > 1``, smallest modulus first."""
        return sorted(
            (rt for rt in self.roots if rt.region is Region.U_OUTSIDE),
            key=lambda rt: abs(rt.value),
        )


@dataclass(frozen=True)
class SteadyStateBasis:
    """Generators ``(j-J)^nu kappa^(j-J)`` sampled on ``j = J-M .. J+p``."""

    J: int
    indices: np.ndarray
    generators: tuple[np.ndarray, ...]
    labels: tuple[tuple[complex, int], ...]

    @property
    def count(self) -> int:
        return len(self.generators)

    def evaluate(self, m: int, j) -> np.ndarray:
        """Generator ``m`` at arbitrary indices (closed form)."""
        kappa, nu = self.labels[m]
        d = np.asarray(j) - self.J
        return d.astype(complex) ** nu * np.power(complex(kappa), d)


@dataclass(frozen=True)
class CorrectorSystem:
    matrix: np.ndarray
    k_b: int
    basis: SteadyStateBasis
    condition_number: float

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    def rhs_scale(self, dx: float) -> float:
        return dx ** (-self.k_b)


@dataclass(frozen=True)
class CorrectorSolution:
    """Boundary layer at one time level: ``v_j = sum_m z_m rho^(m)_j``."""

    z: np.ndarray
    indices: np.ndarray
    values: np.ndarray


def char_poly(s: SchemeCoefficients) -> CharPoly:
    coeffs = np.zeros(s.r + s.p + 1)
    coeffs[:] = s.as_array()  # a_l sits at power l + r
    coeffs[s.r] -= 1.0
    return CharPoly(coefficients=tuple(float(c) for c in coeffs), r=s.r, p=s.p)


def _companion(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[0] - 1
    monic = coeffs[:-1] / coeffs[-1]
    C = np.zeros((n, n))
    C[1:, :-1] = np.eye(n - 1)
    C[:, -1] = -monic
    return C


def _classify(value: complex, circle_tol: float) -> Region:
    gap = abs(value) - 1.0
    if abs(gap) <= circle_tol:
        return Region.S1_CIRCLE
    return Region.U_OUTSIDE if gap > 0 else Region.D_INSIDE


def find_roots(
    cp: CharPoly, cluster_tol: float = CLUSTER_TOL, circle_tol: float = CIRCLE_TOL
) -> RootSet:
    """Roots of ``A`` from companion-matrix eigenvalues, merged into multiplicities.

    Eigenvalues closer than ``cluster_tol * max(1, |z|)`` to a cluster are
    joined to it; a cluster is represented by its mean, which is far more
    accurate than its members for a multiple root.
    """
    coeffs = np.asarray(cp.coefficients, dtype=float)
    if cp.degree < 1:
        raise ValueError("characteristic polynomial must have degree >= 1")
    if coeffs[-1] == 0.0:
        raise ValueError("leading coefficient a_p vanishes; the scheme is not normalized")
    # trailing zero coefficients would be exact roots at 0
    eig = np.linalg.eigvals(_companion(coeffs)) if cp.degree > 1 else np.array([-coeffs[0] / coeffs[1]])
    clusters: list[list[complex]] = []
    for z in sorted(eig, key=lambda z: (abs(z), np.angle(z))):
        for cl in clusters:
            c = np.mean(cl)
            if abs(z - c) <= cluster_tol * max(1.0, abs(c)):
                cl.append(complex(z))
                break
        else:
            clusters.append([complex(z)])
    roots = []
    for cl in clusters:
        value = complex(np.mean(cl))
        if abs(value.imag) <= 1e-14 * max(1.0, abs(value)):
            value = complex(value.real, 0.0)
        roots.append(Root(value=value, multiplicity=len(cl), region=_classify(value, circle_tol)))
    roots.sort(key=lambda rt: -abs(rt.value))
    return RootSet(roots=tuple(roots), circle_tol=circle_tol)


def check_root_assumption(rs: RootSet) -> bool:
    """The only root on the unit circle is ``1``, and it is simple."""
    on_circle = [rt for rt in rs.roots if rt.region is Region.S1_CIRCLE]
    return (
        len(on_circle) == 1
        and abs(on_circle[0].value - 1.0) <= rs.circle_tol
        and on_circle[0].multiplicity == 1
    )


def count_unstable(rs: RootSet, p: int) -> int:
    """Roots outside the unit disk counted with multiplicity; must equal ``p``."""
    count = sum(rt.multiplicity for rt in rs.roots if rt.region is Region.U_OUTSIDE)
    if count != p:
        raise AssumptionViolation(f"{count} roots outside the unit disk, expected p={p}")
    return count


def default_window(rs: RootSet, margin: int) -> int:
    """Depth ``M`` below ``J`` where the slowest generator has decayed to 1e-16 in l2."""
    unstable = rs.unstable()
    if not unstable:
        return margin
    kappa_min = abs(unstable[0].value)
    mu_max = max(rt.multiplicity for rt in unstable)
    M = int(math.ceil(16 * math.log(10) / (2 * math.log(kappa_min))))
    # polynomial prefactors (j-J)^nu slow the decay
    while M ** (2 * (mu_max - 1)) * kappa_min ** (-2.0 * M) > 1e-16:
        M += 1
    return M + margin


def steady_state_basis(rs: RootSet, J: int, window: Optional[int] = None) -> SteadyStateBasis:
    """Decaying steady states, one per unstable root and power ``nu < mu``."""
    unstable = rs.unstable()
    p = sum(rt.multiplicity for rt in unstable)
    if window is None:
        window = default_window(rs, margin=rs.total_multiplicity)
    indices = np.arange(J - window, J + p + 1)
    d = (indices - J).astype(complex)
    labels = []
    gens = []
    for rt in unstable:
        for nu in range(rt.multiplicity):
            labels.append((rt.value, nu))
            gens.append(d**nu * np.power(rt.value, indices - J))
    return SteadyStateBasis(J=J, indices=indices, generators=tuple(gens), labels=tuple(labels))


def verify_steady_state(s: SchemeCoefficients, generator: Sequence, window=None) -> float:
    """Relative residual of one scheme step applied to ``generator``.

    ``generator`` is sampled on consecutive indices; the residual is taken
    on every index with a full stencil available. ``window`` optionally
    restricts the normalising maximum to a slice ``(start, stop)``.
    """
    v = np.asarray(generator)
    m = v.shape[0] - s.r - s.p
    if m <= 0:
        raise ValueError("sequence too short for the stencil")
    image = np.zeros(m, dtype=v.dtype)
    for i, w in enumerate(s.weights):
        image += w * v[i : i + m]
    resid = np.abs(image - v[s.r : s.r + m])
    ref = np.abs(v if window is None else v[window[0] : window[1]]).max()
    if ref == 0:
        return float(resid.max())
    return float(resid.max() / ref)


def _difference_at(values: np.ndarray, indices: np.ndarray, k_b: int, targets: Sequence[int]) -> np.ndarray:
    """``(D_-^{k_b} v)_j`` for each ``j`` in ``targets`` by repeated differencing."""
    d = np.diff(values, n=k_b) if k_b else values
    offset = indices[0] + k_b
    return np.array([d[j - offset] for j in targets])


def build_corrector_system(basis: SteadyStateBasis, k_b: int, p: int) -> CorrectorSystem:
    """Matrix ``(D_-^{k_b} rho^(m))_{J+l}``, rows ``l = 1..p``, columns ``m = 1..p``."""
    if basis.count != p:
        raise AssumptionViolation(f"basis has {basis.count} generators, expected p={p}")
    if p < 1:
        raise ValueError("corrector system needs p >= 1")
    if k_b < 1:
        raise ValueError("corrector system needs k_b >= 1")
    J = basis.J
    targets = [J + ell for ell in range(1, p + 1)]
    # sample each generator from J+1-k_b so the differences exist at J+1
    j = np.arange(J + 1 - k_b, J + p + 1)
    cols = [_difference_at(basis.evaluate(m, j), j, k_b, targets) for m in range(p)]
    matrix = np.column_stack(cols).astype(complex)
    cond = float(np.linalg.cond(matrix))
    if not math.isfinite(cond) or cond > COND_LIMIT:
        raise AssumptionViolation(
            f"boundary layer matrix is numerically singular (cond={cond:.3g}, k_b={k_b})"
        )
    return CorrectorSystem(matrix=matrix, k_b=k_b, basis=basis, condition_number=cond)


def solve_corrector(
    sys: CorrectorSystem, omega_tail: Sequence[float], k_b: int, dx: float
) -> CorrectorSolution:
    """Boundary layer ``v`` so that ``omega + dx^{k_b} v`` satisfies the extrapolation.

    ``omega_tail`` holds consecutive exact cell averages ending at index
    ``J + p``; it needs at least ``k_b + p`` entries.
    """
    if k_b != sys.k_b:
        raise ValueError(f"system was built for k_b={sys.k_b}, got {k_b}")
    p, J = sys.p, sys.basis.J
    omega = np.asarray(omega_tail, dtype=float)
    if omega.shape[0] < k_b + p:
        raise ValueError(f"omega_tail needs at least k_b + p = {k_b + p} values")
    idx = np.arange(J + p - omega.shape[0] + 1, J + p + 1)
    rhs = -sys.rhs_scale(dx) * _difference_at(omega, idx, k_b, [J + ell for ell in range(1, p + 1)])
    z = np.linalg.solve(sys.matrix, rhs.astype(complex))
    basis = sys.basis
    v = np.zeros(basis.indices.shape[0], dtype=complex)
    for m in range(p):
        v += z[m] * basis.generators[m]
    scale = max(1.0, float(np.abs(v).max()))
    if np.abs(v.imag).max() > IMAG_PRUNE_TOL * scale:
        raise AssumptionViolation("boundary layer has a non-negligible imaginary part")
    return CorrectorSolution(z=z, indices=basis.indices, values=v.real.copy())


@dataclass(frozen=True)
class CorrectorScaling:
    points: tuple[tuple[float, float], ...]
    slope: float


def corrector_l2_scaling(spec, J_list: Sequence[int]) -> CorrectorScaling:
    """l2 size of ``dx^{k_b} v^0`` on ``j <= J`` for each grid, plus the log-log slope.

    ``spec`` is a :class:`~advect_bc_lab.grid_solver.ProblemSpec`; its
    scheme, outflow order and initial datum ``f`` are used.
    """
    from .grid_solver import exact_projection

    if len(J_list) < 2:
        raise ValueError("need at least two grids")
    scheme = spec.scheme
    k_b = spec.outflow.extrapolation_order
    rs = find_roots(char_poly(scheme))
    count_unstable(rs, scheme.p)
    points = []
    for J in J_list:
        case = spec.with_cells(J)
        dx = case.grid.dx
        basis = steady_state_basis(rs, J)
        system = build_corrector_system(basis, k_b, scheme.p)
        tail = exact_projection(case, 0.0, J + 1 - k_b, J + scheme.p).values
        sol = solve_corrector(system, tail, k_b, dx)
        keep = sol.indices <= J
        layer = dx**k_b * sol.values[keep]
        points.append((dx, math.sqrt(dx * float(layer @ layer))))
    dxs = np.log([pt[0] for pt in points])
    norms = np.array([pt[1] for pt in points])
    if np.any(norms == 0):
        return CorrectorScaling(points=tuple(points), slope=float("nan"))
    slope = float(np.polyfit(dxs, np.log(norms), 1)[0])
    return CorrectorScaling(points=tuple(points), slope=slope)
