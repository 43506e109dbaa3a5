"""Time stepping on the interval and on the two half-line truncations.

Cells are indexed as in the analysis: cell ``j`` is ``(x_{j-1}, x_j)`` with
``x_j = j * dx``; the physical interval ``(0, L)`` holds cells ``1..J``.

Geometries
----------
``interval``
    ILW inflow ghosts on the left, extrapolation ghosts on the right.
``halfline_outflow``
    The problem on ``(-inf, L)``: extrapolation at ``x = L`` only. The
    grid is extended to the left by ``r * N`` cells whose own ghost cells
    hold the exact solution, so the comparison window ``1..J`` never sees
    the artificial left edge.
``halfline_inflow``
    The problem on ``(0, +inf)``: ILW at ``x = 0`` only, the grid being
    extended to the right by ``p * N`` cells in the same way.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .boundary import InflowSpec, OutflowSpec, fill_inflow_ghosts, fill_outflow_ghosts
from .oracles import DataOracle
from .scheme_core import SchemeCoefficients, apply_stencil

logger = logging.getLogger(__name__)

GAUSS_POINTS = 5
BLOWUP_FACTOR = 1e6
CFL_MATCH_TOL = 1e-14

_GL_NODES, _GL_WEIGHTS = leggauss(GAUSS_POINTS)


class Geometry(str, enum.Enum):
    INTERVAL = "interval"
    HALFLINE_INFLOW = "halfline_inflow"
    HALFLINE_OUTFLOW = "halfline_outflow"


class InstabilityError(RuntimeError):
    """The discrete solution blew up; ``step`` is the offending time level."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class GridConfig:
    L: float
    J: int
    lam: float
    a: float
    T: float

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.J < 1:
            raise ValueError("J must be a positive integer")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.a > 0:
            raise ValueError("velocity a must be positive")
        if self.steps < 1:
            raise ValueError(f"T={self.T} is shorter than one time step dt={self.dt}")

    @property
    def dx(self) -> float:
        return self.L / self.J

    @property
    def dt(self) -> float:
        return self.lam * self.dx

    @property
    def cfl(self) -> float:
        return self.lam * self.a

    @property
    def steps(self) -> int:
        # T/dt is usually an integer up to rounding (e.g. 8 / 0.005000000000000001)
        return int(math.floor(self.T / self.dt + 1e-9))

    def with_cells(self, J: int) -> "GridConfig":
        return replace(self, J=J)


@dataclass(frozen=True)
class ProblemSpec:
    grid: GridConfig
    scheme: SchemeCoefficients
    f: DataOracle
    inflow: Optional[InflowSpec] = None
    outflow: Optional[OutflowSpec] = None
    g: Optional[DataOracle] = None
    geometry: Geometry = Geometry.INTERVAL
    window_cells: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "geometry", Geometry(self.geometry))
        cfl = self.grid.cfl
        if abs(self.scheme.cfl - cfl) > CFL_MATCH_TOL * max(1.0, abs(cfl)):
            raise ValueError(
                f"scheme built for cfl={self.scheme.cfl} but lambda*a={cfl}"
            )
        geo = self.geometry
        if geo is not Geometry.HALFLINE_OUTFLOW:
            if self.inflow is None:
                raise ValueError(f"{geo.value} geometry needs an inflow spec")
            if self.g is None:
                object.__setattr__(self, "g", self.inflow.datum)
            if abs(self.inflow.velocity - self.grid.a) > CFL_MATCH_TOL * self.grid.a:
                raise ValueError("inflow velocity differs from the grid velocity")
        if geo is not Geometry.HALFLINE_INFLOW:
            if self.outflow is None:
                raise ValueError(f"{geo.value} geometry needs an outflow spec")
            if self.outflow.extrapolation_order > self.grid.J:
                raise ValueError("fewer interior cells than the extrapolation order")
        if self.window_cells is not None and not 1 <= self.window_cells <= self.grid.J:
            raise ValueError("window_cells must lie in 1..J")

    def with_cells(self, J: int) -> "ProblemSpec":
        return replace(self, grid=self.grid.with_cells(J))


@dataclass(frozen=True)
class Layout:
    """Index bookkeeping: interior ``j_lo..j_hi`` and comparison window."""

    j_lo: int
    j_hi: int
    r: int
    p: int
    win_lo: int
    win_hi: int

    @property
    def first_index(self) -> int:
        """Index ``j`` of ``values[0]``."""
        return self.j_lo - self.r

    @property
    def size(self) -> int:
        return self.j_hi - self.j_lo + 1 + self.r + self.p

    def slot(self, j: int) -> int:
        return j - self.first_index


def layout_for(spec: ProblemSpec) -> Layout:
    s, J, N = spec.scheme, spec.grid.J, spec.grid.steps
    j_lo, j_hi = 1, J
    if spec.geometry is Geometry.HALFLINE_OUTFLOW:
        j_lo = 1 - s.r * N
    elif spec.geometry is Geometry.HALFLINE_INFLOW:
        j_hi = J + s.p * N
    ncells = spec.window_cells or J
    if spec.geometry is Geometry.HALFLINE_INFLOW:
        win_lo, win_hi = 1, ncells
    else:
        win_lo, win_hi = J - ncells + 1, J
    return Layout(j_lo=j_lo, j_hi=j_hi, r=s.r, p=s.p, win_lo=win_lo, win_hi=win_hi)


@dataclass
class SolutionState:
    """One time level; ``values[i]`` is ``u_j`` with ``j = first_index + i``."""

    n: int
    values: np.ndarray
    first_index: int

    def at(self, j: int) -> float:
        return float(self.values[j - self.first_index])

    def cells(self, j0: int, j1: int) -> np.ndarray:
        """Values ``u_{j0}, ..., u_{j1}``."""
        return self.values[j0 - self.first_index : j1 - self.first_index + 1]


@dataclass(frozen=True)
class ExactProjection:
    values: np.ndarray
    first_index: int = 1


@dataclass
class ErrorReport:
    linf_nj: float
    sup_l2: float
    per_step_linf: np.ndarray
    per_step_l2: np.ndarray
    J: int
    dx: float
    steps: int
    final_state: Optional[SolutionState] = field(default=None, repr=False)


def _gauss_average(func, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Mean of ``func`` on each ``[lo, hi]`` by 5-point Gauss-Legendre."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[..., None] + half[..., None] * _GL_NODES
    return 0.5 * (func(pts) @ _GL_WEIGHTS)


def cell_averages(f: DataOracle, lo, hi) -> np.ndarray:
    """``(1/(hi-lo)) * integral of f`` on each cell."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if f.has_antiderivative:
        return (f.antiderivative_at(hi) - f.antiderivative_at(lo)) / (hi - lo)
    return _gauss_average(f.value_at, lo, hi)


def exact_cell_averages(
    f: DataOracle, g: Optional[DataOracle], a: float, t: float, lo, hi
) -> np.ndarray:
    """Cell averages of the characteristic solution at time ``t``.

    The solution is ``f(x - a t)`` for ``x >= a t`` and ``g(t - x/a)``
    behind the front; with ``g=None`` the ``f`` branch is used everywhere
    (whole-line transport). Cells containing ``x = a t`` are split there.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    width = hi - lo
    front = a * t
    if g is None or t == 0.0:
        return cell_averages(f, lo - front, hi - front)

    if f.has_antiderivative and g.has_antiderivative:
        # continuous primitive of u(t, .) vanishing at the front
        F0 = f.antiderivative_at(0.0)
        G0 = g.antiderivative_at(0.0)

        def primitive(x):
            ahead = f.antiderivative_at(np.maximum(x, front) - front) - F0
            behind = -a * (g.antiderivative_at(t - np.minimum(x, front) / a) - G0)
            return np.where(x >= front, ahead, behind)

        return (primitive(hi) - primitive(lo)) / width

    cut_lo = np.clip(front, lo, hi)
    w_behind = cut_lo - lo
    w_ahead = hi - cut_lo
    total = np.zeros_like(width)
    m = w_ahead > 0
    if np.any(m):
        total[m] += w_ahead[m] * cell_averages(f, cut_lo[m] - front, hi[m] - front)
    m = w_behind > 0
    if np.any(m):
        # substitute s = t - x/a: integral of g(t - x/a) dx = a * integral of g(s) ds
        s_lo = t - cut_lo[m] / a
        s_hi = t - lo[m] / a
        total[m] += a * (s_hi - s_lo) * _gauss_average(g.value_at, s_lo, s_hi)
    return total / width


def exact_cell_average(
    f: DataOracle, g: Optional[DataOracle], a: float, t: float, cell: tuple[float, float]
) -> float:
    x_lo, x_hi = cell
    if not x_lo < x_hi:
        raise ValueError("cell must satisfy x_lo < x_hi")
    return float(exact_cell_averages(f, g, a, t, np.array([x_lo]), np.array([x_hi]))[0])


def _edges(j0: int, j1: int, dx: float) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(j0, j1 + 1, dtype=float)
    return (j - 1) * dx, j * dx


def project_initial(f: DataOracle, grid: GridConfig, j_range: tuple[int, int]) -> ExactProjection:
    """Cell averages of ``f`` on cells ``j_range[0]..j_range[1]`` (inclusive)."""
    j0, j1 = j_range
    lo, hi = _edges(j0, j1, grid.dx)
    return ExactProjection(values=cell_averages(f, lo, hi), first_index=j0)


def exact_projection(spec: ProblemSpec, t: float, j0: int, j1: int) -> ExactProjection:
    """Exact cell averages for the solution the geometry approximates."""
    g = None if spec.geometry is Geometry.HALFLINE_OUTFLOW else spec.g
    lo, hi = _edges(j0, j1, spec.grid.dx)
    return ExactProjection(
        values=exact_cell_averages(spec.f, g, spec.grid.a, t, lo, hi), first_index=j0
    )


def fill_ghosts(values: np.ndarray, spec: ProblemSpec, layout: Layout, t: float) -> None:
    """Refresh both ghost layers of ``values`` in place for time ``t``."""
    r, p, dx = layout.r, layout.p, spec.grid.dx
    if r:
        if spec.geometry is Geometry.HALFLINE_OUTFLOW:
            ghosts = exact_projection(spec, t, layout.j_lo - r, layout.j_lo - 1).values
        else:
            ghosts = fill_inflow_ghosts(spec.inflow, t, dx, r)
        values[:r] = ghosts
    if p:
        if spec.geometry is Geometry.HALFLINE_INFLOW:
            ghosts = exact_projection(spec, t, layout.j_hi + 1, layout.j_hi + p).values
        else:
            k_b = spec.outflow.extrapolation_order
            end = values.shape[0] - p
            ghosts = fill_outflow_ghosts(spec.outflow, values[end - k_b : end], p)
        values[values.shape[0] - p :] = ghosts


def initial_state(spec: ProblemSpec) -> SolutionState:
    lay = layout_for(spec)
    values = np.zeros(lay.size)
    proj = project_initial(spec.f, spec.grid, (lay.j_lo, lay.j_hi))
    values[lay.r : lay.r + proj.values.shape[0]] = proj.values
    fill_ghosts(values, spec, lay, 0.0)
    return SolutionState(n=0, values=values, first_index=lay.first_index)


def step(state: SolutionState, spec: ProblemSpec, layout: Optional[Layout] = None) -> SolutionState:
    """Advance one time level; the returned state has fresh ghosts."""
    lay = layout or layout_for(spec)
    new = np.empty_like(state.values)
    new[lay.r : lay.size - lay.p] = apply_stencil(spec.scheme, state.values)
    n = state.n + 1
    fill_ghosts(new, spec, lay, n * spec.grid.dt)
    return SolutionState(n=n, values=new, first_index=state.first_index)


def iterate(spec: ProblemSpec) -> Iterator[SolutionState]:
    """Yield the states at levels ``0..N``."""
    lay = layout_for(spec)
    state = initial_state(spec)
    yield state
    for _ in range(spec.grid.steps):
        state = step(state, spec, lay)
        yield state


def run(spec: ProblemSpec, keep_final: bool = False) -> ErrorReport:
    """Run to ``N = floor(T/dt)`` and measure the error against exact cell averages.

    Errors are taken at every level ``0..N`` over the comparison window.
    Raises :class:`InstabilityError` on blow-up.
    """
    lay = layout_for(spec)
    grid = spec.grid
    dx, N = grid.dx, grid.steps
    linf = np.empty(N + 1)
    l2 = np.empty(N + 1)
    threshold = None
    state = None
    for state in iterate(spec):
        n = state.n
        u = state.cells(lay.win_lo, lay.win_hi)
        if threshold is None:
            ref = float(np.max(np.abs(state.values)))
            threshold = BLOWUP_FACTOR * (ref if ref > 0 else 1.0)
        peak = float(np.max(np.abs(state.values)))
        if not math.isfinite(peak) or peak > threshold:
            raise InstabilityError(
                f"solution exceeded {threshold:.3g} at step {n} of {N} "
                f"(scheme {spec.scheme.name}, cfl={spec.scheme.cfl})",
                step=n,
            )
        w = exact_projection(spec, n * grid.dt, lay.win_lo, lay.win_hi).values
        err = np.abs(u - w)
        linf[n] = err.max()
        l2[n] = math.sqrt(dx * float(err @ err))
    logger.debug("run J=%d steps=%d linf=%.3e", grid.J, N, linf.max())
    return ErrorReport(
        linf_nj=float(linf.max()),
        sup_l2=float(l2.max()),
        per_step_linf=linf,
        per_step_l2=l2,
        J=grid.J,
        dx=dx,
        steps=N,
        final_state=state if keep_final else None,
    )


def observed_order(coarse: ErrorReport, fine: ErrorReport, norm: str = "linf") -> float:
    """Convergence rate between two refinements, ``log(e_c/e_f) / log(dx_c/dx_f)``.

    For a doubling ``fine.J == 2 * coarse.J`` this is ``log2(e_c / e_f)``.
    """
    attr = {"linf": "linf_nj", "l2": "sup_l2"}[norm]
    ec, ef = getattr(coarse, attr), getattr(fine, attr)
    if not (math.isfinite(ec) and math.isfinite(ef)) or ec <= 0 or ef <= 0:
        raise ValueError(f"cannot take an order from errors {ec!r} and {ef!r}")
    if fine.J == coarse.J:
        raise ValueError("the two reports use the same grid")
    return math.log(ec / ef) / math.log(coarse.dx / fine.dx)
