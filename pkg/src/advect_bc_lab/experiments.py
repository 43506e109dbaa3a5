"""Single runs, refinement studies and scheme analysis reports."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .boundary import check_compatibility
from .config import ExperimentConfig, build_problem, dump_config
from .grid_solver import ErrorReport, Geometry, InstabilityError, run
from .scheme_core import build_scheme, check_amplification, check_consistency
from .spectral import (
    AssumptionViolation,
    build_corrector_system,
    char_poly,
    check_root_assumption,
    find_roots,
    steady_state_basis,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("J", "dx", "linf_nj", "sup_l2", "order_linf", "order_l2")


@dataclass
class ConvergenceRow:
    J: int
    dx: float
    linf_nj: float = math.nan
    sup_l2: float = math.nan
    order_linf: float = math.nan
    order_l2: float = math.nan
    wall_ms: float = math.nan
    error: Optional[str] = None


@dataclass
class ConvergenceTable:
    label: str
    rows: list[ConvergenceRow]
    config_echo: str
    metadata: dict = field(default_factory=dict)

    def orders(self, norm: str = "linf") -> list[float]:
        attr = "order_linf" if norm == "linf" else "order_l2"
        return [getattr(row, attr) for row in self.rows[1:]]


def _fmt(value: float) -> str:
    return repr(float(value)) if math.isfinite(value) else "nan"


def _timed_run(cfg: ExperimentConfig, J: int) -> tuple[ErrorReport, float]:
    spec = build_problem(cfg, J)
    start = time.perf_counter()
    report = run(spec)
    return report, 1e3 * (time.perf_counter() - start)


def _row_job(args) -> ConvergenceRow:
    cfg, J = args
    dx = cfg.L / J
    try:
        report, wall = _timed_run(cfg, J)
    except (InstabilityError, ValueError, FloatingPointError) as exc:
        return ConvergenceRow(J=J, dx=dx, error=f"{type(exc).__name__}: {exc}")
    return ConvergenceRow(J=J, dx=dx, linf_nj=report.linf_nj, sup_l2=report.sup_l2, wall_ms=wall)


def _rate(coarse: ConvergenceRow, fine: ConvergenceRow, attr: str) -> float:
    ec, ef = getattr(coarse, attr), getattr(fine, attr)
    if not (math.isfinite(ec) and math.isfinite(ef)) or ec <= 0 or ef <= 0:
        return math.nan
    return math.log(ec / ef) / math.log(coarse.dx / fine.dx)


def compatibility_order(cfg: ExperimentConfig) -> Optional[int]:
    spec = build_problem(cfg, cfg.J_list[0])
    if spec.geometry is Geometry.HALFLINE_OUTFLOW:
        return None
    return check_compatibility(spec.f, spec.g, cfg.a, cfg.claimed_order)


def cmd_run(cfg: ExperimentConfig, out_dir: Optional[Path] = None, J: Optional[int] = None) -> ErrorReport:
    """One run; writes per-step errors as CSV plus a JSON summary."""
    if J is None:
        if len(cfg.J_list) != 1:
            raise ValueError("run needs a single J; pick one with --J")
        J = cfg.J_list[0]
    compat = compatibility_order(cfg)
    if compat is not None and compat < cfg.claimed_order:
        logger.warning("data are compatible only up to order %d at the corner", compat)
    report, wall = _timed_run(cfg, J)
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    if cfg.write_csv:
        out.mkdir(parents=True, exist_ok=True)
        stem = out / f"{cfg.label}_J{J}"
        dt = cfg.lam * cfg.L / J
        with open(f"{stem}_steps.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("n", "t", "linf", "l2"))
            for n, (e_inf, e_2) in enumerate(zip(report.per_step_linf, report.per_step_l2)):
                w.writerow((n, _fmt(n * dt), _fmt(e_inf), _fmt(e_2)))
        meta = {
            "label": cfg.label,
            "J": J,
            "dx": report.dx,
            "steps": report.steps,
            "linf_nj": report.linf_nj,
            "sup_l2": report.sup_l2,
            "compatibility_order": compat,
            "wall_ms": wall,
            "config": dump_config(cfg),
        }
        with open(f"{stem}_summary.json", "w") as fh:
            json.dump(meta, fh, indent=2)
    return report


def cmd_converge(cfg: ExperimentConfig, out_dir: Optional[Path] = None, jobs: int = 1) -> ConvergenceTable:
    """Run every ``J`` of the refinement list and tabulate errors and observed orders."""
    if len(cfg.J_list) < 2:
        raise ValueError("a convergence study needs at least two values of J")
    tasks = [(cfg, J) for J in cfg.J_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row_job, tasks))
    else:
        rows = [_row_job(t) for t in tasks]
    for prev, row in zip(rows, rows[1:]):
        row.order_linf = _rate(prev, row, "linf_nj")
        row.order_l2 = _rate(prev, row, "sup_l2")
    table = ConvergenceTable(
        label=cfg.label,
        rows=rows,
        config_echo=dump_config(cfg),
        metadata={
            "description": cfg.description,
            "compatibility_order": compatibility_order(cfg),
            "wall_ms": {str(row.J): row.wall_ms for row in rows},
            "failures": {str(row.J): row.error for row in rows if row.error},
        },
    )
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    if cfg.write_csv or cfg.write_plot_data:
        out.mkdir(parents=True, exist_ok=True)
    if cfg.write_csv:
        write_convergence_csv(table, out / f"{cfg.label}_convergence.csv")
        with open(out / f"{cfg.label}_convergence.meta.json", "w") as fh:
            json.dump({"label": cfg.label, "config": table.config_echo, **table.metadata}, fh, indent=2)
    if cfg.write_plot_data:
        write_plot_data(table, out / f"{cfg.label}_convergence.dat")
    return table


def write_convergence_csv(table: ConvergenceTable, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in table.rows:
            w.writerow((row.J, _fmt(row.dx), _fmt(row.linf_nj), _fmt(row.sup_l2),
                        _fmt(row.order_linf), _fmt(row.order_l2)))


def write_plot_data(table: ConvergenceTable, path: Path) -> None:
    """Whitespace-separated columns for a log-log plot (gnuplot ``using 1:2``)."""
    with open(path, "w") as fh:
        fh.write(f"# {table.label}\n# dx linf_nj sup_l2 J\n")
        for row in table.rows:
            fh.write(f"{_fmt(row.dx)} {_fmt(row.linf_nj)} {_fmt(row.sup_l2)} {row.J}\n")


def format_table(table: ConvergenceTable) -> str:
    """Console rendering with two significant digits, as in the published tables."""
    lines = [f"{table.label}", f"{'J':>7} {'linf_nj':>9} {'order':>6} {'sup_l2':>9} {'order':>6}"]
    for row in table.rows:
        if row.error:
            lines.append(f"{row.J:>7}  failed: {row.error}")
            continue
        o1 = f"{row.order_linf:6.2f}" if math.isfinite(row.order_linf) else " " * 6
        o2 = f"{row.order_l2:6.2f}" if math.isfinite(row.order_l2) else " " * 6
        lines.append(f"{row.J:>7} {row.linf_nj:9.1e} {o1} {row.sup_l2:9.1e} {o2}")
    return "\n".join(lines)


def _complex_json(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def cmd_analyze(cfg: ExperimentConfig, out_dir: Optional[Path] = None) -> dict:
    """Structural report for the configured scheme.

    The ``violations`` entry lists every failed check; an empty list means
    all consistency, stability and root assumptions hold.
    """
    s = build_scheme(cfg.scheme, cfg.cfl)
    violations = []
    moments = check_consistency(s, s.claimed_order + 1)
    if moments.achieved_order < s.claimed_order:
        violations.append(f"consistency order {moments.achieved_order} < {s.claimed_order}")
    amp = check_amplification(s)
    if not amp.satisfied:
        violations.append(f"amplification sup {amp.sup_modulus:.6g} > 1")
    cp = char_poly(s)
    report = {
        "scheme": s.name,
        "cfl": s.cfl,
        "r": s.r,
        "p": s.p,
        "weights": list(s.weights),
        "claimed_order": s.claimed_order,
        "consistency": {
            "orders_checked": list(moments.orders_checked),
            "residuals": list(moments.residuals),
            "achieved_order": moments.achieved_order,
        },
        "amplification": {
            "sup_modulus": amp.sup_modulus,
            "argmax_theta": amp.argmax_theta,
            "verdict": "satisfied" if amp.satisfied else "violated",
        },
        "char_poly": {"coefficients_ascending": list(cp.coefficients), "degree": cp.degree},
    }
    try:
        rs = find_roots(cp)
    except ValueError as exc:
        violations.append(f"roots: {exc}")
        report["roots"] = None
    else:
        report["roots"] = [
            {"value": _complex_json(rt.value), "modulus": abs(rt.value),
             "multiplicity": rt.multiplicity, "region": rt.region.value}
            for rt in rs.roots
        ]
        root_ok = check_root_assumption(rs)
        if not root_ok:
            violations.append("a root other than a simple 1 lies on the unit circle")
        unstable = sum(rt.multiplicity for rt in rs.unstable())
        report["root_assumption"] = root_ok
        report["unstable_count"] = unstable
        if unstable != s.p:
            violations.append(f"{unstable} unstable roots, expected p={s.p}")
        correctors = []
        if unstable == s.p and s.p >= 1:
            basis = steady_state_basis(rs, 0)
            for k_b in range(1, s.claimed_order + 1):
                try:
                    system = build_corrector_system(basis, k_b, s.p)
                except AssumptionViolation as exc:
                    violations.append(str(exc))
                    correctors.append({"k_b": k_b, "error": str(exc)})
                    continue
                correctors.append({
                    "k_b": k_b,
                    "matrix": [[_complex_json(z) for z in row] for row in system.matrix],
                    "condition_number": system.condition_number,
                })
        report["corrector_systems"] = correctors
    report["violations"] = violations
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    if cfg.write_csv:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"{cfg.label}_analysis.json", "w") as fh:
            json.dump(report, fh, indent=2)
    return report


def format_analysis(report: dict) -> str:
    lines = [
        f"scheme {report['scheme']}  cfl={report['cfl']:.6g}  r={report['r']} p={report['p']}",
        f"consistency order {report['consistency']['achieved_order']} "
        f"(claimed {report['claimed_order']})",
        f"amplification sup |gamma| = {report['amplification']['sup_modulus']:.6f} "
        f"at theta = {report['amplification']['argmax_theta']:.6f}: "
        f"{report['amplification']['verdict']}",
        "A(X) coefficients (ascending): "
        + ", ".join(f"{c:.10g}" for c in report["char_poly"]["coefficients_ascending"]),
    ]
    if report.get("roots") is None:
        lines.append("roots: unavailable")
    else:
        for rt in report["roots"]:
            z = complex(*rt["value"])
            lines.append(f"  root {z:.10g}  |z|={rt['modulus']:.6g}  mult={rt['multiplicity']}  {rt['region']}")
        lines.append(f"root assumption: {'satisfied' if report['root_assumption'] else 'violated'}")
        lines.append(f"unstable roots: {report['unstable_count']} (p = {report['p']})")
        for entry in report.get("corrector_systems", []):
            if "error" in entry:
                lines.append(f"  k_b={entry['k_b']}: {entry['error']}")
            else:
                lines.append(f"  k_b={entry['k_b']}: cond = {entry['condition_number']:.4g}")
    if report["violations"]:
        lines.append("violations: " + "; ".join(report["violations"]))
    return "\n".join(lines)
