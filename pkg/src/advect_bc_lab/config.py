"""Declarative experiment configuration (INI sections) and built-in presets.

A config looks like::

    [scheme]
    name = lax_wendroff
    cfl = 5/6

    [problem]
    geometry = interval
    L = 6
    a = 1
    T = 8
    f = sin
    g = neg_sin

    [boundary]
    inflow_family = cell_average
    K = 1
    k_b = 2

    [refinement]
    J = 1000, 2000, 4000

    [output]
    dir = out

Numbers may be written as fractions (``5/6``). Anything left out takes the
defaults of the reference experiment (``a = 1``, ``L = 6``, ``T = 8``,
``f = sin``, ``g = neg_sin``); ``K`` defaults to the scheme order minus one
and ``k_b`` to the scheme order.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Optional

from .boundary import InflowFamily, InflowSpec, OutflowSpec
from .grid_solver import Geometry, GridConfig, ProblemSpec
from .oracles import OracleError, make_oracle
from .scheme_core import BUILDERS, build_scheme

CLAIMED_ORDERS = {"upwind": 1, "lax_wendroff": 2, "o3": 3}

KNOWN_KEYS = {
    "experiment": {"label", "description"},
    "scheme": {"name", "cfl"},
    "problem": {
        "geometry", "l", "lambda", "a", "t", "f", "f_scale", "f_shift",
        "g", "g_scale", "g_shift", "window_cells",
    },
    "boundary": {"inflow_family", "k", "k_b"},
    "refinement": {"j"},
    "output": {"dir", "csv", "plot_data"},
}


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str
    cfl: float
    geometry: str = "interval"
    L: float = 6.0
    lam: float = 5.0 / 6.0
    a: float = 1.0
    T: float = 8.0
    f: str = "sin"
    f_scale: float = 1.0
    f_shift: float = 0.0
    g: str = "neg_sin"
    g_scale: float = 1.0
    g_shift: float = 0.0
    window_cells: Optional[int] = None
    inflow_family: str = "cell_average"
    K: int = 1
    k_b: int = 2
    J_list: tuple[int, ...] = (1000,)
    out_dir: str = "out"
    write_csv: bool = True
    write_plot_data: bool = True
    label: str = "experiment"
    description: str = ""

    @property
    def claimed_order(self) -> int:
        return CLAIMED_ORDERS[self.scheme]


def _number(section: str, key: str, text: str) -> float:
    try:
        value = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        try:
            value = float(text)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: malformed number {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"[{section}] {key}: must be finite, got {text!r}")
    return value


def _integer(section: str, key: str, text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"[{section}] {key}: malformed integer {text!r}") from None


def _boolean(section: str, key: str, text: str) -> bool:
    low = text.strip().lower()
    if low in {"1", "yes", "true", "on"}:
        return True
    if low in {"0", "no", "false", "off"}:
        return False
    raise ConfigError(f"[{section}] {key}: expected a boolean, got {text!r}")


def _read(parser: configparser.ConfigParser, source: str, name: str) -> None:
    try:
        parser.read_string(source, source=name)
    except configparser.Error as exc:
        raise ConfigError(f"{name}: {exc}") from None


def parse_config(source: str, base: Optional[str] = None, name: str = "<config>") -> ExperimentConfig:
    """Parse a config document; ``base`` (e.g. a preset) is read first and overlaid."""
    parser = configparser.ConfigParser(interpolation=None, strict=False)
    if base is not None:
        _read(parser, base, "<preset>")
    _read(parser, source, name)

    for section in parser.sections():
        if section not in KNOWN_KEYS:
            raise ConfigError(f"{name}: unknown section [{section}]")
        for key in parser[section]:
            if key not in KNOWN_KEYS[section]:
                raise ConfigError(f"{name}: unknown key [{section}] {key}")

    def get(section, key):
        if parser.has_option(section, key):
            return parser.get(section, key)
        return None

    defaults = {f.name: f.default for f in fields(ExperimentConfig) if f.name not in ("scheme", "cfl")}

    scheme = get("scheme", "name")
    if scheme is None:
        raise ConfigError("[scheme] name: missing")
    scheme = scheme.strip()
    if scheme not in BUILDERS:
        raise ConfigError(f"[scheme] name: unknown scheme {scheme!r}; expected one of {sorted(BUILDERS)}")

    a = _number("problem", "a", get("problem", "a")) if get("problem", "a") else defaults["a"]
    if not a > 0:
        raise ConfigError("[problem] a: velocity must be positive")
    cfl_text, lam_text = get("scheme", "cfl"), get("problem", "lambda")
    if cfl_text is None and lam_text is None:
        raise ConfigError("[scheme] cfl: missing (give cfl or [problem] lambda)")
    cfl = _number("scheme", "cfl", cfl_text) if cfl_text is not None else None
    lam = _number("problem", "lambda", lam_text) if lam_text is not None else None
    if cfl is None:
        cfl = lam * a
    if lam is None:
        lam = cfl / a
    if not cfl > 0:
        raise ConfigError("[scheme] cfl: must be positive")
    if abs(cfl - lam * a) > 1e-14 * max(1.0, cfl):
        raise ConfigError(f"[scheme] cfl: {cfl} disagrees with lambda*a = {lam * a}")

    values = dict(scheme=scheme, cfl=cfl, lam=lam, a=a)

    geometry = (get("problem", "geometry") or defaults["geometry"]).strip()
    try:
        Geometry(geometry)
    except ValueError:
        raise ConfigError(
            f"[problem] geometry: unknown geometry {geometry!r}; "
            f"expected one of {[g.value for g in Geometry]}"
        ) from None
    values["geometry"] = geometry

    for key, attr in (("l", "L"), ("t", "T")):
        text = get("problem", key)
        values[attr] = _number("problem", attr, text) if text is not None else defaults[attr]
        if not values[attr] > 0:
            raise ConfigError(f"[problem] {attr}: must be positive")

    for which in ("f", "g"):
        text = get("problem", which)
        values[which] = text.strip() if text is not None else defaults[which]
        for suffix in ("scale", "shift"):
            key = f"{which}_{suffix}"
            text = get("problem", key)
            values[key] = _number("problem", key, text) if text is not None else defaults[key]
        try:
            make_oracle(values[which], values[f"{which}_scale"], values[f"{which}_shift"])
        except OracleError as exc:
            raise ConfigError(f"[problem] {which}: {exc}") from None

    text = get("problem", "window_cells")
    if text is not None and text.strip().lower() not in ("", "none"):
        values["window_cells"] = _integer("problem", "window_cells", text)
        if values["window_cells"] < 1:
            raise ConfigError("[problem] window_cells: must be positive")

    family = (get("boundary", "inflow_family") or defaults["inflow_family"]).strip()
    try:
        InflowFamily(family)
    except ValueError:
        raise ConfigError(
            f"[boundary] inflow_family: unknown family {family!r}; "
            "expected cell_average or cell_center"
        ) from None
    values["inflow_family"] = family
    order = CLAIMED_ORDERS[scheme]
    text = get("boundary", "k")
    values["K"] = _integer("boundary", "K", text) if text is not None else order - 1
    text = get("boundary", "k_b")
    values["k_b"] = _integer("boundary", "k_b", text) if text is not None else order
    if values["K"] < 0:
        raise ConfigError("[boundary] K: must be nonnegative")
    if values["k_b"] < 0:
        raise ConfigError("[boundary] k_b: must be nonnegative")

    text = get("refinement", "j")
    if text is not None:
        items = [item for item in text.replace(",", " ").split() if item]
        if not items:
            raise ConfigError("[refinement] J: empty list")
        J_list = tuple(_integer("refinement", "J", item) for item in items)
        if any(J < 1 for J in J_list):
            raise ConfigError("[refinement] J: cell counts must be positive")
        if any(b <= a_ for a_, b in zip(J_list, J_list[1:])):
            raise ConfigError("[refinement] J: list must be strictly increasing")
        values["J_list"] = J_list

    text = get("output", "dir")
    if text is not None:
        values["out_dir"] = text.strip()
    for key, attr in (("csv", "write_csv"), ("plot_data", "write_plot_data")):
        text = get("output", key)
        if text is not None:
            values[attr] = _boolean("output", key, text)

    for key in ("label", "description"):
        text = get("experiment", key)
        if text is not None:
            values[key] = text.strip()

    cfg = ExperimentConfig(**values)
    for J in cfg.J_list:
        try:
            GridConfig(L=cfg.L, J=J, lam=cfg.lam, a=cfg.a, T=cfg.T)
        except ValueError as exc:
            raise ConfigError(f"[refinement] J={J}: {exc}") from None
        if cfg.window_cells is not None and cfg.window_cells > J:
            raise ConfigError(f"[problem] window_cells: exceeds J={J}")
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    """Echo a config with every default made explicit; ``parse_config`` inverts it."""
    parser = configparser.ConfigParser(interpolation=None, strict=False)
    parser["experiment"] = {"label": cfg.label, "description": cfg.description}
    parser["scheme"] = {"name": cfg.scheme, "cfl": repr(cfg.cfl)}
    problem = {
        "geometry": cfg.geometry,
        "L": repr(cfg.L),
        "lambda": repr(cfg.lam),
        "a": repr(cfg.a),
        "T": repr(cfg.T),
        "f": cfg.f,
        "f_scale": repr(cfg.f_scale),
        "f_shift": repr(cfg.f_shift),
        "g": cfg.g,
        "g_scale": repr(cfg.g_scale),
        "g_shift": repr(cfg.g_shift),
        "window_cells": "none" if cfg.window_cells is None else str(cfg.window_cells),
    }
    parser["problem"] = problem
    parser["boundary"] = {"inflow_family": cfg.inflow_family, "K": str(cfg.K), "k_b": str(cfg.k_b)}
    parser["refinement"] = {"J": ", ".join(str(J) for J in cfg.J_list)}
    parser["output"] = {
        "dir": cfg.out_dir,
        "csv": str(cfg.write_csv).lower(),
        "plot_data": str(cfg.write_plot_data).lower(),
    }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def build_problem(cfg: ExperimentConfig, J: int) -> ProblemSpec:
    scheme = build_scheme(cfg.scheme, cfg.cfl)
    grid = GridConfig(L=cfg.L, J=J, lam=cfg.lam, a=cfg.a, T=cfg.T)
    f = make_oracle(cfg.f, cfg.f_scale, cfg.f_shift)
    g = make_oracle(cfg.g, cfg.g_scale, cfg.g_shift)
    geometry = Geometry(cfg.geometry)
    inflow = outflow = None
    if geometry is not Geometry.HALFLINE_OUTFLOW:
        inflow = InflowSpec(family=cfg.inflow_family, truncation=cfg.K, datum=g, velocity=cfg.a)
    if geometry is not Geometry.HALFLINE_INFLOW:
        outflow = OutflowSpec(cfg.k_b)
    return ProblemSpec(
        grid=grid, scheme=scheme, f=f, inflow=inflow, outflow=outflow,
        g=g if inflow is not None else None, geometry=geometry,
        window_cells=cfg.window_cells,
    )


_REFERENCE = """
[problem]
L = 6
a = 1
T = 8
f = sin
g = neg_sin
"""

_PRESET_BODIES = {
    "table1-dirichlet": """
[experiment]
label = table1-dirichlet
description = Lax-Wendroff, first order outflow extrapolation, plain Dirichlet inflow
[scheme]
name = lax_wendroff
cfl = 5/6
[boundary]
K = 0
k_b = 1
[refinement]
J = 1000, 2000, 4000, 8000
""",
    "table1-ilw": """
[experiment]
label = table1-ilw
description = Lax-Wendroff, first order outflow extrapolation, inverse Lax-Wendroff inflow
[scheme]
name = lax_wendroff
cfl = 5/6
[boundary]
K = 1
k_b = 1
[refinement]
J = 1000, 2000, 4000, 8000
""",
    "table2-dirichlet": """
[experiment]
label = table2-dirichlet
description = Lax-Wendroff, second order outflow extrapolation, plain Dirichlet inflow
[scheme]
name = lax_wendroff
cfl = 5/6
[boundary]
K = 0
k_b = 2
[refinement]
J = 1000, 2000, 4000, 8000
""",
    "table2-ilw": """
[experiment]
label = table2-ilw
description = Lax-Wendroff, second order outflow extrapolation, inverse Lax-Wendroff inflow
[scheme]
name = lax_wendroff
cfl = 5/6
[boundary]
K = 1
k_b = 2
[refinement]
J = 1000, 2000, 4000, 8000
""",
    "table3": """
[experiment]
label = table3
description = O3 scheme (the table caption points at the Lax-Wendroff equation, the text describes O3), third order outflow extrapolation, inverse Lax-Wendroff inflow
[scheme]
name = o3
cfl = 5/6
[boundary]
K = 2
k_b = 3
[refinement]
J = 1000, 2000, 4000
""",
    "halfline-outflow-lw": """
[experiment]
label = halfline-outflow-lw
description = Lax-Wendroff on (-inf, L] with first order extrapolation
[scheme]
name = lax_wendroff
cfl = 5/6
[problem]
geometry = halfline_outflow
[boundary]
k_b = 1
[refinement]
J = 500, 1000, 2000, 4000
""",
    "halfline-outflow-o3": """
[experiment]
label = halfline-outflow-o3
description = O3 on (-inf, L] with second order extrapolation
[scheme]
name = o3
cfl = 5/6
[problem]
geometry = halfline_outflow
[boundary]
k_b = 2
[refinement]
J = 500, 1000, 2000, 4000
""",
    "halfline-inflow": """
[experiment]
label = halfline-inflow
description = Lax-Wendroff on [0, +inf) with inverse Lax-Wendroff inflow
[scheme]
name = lax_wendroff
cfl = 5/6
[problem]
geometry = halfline_inflow
[boundary]
K = 1
[refinement]
J = 500, 1000, 2000, 4000
""",
}

PRESETS = {name: _REFERENCE + body for name, body in _PRESET_BODIES.items()}

PRESET_GROUPS = {
    "table1": ("table1-dirichlet", "table1-ilw"),
    "table2": ("table2-dirichlet", "table2-ilw"),
    "table3": ("table3",),
    "halfline-outflow": ("halfline-outflow-lw", "halfline-outflow-o3"),
    "halfline-inflow": ("halfline-inflow",),
}


def preset_names(name: str) -> tuple[str, ...]:
    """Expand a preset or preset group into individual preset names."""
    if name in PRESET_GROUPS:
        return PRESET_GROUPS[name]
    if name in PRESETS:
        return (name,)
    known = sorted(set(PRESETS) | set(PRESET_GROUPS))
    raise ConfigError(f"unknown preset {name!r}; expected one of {known}")


def load_preset(name: str, overlay: str = "") -> ExperimentConfig:
    return parse_config(overlay, base=PRESETS[name], name=f"<preset {name}>")
