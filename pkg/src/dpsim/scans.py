"""Parameter sweeps over detuning-pulse sequences and their CSV tables.

Grid points are independent and may be evaluated on a thread pool (the
compiled integrator releases the GIL). Results are stored by grid index,
so tables are bit-identical for any thread count.
"""

from __future__ import annotations

import io
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from dpsim import analytic
from dpsim.phases import bb_phases, cp_limit_propagator, nb_phases, universal_phases
from dpsim.su2 import Propagator2
from dpsim.tdse import DEFAULT_CONFIG, IntegratorConfig, propagate
from dpsim.waveforms import PulseShapeKind, build_sequence, mean_abs_offset, model_sequence, sample

ENGINES = ("analytic", "tdse", "cp-limit")
ENGINE_ALIASES = {"numeric": "tdse", "cp": "cp-limit"}
LOG_FLOOR = 1e-16
UNITS_NOTE = "hbar=1; time in T/pi; frequency in pi/T; segment duration pi; Omega=alpha"


# -- sequence families ----------------------------------------------------

@dataclass(frozen=True)
class Family:
    """What to simulate.

    ``A``, ``B``, ``BB`` and ``NB`` are the Rosen-Zener layouts with pulse
    area pi*delta. ``bb``, ``nb``, ``universal``, ``none`` (all phases zero)
    and ``custom`` are phase lists realized with one pulse per boundary.
    """

    name: str
    n: int = 3
    delta: float | None = None
    phases: tuple[float, ...] | None = None
    normalize_areas: bool = False

    LAYOUTS = ("A", "B", "BB", "NB")
    PHASE_FAMILIES = ("bb", "nb", "universal", "none", "custom")

    def __post_init__(self):
        name = self.name if self.name in self.LAYOUTS else self.name.lower()
        if name.upper() in ("A", "B"):
            name = name.upper()
        if name not in self.LAYOUTS + self.PHASE_FAMILIES:
            raise ValueError(f"unknown sequence family {self.name!r}")
        object.__setattr__(self, "name", name)
        if name == "custom":
            if not self.phases:
                raise ValueError("custom family needs a phase list")
            object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
            object.__setattr__(self, "n", len(self.phases))
        if name == "universal":
            object.__setattr__(self, "n", 5)
        if name in self.LAYOUTS and self.delta is None:
            object.__setattr__(self, "delta", 0.5 if name == "A" else 2.0 / 3.0)

    @property
    def is_layout(self) -> bool:
        return self.name in self.LAYOUTS

    def phase_list(self) -> tuple[float, ...]:
        if self.name == "bb":
            return bb_phases(self.n)
        if self.name == "nb":
            return nb_phases(self.n)
        if self.name == "universal":
            return universal_phases()
        if self.name == "none":
            return (0.0,) * self.n
        if self.name == "custom":
            return self.phases
        raise ValueError(f"layout {self.name} has no plain phase list")

    def reference(self, alpha: float) -> float:
        """Single resonant pulse: sin^2(pi alpha/4) for A and B, sin^2(pi alpha/2) otherwise."""
        if self.name in ("A", "B"):
            return math.sin(0.25 * math.pi * alpha) ** 2
        return math.sin(0.5 * math.pi * alpha) ** 2

    def error(self, u: Propagator2) -> float:
        """Distance from the target: |P - 1/2| (A, B), P (NB, nb), 1 - P otherwise."""
        if self.name in ("A", "B"):
            return abs(abs(u.b) ** 2 - 0.5)
        if self.name in ("NB", "nb"):
            return abs(u.b) ** 2
        return abs(u.a) ** 2

    def describe(self) -> dict:
        out = {"family": self.name}
        if self.is_layout:
            out["delta"] = self.delta
        else:
            out["n"] = self.n
            out["phases"] = " ".join(repr(p) for p in self.phase_list())
            out["normalize_areas"] = self.normalize_areas
        return out


def evaluate(family: Family, engine: str, alpha: float, tau: float = 0.05, shape=PulseShapeKind.SECH,
             static_detuning: float = 0.0, cfg: IntegratorConfig | None = None) -> Propagator2:
    """Propagator of one grid point."""
    engine = ENGINE_ALIASES.get(engine, engine)
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {', '.join(ENGINES)}")
    if engine == "analytic":
        if not family.is_layout:
            raise ValueError("analytic engine supports only the A, B, BB and NB layouts")
        if static_detuning:
            raise ValueError("analytic engine has no static detuning")
        return analytic.model_propagator(family.name, analytic.RzParams(alpha, tau, family.delta))
    if engine == "cp-limit":
        if family.is_layout:
            if static_detuning:
                phases, durations = analytic.limit_layout(family.name, family.delta)
                return cp_limit_propagator(phases, alpha, static_detuning, durations)
            return analytic.limit_model_propagator(family.name, alpha, family.delta)
        return cp_limit_propagator(family.phase_list(), alpha, static_detuning)
    if family.is_layout:
        spec = model_sequence(family.name, alpha, tau, family.delta, shape, static_detuning)
    else:
        spec = build_sequence(family.phase_list(), alpha, tau, shape, static_detuning, family.normalize_areas)
    return propagate(sample(spec), cfg or DEFAULT_CONFIG)


# -- tables ---------------------------------------------------------------

@dataclass
class ScanTable:
    """Row-major grid of parameter tuples and values with provenance metadata."""

    axes: list[str]
    columns: list[str]
    data: np.ndarray
    metadata: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float).reshape(-1, len(self.axes) + len(self.columns))

    @property
    def names(self) -> list[str]:
        return self.axes + self.columns

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self.names.index(name)]

    def grid(self, axis: str) -> np.ndarray:
        """Distinct values along one axis, in grid order."""
        col = self[axis]
        _, idx = np.unique(col, return_index=True)
        return col[np.sort(idx)]

    def to_text(self) -> str:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}={value}\n")
        for key, value in self.summary.items():
            buf.write(f"# summary.{key}={value!r}\n")
        buf.write(",".join(self.names) + "\n")
        for row in self.data:
            buf.write(",".join(format(v, ".17g") for v in row) + "\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str, n_axes: int | None = None) -> "ScanTable":
        metadata, summary, rows, header = {}, {}, [], None
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key.startswith("summary."):
                    summary[key[len("summary."):]] = float(value)
                else:
                    metadata[key] = value
            elif header is None:
                header = line.strip().split(",")
            else:
                rows.append([float(v) for v in line.split(",")])
        if header is None:
            raise ValueError("CSV has no header row")
        if n_axes is None:
            n_axes = len(metadata.get("axes", header[0]).split(";"))
        data = np.array(rows, dtype=float).reshape(-1, len(header))
        return cls(header[:n_axes], header[n_axes:], data, metadata, summary)

    @classmethod
    def read_csv(cls, path) -> "ScanTable":
        return cls.from_text(Path(path).read_text())


def _check_grid(name: str, grid) -> np.ndarray:
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0 or not np.all(np.isfinite(grid)):
        raise ValueError(f"{name} grid must be non-empty and finite")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError(f"{name} grid must be strictly increasing")
    return grid


def _probability(u: Propagator2) -> float:
    p = abs(u.b) ** 2
    if not -1e-9 <= p <= 1 + 1e-9:
        raise ValueError(f"transition probability {p} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def default_threads() -> int:
    env = os.environ.get("DPSIM_THREADS")
    n = os.cpu_count() or 1
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            pass
    return n


def _map(fn: Callable, items: Sequence, threads: int | None) -> list:
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _metadata(family: Family, engine: str, axes: Iterable[str], cfg: IntegratorConfig | None, **extra) -> dict:
    meta = {"units": UNITS_NOTE, "axes": ";".join(axes), "engine": engine}
    meta.update(family.describe())
    meta.update({k: v for k, v in extra.items()})
    if engine == "tdse":
        cfg = cfg or DEFAULT_CONFIG
        meta.update(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, max_step=cfg.max_step, picture=cfg.picture)
    meta["log_floor"] = LOG_FLOOR
    return meta


def profile_scan(family: Family, alpha_grid, engine: str = "tdse", tau: float = 0.05,
                 shape=PulseShapeKind.SECH, static_detuning: float = 0.0,
                 cfg: IntegratorConfig | None = None, threads: int | None = None) -> ScanTable:
    """P(alpha) with the single-pulse reference and log10 of the target error."""
    alphas = _check_grid("alpha", alpha_grid)
    shape = PulseShapeKind.parse(shape)
    engine = ENGINE_ALIASES.get(engine, engine)
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {', '.join(ENGINES)}")
    if engine == "analytic" and not family.is_layout:
        raise ValueError("analytic engine supports only the A, B, BB and NB layouts")

    def point(a):
        u = evaluate(family, engine, float(a), tau, shape, static_detuning, cfg)
        return (_probability(u), family.reference(float(a)), math.log10(max(family.error(u), LOG_FLOOR)))

    rows = _map(point, list(alphas), threads)
    data = np.column_stack([alphas, np.array(rows).reshape(-1, 3)])
    meta = _metadata(family, engine, ["alpha"], cfg, tau=0.0 if engine == "cp-limit" else tau,
                     shape=shape.value, static_detuning=static_detuning)
    return ScanTable(["alpha"], ["P", "P_ref", "log10_error"], data, meta)


def width_study(family: Family, alpha_grid, tau_grid, shape=PulseShapeKind.SECH,
                cfg: IntegratorConfig | None = None, window=(0.9, 1.1), threads: int | None = None) -> ScanTable:
    """P(tau, alpha) next to the zero-width profile.

    Summary per tau: the largest |P - P_cp| inside ``window`` and over the
    whole alpha grid.
    """
    alphas = _check_grid("alpha", alpha_grid)
    taus = _check_grid("tau", tau_grid)
    if np.any(taus <= 0):
        raise ValueError("tau values must be positive")
    shape = PulseShapeKind.parse(shape)
    cp = np.array([_probability(evaluate(family, "cp-limit", float(a))) for a in alphas])
    pts = list(itertools.product(taus, alphas))
    probs = np.array(_map(lambda ta: _probability(evaluate(family, "tdse", float(ta[1]), float(ta[0]), shape,
                                                                0.0, cfg)), pts, threads))
    data = np.column_stack([np.array(pts), probs, np.tile(cp, len(taus))])
    inside = (alphas >= window[0]) & (alphas <= window[1])
    summary = {}
    for i, tau in enumerate(taus):
        dev = np.abs(probs[i * len(alphas):(i + 1) * len(alphas)] - cp)
        summary[f"window_dev@tau={float(tau)!r}"] = float(dev[inside].max()) if inside.any() else float("nan")
        summary[f"sup_dev@tau={float(tau)!r}"] = float(dev.max())
    meta = _metadata(family, "tdse", ["tau", "alpha"], cfg, shape=shape.value, window=f"{window[0]}:{window[1]}")
    return ScanTable(["tau", "alpha"], ["P", "P_cp"], data, meta, summary)


def scan2d_universal(alpha_grid, detuning_grid, tau: float, shape=PulseShapeKind.SECH,
                     cfg: IntegratorConfig | None = None, family: Family | None = None,
                     threads: int | None = None) -> ScanTable:
    """P(alpha, static detuning) for the five-pulse universal sequence.

    tau = 0 evaluates the composite pulse itself. The detuning axis is in
    units of the nominal Rabi frequency (alpha = 1), i.e. pi/T.
    """
    family = family or Family("universal")
    alphas = _check_grid("alpha", alpha_grid)
    dets = _check_grid("detuning", detuning_grid)
    shape = PulseShapeKind.parse(shape)
    if tau < 0:
        raise ValueError("tau must be non-negative")
    engine = "cp-limit" if tau == 0 else "tdse"
    pts = list(itertools.product(alphas, dets))
    probs = _map(lambda p: _probability(evaluate(family, engine, float(p[0]), tau, shape, float(p[1]), cfg)),
                 pts, threads)
    data = np.column_stack([np.array(pts), np.array(probs)])
    meta = _metadata(family, engine, ["alpha", "detuning"], cfg, tau=tau, shape=shape.value,
                     detuning_units="nominal Rabi frequency (pi/T)")
    return ScanTable(["alpha", "detuning"], ["P"], data, meta)


SHAPES = tuple(PulseShapeKind)
WIDTH_RULES = ("nominal", "moment")


def moment_matched_tau(kind, tau: float) -> float:
    """Width giving ``kind`` the same mean |t| as a sech pulse of width tau."""
    return tau * mean_abs_offset(PulseShapeKind.SECH, 1.0) / mean_abs_offset(kind, 1.0)


def shape_comparison(family: Family, tau: float, alpha_grid, shapes: Sequence = SHAPES,
                     cfg: IntegratorConfig | None = None, width_rule: str = "nominal",
                     threads: int | None = None) -> ScanTable:
    """TDSE profiles for several pulse shapes of equal area.

    ``nominal`` gives every shape the width parameter tau; ``moment``
    rescales each so that its mean |t| equals that of the sech pulse.
    """
    alphas = _check_grid("alpha", alpha_grid)
    if not tau > 0:
        raise ValueError("tau must be positive")
    if width_rule not in WIDTH_RULES:
        raise ValueError(f"unknown width rule {width_rule!r}; expected one of {', '.join(WIDTH_RULES)}")
    shapes = [PulseShapeKind.parse(s) for s in shapes]
    widths = [moment_matched_tau(s, tau) if width_rule == "moment" else tau for s in shapes]
    pts = list(itertools.product(range(len(shapes)), alphas))
    probs = _map(lambda p: _probability(evaluate(family, "tdse", float(p[1]), widths[p[0]], shapes[p[0]], 0.0, cfg)),
                 pts, threads)
    cols = np.array(probs).reshape(len(shapes), len(alphas))
    summary = {}
    worst = 0.0
    for i, j in itertools.combinations(range(len(shapes)), 2):
        d = float(np.max(np.abs(cols[i] - cols[j])))
        summary[f"dev_{shapes[i].value}_{shapes[j].value}"] = d
        worst = max(worst, d)
    summary["max_pairwise_deviation"] = worst
    meta = _metadata(family, "tdse", ["alpha"], cfg, tau=tau, width_rule=width_rule,
                     widths=" ".join(f"{s.value}:{w!r}" for s, w in zip(shapes, widths)))
    return ScanTable(["alpha"], [f"P_{s.value}" for s in shapes], np.column_stack([alphas, cols.T]), meta, summary)


# -- error order ----------------------------------------------------------

@dataclass(frozen=True)
class OrderEstimate:
    order: float  # fitted log-log slope
    coefficient: float  # exp(intercept): quantity ~ coefficient * eps^order
    residual: float  # RMS residual of the fit in log space
    n_points: int


class OrderEstimateError(RuntimeError):
    pass


QUANTITIES = ("1-P", "P", "P-1/2")


def _quantity(u: Propagator2, quantity: str) -> float:
    if quantity == "1-P":
        return abs(u.a) ** 2  # avoids cancellation in 1 - |b|^2
    if quantity == "P":
        return abs(u.b) ** 2
    if quantity == "P-1/2":
        return abs(abs(u.b) ** 2 - 0.5)
    raise ValueError(f"unknown quantity {quantity!r}; expected one of {', '.join(QUANTITIES)}")


def order_estimate(family: Family, expansion_point: float, quantity: str = "1-P",
                   eps_window=(1e-3, 1e-2), n_points: int = 21) -> OrderEstimate:
    """Least-squares slope of log|quantity| against log(eps), alpha = alpha0 + eps.

    Uses the zero-width (composite pulse) limit.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; expected one of {', '.join(QUANTITIES)}")
    eps = np.geomspace(eps_window[0], eps_window[1], n_points)
    q = np.array([_quantity(evaluate(family, "cp-limit", expansion_point + e), quantity) for e in eps])
    if np.all(q < 1e-14):
        raise OrderEstimateError(
            f"quantity below 1e-14 over the whole window {eps_window}: roundoff only, widen the eps window")
    keep = q > 0
    if keep.sum() < 3:
        raise OrderEstimateError("fewer than three nonzero samples in the eps window")
    x, y = np.log(eps[keep]), np.log(q[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return OrderEstimate(float(slope), float(math.exp(intercept)), resid, int(keep.sum()))
