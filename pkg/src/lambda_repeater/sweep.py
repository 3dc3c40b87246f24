"""
Parameter sweeps over the second interaction time and the reference curve sets (figure ids 2a..4b).

All rates are in units of ``g`` and times are dimensionless (``g t``,
``g tau``).  A sweep config is a single JSON document; unknown keys are
rejected.  Example::

    {
      "params": {"g1": 1, "g2": 2, "Delta": 2, "delta": 2, "Gamma": 4, "gamma": 0},
      "gt": 2,
      "g_tau_range": [0, 15, 600],
      "cases": [{"case": 1, "outcome": "eg"}, {"case": ["Psi", "PsiPP"], "outcome": "ef"}],
      "quantities": ["negativity", "success_probability"],
      "output": "out/"
    }

``Gamma``/``gamma`` may instead be derived from a ``"rates"`` block with
``gamma_e, gamma_g, gamma_f, kappa, kappa_prime``.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import ModelParams
from .errors import ConfigError, DegenerateDenominatorError, UnknownFigureError, ZeroNormError
from .protocol import (
    SWAP_CASES,
    SwapCase,
    as_case,
    parse_outcome,
    primary_outcome,
    run_protocol,
)
from .registers import CONVENTION

QUANTITIES = ("negativity", "success_probability")
DEFAULT_RANGE = (0.0, 15.0, 600)
TIME_CONVENTION = "one clock for t and tau; atoms (4,5) interact for g_tau - gt"

_TOP_KEYS = {"params", "rates", "params_67", "gt", "g_tau_range", "cases", "quantities", "method", "output"}
_PARAM_KEYS = {"g1", "g2", "Delta", "delta", "Gamma", "gamma"}
_RATE_KEYS = {"gamma_e", "gamma_g", "gamma_f", "kappa", "kappa_prime"}
_CASE_KEYS = {"case", "outcome"}


@dataclass(frozen=True)
class CaseSelector:
    case: SwapCase
    outcome: tuple[str, str]

    @property
    def tag(self) -> str:
        k = self.case.case_index
        name = f"case{k}" if k else f"{self.case.left}x{self.case.right}"
        return f"{name}_{''.join(self.outcome)}"


@dataclass(frozen=True)
class SweepConfig:
    params: ModelParams
    gt: float
    g_tau_range: tuple[float, float, int] = DEFAULT_RANGE
    cases: tuple[CaseSelector, ...] = ()
    quantities: tuple[str, ...] = QUANTITIES
    method: str = "propagator"
    output: Optional[str] = None
    rates: Optional[dict] = None
    params_67: Optional[ModelParams] = None

    def __post_init__(self):
        start, stop, num = self.g_tau_range
        if not (start >= 0 and stop > start and int(num) == num and num >= 2):
            raise ConfigError(f"g_tau_range {self.g_tau_range} needs 0 <= start < stop and num >= 2")
        if not self.cases:
            raise ConfigError("cases must not be empty")
        if not self.quantities or any(q not in QUANTITIES for q in self.quantities):
            raise ConfigError(f"quantities must be a nonempty subset of {QUANTITIES}")
        if self.gt < 0 or not math.isfinite(self.gt):
            raise ConfigError("gt must be a finite nonnegative number")
        if self.method not in ("propagator", "closed_form"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.method == "closed_form" and any(c.case.extended for c in self.cases):
            raise ConfigError("extended cases need method 'propagator'")

    def grid(self) -> np.ndarray:
        start, stop, num = self.g_tau_range
        return np.linspace(start, stop, int(num))


@dataclass
class SeriesOutput:
    """One curve: ``(g_tau, value)`` rows plus the metadata needed to reproduce it."""

    metadata: dict
    rows: list[tuple[float, float]] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.metadata.get("name", "series")

    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.rows])

    def taus(self) -> np.ndarray:
        return np.array([x for x, _ in self.rows])

    def data_csv(self) -> str:
        buf = io.StringIO()
        buf.write("g_tau,value\n")
        for x, v in self.rows:
            buf.write(f"{x!r},{v!r}\n")
        return buf.getvalue()

    def to_csv(self) -> str:
        head = "".join(f"# {k}: {json.dumps(v, sort_keys=True)}\n" for k, v in self.metadata.items())
        return head + self.data_csv()

    def write(self, directory) -> Path:
        path = Path(directory) / f"{self.name}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        return path


# -- config parsing --------------------------------------------------------

def _strict_keys(block: dict, allowed: set, where: str):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _parse_params(block: dict, rates: Optional[dict], where: str) -> ModelParams:
    _strict_keys(block, _PARAM_KEYS, where)
    values = {k: _number(v, f"{where}.{k}") for k, v in block.items()}
    try:
        if rates is not None:
            if {"Gamma", "gamma"} & set(values):
                raise ConfigError("give either Gamma/gamma in params or a rates block, not both")
            _strict_keys(rates, _RATE_KEYS, "rates")
            missing = _RATE_KEYS - set(rates)
            if missing:
                raise ConfigError(f"rates block is missing {sorted(missing)}")
            r = {k: _number(v, f"rates.{k}") for k, v in rates.items()}
            return ModelParams.from_rates(**values, **r)
        return ModelParams(**values)
    except (ValueError, TypeError, DegenerateDenominatorError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid {where}: {exc}") from exc


def _parse_case(entry) -> CaseSelector:
    if isinstance(entry, (int, list)):
        entry = {"case": entry}
    _strict_keys(entry, _CASE_KEYS, "cases[]")
    if "case" not in entry:
        raise ConfigError("each case entry needs a 'case'")
    try:
        case = as_case(entry["case"])
        if "outcome" in entry:
            outcome = parse_outcome(entry["outcome"])
        elif case.case_index:
            outcome = primary_outcome(case.case_index)
        else:
            raise ConfigError(f"{case} needs an explicit outcome")
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad case entry {entry!r}: {exc}") from exc
    return CaseSelector(case, outcome)


def config_from_dict(data: dict) -> SweepConfig:
    _strict_keys(data, _TOP_KEYS, "config")
    for key in ("params", "gt", "cases"):
        if key not in data:
            raise ConfigError(f"config is missing '{key}'")
    rates = data.get("rates")
    params = _parse_params(data["params"], rates, "params")
    params_67 = _parse_params(data["params_67"], None, "params_67") if "params_67" in data else None
    rng = data.get("g_tau_range", list(DEFAULT_RANGE))
    if not isinstance(rng, (list, tuple)) or len(rng) != 3:
        raise ConfigError("g_tau_range must be [start, stop, num_points]")
    num = rng[2]
    if isinstance(num, bool) or not isinstance(num, int):
        raise ConfigError("num_points must be an integer")
    cases = data["cases"]
    if not isinstance(cases, list):
        raise ConfigError("cases must be a list")
    quantities = data.get("quantities", list(QUANTITIES))
    if not isinstance(quantities, list):
        raise ConfigError("quantities must be a list")
    return SweepConfig(
        params=params,
        gt=_number(data["gt"], "gt"),
        g_tau_range=(_number(rng[0], "g_tau_range[0]"), _number(rng[1], "g_tau_range[1]"), num),
        cases=tuple(_parse_case(c) for c in cases),
        quantities=tuple(quantities),
        method=data.get("method", "propagator"),
        output=data.get("output"),
        rates=dict(rates) if rates is not None else None,
        params_67=params_67,
    )


def load_config(path) -> SweepConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data)


# -- evaluation -------------------------------------------------------------

def _sector_check(params: ModelParams, gt: float, sel: CaseSelector, method: str, taus) -> Optional[float]:
    """Max change of a numbered-case negativity when the other cavity's parameters change."""
    k = sel.case.case_index
    if k is None:
        return None
    if k <= 4:
        other = ModelParams(params.g1, params.g2 * 1.37 + 0.2, params.Delta, params.delta + 1.1,
                            params.Gamma, params.gamma + 0.7)
    else:
        other = ModelParams(params.g1 * 1.37 + 0.2, params.g2, params.Delta + 1.1, params.delta,
                            params.Gamma + 0.7, params.gamma)
    dev = 0.0
    for tau in taus:
        try:
            a = run_protocol(params, gt, tau, sel.case, sel.outcome, method).negativity
            b = run_protocol(other, gt, tau, sel.case, sel.outcome, method).negativity
        except ZeroNormError:
            continue
        dev = max(dev, abs(a - b))
    return dev


def _metadata(config: SweepConfig, sel: CaseSelector, quantity: str) -> dict:
    meta = {
        "name": f"{sel.tag}_{quantity}",
        "quantity": quantity,
        "case": sel.case.case_index if sel.case.case_index else [sel.case.left, sel.case.right],
        "outcome_atoms_4_5": "".join(sel.outcome),
        "params": config.params.as_dict(),
        "gt": config.gt,
        "g_tau_range": list(config.g_tau_range),
        "method": config.method,
        "convention": CONVENTION,
        "time_convention": TIME_CONVENTION,
        "units": "rates in units of g; times dimensionless g*t",
    }
    if config.rates is not None:
        meta["rates"] = config.rates
    if config.params_67 is not None:
        meta["params_67"] = config.params_67.as_dict()
    return meta


def run_sweep(config: SweepConfig) -> list[SeriesOutput]:
    """One series per (case, quantity), in config order."""
    taus = config.grid()
    out = []
    for sel in config.cases:
        rows = {q: [] for q in config.quantities}
        skipped = []
        for tau in taus:
            tau = float(tau)
            try:
                pair = run_protocol(config.params, config.gt, tau, sel.case, sel.outcome,
                                    config.method, config.params_67)
            except ZeroNormError as exc:
                skipped.append({"g_tau": tau, "reason": str(exc)})
                continue
            vals = {"negativity": pair.negativity, "success_probability": pair.success_probability}
            if not all(math.isfinite(vals[q]) for q in config.quantities):
                skipped.append({"g_tau": tau, "reason": "non-finite value"})
                continue
            for q in config.quantities:
                rows[q].append((tau, float(vals[q])))
        for q in config.quantities:
            meta = _metadata(config, sel, q)
            meta["skipped"] = skipped
            if q == "negativity" and config.params_67 is None:
                probe = taus[:: max(1, len(taus) // 5)]
                meta["other_sector_independence_max_dev"] = _sector_check(
                    config.params, config.gt, sel, config.method, probe)
            out.append(SeriesOutput(meta, rows[q]))
    return out


# -- reference curve sets ------------------------------------------------------

LINE_STYLES = ("solid", "dashed", "dotted", "dot-dot-dashed")
# (detuning, dissipation, gt) per line style
LINES_A = ((2.0, 4.0, 2.0), (6.0, 4.0, 2.0), (2.0, 12.0, 2.0), (2.0, 4.0, 6.0))
LINES_B = ((2.0, 2.0, 2.0), (6.0, 2.0, 2.0), (2.0, 6.0, 2.0), (2.0, 2.0, 6.0))

# panel -> (sector, [(case, outcome)...], quantity, fixed parameters of the other cavity)
# Unstated parameters of the cavity a quantity does not depend on are taken
# from the companion panel set with the same sector.
_FIG_PANELS = {
    "2a": ("a", [(1, "eg")], "negativity"),
    "2b": ("a", [(1, "ge")], "negativity"),
    "2c": ("a", [(2, "eg")], "negativity"),
    "2d": ("b", [(5, "ef")], "negativity"),
    "2e": ("b", [(5, "fe")], "negativity"),
    "2f": ("b", [(6, "ef")], "negativity"),
    "3a": ("a", [(1, "eg")], "success_probability"),
    "3b": ("a", [(1, "ge")], "success_probability"),
    "3c": ("a", [(2, "eg")], "success_probability"),
    "3d": ("a", [(3, "eg")], "success_probability"),
    "3e": ("b", [(5, "ef")], "success_probability"),
    "3f": ("b", [(5, "fe")], "success_probability"),
    "3g": ("b", [(6, "ef")], "success_probability"),
    "3h": ("b", [(7, "ef")], "success_probability"),
    "4a": ("a0", [(1, "eg"), (2, "eg"), (4, "eg")], "negativity"),
    "4b": ("b0", [(5, "ef"), (6, "ef"), (8, "ef")], "negativity"),
}
FIGURES = tuple(_FIG_PANELS)


def figure_configs(fig_id: str, num_points: int = DEFAULT_RANGE[2]) -> list[tuple[str, SweepConfig]]:
    """Sweep configs (one per plotted line) behind a figure panel."""
    if fig_id not in _FIG_PANELS:
        raise UnknownFigureError(f"unknown figure {fig_id!r}; expected one of {', '.join(FIGURES)}")
    sector, curves, quantity = _FIG_PANELS[fig_id]
    grid = (0.0, 15.0, num_points)
    sels = tuple(CaseSelector(SwapCase.numbered(k), parse_outcome(o)) for k, o in curves)
    out = []
    if sector == "a":
        for style, (D, G, gt) in zip(LINE_STYLES, LINES_A):
            p = ModelParams(g1=1.0, g2=2.0, Delta=D, delta=2.0, Gamma=G, gamma=0.0)
            out.append((style, SweepConfig(p, gt, grid, sels, (quantity,))))
    elif sector == "b":
        for style, (d, g, gt) in zip(LINE_STYLES, LINES_B):
            p = ModelParams(g1=1.0, g2=2.0, Delta=10.0, delta=d, Gamma=2.0, gamma=g)
            out.append((style, SweepConfig(p, gt, grid, sels, (quantity,))))
    else:
        p = ModelParams(g1=1.0, g2=2.0, Delta=6.0, delta=6.0, Gamma=0.0, gamma=0.0)
        out.append(("solid/dashed/dotted", SweepConfig(p, 2.0, grid, sels, (quantity,))))
    return out


def reproduce_figure(fig_id: str, num_points: int = DEFAULT_RANGE[2]) -> list[SeriesOutput]:
    series = []
    for style, cfg in figure_configs(fig_id, num_points):
        for s in run_sweep(cfg):
            s.metadata["figure"] = fig_id
            s.metadata["line"] = style
            base = s.metadata["name"]
            s.metadata["name"] = f"fig{fig_id}_{base}" + ("" if "/" in style else f"_{style}")
            series.append(s)
    if fig_id in ("4a", "4b"):
        for s, style in zip(series, ("solid", "dashed", "dotted")):
            s.metadata["line"] = style
    return series
