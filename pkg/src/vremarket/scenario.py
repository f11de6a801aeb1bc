"""Scenario files: market setup, supplier models, and solver options.

Scenarios are INI files (key-value pairs in nested sections) so every run
is reproducible from a single artifact. Example::

    [market]
    demand = 2.0        ; MWh
    price_cap = 1.0     ; k$/MWh
    penalty = 1.5       ; k$/MWh

    [supplier.1]
    kind = truncated-normal
    mean = 1.5
    std = 1.0
    upper = 3.0

    [supplier.2]
    kind = empirical
    data = ../data/sample_solar.csv   ; relative to this file
    month = 7
    hour = 16
    scale = 1.0

    [options]
    seed = 0
    pab_grid_levels = 101
    tie_break = seeded-random

Uniform suppliers take ``kind = uniform`` with ``upper``; empirical
suppliers may alternatively inline ``samples = 0.5, 1.2, ...``. Every
option has an explicit default; ``resolved_config_text`` renders the fully
resolved configuration for --print-config. Validation failures raise
ScenarioError with the offending field path in the message.
"""

import configparser
import os
from dataclasses import dataclass, field

from .distributions import EmpiricalModel, TruncatedNormalModel, UniformModel
from .historical import build_empirical_model, load_records
from .market import MarketConfig
from .merit_order import TieBreakPolicy

__all__ = [
    "ScenarioError",
    "ScenarioOptions",
    "ScenarioSpec",
    "SweepSpec",
    "load_scenario",
    "parse_mechanisms",
    "resolved_config_text",
]

MECHANISMS = ("up", "pab", "rup")

SWEEP_AXES = ("supplier-std", "penalty-price")


class ScenarioError(ValueError):
    """A scenario file failed validation; messages carry field paths."""


@dataclass(frozen=True)
class ScenarioOptions:
    """Solver and reproducibility knobs with their defaults resolved."""

    seed: int = 0
    tie_break: str = "seeded-random"
    pab_grid_levels: int = 101
    pab_max_iterations: int = 100_000
    pab_tolerance: float | None = None       # default 1e-3 * cap * demand
    eq_tolerance: float | None = None        # default 1e-6 * cap * demand
    price_tolerance: float | None = None     # default 1e-4 * cap
    quantity_tolerance: float = 1e-3
    up_split: str = "auto"                   # equal for duopoly, else proportional

    def tie_break_policy(self, seed=None):
        return TieBreakPolicy(self.tie_break,
                              self.seed if seed is None else seed)

    def resolve_pab_tolerance(self, market):
        if self.pab_tolerance is not None:
            return self.pab_tolerance
        return 1e-3 * market.price_cap * market.demand

    def resolve_eq_tolerance(self, market):
        if self.eq_tolerance is not None:
            return self.eq_tolerance
        return 1e-6 * market.price_cap * market.demand

    def resolve_price_tolerance(self, market):
        if self.price_tolerance is not None:
            return self.price_tolerance
        return 1e-4 * market.price_cap

    def resolve_up_split(self, n_suppliers):
        if self.up_split != "auto":
            return self.up_split
        return "equal" if n_suppliers == 2 else "proportional"


@dataclass(frozen=True)
class ScenarioSpec:
    """A fully parsed scenario: market, supplier specs, and options."""

    market: MarketConfig
    suppliers: tuple
    options: ScenarioOptions = field(default_factory=ScenarioOptions)
    base_dir: str = "."

    def __post_init__(self):
        if not self.suppliers:
            raise ScenarioError("supplier.*: at least one supplier is required")

    def build_models(self):
        """Instantiate the generation models listed in the scenario."""
        return [self._build_model(i, dict(spec))
                for i, spec in enumerate(self.suppliers, start=1)]

    def _build_model(self, index, spec):
        path = f"supplier.{index}"
        kind = spec.get("kind")
        try:
            if kind == "truncated-normal":
                return TruncatedNormalModel(
                    mu=float(spec["mean"]), sigma=float(spec["std"]),
                    hi=float(spec["upper"]))
            if kind == "uniform":
                return UniformModel(hi=float(spec["upper"]))
            if kind == "empirical":
                scale = float(spec.get("scale", 1.0))
                if "samples" in spec:
                    samples = [float(v) for v in str(spec["samples"]).split(",")]
                    return EmpiricalModel(samples, scale=scale)
                data = os.path.join(self.base_dir, spec["data"])
                records = load_records(data)
                return build_empirical_model(
                    records, month=int(spec["month"]), hour=int(spec["hour"]),
                    scale=scale)
        except ScenarioError:
            raise
        except FileNotFoundError as exc:
            raise ScenarioError(f"{path}.data: file not found ({exc})") from exc
        except (KeyError, ValueError) as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
        raise ScenarioError(
            f"{path}.kind: expected truncated-normal, uniform or empirical, "
            f"got {kind!r}")


@dataclass(frozen=True)
class SweepSpec:
    """One experiment axis swept over a base scenario."""

    base: ScenarioSpec
    axis: str
    values: tuple
    mechanisms: tuple = MECHANISMS
    sweep_supplier: int = 2   # 1-based; the supplier whose std is varied

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ScenarioError(
                f"sweep.axis: expected one of {SWEEP_AXES}, got {self.axis!r}")
        if not self.values:
            raise ScenarioError("sweep.values: at least one value is required")
        if list(self.values) != sorted(self.values):
            raise ScenarioError("sweep.values: must be ascending")
        if self.axis == "supplier-std":
            idx = self.sweep_supplier - 1
            if idx < 0 or idx >= len(self.base.suppliers):
                raise ScenarioError(
                    f"sweep.supplier: index {self.sweep_supplier} out of range")
            if dict(self.base.suppliers[idx]).get("kind") != "truncated-normal":
                raise ScenarioError(
                    f"sweep.axis: supplier-std requires supplier."
                    f"{self.sweep_supplier} to be truncated-normal")
        if any(v <= 0 for v in self.values):
            raise ScenarioError("sweep.values: must be positive")

    def scenario_at(self, value):
        """The base scenario with the axis variable replaced by ``value``."""
        if self.axis == "penalty-price":
            market = MarketConfig(demand=self.base.market.demand,
                                  price_cap=self.base.market.price_cap,
                                  penalty=float(value))
            return ScenarioSpec(market=market, suppliers=self.base.suppliers,
                                options=self.base.options,
                                base_dir=self.base.base_dir)
        suppliers = list(self.base.suppliers)
        idx = self.sweep_supplier - 1
        spec = dict(suppliers[idx])
        spec["std"] = float(value)
        suppliers[idx] = tuple(sorted(spec.items()))
        return ScenarioSpec(market=self.base.market,
                            suppliers=tuple(suppliers),
                            options=self.base.options,
                            base_dir=self.base.base_dir)


def _get_float(section, key, path, required=True, default=None):
    if key not in section:
        if required:
            raise ScenarioError(f"{path}.{key}: missing required value")
        return default
    try:
        return float(section[key])
    except ValueError as exc:
        raise ScenarioError(f"{path}.{key}: {exc}") from exc


def load_scenario(path):
    """Parse and validate a scenario INI file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ScenarioError(f"scenario file not found: {path}")
    if "market" not in parser:
        raise ScenarioError("market: section is required")
    market_sec = parser["market"]
    try:
        market = MarketConfig(
            demand=_get_float(market_sec, "demand", "market"),
            price_cap=_get_float(market_sec, "price_cap", "market"),
            penalty=_get_float(market_sec, "penalty", "market"),
        )
    except ValueError as exc:
        raise ScenarioError(f"market: {exc}") from exc

    suppliers = []
    indices = sorted(
        (name for name in parser.sections() if name.startswith("supplier.")),
        key=lambda s: int(s.split(".", 1)[1]))
    for name in indices:
        suppliers.append(tuple(sorted(parser[name].items())))
    if not suppliers:
        raise ScenarioError("supplier.*: at least one supplier section "
                            "(e.g. [supplier.1]) is required")

    opts = parser["options"] if "options" in parser else {}
    defaults = ScenarioOptions()
    try:
        tie_break = opts.get("tie_break", defaults.tie_break)
        if tie_break not in TieBreakPolicy.KINDS:
            raise ScenarioError(
                f"options.tie_break: expected one of {TieBreakPolicy.KINDS}, "
                f"got {tie_break!r}")
        up_split = opts.get("up_split", defaults.up_split)
        if up_split not in ("auto", "equal", "proportional"):
            raise ScenarioError(
                f"options.up_split: expected auto, equal or proportional, "
                f"got {up_split!r}")
        options = ScenarioOptions(
            seed=int(opts.get("seed", defaults.seed)),
            tie_break=tie_break,
            pab_grid_levels=int(opts.get("pab_grid_levels",
                                         defaults.pab_grid_levels)),
            pab_max_iterations=int(opts.get("pab_max_iterations",
                                            defaults.pab_max_iterations)),
            pab_tolerance=(float(opts["pab_tolerance"])
                           if "pab_tolerance" in opts else None),
            eq_tolerance=(float(opts["eq_tolerance"])
                          if "eq_tolerance" in opts else None),
            price_tolerance=(float(opts["price_tolerance"])
                             if "price_tolerance" in opts else None),
            quantity_tolerance=float(opts.get("quantity_tolerance",
                                              defaults.quantity_tolerance)),
            up_split=up_split,
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"options: {exc}") from exc
    if options.pab_grid_levels < 2:
        raise ScenarioError("options.pab_grid_levels: must be at least 2")

    spec = ScenarioSpec(market=market, suppliers=tuple(suppliers),
                        options=options,
                        base_dir=os.path.dirname(os.path.abspath(path)))
    spec.build_models()   # validate supplier specs eagerly
    return spec


def parse_mechanisms(text):
    """Parse a --mechanism value: up|pab|rup, a comma list, or all."""
    if text == "all":
        return MECHANISMS
    parts = tuple(p.strip() for p in text.split(",") if p.strip())
    for p in parts:
        if p not in MECHANISMS:
            raise ScenarioError(
                f"mechanism: expected up, pab, rup or all, got {p!r}")
    if not parts:
        raise ScenarioError("mechanism: empty selection")
    return parts


def resolved_config_text(spec):
    """The scenario with every default made explicit, as INI text."""
    market, options = spec.market, spec.options
    lines = ["[market]",
             f"demand = {market.demand!r}",
             f"price_cap = {market.price_cap!r}",
             f"penalty = {market.penalty!r}",
             ""]
    for i, supplier in enumerate(spec.suppliers, start=1):
        lines.append(f"[supplier.{i}]")
        for key, value in supplier:
            lines.append(f"{key} = {value}")
        lines.append("")
    lines += ["[options]",
              f"seed = {options.seed}",
              f"tie_break = {options.tie_break}",
              f"up_split = {options.resolve_up_split(len(spec.suppliers))}",
              f"pab_grid_levels = {options.pab_grid_levels}",
              f"pab_max_iterations = {options.pab_max_iterations}",
              f"pab_tolerance = {options.resolve_pab_tolerance(market)!r}",
              f"eq_tolerance = {options.resolve_eq_tolerance(market)!r}",
              f"price_tolerance = {options.resolve_price_tolerance(market)!r}",
              f"quantity_tolerance = {options.quantity_tolerance!r}",
              ""]
    return "\n".join(lines)
