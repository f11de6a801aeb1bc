"""Regulated supply-curve uniform pricing and the least-cost benchmark.

Suppliers truthfully report their generation distributions; each implied
supply curve is the critical-fractile commitment as a function of price,
and the operator clears where the cumulative curve meets demand (at the
cap, with lost load, when capacity falls short). Because each curve is the
pointwise profit maximizer, the cleared commitments and price coincide
with the primal and dual solutions of the system-cost minimization
(expected penalty cost of shortfall plus lost load valued at the cap).

That equivalence is checked numerically against an independent benchmark
solver: a discretized greedy allocator that hands out energy increments in
order of marginal cost. The module also assembles the cross-mechanism
price comparison for duopolies (cap >= pay-as-bid >= regulated > 0).
"""

import math
from dataclasses import dataclass

import numpy as np

from .market import ClearingOutcome, MarginalInfo, supplier_profit
from .pay_as_bid import (EquilibriumNotFound, build_bimatrix, pab_summary,
                         solve_mixed_equilibrium)
from .uniform_price import clear_up_zero, construct_up_equilibrium

__all__ = [
    "SupplyCurve",
    "SocialCostSolution",
    "DualityCheck",
    "PriceChainReport",
    "clear_rup",
    "social_cost_lp",
    "check_duality",
    "compare_mechanism_prices",
]

_PRICE_BISECT_TOL = 1e-8
_FLAT_PROBE = 1e-7


class SupplyCurve:
    """Per-supplier commitment curves and their cumulative sum.

    Each individual curve maps price to the critical-fractile commitment;
    it is non-decreasing, zero at price zero, and constant for prices at or
    above the penalty (the full support is already committed there).
    """

    def __init__(self, models, penalty, price_cap):
        self.models = tuple(models)
        self.penalty = penalty
        self.price_cap = price_cap

    def individual(self, i, price):
        return self.models[i].optimal_commitment(price, self.penalty)

    def total(self, price):
        """Cumulative offered quantity at a price (scalar or array)."""
        acc = None
        for m in self.models:
            v = m.optimal_commitment(price, self.penalty)
            acc = v if acc is None else acc + v
        return acc


def clear_rup(models, config):
    """Clear the regulated market from truthfully reported supply curves.

    Adequate capacity: the price is the lowest level at which cumulative
    supply reaches demand (bisection to 1e-8); commitments are the
    individual curve values there, redistributed pro-rata across any curve
    jumps so they balance demand exactly. Short capacity: price cap,
    full commitments, the rest is lost load.
    """
    curve = SupplyCurve(models, config.penalty, config.price_cap)
    n = len(models)
    cap_total = float(curve.total(config.price_cap))
    if cap_total < config.demand:
        x = [float(curve.individual(i, config.price_cap)) for i in range(n)]
        price = config.price_cap
        lost = config.demand - cap_total
    else:
        lo, hi = 0.0, config.price_cap
        while hi - lo > _PRICE_BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if float(curve.total(mid)) >= config.demand:
                hi = mid
            else:
                lo = mid
        price = hi
        x = _balanced_commitments(curve, price, config.demand)
        lost = 0.0
    dispatched = tuple(i for i in range(n) if x[i] > 0.0)
    return ClearingOutcome(
        commitments=tuple(x), lost_load=lost, prices=(price,) * n,
        marginal=MarginalInfo(dispatched=dispatched))


def _balanced_commitments(curve, price, demand):
    """Curve values at the cleared price, rebalanced to sum to demand.

    Empirical models can make a curve jump at the price (probability atoms
    flatten the CDF's inverse); the excess over demand is then removed from
    the jumping suppliers in proportion to their jump sizes. Without jumps
    the residual is only bisection noise, shared pro-rata.
    """
    n = len(curve.models)
    at = np.array([float(curve.individual(i, price)) for i in range(n)])
    below_p = max(price - _FLAT_PROBE, 0.0)
    below = np.array([float(curve.individual(i, below_p)) for i in range(n)])
    jumps = at - below
    total_at = at.sum()
    if abs(total_at - demand) < 1e-12:
        return list(at)
    if total_at > demand and jumps.sum() > 1e-12:
        need = demand - below.sum()
        theta = min(max(need / jumps.sum(), 0.0), 1.0)
        x = below + theta * jumps
    else:
        x = at * (demand / total_at) if total_at > 0 else at
    return [float(v) for v in x]


@dataclass(frozen=True)
class SocialCostSolution:
    """Optimum of the discretized system-cost benchmark.

    price is the shadow price of the demand balance: the per-MWh cost of
    the last energy increment the greedy allocator accepted.
    """

    commitments: tuple
    lost_load: float
    price: float
    objective: float


def social_cost_lp(models, config, discretization=1e-5, demand=None):
    """Minimize expected penalty cost plus lost load valued at the cap.

    Independent benchmark for the supply-curve clearing: demand is split
    into equal increments and each increment goes to the cheapest remaining
    marginal cost, either a supplier (penalty times its CDF, averaged over
    the increment by the trapezoid rule) or lost load at the cap.
    Commitments are implicitly capped at each supplier's maximum output,
    where committing further is never useful. Exact for the discretized
    problem because marginal costs are non-decreasing.
    """
    if discretization <= 0:
        raise ValueError(f"discretization must be positive, got {discretization}")
    demand = config.demand if demand is None else float(demand)
    n = len(models)
    if demand == 0.0:
        return SocialCostSolution(commitments=(0.0,) * n, lost_load=0.0,
                                  price=0.0, objective=0.0)
    k = int(math.ceil(demand / discretization))
    step = demand / k
    lam = config.penalty
    costs = []
    owners = []
    for i, model in enumerate(models):
        m_i = int(math.floor(model.support_hi / step))
        if m_i == 0:
            continue
        grid = np.arange(m_i + 1) * step
        cdf = model.cdf(grid)
        costs.append(lam * 0.5 * (cdf[1:] + cdf[:-1]))
        owners.append(np.full(m_i, i, dtype=np.int64))
    costs.append(np.full(k, config.price_cap))
    owners.append(np.full(k, n, dtype=np.int64))
    costs = np.concatenate(costs)
    owners = np.concatenate(owners)
    if k >= costs.size:
        chosen = np.arange(costs.size)
    else:
        chosen = np.argpartition(costs, k - 1)[:k]
    counts = np.bincount(owners[chosen], minlength=n + 1)
    commitments = tuple(float(c * step) for c in counts[:n])
    lost = float(counts[n] * step)
    return SocialCostSolution(
        commitments=commitments,
        lost_load=lost,
        price=float(costs[chosen].max()),
        objective=float(costs[chosen].sum() * step),
    )


@dataclass(frozen=True)
class DualityCheck:
    """Comparison of the supply-curve clearing with the cost benchmark."""

    passed: bool
    price_clearing: float
    price_benchmark: float
    commitments_clearing: tuple
    commitments_benchmark: tuple
    objective_clearing: float
    objective_benchmark: float
    tol_price: float
    tol_qty: float
    notes: str = ""


def _system_cost(models, config, commitments, lost_load):
    cost = config.price_cap * lost_load
    for model, x in zip(models, commitments):
        cost += config.penalty * model.expected_shortfall(x)
    return cost


def check_duality(models, config, tol_price=None, tol_qty=1e-3,
                  discretization=1e-5):
    """Assert the clearing price/commitments match the cost benchmark.

    Prices must agree within tol_price (default 1e-4 * price cap) and
    commitments within tol_qty per supplier; when commitments disagree on a
    flat marginal segment (where the optimum is non-unique) the comparison
    falls back to total system cost, required to match within 1e-6
    relative.
    """
    if tol_price is None:
        tol_price = 1e-4 * config.price_cap
    rup = clear_rup(models, config)
    bench = social_cost_lp(models, config, discretization)
    price_rup = rup.prices[0]
    price_ok = abs(price_rup - bench.price) <= tol_price
    qty_ok = all(abs(a - b) <= tol_qty
                 for a, b in zip(rup.commitments, bench.commitments))
    qty_ok = qty_ok and abs(rup.lost_load - bench.lost_load) <= tol_qty
    obj_rup = _system_cost(models, config, rup.commitments, rup.lost_load)
    notes = ""
    if not qty_ok:
        scale = max(abs(bench.objective), 1e-12)
        cost_ok = abs(obj_rup - bench.objective) <= 1e-6 * scale
        notes = ("commitments differ on a flat marginal segment; compared "
                 "total cost instead" if cost_ok else
                 "commitments and total cost both disagree")
        qty_ok = cost_ok
    return DualityCheck(
        passed=price_ok and qty_ok,
        price_clearing=price_rup,
        price_benchmark=bench.price,
        commitments_clearing=rup.commitments,
        commitments_benchmark=bench.commitments,
        objective_clearing=obj_rup,
        objective_benchmark=bench.objective,
        tol_price=tol_price,
        tol_qty=tol_qty,
        notes=notes,
    )


@dataclass(frozen=True)
class PriceChainReport:
    """Equilibrium prices of the three mechanisms on one duopoly scenario.

    holds is True when cap >= pay-as-bid >= regulated > 0 within one price
    grid step (all three collapse to the cap under supply shortage).
    """

    price_cap: float
    up_price: float
    pab_price: float
    rup_price: float
    holds: bool
    shortage: bool
    grid_step: float
    pab_epsilon: float
    up_profits: tuple
    pab_profits: tuple
    rup_profits: tuple

    @property
    def up_profit_dominates(self):
        pairs = zip(self.up_profits, self.pab_profits, self.rup_profits)
        return all(u >= max(p, r) - 1e-9 for u, p, r in pairs)


def compare_mechanism_prices(models, config, grid=None, policy=None,
                             pab_tolerance=None, max_iterations=100_000):
    """Compute the three mechanisms' equilibrium prices on one duopoly.

    The uniform price comes from the constructed quantity equilibrium (the
    cap), the pay-as-bid price is the lower of the two expected equilibrium
    bid prices of the solved mixed equilibrium, and the regulated price is
    the supply-curve clearing price. Returns a report rather than raising
    on a chain violation.
    """
    if len(models) != 2:
        raise ValueError("the price comparison is defined for duopolies")
    if pab_tolerance is None:
        pab_tolerance = 1e-3 * config.price_cap * config.demand

    up_profile = construct_up_equilibrium(models, config)
    up_outcome = clear_up_zero(up_profile, config)
    up_price = up_outcome.prices[0]
    up_profits = tuple(
        supplier_profit(m, x, up_price, config.penalty).profit
        for m, x in zip(models, up_outcome.commitments))

    game = build_bimatrix(models, config, grid=grid, policy=policy)
    try:
        strategies = solve_mixed_equilibrium(game, pab_tolerance,
                                             max_iterations=max_iterations)
    except EquilibriumNotFound as err:
        strategies = err.strategies
    summary = pab_summary(strategies, game, models, config)

    rup_outcome = clear_rup(models, config)
    rup_price = rup_outcome.prices[0]
    rup_profits = tuple(
        supplier_profit(m, x, rup_price, config.penalty).profit
        for m, x in zip(models, rup_outcome.commitments))

    caps_total = sum(m.optimal_commitment(config.price_cap, config.penalty)
                     for m in models)
    shortage = caps_total <= config.demand
    step = summary.grid_step
    holds = (config.price_cap >= summary.market_price - step
             and summary.market_price >= rup_price - step
             and rup_price > 0.0)
    return PriceChainReport(
        price_cap=config.price_cap,
        up_price=up_price,
        pab_price=summary.market_price,
        rup_price=rup_price,
        holds=holds,
        shortage=shortage,
        grid_step=step,
        pab_epsilon=summary.epsilon,
        up_profits=up_profits,
        pab_profits=summary.expected_profits,
        rup_profits=rup_profits,
    )
