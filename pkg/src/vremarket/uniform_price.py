"""Uniform pricing: clearing, equilibrium construction, and verification.

Two clearing variants are provided. In the zero-price variant every
supplier implicitly offers at price zero and chooses only a quantity; the
price is bipolar: the cap when total offers do not exceed demand (the
boundary counts as adequate, keeping the price right-continuous in total
quantity), zero otherwise. The general variant lets suppliers offer any
price up to the cap and composes the merit-order allocation with the
marginal-price rule; all suppliers are paid the uniform clearing price.

Equilibrium profiles are checked numerically: a profile passes when no
unilateral deviation on a search grid improves the deviator's expected
profit by more than a tolerance. Profits are expectations over the random
merit order where rationing applies, so certificates do not depend on any
particular tie-break draw.
"""

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .market import Bid, ClearingOutcome, MarginalInfo, supplier_profit
from .merit_order import (TieBreakPolicy, allocate, clearing_price,
                          random_tie_outcomes)

__all__ = [
    "EquilibriumCertificate",
    "clear_up_zero",
    "construct_up_equilibrium",
    "construct_zero_price_bid_profile",
    "verify_quantity_equilibrium",
    "clear_up_general",
    "construct_marginal_price_equilibrium",
    "verify_bid_equilibrium",
    "expected_zero_price_profits",
    "expected_general_profit",
]

# relative slack treating near-equal totals as adequate supply; the clearing
# price is right-continuous at total quantity == demand
_ADEQUACY_RTOL = 1e-12


@dataclass(frozen=True)
class EquilibriumCertificate:
    """Numerical evidence about a candidate equilibrium profile.

    epsilon is the largest unilateral profit gain found on the deviation
    grid; the profile passes when epsilon does not exceed the tolerance.
    worst_deviation records (supplier index, deviating strategy, gain).
    """

    profile: tuple
    epsilon: float
    tolerance: float
    verdict: str
    grid: str
    worst_deviation: tuple | None = None

    @property
    def passed(self):
        return self.verdict == "pass"


def _is_adequate(total, demand):
    return total <= demand * (1.0 + _ADEQUACY_RTOL)


def clear_up_zero(quantities, config, policy=None):
    """Clear the zero-price uniform market for a quantity profile.

    Adequate supply (total <= demand) clears at the price cap with every
    offer fully committed; oversupply clears at price zero with demand
    rationed among suppliers by the tie-break policy.
    """
    if policy is None:
        policy = TieBreakPolicy.seeded_random(0)
    q = [float(v) for v in quantities]
    if any(v < 0 for v in q):
        raise ValueError("bid quantities must be non-negative")
    n = len(q)
    total = sum(q)
    if _is_adequate(total, config.demand):
        x = list(q)
        lost = max(0.0, config.demand - total)
        price = config.price_cap
    else:
        x = _ration(q, config.demand, policy)
        lost = 0.0
        price = 0.0
    dispatched = tuple(i for i in range(n) if x[i] > 0.0)
    return ClearingOutcome(
        commitments=tuple(x),
        lost_load=lost,
        prices=(price,) * n,
        marginal=MarginalInfo(dispatched=dispatched),
        no_market=(total == 0.0),
    )


def _ration(quantities, demand, policy):
    n = len(quantities)
    if policy.kind == "pro-rata":
        total = sum(quantities)
        return [qi * demand / total for qi in quantities]
    if policy.kind == "seeded-random":
        rng = np.random.default_rng(policy.seed)
        ordering = list(rng.permutation(n))
    else:
        ordering = list(range(n))
    x = [0.0] * n
    residual = demand
    for i in ordering:
        take = min(quantities[i], residual)
        x[i] = take
        residual -= take
    return x


def _rationing_orders(n, max_exact=7, sample_size=512, seed=0):
    if math.factorial(n) <= math.factorial(max_exact):
        return list(itertools.permutations(range(n)))
    rng = np.random.default_rng(seed)
    return [tuple(rng.permutation(n)) for _ in range(sample_size)]


def expected_zero_price_profits(quantities, models, config):
    """Expected per-supplier profit of a zero-price quantity profile.

    Under oversupply the allocation depends on the random merit order, so
    profits are averaged over all rationing orders (enumerated exactly for
    up to 7 suppliers, sampled beyond).
    """
    q = [float(v) for v in quantities]
    n = len(q)
    total = sum(q)
    lam = config.penalty
    if _is_adequate(total, config.demand):
        return [supplier_profit(models[i], q[i], config.price_cap, lam).profit
                for i in range(n)]
    profits = [0.0] * n
    orders = _rationing_orders(n)
    w = 1.0 / len(orders)
    for ordering in orders:
        residual = config.demand
        for i in ordering:
            take = min(q[i], residual)
            residual -= take
            if take > 0.0:
                profits[i] -= w * lam * models[i].expected_shortfall(take)
    return profits


def construct_up_equilibrium(models, config, split="proportional"):
    """A zero-price uniform equilibrium quantity profile.

    With adequate supply the profile totals exactly the demand, each
    supplier staying within its optimal commitment at the price cap; the
    default splits demand proportionally to those commitments, and
    ``split="equal"`` applies the even duopoly convention used in the
    simulation studies. Under supply shortage every supplier offers its
    full optimal commitment. Both cases clear at the price cap.
    """
    caps = [m.optimal_commitment(config.price_cap, config.penalty)
            for m in models]
    total = sum(caps)
    if total <= config.demand:
        return tuple(caps)
    if split == "equal":
        share = config.demand / len(models)
        for i, cap in enumerate(caps):
            if share > cap:
                raise ValueError(
                    f"equal split infeasible: supplier {i} optimal commitment "
                    f"{cap:.6g} MWh is below the equal share {share:.6g} MWh")
        return tuple(share for _ in models)
    if split != "proportional":
        raise ValueError(f"unknown split {split!r}")
    return tuple(config.demand * c / total for c in caps)


def construct_zero_price_bid_profile(models, config, split="proportional"):
    """The same equilibrium expressed as explicit (price 0, quantity) bids."""
    return [Bid(0.0, q) for q in construct_up_equilibrium(models, config, split)]


def _deviation_grid(x_max, others_total, config, grid_step, n_points):
    step = grid_step if grid_step is not None else x_max / max(n_points - 1, 1)
    pts = list(np.linspace(0.0, x_max, n_points))
    boundary = config.demand - others_total
    for c in (0.0, boundary, boundary - step, boundary + step):
        if 0.0 <= c <= x_max:
            pts.append(c)
    return np.unique(np.asarray(pts)), step


def verify_quantity_equilibrium(quantities, models, config, grid_step=None,
                                tolerance=None, n_points=200):
    """Check a zero-price quantity profile against unilateral deviations.

    Every supplier's profit is re-evaluated for each grid deviation over
    [0, x_max] (plus the exact adequacy boundary, where the clearing price
    jumps, and its one-step neighbourhood). epsilon is the largest gain
    found; the certificate passes when it stays within the tolerance,
    which defaults to 1e-6 * price_cap * demand.
    """
    if tolerance is None:
        tolerance = 1e-6 * config.price_cap * config.demand
    q = [float(v) for v in quantities]
    n = len(q)
    base = expected_zero_price_profits(q, models, config)
    epsilon = -math.inf
    worst = None
    steps = []
    for i in range(n):
        x_max = models[i].support_hi
        cap_commit = models[i].optimal_commitment(config.price_cap,
                                                  config.penalty)
        others = sum(q) - q[i]
        grid, step = _deviation_grid(x_max, others, config, grid_step, n_points)
        grid = np.unique(np.concatenate([grid, [min(cap_commit, x_max)]]))
        steps.append(step)
        adequate = grid + others <= config.demand * (1.0 + _ADEQUACY_RTOL)
        # adequate deviations clear at the cap with full commitment
        shortfalls = models[i].shortfall_curve(grid[adequate])
        gains = (grid[adequate] * config.price_cap
                 - config.penalty * shortfalls) - base[i]
        if gains.size:
            k = int(np.argmax(gains))
            if gains[k] > epsilon:
                epsilon = float(gains[k])
                worst = (i, float(grid[adequate][k]), float(gains[k]))
        # oversupply deviations clear at zero price; profit is the expected
        # rationing loss
        for dev in grid[~adequate]:
            trial = list(q)
            trial[i] = float(dev)
            profit = expected_zero_price_profits(trial, models, config)[i]
            gain = profit - base[i]
            if gain > epsilon:
                epsilon = gain
                worst = (i, float(dev), gain)
    verdict = "pass" if epsilon <= tolerance else "fail"
    return EquilibriumCertificate(
        profile=tuple(q), epsilon=epsilon, tolerance=tolerance,
        verdict=verdict,
        grid=f"{n_points} quantity points per supplier, step~{max(steps):.4g} MWh "
             "plus adequacy-boundary points",
        worst_deviation=worst)


def clear_up_general(bids, config, policy=None):
    """Merit-order clearing with all suppliers paid the marginal price."""
    outcome = allocate(bids, config, policy)
    price = clearing_price(outcome, bids, config)
    if price is None:
        return outcome
    return replace(outcome, prices=(price,) * len(bids))


def expected_general_profit(bids, models, config, supplier):
    """Expected profit of one supplier under general-bid uniform clearing.

    Averages over the random merit order among price ties; the clearing
    price itself does not depend on the draw.
    """
    lam = config.penalty
    total = 0.0
    for w, outcome in random_tie_outcomes(bids, config):
        price = clearing_price(outcome, bids, config)
        if price is None:
            continue
        x = outcome.commitments[supplier]
        total += w * (x * price - lam * models[supplier].expected_shortfall(x))
    return total


def construct_marginal_price_equilibrium(models, config, low_price_group,
                                         marginal_supplier, marginal_price):
    """Bid profile where one undispatched offer pins the clearing price.

    A group of suppliers offers at price zero and covers demand exactly; the
    designated marginal supplier offers ``marginal_price`` (the operator's
    shed-load offer plays this role when ``marginal_supplier`` is None) and
    is left out of the dispatch, setting the uniform price. Remaining
    suppliers are priced at the cap. Construction validates the conditions
    that make the profile an equilibrium and raises ValueError naming the
    violated one.
    """
    n = len(models)
    group = sorted(set(low_price_group))
    if not group:
        raise ValueError("zero-price group must not be empty")
    if any(i < 0 or i >= n for i in group):
        raise ValueError(f"zero-price group indices out of range: {group}")
    p_j = float(marginal_price)
    if not 0.0 < p_j <= config.price_cap:
        raise ValueError(
            f"marginal price must lie in (0, price_cap], got {p_j}")
    if marginal_supplier is None:
        if p_j != config.price_cap:
            raise ValueError(
                "marginal price must equal the price cap when the operator "
                "is the marginal supplier")
        q_j_limit = config.demand
    else:
        j = int(marginal_supplier)
        if j in group or j < 0 or j >= n:
            raise ValueError(
                f"marginal supplier {j} must be outside the zero-price group")
        q_j_limit = models[j].support_hi

    caps = {i: models[i].optimal_commitment(p_j, config.penalty) for i in group}
    bounds = {i: min(caps[i], q_j_limit) for i in group}
    reachable = sum(bounds.values())
    if reachable < config.demand:
        raise ValueError(
            "zero-price group cannot cover demand within the marginal "
            f"supplier's quantity bound: reachable {reachable:.6g} MWh "
            f"< demand {config.demand:.6g} MWh")
    shares = {i: config.demand * bounds[i] / reachable for i in group}

    bids = []
    for i in range(n):
        if i in group:
            bids.append(Bid(0.0, shares[i]))
        elif marginal_supplier is not None and i == marginal_supplier:
            q_j = min(max(models[i].optimal_commitment(p_j, config.penalty),
                          max(shares.values())), models[i].support_hi)
            bids.append(Bid(p_j, q_j))
        else:
            bids.append(Bid(config.price_cap,
                            models[i].optimal_commitment(config.price_cap,
                                                         config.penalty)))
    return bids


def verify_bid_equilibrium(bids, models, config, tolerance=None,
                           price_points=21, quantity_points=50):
    """Check a general bid profile against joint price-quantity deviations.

    The deviation grid is uniform in both dimensions and additionally probes
    each rival's exact price and small undercuts/overcuts of it, since the
    clearing price is discontinuous at price ties. Expected profits average
    over the random merit order.
    """
    if tolerance is None:
        tolerance = 1e-6 * config.price_cap * config.demand
    n = len(bids)
    base = [expected_general_profit(bids, models, config, i) for i in range(n)]
    nudge = 1e-6 * config.price_cap
    epsilon = -math.inf
    worst = None
    for i in range(n):
        x_max = models[i].support_hi
        others_q = sum(b.quantity for b in bids) - bids[i].quantity
        prices = set(np.linspace(0.0, config.price_cap, price_points))
        for k, b in enumerate(bids):
            if k == i:
                continue
            for p in (b.price, b.price - nudge, b.price + nudge):
                if 0.0 <= p <= config.price_cap:
                    prices.add(p)
        quantities = set(np.linspace(0.0, x_max, quantity_points))
        quantities.add(bids[i].quantity)
        quantities.add(min(x_max, models[i].optimal_commitment(
            config.price_cap, config.penalty)))
        residual = config.demand - others_q
        if 0.0 <= residual <= x_max:
            quantities.add(residual)
        for p in sorted(prices):
            commit_at_p = min(x_max, models[i].optimal_commitment(
                p, config.penalty))
            for qv in sorted(quantities | {commit_at_p}):
                trial = list(bids)
                trial[i] = Bid(p, qv)
                gain = expected_general_profit(trial, models, config, i) - base[i]
                if gain > epsilon:
                    epsilon = gain
                    worst = (i, trial[i], gain)
    verdict = "pass" if epsilon <= tolerance else "fail"
    return EquilibriumCertificate(
        profile=tuple(bids), epsilon=epsilon, tolerance=tolerance,
        verdict=verdict,
        grid=f"{price_points} prices x {quantity_points}+ quantities per "
             "supplier plus rival-price undercut probes",
        worst_deviation=worst)
