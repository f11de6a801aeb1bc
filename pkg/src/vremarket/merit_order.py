"""Merit-order demand allocation and the marginal-price rule.

Offers are filled in ascending price order until demand is met. The system
operator participates as a shed-load pseudo-supplier at the price cap with
quantity equal to demand, so the allocation always balances: committed
energy plus lost load equals demand exactly. Within a price tie the residual
demand is split by a TieBreakPolicy; the default market behaviour is a
seeded random merit order, with pro-rata and index-order splits available
for deterministic runs.

The cleared price is the standard marginal rule: the highest-priced
dispatched offer sets the price when it is only partially used; otherwise
the cheapest offer left entirely out of the dispatch sets it (the
pseudo-supplier counts, so exhausting all real offers prices at the cap).
A market where every real offer has zero quantity carries no price; it is
flagged as ``no_market`` and the price functions return None for it.
"""

import itertools
import math

import numpy as np

from .market import Bid, ClearingOutcome, MarginalInfo

__all__ = [
    "TieBreakPolicy",
    "allocate",
    "clearing_price",
    "random_tie_outcomes",
]

# prices are rounded to this many decimals before tie detection, because the
# marginal-price rule is discontinuous in price equality
PRICE_DECIMALS = 12


class TieBreakPolicy:
    """How residual demand is split among equally-priced offers."""

    KINDS = ("seeded-random", "pro-rata", "index-order")

    def __init__(self, kind, seed=0):
        if kind not in self.KINDS:
            raise ValueError(f"unknown tie-break kind {kind!r}; expected one of {self.KINDS}")
        self.kind = kind
        self.seed = int(seed)

    @classmethod
    def seeded_random(cls, seed=0):
        return cls("seeded-random", seed)

    @classmethod
    def pro_rata(cls):
        return cls("pro-rata")

    @classmethod
    def index_order(cls):
        return cls("index-order")

    def __repr__(self):
        if self.kind == "seeded-random":
            return f"TieBreakPolicy('seeded-random', seed={self.seed})"
        return f"TieBreakPolicy({self.kind!r})"

    def __eq__(self, other):
        return (isinstance(other, TieBreakPolicy)
                and self.kind == other.kind and self.seed == other.seed)


def _price_groups(bids, config):
    """Ascending groups of offer indices tied at the same rounded price.

    The operator's shed-load offer (price cap, quantity = demand) is
    appended at index n.
    """
    n = len(bids)
    prices = [b.price for b in bids] + [config.price_cap]
    quantities = [b.quantity for b in bids] + [config.demand]
    for i, b in enumerate(bids):
        if b.price > config.price_cap:
            raise ValueError(
                f"bid {i} price {b.price} exceeds price cap {config.price_cap}")
    keys = [round(p, PRICE_DECIMALS) for p in prices]
    order = sorted(range(n + 1), key=lambda i: (keys[i], i))
    groups = []
    for key, members in itertools.groupby(order, key=lambda i: keys[i]):
        groups.append((key, list(members)))
    return groups, prices, quantities


def _split_group(members, quantities, residual, policy, pseudo):
    """Allocation within one tie group holding the marginal residual.

    The operator's shed-load offer never competes with equally priced real
    offers: load is shed only after real quantities in the group are
    exhausted, whatever the policy.
    """
    alloc = {}
    real = [i for i in members if i != pseudo]
    if policy.kind == "pro-rata":
        total = sum(quantities[i] for i in real)
        if total > residual:
            for i in real:
                alloc[i] = quantities[i] * residual / total
            residual = 0.0
        else:
            for i in real:
                alloc[i] = quantities[i]
            residual -= total
        if pseudo in members and residual > 0.0:
            alloc[pseudo] = min(quantities[pseudo], residual)
        return alloc
    if policy.kind == "seeded-random":
        rng = np.random.default_rng(policy.seed)
        ordering = [real[k] for k in rng.permutation(len(real))]
    else:
        ordering = real
    if pseudo in members:
        ordering = ordering + [pseudo]
    for i in ordering:
        take = min(quantities[i], residual)
        alloc[i] = take
        residual -= take
    return alloc


def allocate(bids, config, policy=None):
    """Solve the merit-order allocation for a set of offers.

    Returns a ClearingOutcome whose commitments maximize the dispatch value
    sum((cap - price_i) * x_i) subject to x_i <= q_i and full demand balance.
    Prices are left unset; mechanism layers attach them.
    """
    if policy is None:
        policy = TieBreakPolicy.seeded_random(0)
    n = len(bids)
    groups, prices, quantities = _price_groups(bids, config)
    x = [0.0] * (n + 1)
    residual = config.demand
    for _, members in groups:
        if residual <= 0.0:
            break
        total = sum(quantities[i] for i in members)
        if total <= residual:
            for i in members:
                x[i] = quantities[i]
            residual -= total
        else:
            alloc = _split_group(members, quantities, residual, policy, n)
            for i, v in alloc.items():
                x[i] = v
            residual = 0.0
    return _outcome_from_allocation(x, bids, config)


def _outcome_from_allocation(x, bids, config):
    n = len(bids)
    quantities = [b.quantity for b in bids] + [config.demand]
    prices = [b.price for b in bids] + [config.price_cap]
    dispatched = tuple(i for i in range(n + 1) if x[i] > 0.0)
    top = None
    if dispatched:
        top_key = max(round(prices[i], PRICE_DECIMALS) for i in dispatched)
        top = min(i for i in dispatched
                  if round(prices[i], PRICE_DECIMALS) == top_key)
    undispatched = [i for i in range(n + 1) if x[i] == 0.0]
    cheapest = None
    if undispatched:
        cheapest = min(undispatched,
                       key=lambda i: (round(prices[i], PRICE_DECIMALS), i))
    no_market = all(b.quantity == 0.0 for b in bids)
    return ClearingOutcome(
        commitments=tuple(x[:n]),
        lost_load=x[n],
        prices=None,
        marginal=MarginalInfo(dispatched=dispatched, top_dispatched=top,
                              cheapest_undispatched=cheapest),
        no_market=no_market,
    )


def clearing_price(outcome, bids, config):
    """Marginal price of a merit-order allocation; None when no market.

    Partially used top offer -> its own price. Fully used -> the cheapest
    zero-commitment offer's price (shed-load offer included).
    """
    if outcome.no_market:
        return None
    n = len(bids)
    prices = [b.price for b in bids] + [config.price_cap]
    quantities = [b.quantity for b in bids] + [config.demand]
    alpha = outcome.marginal.top_dispatched
    if alpha is None:
        return None
    x_alpha = (outcome.commitments[alpha] if alpha < n else outcome.lost_load)
    if x_alpha < quantities[alpha]:
        return prices[alpha]
    beta = outcome.marginal.cheapest_undispatched
    if beta is None:
        return None
    return prices[beta]


def random_tie_outcomes(bids, config, max_exact=7, sample_size=512, seed=0):
    """All equally likely allocations under a random merit order.

    Only the marginal tie group's internal order affects the allocation, so
    this enumerates the permutations of its real members (exactly up to
    ``max_exact`` members, seeded sampling beyond that; the shed-load offer
    always comes last) and returns ``[(probability, outcome)]``. The
    clearing price is permutation-invariant and can be taken from any
    returned outcome.
    """
    n = len(bids)
    groups, prices, quantities = _price_groups(bids, config)
    base = [0.0] * (n + 1)
    residual = config.demand
    for _, members in groups:
        if residual <= 0.0:
            break
        total = sum(quantities[i] for i in members)
        if total <= residual:
            for i in members:
                base[i] = quantities[i]
            residual -= total
            continue
        # marginal group: enumerate orderings of its real members
        real = [i for i in members if i != n]
        tail = [n] if n in members else []
        k = len(real)
        if k <= 1 or math.factorial(k) <= math.factorial(max_exact):
            orderings = [list(p) + tail for p in itertools.permutations(real)]
        else:
            rng = np.random.default_rng(seed)
            orderings = [[real[j] for j in rng.permutation(k)] + tail
                         for _ in range(sample_size)]
        results = []
        w = 1.0 / len(orderings)
        for ordering in orderings:
            x = list(base)
            rem = residual
            for i in ordering:
                take = min(quantities[i], rem)
                x[i] = take
                rem -= take
            results.append((w, _outcome_from_allocation(x, bids, config)))
        return results
    return [(1.0, _outcome_from_allocation(base, bids, config))]
