"""Shared market data types and the supplier profit function.

Conventions used across the package: energy in MWh, prices in k$/MWh,
money in k$. All types are immutable values and safe to share between
threads. Supplier indices run 0..n-1; the system operator's shed-load
pseudo-supplier, where it appears, is index n.
"""

from dataclasses import dataclass, field

__all__ = [
    "MarketConfig",
    "Bid",
    "MarginalInfo",
    "ClearingOutcome",
    "ProfitReport",
    "supplier_profit",
]


@dataclass(frozen=True)
class MarketConfig:
    """Market-wide parameters.

    demand: inelastic system demand D > 0 (MWh).
    price_cap: maximum bid / clearing price (k$/MWh).
    penalty: real-time price charged per MWh of shortfall (k$/MWh).
    """

    demand: float
    price_cap: float
    penalty: float

    def __post_init__(self):
        if not self.demand > 0:
            raise ValueError(f"demand must be positive, got {self.demand}")
        if not self.price_cap > 0:
            raise ValueError(f"price_cap must be positive, got {self.price_cap}")
        if not self.penalty > 0:
            raise ValueError(f"penalty must be positive, got {self.penalty}")


@dataclass(frozen=True)
class Bid:
    """A day-ahead offer: price (k$/MWh) and quantity (MWh)."""

    price: float
    quantity: float

    def __post_init__(self):
        if self.price < 0:
            raise ValueError(f"bid price must be non-negative, got {self.price}")
        if self.quantity < 0:
            raise ValueError(
                f"bid quantity must be non-negative, got {self.quantity}")


@dataclass(frozen=True)
class MarginalInfo:
    """Which offers set the price in a merit-order clearing.

    dispatched: indices with positive commitment (operator = n included).
    top_dispatched: highest-priced dispatched index, None if nothing cleared.
    cheapest_undispatched: lowest-priced index with spare quantity, None if
    every offer is fully used.
    """

    dispatched: tuple = ()
    top_dispatched: int | None = None
    cheapest_undispatched: int | None = None


@dataclass(frozen=True)
class ClearingOutcome:
    """Result of clearing one market.

    prices: per-supplier paid price (identical entries under uniform
    mechanisms); None for a raw allocation that has not been priced yet.
    commitments: per-supplier cleared quantity (MWh).
    lost_load: unserved demand absorbed by the operator (MWh).
    no_market: True when total real bid quantity was zero, in which case no
    clearing price is defined.
    """

    commitments: tuple
    lost_load: float
    prices: tuple | None = None
    marginal: MarginalInfo = field(default_factory=MarginalInfo)
    no_market: bool = False

    @property
    def clearing_price(self):
        """The uniform price when all per-supplier prices agree."""
        if self.prices is None or self.no_market:
            return None
        first = self.prices[0] if self.prices else None
        if any(p != first for p in self.prices):
            raise ValueError("outcome has differentiated prices")
        return first

    def total_committed(self):
        return sum(self.commitments)


@dataclass(frozen=True)
class ProfitReport:
    """Supplier settlement: day-ahead revenue less expected penalty cost."""

    revenue: float
    expected_penalty_cost: float
    profit: float


def supplier_profit(model, commitment, paid_price, penalty):
    """Expected profit of one supplier for a cleared commitment.

    revenue = commitment * paid_price, expected penalty cost =
    penalty * E[(commitment - X)+] under the supplier's generation model.
    """
    if commitment < 0:
        raise ValueError(f"commitment must be non-negative, got {commitment}")
    revenue = commitment * paid_price
    cost = penalty * model.expected_shortfall(commitment)
    return ProfitReport(revenue=revenue, expected_penalty_cost=cost,
                        profit=revenue - cost)
