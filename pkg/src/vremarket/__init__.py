"""Two-settlement electricity market simulator for all-renewable suppliers.

Implements and compares three day-ahead pricing mechanisms for suppliers
with random generation and zero marginal cost: uniform pricing (UP),
pay-as-bid (PAB), and regulated supply-curve uniform pricing (RUP),
together with equilibrium constructors, numerical equilibrium certificates,
and experiment sweeps over generation uncertainty and the real-time
penalty price.
"""

from .distributions import (EmpiricalModel, GenerationModel,
                            TruncatedNormalModel, UniformModel)
from .historical import (GenerationRecord, InsufficientDataError,
                         MalformedRecordError, build_empirical_model,
                         load_records)
from .market import (Bid, ClearingOutcome, MarginalInfo, MarketConfig,
                     ProfitReport, supplier_profit)
from .merit_order import TieBreakPolicy, allocate, clearing_price
from .pay_as_bid import (BimatrixGame, EquilibriumNotFound, MixedStrategy,
                         PabSummary, PriceGrid, build_bimatrix,
                         no_pure_equilibrium_margin, pab_payoff, pab_summary,
                         pure_deviation_epsilon, solve_mixed_equilibrium,
                         support_enumeration)
from .regulated import (DualityCheck, PriceChainReport, SocialCostSolution,
                        SupplyCurve, check_duality, clear_rup,
                        compare_mechanism_prices, social_cost_lp)
from .scenario import (ScenarioError, ScenarioOptions, ScenarioSpec,
                       SweepSpec, load_scenario)
from .uniform_price import (EquilibriumCertificate, clear_up_general,
                            clear_up_zero,
                            construct_marginal_price_equilibrium,
                            construct_up_equilibrium,
                            construct_zero_price_bid_profile,
                            verify_bid_equilibrium,
                            verify_quantity_equilibrium)

__version__ = "0.1.0"
