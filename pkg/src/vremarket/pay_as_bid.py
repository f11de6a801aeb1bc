"""Pay-as-bid pricing: payoffs, and the discretized mixed price equilibrium.

Dispatched suppliers are paid their own offer price. Given any offer price
the profit-maximizing quantity is the critical-fractile commitment (weak
dominance, checked in the test suite), so the strategic variable left is
the price. Price competition admits no pure equilibrium when supply is
adequate; the mixed equilibrium is computed on a discretized price grid as
a two-player bimatrix game.

The solver is damped fictitious play (uniform averaging of best responses,
periodic exact epsilon checks against the full payoff matrices, 1e5
iteration cap by default) followed by a support-refinement step that solves
the indifference conditions on the empirical support by least squares.
Support enumeration is provided separately for small grids as an exact
cross-check. Every solution is certified by an exhaustive pure-deviation
scan; there are no uniqueness claims.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .market import Bid
from .merit_order import TieBreakPolicy, allocate, random_tie_outcomes

__all__ = [
    "PriceGrid",
    "MixedStrategy",
    "BimatrixGame",
    "PabSummary",
    "EquilibriumNotFound",
    "pab_payoff",
    "build_bimatrix",
    "solve_mixed_equilibrium",
    "support_enumeration",
    "pure_deviation_epsilon",
    "best_pure_deviation",
    "no_pure_equilibrium_margin",
    "pab_summary",
]

SUPPORT_PROBABILITY_FLOOR = 1e-9


@dataclass(frozen=True)
class PriceGrid:
    """Ascending price levels on [0, cap] used to discretize bids."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        object.__setattr__(self, "levels", levels)
        if len(levels) < 2:
            raise ValueError("price grid needs at least two levels")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("price grid levels must be strictly ascending")
        if levels[0] != 0.0:
            raise ValueError("price grid must start at 0")

    @classmethod
    def uniform(cls, price_cap, count=101):
        return cls(tuple(np.linspace(0.0, float(price_cap), count)))

    @property
    def count(self):
        return len(self.levels)

    @property
    def step(self):
        return max(b - a for a, b in zip(self.levels, self.levels[1:]))

    def as_array(self):
        return np.asarray(self.levels)


@dataclass(frozen=True)
class MixedStrategy:
    """A probability vector over the price grid."""

    grid: PriceGrid
    probabilities: tuple

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probabilities)
        object.__setattr__(self, "probabilities", probs)
        if len(probs) != self.grid.count:
            raise ValueError("probability vector does not match the grid")
        if min(probs) < -1e-12:
            raise ValueError("probabilities must be non-negative")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError(f"probabilities must sum to 1, got {sum(probs)}")

    def as_array(self):
        return np.asarray(self.probabilities)

    @property
    def expected_price(self):
        return float(np.dot(self.grid.as_array(), self.as_array()))

    def lower_support(self, threshold=SUPPORT_PROBABILITY_FLOOR):
        """Smallest grid level carrying more than ``threshold`` probability."""
        probs = self.as_array()
        idx = np.nonzero(probs > threshold)[0]
        if idx.size == 0:
            raise ValueError("strategy has no support above the threshold")
        return self.grid.levels[idx[0]]


@dataclass(frozen=True)
class BimatrixGame:
    """Tabulated pay-as-bid payoffs for a duopoly on a price grid.

    Each supplier's matrix is oriented own level (rows) x rival level
    (columns).
    """

    grid: PriceGrid
    payoff1: np.ndarray
    payoff2: np.ndarray

    def __post_init__(self):
        k = self.grid.count
        for name, m in (("payoff1", self.payoff1), ("payoff2", self.payoff2)):
            if m.shape != (k, k):
                raise ValueError(f"{name} shape {m.shape} does not match grid size {k}")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} contains non-finite entries")


class EquilibriumNotFound(RuntimeError):
    """Raised when the solver cannot certify the requested tolerance.

    Carries the best strategies found and their pure-deviation epsilon.
    """

    def __init__(self, epsilon, strategies):
        super().__init__(
            f"mixed-equilibrium solver stopped at epsilon={epsilon:.3e}")
        self.epsilon = epsilon
        self.strategies = strategies


def pab_payoff(supplier, p_own, p_rival, models, config, policy=None,
               q_own=None, q_rival=None):
    """Expected pay-as-bid profit of one duopoly supplier.

    Quantities default to the weakly dominant critical-fractile commitment
    at each offer price. The allocation follows the merit order; at a price
    tie the profit is averaged over both merit orders for the (default)
    seeded-random policy, or taken from the deterministic allocation for
    pro-rata / index-order policies.
    """
    if len(models) != 2:
        raise ValueError("pay-as-bid payoffs are defined for exactly two suppliers")
    if supplier not in (0, 1):
        raise ValueError(f"supplier must be 0 or 1, got {supplier}")
    lam = config.penalty
    rival = 1 - supplier
    q_i = (models[supplier].optimal_commitment(p_own, lam)
           if q_own is None else float(q_own))
    q_r = (models[rival].optimal_commitment(p_rival, lam)
           if q_rival is None else float(q_rival))
    bids = [None, None]
    bids[supplier] = Bid(p_own, q_i)
    bids[rival] = Bid(p_rival, q_r)
    if policy is not None and policy.kind != "seeded-random":
        outcome = allocate(bids, config, policy)
        x = outcome.commitments[supplier]
        return x * p_own - lam * models[supplier].expected_shortfall(x)
    total = 0.0
    for w, outcome in random_tie_outcomes(bids, config):
        x = outcome.commitments[supplier]
        total += w * (x * p_own - lam * models[supplier].expected_shortfall(x))
    return total


def build_bimatrix(models, config, grid=None, policy=None):
    """Tabulate both suppliers' pay-as-bid payoffs over the price grid.

    Vectorized: for each level the dominant commitment, the rival residual
    and their expected shortfalls are precomputed, and the win / lose / tie
    cases assemble from them (the shortfall of a minimum is the minimum of
    shortfalls because expected shortfall is monotone).
    """
    if len(models) != 2:
        raise ValueError("the bimatrix solver supports exactly two suppliers")
    if grid is None:
        grid = PriceGrid.uniform(config.price_cap, 101)
    levels = grid.as_array()
    if levels[-1] != config.price_cap:
        raise ValueError("price grid must end at the price cap")
    if policy is None:
        policy = TieBreakPolicy.seeded_random(0)
    lam, demand = config.penalty, config.demand

    commits = [m.optimal_commitment(levels, lam) for m in models]
    wins = [np.minimum(c, demand) for c in commits]
    residuals = [np.clip(demand - c, 0.0, None) for c in commits]
    es_win = [m.shortfall_curve(w) for m, w in zip(models, wins)]
    es_resid = [models[0].shortfall_curve(residuals[1]),
                models[1].shortfall_curve(residuals[0])]

    def matrix(i):
        r = 1 - i
        own = levels[:, None]
        x_win = wins[i][:, None] * np.ones_like(levels)[None, :]
        e_win = es_win[i][:, None] * np.ones_like(levels)[None, :]
        x_lose = np.minimum(commits[i][:, None], residuals[r][None, :])
        e_lose = np.minimum(es_win[i][:, None], es_resid[i][None, :])
        undercut = levels[:, None] < levels[None, :]
        overcut = levels[:, None] > levels[None, :]
        m = np.where(undercut, own * x_win - lam * e_win,
                     np.where(overcut, own * x_lose - lam * e_lose, 0.0))
        diag_win = levels * wins[i] - lam * es_win[i]
        diag_lose = levels * x_lose.diagonal() - lam * e_lose.diagonal()
        if policy.kind == "pro-rata":
            total = commits[0] + commits[1]
            with np.errstate(invalid="ignore", divide="ignore"):
                share = np.where(total > demand,
                                 commits[i] * demand / np.where(total > 0, total, 1.0),
                                 commits[i])
            diag = levels * share - lam * models[i].shortfall_curve(share)
        elif policy.kind == "index-order":
            diag = diag_win if i == 0 else diag_lose
        else:
            diag = 0.5 * (diag_win + diag_lose)
        m[np.arange(len(levels)), np.arange(len(levels))] = diag
        return m

    return BimatrixGame(grid=grid, payoff1=matrix(0), payoff2=matrix(1))


def pure_deviation_epsilon(game, strategy1, strategy2):
    """Largest gain any supplier gets from a pure grid deviation."""
    eps, _, _, _ = best_pure_deviation(game, strategy1, strategy2)
    return eps


def best_pure_deviation(game, strategy1, strategy2):
    """(epsilon, supplier, level, gain) of the most profitable deviation."""
    s1 = strategy1.as_array() if isinstance(strategy1, MixedStrategy) else np.asarray(strategy1)
    s2 = strategy2.as_array() if isinstance(strategy2, MixedStrategy) else np.asarray(strategy2)
    u1 = game.payoff1 @ s2
    u2 = game.payoff2 @ s1
    gain1 = u1.max() - float(s1 @ u1)
    gain2 = u2.max() - float(s2 @ u2)
    if gain1 >= gain2:
        level = game.grid.levels[int(np.argmax(u1))]
        return gain1, 0, level, gain1
    level = game.grid.levels[int(np.argmax(u2))]
    return gain2, 1, level, gain2


def no_pure_equilibrium_margin(game):
    """Smallest best-deviation gain over all pure price profiles.

    A strictly positive margin certifies that no pure profile on the grid
    is an epsilon-equilibrium at any epsilon below it.
    """
    gain1 = game.payoff1.max(axis=0)[None, :] - game.payoff1
    gain2 = (game.payoff2.max(axis=0)[None, :] - game.payoff2).T
    return float(np.maximum(gain1, gain2).min())


def _fp_search(A, B, max_iterations, check_every, target):
    """Fictitious play with periodic exact epsilon checks."""
    n, m = A.shape[0], B.shape[0]
    row_cum = A.mean(axis=1).copy()
    col_cum = B.mean(axis=1).copy()
    row_counts = np.zeros(n)
    col_counts = np.zeros(m)
    best = (None, None, math.inf)
    done = 0
    while done < max_iterations:
        chunk = min(check_every, max_iterations - done)
        kernels.fp_run(A, B, row_cum, col_cum, row_counts, col_counts, chunk)
        done += chunk
        s1 = row_counts / done
        s2 = col_counts / done
        u1 = A @ s2
        u2 = B @ s1
        eps = max(u1.max() - float(s1 @ u1), u2.max() - float(s2 @ u2))
        if eps < best[2]:
            best = (s1.copy(), s2.copy(), eps)
            if eps <= target:
                break
    return best


def _indifference_mixture(M, own_support, rival_support):
    """Rival mixture equalizing the own payoffs across the own support.

    Solves the indifference system in least squares and projects onto the
    simplex; returns None when the system collapses.
    """
    k, m = len(own_support), len(rival_support)
    eqs = np.zeros((k + 1, m + 1))
    eqs[:k, :m] = M[np.ix_(own_support, rival_support)]
    eqs[:k, m] = -1.0
    eqs[k, :m] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol, *_ = np.linalg.lstsq(eqs, rhs, rcond=None)
    except np.linalg.LinAlgError:
        return None
    x = np.clip(sol[:m], 0.0, None)
    total = x.sum()
    if total <= 0.0:
        return None
    return x / total

def _symmetric_value_scan(A, coarse=200, refine_rounds=6):
    """Symmetric-equilibrium search exploiting the undercutting structure.

    In a pay-as-bid price game the payoff against any strictly higher rival
    level is one constant per own level (the rival's exact price no longer
    matters once undercut), so for a candidate equilibrium value the
    symmetric indifference conditions resolve level by level from the
    bottom: each level's probability is whatever makes that level's payoff
    hit the value, given the mass already placed below it. Scanning and
    refining the one-dimensional value then finds the symmetric mixed
    equilibrium to near machine precision, including games where the
    iterative solver stalls (capacity-saturated, Bertrand-like ones).

    Returns (strategy, epsilon).
    """
    k = A.shape[0]
    win = A[:, k - 1]   # payoff when undercutting any higher rival level

    def strategy_for(value):
        sigma = np.zeros(k)
        mass = 0.0
        for a in range(k - 1):
            denom = A[a, a] - win[a]
            if abs(denom) < 1e-15:
                continue
            carried = float(A[a, :a] @ sigma[:a]) if a else 0.0
            s = (value - win[a] * (1.0 - mass) - carried) / denom
            if s > 0.0:
                sigma[a] = min(s, 1.0 - mass)
                mass += sigma[a]
            if mass >= 1.0:
                break
        sigma[k - 1] = max(0.0, 1.0 - sigma[: k - 1].sum())
        return sigma

    def eps_of(sigma):
        u = A @ sigma
        return float(u.max() - sigma @ u)

    lo, hi = 0.0, float(A.max())
    best = (None, math.inf)
    for v in np.linspace(lo, hi, coarse):
        e = eps_of(strategy_for(v))
        if e < best[1]:
            best = (v, e)
    center = best[0]
    width = (hi - lo) / coarse
    for _ in range(refine_rounds):
        for v in np.linspace(center - width, center + width, 41):
            e = eps_of(strategy_for(v))
            if e < best[1]:
                best = (v, e)
                center = v
        width /= 20.0
    return strategy_for(best[0]), best[1]


def _support_polish(A, B, s1, s2, rounds=8):
    """Refine FP output by re-solving indifference on evolving supports."""
    n = A.shape[0]

    def epsilon(p1, p2):
        u1 = A @ p2
        u2 = B @ p1
        return max(u1.max() - float(p1 @ u1), u2.max() - float(p2 @ u2))

    best = (s1, s2, epsilon(s1, s2))
    for threshold in (1e-4, 1e-3, 1e-2):
        sup1 = list(np.nonzero(s1 > threshold)[0])
        sup2 = list(np.nonzero(s2 > threshold)[0])
        if not sup1 or not sup2:
            continue
        for _ in range(rounds):
            x2 = _indifference_mixture(A, sup1, sup2)
            x1 = _indifference_mixture(B, sup2, sup1)
            if x1 is None or x2 is None:
                break
            p1 = np.zeros(n)
            p2 = np.zeros(n)
            p1[sup1] = x1
            p2[sup2] = x2
            eps = epsilon(p1, p2)
            if eps < best[2]:
                best = (p1, p2, eps)
            # grow supports toward the strongest violated best responses and
            # drop levels the refined mixtures abandoned
            u1 = A @ p2
            u2 = B @ p1
            new1 = set(np.nonzero(p1 > 1e-12)[0])
            new2 = set(np.nonzero(p2 > 1e-12)[0])
            new1.update(int(v) for v in np.argsort(-u1)[:2])
            new2.update(int(v) for v in np.argsort(-u2)[:2])
            if sorted(new1) == sup1 and sorted(new2) == sup2:
                break
            sup1, sup2 = sorted(new1), sorted(new2)
    return best


def solve_mixed_equilibrium(game, tolerance, max_iterations=100_000,
                            check_every=1000, polish=True):
    """Approximate mixed Nash equilibrium of the price bimatrix game.

    Runs damped fictitious play until the exhaustive pure-deviation check
    certifies ``tolerance`` or the iteration cap is hit; if the cap misses,
    falls back to the symmetric structure-aware value scan (for symmetric
    games), to support refinement, and finally to complementary pivoting.
    Raises EquilibriumNotFound (carrying the best strategies and epsilon)
    if every certificate fails.
    """
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    A = np.ascontiguousarray(game.payoff1, dtype=float)
    B = np.ascontiguousarray(game.payoff2, dtype=float)
    # aim a factor below the certificate tolerance so downstream summaries
    # (expected prices, profits) are not computed right at the edge
    target = 0.25 * tolerance
    s1, s2, eps = _fp_search(A, B, max_iterations, check_every, target)
    if eps > target and np.array_equal(A, B):
        sym, sym_eps = _symmetric_value_scan(A)
        if sym_eps < eps:
            s1 = s2 = sym
            eps = sym_eps
    if eps > target and polish:
        s1, s2, eps = _support_polish(A, B, s1, s2)
    if eps > target:
        lh = _complementary_fallback(A, B, eps)
        if lh is not None:
            s1, s2, eps = lh
    probs1 = np.where(s1 < SUPPORT_PROBABILITY_FLOOR * 1e-3, 0.0, s1)
    probs2 = np.where(s2 < SUPPORT_PROBABILITY_FLOOR * 1e-3, 0.0, s2)
    probs1 /= probs1.sum()
    probs2 /= probs2.sum()
    strategies = (MixedStrategy(game.grid, tuple(probs1)),
                  MixedStrategy(game.grid, tuple(probs2)))
    eps = pure_deviation_epsilon(game, strategies[0], strategies[1])
    if eps > tolerance:
        raise EquilibriumNotFound(eps, strategies)
    return strategies


def _complementary_fallback(A, B, eps_to_beat):
    """Try complementary pivoting (Lemke-Howson) on the slightly perturbed
    game; returns (s1, s2, eps) measured on the true game, or None.

    The perturbation (deterministic, 1e-7 of the payoff range) makes the
    heavily degenerate price games generic; some undercutting games still
    drive exponentially long pivot walks, in which case the attempt is
    abandoned and None is returned.
    """
    from .lemke_howson import lemke_howson

    rng = np.random.default_rng(180451)
    span = max(float(np.ptp(A)), float(np.ptp(B)), 1.0)
    A_p = A + 1e-7 * span * rng.random(A.shape)
    B_p = B.T + 1e-7 * span * rng.random(B.T.shape)
    best = None
    for label in (0, A.shape[0] - 1, A.shape[0]):
        try:
            x, y = lemke_howson(A_p, B_p, label)
        except RuntimeError:
            continue
        u1 = A @ y
        u2 = B @ x
        eps = max(float(u1.max() - x @ u1), float(u2.max() - y @ u2))
        if eps < eps_to_beat and (best is None or eps < best[2]):
            best = (x, y, eps)
        if best is not None and best[2] <= 0.0:
            break
    return best


def support_enumeration(game, value_atol=1e-9, max_levels=15):
    """All mixed equilibria of a small game by support enumeration.

    Exact (up to linear solves) and exponential in the grid size; intended
    to validate the fictitious-play solver on grids of at most
    ``max_levels`` levels.
    """
    k = game.grid.count
    if k > max_levels:
        raise ValueError(
            f"support enumeration is limited to {max_levels} levels, got {k}")
    A, B = game.payoff1, game.payoff2
    found = []
    for size in range(1, k + 1):
        for sup1 in itertools.combinations(range(k), size):
            for sup2 in itertools.combinations(range(k), size):
                x2 = _solve_support(A, sup1, sup2)
                x1 = _solve_support(B, sup2, sup1)
                if x1 is None or x2 is None:
                    continue
                p1 = np.zeros(k)
                p2 = np.zeros(k)
                p1[list(sup1)] = x1
                p2[list(sup2)] = x2
                u1 = A @ p2
                u2 = B @ p1
                v1 = float(p1 @ u1)
                v2 = float(p2 @ u2)
                if (u1.max() <= v1 + value_atol
                        and u2.max() <= v2 + value_atol):
                    found.append((MixedStrategy(game.grid, tuple(p1)),
                                  MixedStrategy(game.grid, tuple(p2))))
    return found


def _solve_support(M, own_support, rival_support):
    """Exact rival mixture for square supports; None if infeasible."""
    if len(own_support) != len(rival_support):
        return None
    m = len(rival_support)
    eqs = np.zeros((m + 1, m + 1))
    eqs[:m, :m] = M[np.ix_(own_support, rival_support)]
    eqs[:m, m] = -1.0
    eqs[m, :m] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    try:
        sol = np.linalg.solve(eqs, rhs)
    except np.linalg.LinAlgError:
        return None
    x = sol[:m]
    if np.any(x < -1e-10):
        return None
    x = np.clip(x, 0.0, None)
    total = x.sum()
    if total <= 0.0:
        return None
    return x / total


@dataclass(frozen=True)
class PabSummary:
    """Equilibrium report: expected prices/profits and support diagnostics.

    market_price is the lower of the two suppliers' expected equilibrium
    prices, the quantity used when comparing mechanisms.
    """

    expected_prices: tuple
    expected_profits: tuple
    lower_supports: tuple
    common_lower_support: float
    market_price: float
    epsilon: float
    grid_step: float


def pab_summary(strategies, game, models, config):
    """Summarize a solved pay-as-bid equilibrium."""
    s1, s2 = strategies
    prices = (s1.expected_price, s2.expected_price)
    profits = (float(s1.as_array() @ game.payoff1 @ s2.as_array()),
               float(s2.as_array() @ game.payoff2 @ s1.as_array()))
    lows = (s1.lower_support(), s2.lower_support())
    return PabSummary(
        expected_prices=prices,
        expected_profits=profits,
        lower_supports=lows,
        common_lower_support=min(lows),
        market_price=min(prices),
        epsilon=pure_deviation_epsilon(game, s1, s2),
        grid_step=game.grid.step,
    )
