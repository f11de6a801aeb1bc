"""Probabilistic generation models and the newsvendor-style commitment rule.

Each model describes one supplier's random hourly output on a support
[0, x_max] (MWh) through a continuous CDF. On top of the distribution the
module provides the quantities every pricing mechanism needs:

* ``expected_shortfall(x)`` -- E[(x - X)+], the expected undelivered energy
  when committing ``x`` day-ahead, computed as the integral of the CDF from
  0 to ``x``.
* ``optimal_commitment(price, penalty)`` -- the profit-maximizing commitment
  when paid ``price`` per MWh and charged ``penalty`` per MWh of real-time
  shortfall: the critical-fractile quantile ``F^-1(min(price/penalty, 1))``.
* ``commitment_weighted_integral(price, penalty)`` -- the supplier profit at
  the optimal commitment expressed as ``penalty * int_0^x t dF(t)``, used by
  the regulated-pricing positivity checks.

Units are MWh for energy and k$/MWh for prices throughout the package.
Models are immutable after construction and safe to share across threads.
"""

import bisect
import math

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

__all__ = [
    "GenerationModel",
    "TruncatedNormalModel",
    "UniformModel",
    "EmpiricalModel",
]

_QUAD_ABS_TOL = 1e-10
_BISECT_TOL = 1e-10


class GenerationModel:
    """Base class: a continuous distribution of generation on [0, x_max]."""

    kind = "base"

    def __init__(self, support_hi):
        if not (support_hi > 0 and math.isfinite(support_hi)):
            raise ValueError(f"support upper bound must be positive, got {support_hi}")
        self._hi = float(support_hi)

    @property
    def support(self):
        """(lower, upper) bounds of the output distribution, in MWh."""
        return (0.0, self._hi)

    @property
    def support_hi(self):
        return self._hi

    # -- distribution primitives (implemented by subclasses) ---------------

    def _cdf_scalar(self, x):
        raise NotImplementedError

    def _cdf_vec(self, xs):
        raise NotImplementedError

    def _quantile_scalar(self, u):
        raise NotImplementedError

    def _quantile_vec(self, us):
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        """P(X <= x); values below/above the support clamp to 0/1."""
        if isinstance(x, (float, int)):
            return self._cdf_scalar(float(x))
        return self._cdf_vec(np.asarray(x, dtype=float))

    def quantile(self, u):
        """Left-continuous generalized inverse: smallest x with cdf(x) >= u.

        Flat CDF regions resolve to their left endpoint. Raises ValueError
        outside [0, 1].
        """
        if isinstance(u, (float, int)):
            u = float(u)
            if not 0.0 <= u <= 1.0:
                raise ValueError(f"quantile argument must be in [0, 1], got {u}")
            return self._quantile_scalar(u)
        us = np.asarray(u, dtype=float)
        if us.size and (us.min() < 0.0 or us.max() > 1.0):
            raise ValueError("quantile arguments must be in [0, 1]")
        return self._quantile_vec(us)

    # -- derived quantities -------------------------------------------------

    def mean(self):
        """E[X], via E[X] = x_max - integral of the CDF over the support."""
        return self._hi - self.expected_shortfall(self._hi)

    def expected_shortfall(self, x):
        """E[(x - X)+] for a commitment x >= 0 (MWh).

        Uses the identity E[(x - X)+] = int_0^x F(t) dt and evaluates the
        integral by adaptive quadrature (absolute tolerance 1e-10). Beyond
        the support the integrand is identically 1, so the tail contributes
        x - x_max exactly. Non-decreasing and convex in x.
        """
        x = float(x)
        if x < 0:
            raise ValueError(f"commitment must be non-negative, got {x}")
        if x == 0.0:
            return 0.0
        body = min(x, self._hi)
        val = quad(self._cdf_scalar, 0.0, body, epsabs=_QUAD_ABS_TOL, limit=200)[0]
        if x > self._hi:
            val += x - self._hi
        return val

    def shortfall_curve(self, xs):
        """expected_shortfall evaluated on an array, sharing work.

        Integrates segment by segment over the sorted commitments so a dense
        grid costs one pass over the support instead of one full integral per
        point. Matches expected_shortfall to quadrature accuracy.
        """
        xs = np.asarray(xs, dtype=float)
        if xs.size == 0:
            return np.zeros(0)
        if xs.min() < 0:
            raise ValueError("commitments must be non-negative")
        order = np.argsort(xs, kind="stable")
        sorted_x = xs[order]
        out_sorted = np.empty_like(sorted_x)
        acc = 0.0
        prev = 0.0
        for k, x in enumerate(sorted_x):
            body = min(x, self._hi)
            if body > prev:
                acc += quad(self._cdf_scalar, prev, body,
                            epsabs=_QUAD_ABS_TOL, limit=200)[0]
                prev = body
            out_sorted[k] = acc + max(0.0, x - self._hi)
        out = np.empty_like(out_sorted)
        out[order] = out_sorted
        return out

    def optimal_commitment(self, price, penalty):
        """Profit-maximizing day-ahead commitment at a given paid price.

        The critical-fractile rule: commit the ``price/penalty`` quantile of
        the output distribution (capped at 1, so any price at or above the
        penalty commits the full support). Zero price commits zero.
        """
        if penalty <= 0:
            raise ValueError(f"penalty must be positive, got {penalty}")
        if isinstance(price, (float, int)):
            if price < 0:
                raise ValueError(f"price must be non-negative, got {price}")
            return self._quantile_scalar(min(float(price) / penalty, 1.0))
        prices = np.asarray(price, dtype=float)
        if prices.size and prices.min() < 0:
            raise ValueError("prices must be non-negative")
        return self._quantile_vec(np.minimum(prices / penalty, 1.0))

    def commitment_weighted_integral(self, price, penalty):
        """penalty * int over (0, x] of t dF(t), with x the optimal commitment.

        Equals the supplier's profit when it is paid ``price`` on its optimal
        commitment; strictly positive whenever price > 0 and the distribution
        has mass above zero. Requires 0 < price <= penalty.
        """
        if penalty <= 0:
            raise ValueError(f"penalty must be positive, got {penalty}")
        if not 0 < price <= penalty:
            raise ValueError(
                f"price must lie in (0, penalty={penalty}], got {price}")
        upper = self._quantile_scalar(price / penalty)
        return penalty * self._mass_weighted_integral(upper)

    def _mass_weighted_integral(self, upper):
        """int over (0, upper] of t dF(t); quadrature default."""
        if upper <= 0.0:
            return 0.0
        return quad(lambda t: t * self.pdf(t), 0.0, min(upper, self._hi),
                    epsabs=_QUAD_ABS_TOL, limit=200)[0]

    def sample(self, rng, size):
        """Inverse-transform draws from the model using a numpy Generator."""
        return self._quantile_vec(rng.uniform(0.0, 1.0, size))

    def __repr__(self):
        return f"{type(self).__name__}(support_hi={self._hi!r})"


class TruncatedNormalModel(GenerationModel):
    """Normal(mu, sigma) truncated to [0, upper].

    The CDF is the standard-normal CDF ratio
    ``(Phi(z(x)) - Phi(z(0))) / (Phi(z(upper)) - Phi(z(0)))`` and the
    quantile is found by bisection to 1e-10 MWh, which keeps the model free
    of special-function inverses.
    """

    kind = "truncated-normal"

    def __init__(self, mu, sigma, lo=0.0, hi=None):
        if sigma <= 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        if lo != 0.0:
            raise ValueError("generation support must start at 0 MWh")
        if hi is None:
            raise ValueError("upper truncation bound is required")
        if hi <= lo:
            raise ValueError(f"upper bound must exceed 0, got {hi}")
        super().__init__(hi)
        self.mu = float(mu)
        self.sigma = float(sigma)
        self._zlo = (0.0 - self.mu) / self.sigma
        self._zhi = (self._hi - self.mu) / self.sigma
        self._den = ndtr(self._zhi) - ndtr(self._zlo)
        if self._den <= 0:
            raise ValueError("truncation interval carries no probability mass")

    def _cdf_scalar(self, x):
        if x <= 0.0:
            return 0.0
        if x >= self._hi:
            return 1.0
        z = (x - self.mu) / self.sigma
        phi = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
        philo = 0.5 * (1.0 + math.erf(self._zlo / math.sqrt(2.0)))
        return (phi - philo) / self._den

    def _cdf_vec(self, xs):
        z = (np.clip(xs, 0.0, self._hi) - self.mu) / self.sigma
        return (ndtr(z) - ndtr(self._zlo)) / self._den

    def _quantile_scalar(self, u):
        if u <= 0.0:
            return 0.0
        if u >= 1.0:
            return self._hi
        lo, hi = 0.0, self._hi
        while hi - lo > _BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if self._cdf_scalar(mid) >= u:
                hi = mid
            else:
                lo = mid
        return hi

    def _quantile_vec(self, us):
        us = np.asarray(us, dtype=float)
        lo = np.zeros_like(us)
        hi = np.full_like(us, self._hi)
        span = self._hi
        while span > _BISECT_TOL:
            mid = 0.5 * (lo + hi)
            ge = self._cdf_vec(mid) >= us
            hi = np.where(ge, mid, hi)
            lo = np.where(ge, lo, mid)
            span *= 0.5
        out = np.where(us <= 0.0, 0.0, np.where(us >= 1.0, self._hi, hi))
        return out

    def pdf(self, x):
        xs = np.asarray(x, dtype=float)
        z = (xs - self.mu) / self.sigma
        dens = np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * self.sigma * self._den)
        dens = np.where((xs < 0.0) | (xs > self._hi), 0.0, dens)
        return float(dens) if np.isscalar(x) or xs.ndim == 0 else dens

    def __repr__(self):
        return (f"TruncatedNormalModel(mu={self.mu}, sigma={self.sigma}, "
                f"hi={self._hi})")


class UniformModel(GenerationModel):
    """Uniform output on [0, upper]."""

    kind = "uniform"

    def __init__(self, hi):
        super().__init__(hi)

    def _cdf_scalar(self, x):
        if x <= 0.0:
            return 0.0
        if x >= self._hi:
            return 1.0
        return x / self._hi

    def _cdf_vec(self, xs):
        return np.clip(xs / self._hi, 0.0, 1.0)

    def _quantile_scalar(self, u):
        return u * self._hi

    def _quantile_vec(self, us):
        return np.asarray(us, dtype=float) * self._hi

    def pdf(self, x):
        xs = np.asarray(x, dtype=float)
        dens = np.where((xs < 0.0) | (xs > self._hi), 0.0, 1.0 / self._hi)
        return float(dens) if np.isscalar(x) or xs.ndim == 0 else dens

    def _mass_weighted_integral(self, upper):
        upper = min(max(upper, 0.0), self._hi)
        return 0.5 * upper * upper / self._hi


class EmpiricalModel(GenerationModel):
    """Continuous CDF interpolated through sample order statistics.

    The k-th of n ascending samples anchors the CDF at plotting position
    k/(n+1); the endpoints are pinned to (0, 0) and (max sample, 1), i.e.
    the largest sample's position is replaced by 1. Linear interpolation
    between anchors yields a continuous, piecewise-linear CDF whenever the
    samples are distinct. Tied samples collapse to a single x with several
    anchor heights and are treated as probability atoms: the CDF jumps there
    (right-continuously) and the quantile is constant across the jump.

    ``scale`` stretches the support multiplicatively without re-deriving the
    anchors, so quantiles of a scaled model are exactly ``scale`` times the
    quantiles of the unscaled one.
    """

    kind = "empirical"

    def __init__(self, samples, scale=1.0):
        values = np.asarray(samples, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("empirical model needs at least 2 sample values")
        if not np.all(np.isfinite(values)) or values.min() < 0:
            raise ValueError("sample values must be finite and non-negative")
        if values.max() <= 0:
            raise ValueError("sample values must include positive output")
        if scale <= 0:
            raise ValueError(f"scale must be positive, got {scale}")
        self.scale = float(scale)
        values = np.sort(values)
        n = values.size
        positions = np.arange(1, n + 1) / (n + 1)
        positions[-1] = 1.0
        self._kx = np.concatenate(([0.0], values))
        self._ky = np.concatenate(([0.0], positions))
        self._kx_list = self._kx.tolist()
        self._ky_list = self._ky.tolist()
        seg = 0.5 * (self._ky[1:] + self._ky[:-1]) * np.diff(self._kx * self.scale)
        self._cum_integral = np.concatenate(([0.0], np.cumsum(seg)))
        super().__init__(self.scale * values[-1])

    @property
    def samples(self):
        """The unscaled sample values, ascending."""
        return self._kx[1:].copy()

    def _cdf_scalar(self, x):
        if x <= 0.0:
            return 0.0
        if x >= self._hi:
            return 1.0
        x = x / self.scale
        # rightmost anchor at or below x; duplicates (atoms) resolve to the
        # highest height, giving a right-continuous CDF
        j = bisect.bisect_right(self._kx_list, x)
        if j >= len(self._kx_list):
            return 1.0
        x0, y0 = self._kx[j - 1], self._ky[j - 1]
        x1, y1 = self._kx[j], self._ky[j]
        return y0 + (x - x0) * (y1 - y0) / (x1 - x0)

    def _cdf_vec(self, xs):
        xs = np.asarray(xs, dtype=float)
        scaled = np.clip(xs, 0.0, self._hi) / self.scale
        j = np.searchsorted(self._kx, scaled, side="right")
        j = np.clip(j, 1, len(self._kx) - 1)
        x0 = self._kx[j - 1]
        y0 = self._ky[j - 1]
        x1 = self._kx[j]
        y1 = self._ky[j]
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(x1 > x0, (scaled - x0) / (x1 - x0), 0.0)
        out = y0 + np.clip(frac, 0.0, 1.0) * (y1 - y0)
        out = np.where(xs >= self._hi, 1.0, out)
        out = np.where(xs <= 0.0, 0.0, out)
        return out

    def _quantile_scalar(self, u):
        j = bisect.bisect_left(self._ky_list, u)
        if j <= 0:
            return 0.0
        if j >= len(self._ky):
            return self.scale * self._kx[-1]
        x0, y0 = self._kx[j - 1], self._ky[j - 1]
        x1, y1 = self._kx[j], self._ky[j]
        return self.scale * (x0 + (u - y0) * (x1 - x0) / (y1 - y0))

    def _quantile_vec(self, us):
        us = np.asarray(us, dtype=float)
        j = np.searchsorted(self._ky, us, side="left")
        j = np.clip(j, 1, len(self._ky) - 1)
        x0 = self._kx[j - 1]
        y0 = self._ky[j - 1]
        x1 = self._kx[j]
        y1 = self._ky[j]
        out = x0 + (us - y0) * (x1 - x0) / (y1 - y0)
        out = np.where(us <= 0.0, 0.0, out)
        return self.scale * out

    def pdf(self, x):
        """Piecewise-constant density between anchors; 0 outside the support.

        Probability atoms (tied samples) have no density; points exactly at
        an atom report the density of the segment to their right.
        """
        xs = np.asarray(x, dtype=float)
        scaled = xs / self.scale
        j = np.searchsorted(self._kx, scaled, side="right")
        j = np.clip(j, 1, len(self._kx) - 1)
        x0 = self._kx[j - 1]
        y0 = self._ky[j - 1]
        x1 = self._kx[j]
        y1 = self._ky[j]
        with np.errstate(invalid="ignore", divide="ignore"):
            slope = np.where(x1 > x0, (y1 - y0) / (x1 - x0), 0.0)
        dens = slope / self.scale
        dens = np.where((xs < 0.0) | (xs > self._hi), 0.0, dens)
        return float(dens) if np.isscalar(x) or xs.ndim == 0 else dens

    def expected_shortfall(self, x):
        """E[(x - X)+], exact for the piecewise-linear CDF.

        The CDF integrates in closed form between anchors (trapezoids), so
        no quadrature is involved for empirical models.
        """
        x = float(x)
        if x < 0:
            raise ValueError(f"commitment must be non-negative, got {x}")
        return float(self._shortfall_exact(np.asarray([x]))[0])

    def shortfall_curve(self, xs):
        xs = np.asarray(xs, dtype=float)
        if xs.size and xs.min() < 0:
            raise ValueError("commitments must be non-negative")
        return self._shortfall_exact(xs)

    def _shortfall_exact(self, xs):
        # cumulative trapezoid integral of the CDF up to each anchor, then
        # one partial trapezoid for the remainder of each query point
        kx = self._kx * self.scale
        ky = self._ky
        cum = self._cum_integral
        body = np.clip(xs, 0.0, self._hi)
        j = np.searchsorted(kx, body, side="right")
        j = np.clip(j, 1, len(kx) - 1)
        x0 = kx[j - 1]
        y0 = ky[j - 1]
        x1 = kx[j]
        y1 = ky[j]
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(x1 > x0, (body - x0) / (x1 - x0), 0.0)
        y_at = y0 + np.clip(frac, 0.0, 1.0) * (y1 - y0)
        partial = 0.5 * (y0 + y_at) * (body - x0)
        out = cum[j - 1] + partial + np.clip(xs - self._hi, 0.0, None)
        return out

    def _mass_weighted_integral(self, upper):
        # Stieltjes integral int over (0, upper] of t dF(t): linear segments
        # contribute slope * (b^2 - a^2)/2, atoms contribute x * jump mass.
        upper = min(max(upper, 0.0), self._hi) / self.scale
        if upper <= 0.0:
            return 0.0
        total = 0.0
        for k in range(1, len(self._kx)):
            x0, y0 = self._kx[k - 1], self._ky[k - 1]
            x1, y1 = self._kx[k], self._ky[k]
            if x1 == x0:
                if x1 <= upper:
                    total += x1 * (y1 - y0)
                continue
            a = max(x0, 0.0)
            b = min(x1, upper)
            if b <= a:
                if x0 > upper:
                    break
                continue
            slope = (y1 - y0) / (x1 - x0)
            total += slope * 0.5 * (b * b - a * a)
        return self.scale * total

    def __repr__(self):
        return (f"EmpiricalModel(n={len(self._kx) - 1}, "
                f"scale={self.scale}, support_hi={self._hi})")
