"""Heavy-tailed entry distributions with exactly controlled tail behavior.

The central object is :class:`TailLaw`: a symmetric, mean-zero, unit-variance
law whose survival function is *exactly* Pareto beyond a crossover point x0,

    P(|a| > x) = c * x**(-beta)        for every x >= x0,

rather than merely asymptotically so. Below the crossover the law is a
symmetric uniform "body" whose half-width is solved so the total variance is
one. Making the tail exact turns finite-size extreme-value product formulas
into sharp, testable identities instead of asymptotic statements.

All sampling is inverse-CDF based and fully determined by the caller's
``numpy.random.Generator``; laws themselves are immutable and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .errors import InfeasibleVarianceError, InvalidParameterError, OutOfRangeError

__all__ = [
    "TailLaw",
    "GaussianLaw",
    "SuperPolyTail",
    "build_crossover_law",
    "default_g",
]


@dataclass(frozen=True)
class TailLaw:
    """Symmetric mixture of a uniform body and a pure Pareto tail.

    tail_weight = tail_constant * crossover_point**(-tail_index) is the total
    probability carried by the tail component; with probability
    1 - tail_weight a draw comes from Uniform[-body_scale, body_scale].
    """

    tail_constant: float
    tail_index: float
    crossover_point: float
    body_scale: float
    tail_weight: float

    # -- exact distribution functions -------------------------------------

    def tail_prob(self, x):
        """P(|a| > x), exact and piecewise: linear body, flat gap, Pareto tail."""
        x = np.asarray(x, dtype=float)
        p, s, x0 = self.tail_weight, self.body_scale, self.crossover_point
        out = np.empty_like(x)
        body = x < s
        gap = (x >= s) & (x < x0)
        tail = x >= x0
        if s > 0.0:
            out[body] = p + (1.0 - p) * (1.0 - x[body] / s)
        else:
            out[body] = 1.0
        out[gap] = p
        out[tail] = self.tail_constant * x[tail] ** (-self.tail_index)
        out = np.where(x <= 0.0, 1.0, out)
        return out if out.ndim else float(out)

    def cdf(self, x):
        """P(a <= x) of the full symmetric law."""
        x = np.asarray(x, dtype=float)
        sf_abs = self.tail_prob(np.abs(x))
        out = np.where(x >= 0.0, 1.0 - 0.5 * sf_abs, 0.5 * sf_abs)
        return out if out.ndim else float(out)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.atleast_1d(np.abs(x))
        p, s, x0, beta = (
            self.tail_weight,
            self.body_scale,
            self.crossover_point,
            self.tail_index,
        )
        out = np.zeros_like(ax)
        if s > 0.0:
            out[ax <= s] = (1.0 - p) / (2.0 * s)
        tail = ax >= x0
        out[tail] = p * beta * x0**beta * ax[tail] ** (-beta - 1.0) / 2.0
        return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])

    # -- sampling ----------------------------------------------------------

    def _inverse_survival(self, t):
        """|a| value whose survival probability equals t (0 < t <= 1)."""
        p, s, x0, beta = (
            self.tail_weight,
            self.body_scale,
            self.crossover_point,
            self.tail_index,
        )
        tail = t <= p
        out = np.empty_like(t)
        with np.errstate(divide="ignore"):
            out[tail] = x0 * (p / t[tail]) ** (1.0 / beta) if p > 0.0 else 0.0
        out[~tail] = s * (1.0 - t[~tail]) / (1.0 - p)
        return out

    def sample(self, rng, size=None):
        """i.i.d. draws; exact inverse-CDF on both branches."""
        scalar = size is None
        n = 1 if scalar else int(np.prod(size))
        mag = self._inverse_survival(rng.random(n))
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        out = sign * mag
        if scalar:
            return float(out[0])
        return out.reshape(size)

    def sample_above(self, rng, q, size):
        """Draws from the law conditioned on |a| > q (signed, symmetric)."""
        sq = float(self.tail_prob(q))
        if sq <= 0.0:
            raise InvalidParameterError("conditioning event |a|>q has probability 0")
        n = int(size)
        mag = self._inverse_survival(rng.random(n) * sq)
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return sign * mag

    def sample_below(self, rng, q, size):
        """Draws from the law conditioned on |a| < q (signed, symmetric)."""
        fq = 1.0 - float(self.tail_prob(q))
        if fq <= 0.0:
            raise InvalidParameterError("conditioning event |a|<q has probability 0")
        p, s, x0, beta = (
            self.tail_weight,
            self.body_scale,
            self.crossover_point,
            self.tail_index,
        )
        n = int(size)
        y = rng.random(n) * fq
        body = y <= 1.0 - p
        mag = np.empty(n)
        mag[body] = s * y[body] / (1.0 - p)
        mag[~body] = x0 * (p / (1.0 - y[~body])) ** (1.0 / beta)
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return sign * mag

    # -- analytic moments ---------------------------------------------------

    def moment(self, k):
        """k-th moment. Odd moments vanish by symmetry; inf when divergent."""
        if k % 2 == 1:
            return 0.0
        p, s, x0, beta = (
            self.tail_weight,
            self.body_scale,
            self.crossover_point,
            self.tail_index,
        )
        body = (1.0 - p) * s**k / (k + 1.0)
        if p == 0.0:
            return body
        if beta <= k:
            return math.inf
        tail = p * beta * x0**k / (beta - k)
        return body + tail

    @property
    def variance(self):
        return self.moment(2)

    def truncated_second_moment(self, q):
        """E[a^2 1_{|a| <= q}], in closed form."""
        p, s, x0, beta = (
            self.tail_weight,
            self.body_scale,
            self.crossover_point,
            self.tail_index,
        )
        body = (1.0 - p) * min(q, s) ** 3 / (3.0 * s) if s > 0.0 else 0.0
        tail = 0.0
        if p > 0.0 and q > x0:
            tail = p * beta * (x0**2 - x0**beta * q ** (2.0 - beta)) / (beta - 2.0)
        return body + tail


def build_crossover_law(c, beta, x0):
    """Construct the unit-variance crossover law with survival c*x**(-beta) past x0.

    The body half-width is found by a one-dimensional root find on the total
    variance. Raises :class:`InfeasibleVarianceError` when the tail alone
    carries variance >= 1 (the caller must raise x0), and
    :class:`InvalidParameterError` for beta <= 2 or tail probability > 1.
    """
    c, beta, x0 = float(c), float(beta), float(x0)
    if beta <= 2.0:
        raise InvalidParameterError(f"tail index beta={beta} must exceed 2")
    if x0 <= 0.0:
        raise InvalidParameterError("crossover point must be positive")
    if c < 0.0:
        raise InvalidParameterError("tail constant must be nonnegative")
    p_tail = c * x0 ** (-beta)
    if p_tail > 1.0:
        raise InvalidParameterError(
            f"tail probability c*x0^-beta = {p_tail:.4g} exceeds 1; raise x0"
        )
    if p_tail == 0.0:
        return TailLaw(c, beta, x0, math.sqrt(3.0), 0.0)
    tail_var = p_tail * beta * x0**2 / (beta - 2.0)
    if tail_var >= 1.0:
        raise InfeasibleVarianceError(
            f"tail variance {tail_var:.4g} >= 1 at x0={x0}; raise x0"
        )

    def excess(s):
        return p_tail * beta * x0**2 / (beta - 2.0) + (1.0 - p_tail) * s**2 / 3.0 - 1.0

    s_hi = math.sqrt(3.0 / (1.0 - p_tail)) + 1.0
    s = brentq(excess, 0.0, s_hi, xtol=1e-14, rtol=8.881784197001252e-16)
    if s > x0:
        raise InfeasibleVarianceError(
            f"body half-width {s:.4g} exceeds x0={x0}; the tail would not be pure"
        )
    return TailLaw(c, beta, x0, s, p_tail)


class GaussianLaw:
    """Standard normal entries; the light-tailed background for spike tests."""

    variance = 1.0
    tail_weight = 0.0

    def sample(self, rng, size=None):
        return rng.standard_normal(size)

    def tail_prob(self, x):
        x = np.asarray(x, dtype=float)
        out = 2.0 * ndtr(-np.abs(x))
        out = np.where(x <= 0.0, 1.0, out)
        return out if out.ndim else float(out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = ndtr(x)
        return out if out.ndim else float(out)

    def moment(self, k):
        if k % 2 == 1:
            return 0.0
        return float(np.prod(np.arange(1, k, 2, dtype=float))) if k else 1.0

    def __repr__(self):
        return "GaussianLaw()"


def default_g(x):
    """g(x) = loglog(x) * logloglog(x): monotone, between loglog and log growth."""
    llx = np.log(np.log(x))
    return llx * np.log(llx)


class SuperPolyTail:
    """Utilities for the super-polynomial sparsity regime.

    Stores a monotone exponent function g and the constant a > 1, and exposes
    the pair of mutually inverse maps

        h_inverse(x) = a * sqrt(log(x)**g(x))     (forward map)
        h_eval(y)    = x  such that  h_inverse(x) = y,

    so that h_eval is the function h with h(a*sqrt(log(x)**g(x))) = x. The
    inverse is computed by bisection against an internal monotone lookup
    table over ``[x_min, x_max]``.
    """

    def __init__(self, a, g=default_g, x_min=1e2, x_max=1e120, table_size=4096):
        if a <= 1.0:
            raise InvalidParameterError("the constant a must exceed 1")
        if x_min <= math.e**math.e:
            raise InvalidParameterError("x_min must exceed e^e for g to be defined")
        self.a = float(a)
        self.g = g
        self.x_min = float(x_min)
        self.x_max = float(x_max)
        logx = np.linspace(math.log(x_min), math.log(x_max), table_size)
        self._log_x = logx
        self._log_phi = np.array([math.log(self._forward_logx(t)) for t in logx])
        if not np.all(np.diff(self._log_phi) > 0.0):
            raise InvalidParameterError("g does not yield a strictly increasing map")

    def _forward_logx(self, logx):
        # a * sqrt(log(x)^g(x)) = a * exp(g(x) * log(log x) / 2)
        x = math.exp(logx)
        return self.a * math.exp(0.5 * self.g(x) * math.log(logx))

    def h_inverse(self, x):
        """Forward map a*sqrt(log(x)**g(x)); defined on the tabulated range."""
        x = float(x)
        if not (self.x_min <= x <= self.x_max):
            raise OutOfRangeError(f"x={x:.4g} outside [{self.x_min:.4g}, {self.x_max:.4g}]")
        return self._forward_logx(math.log(x))

    def h_eval(self, y):
        """h(y): bisection solve of the forward map, table-bracketed."""
        y = float(y)
        logy = math.log(y)
        if not (self._log_phi[0] <= logy <= self._log_phi[-1]):
            raise OutOfRangeError("y outside the tabulated range of the forward map")
        j = int(np.searchsorted(self._log_phi, logy))
        lo = self._log_x[max(j - 1, 0)]
        hi = self._log_x[min(j, len(self._log_x) - 1)]
        if hi <= lo:
            return math.exp(lo)
        f = lambda t: self._forward_logx(t) - y
        root = brentq(f, lo, hi, xtol=1e-13, rtol=8.881784197001252e-16)
        return math.exp(root)

    def limit_constant(self):
        return self.a
