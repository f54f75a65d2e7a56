"""Analytic limit objects for the spectral edge.

Contents:

* the outlier map f(x) = x + 1/x (x >= 1, else 2) and its inverse;
* the Frechet family P(xi <= x) = exp(-c x**(-2(1+1/mu)) / 2) and the
  deformed edge law obtained by pushing it through f (an atom sits at 2);
* the intensity of the extreme-entry Poisson process and a simulator for
  its top-k points;
* the Marchenko-Pastur density/Stieltjes transform on
  [a_alpha, b_alpha] = [(1-sqrt(alpha))^2, (1+sqrt(alpha))^2], computed by
  substitution quadrature (x = midpoint + halfwidth*sin(theta) absorbs the
  square-root edges), with a closed form that is only enabled after it
  matches the quadrature;
* the covariance-case outlier curve F_alpha, its critical point tau_alpha,
  and the law of the top sample-covariance eigenvalue.

Convention for the covariance equation: the defining equation multiplies the
transform of the Marchenko-Pastur law by the transform of its *companion*
spectral law -- the reciprocal-shape matrix's limit, which carries an atom of
mass 1 - 1/alpha at zero:

    G_comp(z) = (1 - 1/alpha)/z + G_mp(z)/alpha.

With this reading the alpha = 1 closed forms hold verbatim and the
supercritical plant prediction matches Monte Carlo; dropping the atom term
does not.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, InvalidParameterError

__all__ = [
    "f_bbp",
    "f_inverse",
    "frechet_cdf",
    "frechet_quantile",
    "lambda1_cdf",
    "poisson_intensity",
    "poisson_expected_count",
    "simulate_poisson_topk",
    "mp_edges",
    "mp_density",
    "mp_stieltjes",
    "mp_companion_stieltjes",
    "falpha_equation_lhs",
    "tau_alpha",
    "f_alpha",
    "f_alpha_closed",
    "tau_alpha_closed",
    "super_poly_limit",
    "FrechetLaw",
    "DeformedFrechetEdgeLaw",
    "CovarianceEdgeLaw",
]


# ---------------------------------------------------------------------------
# The outlier map f and the Frechet family
# ---------------------------------------------------------------------------


def f_bbp(x):
    """f(x) = x + 1/x for x >= 1, and 2 on 0 < x < 1."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise InvalidParameterError("f is defined for positive arguments only")
    out = np.where(x >= 1.0, x + 1.0 / np.where(x >= 1.0, x, 1.0), 2.0)
    return out if out.ndim else float(out)


def f_inverse(lam):
    """Inverse of f on [2, inf): (lam + sqrt(lam^2 - 4)) / 2."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 2.0):
        raise InvalidParameterError("f_inverse requires lambda >= 2")
    out = 0.5 * (lam + np.sqrt(lam * lam - 4.0))
    return out if out.ndim else float(out)


def _check_frechet_params(c, mu):
    if not c > 0.0:
        raise InvalidParameterError("tail constant c must be positive")
    if not 0.0 < mu <= 1.0:
        raise InvalidParameterError("sparsity exponent mu must lie in (0, 1]")


def _tail_exponent(mu):
    return 2.0 * (1.0 + 1.0 / mu)


def frechet_cdf(x, c, mu):
    """P(xi <= x) = exp(-c x**(-2(1+1/mu)) / 2); zero for x <= 0."""
    _check_frechet_params(c, mu)
    x = np.asarray(x, dtype=float)
    be = _tail_exponent(mu)
    with np.errstate(divide="ignore"):
        out = np.where(x > 0.0, np.exp(-0.5 * c * np.maximum(x, 1e-300) ** (-be)), 0.0)
    return out if out.ndim else float(out)


def frechet_quantile(u, c, mu):
    """Exact inverse of :func:`frechet_cdf` on (0, 1)."""
    _check_frechet_params(c, mu)
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise InvalidParameterError("quantile level must lie in (0, 1)")
    be = _tail_exponent(mu)
    out = (-2.0 * np.log(u) / c) ** (-1.0 / be)
    return out if out.ndim else float(out)


def lambda1_cdf(t, c, mu):
    """CDF of f(xi): 0 below 2, atom of mass exp(-c/2) at 2, Frechet above."""
    _check_frechet_params(c, mu)
    t = np.asarray(t, dtype=float)
    safe = np.where(t >= 2.0, t, 2.0)
    out = np.where(t >= 2.0, frechet_cdf(f_inverse(safe), c, mu), 0.0)
    return out if out.ndim else float(out)


def poisson_intensity(x, c, mu):
    """Density c(1+1/mu) x**(-2(1+1/mu)-1) of the extreme-entry point process."""
    _check_frechet_params(c, mu)
    x = np.asarray(x, dtype=float)
    be = _tail_exponent(mu)
    out = c * (be / 2.0) * x ** (-be - 1.0)
    return out if out.ndim else float(out)


def poisson_expected_count(c0, c, mu):
    """Integral of the intensity over [c0, inf) = (c/2) c0**(-2(1+1/mu))."""
    _check_frechet_params(c, mu)
    if not c0 > 0.0:
        raise InvalidParameterError("threshold c0 must be positive")
    return 0.5 * c * c0 ** (-_tail_exponent(mu))


def simulate_poisson_topk(rng, c, mu, k, size):
    """size x k matrix of the k largest process points pushed through f.

    Uses the exponential-spacings construction: with E_1 < E_2 < ... the
    arrival times of a unit-rate Poisson process, the j-th largest point is
    the value x_j with expected count E_j above it.
    """
    _check_frechet_params(c, mu)
    be = _tail_exponent(mu)
    arrivals = np.cumsum(rng.exponential(size=(size, k)), axis=1)
    zeta = (2.0 * arrivals / c) ** (-1.0 / be)
    return f_bbp(zeta)


# ---------------------------------------------------------------------------
# Marchenko-Pastur transform and the covariance outlier curve
# ---------------------------------------------------------------------------

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(nodes):
    if nodes not in _GL_CACHE:
        t, w = np.polynomial.legendre.leggauss(nodes)
        _GL_CACHE[nodes] = (t * (math.pi / 2.0), w * (math.pi / 2.0))
    return _GL_CACHE[nodes]


def _check_alpha(alpha):
    if not alpha > 0.0:
        raise InvalidParameterError("aspect ratio alpha must be positive")


def mp_edges(alpha):
    """Support endpoints ((1-sqrt(alpha))^2, (1+sqrt(alpha))^2)."""
    _check_alpha(alpha)
    r = math.sqrt(alpha)
    return (1.0 - r) ** 2, (1.0 + r) ** 2


def mp_density(x, alpha):
    """sqrt((b-x)(x-a)) / (2 pi x) on [a, b]; total mass min(1, alpha)."""
    a, b = mp_edges(alpha)
    x = np.asarray(x, dtype=float)
    inside = (x > a) & (x < b)
    out = np.zeros_like(x)
    xs = np.where(inside, x, (a + b) / 2.0)
    out = np.where(inside, np.sqrt(np.maximum((b - xs) * (xs - a), 0.0)) / (2.0 * math.pi * xs), 0.0)
    return out if out.ndim else float(out)


def _mp_stieltjes_quadrature(z, alpha, nodes):
    a, b = mp_edges(alpha)
    mid, half = (a + b) / 2.0, (b - a) / 2.0
    theta, w = _gl_nodes(nodes)
    x = mid + half * np.sin(theta)
    weight = half * np.cos(theta) ** 2 / (2.0 * math.pi) * half
    z = np.asarray(z, dtype=float)
    vals = np.sum(weight * w / (x * (z[..., None] - x)), axis=-1)
    return vals


def _mp_stieltjes_closed(z, alpha):
    # Numerator carries -|1 - alpha|: the formula measure has mass min(1, alpha).
    z = np.asarray(z, dtype=float)
    disc = (z - 1.0 - alpha) ** 2 - 4.0 * alpha
    return (z - abs(1.0 - alpha) - np.sqrt(np.maximum(disc, 0.0))) / (2.0 * z)


_CLOSED_FORM_OK: dict[bool, bool] = {}


def _closed_form_validated():
    """Enable the closed form only after it matches quadrature to 1e-6."""
    if True not in _CLOSED_FORM_OK:
        ok = True
        for alpha in (0.25, 0.5, 1.0, 2.0, 5.0):
            _, b = mp_edges(alpha)
            z = np.linspace(b, b + 50.0, 40)
            q = _mp_stieltjes_quadrature(z, alpha, 400)
            cfm = _mp_stieltjes_closed(z, alpha)
            if np.max(np.abs(q - cfm)) > 1e-6:
                ok = False
                break
        _CLOSED_FORM_OK[True] = ok
    return _CLOSED_FORM_OK[True]


def mp_stieltjes(z, alpha, nodes=200, method="auto"):
    """G(z) = integral of mp_density(x, alpha) / (z - x) dx, for z >= b_alpha.

    ``method`` is one of ``"quadrature"`` (Gauss-Legendre after the sine
    substitution), ``"closed"`` (validated closed form), or ``"auto"``
    (closed form once validated against quadrature, else quadrature).
    """
    _check_alpha(alpha)
    z_arr = np.asarray(z, dtype=float)
    _, b = mp_edges(alpha)
    if np.any(z_arr < b - 1e-12):
        raise DomainError(f"z must lie at or above the upper edge b={b:.6g}")
    if method == "closed" or (method == "auto" and _closed_form_validated()):
        out = _mp_stieltjes_closed(z_arr, alpha)
    elif method in ("auto", "quadrature"):
        out = _mp_stieltjes_quadrature(z_arr, alpha, nodes)
    else:
        raise InvalidParameterError(f"unknown method {method!r}")
    return out if out.ndim else float(out)


def mp_companion_stieltjes(z, alpha, nodes=200, method="auto"):
    """Transform of the companion law (1 - 1/alpha) delta_0 + pi_alpha / alpha.

    This is the spectral limit of the reciprocal-shape product matrix (same
    nonzero spectrum, dimension larger by the factor alpha, hence the atom at
    zero). It reduces to :func:`mp_stieltjes` at alpha = 1.
    """
    _check_alpha(alpha)
    z_arr = np.asarray(z, dtype=float)
    base = mp_stieltjes(z_arr, alpha, nodes=nodes, method=method)
    out = (1.0 - 1.0 / alpha) / z_arr + np.asarray(base) / alpha
    return out if out.ndim else float(out)


def _check_alpha_geq1(alpha):
    if not alpha >= 1.0:
        raise InvalidParameterError(
            "alpha >= 1 required; for alpha < 1 pass the reciprocal ratio"
        )


def covariance_edge_z(alpha):
    """Lower endpoint (1+sqrt(alpha))/sqrt(1+alpha) of the outlier branch."""
    _check_alpha_geq1(alpha)
    return (1.0 + math.sqrt(alpha)) / math.sqrt(1.0 + alpha)


def falpha_equation_lhs(z, alpha, nodes=200, method="auto"):
    """Left side z^2 (1+alpha)^2 G(zeta) G_comp(zeta) at zeta = (1+alpha) z^2.

    Monotone decreasing in z on (edge, inf); the outlier equation sets it
    equal to 1/x^2.
    """
    _check_alpha_geq1(alpha)
    z = np.asarray(z, dtype=float)
    zeta = (1.0 + alpha) * z * z
    g = np.asarray(mp_stieltjes(zeta, alpha, nodes=nodes, method=method))
    gc = np.asarray(mp_companion_stieltjes(zeta, alpha, nodes=nodes, method=method))
    out = z * z * (1.0 + alpha) ** 2 * g * gc
    return out if out.ndim else float(out)


def tau_alpha(alpha, nodes=200, method="auto"):
    """Critical plant size: 1/sqrt of the equation's left side at the edge."""
    _check_alpha_geq1(alpha)
    ze = covariance_edge_z(alpha)
    return 1.0 / math.sqrt(falpha_equation_lhs(ze, alpha, nodes=nodes, method=method))


def tau_alpha_closed(alpha):
    """Closed form alpha**(1/4) / sqrt(1 + alpha); oracle for tau_alpha."""
    _check_alpha_geq1(alpha)
    return alpha**0.25 / math.sqrt(1.0 + alpha)


def f_alpha(x, alpha, tol=1e-12, nodes=200, method="auto"):
    """The outlier curve F_alpha(x).

    Equals the edge value (1+sqrt(alpha))/sqrt(1+alpha) for x < tau_alpha,
    and for x > tau_alpha the unique z above the edge solving
    falpha_equation_lhs(z, alpha) = 1/x^2, found by bracketed bisection on
    the monotone decreasing left side.
    """
    _check_alpha_geq1(alpha)
    x = float(x)
    if not x > 0.0:
        raise InvalidParameterError("plant size x must be positive")
    ze = covariance_edge_z(alpha)
    tau = tau_alpha(alpha, nodes=nodes, method=method)
    if x <= tau:
        return ze
    target = 1.0 / (x * x)
    lo = ze * (1.0 + 1e-12)
    hi = max(ze + 1.0, 2.0 * x + 2.0)
    for _ in range(200):
        if falpha_equation_lhs(hi, alpha, nodes=nodes, method=method) < target:
            break
        hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the outlier equation root")
    for _ in range(200):
        midp = 0.5 * (lo + hi)
        if falpha_equation_lhs(midp, alpha, nodes=nodes, method=method) > target:
            lo = midp
        else:
            hi = midp
        if hi - lo < tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def f_alpha_closed(x, alpha):
    """Closed-form oracle for F_alpha derived from the MP quadratic.

    With u = 1 + alpha/((1+alpha) x^2), the outlier location solves
    zeta = u (u + alpha - 1) / (u - 1) and F_alpha = sqrt(zeta / (1+alpha)).
    """
    _check_alpha_geq1(alpha)
    x = float(x)
    if x <= tau_alpha_closed(alpha):
        return covariance_edge_z(alpha)
    u = 1.0 + alpha / ((1.0 + alpha) * x * x)
    zeta = u * (u + alpha - 1.0) / (u - 1.0)
    return math.sqrt(zeta / (1.0 + alpha))


def super_poly_limit(sp):
    """Deterministic top-eigenvalue limit f(a) in the super-polynomial regime."""
    return f_bbp(sp.limit_constant())


# ---------------------------------------------------------------------------
# Law objects (shared cdf/cdf_left/atoms/quantile protocol for scoring)
# ---------------------------------------------------------------------------


class FrechetLaw:
    """Continuous law of xi_c^mu."""

    kind = "frechet_mu"

    def __init__(self, c, mu):
        _check_frechet_params(c, mu)
        self.c = float(c)
        self.mu = float(mu)
        self.atoms: list[tuple[float, float]] = []

    def cdf(self, x):
        return frechet_cdf(x, self.c, self.mu)

    def cdf_left(self, x):
        return self.cdf(x)

    def quantile(self, u):
        return frechet_quantile(u, self.c, self.mu)

    def params(self):
        return {"c": self.c, "mu": self.mu}


class DeformedFrechetEdgeLaw:
    """Law of f(xi_c^mu): atom exp(-c/2) at 2, Frechet pushforward above."""

    kind = "pushforward_f"

    def __init__(self, c, mu):
        _check_frechet_params(c, mu)
        self.c = float(c)
        self.mu = float(mu)
        self.atom_mass = frechet_cdf(1.0, c, mu)
        self.atoms = [(2.0, self.atom_mass)]

    def cdf(self, t):
        return lambda1_cdf(t, self.c, self.mu)

    def cdf_left(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.asarray(lambda1_cdf(t_arr, self.c, self.mu)).copy()
        out = np.where(np.isclose(t_arr, 2.0), out - self.atom_mass, out)
        out = np.maximum(out, 0.0)
        return out if out.ndim else float(out)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0.0) | (u >= 1.0)):
            raise InvalidParameterError("quantile level must lie in (0, 1)")
        safe = np.where(u > self.atom_mass, u, 0.5 * (1.0 + self.atom_mass))
        above = f_bbp(frechet_quantile(safe, self.c, self.mu))
        out = np.where(u > self.atom_mass, above, 2.0)
        return out if out.ndim else float(out)

    def params(self):
        return {"c": self.c, "mu": self.mu}


class CovarianceEdgeLaw:
    """Law of (1+alpha) F_alpha(xi_{c,alpha})^2 for the top covariance eigenvalue.

    xi_{c,alpha} is Frechet: P(xi <= x) = exp(-c alpha x^-4 / (1+alpha)^2),
    the limit of the largest |entry| of S / sqrt(N). The pushforward has an
    atom at b_alpha = (1+sqrt(alpha))^2 of mass P(xi <= tau_alpha).
    """

    kind = "covariance_edge"

    def __init__(self, c, alpha):
        if not c > 0.0:
            raise InvalidParameterError("tail constant c must be positive")
        _check_alpha_geq1(alpha)
        self.c = float(c)
        self.alpha = float(alpha)
        _, self.b_edge = mp_edges(alpha)
        self.tau = tau_alpha(alpha)
        self.atom_mass = self._xi_cdf(self.tau)
        self.atoms = [(self.b_edge, self.atom_mass)]

    def _xi_cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(
            x > 0.0,
            np.exp(-self.c * self.alpha * np.maximum(x, 1e-300) ** (-4.0) / (1.0 + self.alpha) ** 2),
            0.0,
        )
        return out if out.ndim else float(out)

    def _plant_size_at(self, t):
        """Inverse of t = (1+alpha) F_alpha(x)^2 for t > b_edge.

        Given z = sqrt(t / (1+alpha)) above the edge, the defining equation
        yields x directly as 1/sqrt(lhs(z)).
        """
        z = math.sqrt(t / (1.0 + self.alpha))
        return 1.0 / math.sqrt(falpha_equation_lhs(z, self.alpha))

    def cdf(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t_arr)
        for i, ti in enumerate(t_arr):
            if ti < self.b_edge:
                out[i] = 0.0
            elif ti <= self.b_edge * (1.0 + 1e-14):
                out[i] = self.atom_mass
            else:
                out[i] = self._xi_cdf(self._plant_size_at(ti))
        return out if np.ndim(t) else float(out[0])

    def cdf_left(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.asarray(self.cdf(t_arr)).copy()
        out = np.where(np.isclose(t_arr, self.b_edge), 0.0, out)
        return out if np.ndim(t) else float(out[0])

    def quantile(self, u):
        u = float(u)
        if not 0.0 < u < 1.0:
            raise InvalidParameterError("quantile level must lie in (0, 1)")
        if u <= self.atom_mass:
            return self.b_edge
        x = (-math.log(u) * (1.0 + self.alpha) ** 2 / (self.c * self.alpha)) ** (-0.25)
        return (1.0 + self.alpha) * f_alpha(x, self.alpha) ** 2

    def params(self):
        return {"c": self.c, "alpha": self.alpha}
