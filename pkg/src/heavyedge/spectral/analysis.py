"""Eigenvector localization statistics and matrix-parameter diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, InvalidParameterError

__all__ = [
    "overlap",
    "localization_target",
    "localization_event",
    "LocalizationOutcome",
    "BvhParameters",
    "bvh_parameters",
]


def overlap(v, i, j, sign):
    """|<v, (delta_i + sign * delta_j)/sqrt(2)>| = |v_i + sign*v_j| / sqrt(2)."""
    if i == j:
        raise InvalidParameterError("overlap needs distinct indices")
    if sign not in (-1, 1):
        raise InvalidParameterError("sign must be +1 or -1")
    n = len(v)
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"indices ({i}, {j}) outside [0, {n})")
    return abs(v[i] + sign * v[j]) / math.sqrt(2.0)


def localization_target(lam):
    """t(lambda) = 1 - 4/(lambda + sqrt(lambda^2 - 4))^2, for lambda > 2."""
    if not lam > 2.0:
        raise InvalidParameterError("localization target needs lambda > 2")
    return 1.0 - 4.0 / (lam + math.sqrt(lam * lam - 4.0)) ** 2


@dataclass
class LocalizationOutcome:
    event: bool
    i: int
    j: int
    sign: int
    overlap_sq: float
    target: float


def localization_event(v, lam, eps):
    """Does the squared overlap on the two heaviest coordinates land in
    t(lambda) * [1-eps, 1+eps]?

    The optimal pair (i, j, sign) maximizes |v_i| + |v_j|, so scanning the two
    largest-|coordinate| positions suffices.
    """
    if not eps > 0.0:
        raise InvalidParameterError("eps must be positive")
    t = localization_target(lam)
    v = np.asarray(v, dtype=float)
    if len(v) < 2:
        raise DomainError("vector must have at least two coordinates")
    idx = np.argpartition(-np.abs(v), 1)[:2]
    i, j = int(idx[0]), int(idx[1])
    sign = 1 if v[i] * v[j] >= 0.0 else -1
    ov_sq = overlap(v, i, j, sign) ** 2
    event = t * (1.0 - eps) <= ov_sq <= t * (1.0 + eps)
    return LocalizationOutcome(bool(event), i, j, sign, float(ov_sq), float(t))


@dataclass
class BvhParameters:
    """Computable diagnostics of the universality theorem's four parameters.

    ``log_gate`` is (log n)^2 * R, the quantity that must vanish for the
    Gaussian-replacement step to apply.
    """

    sigma: float
    sigma_star: float
    v: float
    r_bound: float
    log_gate: float


def _profile_from_sample(sample):
    """(n, max entry var, max diag var, max row var sum, entry bound or None)."""
    kind = sample.kind
    n = sample.shape[0]
    meta = sample.meta
    law = meta.get("law")

    def law_bound():
        if law is None:
            return None
        weight = getattr(law, "tail_weight", None)
        if weight == 0.0 and hasattr(law, "body_scale"):
            return law.body_scale
        return None

    if kind in ("dense_wigner", "sparse_wigner"):
        p_n = meta["p_n"]
        site_var = (p_n / n) * sample.scale**2
        bound = law_bound()
        return n, site_var, site_var, n * site_var, (
            bound * sample.scale if bound is not None else None
        )
    if kind in ("band", "regular_graph"):
        k_n = meta["k_n"]
        site_var = sample.scale**2
        bound = law_bound()
        return n, site_var, site_var, k_n * site_var, (
            bound * sample.scale if bound is not None else None
        )
    if kind == "small_part":
        p_n = meta["p_n"]
        q = meta["q_threshold"]
        second = law.truncated_second_moment(q) / (1.0 - float(law.tail_prob(q)))
        site_var = (p_n / n) * second * sample.scale**2
        return n, site_var, site_var, n * site_var, meta["entry_bound"]
    raise DomainError(f"unsupported variance profile for ensemble kind {kind!r}")


def bvh_parameters(sample):
    """Closed-form matrix parameters (sigma, sigma_*, v, R) from the variance
    profile of an i.i.d.-profile ensemble, plus the (log n)^2 R gate.

    R is the deterministic bound on a single summand's operator norm; laws
    without a deterministic entry bound (heavy tails present) raise, since R
    is then infinite and the gate is vacuous.
    """
    n, entry_var, diag_var, row_var, bound = _profile_from_sample(sample)
    if bound is None:
        raise DomainError(
            "ensemble entries are unbounded; the R parameter is undefined"
        )
    sigma = math.sqrt(row_var)
    sigma_star = math.sqrt(entry_var)
    v = math.sqrt(max(2.0 * entry_var, diag_var))
    gate = math.log(n) ** 2 * bound
    return BvhParameters(sigma=sigma, sigma_star=sigma_star, v=v,
                         r_bound=bound, log_gate=gate)
