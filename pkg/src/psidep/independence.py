"""Asymptotic chi-squared test of independence between ``X`` and ``Y``.

Under independence the centred table entries

    P_n[(k, l)] = sqrt(n) * (p_kl - p_k q_l),    k, l = 0, ..., K-2,

are asymptotically normal given the neighbour graph, with a covariance that
depends on the graph only through the mutual-neighbour fraction ``W_n``.
The quadratic form ``I_n = P_n' Sigma^{-1} P_n`` is then chi-squared with
``(K-1)^2`` degrees of freedom.

``P_n`` is vectorized column by column: entry ``(k, l)`` sits at position
``k + (K - 1) * l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateInputError
from .estimator import as_labels, contingency, psi_hat
from .graph import build_neighbor_graph, gamma_d

__all__ = [
    "CovarianceMatrix",
    "TestReport",
    "sigma_entry",
    "sigma_matrix",
    "sigma_factorized",
    "sigma_det_closed_form",
    "centered_vector",
    "chi2_sf",
    "independence_statistic",
    "binary_statistic",
    "independence_test",
]

# W_n this close to 1 makes Sigma singular for K >= 3
W_MARGIN = 1e-6
MAX_CONDITION = 1e12


def _check_p(p):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("p must be a probability vector over at least two levels")
    if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("p must be strictly positive and sum to 1")
    return p


def _check_w(w):
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"W_n must lie in [0, 1], got {w!r}")
    return float(w)


def sigma_entry(p, w, k1, l1, k2, l2):
    """Conditional covariance of entries ``(k1, l1)`` and ``(k2, l2)`` of ``P_n``.

    Indices run over ``0, ..., K-2``; ``p`` holds all ``K`` class
    probabilities. The four-term expansion

        p_k1 p_l1 p_k2 p_l2 (1 + w)
        - p_k1 p_l1 p_l2 (1{k1=k2} + w 1{l1=k2})
        - p_k1 p_l1 p_k2 (1{l1=l2} + w 1{k1=l2})
        + p_k1 p_l1 (1{k1=k2, l1=l2} + w 1{k1=l2, l1=k2})

    is evaluated in the factored form
    ``p_k1 p_l1 [(1{k1=k2} - p_k2)(1{l1=l2} - p_l2) + w (1{k1=l2} - p_l2)(1{l1=k2} - p_k2)]``,
    which avoids cancellation when some probabilities are small. The two
    index orders are averaged so the result is exactly symmetric.
    """
    p = _check_p(p)
    w = _check_w(w)
    for k in (k1, l1, k2, l2):
        if not 0 <= k < p.size - 1:
            raise IndexError(f"index {k} outside 0..{p.size - 2}")
    return float(0.5 * (_entries(p, w, k1, l1, k2, l2) + _entries(p, w, k2, l2, k1, l1)))


def _entries(p, w, k1, l1, k2, l2):
    a, b, c, d = p[k1], p[l1], p[k2], p[l2]
    direct = ((k1 == k2) - c) * ((l1 == l2) - d)
    crossed = ((k1 == l2) - d) * ((l1 == k2) - c)
    return a * b * (direct + w * crossed)


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    sigma: np.ndarray
    w: float
    p: np.ndarray

    @property
    def K(self):
        return self.p.size


def _index_grid(K):
    m = K - 1
    idx = np.arange(m * m)
    return idx % m, idx // m


def sigma_matrix(p, w):
    """Full ``(K-1)^2 x (K-1)^2`` covariance built entry by entry."""
    p = _check_p(p)
    w = _check_w(w)
    k, l = _index_grid(p.size)
    half = _entries(p, w, k[:, None], l[:, None], k[None, :], l[None, :])
    sigma = 0.5 * (half + half.T)
    return CovarianceMatrix(sigma=sigma, w=w, p=p)


def sigma_factorized(p, w):
    """The same covariance as ``(D kron D) W (I - E D) kron (I - E D)``.

    ``D = diag(p_1, ..., p_{K-1})``, ``E`` is the all-ones matrix and ``W``
    has entries ``1{k1=k2, l1=l2} + w 1{k1=l2, l1=k2}``.
    """
    p = _check_p(p)
    w = _check_w(w)
    m = p.size - 1
    D = np.diag(p[:m])
    I = np.eye(m)
    E = np.ones((m, m))
    k, l = _index_grid(p.size)
    W = ((k[:, None] == k[None, :]) & (l[:, None] == l[None, :])) + w * (
        (k[:, None] == l[None, :]) & (l[:, None] == k[None, :])
    )
    R = I - E @ D
    return np.kron(D, D) @ W @ np.kron(R, R)


def sigma_det_closed_form(p, w):
    """``(1+w)^{K(K-1)/2} (1-w)^{(K-1)(K-2)/2} prod_i p_i^{2(K-1)}``."""
    p = _check_p(p)
    w = _check_w(w)
    K = p.size
    log_p = 2 * (K - 1) * float(np.sum(np.log(p)))
    tail = (1 - w) ** ((K - 1) * (K - 2) // 2)
    return (1 + w) ** (K * (K - 1) // 2) * tail * math.exp(log_p)


def centered_vector(c):
    """``P_n = sqrt(n) vec(p_kl - p_k q_l)`` over the first ``K - 1`` levels."""
    m = c.K - 1
    dev = c.joint[:m, :m] - np.outer(c.row[:m], c.col[:m])
    return math.sqrt(c.n) * dev.reshape(-1, order="F")


# -- chi-squared tail ------------------------------------------------------

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _gamma_p_series(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a, x):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def chi2_sf(x, df):
    """Upper tail ``P(chi2(df) > x)`` as the regularized gamma ``Q(df/2, x/2)``."""
    if x < 0 or math.isnan(x):
        raise ValueError(f"chi-squared statistic must be nonnegative, got {x!r}")
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    a, h = df / 2.0, x / 2.0
    if h < a + 1.0:
        return max(0.0, 1.0 - _gamma_p_series(a, h))
    return min(1.0, _gamma_q_contfrac(a, h))


# -- the test ----------------------------------------------------------------


@dataclass(frozen=True)
class TestReport:
    __test__ = False

    statistic: float
    df: int
    p_value: float
    psi_hat: float
    w_n: float
    w_n_prime: float
    l_n: int
    n: int
    K: int
    variant: str = "sigma_hat"
    warnings: tuple = field(default=())

    def as_dict(self):
        return {
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "psi_hat": self.psi_hat,
            "w_n": self.w_n,
            "w_n_prime": self.w_n_prime,
            "l_n": self.l_n,
            "n": self.n,
            "K": self.K,
            "variant": self.variant,
            "warnings": list(self.warnings),
        }


def _move_to_last(c, level):
    if level is None or level == c.K - 1:
        return c
    perm = np.arange(c.K)
    perm[level], perm[c.K - 1] = c.K - 1, level
    return c.permuted(perm)


def _safe_psi(c):
    try:
        return psi_hat(c)
    except DegenerateInputError:
        return float("nan")


def independence_statistic(c, g, dropped_level=None):
    """``I_n = P_n' Sigma_hat^{-1} P_n`` with its chi-squared p-value.

    ``Sigma_hat`` plugs the observed class frequencies into the covariance
    formula. ``dropped_level`` chooses which level is left out of ``P_n``
    (default: the last one); the statistic does not depend on that choice.
    """
    if c.n != g.n:
        raise ValueError("table and graph describe different sample sizes")
    K = c.K
    if K < 2:
        raise DegenerateInputError("independence test needs at least two response levels")
    w = g.w_n
    if K >= 3 and w > 1.0 - W_MARGIN:
        raise DegenerateInputError(
            f"degenerate neighbour graph: W_n={w:.6g} makes the covariance singular"
        )
    c = _move_to_last(c, dropped_level)
    p_hat = c.row
    if np.any(p_hat <= 0):
        raise DegenerateInputError("some response level is never observed")
    sigma = sigma_matrix(p_hat / p_hat.sum(), w).sigma
    cond = np.linalg.cond(sigma)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise DegenerateInputError(f"covariance matrix is ill-conditioned (cond={cond:.3g})")
    P = centered_vector(c)
    sol = scipy.linalg.solve(sigma, P, assume_a="sym")
    stat = max(float(P @ sol), 0.0)
    df = (K - 1) ** 2
    return TestReport(
        statistic=stat,
        df=df,
        p_value=chi2_sf(stat, df),
        psi_hat=_safe_psi(c),
        w_n=w,
        w_n_prime=g.w_n_prime,
        l_n=g.l_n,
        n=c.n,
        K=K,
        warnings=tuple(g.degree_warnings()),
    )


def binary_statistic(c, d, g=None, as_printed=False):
    """Two-class statistic with the limit ``gamma_d`` in place of ``W_n``.

    ``n (p_11 - p_1 q_1)^2 / (p_1^2 (1 - p_1)^2 (1 + gamma_d))``, which is
    ``I_n`` with ``W_n`` replaced by its limit for continuous data in R^d.
    ``as_printed=True`` uses the denominator ``(p_1 q_1)^2`` instead.
    """
    if c.K != 2:
        raise ValueError(f"binary statistic needs K = 2, got K = {c.K}")
    gd = gamma_d(d)
    p1, q1 = c.row[0], c.col[0]
    if not 0 < p1 < 1:
        raise DegenerateInputError("one class is empty")
    num = c.joint[0, 0] - p1 * q1
    if as_printed:
        if q1 == 0:
            raise DegenerateInputError("first class never appears as a neighbour label")
        stat = c.n / (1 + gd) * (num / (p1 * q1)) ** 2
        variant = "plug_in_gamma_d_as_printed"
    else:
        stat = c.n * num * num / (p1 * p1 * (1 - p1) ** 2 * (1 + gd))
        variant = "plug_in_gamma_d"
    return TestReport(
        statistic=float(stat),
        df=1,
        p_value=chi2_sf(float(stat), 1),
        psi_hat=_safe_psi(c),
        w_n=float("nan") if g is None else g.w_n,
        w_n_prime=float("nan") if g is None else g.w_n_prime,
        l_n=-1 if g is None else g.l_n,
        n=c.n,
        K=2,
        variant=variant,
        warnings=() if g is None else tuple(g.degree_warnings()),
    )


def independence_test(cloud, y, workers=1):
    """Test ``H0: X and Y independent`` from a covariate cloud and labels."""
    y = as_labels(y)
    if y.n != cloud.n:
        raise ValueError(f"label length {y.n} does not match covariate size {cloud.n}")
    g = build_neighbor_graph(cloud, workers=workers)
    return independence_statistic(contingency(y, g), g)
