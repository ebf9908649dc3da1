"""Exact population coefficients for finite joint distributions.

Everything here is computed by direct enumeration over the support, which
makes these functions usable as ground truth for the sample estimators.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError

__all__ = [
    "FiniteJoint",
    "psi_population",
    "psi_population_cov",
    "psi_population_norm",
    "psi_population_conditional",
    "sample_coupled",
    "random_joint",
    "random_simplex",
    "encoding_sensitive_joint",
]


class FiniteJoint:
    """Joint law of a finite covariate ``X`` (optionally with ``Z``) and ``Y``.

    Parameters
    ----------
    prob : array_like
        ``(M, K)`` table of ``P(X = m, Y = k)``, or an ``(M, J, K)`` tensor of
        ``P(X = m, Z = j, Y = k)``.
    """

    def __init__(self, prob, atol=1e-12):
        prob = np.array(prob, dtype=float, copy=True)
        if prob.ndim not in (2, 3):
            raise ValueError("prob must be an (M, K) or (M, J, K) array")
        if np.any(prob < 0) or not np.all(np.isfinite(prob)):
            raise ValueError("probabilities must be finite and nonnegative")
        if abs(prob.sum() - 1.0) > atol:
            raise ValueError(f"probabilities sum to {prob.sum()!r}, not 1")
        x_mass = prob.reshape(prob.shape[0], -1).sum(axis=1)
        if np.any(x_mass <= 0):
            raise ValueError("every X level needs positive probability")
        prob.setflags(write=False)
        self.prob = prob

    @property
    def has_z(self):
        return self.prob.ndim == 3

    @property
    def M(self):
        return self.prob.shape[0]

    @property
    def K(self):
        return self.prob.shape[-1]

    def xy(self):
        """``(M, K)`` table of ``(X, Y)``, marginalizing ``Z`` if present."""
        return self.prob.sum(axis=1) if self.has_z else self.prob

    def xz_y(self):
        """``(M * J, K)`` table with the pair ``(X, Z)`` as one covariate."""
        if not self.has_z:
            raise ValueError("this joint has no Z component")
        return self.prob.reshape(-1, self.K)


def _conditional(table):
    """Covariate masses and class probabilities ``Q(x)`` for support rows."""
    mass = table.sum(axis=1)
    keep = mass > 0
    return mass[keep], table[keep] / mass[keep, None]


def _class_probs(table):
    p = table.sum(axis=0)
    if np.any(p <= 0):
        raise DegenerateInputError("some response level has zero probability")
    return p


def coupling_matrix(table):
    """``P(Y = i, Y' = j)`` for the conditionally independent copy ``Y'``."""
    mass, Q = _conditional(np.asarray(table, dtype=float))
    return (Q * mass[:, None]).T @ Q


def _psi_from_table(table):
    table = np.asarray(table, dtype=float)
    p = _class_probs(table)
    K = p.size
    if K < 2:
        raise DegenerateInputError("need at least two response levels")
    dev = coupling_matrix(table) - np.outer(p, p)
    return float(np.sum(dev * dev / np.outer(p, p)) / (K - 1))


def psi_population(j):
    """Population coefficient of ``(X, Y)``: Cramér's V of ``(Y, Y')``."""
    return _psi_from_table(j.xy())


def psi_population_cov(j):
    """Same coefficient through the covariance of ``Q(X)``.

    Computes ``Var(Q(X))`` by centring and evaluates the quadratic form
    ``vec(V)' (D kron D)^{-1} vec(V) / (K - 1)``.
    """
    mass, Q = _conditional(j.xy())
    p = mass @ Q
    if np.any(p <= 0):
        raise DegenerateInputError("some response level has zero probability")
    centred = Q - p
    V = (centred * mass[:, None]).T @ centred
    v = V.reshape(-1, order="F")
    weight = np.kron(np.diag(p), np.diag(p))
    return float(v @ np.linalg.solve(weight, v) / (p.size - 1))


def _weighted(A, p):
    s = 1.0 / np.sqrt(p)
    return A * np.outer(s, s)


def _norm(A, p, norm):
    B = _weighted(A, p)
    if norm == "weighted_frobenius":
        return float(np.linalg.norm(B, "fro"))
    if norm == "weighted_trace":
        return float(np.trace(B))
    raise ValueError(f"unknown norm {norm!r}")


def _norm_ratio(table, norm):
    table = np.asarray(table, dtype=float)
    p = _class_probs(table)
    var_qx = coupling_matrix(table) - np.outer(p, p)
    var_qy = np.diag(p) - np.outer(p, p)
    return _norm(var_qx, p, norm) / _norm(var_qy, p, norm)


def _apply_gamma(x, gamma):
    if gamma == "square":
        return x * x
    if gamma == "identity":
        return x
    raise ValueError(f"unknown gamma {gamma!r}")


def psi_population_norm(j, norm="weighted_frobenius", gamma="square"):
    """``gamma(||Var Q(X)|| / ||Var Q(Y)||)`` for a weighted matrix norm.

    ``Var Q(Y)`` has entries ``p_k - p_k^2`` on the diagonal and
    ``-p_k p_l`` elsewhere.
    """
    return _apply_gamma(_norm_ratio(j.xy(), norm), gamma)


def psi_population_conditional(j, norm=None, gamma="square"):
    """Normalized information gain of ``Z`` about ``Y`` beyond ``X``.

    ``(psi((X, Z), Y) - psi(X, Y)) / (1 - psi(X, Y))``. With ``norm`` given,
    the norm-based coefficient is used in place of ``psi``.
    """
    if not j.has_z:
        raise ValueError("conditional coefficient needs a joint with Z")
    if norm is None:
        base = _psi_from_table(j.xy())
        full = _psi_from_table(j.xz_y())
    else:
        base = _apply_gamma(_norm_ratio(j.xy(), norm), gamma)
        full = _apply_gamma(_norm_ratio(j.xz_y(), norm), gamma)
    if base >= 1.0 - 1e-12:
        raise DegenerateInputError("Y is a function of X; conditional dependence is undefined")
    return (full - base) / (1.0 - base)


def sample_coupled(j, n, seed=None):
    """Draw ``n`` i.i.d. pairs with ``Y = min{k : Q_1(X) + ... + Q_k(X) > U}``.

    Returns ``(x, y)`` codes, or ``(x, z, y)`` when the joint carries ``Z``.
    """
    rng = np.random.default_rng(seed)
    table = j.xz_y() if j.has_z else j.xy()
    mass = table.sum(axis=1)
    cum_x = np.cumsum(mass)
    cell = np.minimum(np.searchsorted(cum_x, rng.random(n) * cum_x[-1], side="right"), mass.size - 1)
    Q = np.zeros_like(table)
    support = mass > 0
    Q[support] = table[support] / mass[support, None]
    cum_q = np.cumsum(Q[cell], axis=1)
    u = rng.random(n)
    y = np.minimum(np.count_nonzero(cum_q <= u[:, None], axis=1), j.K - 1)
    if j.has_z:
        x, z = np.divmod(cell, j.prob.shape[1])
        return x, z, y
    return cell, y


def random_simplex(rng, K, low=0.05):
    """Probability vector from normalized ``U(low, 1)`` deviates."""
    w = rng.uniform(low, 1.0, size=K)
    return w / w.sum()


def random_joint(rng, M, K, J=None, low=0.05):
    """Strictly positive random joint from normalized ``U(low, 1)`` weights."""
    shape = (M, K) if J is None else (M, J, K)
    w = rng.uniform(low, 1.0, size=shape)
    return FiniteJoint(w / w.sum())


def encoding_sensitive_joint(eps):
    """Three-level ``Y`` and binary ``X`` whose rank-based coefficient depends on
    the integer coding of ``Y``.

    Rows are ``X = 0, 1``; columns are the levels ``A, B, C``.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return FiniteJoint([[0.0, 1.0 - eps, eps / 2.0], [eps / 2.0, 0.0, 0.0]])
