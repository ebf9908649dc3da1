"""Sample coefficient from the contingency table of ``(Y_i, Y_N(i))``.

The unobservable coupled copy ``Y'`` of the response is replaced by the
label of the nearest covariate neighbour. Cramér's V of the resulting
``K x K`` table is the coefficient ``psi_hat``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError
from .graph import build_neighbor_graph

__all__ = [
    "LabelVector",
    "ContingencyCounts",
    "PsiResult",
    "contingency",
    "psi_hat",
    "psi_hat_norm",
    "estimate_psi",
]

NORMS = ("weighted_frobenius", "weighted_trace")
GAMMAS = ("square", "identity")


@dataclass(frozen=True, eq=False)
class LabelVector:
    """Categorical response recoded to ``0, ..., K-1``.

    Codes follow the order in which raw labels first appear, so relabelling
    the raw values by any bijection yields the same codes. ``levels[k]`` is
    the raw value behind code ``k``.
    """

    codes: np.ndarray
    levels: tuple = field(default=())

    @classmethod
    def from_raw(cls, raw):
        raw = np.asarray(raw)
        if raw.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if raw.size == 0:
            raise ValueError("labels must not be empty")
        uniq, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
        order = np.argsort(first, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        codes = rank[inverse.reshape(-1)].astype(np.intp)
        codes.setflags(write=False)
        levels = tuple(_plain(v) for v in uniq[order])
        return cls(codes=codes, levels=levels)

    @property
    def K(self):
        return len(self.levels)

    @property
    def n(self):
        return self.codes.shape[0]

    @property
    def raw(self):
        return np.asarray(self.levels, dtype=object)[self.codes]

    def __len__(self):
        return self.n


def _plain(v):
    return v.item() if hasattr(v, "item") else v


def as_labels(y):
    return y if isinstance(y, LabelVector) else LabelVector.from_raw(y)


@dataclass(frozen=True, eq=False)
class ContingencyCounts:
    """Joint frequencies of ``(Y_i, Y_N(i))``.

    ``joint[k, l]`` is the fraction of points with label ``k`` whose nearest
    neighbour has label ``l``; ``row`` and ``col`` are its marginals.
    """

    counts: np.ndarray
    n: int

    @classmethod
    def from_counts(cls, counts):
        counts = np.array(counts, dtype=np.int64, copy=True)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError("counts must be a square matrix")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        counts.setflags(write=False)
        return cls(counts=counts, n=int(counts.sum()))

    @property
    def K(self):
        return self.counts.shape[0]

    @property
    def joint(self):
        return self.counts / self.n

    @property
    def row(self):
        return self.counts.sum(axis=1) / self.n

    @property
    def col(self):
        return self.counts.sum(axis=0) / self.n

    def empty_levels(self):
        """Codes never observed as a response or never observed as a neighbour label."""
        return np.flatnonzero((self.counts.sum(axis=1) == 0) | (self.counts.sum(axis=0) == 0))

    def permuted(self, perm):
        """Table after relabelling code ``k`` as ``perm[k]``."""
        perm = np.asarray(perm)
        out = np.empty_like(self.counts)
        out[np.ix_(perm, perm)] = self.counts
        return ContingencyCounts.from_counts(out)


def contingency(y, g):
    """Count ``(Y_i, Y_N(i))`` pairs over the neighbour graph ``g``."""
    y = as_labels(y)
    if y.n != g.n:
        raise ValueError(f"label length {y.n} does not match graph size {g.n}")
    K = y.K
    flat = y.codes * K + y.codes[g.nbr]
    counts = np.bincount(flat, minlength=K * K).reshape(K, K)
    return ContingencyCounts.from_counts(counts)


def _effective_levels(c):
    rows = np.count_nonzero(c.counts.sum(axis=1))
    cols = np.count_nonzero(c.counts.sum(axis=0))
    k_eff = min(rows, cols)
    if k_eff < 2:
        raise DegenerateInputError(
            "coefficient undefined: fewer than two response levels are observed "
            "both as labels and as neighbour labels"
        )
    return k_eff


def _scaled_deviation(c, symmetrize=False):
    """``(joint - p q') / sqrt(p q')`` with empty cells set to 0."""
    joint = c.joint
    if symmetrize:
        joint = 0.5 * (joint + joint.T)
    expected = np.outer(c.row, c.col)
    dev = joint - expected
    out = np.zeros_like(dev)
    ok = expected > 0
    out[ok] = dev[ok] / np.sqrt(expected[ok])
    return out


def psi_hat(c):
    """Cramér's V of the ``(Y_i, Y_N(i))`` table.

    ``sum_{k,l} (p_kl - p_k q_l)^2 / (p_k q_l) / (K - 1)``. Cells whose
    expected frequency is zero contribute nothing, and ``K`` counts only
    levels seen on both margins. Not clipped to ``[0, 1]``.
    """
    k_eff = _effective_levels(c)
    expected = np.outer(c.row, c.col)
    ok = expected > 0
    dev = c.joint[ok] - expected[ok]
    return float(np.sum(dev * dev / expected[ok]) / (k_eff - 1))


def psi_hat_norm(c, norm="weighted_frobenius", gamma="square"):
    """Plug-in version of the norm-based family of coefficients.

    The covariance of the conditional class probabilities is estimated by
    the symmetrized table minus ``p q'`` and measured with a weighted
    Frobenius or weighted trace norm; both norms of the response's own
    covariance equal ``K - 1`` (Frobenius: its square). ``gamma`` maps the
    ratio of the two norms into ``[0, 1]``.
    """
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}")
    if gamma not in GAMMAS:
        raise ValueError(f"gamma must be one of {GAMMAS}")
    k_eff = _effective_levels(c)
    scaled = _scaled_deviation(c, symmetrize=True)
    if norm == "weighted_frobenius":
        ratio = np.sqrt(np.sum(scaled * scaled)) / np.sqrt(k_eff - 1)
    else:
        ratio = np.trace(scaled) / (k_eff - 1)
    return float(ratio * ratio if gamma == "square" else ratio)


@dataclass(frozen=True)
class PsiResult:
    psi_hat: float
    n: int
    K: int
    w_n: float
    l_n: int
    warnings: tuple = ()


def _table_warnings(c, y):
    out = []
    empty = c.empty_levels()
    if empty.size:
        names = ", ".join(repr(y.levels[k]) for k in empty)
        out.append(f"levels never seen as a neighbour label were dropped: {names}")
    return out


def estimate_psi(cloud, y, workers=1):
    """Build the neighbour graph of ``cloud`` and return ``psi_hat`` with diagnostics."""
    y = as_labels(y)
    if y.n != cloud.n:
        raise ValueError(f"label length {y.n} does not match covariate size {cloud.n}")
    g = build_neighbor_graph(cloud, workers=workers)
    c = contingency(y, g)
    value = psi_hat(c)
    warns = tuple(g.degree_warnings() + _table_warnings(c, y))
    return PsiResult(
        psi_hat=value,
        n=y.n,
        K=y.K - int(c.empty_levels().size),
        w_n=g.w_n,
        l_n=g.l_n,
        warnings=warns,
    )
