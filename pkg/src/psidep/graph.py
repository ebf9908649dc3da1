"""Exact nearest-neighbour graph of a covariate sample and its statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import betainc

__all__ = [
    "NeighborGraph",
    "build_neighbor_graph",
    "mutual_fraction",
    "shared_neighbor_count",
    "max_in_degree",
    "gamma_d",
]

# above this dimension a k-d tree rarely beats the blocked brute-force scan
KDTREE_MAX_DIM = 10
KDTREE_MIN_N = 64
_BLOCK_ELEMS = 1 << 21


@dataclass(frozen=True, eq=False)
class NeighborGraph:
    """Directed 1-NN graph: ``nbr[i]`` is the nearest other point of ``i``.

    Attributes
    ----------
    n : int
        Number of vertices.
    nbr : ndarray of int
        Nearest neighbour of each point, never the point itself.
    in_degree : ndarray of int
        Number of points that chose each vertex as their neighbour.
    had_ties : bool
        True if any point had two or more neighbours at exactly the same
        distance; the smallest index was taken.
    """

    n: int
    nbr: np.ndarray
    in_degree: np.ndarray = field(repr=False)
    had_ties: bool = False

    @classmethod
    def from_neighbors(cls, nbr, had_ties=False):
        nbr = np.array(nbr, dtype=np.intp, copy=True)
        n = nbr.shape[0]
        if n < 2:
            raise ValueError("a neighbour graph needs at least 2 points")
        if np.any((nbr < 0) | (nbr >= n)):
            raise ValueError("neighbour index out of range")
        if np.any(nbr == np.arange(n)):
            raise ValueError("a point cannot be its own nearest neighbour")
        nbr.setflags(write=False)
        deg = np.bincount(nbr, minlength=n)
        deg.setflags(write=False)
        return cls(n=n, nbr=nbr, in_degree=deg, had_ties=bool(had_ties))

    @property
    def w_n(self):
        return mutual_fraction(self)

    @property
    def w_n_prime(self):
        return shared_neighbor_count(self)

    @property
    def l_n(self):
        return max_in_degree(self)

    def degree_warnings(self):
        """Diagnostics about the graph as human-readable strings."""
        out = []
        if self.had_ties:
            out.append("exact distance ties in neighbour search; smallest index used")
        if self.l_n >= self.n ** 0.25 and self.l_n > 2:
            out.append(
                f"maximal in-degree L_n={self.l_n} is at least n^(1/4)={self.n ** 0.25:.2f}; "
                "chi-squared calibration may be unreliable"
            )
        return out


def _brute_force(cloud):
    n = cloud.n
    nbr = np.empty(n, dtype=np.intp)
    tied = False
    block = max(1, _BLOCK_ELEMS // max(n, 1))
    for start in range(0, n, block):
        rows = np.arange(start, min(start + block, n))
        sq = cloud.sq_distances(rows)
        sq[np.arange(rows.size), rows] = np.inf
        best = np.argmin(sq, axis=1)
        nbr[rows] = best
        dmin = sq[np.arange(rows.size), best]
        tied = tied or bool(np.any(np.count_nonzero(sq == dmin[:, None], axis=1) > 1))
    return nbr, tied


def _kdtree(cloud, workers=1):
    n = cloud.n
    emb = cloud.embedding
    tree = cKDTree(emb)
    dist, _ = tree.query(emb, k=2, workers=workers)
    # the tree only proposes candidates; the winner is decided on the exact
    # squared distances shared with the brute-force path
    scale = float(np.max(np.abs(emb))) if emb.size else 0.0
    radius = dist[:, 1] * (1 + 1e-6) + 1e-12 * (scale + 1.0)
    cands = tree.query_ball_point(emb, radius, workers=workers)
    lens = np.fromiter((len(c) for c in cands), dtype=np.intp, count=n)
    ii = np.repeat(np.arange(n), lens)
    jj = np.fromiter((j for c in cands for j in c), dtype=np.intp, count=int(lens.sum()))
    keep = ii != jj
    ii, jj = ii[keep], jj[keep]
    sq = cloud.sq_pairs(ii, jj)
    order = np.lexsort((jj, sq, ii))
    ii, jj, sq = ii[order], jj[order], sq[order]
    first = np.flatnonzero(np.r_[True, ii[1:] != ii[:-1]])
    if first.size != n:
        raise RuntimeError("k-d tree candidate search missed a point")
    nbr = jj[first]
    second = first + 1
    has_second = second < ii.size
    second = second[has_second]
    tied = bool(np.any((ii[second] == ii[first[has_second]]) & (sq[second] == sq[first[has_second]])))
    return nbr, tied


def build_neighbor_graph(cloud, method="auto", workers=1):
    """Exact nearest-neighbour graph of ``cloud``.

    Parameters
    ----------
    cloud : PointCloud or ProductCloud
    method : {"auto", "brute", "kdtree"}
        ``"kdtree"`` needs a coordinate embedding; ``"auto"`` uses it for
        low-dimensional clouds and falls back to a blocked O(n^2) scan.
        Both paths return identical neighbour arrays.
    workers : int
        Threads for the k-d tree queries.

    Ties are broken by the smallest index and reported through
    ``had_ties``.
    """
    n = cloud.n
    if n < 2:
        raise ValueError(f"need at least 2 points to build a neighbour graph, got {n}")
    if method == "auto":
        use_tree = (
            cloud.embedding is not None
            and cloud.embedding.shape[1] <= KDTREE_MAX_DIM
            and n >= KDTREE_MIN_N
        )
        method = "kdtree" if use_tree else "brute"
    if method == "kdtree":
        if cloud.embedding is None:
            raise ValueError("k-d tree search needs coordinates, not a distance matrix")
        nbr, tied = _kdtree(cloud, workers=workers)
    elif method == "brute":
        nbr, tied = _brute_force(cloud)
    else:
        raise ValueError(f"unknown method {method!r}")
    return NeighborGraph.from_neighbors(nbr, had_ties=tied)


def mutual_fraction(g):
    """W_n: fraction of points that are their neighbour's neighbour."""
    return float(np.count_nonzero(g.nbr[g.nbr] == np.arange(g.n))) / g.n


def shared_neighbor_count(g):
    """W_n': ordered pairs ``i != j`` with ``N(i) == N(j)``, divided by ``n``."""
    deg = g.in_degree.astype(np.int64)
    return float(np.sum(deg * (deg - 1))) / g.n


def max_in_degree(g):
    """L_n, the largest number of points sharing one nearest neighbour."""
    return int(g.in_degree.max())


def gamma_d(d):
    """Limit of W_n for continuous data in R^d.

    The ratio of the volume of a unit ball to the volume of the union of two
    unit balls whose centres are one unit apart. The intersection is two caps
    of height 1/2, whose volume is given by a regularized incomplete beta
    function, so::

        gamma_d = 1 / (2 - I_{3/4}((d + 1) / 2, 1 / 2))
    """
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    lens_over_ball = float(betainc((d + 1) / 2.0, 0.5, 0.75))
    return 1.0 / (2.0 - lens_over_ball)

