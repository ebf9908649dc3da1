"""Covariate samples in a metric space.

A :class:`PointCloud` holds ``n`` points under one of three backends:

``euclidean``
    rows of an ``(n, d)`` coordinate array, ordinary Euclidean distance.
``function_grid``
    curves sampled on ``m`` equispaced points of ``[0, 1]``; the distance is
    the Riemann approximation ``sqrt(dt * sum_g (x_i(t_g) - x_j(t_g))**2)``
    with ``dt = 1 / (m - 1)``.
``precomputed``
    a symmetric, zero-diagonal ``(n, n)`` distance matrix.

A :class:`ProductCloud` combines several clouds over the same sample with
the root-sum-of-squares rule, which is the metric used for joint covariates
``(X, Z)``.

Squared distances are accumulated coordinate by coordinate with plain
elementwise arithmetic, so the value for a pair ``(i, j)`` does not depend on
whether it was computed inside a full block or for a single pair. Exact ties
in the neighbour search are therefore decided identically by every search
path.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "PointCloud",
    "ProductCloud",
    "distance",
    "product_distance",
]

BACKENDS = ("euclidean", "function_grid", "precomputed")


def _standardize(coords):
    mean = coords.mean(axis=0)
    sd = coords.std(axis=0, ddof=1) if coords.shape[0] > 1 else np.zeros(coords.shape[1])
    out = coords - mean
    keep = sd > 0
    out[:, keep] = out[:, keep] / sd[keep]
    return out


class PointCloud:
    """``n`` covariate points with a pluggable distance backend.

    Use the constructors :meth:`euclidean`, :meth:`function_grid` and
    :meth:`precomputed` rather than calling ``__init__`` directly.
    """

    def __init__(self, backend, data):
        if backend not in BACKENDS:
            raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
        self.backend = backend
        self.data = data
        self.data.setflags(write=False)
        if backend == "precomputed":
            self._embedding = None
            self._weight = 1.0
        elif backend == "function_grid":
            self._weight = 1.0 / (data.shape[1] - 1)
            self._embedding = data * np.sqrt(self._weight)
            self._embedding.setflags(write=False)
        else:
            self._weight = 1.0
            self._embedding = data

    # -- constructors -----------------------------------------------------

    @classmethod
    def euclidean(cls, coords, standardize=False):
        """Points in R^d. A 1-D array is read as ``n`` scalar points.

        With ``standardize=True`` every coordinate is centred and divided by
        its sample standard deviation; constant coordinates are only centred.
        """
        coords = np.array(coords, dtype=float, copy=True)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2:
            raise ValueError("coordinates must be a 1-D or 2-D array")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        if standardize:
            coords = _standardize(coords)
        return cls("euclidean", coords)

    @classmethod
    def function_grid(cls, values):
        """Curves given by their values on a uniform grid of ``[0, 1]``.

        ``values`` has shape ``(n, m)`` with ``m >= 2`` grid points.
        """
        values = np.array(values, dtype=float, copy=True)
        if values.ndim != 2 or values.shape[1] < 2:
            raise ValueError("function_grid needs an (n, m) array with m >= 2")
        if not np.all(np.isfinite(values)):
            raise ValueError("curve values must be finite")
        return cls("function_grid", values)

    @classmethod
    def precomputed(cls, matrix, rtol=1e-12):
        """Points known only through their pairwise distance matrix."""
        matrix = np.array(matrix, dtype=float, copy=True)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("distance matrix must be finite")
        scale = max(np.max(np.abs(matrix)), 1.0) if matrix.size else 1.0
        if np.max(np.abs(matrix - matrix.T), initial=0.0) > rtol * scale:
            raise ValueError("distance matrix not symmetric")
        if np.any(np.diag(matrix) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        if np.any(matrix < 0):
            raise ValueError("distance matrix must be nonnegative")
        matrix = 0.5 * (matrix + matrix.T)
        return cls("precomputed", matrix)

    # -- geometry ---------------------------------------------------------

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def dim(self):
        """Ambient dimension of the coordinate embedding (``None`` if precomputed)."""
        return None if self._embedding is None else self._embedding.shape[1]

    @property
    def embedding(self):
        """Coordinates whose Euclidean distances are this cloud's distances.

        ``None`` for the precomputed backend.
        """
        return self._embedding

    def sq_pairs(self, i, j):
        """Squared distances for broadcastable index arrays ``i`` and ``j``."""
        i = np.asarray(i)
        j = np.asarray(j)
        if self.backend == "precomputed":
            d = self.data[i, j]
            return d * d
        acc = _sq_coords(self.data, i, j)
        if self.backend == "function_grid":
            acc = acc * self._weight
        return acc

    def sq_distances(self, rows, cols=None):
        """Block of squared distances between ``rows`` and ``cols`` (default: all)."""
        rows = np.atleast_1d(np.asarray(rows))
        cols = np.arange(self.n) if cols is None else np.atleast_1d(np.asarray(cols))
        return self.sq_pairs(rows[:, None], cols[None, :])

    def distance(self, i, j):
        _check_index(self.n, i, j)
        if self.backend == "precomputed":
            return float(self.data[i, j])
        return float(np.sqrt(self.sq_pairs(i, j)))

    def __repr__(self):
        return f"PointCloud(backend={self.backend!r}, n={self.n}, dim={self.dim})"


class ProductCloud:
    """Several clouds over the same sample, combined by root-sum-of-squares."""

    def __init__(self, components):
        components = list(components)
        if not components:
            raise ValueError("a product cloud needs at least one component")
        flat = []
        for c in components:
            flat.extend(c.components if isinstance(c, ProductCloud) else [c])
        sizes = {c.n for c in flat}
        if len(sizes) != 1:
            raise ValueError(f"component sizes differ: {sorted(sizes)}")
        self.components = tuple(flat)
        embeddings = [c.embedding for c in flat]
        if any(e is None for e in embeddings):
            self._embedding = None
        else:
            self._embedding = np.hstack(embeddings)
            self._embedding.setflags(write=False)

    @property
    def n(self):
        return self.components[0].n

    @property
    def dim(self):
        return None if self._embedding is None else self._embedding.shape[1]

    @property
    def embedding(self):
        return self._embedding

    def sq_pairs(self, i, j):
        total = self.components[0].sq_pairs(i, j)
        for c in self.components[1:]:
            total = total + c.sq_pairs(i, j)
        return total

    def sq_distances(self, rows, cols=None):
        rows = np.atleast_1d(np.asarray(rows))
        cols = np.arange(self.n) if cols is None else np.atleast_1d(np.asarray(cols))
        return self.sq_pairs(rows[:, None], cols[None, :])

    def distance(self, i, j):
        _check_index(self.n, i, j)
        return float(np.sqrt(self.sq_pairs(i, j)))

    def __repr__(self):
        return f"ProductCloud(n={self.n}, components={len(self.components)})"


def _sq_coords(coords, i, j):
    acc = np.zeros(np.broadcast_shapes(i.shape, j.shape))
    for c in range(coords.shape[1]):
        col = coords[:, c]
        diff = col[j] - col[i]
        acc += diff * diff
    return acc


def _check_index(n, i, j):
    for k in (i, j):
        if not (0 <= k < n):
            raise IndexError(f"index {k} out of range for {n} points")


def distance(cloud, i, j):
    """Distance between points ``i`` and ``j`` of ``cloud``."""
    return cloud.distance(i, j)


def product_distance(pc, i, j):
    """Root-sum-of-squares of the component distances between ``i`` and ``j``."""
    _check_index(pc.n, i, j)
    return float(np.sqrt(sum(c.distance(i, j) ** 2 for c in pc.components)))
