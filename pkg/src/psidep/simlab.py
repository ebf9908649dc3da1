"""Synthetic settings, label-noise mixing and Monte-Carlo experiments.

Randomness is derived from :class:`numpy.random.SeedSequence` keys rather
than from a shared generator. Replication ``r`` of a power curve draws its
covariates from the stream ``(seed, r, 0)`` and the noise for the ``j``-th
mixing level from ``(seed, r, 1, j)``, so any replication can be rerun on its
own and the thread count never changes a result.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DegenerateInputError
from .estimator import LabelVector, as_labels
from .independence import independence_test
from .metric import PointCloud

__all__ = [
    "SimSetting",
    "PowerCurve",
    "CalibrationReport",
    "KINDS",
    "generate",
    "mix_labels",
    "power_curve",
    "null_calibration",
    "brownian_paths",
    "sine_series_paths",
    "grid",
]

KINDS = ("sin", "max", "mixture", "degree")
SERIES_TERMS = 20
MAX_DEGREE = 8


@dataclass(frozen=True)
class SimSetting:
    """One of the synthetic designs.

    ``m`` is the number of grid points on ``[0, 1]`` for the functional
    kinds; ``seed`` may be an int or a :class:`numpy.random.SeedSequence`.
    """

    kind: str
    n: int
    m: int = 100
    seed: object = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown setting {self.kind!r}; expected one of {KINDS}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.kind != "sin" and self.m < 2:
            raise ValueError("functional settings need m >= 2 grid points")


def grid(m):
    """``m`` equispaced points ``0, 1/(m-1), ..., 1``."""
    return np.linspace(0.0, 1.0, m)


def brownian_paths(rng, n, m):
    """Standard Brownian motion on :func:`grid` ``(m)``, starting at 0."""
    steps = rng.normal(0.0, math.sqrt(1.0 / (m - 1)), size=(n, m - 1))
    paths = np.zeros((n, m))
    np.cumsum(steps, axis=1, out=paths[:, 1:])
    return paths


def sine_series_paths(rng, n, m, terms=SERIES_TERMS):
    """``sum_k Z_k sin(pi k t)`` with independent ``Z_k ~ N(0, 0.5**k)``."""
    k = np.arange(1, terms + 1)
    z = rng.normal(size=(n, terms)) * np.sqrt(0.5**k)
    basis = np.sin(np.pi * np.outer(k, grid(m)))
    return z @ basis


def _rng(seed):
    return np.random.default_rng(seed)


def generate(setting):
    """Draw covariates and labels for ``setting``.

    Returns ``(PointCloud, LabelVector)``. Raw labels are ``0/1`` for
    ``sin`` and ``max``, ``1/2`` for ``mixture`` (1 = Brownian path,
    2 = sine series) and the degree plus one for ``degree``.
    """
    rng = _rng(setting.seed)
    n, m = setting.n, setting.m
    if setting.kind == "sin":
        x = rng.random((n, 2))
        y = (np.sin(2 * np.pi * (x[:, 0] + x[:, 1])) >= 0).astype(int)
        return PointCloud.euclidean(x), LabelVector.from_raw(y)
    if setting.kind == "max":
        paths = brownian_paths(rng, n, m)
        y = (paths.max(axis=1) >= 1.0).astype(int)
        return PointCloud.function_grid(paths), LabelVector.from_raw(y)
    if setting.kind == "mixture":
        y = rng.integers(1, 3, size=n)
        paths = np.empty((n, m))
        ones = y == 1
        paths[ones] = brownian_paths(rng, int(ones.sum()), m)
        paths[~ones] = sine_series_paths(rng, int((~ones).sum()), m)
        return PointCloud.function_grid(paths), LabelVector.from_raw(y)
    degree = rng.integers(0, MAX_DEGREE + 1, size=n)
    coef = rng.random((n, MAX_DEGREE + 1))
    coef[np.arange(MAX_DEGREE + 1)[None, :] > degree[:, None]] = 0.0
    powers = grid(m)[None, :] ** np.arange(MAX_DEGREE + 1)[:, None]
    return PointCloud.function_grid(coef @ powers), LabelVector.from_raw(degree + 1)


def mix_labels(y, lam, seed=None):
    """Keep each label with probability ``lam``, else swap in an independent copy.

    The copy is drawn from the empirical marginal of ``y``, so covariates
    stay untouched and ``lam = 0`` yields labels independent of them.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam!r}")
    y = as_labels(y)
    rng = _rng(seed)
    keep = rng.random(y.n) < lam
    donor = rng.integers(0, y.n, size=y.n)
    raw = y.raw
    return LabelVector.from_raw(np.where(keep, raw, raw[donor]))


def _stream(seed, *key):
    return np.random.SeedSequence(seed, spawn_key=key)


@dataclass(frozen=True)
class PowerCurve:
    setting: str
    n: int
    lambdas: tuple
    rejections: tuple
    reps: int
    alpha: float
    degenerate: tuple = field(default=())

    @property
    def rates(self):
        return tuple(r / self.reps for r in self.rejections)

    def rows(self):
        return [
            {
                "lambda": lam,
                "rejections": rej,
                "reps": self.reps,
                "alpha": self.alpha,
                "n": self.n,
                "setting": self.setting,
            }
            for lam, rej in zip(self.lambdas, self.rejections)
        ]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.DictWriter(
            buf, fieldnames=["lambda", "rejections", "reps", "alpha", "n", "setting"], lineterminator="\n"
        )
        writer.writeheader()
        writer.writerows(self.rows())
        return buf.getvalue()


def replication(setting, lambdas, alpha, seed, r):
    """Verdicts of replication ``r`` for every mixing level.

    Returns a list with ``True``/``False`` for reject/accept and ``None``
    where the sample was degenerate.
    """
    cloud, y = generate(SimSetting(setting.kind, setting.n, setting.m, _stream(seed, r, 0)))
    out = []
    for j, lam in enumerate(lambdas):
        y_mix = mix_labels(y, lam, _stream(seed, r, 1, j))
        try:
            out.append(independence_test(cloud, y_mix).p_value < alpha)
        except DegenerateInputError:
            out.append(None)
    return out


def _run(fn, reps, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, range(reps)))
    return [fn(r) for r in range(reps)]


def power_curve(setting, lambdas, reps, alpha=0.05, seed=0, workers=1):
    """Rejection frequency of the independence test for each mixing level.

    ``setting.seed`` is ignored; every replication derives its own streams
    from ``seed``. Degenerate samples count as non-rejections and are
    tallied in :attr:`PowerCurve.degenerate`.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    lambdas = tuple(float(v) for v in lambdas)
    verdicts = _run(lambda r: replication(setting, lambdas, alpha, seed, r), reps, workers)
    rejections = tuple(sum(v[j] is True for v in verdicts) for j in range(len(lambdas)))
    degenerate = tuple(sum(v[j] is None for v in verdicts) for j in range(len(lambdas)))
    return PowerCurve(
        setting=setting.kind,
        n=setting.n,
        lambdas=lambdas,
        rejections=rejections,
        reps=reps,
        alpha=alpha,
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class CalibrationReport:
    n: int
    K: int
    dim: int
    reps: int
    alpha: float
    df: int
    rejection_rate: float
    ks_distance: float
    ks_pvalue: float
    degenerate: int
    statistics: np.ndarray = field(repr=False, compare=False)

    def as_dict(self):
        return {
            "n": self.n,
            "K": self.K,
            "dim": self.dim,
            "reps": self.reps,
            "alpha": self.alpha,
            "df": self.df,
            "rejection_rate": self.rejection_rate,
            "ks_distance": self.ks_distance,
            "ks_pvalue": self.ks_pvalue,
            "degenerate": self.degenerate,
        }


def _null_draw(n, K, dim, seed, r):
    rng = _rng(_stream(seed, r))
    x = rng.random((n, dim))
    y = rng.integers(0, K, size=n)
    try:
        return independence_test(PointCloud.euclidean(x), y)
    except DegenerateInputError:
        return None


def null_calibration(n, K, reps, seed=0, dim=2, alpha=0.05, workers=1):
    """Compare ``I_n`` under independence with its chi-squared limit.

    Covariates are uniform on ``[0, 1]^dim`` and labels uniform on ``K``
    levels. Reports the rejection rate at ``alpha`` and the Kolmogorov-Smirnov
    distance to ``chi2((K-1)^2)``. Samples missing a level are skipped.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    reports = _run(lambda r: _null_draw(n, K, dim, seed, r), reps, workers)
    good = [t for t in reports if t is not None and t.K == K]
    if not good:
        raise DegenerateInputError("every replication was degenerate")
    df = (K - 1) ** 2
    stat = np.array([t.statistic for t in good])
    pval = np.array([t.p_value for t in good])
    ks = stats.kstest(stat, "chi2", args=(df,))
    return CalibrationReport(
        n=n,
        K=K,
        dim=dim,
        reps=reps,
        alpha=alpha,
        df=df,
        rejection_rate=float(np.mean(pval < alpha)),
        ks_distance=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        degenerate=reps - len(good),
        statistics=stat,
    )
