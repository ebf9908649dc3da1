"""Conditional coefficient and greedy forward variable selection.

The conditional coefficient measures how much a covariate ``Z`` adds to the
information ``X`` already carries about ``Y``::

    psi(Z, Y | X) = (psi((X, Z), Y) - psi(X, Y)) / (1 - psi(X, Y))

and is estimated by plugging in the sample coefficients, with ``(X, Z)``
measured under the product metric.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .errors import DegenerateInputError
from .estimator import as_labels, contingency, psi_hat
from .graph import build_neighbor_graph
from .metric import ProductCloud

__all__ = ["SelectionTrace", "psi_conditional_hat", "select_variables"]

SATURATION = 1e-9
STOP_REASONS = ("nonpositive_score", "exhausted", "max_steps", "saturated")


def _psi(cloud, y):
    return psi_hat(contingency(y, build_neighbor_graph(cloud)))


def _check_same_n(y, *clouds):
    for c in clouds:
        if c.n != y.n:
            raise ValueError(f"covariate size {c.n} does not match label length {y.n}")


def psi_conditional_hat(x, z, y):
    """Plug-in ``psi_hat(Z, Y | X)``; may be negative in finite samples."""
    y = as_labels(y)
    _check_same_n(y, x, z)
    base = _psi(x, y)
    if base >= 1.0 - SATURATION:
        raise DegenerateInputError(
            f"psi_hat(X, Y) = {base!r} is 1 up to rounding; Y is already determined by X"
        )
    full = _psi(ProductCloud([x, z]), y)
    return (full - base) / (1.0 - base)


@dataclass(frozen=True)
class SelectionTrace:
    """Outcome of :func:`select_variables`.

    ``chosen[j]`` was picked at step ``j`` with score ``scores[j]``: the
    unconditional coefficient at the first step, the conditional one given
    all earlier picks afterwards. When the run ends on a nonpositive score,
    that last pick is still listed; :attr:`selected` drops it.
    """

    chosen: tuple
    scores: tuple
    stopped_because: str

    @property
    def selected(self):
        """Picks whose score was strictly positive."""
        return tuple(c for c, s in zip(self.chosen, self.scores) if s > 0)

    def as_dict(self):
        return {
            "chosen": list(self.chosen),
            "scores": list(self.scores),
            "selected": list(self.selected),
            "stopped_because": self.stopped_because,
        }


def _argmax(values):
    # strict comparison keeps the smallest index among equal maxima
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


def select_variables(covariates, y, max_steps=None, workers=1):
    """Greedy forward selection driven by the conditional coefficient.

    Step one picks the column with the largest ``psi_hat``; every later step
    picks the column with the largest conditional coefficient given the
    columns chosen so far. The run stops after the first pick whose score is
    ``<= 0``, when no columns remain, after ``max_steps`` picks, or when the
    chosen columns already determine ``Y`` (``"saturated"``), where the
    conditional coefficient is undefined.

    Ties go to the smallest column index. ``workers`` evaluates candidate
    columns in parallel without affecting the result.
    """
    covariates = list(covariates)
    if not covariates:
        raise ValueError("need at least one covariate column")
    y = as_labels(y)
    if y.n < 2:
        raise ValueError("need at least two observations")
    _check_same_n(y, *covariates)
    p = len(covariates)
    max_steps = p if max_steps is None else int(max_steps)
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")

    chosen, scores = [], []
    base = 0.0
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while True:
            remaining = [i for i in range(p) if i not in chosen]
            clouds = [ProductCloud([covariates[i] for i in chosen] + [covariates[i]]) for i in remaining]
            if pool is None:
                full = [_psi(c, y) for c in clouds]
            else:
                full = list(pool.map(lambda c: _psi(c, y), clouds))
            cand = [(f - base) / (1.0 - base) for f in full]
            k = _argmax(cand)
            chosen.append(remaining[k])
            scores.append(cand[k])
            base = full[k]
            if cand[k] <= 0:
                reason = "nonpositive_score"
            elif len(chosen) == p:
                reason = "exhausted"
            elif len(chosen) >= max_steps:
                reason = "max_steps"
            elif base >= 1.0 - SATURATION:
                reason = "saturated"
            else:
                continue
            break
    finally:
        if pool is not None:
            pool.shutdown()
    return SelectionTrace(chosen=tuple(chosen), scores=tuple(scores), stopped_because=reason)
