"""Sample mean, sample autocovariance and the moment estimator of ``mu``.

Sums run over the set's points in lexicographic order with pairwise
summation, so results do not depend on how the points were enumerated.
All functions accept batched field samples (values of shape ``batch + (N,)``)
and then return arrays of shape ``batch``.
"""

from dataclasses import dataclass

import numpy as np

from ._summation import lexsort_points, pairwise_sum
from .errors import DegenerateError, DomainError


@dataclass(frozen=True)
class AcovEstimate:
    """``gamma*_n(lag)`` for each requested lag."""

    lags: tuple
    values: dict
    set_size: int

    def as_array(self):
        """Values stacked along the last axis in the order of ``lags``."""
        return np.stack([np.asarray(self.values[l]) for l in self.lags], axis=-1)


def _set_points(sset):
    pts = np.asarray(getattr(sset, "points", sset), dtype=np.int64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        raise DomainError("sampling set is empty")
    return pts[lexsort_points(pts)]


def _gather(field, points, what="point"):
    return field.values[..., field.index_of(points, what)]


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def sample_mean(field, sset):
    """``|Gamma|^-1 sum_{s in Gamma} X_s``."""
    pts = _set_points(sset)
    vals = _gather(field, pts)
    return _scalar(pairwise_sum(vals) / len(pts))


def sample_acov(field, sset, lags):
    """``gamma*_n(D) = |Gamma|^-1 sum_{s in Gamma} X_s X_{s+D}`` without mean correction."""
    pts = _set_points(sset)
    d = pts.shape[1]
    base = _gather(field, pts)
    keys, values = [], {}
    for lag in lags:
        lag = tuple(int(x) for x in np.atleast_1d(lag))
        if len(lag) != d:
            raise DomainError(f"lag {lag} does not match dimension {d}")
        shifted = _gather(field, pts + np.asarray(lag, dtype=np.int64), what=f"shift by lag {lag} of")
        values[lag] = _scalar(pairwise_sum(base * shifted) / len(pts))
        keys.append(lag)
    return AcovEstimate(tuple(keys), values, len(pts))


def spde_mu_hat(field, sset, levy_mean):
    """``E L([0,1]^3) |Gamma| / sum_{k in Gamma} X(k)``.

    For batched fields, replicates with a zero sum come back as ``nan``;
    an unbatched zero sum raises :class:`DegenerateError`.
    """
    if levy_mean == 0:
        raise DomainError("the moment estimator needs E L([0,1]^3) != 0")
    pts = _set_points(sset)
    total = pairwise_sum(_gather(field, pts))
    if np.ndim(total) == 0:
        if total == 0:
            raise DegenerateError("sum of field values is exactly zero")
        return levy_mean * len(pts) / float(total)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = levy_mean * len(pts) / total
    return np.where(total == 0, np.nan, out)
