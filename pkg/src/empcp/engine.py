"""Observed change-point statistics on orthants and half-spaces.

Both indexing classes reduce to the same object: for each "column" ``(l, q)``
an indicator sequence ``1(p_l(i) <= p_l(q))`` over the observations ``i``,
and its prefix counts ``C^l_k(q)``. Lower-left orthants are the ``m = 1``
case with componentwise dominance as the comparison; half-spaces use the
projections ``p_l(i) = a_l . X_i``. The S/U and T/V profiles are therefore
computed by one code path each, which is what makes the univariate
coincidence of the two classes hold bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .model import Combiner, DirectionSet, Family, Sample, StatProfile


@dataclass(frozen=True, eq=False)
class IndicatorTable:
    """Indicators and prefix counts, one block per direction (``m`` blocks).

    ``indicators[l, i, q] = 1(obs i <= obs q)`` (``uint8``), and
    ``counts[l, k, q] = #{i <= k : obs i <= obs q}`` for ``k = 0..n``.
    """

    indicators: np.ndarray
    counts: np.ndarray

    @property
    def m(self) -> int:
        return self.indicators.shape[0]

    @property
    def n(self) -> int:
        return self.indicators.shape[1]

    def C(self, k: int, q: int, l: int = 0) -> int:
        """1-based accessor mirroring the notation ``C^l_k(q)``."""
        return int(self.counts[l, k, q - 1])


class OrthantTable(IndicatorTable):
    pass


@dataclass(frozen=True, eq=False)
class ProjectionTable(IndicatorTable):
    projections: np.ndarray = None  # (m, n)


def _prefix_counts(ind: np.ndarray) -> np.ndarray:
    m, n, _ = ind.shape
    counts = np.zeros((m, n + 1, n), dtype=np.int64)
    np.cumsum(ind, axis=1, dtype=np.int64, out=counts[:, 1:, :])
    counts.setflags(write=False)
    return counts


def build_orthant_table(s: Sample) -> OrthantTable:
    x = s.data
    # ind[i, q] = all_j x[i, j] <= x[q, j]
    ind = np.ones((s.n, s.n), dtype=bool)
    for j in range(s.d):
        col = x[:, j]
        ind &= col[:, None] <= col[None, :]
    ind = ind.astype(np.uint8)[None]
    ind.setflags(write=False)
    return OrthantTable(ind, _prefix_counts(ind))


def project(x: np.ndarray, dirs: DirectionSet) -> np.ndarray:
    """Projections ``a_l . X_i`` as an ``(m, n)`` array.

    One matrix-vector product per direction, so every caller rounds ties the
    same way.
    """
    return np.stack([x @ a for a in dirs.directions])


def build_projection_table(s: Sample, dirs: DirectionSet) -> ProjectionTable:
    if dirs.d != s.d:
        raise DimensionMismatch(f"directions live in R^{dirs.d} but the sample has d={s.d}")
    proj = project(s.data, dirs)
    ind = (proj[:, :, None] <= proj[:, None, :]).astype(np.uint8)
    ind.setflags(write=False)
    proj.setflags(write=False)
    return ProjectionTable(ind, _prefix_counts(ind), proj)


def _column_differences(counts: np.ndarray, l: int) -> np.ndarray:
    """``F_k(q) - F*_{n-k}(q)`` for one direction, shape ``(n-1, n)``."""
    n = counts.shape[2]
    k = np.arange(1, n, dtype=float)[:, None]
    ck = counts[l, 1:n, :]
    cn = counts[l, n, :]
    return ck / k - (cn - ck) / (n - k)


def _profile_sq(t: IndicatorTable) -> np.ndarray:
    n, m = t.n, t.m
    acc = np.zeros(n - 1)
    for l in range(m):
        acc += np.sum(_column_differences(t.counts, l) ** 2, axis=1)
    k = np.arange(1, n, dtype=float)
    w = (k * (n - k)) ** 2 / (float(n) ** 4 * m)
    return w * acc


def _profile_sup(t: IndicatorTable) -> np.ndarray:
    n = t.n
    acc = np.zeros(n - 1)
    for l in range(t.m):
        np.maximum(acc, np.max(np.abs(_column_differences(t.counts, l)), axis=1), out=acc)
    k = np.arange(1, n, dtype=float)
    return k * (n - k) / float(n) ** 1.5 * acc


def profile_S(t: OrthantTable) -> StatProfile:
    return StatProfile(_profile_sq(t), t.n)


def profile_T(t: OrthantTable) -> StatProfile:
    return StatProfile(_profile_sup(t), t.n)


def profile_U(t: ProjectionTable) -> StatProfile:
    return StatProfile(_profile_sq(t), t.n)


def profile_V(t: ProjectionTable) -> StatProfile:
    return StatProfile(_profile_sup(t), t.n)


def profile(t: IndicatorTable, family: Family) -> StatProfile:
    family = Family(family)
    if family.uses_halfspaces != isinstance(t, ProjectionTable):
        raise TypeError(f"family {family.value} needs a "
                        f"{'projection' if family.uses_halfspaces else 'orthant'} table")
    return StatProfile(_profile_sq(t) if family.squared else _profile_sup(t), t.n)


def combine_values(values: np.ndarray, combiner: Combiner, n: int) -> np.ndarray:
    """Combine profiles along the last axis; the mean divides by ``n``, not ``n - 1``."""
    if Combiner(combiner) is Combiner.MAX:
        return np.max(values, axis=-1)
    return np.sum(values, axis=-1) / n


def combine(p: StatProfile, c: Combiner) -> float:
    return float(combine_values(p.values, c, p.n))


def estimate_changepoint(p: StatProfile) -> int:
    """Smallest ``k`` maximising the profile."""
    return int(np.argmax(p.values)) + 1


def oracle_profile(s: Sample, family: Family, dirs: DirectionSet | None = None) -> StatProfile:
    """Brute-force profile, for testing only.

    Re-evaluates both empirical c.d.f.s from scratch for every
    ``(k, q, direction)`` triple via the process
    ``D_n(k/n, .) = sqrt(n) (k/n)(1 - k/n) (F_k - F*_{n-k})``. Cost is
    ``O(n^3 m d)``.
    """
    family = Family(family)
    x = s.data
    n = s.n
    if family.uses_halfspaces:
        if dirs is None:
            raise ValueError("half-space families need a direction set")
        if dirs.d != s.d:
            raise DimensionMismatch("direction/sample dimension mismatch")
        views = list(project(x, dirs))

        def below(p, lo, hi, q):
            return p[lo:hi] <= p[q]
    else:
        views = [x]

        def below(p, lo, hi, q):
            return np.all(p[lo:hi] <= p[q], axis=1)

    out = np.empty(n - 1)
    for k in range(1, n):
        lam = k / n
        scale = math.sqrt(n) * lam * (1.0 - lam)
        vals = []
        for p in views:
            for q in range(n):
                head = float(np.mean(below(p, 0, k, q)))
                tail = float(np.mean(below(p, k, n, q)))
                vals.append(scale * (head - tail))
        vals = np.array(vals)
        if family.squared:
            out[k - 1] = np.sum(vals ** 2) / (n * len(views))
        else:
            out[k - 1] = np.max(np.abs(vals))
    return StatProfile(out, n)
