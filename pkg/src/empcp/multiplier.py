"""Multiplier-bootstrap and simulation p-values.

Two multiplier schemes are provided. The *check* scheme centres the
indicator at the full-sample empirical c.d.f. before weighting with the
multipliers; the *hat* scheme centres the multipliers themselves, by their
prefix mean before the split and their suffix mean after it. A third,
univariate-only scheme (*sim*) draws fresh uniform samples and recomputes
the statistic, which is exact under the null for continuous data because
the orthant statistics only depend on ranks.

Random streams
--------------
All randomness for one test comes from ``numpy.random.default_rng(seed)``.
The ``N x n`` multiplier (or uniform) matrix is drawn row-major in one call,
so replicate ``j`` is always the ``j``-th block of ``n`` draws: it depends on
``(seed, j)`` only, and splitting rows among workers cannot change it.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import engine, kernels
from .errors import InvalidN, LengthMismatch, SimRequiresUnivariate
from .model import (Combiner, DirectionSet, Family, Method, MultiplierMatrix, Sample,
                    StatFamily, StatProfile, TestReport)
from .sphere import discretize


@dataclass(frozen=True, eq=False)
class ReplicateSet:
    values: np.ndarray
    method: Method
    seed: int

    def __len__(self) -> int:
        return len(self.values)


def default_m(d: int) -> int:
    """Direction count used when none is given: 8 in the plane, 32 above."""
    if d == 1:
        return 1
    return 8 if d == 2 else 32


def draw_multipliers(N: int, n: int, seed: int) -> MultiplierMatrix:
    if N < 1:
        raise InvalidN(f"N must be >= 1, got {N}")
    rng = np.random.default_rng(seed)
    return MultiplierMatrix(rng.standard_normal((N, n)), law="normal")


def _kernel(method: Method):
    if method is Method.CHECK:
        return kernels.check_profiles
    if method is Method.HAT:
        return kernels.hat_profiles
    raise ValueError(f"no multiplier kernel for method {method.value}")


def replicate_profiles(table: engine.IndicatorTable, xi: np.ndarray, method: Method,
                       workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Squared and supremum profiles for every multiplier row.

    Returns two ``(N, n-1)`` arrays: the S/U-type and T/V-type per-split
    replicate statistics. ``workers > 1`` splits rows over threads; the
    kernels release the GIL and rows are independent, so the result is the
    same for any worker count.
    """
    method = Method(method)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if xi.shape[1] != table.n:
        raise LengthMismatch(f"multiplier rows have length {xi.shape[1]}, sample has n={table.n}")
    fn = _kernel(method)
    counts = np.asarray(table.counts, dtype=float)
    N = xi.shape[0]
    if workers <= 1 or N < 2 * workers:
        return fn(table.indicators, counts, xi)
    bounds = np.linspace(0, N, workers + 1).astype(int)
    parts = [xi[a:b] for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        res = list(pool.map(lambda p: fn(table.indicators, counts, p), parts))
    return np.vstack([r[0] for r in res]), np.vstack([r[1] for r in res])


def _replicate(table, xi_row, family, combiner, method) -> float:
    family = Family(family)
    xi_row = np.asarray(xi_row, dtype=float)
    if xi_row.ndim != 1 or xi_row.shape[0] != table.n:
        raise LengthMismatch(f"expected {table.n} multipliers, got shape {xi_row.shape}")
    sq, sup = replicate_profiles(table, xi_row[None, :], method)
    vals = sq[0] if family.squared else sup[0]
    return float(engine.combine_values(vals, combiner, table.n))


def replicate_check(table: engine.IndicatorTable, xi_row, family: Family,
                    combiner: Combiner) -> float:
    """One global statistic computed from the check multiplier process."""
    return _replicate(table, xi_row, family, combiner, Method.CHECK)


def replicate_hat(table: engine.IndicatorTable, xi_row, family: Family,
                  combiner: Combiner) -> float:
    """One global statistic computed from the hat multiplier process."""
    return _replicate(table, xi_row, family, combiner, Method.HAT)


def check_process(table: engine.IndicatorTable, xi_row) -> np.ndarray:
    """Values of the check process at every split and evaluation point.

    Returns an ``(m, n-1, n)`` array whose ``[l, k-1, q]`` entry is
    ``n^{-1/2} [ sum_{i<=k} xi_i g_i - (k/n) sum_i xi_i g_i ]`` with
    ``g_i = 1(obs i <= obs q) - F_n(obs q)`` in direction ``l``.
    """
    xi = np.asarray(xi_row, dtype=float)
    n = table.n
    if xi.shape != (n,):
        raise LengthMismatch(f"expected {n} multipliers, got shape {xi.shape}")
    F = table.counts[:, n, :] / n  # (m, n)
    g = table.indicators - F[:, None, :]  # (m, i, q)
    partial = np.cumsum(xi[None, :, None] * g, axis=1)
    lam = np.arange(1, n)[None, :, None] / n
    return (partial[:, : n - 1, :] - lam * partial[:, n - 1 : n, :]) / math.sqrt(n)


def pvalue(observed: float, reps) -> float:
    """Share of replicates at least as large as ``observed``."""
    values = reps.values if isinstance(reps, ReplicateSet) else np.asarray(reps, dtype=float)
    N = len(values)
    if N < 1:
        raise InvalidN("need at least one replicate")
    return int(np.count_nonzero(values >= observed)) / N


def _check_sim(sample: Sample, stats: Iterable[StatFamily]) -> None:
    if sample.d != 1:
        raise SimRequiresUnivariate(
            f"the simulation method needs univariate data, got d={sample.d}")
    for st in stats:
        if st.family not in (Family.S, Family.T):
            raise SimRequiresUnivariate(
                f"the simulation method covers the S and T families only, got {st.name}")


def _report(stat: StatFamily, prof: StatProfile, reps: np.ndarray, method: Method,
            seed: int, m: int, d: int) -> TestReport:
    observed = engine.combine(prof, stat.combiner)
    return TestReport(
        stat=stat,
        observed=observed,
        profile=prof,
        p_value=pvalue(observed, reps),
        replicates=reps,
        k_hat=engine.estimate_changepoint(prof),
        method=method,
        seed=int(seed),
        m=m,
        d=d,
    )


def run_tests(sample: Sample, stats: Sequence[StatFamily], method: Method, N: int,
              dirs: DirectionSet | None = None, seed: int = 0, m: int | None = None,
              workers: int = 1) -> list[TestReport]:
    """Run several statistics on one sample with a shared multiplier matrix.

    Tables are built once per indexing class and each replicate kernel runs
    once per class, since a single pass yields both the squared and the
    supremum profiles.
    """
    method = Method(method)
    stats = [s if isinstance(s, StatFamily) else StatFamily.parse(s) for s in stats]
    if N < 1:
        raise InvalidN(f"N must be >= 1, got {N}")
    if method is Method.SIM:
        _check_sim(sample, stats)
        return _run_sim(sample, stats, N, seed)

    need_orth = any(not s.family.uses_halfspaces for s in stats)
    need_half = any(s.family.uses_halfspaces for s in stats)
    if need_half and dirs is None:
        dirs = discretize(sample.d, m if m is not None else default_m(sample.d))

    xi = draw_multipliers(N, sample.n, seed).xi
    tables = {}
    if need_orth:
        tables["orth"] = engine.build_orthant_table(sample)
    if need_half:
        tables["half"] = engine.build_projection_table(sample, dirs)
    reps = {key: replicate_profiles(t, xi, method, workers) for key, t in tables.items()}

    out = []
    for st in stats:
        key = "half" if st.family.uses_halfspaces else "orth"
        t = tables[key]
        prof = engine.profile(t, st.family)
        sq, sup = reps[key]
        values = engine.combine_values(sq if st.family.squared else sup, st.combiner, t.n)
        out.append(_report(st, prof, values, method, seed,
                           dirs.m if st.family.uses_halfspaces else 0, sample.d))
    return out


def run_test(sample: Sample, stat: StatFamily, method: Method, N: int,
             dirs: DirectionSet | None = None, seed: int = 0, m: int | None = None,
             workers: int = 1) -> TestReport:
    return run_tests(sample, [stat], method, N, dirs=dirs, seed=seed, m=m, workers=workers)[0]


def _run_sim(sample: Sample, stats: Sequence[StatFamily], N: int, seed: int) -> list[TestReport]:
    n = sample.n
    u = np.random.default_rng(seed).random((N, n))
    sq, sup = kernels.sim_profiles(u)
    t = engine.build_orthant_table(sample)
    out = []
    for st in stats:
        prof = engine.profile(t, st.family)
        values = engine.combine_values(sq if st.family.squared else sup, st.combiner, n)
        out.append(_report(st, prof, values, Method.SIM, seed, 0, 1))
    return out


def run_sim_test(sample: Sample, stat: StatFamily, N: int, seed: int = 0) -> TestReport:
    """Univariate test whose null replicates come from uniform samples of size ``n``."""
    if N < 1:
        raise InvalidN(f"N must be >= 1, got {N}")
    _check_sim(sample, [stat])
    return _run_sim(sample, [stat], N, seed)[0]
