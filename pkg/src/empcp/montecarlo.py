"""Rejection-rate experiments: repeat (generate, test) and count rejections."""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import TextIO

import numpy as np

from . import datagen
from .errors import InvalidN, SpecParseError
from .model import Method, StatFamily
from .multiplier import default_m, run_tests
from .sphere import discretize

COLUMNS = ("stat", "method", "rejection_pct", "mc_se", "seconds")
FULL_R = 1000
FULL_N = 1000


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: datagen.ScenarioSpec  # its seed is the base seed
    stats: tuple[tuple[StatFamily, Method], ...] = ()
    R: int = 1
    N: int = 1000
    alpha: float = 0.05
    m: int | None = None

    def __post_init__(self):
        if self.R < 1:
            raise InvalidN(f"R must be >= 1, got {self.R}")
        if self.N < 1:
            raise InvalidN(f"N must be >= 1, got {self.N}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        stats = tuple((s if isinstance(s, StatFamily) else StatFamily.parse(s), Method(meth))
                      for s, meth in self.stats)
        object.__setattr__(self, "stats", stats)

    def full(self) -> "ExperimentSpec":
        """The same experiment at the 1000 trials x 1000 replicates scale."""
        return replace(self, R=FULL_R, N=FULL_N)


@dataclass(frozen=True)
class ResultRow:
    stat: StatFamily
    method: Method
    rejection_pct: float
    mc_se: float  # percentage points
    seconds: float | None = None


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple[ResultRow, ...]
    R: int
    p_values: np.ndarray = field(repr=False, default=None)  # (R, len(rows))

    def rate(self, stat, method) -> float:
        """Rejection percentage for one (statistic, method) pair."""
        st = stat if isinstance(stat, StatFamily) else StatFamily.parse(stat)
        for row in self.rows:
            if row.stat == st and row.method is Method(method):
                return row.rejection_pct
        raise KeyError((st.name, method))


def trial_seeds(base_seed: int, r: int) -> tuple[int, int]:
    """Data and multiplier seeds for trial ``r``, mixed from ``(base_seed, r)``."""
    data, mult = np.random.SeedSequence([int(base_seed), int(r)]).generate_state(2, np.uint64)
    return int(data), int(mult)


def _run_trial(spec: ExperimentSpec, r: int, dirs, groups):
    data_seed, mult_seed = trial_seeds(spec.scenario.seed, r)
    sample = datagen.generate(datagen.with_seed(spec.scenario, data_seed))
    pvals = {}
    secs = {}
    for method, stats in groups.items():
        t0 = time.perf_counter()
        reports = run_tests(sample, stats, method, spec.N, dirs=dirs, seed=mult_seed)
        dt = time.perf_counter() - t0
        for st, rep in zip(stats, reports):
            pvals[(st, method)] = rep.p_value
            secs[(st, method)] = dt
    return pvals, secs


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Run ``spec.R`` independent trials and tabulate rejection rates.

    A trial rejects when ``p <= alpha``. All statistics sharing a method in
    one trial see the same data and the same multipliers, and methods share
    the trial's seed, so comparisons between rows use common random
    numbers. Results are independent of ``workers``.
    """
    d = spec.scenario.d
    needs_dirs = any(st.family.uses_halfspaces for st, _ in spec.stats)
    dirs = discretize(d, spec.m if spec.m is not None else default_m(d)) if needs_dirs else None
    groups: dict[Method, list[StatFamily]] = {}
    for st, meth in spec.stats:
        groups.setdefault(meth, []).append(st)

    keys = list(spec.stats)
    pv = np.empty((spec.R, len(keys)))
    secs = np.zeros(len(keys))
    if keys:
        def one(r):
            return _run_trial(spec, r, dirs, groups)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                trials = list(pool.map(one, range(spec.R)))
        else:
            trials = [one(r) for r in range(spec.R)]
        for r, (pvals, s) in enumerate(trials):
            for c, key in enumerate(keys):
                pv[r, c] = pvals[key]
                secs[c] += s[key]

    rows = []
    for c, (st, meth) in enumerate(keys):
        p_hat = float(np.count_nonzero(pv[:, c] <= spec.alpha)) / spec.R
        rows.append(ResultRow(st, meth, 100.0 * p_hat,
                              100.0 * math.sqrt(p_hat * (1.0 - p_hat) / spec.R),
                              float(secs[c])))
    return ExperimentResult(tuple(rows), spec.R, pv)


def _fmt(x: float | None) -> str:
    return "" if x is None else format(x, ".17g")


def emit_table(result: ExperimentResult, stream: TextIO | None = None,
               timing: bool = True) -> str:
    """CSV with columns ``stat, method, rejection_pct, mc_se, seconds``.

    With ``timing=False`` the seconds column is left empty so identical runs
    give identical bytes.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in result.rows:
        w.writerow([row.stat.name, row.method.value, _fmt(row.rejection_pct),
                    _fmt(row.mc_se), _fmt(row.seconds if timing else None)])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def parse_table(text: str) -> list[dict]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append({
            "stat": StatFamily.parse(rec["stat"]),
            "method": Method(rec["method"]),
            "rejection_pct": float(rec["rejection_pct"]),
            "mc_se": float(rec["mc_se"]),
            "seconds": float(rec["seconds"]) if rec["seconds"] else None,
        })
    return rows


EXPERIMENT_KEYS = ("stats", "R", "N", "alpha", "m")


def parse_experiment(text: str) -> ExperimentSpec:
    """Read an experiment file: scenario keys plus ``stats``, ``R``, ``N``,
    ``alpha`` and ``m``.

    ``stats`` is a comma-separated list of ``FAMILY_COMBINER:METHOD`` items,
    e.g. ``S_max:check, T_mean:sim``; it defaults to ``S_max:check``.
    Keys are case-sensitive: ``n`` is the sample size, ``N`` the number of
    replicates per test.
    """
    items = datagen.read_key_values(text)
    scen_items = {k: v for k, v in items.items() if k not in EXPERIMENT_KEYS}
    scenario = datagen.scenario_from_items(scen_items)

    def num(key, conv, default):
        if key not in items:
            return default
        value, line = items[key]
        try:
            return conv(value)
        except ValueError:
            raise SpecParseError(key, f"invalid value {value!r}", line) from None

    stats = []
    value, line = items.get("stats", ("S_max:check", None))
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, meth = part.partition(":")
        try:
            stats.append((StatFamily.parse(name), Method((meth or "check").strip().lower())))
        except ValueError:
            raise SpecParseError("stats", f"cannot parse {part!r}", line) from None
    R = num("R", int, 1)
    N = num("N", int, 1000)
    alpha = num("alpha", float, 0.05)
    m = num("m", int, None)
    for key, val, ok in (("R", R, R >= 1), ("N", N, N >= 1),
                         ("alpha", alpha, 0 < alpha < 1), ("m", m, m is None or m >= 1)):
        if not ok:
            raise SpecParseError(key, f"out of range: {val}", items[key][1])
    return ExperimentSpec(scenario, tuple(stats), R=R, N=N, alpha=alpha, m=m)
