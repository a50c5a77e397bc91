import io

import numpy as np
import pytest

from empcp import montecarlo
from empcp.datagen import Block, MarginSpec, ScenarioSpec
from empcp.errors import InvalidN, SpecParseError
from empcp.model import Method, StatFamily
from empcp.montecarlo import ExperimentResult, ExperimentSpec, ResultRow


def _spec(**kw):
    base = dict(scenario=ScenarioSpec(n=30, seed=4),
                stats=(("S_max", "check"), ("T_mean", "hat")), R=6, N=40)
    base.update(kw)
    return ExperimentSpec(**base)


def test_spec_validation():
    with pytest.raises(InvalidN):
        _spec(R=0)
    with pytest.raises(InvalidN):
        _spec(N=0)
    with pytest.raises(ValueError):
        _spec(alpha=1.0)
    full = _spec().full()
    assert (full.R, full.N) == (1000, 1000)


def test_trial_seeds_distinct_and_stable():
    seeds = {montecarlo.trial_seeds(7, r) for r in range(50)}
    assert len(seeds) == 50
    assert montecarlo.trial_seeds(7, 3) == montecarlo.trial_seeds(7, 3)
    assert montecarlo.trial_seeds(7, 3) != montecarlo.trial_seeds(8, 3)


def test_rejection_rule_uses_weak_inequality():
    res = montecarlo.run_experiment(_spec(R=12))
    for c, row in enumerate(res.rows):
        assert row.rejection_pct == 100 * np.mean(res.p_values[:, c] <= 0.05)
        p = row.rejection_pct / 100
        assert row.mc_se == pytest.approx(100 * np.sqrt(p * (1 - p) / 12))


def test_single_trial_follows_its_p_value():
    spec = ExperimentSpec(ScenarioSpec(n=20, pre=Block(margins=(MarginSpec.normal(0, 1),))),
                          stats=(("S_max", "check"),), R=1, N=30)
    res = montecarlo.run_experiment(spec)
    assert res.R == 1 and len(res.rows) == 1
    assert res.rows[0].rejection_pct == (100.0 if res.p_values[0, 0] <= 0.05 else 0.0)
    assert 0 <= res.rows[0].rejection_pct <= 100


def test_worker_count_does_not_change_results():
    spec = _spec(stats=(("S_max", "check"), ("V_mean", "check"), ("T_mean", "sim")), R=5)
    a = montecarlo.run_experiment(spec, workers=1)
    b = montecarlo.run_experiment(spec, workers=4)
    assert np.array_equal(a.p_values, b.p_values)
    assert montecarlo.emit_table(a, timing=False) == montecarlo.emit_table(b, timing=False)


def test_rate_lookup():
    res = montecarlo.run_experiment(_spec(R=3))
    assert res.rate("S_max", "check") == res.rows[0].rejection_pct
    with pytest.raises(KeyError):
        res.rate("U_max", "check")


def test_empty_stats_gives_header_only():
    res = montecarlo.run_experiment(_spec(stats=()))
    assert montecarlo.emit_table(res) == "stat,method,rejection_pct,mc_se,seconds\n"


def test_single_row_table_has_two_lines():
    res = montecarlo.run_experiment(_spec(stats=(("S_max", "check"),), R=2))
    buf = io.StringIO()
    text = montecarlo.emit_table(res, buf)
    assert buf.getvalue() == text
    assert len(text.splitlines()) == 2


def test_table_round_trip_is_exact():
    rows = (ResultRow(StatFamily.parse("U_max"), Method.HAT, 100 / 3, 0.1 + 0.2, 1.2345678901234567),
            ResultRow(StatFamily.parse("T_mean"), Method.SIM, 5.5, 0.7211102550927979, None))
    text = montecarlo.emit_table(ExperimentResult(rows, 300))
    back = montecarlo.parse_table(text)
    for row, rec in zip(rows, back):
        assert rec["stat"] == row.stat and rec["method"] is row.method
        assert rec["rejection_pct"] == row.rejection_pct
        assert rec["mc_se"] == row.mc_se
        assert rec["seconds"] == row.seconds


def test_timing_column_blank_when_disabled():
    res = montecarlo.run_experiment(_spec(R=2))
    for line in montecarlo.emit_table(res, timing=False).splitlines()[1:]:
        assert line.endswith(",")


def test_parse_experiment():
    spec = montecarlo.parse_experiment(
        "n = 50\nt = 0.5\nseed = 2\nmargins = normal\npost.margins = normal(0.5, 1)\n"
        "stats = S_max:check, T+:sim, V_mean\nR = 7\nN = 30\nalpha = 0.1\nm = 4\n")
    assert spec.R == 7 and spec.N == 30 and spec.alpha == 0.1 and spec.m == 4
    assert [(s.name, m.value) for s, m in spec.stats] == [
        ("S_max", "check"), ("T_mean", "sim"), ("V_mean", "check")]
    assert spec.scenario.post.margins[0] == MarginSpec.normal(0.5, 1)


def test_parse_experiment_defaults():
    spec = montecarlo.parse_experiment("n = 10\n")
    assert spec.R == 1 and spec.N == 1000 and spec.alpha == 0.05
    assert [(s.name, m.value) for s, m in spec.stats] == [("S_max", "check")]


@pytest.mark.parametrize("text,key", [
    ("n = 10\nR = 0\n", "R"), ("n = 10\nN = many\n", "N"), ("n = 10\nstats = Q_max\n", "stats"),
    ("n = 10\nalpha = 2\n", "alpha"), ("n = 10\nm = 0\n", "m"),
])
def test_parse_experiment_errors(text, key):
    with pytest.raises(SpecParseError) as exc:
        montecarlo.parse_experiment(text)
    assert exc.value.key == key
