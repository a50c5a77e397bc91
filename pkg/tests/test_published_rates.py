"""Published rejection rates checked at reduced Monte Carlo scale."""
import pytest

from empcp import montecarlo
from empcp.datagen import Block, CopulaSpec, MarginSpec, ScenarioSpec
from empcp.montecarlo import ExperimentSpec

pytestmark = pytest.mark.slow


def _normal(mean=0.0, sd=1.0):
    return Block(margins=(MarginSpec.normal(mean, sd),))


def _rate(spec, stat, method):
    return montecarlo.run_experiment(spec).rate(stat, method)


def test_level_check_s_max():
    spec = ExperimentSpec(ScenarioSpec(n=100, seed=101), stats=(("S_max", "check"),), R=500, N=1000)
    assert 3.5 <= _rate(spec, "S_max", "check") <= 7.0  # published 5.5


def test_power_check_s_max_shift():
    spec = ExperimentSpec(ScenarioSpec(n=200, t=0.5, pre=_normal(), post=_normal(0.5), seed=102),
                          stats=(("S_max", "check"),), R=500, N=1000)
    assert abs(_rate(spec, "S_max", "check") - 86.4) <= 5


def test_level_sim_t_mean():
    spec = ExperimentSpec(ScenarioSpec(n=50, seed=103), stats=(("T_mean", "sim"),), R=500, N=1000)
    assert abs(_rate(spec, "T_mean", "sim") - 4.3) <= 2.5


def test_power_sim_t_mean_variance():
    spec = ExperimentSpec(ScenarioSpec(n=100, t=0.5, pre=_normal(), post=_normal(0, 2), seed=104),
                          stats=(("T_mean", "sim"),), R=500, N=1000)
    assert abs(_rate(spec, "T_mean", "sim") - 37.7) <= 6


def test_power_check_v_mean_clayton_margin_change():
    pre = Block(CopulaSpec("clayton", 0.5), (MarginSpec.exponential(1), MarginSpec.exponential(1)))
    post = Block(CopulaSpec("clayton", 0.5), (MarginSpec.exponential(0.5), MarginSpec.exponential(1)))
    spec = ExperimentSpec(ScenarioSpec(n=100, t=0.5, pre=pre, post=post, seed=105),
                          stats=(("V_mean", "check"),), R=300, N=500, m=8)
    assert abs(_rate(spec, "V_mean", "check") - 87.6) <= 6


def test_power_grows_with_n():
    stats = tuple((s, "check") for s in ("S_max", "S_mean", "T_max", "T_mean"))
    res = {}
    for n in (50, 200):
        spec = ExperimentSpec(ScenarioSpec(n=n, t=0.5, pre=_normal(), post=_normal(0.5), seed=106),
                              stats=stats, R=200, N=300)
        res[n] = montecarlo.run_experiment(spec)
    for stat, method in stats:
        assert res[200].rate(stat, method) >= res[50].rate(stat, method) - 2
