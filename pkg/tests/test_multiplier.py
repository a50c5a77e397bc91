import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from empcp import engine, multiplier
from empcp.errors import InvalidN, LengthMismatch, SimRequiresUnivariate
from empcp.model import Combiner, Family, Method, StatFamily, validate_sample
from empcp.sphere import discretize

from oracles import naive_check, naive_hat

ALL = StatFamily.all()


def _tables(x, m=8):
    s = validate_sample(x)
    return engine.build_orthant_table(s), engine.build_projection_table(s, discretize(s.d, m))


def _table_for(family, orth, proj):
    return proj if family.uses_halfspaces else orth


@pytest.mark.parametrize("stat", ALL, ids=lambda s: s.name)
def test_zero_multipliers_give_zero(stat):
    orth, proj = _tables(np.random.default_rng(0).normal(size=(10, 2)))
    t = _table_for(stat.family, orth, proj)
    assert multiplier.replicate_check(t, np.zeros(10), stat.family, stat.combiner) == 0.0
    assert multiplier.replicate_hat(t, np.zeros(10), stat.family, stat.combiner) == 0.0


@pytest.mark.parametrize("stat", ALL, ids=lambda s: s.name)
@pytest.mark.parametrize("c", [1.0, -2.5, 0.1])
def test_constant_multipliers_vanish_for_hat(stat, c):
    orth, proj = _tables(np.random.default_rng(1).normal(size=(13, 3)))
    t = _table_for(stat.family, orth, proj)
    assert multiplier.replicate_hat(t, np.full(13, c), stat.family, stat.combiner) == 0.0


def test_two_point_check_replicate():
    t = engine.build_orthant_table(validate_sample([[0], [1]]))
    assert multiplier.replicate_check(t, [1.0, -1.0], Family.T, Combiner.MAX) == 0.0
    np.testing.assert_allclose(multiplier.check_process(t, [1.0, -1.0]), 0.0, atol=1e-17)


def test_check_u_against_definition():
    rng = np.random.default_rng(20)
    x = rng.normal(size=(20, 2))
    xi = rng.normal(size=20)
    _, proj = _tables(x)
    sq, _ = naive_check(x, xi, discretize(2, 8).directions)
    for comb, want in ((Combiner.MAX, sq.max()), (Combiner.MEAN, sq.sum() / 20)):
        got = multiplier.replicate_check(proj, xi, Family.U, comb)
        assert got == pytest.approx(want, abs=1e-12, rel=0)


def test_hat_v_against_definition():
    rng = np.random.default_rng(21)
    x = rng.normal(size=(20, 2))
    xi = rng.normal(size=20)
    _, proj = _tables(x)
    _, sup = naive_hat(x, xi, discretize(2, 8).directions)
    for comb, want in ((Combiner.MAX, sup.max()), (Combiner.MEAN, sup.sum() / 20)):
        got = multiplier.replicate_hat(proj, xi, Family.V, comb)
        assert got == pytest.approx(want, abs=1e-12, rel=0)


def test_check_process_agrees_with_kernel():
    rng = np.random.default_rng(22)
    x = rng.normal(size=(15, 1))
    xi = rng.normal(size=15)
    orth, _ = _tables(x, m=1)
    proc = multiplier.check_process(orth, xi)
    n = 15
    sq = np.sum(proc[0] ** 2, axis=1) / n
    assert multiplier.replicate_check(orth, xi, Family.S, Combiner.MAX) == pytest.approx(sq.max(), abs=1e-12)
    assert multiplier.replicate_check(orth, xi, Family.T, Combiner.MAX) == pytest.approx(
        np.abs(proc).max(), abs=1e-12)


def test_length_mismatch():
    orth, _ = _tables(np.random.default_rng(0).normal(size=(6, 1)), m=1)
    with pytest.raises(LengthMismatch):
        multiplier.replicate_check(orth, np.zeros(5), Family.S, Combiner.MAX)
    with pytest.raises(LengthMismatch):
        multiplier.replicate_hat(orth, np.zeros(7), Family.S, Combiner.MAX)


def test_check_process_has_mean_zero():
    rng = np.random.default_rng(23)
    x = rng.normal(size=(12, 2))
    orth, _ = _tables(x)
    xi = multiplier.draw_multipliers(10_000, 12, seed=4).xi
    vals = np.array([multiplier.check_process(orth, row)[0, 5, 3] for row in xi])
    se = vals.std(ddof=1) / np.sqrt(len(vals))
    assert abs(vals.mean()) <= 4 * se


@pytest.mark.parametrize("obs,reps,want", [
    (5, [1, 2, 3], 0.0), (5, [6, 7, 4], 2 / 3), (5, [5, 5, 5], 1.0),
])
def test_pvalue_examples(obs, reps, want):
    assert multiplier.pvalue(obs, reps) == want


def test_pvalue_needs_replicates():
    with pytest.raises(InvalidN):
        multiplier.pvalue(1.0, [])


@pytest.mark.parametrize("method", [Method.CHECK, Method.HAT, Method.SIM])
def test_constant_sample_is_never_rejected(method):
    s = validate_sample(np.full((15, 1), 2.0))
    for fam in (Family.S, Family.T):
        rep = multiplier.run_test(s, StatFamily(fam, Combiner.MAX), method, N=50, seed=1)
        assert rep.observed == 0.0 and rep.p_value == 1.0


def test_constant_multivariate_sample_halfspace():
    s = validate_sample(np.full((15, 3), 2.0))
    rep = multiplier.run_test(s, StatFamily(Family.V, Combiner.MEAN), Method.CHECK, N=40, seed=2)
    assert rep.observed == 0.0 and rep.p_value == 1.0 and rep.m == 32


def test_sim_rejects_multivariate():
    s = validate_sample(np.random.default_rng(0).normal(size=(10, 2)))
    with pytest.raises(SimRequiresUnivariate):
        multiplier.run_test(s, StatFamily(Family.S, Combiner.MAX), Method.SIM, N=10)
    with pytest.raises(SimRequiresUnivariate):
        multiplier.run_sim_test(s, StatFamily(Family.S, Combiner.MAX), N=10)


def test_sim_rejects_halfspace_family():
    s = validate_sample(np.random.default_rng(0).normal(size=(10, 1)))
    with pytest.raises(SimRequiresUnivariate):
        multiplier.run_sim_test(s, StatFamily(Family.U, Combiner.MAX), N=10)


def test_invalid_N():
    s = validate_sample(np.random.default_rng(0).normal(size=(10, 1)))
    with pytest.raises(InvalidN):
        multiplier.run_test(s, StatFamily(Family.S, Combiner.MAX), Method.CHECK, N=0)


def test_sim_replicates_are_statistics_of_uniform_rows():
    s = validate_sample(np.random.default_rng(3).normal(size=(20, 1)))
    stat = StatFamily(Family.T, Combiner.MEAN)
    rep = multiplier.run_sim_test(s, stat, N=6, seed=11)
    u = np.random.default_rng(11).random((6, 20))
    for j in range(6):
        prof = engine.profile_T(engine.build_orthant_table(validate_sample(u[j])))
        assert rep.replicates[j] == pytest.approx(engine.combine(prof, Combiner.MEAN), abs=1e-14)


@pytest.mark.parametrize("method", [Method.CHECK, Method.HAT, Method.SIM])
def test_replicate_j_depends_only_on_seed_and_j(method):
    s = validate_sample(np.random.default_rng(4).normal(size=(18, 1)))
    stat = StatFamily(Family.S, Combiner.MAX)
    short = multiplier.run_test(s, stat, method, N=5, seed=99)
    long = multiplier.run_test(s, stat, method, N=12, seed=99)
    assert np.array_equal(short.replicates, long.replicates[:5])


def test_deterministic_and_worker_independent():
    s = validate_sample(np.random.default_rng(5).normal(size=(30, 2)))
    stats = StatFamily.all()
    a = multiplier.run_tests(s, stats, Method.CHECK, N=40, seed=3, workers=1)
    b = multiplier.run_tests(s, stats, Method.CHECK, N=40, seed=3, workers=3)
    c = multiplier.run_tests(s, stats, Method.CHECK, N=40, seed=3, workers=1)
    assert a == b == c


def test_shared_run_equals_single_runs():
    s = validate_sample(np.random.default_rng(6).normal(size=(25, 2)))
    stats = [StatFamily.parse("S_max"), StatFamily.parse("V_mean")]
    both = multiplier.run_tests(s, stats, Method.HAT, N=30, seed=8)
    for st, rep in zip(stats, both):
        assert rep == multiplier.run_test(s, st, Method.HAT, N=30, seed=8)


@given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 40))
@settings(max_examples=25, deadline=None)
def test_pvalue_is_multiple_of_one_over_N(seed, N):
    s = validate_sample(np.random.default_rng(seed).normal(size=(12, 1)))
    rep = multiplier.run_test(s, StatFamily(Family.T, Combiner.MAX), Method.CHECK, N=N, seed=seed)
    assert 0.0 <= rep.p_value <= 1.0
    assert rep.p_value * N == pytest.approx(round(rep.p_value * N), abs=1e-9)
    assert rep.p_value == np.count_nonzero(rep.replicates >= rep.observed) / N
    assert rep.profile.values[rep.k_hat - 1] == rep.profile.values.max()


def test_default_m():
    assert [multiplier.default_m(d) for d in (1, 2, 3, 5)] == [1, 8, 32, 32]


def test_replicate_set():
    rs = multiplier.ReplicateSet(np.array([1.0, 2.0]), Method.HAT, 3)
    assert len(rs) == 2 and multiplier.pvalue(1.5, rs) == 0.5
