import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from statsmodels.stats.proportion import proportion_confint

from gtdiscovery import (
    SamplingPlan,
    estimate_success,
    make_config,
    min_probes_for_target,
    optimal_q,
    run_trial,
    success_time,
    sweep_probes,
    sweep_q,
    union_bound_fixed,
)
from gtdiscovery.errors import PlanOutOfRange
from gtdiscovery.montecarlo import (
    SuccessEstimate,
    read_sweep_csv,
    trial_seed,
    wilson_interval,
)

import oracles
from conftest import fixed_configs, random_configs


@pytest.mark.parametrize("s, n", [(1, 1), (0, 1), (9, 10), (0, 10), (517, 1000), (10_000, 10_000)])
def test_wilson_matches_statsmodels(s, n):
    lo, hi = proportion_confint(s, n, alpha=0.05, method="wilson")
    assert wilson_interval(s, n) == pytest.approx((lo, hi), abs=1e-9)


@given(st.integers(1, 10**6), st.data())
def test_success_estimate_invariants(trials, data):
    successes = data.draw(st.integers(0, trials))
    e = SuccessEstimate.from_counts(successes, trials)
    assert e.ci_low <= e.p_hat <= e.ci_high
    assert e.p_hat == successes / trials


def test_trial_seed_is_pure():
    a = trial_seed(1, "x", 5).generate_state(4)
    assert np.array_equal(a, trial_seed(1, "x", 5).generate_state(4))
    assert not np.array_equal(a, trial_seed(1, "x", 6).generate_state(4))
    assert not np.array_equal(a, trial_seed(1, "y", 5).generate_state(4))
    assert not np.array_equal(a, trial_seed(2, "x", 5).generate_state(4))


def test_run_trial_edge_cases(fig2):
    plan = optimal_q(fig2)
    assert not any(run_trial(fig2, plan, 0, s) for s in range(20))
    everyone = make_config([(6, 6, 1.0), (4, 4, 0.5)])
    assert all(run_trial(everyone, SamplingPlan.manual([0.3, 0.2]), T, s) for s in range(10) for T in (0, 1, 9))


@settings(max_examples=80, deadline=None)
@given(st.one_of(fixed_configs(max_clusters=3, max_n=30), random_configs(max_clusters=3, max_n=30)), st.data())
def test_success_time_agrees_with_full_trial(cfg, data):
    plan = SamplingPlan.manual([data.draw(st.floats(0.0, 0.8)) for _ in range(cfg.m)])
    seed = trial_seed(data.draw(st.integers(0, 1000)), "prop", data.draw(st.integers(0, 1000)))
    cap = data.draw(st.integers(0, 150))
    tau = success_time(cfg, plan, cap, seed)
    for T in sorted({0, 1, cap // 3, cap // 2, cap, max(cap - 1, 0)}):
        assert run_trial(cfg, plan, T, seed) == (tau is not None and tau <= T)
    if tau is not None:
        assert tau <= cap


@pytest.mark.parametrize("T", [60, 150, 250])
def test_estimate_matches_exact_fixed(fig2, T):
    plan = optimal_q(fig2)
    est = estimate_success(fig2, plan, T, 4000, master_seed=21)
    exact = oracles.exact_success_fixed(plan.q, [300, 200], [3, 2], T)
    assert abs(est.p_hat - exact) <= 4 * math.sqrt(exact * (1 - exact) / est.trials) + 1e-12


@pytest.mark.parametrize("T", [200, 400])
def test_estimate_matches_exact_random(fig4, T):
    plan = optimal_q(fig4)
    est = estimate_success(fig4, plan, T, 3000, master_seed=22)
    exact = oracles.exact_success_random(plan.q, [200, 400], [0.02, 0.01], T)
    assert abs(est.p_hat - exact) <= 4 * math.sqrt(exact * (1 - exact) / est.trials)


def test_workers_do_not_change_results(fig2):
    plan = optimal_q(fig2)
    one = estimate_success(fig2, plan, 150, 300, master_seed=5, workers=1)
    three = estimate_success(fig2, plan, 150, 300, master_seed=5, workers=3)
    assert one == three


def test_single_trial_estimate(fig2):
    everyone = make_config([(3, 3, 1.0)])
    e = estimate_success(everyone, SamplingPlan.manual([0.5]), 4, 1, master_seed=0)
    assert (e.p_hat, e.successes, e.trials) == (1.0, 1, 1)
    assert (e.ci_low, e.ci_high) == pytest.approx(wilson_interval(1, 1))


def test_min_probes_edge_cases(fig2):
    everyone = make_config([(5, 5, 1.0)])
    assert min_probes_for_target(everyone, SamplingPlan.manual([0.2]), 0.5, 50, 1, T_cap=100) == 1
    assert min_probes_for_target(fig2, SamplingPlan.manual([0.0, 0.0]), 0.5, 50, 1, T_cap=300) is None
    assert min_probes_for_target(fig2, optimal_q(fig2), 0.9, 200, 1, T_cap=20) is None


def test_min_probes_matches_linear_scan():
    cfg = make_config([(40, 2, 1.0), (30, 1, 0.5)])
    plan = optimal_q(cfg)
    got = min_probes_for_target(cfg, plan, 0.8, 400, master_seed=9, T_cap=500)

    def failure(T):
        return 1 - estimate_success(cfg, plan, T, 400, master_seed=9).p_hat

    assert got == oracles.linear_min_T(failure, 1 - 0.8 + 1e-12)


def test_sweep_probes_points_equal_single_estimates(fig2):
    plan = optimal_q(fig2)
    grid = [0, 40, 120, 200]
    rec = sweep_probes(fig2, plan, grid, 300, master_seed=4)
    assert [p.T for p in rec.points] == grid
    assert rec.points[0].estimate.p_hat == 0.0
    for pt in rec.points:
        assert pt.estimate == estimate_success(fig2, plan, pt.T, 300, master_seed=4)
    rows = read_sweep_csv(rec.to_csv())
    assert [r["successes"] for r in rows] == [p.estimate.successes for p in rec.points]
    assert [r["p_hat"] for r in rows] == [p.estimate.p_hat for p in rec.points]


def test_ci_width_follows_square_root_law(fig2):
    plan = optimal_q(fig2)
    w = []
    for trials in (2000, 8000):
        e = estimate_success(fig2, plan, 150, trials, master_seed=77)
        w.append(e.ci_high - e.ci_low)
    assert w[0] / w[1] == pytest.approx(2.0, rel=0.2)


@pytest.mark.parametrize("base", [0.125, 0.5])
def test_derived_plan_beats_detuned_base(fig2, base):
    # detuned within the same energy budget (q_i = beta_i * base); swapping the
    # per-cluster rates instead ignores the budget and can genuinely do better
    grid = [120, 150, 180]
    good = sweep_probes(fig2, optimal_q(fig2), grid, 2000, master_seed=8)
    bad = sweep_probes(fig2, SamplingPlan.base_scaled(fig2, base), grid, 2000, master_seed=8)
    for g, b in zip(good.points, bad.points):
        width = b.estimate.ci_high - b.estimate.ci_low
        assert g.estimate.p_hat >= b.estimate.p_hat - width


def test_success_not_above_union_bound_fixed(fig2):
    plan = optimal_q(fig2)
    rec = sweep_probes(fig2, plan, list(range(20, 301, 40)), 2000, master_seed=13)
    for pt in rec.points:
        err = 1 - pt.estimate.p_hat
        assert err <= union_bound_fixed(plan, fig2, pt.T).value + 3 * pt.estimate.se


def test_sweep_q_single_point_consistency(fig2):
    rec = sweep_q(fig2, [0.25], 0.8, 300, master_seed=3, T_cap=1000)
    direct = min_probes_for_target(fig2, optimal_q(fig2), 0.8, 300, 3, T_cap=1000)
    assert rec.points[0].min_T == direct
    assert rec.derived_index == 0
    assert rec.derived_base_q == 0.25


def test_sweep_q_marks_nearest_and_round_trips(fig4):
    rec = sweep_q(fig4, [0.1, 0.15, 0.3], 0.5, 100, master_seed=3, T_cap=2000)
    assert rec.derived_index == 1
    rows = read_sweep_csv(rec.to_csv())
    assert [r["base_q"] for r in rows] == [0.1, 0.15, 0.3]
    assert rows[2]["q_values"] == (0.3, 0.15)
    assert all(r["reached"] for r in rows)


def test_sweep_q_rejects_out_of_range(fig2):
    with pytest.raises(PlanOutOfRange):
        sweep_q(fig2, [0.5, 1.0], 0.9, 10, master_seed=1, T_cap=10)


def test_sweep_q_with_beta_override(fig2):
    rec = sweep_q(fig2, [0.2, 0.25], 0.5, 50, master_seed=1, T_cap=600, beta=[1.0, 1.0])
    assert rec.points[0].q == (0.2, 0.2)
    assert rec.derived_base_q == pytest.approx(0.2)
