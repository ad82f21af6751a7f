"""Step-size schedules, their standing conditions, and per-agent variants."""

import numpy as np
import pytest

from dpdsub.schedules import (
    EVIDENCE,
    FAIL,
    PASS,
    StepSizeSchedule,
    parse_schedule,
    per_agent_schedule,
    validate_diminishing_conditions,
    validate_penalty_step_conditions,
)


def test_schedule_values_and_labels():
    h = StepSizeSchedule("harmonic", 1.0)
    assert h.alpha(0) == 1.0 and h.alpha(9) == 0.1
    np.testing.assert_allclose(h.alphas(4), [1.0, 0.5, 1 / 3, 0.25])
    assert h.label() == "harmonic"
    p = StepSizeSchedule("power", 0.5)
    assert p.alpha(3) == 0.5
    assert p.label() == "power:0.5"
    c = StepSizeSchedule("constant", 0.2)
    assert c.alpha(1000) == 0.2
    np.testing.assert_allclose(c.alphas(3), [0.2, 0.2, 0.2])


def test_schedule_rejects_bad_parameters():
    with pytest.raises(ValueError):
        StepSizeSchedule("geometric", 0.5)
    with pytest.raises(ValueError):
        StepSizeSchedule("harmonic", 0.0)
    with pytest.raises(ValueError):
        StepSizeSchedule("power", 1.5)


def test_parse_schedule_round_trip():
    assert parse_schedule("harmonic") == StepSizeSchedule("harmonic", 1.0)
    assert parse_schedule("harmonic:2") == StepSizeSchedule("harmonic", 2.0)
    assert parse_schedule(" power:0.8 ") == StepSizeSchedule("power", 0.8)
    assert parse_schedule("constant:0.1") == StepSizeSchedule("constant", 0.1)
    for bad in ("power", "constant", "harmonic:a:b", "harmonic:-1", "nope:1"):
        with pytest.raises(ValueError):
            parse_schedule(bad)


def test_harmonic_passes_both_validators_analytically():
    for sched in (StepSizeSchedule("harmonic", 1.0), StepSizeSchedule("harmonic", 3.0)):
        rep = validate_penalty_step_conditions(sched, horizon=4096)
        assert rep.verdict == PASS and rep.analytic
        assert len(rep.conditions) == 6
        rep = validate_diminishing_conditions(sched, horizon=4096)
        assert rep.verdict == PASS
        assert len(rep.conditions) == 3


def test_constant_schedule_fails_both_validators():
    sched = StepSizeSchedule("constant", 0.1)
    for validate in (validate_penalty_step_conditions, validate_diminishing_conditions):
        rep = validate(sched, horizon=4096)
        assert rep.verdict == FAIL
        assert not rep.ok
        failed = {name for name, v, _ in rep.conditions if v == FAIL}
        assert "sum_alpha_sq_finite" in failed
        assert "alpha_to_zero" in failed


def test_power_exponent_splits_the_two_condition_sets():
    # 1/sqrt(k+1): square sums diverge, so even the classic three fail.
    rep = validate_diminishing_conditions(StepSizeSchedule("power", 0.5), horizon=4096)
    assert rep.verdict == FAIL
    rep = validate_penalty_step_conditions(StepSizeSchedule("power", 0.5), horizon=4096)
    assert rep.verdict == FAIL
    # Exponent 0.6 satisfies the classic conditions but not the three extra
    # ones that weigh the running sum of steps.
    rep = validate_diminishing_conditions(StepSizeSchedule("power", 0.6), horizon=4096)
    assert rep.verdict == PASS
    rep = validate_penalty_step_conditions(StepSizeSchedule("power", 0.6), horizon=4096)
    assert rep.verdict == FAIL
    # Exponent 0.8 is provably fine for all six.
    rep = validate_penalty_step_conditions(StepSizeSchedule("power", 0.8), horizon=4096)
    assert rep.verdict == PASS and rep.analytic


def test_validator_requires_a_meaningful_horizon():
    with pytest.raises(ValueError):
        validate_penalty_step_conditions(StepSizeSchedule("harmonic", 1.0), horizon=8)


def test_report_summary_lists_conditions():
    rep = validate_penalty_step_conditions(StepSizeSchedule("constant", 0.1), horizon=1024)
    text = rep.summary()
    assert "FAIL" in text and "constant:0.1" in text
    assert "sum_alpha_diverges" in text


def test_harmonic_partial_sums_against_log_bound():
    # s(k) = sum_{t<=k} 1/(t+1). The bound log2(k) + 1 holds from k = 2 on
    # but not at k = 1, where s(1) = 1.5; shifting the argument by one fixes
    # the edge, and that shifted form is what the step conditions lean on.
    K = 1_000_000
    s = np.cumsum(1.0 / (np.arange(K + 1) + 1.0))
    k = np.arange(2, K + 1)
    assert (s[2:] <= np.log2(k) + 1.0).all()
    assert s[1] == 1.5 and s[1] > np.log2(1) + 1.0
    k_all = np.arange(K + 1)
    assert (s <= np.log2(k_all + 1.0) + 1.0).all()


def test_per_agent_factors_stay_in_band():
    base = StepSizeSchedule("harmonic", 1.0)
    sched = per_agent_schedule(base, n_agents=4, rounds=50, deviation=0.6, seed=3)
    assert sched.n_agents == 4 and sched.rounds == 50
    assert (sched.factors >= 0.6).all() and (sched.factors <= 1.0).all()
    a = sched.alpha(9)
    assert a.shape == (4,)
    np.testing.assert_allclose(a, 0.1 * sched.factors[9])
    with pytest.raises(ValueError):
        sched.alpha(50)
    # Deviation one degenerates to the base schedule for every agent.
    flat = per_agent_schedule(base, n_agents=3, rounds=10, deviation=1.0)
    np.testing.assert_array_equal(flat.alpha(4), [0.2, 0.2, 0.2])
    with pytest.raises(ValueError):
        per_agent_schedule(base, n_agents=3, rounds=10, deviation=0.0)


def test_same_seed_reproduces_factors():
    base = StepSizeSchedule("harmonic", 1.0)
    a = per_agent_schedule(base, 5, 20, deviation=0.5, seed=9)
    b = per_agent_schedule(base, 5, 20, deviation=0.5, seed=9)
    np.testing.assert_array_equal(a.factors, b.factors)
    c = per_agent_schedule(base, 5, 20, deviation=0.5, seed=10)
    assert not np.array_equal(a.factors, c.factors)
