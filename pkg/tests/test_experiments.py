import math

import numpy as np
import pytest

from floquet_well import DrivingSchedule, ModelParams, bessel_j, bessel_zero, floquet_modes, quasienergies
from floquet_well.experiments import (
    THREADS_ENV,
    cdt_check,
    detect_crossings,
    population_series,
    run_switch,
    sweep_spectrum,
    switch_protocol,
    tunneling_estimate,
    tunneling_time,
    worker_count,
)
from floquet_well.model import NOON, PAIR_RIGHT

from conftest import X1, Y1


@pytest.fixture(scope="module")
def sweeps():
    return {U: sweep_spectrum(U, 50, 0.5, 0, 6, 0.05, numeric_stride=10) for U in (0, 2, 50, 52)}


def test_sweep_shape(sweeps):
    s = sweeps[0]
    assert len(s.axis) == 121
    assert np.all(np.diff(s.axis) > 0)
    assert not np.isnan(s.numeric[::10]).any()
    assert np.isnan(s.numeric[1::10]).all()


def test_sweep_rejects_bad_step():
    with pytest.raises(ValueError):
        sweep_spectrum(0, 50, 0.5, 0, 6, 0)


def test_crossings_no_interaction(sweeps):
    reports = [r for r in detect_crossings(sweeps[0]) if r.kind != "none"]
    assert [r.kind for r in reports] == ["three-level", "three-level"]
    assert reports[0].location == pytest.approx(bessel_zero(0, 1), abs=1e-3)
    assert reports[1].location == pytest.approx(bessel_zero(0, 2), abs=1e-3)
    assert reports[0].levels_involved == {0, 1, 2}


def test_crossings_resonant_translation(sweeps):
    three = [r for r in detect_crossings(sweeps[50]) if r.kind == "three-level"]
    assert three[0].location == pytest.approx(bessel_zero(1, 1), abs=1e-3)
    first_free = detect_crossings(sweeps[0])[0].location
    assert three[0].location > first_free


@pytest.mark.parametrize("U, order", [(2, 0), (52, 1)])
def test_crossings_non_resonant_are_two_level(sweeps, U, order):
    reports = [r for r in detect_crossings(sweeps[U]) if r.kind != "none"]
    assert reports
    assert all(r.kind == "two-level" for r in reports)
    zeros = [bessel_zero(order, k) for k in (1, 2) if bessel_zero(order, k) < 6]
    assert [r.location for r in reports] == pytest.approx(zeros, abs=1e-3)
    assert all(r.levels_involved == {0, 2} for r in reports)
    # the avoiding level sits u = 2 away
    E = quasienergies(sweeps[U].params_at(reports[0].location))
    assert E[2] - E[1] == pytest.approx(2, abs=1e-6)


def test_crossings_need_three_points(sweeps):
    s = sweeps[0]
    short = type(s)(s.interaction, s.omega, s.gamma, s.axis[:2], s.analytic[:2], s.numeric[:2])
    with pytest.raises(ValueError):
        detect_crossings(short)


@pytest.mark.parametrize("U", [0, 50])
def test_tunneling_time_matches_closed_form_without_reduced_interaction(fig2_params, U):
    p = fig2_params[U]
    k = math.sqrt(8) * math.sqrt(2) * p.gamma * abs(bessel_j(p.n, p.ratio))
    res = tunneling_time(p)
    assert res.status == "transfer"
    assert res.time == pytest.approx(2 * math.pi / k, rel=0.05)


def test_tunneling_time_no_tunneling_at_zero():
    res = tunneling_time(ModelParams.from_ratio(X1, 50, 0.5, 0))
    assert res.status == "no-tunneling"
    assert math.isinf(res.time)


def test_tunneling_estimate_values(fig2_params):
    # frozen from the quadrature oracle
    assert tunneling_estimate(fig2_params[0]) == pytest.approx(14.0318090, abs=1e-6)
    assert tunneling_estimate(fig2_params[50]) == pytest.approx(5.4472993, abs=1e-6)
    assert tunneling_estimate(fig2_params[52]) == pytest.approx(18.8904630, abs=1e-6)


def test_tunneling_time_threshold_range(fig2_params):
    with pytest.raises(ValueError):
        tunneling_time(fig2_params[0], threshold=0.4)


def test_cdt_first_kind():
    assert cdt_check(ModelParams.from_ratio(2.405, 50, 0.5, 0), [1, 0, 0], 200).is_cdt


def test_cdt_resonant_crossing_versus_free():
    # the slow leak beyond leading order stays below tolerance for t <= 100
    assert cdt_check(ModelParams.from_ratio(3.832, 50, 0.5, 50), [1, 0, 0], 100).is_cdt
    free = cdt_check(ModelParams.from_ratio(3.832, 50, 0.5, 0), [1, 0, 0], 100)
    assert not free.is_cdt
    assert free.max_excursion > 0.5


def test_cdt_third_kind_noon():
    p = ModelParams(100, 50, 0.5, 2)
    assert cdt_check(p, NOON.to_array(), 200).is_cdt
    P = population_series(p, NOON, 200, 0.5).populations
    assert np.abs(P[:, 0] - 0.5).max() <= 0.02
    assert P[:, 1].max() <= 0.02


@pytest.mark.parametrize("ratio", [0.5, 1.5, 2.0, 3.0, 4.5])
@pytest.mark.parametrize("U", [0, 2, 200, 202])
def test_cdt_third_kind_any_parameters(ratio, U):
    p = ModelParams.from_ratio(ratio, 200.0, 0.5, U)
    for mode in floquet_modes(p)[0]:
        assert cdt_check(p, mode.vector.astype(complex), horizon=15, sample_dt=0.1).is_cdt


def test_population_series_engines(fig2_params):
    p = fig2_params[2]
    a, n, dev = population_series(p, PAIR_RIGHT, 150, 0.5, "both")
    assert dev <= 0.05
    assert n.populations[:, 1].max() < 0.05  # pair tunnelling
    reaches_noon = np.abs(a.populations[:, 0] - 0.5) < 0.01
    assert reaches_noon.any()
    with pytest.raises(ValueError):
        population_series(p, PAIR_RIGHT, 10, 0.5, "fast")


def test_resonance_speeds_up_transfer(fig2_params):
    free = population_series(fig2_params[0], PAIR_RIGHT, 20, 0.05)
    resonant = population_series(fig2_params[50], PAIR_RIGHT, 20, 0.05)

    def first(ts):
        return ts.times[np.argmax(ts.populations[:, 2] > 0.9)]

    assert first(resonant) < first(free)


@pytest.mark.parametrize("kind", ["a", "b"])
def test_switch_engines_agree(kind):
    base = ModelParams(100, 50, 0.5, 2)
    _, _, dev = run_switch(switch_protocol(kind), base, PAIR_RIGHT, 200, 0.5, "both")
    assert dev <= 0.05


def test_switch_single_segment_equals_integrate():
    base = ModelParams(100, 50, 0.5, 2)
    single = run_switch(DrivingSchedule.constant(100), base, PAIR_RIGHT, 30, 0.5)
    plain = population_series(base, PAIR_RIGHT, 30, 0.5)
    assert np.array_equal(single.populations, plain.populations)
    a_single = run_switch(DrivingSchedule.constant(100), base, PAIR_RIGHT, 30, 0.5, "analytic")
    a_plain = population_series(base, PAIR_RIGHT, 30, 0.5, "analytic")
    assert a_single.populations == pytest.approx(a_plain.populations, abs=1e-12)


def test_worker_count(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert worker_count() == 3
    monkeypatch.setenv(THREADS_ENV, "0")
    assert worker_count() >= 1
