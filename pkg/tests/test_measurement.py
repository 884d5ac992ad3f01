import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import FROZEN, sample_std
from pedsim.engine import RunResult
from pedsim.errors import (
    ContractViolation,
    DegenerateFitError,
    IncompleteRunError,
    InputError,
    UndefinedFluxError,
)
from pedsim.measurement import (
    FlowRecord,
    aggregate,
    flow_record,
    flux,
    linear_fit,
    scale_total_time,
    specific_flux,
    specific_flux_minimum,
    total_time,
)

TOL = 1e-6


def result(times, n=None, completed=True, width=1.0):
    n = len(times) if n is None else n
    return RunResult("P0", width, 1, n, tuple(times), completed)


def record(pset, width, rep, t, n=100):
    j = flux(n, t)
    return FlowRecord(pset, width, rep, rep + 1, n, t, j, specific_flux(j, width))


def test_total_time_examples():
    assert total_time(result([3.2])) == 3.2
    assert total_time(result([1.0, 2.0, 55.0])) == 55.0
    with pytest.raises(IncompleteRunError):
        total_time(result([1.0], n=3, completed=False))


def test_flux_examples():
    assert flux(100, 55) == pytest.approx(FROZEN["flux_99_55"], abs=TOL)
    assert flux(2, 1) == 1.0
    with pytest.raises(UndefinedFluxError):
        flux(1, 10.0)


def test_flux_alternative_definition():
    assert flux(100, 50, "n_over_t") == 2.0
    with pytest.raises(InputError):
        flux(100, 50, "other")


def test_specific_flux_examples():
    assert specific_flux(1.8, 0.9) == pytest.approx(FROZEN["specific_1_8_0_9"], abs=TOL)
    assert specific_flux(1.8, 1.0) == 1.8
    with pytest.raises(InputError):
        specific_flux(1.8, 0.0)


def test_scale_total_time_examples():
    assert scale_total_time(55.0, 100) == 55.0
    assert scale_total_time(60.0, 80) == pytest.approx(FROZEN["scaled_80_60"], abs=TOL)
    assert scale_total_time(10.0, 2) == pytest.approx(FROZEN["scaled_2_10"], abs=TOL)
    with pytest.raises(InputError):
        scale_total_time(10.0, 1)


@given(st.floats(1e-6, 1e6))
def test_scaling_is_identity_at_reference_crowd(t):
    assert scale_total_time(t, 100) == t


@given(st.integers(2, 10_000), st.floats(1e-3, 1e4), st.floats(0.05, 5))
def test_flux_composition(n, t, w):
    assert specific_flux(flux(n, t), w) * w * t == pytest.approx(n - 1, rel=1e-9)


def test_flow_record_from_run():
    rec = flow_record(result([1.0] * 99 + [55.0], width=0.9), 3)
    assert rec.total_time == 55.0
    assert rec.flux == pytest.approx(1.8)
    assert rec.specific_flux == pytest.approx(2.0)
    assert rec.replication == 3 and rec.parameter_set == "P0"


def test_jammed_run_becomes_sentinel():
    rec = flow_record(result([1.0], n=100, completed=False), 0)
    assert not rec.completed
    assert math.isnan(rec.total_time) and math.isnan(rec.flux)


def test_record_enforces_specific_flux():
    with pytest.raises(ContractViolation):
        FlowRecord("P0", 0.5, 0, 1, 100, 50.0, 1.98, 1.98)
    with pytest.raises(ContractViolation):
        FlowRecord("P0", 0.5, 0, 1, 100, 0.0, 1.0, 2.0)


def test_aggregate_single_record():
    (row,) = aggregate([record("P0", 1.0, 0, 40.0)])
    assert row.mean_total_time == 40.0 and row.std_total_time == 0.0 and row.n_reps == 1


def test_aggregate_sample_std():
    (row,) = aggregate([record("P0", 1.0, 0, 1.0), record("P0", 1.0, 1, 3.0)])
    assert row.mean_total_time == 2.0
    assert row.std_total_time == pytest.approx(FROZEN["std_1_3"], abs=TOL)


def test_aggregate_groups_in_order():
    rows = aggregate(
        [record("P1", 0.5, 0, 80.0), record("P0", 1.0, 0, 40.0), record("P0", 0.5, 0, 90.0)]
    )
    assert [(r.parameter_set, r.width) for r in rows] == [("P0", 0.5), ("P0", 1.0), ("P1", 0.5)]


def test_aggregate_skips_jammed_runs():
    jam = flow_record(result([1.0], n=100, completed=False, width=0.5), 1)
    (row,) = aggregate([record("P0", 0.5, 0, 90.0), jam])
    assert row.n_reps == 1


@given(st.lists(st.floats(1.0, 1000.0), min_size=1, max_size=30))
def test_aggregate_matches_two_pass_oracle(times):
    (row,) = aggregate([record("P4", 0.7, k, t) for k, t in enumerate(times)])
    assert row.mean_total_time == pytest.approx(math.fsum(times) / len(times), abs=1e-12, rel=1e-15)
    assert row.std_total_time == pytest.approx(float(sample_std(times)), abs=1e-12, rel=1e-12)
    fluxes = [99 / t for t in times]
    assert row.std_flux == pytest.approx(float(sample_std(fluxes)), abs=1e-12, rel=1e-12)
    assert row.std_total_time >= 0.0


def test_linear_fit_examples():
    slope, intercept, r2 = linear_fit([(0.4, 0.8), (0.6, 1.2), (0.8, 1.6)])
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert intercept == pytest.approx(0.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    assert linear_fit([(0.5, 1.0), (1.0, 3.0)])[2] == pytest.approx(1.0)
    with pytest.raises(DegenerateFitError):
        linear_fit([(0.5, 1.0), (0.5, 2.0)])


def test_linear_fit_flat_line():
    assert linear_fit([(0.4, 1.0), (0.8, 1.0)]) == (0.0, 1.0, 1.0)


@given(
    st.floats(-10, 10),
    st.floats(-10, 10),
    st.lists(st.integers(-50, 50), min_size=2, max_size=12, unique=True),
)
def test_linear_fit_recovers_constructed_line(slope, intercept, xs):
    xs = [x / 10 for x in xs]
    s, i, r2 = linear_fit([(x, slope * x + intercept) for x in xs])
    assert s == pytest.approx(slope, abs=1e-12 * max(1.0, abs(slope)) * 100)
    assert i == pytest.approx(intercept, abs=1e-12 * max(1.0, abs(intercept)) * 100)
    assert 0.0 <= r2 <= 1.0


@given(st.lists(st.tuples(st.integers(1, 200), st.floats(-100, 100)), min_size=2, max_size=20))
def test_r_squared_in_unit_interval(points):
    points = [(x / 100, y) for x, y in points]
    if len({x for x, _ in points}) < 2:
        return
    assert 0.0 <= linear_fit(points)[2] <= 1.0


def test_minimum_examples():
    series = [(0.4, 1.9), (0.5, 1.7), (0.6, 1.6), (0.7, 1.8), (0.8, 1.9), (1.0, 2.0)]
    assert specific_flux_minimum(series) == 0.6
    assert specific_flux_minimum([(0.4, 1.0), (0.5, 1.1), (0.6, 1.2)]) is None
    with pytest.raises(InputError):
        specific_flux_minimum([(0.4, 1.0), (0.5, 0.9)])


def test_deepest_minimum_wins_ties_to_smaller_width():
    series = [(0.4, 2.0), (0.5, 1.5), (0.6, 2.0), (0.7, 1.5), (0.8, 2.0)]
    assert specific_flux_minimum(series) == 0.5
    series = [(0.4, 2.0), (0.5, 1.5), (0.6, 2.0), (0.7, 1.2), (0.8, 2.0)]
    assert specific_flux_minimum(series) == 0.7
