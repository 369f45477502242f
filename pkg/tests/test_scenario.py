"""Weather ingestion, simulation driver, and summaries."""

import logging

import numpy as np
import pytest

import airnet as an
from airnet.scenario import (
    TimestepRecord,
    WeatherRecord,
    boundary_from_record,
    serialize_weather,
    write_timestep_csv,
)

TWO_ROWS = """timestamp,wind_speed_m_s,wind_dir_deg,temp_out_c
2024-01-01T00:00:00,3.2,105.0,23.4
2024-01-01T00:30:00,2.8,110.0,23.1
"""


def constant_weather(count, wind=5.0, direction=0.0, temp=9.29):
    return [
        WeatherRecord(f"2024-01-01T{h:02d}:00:00", wind, direction, temp)
        for h in range(count)
    ]


# ---------------------------------------------------------------------------
# parsing


def test_parse_two_rows():
    records = an.parse_weather(TWO_ROWS)
    assert len(records) == 2
    assert records[0].wind_speed == 3.2
    assert records[1].temp_out_c == 23.1


def test_parse_rejects_negative_wind_with_line_number():
    bad = TWO_ROWS + "2024-01-01T01:00:00,-1.0,90.0,22.0\n"
    with pytest.raises(an.WeatherFormatError) as err:
        an.parse_weather(bad)
    assert "line 4" in str(err.value)


def test_parse_rejects_non_monotone_timestamps():
    bad = TWO_ROWS + "2024-01-01T00:30:00,1.0,90.0,22.0\n"
    with pytest.raises(an.WeatherFormatError) as err:
        an.parse_weather(bad)
    assert "not after" in str(err.value)


def test_parse_rejects_bad_header_and_empty_file():
    with pytest.raises(an.WeatherFormatError):
        an.parse_weather("time,speed\n1,2\n")
    with pytest.raises(an.WeatherFormatError):
        an.parse_weather("")
    with pytest.raises(an.WeatherFormatError):
        an.parse_weather("timestamp,wind_speed_m_s,wind_dir_deg,temp_out_c\n")


def test_parse_warns_on_non_uniform_step(caplog):
    text = TWO_ROWS + "2024-01-01T02:00:00,1.0,90.0,22.0\n"
    with caplog.at_level(logging.WARNING, logger="airnet"):
        records = an.parse_weather(text)
    assert len(records) == 3
    assert any("non-uniform" in message for message in caplog.messages)


def test_parse_round_trips_generated_series():
    records = an.generate_weather(days=1, step_minutes=30, seed=3)
    assert an.parse_weather(serialize_weather(records)) == records


def test_generate_weather_is_deterministic_and_sized():
    a = an.generate_weather(days=10, step_minutes=30, seed=42)
    b = an.generate_weather(days=10, step_minutes=30, seed=42)
    c = an.generate_weather(days=10, step_minutes=30, seed=43)
    assert len(a) == 480
    assert a == b
    assert a != c
    assert all(rec.wind_speed >= 0 for rec in a)


def test_boundary_from_record_converts_celsius():
    bc = boundary_from_record(WeatherRecord("2024-01-01T00:00:00", 2.0, 90.0, 20.0))
    assert bc.outdoor_temp_k == pytest.approx(293.15)


# ---------------------------------------------------------------------------
# simulation driver


def test_constant_weather_warm_start_short_circuits():
    net = an.load_network(an.bundled_example_path("two_crack"))
    weather = constant_weather(5)
    records = an.run_simulation(net, weather, "PNR", an.SolverConfig(), warm_start=True)
    assert len(records) == 5
    assert records[0].newton_iters + records[0].picard_iters > 0
    for rec in records[1:]:
        assert rec.newton_iters <= 1
        assert rec.converged_in_picard
        assert rec.picard_iters == 0  # already within tolerance on entry


def test_constant_weather_cold_start_repeats_first_step():
    net = an.load_network(an.bundled_example_path("two_crack"))
    weather = constant_weather(4)
    records = an.run_simulation(net, weather, "NR", an.SolverConfig(), warm_start=False)
    first = records[0]
    for rec in records[1:]:
        assert rec.newton_iters == first.newton_iters
        assert rec.pressures == first.pressures


def test_run_simulation_is_deterministic():
    net = an.load_network(an.bundled_example_path("dwelling5"))
    weather = an.generate_weather(days=1, step_minutes=30, seed=9)
    one = an.run_simulation(net, weather, "PWM", an.SolverConfig())
    two = an.run_simulation(net, weather, "PWM", an.SolverConfig())
    assert one == two


def test_warm_start_changes_counts_not_pressures():
    net = an.load_network(an.bundled_example_path("threestorey"))
    weather = an.generate_weather(days=1, step_minutes=180, seed=5)
    cfg = an.SolverConfig(tolerance=1e-9, max_newton_iters=3000)
    warm = an.run_simulation(net, weather, "WM", cfg, warm_start=True)
    cold = an.run_simulation(net, weather, "WM", cfg, warm_start=False)
    for w, c in zip(warm, cold):
        assert np.max(np.abs(np.array(w.pressures) - np.array(c.pressures))) < 1e-6


def test_failures_are_recorded_and_run_continues():
    net = an.load_network(an.bundled_example_path("dwelling5"))
    weather = an.generate_weather(days=1, step_minutes=120, seed=2)
    records = an.run_simulation(net, weather, "NR", an.SolverConfig(max_newton_iters=3))
    assert len(records) == len(weather)
    assert all(rec.failed == "non-convergence" for rec in records)
    assert all(rec.newton_iters == 3 for rec in records)


def test_empty_weather_rejected():
    net = an.load_network(an.bundled_example_path("two_crack"))
    with pytest.raises(ValueError):
        an.run_simulation(net, [], "NR", an.SolverConfig())


def test_converged_records_pass_residual_recheck():
    net = an.load_network(an.bundled_example_path("dwelling5"))
    weather = an.generate_weather(days=1, step_minutes=60, seed=4)
    records = an.run_simulation(net, weather, "PWM", an.SolverConfig())
    for rec, wrec in zip(records, weather):
        if rec.failed is None:
            bc = boundary_from_record(wrec)
            fresh = np.max(np.abs(an.residual(net, np.array(rec.pressures), bc)))
            assert fresh <= 1e-3


# ---------------------------------------------------------------------------
# summaries


def make_record(newton, picard=0, in_picard=False, failed=None, strategy="PNR"):
    return TimestepRecord(
        timestamp="2024-01-01T00:00:00",
        strategy=strategy,
        picard_iters=picard,
        newton_iters=newton,
        converged_in_picard=in_picard,
        picard_aborted=None,
        max_residual=1e-4,
        pressures=(0.0,),
        failed=failed,
    )


def test_summarize_single_record():
    summary = an.summarize([make_record(7)])["PNR"]
    assert summary.mean_newton_iters == 7
    assert summary.median_newton_iters == 7
    assert summary.max_newton_iters == 7
    assert summary.failures == 0


def test_summarize_picard_percentages_and_mean():
    records = [
        make_record(0, picard=3, in_picard=True),
        make_record(0, picard=2, in_picard=True),
        make_record(4, picard=10, in_picard=False),
    ]
    summary = an.summarize(records)["PNR"]
    assert summary.pct_converged_in_picard == pytest.approx(66.7)
    assert summary.mean_newton_iters == pytest.approx(1.33)
    # budget charged only on the step where the initializer ran and missed
    assert summary.mean_iters_with_picard_cost == pytest.approx((0 + 0 + 14) / 3, abs=0.01)


def test_summarize_counts_failures_separately():
    records = [make_record(5), make_record(500, failed="non-convergence")]
    summary = an.summarize(records)["PNR"]
    assert summary.failures == 1
    assert summary.steps == 2
    assert summary.mean_newton_iters == 5


def test_summarize_groups_strategies():
    records = [make_record(3, strategy="NR"), make_record(1, strategy="WM")]
    summaries = an.summarize(records)
    assert set(summaries) == {"NR", "WM"}


def test_summarize_rejects_empty():
    with pytest.raises(ValueError):
        an.summarize([])


def test_timestep_csv_shape():
    net = an.load_network(an.bundled_example_path("two_crack"))
    weather = constant_weather(2)
    records = an.run_simulation(net, weather, "WM", an.SolverConfig())
    text = write_timestep_csv(records, net)
    lines = text.strip().split("\n")
    assert lines[0] == (
        "timestamp,strategy,picard_iters,newton_iters,converged_in_picard,"
        "picard_aborted,max_residual_kg_s,p_room"
    )
    assert len(lines) == 3
    assert lines[1].split(",")[1] == "WM"
