import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from suffup import (
    EmptySample,
    MalformedRow,
    NonPositiveTime,
    Observation,
    Status,
    SurvivalSample,
    UnknownStatus,
    load_csv,
    summarize,
    to_csv,
)

from conftest import samples


class TestLoadCsv:
    def test_basic_parse(self):
        s = load_csv("time,status\n1,1\n2,0\n3,1")
        assert s.n == 3
        assert list(s.times) == [1.0, 2.0, 3.0]
        assert int((~s.events).sum()) == 1

    def test_rows_are_sorted(self):
        s = load_csv("time,status\n3,1\n1,1\n2,0\n")
        assert list(s.times) == [1.0, 2.0, 3.0]
        assert list(s.events) == [True, False, True]

    def test_zero_time_rejected(self):
        with pytest.raises(NonPositiveTime):
            load_csv("time,status\n0,1")

    def test_negative_time_rejected(self):
        with pytest.raises(NonPositiveTime):
            load_csv("time,status\n-1.5,0")

    def test_tie_puts_event_first(self):
        s = load_csv("time,status\n2,0\n2,1")
        assert s.observations == (
            Observation(2.0, Status.EVENT),
            Observation(2.0, Status.CENSORED),
        )

    @pytest.mark.parametrize(
        "text, exc",
        [
            ("time,status\n1,2", UnknownStatus),
            ("time,status\n1,-1", UnknownStatus),
            ("time,status\n1,x", MalformedRow),
            ("time,status\nabc,1", MalformedRow),
            ("time,status\n1,1,1", MalformedRow),
            ("time,status\n1", MalformedRow),
            ("time,status\ninf,1", MalformedRow),
            ("t,s\n1,1", MalformedRow),
            ("", MalformedRow),
            ("time,status\n", EmptySample),
            ("time,status\n\n\n", EmptySample),
        ],
    )
    def test_errors(self, text, exc):
        with pytest.raises(exc):
            load_csv(text)

    def test_crlf_bytes_and_bom(self):
        raw = "﻿time,status\r\n1.5,1\r\n2.5,0\r\n".encode("utf-8")
        s = load_csv(io.BytesIO(raw))
        assert list(s.times) == [1.5, 2.5]
        assert s == load_csv(raw)

    def test_blank_lines_skipped(self):
        assert load_csv("time,status\n1,1\n\n2,0\n").n == 2

    def test_errors_are_value_errors(self):
        # callers that only know about ValueError still catch data problems
        with pytest.raises(ValueError):
            load_csv("time,status\n0,1")


class TestSample:
    def test_arrays_are_read_only(self, three_obs):
        with pytest.raises(ValueError):
            three_obs.times[0] = 5.0

    def test_t_max_and_event(self, three_obs):
        assert three_obs.t_max == 3.0
        assert three_obs.t_max_event == 3.0
        assert SurvivalSample([1.0], [False]).t_max_event is None

    def test_bad_status_array(self):
        with pytest.raises(UnknownStatus):
            SurvivalSample([1.0, 2.0], [0, 3])

    def test_empty(self):
        with pytest.raises(EmptySample):
            SurvivalSample([], [])

    def test_observation_validation(self):
        with pytest.raises(NonPositiveTime):
            Observation(0.0, Status.EVENT)

    def test_from_observations(self, three_obs):
        assert SurvivalSample.from_observations(three_obs.observations) == three_obs


class TestSummarize:
    def test_three_obs(self, three_obs):
        s = summarize(three_obs)
        assert (s.n, s.n_events) == (3, 2)
        assert s.censoring_rate == pytest.approx(1 / 3, abs=0)
        assert (s.t_max, s.t_max_event, s.plateau_censored_count) == (3.0, 3.0, 0)

    def test_all_events(self):
        s = summarize(SurvivalSample([1.0, 2.0], [1, 1]))
        assert s.censoring_rate == 0.0
        assert s.plateau_censored_count == 0

    def test_plateau(self):
        s = summarize(SurvivalSample([1, 2, 3, 4], [1, 1, 0, 0]))
        assert (s.t_max, s.t_max_event, s.plateau_censored_count) == (4.0, 2.0, 2)

    def test_no_events(self):
        s = summarize(SurvivalSample([1.0, 2.0], [0, 0]))
        assert s.t_max_event is None and s.median_event_time is None
        assert s.censoring_rate == 1.0

    @given(samples(), st.randoms())
    def test_permutation_invariant(self, sample, r):
        rows = to_csv(sample).splitlines()
        body = rows[1:]
        r.shuffle(body)
        shuffled = load_csv("\n".join([rows[0]] + body))
        assert summarize(shuffled) == summarize(sample)

    @given(samples())
    def test_counts_consistent(self, sample):
        s = summarize(sample)
        assert s.n_events + (s.n - s.n_events) == s.n
        assert 0.0 <= s.censoring_rate <= 1.0
        assert s.censoring_rate == (s.n - s.n_events) / s.n
        if s.t_max_event is not None:
            assert s.t_max_event <= s.t_max


@settings(max_examples=200)
@given(samples(grid=4) | samples())
def test_csv_round_trip(sample):
    again = load_csv(to_csv(sample))
    assert again == sample
    assert np.array_equal(again.times, sample.times)
