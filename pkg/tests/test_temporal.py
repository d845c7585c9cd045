import random
from datetime import date, timedelta
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from cep.errors import OrderingError
from cep.temporal import (
    Calendar,
    RollConvention,
    adjust_date,
    annual_schedule,
    parse_holidays,
    unadjusted_schedule,
    year_fraction,
)

MF = RollConvention.MODIFIED_FOLLOWING
dates = st.dates(min_value=date(1990, 1, 1), max_value=date(2100, 12, 31))


@pytest.mark.parametrize(
    "given_date, expected",
    [
        (date(2022, 12, 29), date(2022, 12, 29)),
        (date(2024, 12, 29), date(2024, 12, 30)),
        (date(2023, 12, 31), date(2023, 12, 29)),
    ],
)
def test_modified_following_examples(given_date, expected):
    assert adjust_date(given_date, MF) == expected


def test_weekday_oracle_agrees_on_worked_examples():
    assert oracles.weekday((2024, 12, 29)) == "Sun"
    assert oracles.weekday((2024, 12, 30)) == "Mon"
    assert oracles.weekday((2023, 12, 31)) == "Sun"
    assert oracles.modified_following((2023, 12, 31)) == (2023, 12, 29)


def test_other_conventions():
    sunday = date(2024, 12, 29)
    assert adjust_date(sunday, RollConvention.FOLLOWING) == date(2024, 12, 30)
    assert adjust_date(sunday, RollConvention.PRECEDING) == date(2024, 12, 27)
    assert adjust_date(sunday, RollConvention.UNADJUSTED) == sunday
    # Following is allowed to cross the month end
    assert adjust_date(date(2023, 12, 31), RollConvention.FOLLOWING) == date(2024, 1, 1)


def test_holidays_are_skipped():
    cal = Calendar(holidays=frozenset({date(2024, 12, 30)}))
    assert adjust_date(date(2024, 12, 29), MF, cal) == date(2024, 12, 31)
    assert not cal.is_business_day(date(2024, 12, 30))


def test_parse_holiday_file():
    text = "# bank holidays\n2024-12-25\n\n2024-12-26  # boxing day\n"
    assert parse_holidays(text) == {date(2024, 12, 25), date(2024, 12, 26)}
    with pytest.raises(ValueError, match="line 1"):
        parse_holidays("25/12/2024\n")


def test_adjust_matches_brute_force_oracle_on_random_dates():
    rng = random.Random(20221229)
    start = date(1990, 1, 1).toordinal()
    end = date(2100, 12, 31).toordinal()
    for _ in range(10_000):
        d = date.fromordinal(rng.randint(start, end))
        expected = oracles.modified_following((d.year, d.month, d.day))
        assert adjust_date(d, MF) == date(*expected)


@given(dates)
def test_adjust_is_idempotent_and_stays_in_month(d):
    once = adjust_date(d, MF)
    assert adjust_date(once, MF) == once
    assert once.month == d.month
    assert once.weekday() < 5


@pytest.mark.parametrize(
    "start, end, expected",
    [
        (date(2022, 12, 29), date(2022, 12, 29), Fraction(0)),
        (date(2022, 12, 29), date(2023, 12, 29), Fraction(365, 360)),
        (date(2022, 12, 29), date(2023, 1, 28), Fraction(30, 360)),
    ],
)
def test_year_fraction_examples(start, end, expected):
    assert year_fraction(start, end) == expected
    assert oracles.days_between((start.year, start.month, start.day), (end.year, end.month, end.day)) == expected * 360


def test_year_fraction_rejects_reversed_dates():
    with pytest.raises(OrderingError):
        year_fraction(date(2023, 1, 1), date(2022, 1, 1))


@given(dates, dates, dates)
def test_year_fraction_is_additive(a, b, c):
    a, b, c = sorted([a, b, c])
    assert year_fraction(a, b) + year_fraction(b, c) == year_fraction(a, c)


def test_forest_coupon_schedule():
    sched = annual_schedule((12, 29), 2022, 2032, MF)
    assert len(sched) == 11
    assert sched[0] == date(2022, 12, 29)
    assert sched[-1] == date(2032, 12, 29)
    expected = [date(*oracles.modified_following((y, 12, 29))) for y in range(2022, 2033)]
    assert sched == expected


def test_single_year_schedule():
    assert annual_schedule((12, 29), 2022, 2022, MF) == [date(2022, 12, 29)]


def test_schedule_rolls_sunday():
    assert date(2024, 12, 30) in annual_schedule((12, 29), 2023, 2025, MF)


def test_schedule_rejects_reversed_years():
    with pytest.raises(OrderingError):
        annual_schedule((12, 29), 2025, 2024, MF)


@given(st.integers(1990, 2090), st.integers(0, 10), st.integers(1, 12), st.integers(1, 28))
def test_schedule_strictly_increasing_with_yearly_anchors(first, extra, month, day):
    sched = annual_schedule((month, day), first, first + extra, MF)
    assert len(sched) == extra + 1
    assert all(a < b for a, b in zip(sched, sched[1:]))
    anchors = unadjusted_schedule((month, day), first, first + extra)
    assert all(b.year - a.year == 1 and (a.month, a.day) == (b.month, b.day) for a, b in zip(anchors, anchors[1:]))


def test_leap_day_anchor_falls_back_in_common_years():
    assert unadjusted_schedule((2, 29), 2023, 2024) == [date(2023, 2, 28), date(2024, 2, 29)]
