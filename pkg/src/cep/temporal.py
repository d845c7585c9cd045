"""Calendar arithmetic: business-day rolling, Act/360 accrual and annual schedules.

Dates are plain :class:`datetime.date` values (whole civil days).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import date, timedelta
from fractions import Fraction
from typing import Iterable

from cep.errors import OrderingError

CivilDate = date

SATURDAY, SUNDAY = 5, 6
_ONE_DAY = timedelta(days=1)


@dataclass(frozen=True)
class Calendar:
    """Weekend days (``date.weekday()`` numbers) plus an explicit holiday set."""

    weekend_days: frozenset[int] = frozenset({SATURDAY, SUNDAY})
    holidays: frozenset[date] = field(default_factory=frozenset)

    def is_business_day(self, d: date) -> bool:
        return d.weekday() not in self.weekend_days and d not in self.holidays

    def with_holidays(self, extra: Iterable[date]) -> Calendar:
        return Calendar(self.weekend_days, self.holidays | frozenset(extra))


WEEKENDS_ONLY = Calendar()


def parse_holidays(text: str) -> frozenset[date]:
    """Parse a holiday file: one ISO date per line, ``#`` starts a comment."""
    days = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            days.add(date.fromisoformat(line))
        except ValueError:
            raise ValueError(f"holiday file line {lineno}: bad date {line!r}") from None
    return frozenset(days)


def load_calendar(path, weekend_days: frozenset[int] = frozenset({SATURDAY, SUNDAY})) -> Calendar:
    with open(path, encoding="utf-8") as fh:
        return Calendar(weekend_days, parse_holidays(fh.read()))


class DayCount(enum.Enum):
    ACT_360 = "Act/360"


class RollConvention(enum.Enum):
    MODIFIED_FOLLOWING = "ModifiedFollowing"
    FOLLOWING = "Following"
    PRECEDING = "Preceding"
    UNADJUSTED = "Unadjusted"


def _roll(d: date, step: timedelta, cal: Calendar) -> date:
    while not cal.is_business_day(d):
        d += step
    return d


def adjust_date(d: date, conv: RollConvention, cal: Calendar = WEEKENDS_ONLY) -> date:
    if conv is RollConvention.UNADJUSTED:
        return d
    if conv is RollConvention.PRECEDING:
        return _roll(d, -_ONE_DAY, cal)
    following = _roll(d, _ONE_DAY, cal)
    if conv is RollConvention.FOLLOWING or following.month == d.month:
        return following
    return _roll(d, -_ONE_DAY, cal)


def year_fraction(start: date, end: date, dc: DayCount = DayCount.ACT_360) -> Fraction:
    """Exact accrual fraction between two dates."""
    if start > end:
        raise OrderingError(f"accrual start {start} is after end {end}")
    if dc is DayCount.ACT_360:
        return Fraction((end - start).days, 360)
    raise NotImplementedError(dc)


def anniversary(d: date, year: int) -> date:
    """``d`` moved to ``year``; 29 Feb falls back to 28 Feb in common years."""
    try:
        return d.replace(year=year)
    except ValueError:
        return d.replace(year=year, day=28)


def annual_schedule(
    anchor_month_day: tuple[int, int],
    first_year: int,
    last_year: int,
    conv: RollConvention = RollConvention.MODIFIED_FOLLOWING,
    cal: Calendar = WEEKENDS_ONLY,
) -> list[date]:
    """One adjusted payment date per year, ``first_year`` through ``last_year`` inclusive."""
    return [adjust_date(d, conv, cal) for d in unadjusted_schedule(anchor_month_day, first_year, last_year)]


def unadjusted_schedule(anchor_month_day: tuple[int, int], first_year: int, last_year: int) -> list[date]:
    if first_year > last_year:
        raise OrderingError(f"schedule first year {first_year} is after last year {last_year}")
    month, day = anchor_month_day
    base = date(2000, month, day)  # leap year, so 29 Feb anchors are accepted
    return [anniversary(base, y) for y in range(first_year, last_year + 1)]
