"""Independent reference computations used by the tests.

Nothing here touches ``datetime`` or the package's own arithmetic: dates are
(y, m, d) tuples stepped one day at a time with a hand-written month table.
"""

from fractions import Fraction

ANCHOR = (1990, 1, 1)  # a Monday
WEEKDAYS = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"]


def is_leap(y):
    return y % 4 == 0 and (y % 100 != 0 or y % 400 == 0)


def month_length(y, m):
    if m == 2:
        return 29 if is_leap(y) else 28
    return 30 if m in (4, 6, 9, 11) else 31


def next_day(ymd):
    y, m, d = ymd
    if d < month_length(y, m):
        return (y, m, d + 1)
    if m < 12:
        return (y, m + 1, 1)
    return (y + 1, 1, 1)


def prev_day(ymd):
    y, m, d = ymd
    if d > 1:
        return (y, m, d - 1)
    if m > 1:
        return (y, m - 1, month_length(y, m - 1))
    return (y - 1, 12, 31)


def days_between(a, b):
    """Count single-day steps from a to b (a <= b)."""
    n = 0
    while a != b:
        a = next_day(a)
        n += 1
    return n


def days_from_anchor(ymd):
    """Days from ANCHOR, counted by whole years, whole months, then days."""
    y, m, d = ymd
    n = 0
    if y >= ANCHOR[0]:
        for yy in range(ANCHOR[0], y):
            n += 366 if is_leap(yy) else 365
    else:
        for yy in range(y, ANCHOR[0]):
            n -= 366 if is_leap(yy) else 365
    for mm in range(1, m):
        n += month_length(y, mm)
    return n + d - 1


def weekday(ymd):
    return WEEKDAYS[days_from_anchor(ymd) % 7]


def is_business(ymd):
    return weekday(ymd) not in ("Sat", "Sun")


def modified_following(ymd):
    f = ymd
    while not is_business(f):
        f = next_day(f)
    if f[1] == ymd[1]:
        return f
    p = ymd
    while not is_business(p):
        p = prev_day(p)
    return p


def reverse_amortization_total(per_unit_terminal, units, n_years):
    """Loop sum of a ramp from zero in year 1 to the terminal amount in year n."""
    total = Fraction(0)
    for k in range(1, n_years + 1):
        if n_years == 1:
            total += Fraction(per_unit_terminal) * Fraction(units)
        else:
            total += Fraction(per_unit_terminal) * Fraction(units) * Fraction(k - 1, n_years - 1)
    return total


def exp_series(x, terms=60):
    """exp(x) by Taylor series in exact rationals."""
    x = Fraction(x)
    term = Fraction(1)
    total = Fraction(1)
    for n in range(1, terms):
        term = term * x / n
        total += term
    return total
