"""Scenario carbon prices and monetization of carbon flows.

Curves are user-supplied (year, price per tCO2e) points, interpolated
linearly and held flat beyond both ends. Costs are not discounted.
"""

from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable

from cep.errors import CurveError
from cep.flowgen import CarbonFlow, canonical_key, format_amount
from cep.termsheet import format_decimal


@dataclass(frozen=True)
class CarbonPriceCurve:
    scenario_name: str
    points: tuple[tuple[int, Decimal], ...]
    currency: str = "USD"

    def __post_init__(self):
        if not self.points:
            raise CurveError("price curve needs at least one point")
        years = [y for y, _ in self.points]
        if any(b <= a for a, b in zip(years, years[1:])):
            raise CurveError("price curve years must be strictly increasing")
        if any(p < 0 for _, p in self.points):
            raise CurveError("price curve has a negative price")

    @property
    def years(self) -> list[int]:
        return [y for y, _ in self.points]


def price_at(curve: CarbonPriceCurve, year: int) -> Fraction:
    pts = curve.points
    years = curve.years
    if year <= years[0]:
        return Fraction(pts[0][1])
    if year >= years[-1]:
        return Fraction(pts[-1][1])
    i = bisect.bisect_right(years, year)
    (y0, p0), (y1, p1) = pts[i - 1], pts[i]
    p0, p1 = Fraction(p0), Fraction(p1)
    return p0 + (p1 - p0) * Fraction(year - y0, y1 - y0)


def load_curve(text: str) -> CarbonPriceCurve:
    """Read ``year,price`` CSV with optional ``# scenario:`` / ``# currency:`` headers."""
    scenario, currency = "", "USD"
    body = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            key, _, value = stripped[1:].partition(":")
            key = key.strip().lower()
            if key == "scenario":
                scenario = value.strip()
            elif key == "currency":
                currency = value.strip()
            continue
        if stripped:
            body.append(stripped)
    if not body:
        raise CurveError("curve file is empty")
    reader = csv.reader(body)
    header = [h.strip() for h in next(reader)]
    if header != ["year", "price"]:
        raise CurveError("curve file header must be year,price")
    points = []
    for row in reader:
        if len(row) != 2:
            raise CurveError(f"malformed curve row {row!r}")
        try:
            points.append((int(row[0]), Decimal(row[1].strip())))
        except (ValueError, InvalidOperation):
            raise CurveError(f"malformed curve row {row!r}") from None
    seen = [y for y, _ in points]
    if len(set(seen)) != len(seen):
        raise CurveError("curve file has a duplicate year")
    return CarbonPriceCurve(scenario, tuple(points), currency)


def dump_curve(curve: CarbonPriceCurve) -> str:
    lines = [f"# scenario: {curve.scenario_name}", f"# currency: {curve.currency}", "year,price"]
    lines += [f"{y},{format_decimal(p)}" for y, p in curve.points]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PricedLine:
    strategy_id: str
    date: object
    tco2e: Fraction
    price: Fraction
    cost: Fraction


@dataclass(frozen=True)
class MonetizedReport:
    scenario_name: str
    currency: str
    lines: tuple[PricedLine, ...]

    @property
    def total(self) -> Fraction:
        return sum((ln.cost for ln in self.lines), Fraction(0))

    def product_totals(self) -> dict[str, Fraction]:
        out: dict[str, Fraction] = {}
        for ln in self.lines:
            out[ln.strategy_id] = out.get(ln.strategy_id, Fraction(0)) + ln.cost
        return {k: out[k] for k in sorted(out)}


def monetize(flows: Iterable[CarbonFlow], curve: CarbonPriceCurve) -> MonetizedReport:
    lines = []
    for f in sorted(flows, key=canonical_key):
        price = price_at(curve, f.date.year)
        lines.append(PricedLine(f.strategy_id, f.date, f.amount, price, f.amount * price))
    return MonetizedReport(curve.scenario_name, curve.currency, tuple(lines))


REPORT_HEADER = ["strategy_id", "date", "tco2e", "price", "cost", "currency"]


def report_rows(report: MonetizedReport) -> list[list[str]]:
    rows = [
        [ln.strategy_id, ln.date.isoformat(), format_amount(ln.tco2e), format_amount(ln.price),
         format_amount(ln.cost, 2), report.currency]
        for ln in report.lines
    ]
    for sid, cost in report.product_totals().items():
        rows.append([sid, "TOTAL", "", "", format_amount(cost, 2), report.currency])
    rows.append(["PORTFOLIO", "TOTAL", "", "", format_amount(report.total, 2), report.currency])
    return rows
