"""Expansion of linked products into dated money and carbon flows.

Amounts are exact :class:`fractions.Fraction` values; they are only rounded
when written out.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, replace
from datetime import date
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Sequence

from cep.errors import FixingConflictError, FlowError
from cep.temporal import WEEKENDS_ONLY, Calendar, adjust_date, annual_schedule, year_fraction
from cep.termsheet import (
    CarbonLeg,
    CarbonProfile,
    LinkedProduct,
    ProfileKind,
    Role,
    ShorthandCarbon,
    carbon_year_date,
)

XCA = "XCA"


class MoneyKind(enum.Enum):
    NOTIONAL_OUT = "NotionalOut"
    COUPON = "Coupon"
    NOTIONAL_BACK = "NotionalBack"


_MONEY_ORDER = {MoneyKind.NOTIONAL_OUT: 0, MoneyKind.COUPON: 1, MoneyKind.NOTIONAL_BACK: 2}


class FlowStatus(enum.Enum):
    FIXED = "Fixed"
    ESTIMATED = "Estimated"
    FIXED_FROM_FIXING = "Fixed-from-fixing"


@dataclass(frozen=True)
class MoneyFlow:
    strategy_id: str
    date: date
    currency: str
    amount: Fraction
    payer: str
    receiver: str
    kind: MoneyKind


@dataclass(frozen=True)
class CarbonFlow:
    """Signed carbon flow in tCO2e: positive is emission, negative absorption."""

    strategy_id: str
    date: date
    amount: Fraction
    payer: str
    receiver: str
    status: FlowStatus = FlowStatus.FIXED
    source: str = ""

    @property
    def year(self) -> int:
        return self.date.year


def canonical_key(flow: CarbonFlow | MoneyFlow) -> tuple:
    return (flow.date, flow.strategy_id)


# -- money leg --------------------------------------------------------------


def generate_money_flows(p: LinkedProduct, cal: Calendar = WEEKENDS_ONLY) -> list[MoneyFlow]:
    m = p.money_leg
    notional = Fraction(m.notional)
    rate = Fraction(m.fixed_rate)
    sid = p.strategy_id
    flows = [
        MoneyFlow(sid, adjust_date(m.effective_date, m.roll, cal), m.currency, notional,
                  m.payer, m.receiver, MoneyKind.NOTIONAL_OUT),
        MoneyFlow(sid, adjust_date(m.maturity_date, m.roll, cal), m.currency, notional,
                  m.receiver, m.payer, MoneyKind.NOTIONAL_BACK),
    ]
    if rate:
        anchors = m.coupon_anchors()
        paid = annual_schedule((m.coupon_month, m.coupon_day), m.first_coupon_year,
                               m.last_coupon_year, m.roll, cal)
        # adjusted payment, unadjusted accrual; first period accrues from the effective date
        start = m.effective_date
        for anchor, pay in zip(anchors, paid):
            amount = notional * rate * year_fraction(start, anchor, m.daycount)
            if amount:
                flows.append(MoneyFlow(sid, pay, m.currency, amount, m.receiver, m.payer, MoneyKind.COUPON))
            start = anchor
    flows.sort(key=lambda f: (f.date, _MONEY_ORDER[f.kind]))
    return flows


# -- carbon leg -------------------------------------------------------------


def profile_amounts(profile: CarbonProfile, unit_quantity: Fraction) -> list[tuple[int, Fraction]]:
    """(profile year, signed tCO2e) for every year the profile spans."""
    per_unit = Fraction(profile.amount_per_unit) * profile.sign.factor
    total = per_unit * unit_quantity
    if profile.kind is ProfileKind.REVERSE_AMORTIZING:
        span = profile.end_year - profile.start_year
        if span == 0:
            return [(profile.start_year, total)]
        return [(k, total * (k - profile.start_year) / span) for k in profile.years]
    if profile.kind is ProfileKind.SINGLE:
        return [(profile.start_year, total)]
    return [(k, total) for k in profile.years]


def generate_carbon_flows(p: LinkedProduct, cal: Calendar = WEEKENDS_ONLY) -> list[CarbonFlow]:
    leg = p.carbon
    if not isinstance(leg, CarbonLeg):
        raise FlowError(f"{p.strategy_id}: no carbon leg (shorthand or missing carbon representation)")
    status = FlowStatus.ESTIMATED if leg.floating else FlowStatus.FIXED
    quantity = Fraction(leg.unit_quantity)
    keyed = []
    for idx, profile in enumerate(leg.profiles):
        source = f"{idx}:{profile.kind.value}"
        for year, amount in profile_amounts(profile, quantity):
            when = adjust_date(carbon_year_date(p, year), p.money_leg.roll, cal)
            keyed.append(((when, idx, year), CarbonFlow(p.strategy_id, when, amount, leg.payer,
                                                        leg.receiver, status, source)))
    keyed.sort(key=lambda kv: kv[0])
    return [f for _, f in keyed]


def shorthand_flow(p: LinkedProduct) -> CarbonFlow:
    """The single summary flow of a shorthand product, issuer to funder."""
    c = p.carbon
    if not isinstance(c, ShorthandCarbon):
        raise FlowError(f"{p.strategy_id}: not a shorthand product")
    issuer = p.party_with_role(Role.ISSUER)
    funder = p.party_with_role(Role.FUNDER)
    payer = issuer.id if issuer else p.money_leg.receiver
    receiver = funder.id if funder else p.money_leg.payer
    return CarbonFlow(p.strategy_id, c.as_of, Fraction(c.amount_tco2e), payer, receiver,
                      FlowStatus.FIXED, "shorthand")


def product_carbon_flows(p: LinkedProduct, cal: Calendar = WEEKENDS_ONLY) -> list[CarbonFlow]:
    if isinstance(p.carbon, ShorthandCarbon):
        return [shorthand_flow(p)]
    return generate_carbon_flows(p, cal)


# -- floating fixings -------------------------------------------------------


FixingTable = dict[tuple[str, int], Fraction]


def apply_fixings(flows: Sequence[CarbonFlow], fixings: FixingTable) -> list[CarbonFlow]:
    """Replace estimated amounts with observations keyed by (strategy_id, calendar year).

    Order, dates and parties are untouched. A fixing that lands on a fixed
    flow, or on more than one estimated flow, is a conflict.
    """
    out = list(flows)
    for (sid, year), observed in fixings.items():
        hits = [i for i, f in enumerate(out) if f.strategy_id == sid and f.year == year]
        if not hits:
            continue
        estimated = [i for i in hits if out[i].status is FlowStatus.ESTIMATED]
        if not estimated:
            already = [i for i in hits if out[i].status is FlowStatus.FIXED_FROM_FIXING]
            if already and all(out[i].amount == observed for i in already):
                continue
            raise FixingConflictError(f"fixing {sid}/{year} targets a flow that is not floating")
        if len(estimated) > 1:
            raise FixingConflictError(
                f"fixing {sid}/{year} is ambiguous: {len(estimated)} estimated flows in that year"
            )
        i = estimated[0]
        out[i] = replace(out[i], amount=Fraction(observed), status=FlowStatus.FIXED_FROM_FIXING)
    return out


def parse_fixings(text: str) -> FixingTable:
    table: FixingTable = {}
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [h.strip() for h in reader.fieldnames] != ["strategy_id", "year", "observed_tco2e"]:
        raise FlowError("fixing file header must be strategy_id,year,observed_tco2e")
    for n, row in enumerate(reader, 2):
        try:
            key = (row["strategy_id"].strip(), int(row["year"]))
            value = Fraction(Decimal(row["observed_tco2e"].strip()))
        except (ValueError, ArithmeticError, AttributeError):
            raise FlowError(f"fixing file line {n}: malformed row") from None
        if key in table:
            raise FlowError(f"fixing file line {n}: duplicate fixing for {key[0]}/{key[1]}")
        table[key] = value
    return table


def format_fixings(table: FixingTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy_id", "year", "observed_tco2e"])
    for (sid, year) in sorted(table):
        w.writerow([sid, year, format_amount(table[(sid, year)])])
    return buf.getvalue()


# -- shorthand attribution --------------------------------------------------


def attribute_shorthand(
    company_annual_emissions: Iterable[tuple[int, Decimal | Fraction | int]],
    fraction: Decimal | Fraction | int,
) -> list[ShorthandCarbon]:
    """A company's yearly emissions scaled by the holder's share, one summary flow per year.

    Flows are dated 31 December of each year.
    """
    share = Fraction(fraction)
    if not 0 <= share <= 1:
        raise ValueError(f"attribution fraction {fraction} outside [0, 1]")
    out = []
    for year, emissions in company_annual_emissions:
        amount = Fraction(emissions) * share
        out.append(ShorthandCarbon(_to_decimal(amount), date(year, 12, 31)))
    return out


def financing_fraction(project_financing, total_financing) -> Fraction:
    """Pro-rata share of a bond's proceeds going to the project."""
    total = Fraction(total_financing)
    if total <= 0:
        raise ValueError("total financing must be positive")
    share = Fraction(project_financing) / total
    if not 0 <= share <= 1:
        raise ValueError("project financing must lie within the total")
    return share


def _to_decimal(x: Fraction) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 50
        return Decimal(x.numerator) / Decimal(x.denominator)


# -- output -----------------------------------------------------------------


def format_amount(x: Fraction, places: int = 6) -> str:
    """Fixed-point rendering rounded half-even to ``places`` decimals, trailing zeros dropped."""
    with localcontext() as ctx:
        ctx.prec = 80
        d = (Decimal(x.numerator) / Decimal(x.denominator)).quantize(Decimal(10) ** -places)
        return "0" if d == 0 else format(d.normalize(), "f")


FLOW_HEADER = ["strategy_id", "date", "leg", "kind", "currency_or_xca", "amount", "payer", "receiver", "status"]


def flow_rows(money: Iterable[MoneyFlow], carbon: Iterable[CarbonFlow]) -> list[list[str]]:
    rows = []
    for f in money:
        rows.append([f.strategy_id, f.date.isoformat(), "money", f.kind.value, f.currency,
                     format_amount(f.amount, 2), f.payer, f.receiver, FlowStatus.FIXED.value])
    for f in carbon:
        rows.append([f.strategy_id, f.date.isoformat(), "carbon", f.source or "-", XCA,
                     format_amount(f.amount), f.payer, f.receiver, f.status.value])
    return rows
