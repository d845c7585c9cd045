"""Hypothesis strategies for random valid products and flows."""

from datetime import date
from decimal import Decimal
from fractions import Fraction

from hypothesis import strategies as st

from cep.flowgen import CarbonFlow, FlowStatus
from cep.temporal import RollConvention
from cep.termsheet import (
    CarbonLeg,
    CarbonProfile,
    LinkedProduct,
    MoneyLeg,
    Party,
    ProfileKind,
    Role,
    ShorthandCarbon,
    Sign,
)

ids = st.text("ABCDEFGHJKLMNPQRSTUVWXYZ0123456789-", min_size=1, max_size=12).filter(lambda s: s[0] != "-")
decimals = st.decimals(min_value=Decimal("0"), max_value=Decimal("1e9"), places=4, allow_nan=False)
positive = st.decimals(min_value=Decimal("0.0001"), max_value=Decimal("1e9"), places=4, allow_nan=False)


@st.composite
def profiles(draw):
    kind = draw(st.sampled_from(list(ProfileKind)))
    start = draw(st.integers(1, 60))
    end = start if kind is ProfileKind.SINGLE else draw(st.integers(start, start + 60))
    return CarbonProfile(kind, draw(st.sampled_from(list(Sign))), start, end, draw(decimals))


@st.composite
def products(draw):
    eff = draw(st.dates(date(2000, 1, 1), date(2040, 12, 31)))
    years = draw(st.integers(1, 30))
    mat = eff.replace(year=eff.year + years, day=min(eff.day, 28))
    first = draw(st.integers(eff.year + 1, eff.year + 2))
    money = MoneyLeg(
        currency=draw(st.sampled_from(["USD", "EUR", "JPY"])),
        notional=draw(positive),
        effective_date=eff,
        maturity_date=mat,
        fixed_rate=draw(st.decimals(min_value=Decimal(0), max_value=Decimal("0.2"), places=5)),
        coupon_month=draw(st.integers(1, 12)),
        coupon_day=draw(st.integers(1, 28)),
        first_coupon_year=first,
        last_coupon_year=draw(st.integers(first, first + years)),
        payer="A",
        receiver="B",
        roll=draw(st.sampled_from(list(RollConvention))),
    )
    if draw(st.booleans()):
        carbon = CarbonLeg(
            unit_quantity=draw(positive),
            unit_kind=draw(st.sampled_from(["hectare:tree-type-G", "MW:offshore-wind-K", "MW:coal-K"])),
            base_year=eff.year,
            profiles=tuple(draw(st.lists(profiles(), min_size=1, max_size=4))),
            payer="B",
            receiver="A",
            floating=draw(st.booleans()),
        )
    else:
        carbon = ShorthandCarbon(
            draw(st.decimals(min_value=Decimal("-1e9"), max_value=Decimal("1e9"), places=3)),
            draw(st.dates(date(2000, 1, 1), date(2080, 12, 31))),
        )
    labels = draw(st.dictionaries(st.sampled_from(["instrument", "desk", "region"]),
                                  st.sampled_from(["bond", "loan", "EMEA", "rates"]), max_size=3))
    return LinkedProduct(
        strategy_id=draw(ids),
        parties=(Party("A", "Party A", Role.FUNDER), Party("B", "Party B", Role.ISSUER)),
        money_leg=money,
        carbon=carbon,
        labels=labels,
    )


@st.composite
def carbon_flows(draw, strategy_ids=("P1", "P2", "P3")):
    d = draw(st.dates(date(1950, 1, 1), date(2150, 12, 31)))
    amount = Fraction(draw(st.integers(-10**9, 10**9)), draw(st.integers(1, 1000)))
    return CarbonFlow(draw(st.sampled_from(strategy_ids)), d, amount, "B", "A", FlowStatus.FIXED)
