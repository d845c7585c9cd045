"""Linked carbon termsheets for financial products.

Every product carries its carbon impact in tCO2e (currency code XCA) next to
its money leg. This package expands both legs into dated flows, summarizes
carbon with decay of past flows, nets portfolios, prices carbon against
scenario curves and tracks lifecycle events in a plain-file store.
"""

from cep.accounting import (
    CarbonSummary,
    DecayParams,
    decay_factor,
    net_portfolio,
    required_offset,
    summarize,
    to_pico_degrees,
)
from cep.errors import CepError
from cep.flowgen import (
    CarbonFlow,
    FlowStatus,
    MoneyFlow,
    MoneyKind,
    apply_fixings,
    attribute_shorthand,
    generate_carbon_flows,
    generate_money_flows,
)
from cep.lifecycle import (
    Default,
    FlowSet,
    Maturity,
    PermitOption,
    XcaNonPayment,
    XcaPolicy,
    apply_event,
    exercise_permit,
    remaining_flows,
)
from cep.pricing import CarbonPriceCurve, load_curve, monetize, price_at
from cep.store import PositionStore
from cep.temporal import Calendar, DayCount, RollConvention, adjust_date, annual_schedule, year_fraction
from cep.termsheet import LinkedProduct, parse_product, serialize_product, validate_product

__version__ = "0.1.0"
