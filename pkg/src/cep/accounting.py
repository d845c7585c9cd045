"""Carbon arithmetic: decay of past flows, summaries, netting, offsets, pico-degrees.

Past carbon decays at a small continuous rate while future carbon is taken at
face value. All sums are exact (``Fraction``), so results do not depend on
summation order; the canonical order (date, strategy_id) is still used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from fractions import Fraction
from typing import Iterable, Sequence

from cep.errors import CepError
from cep.flowgen import CarbonFlow, FlowStatus, canonical_key, format_amount

DAYS_PER_YEAR = 365.25
DEFAULT_DECAY_RATE = -0.0020
RATE_GUARD = (-0.0035, -0.0002)

# 1,150 Gt of carbon for a 2 degC change, expressed in pico-degC per tonne
PICO_DEGREES_PER_TONNE = Fraction(2, 1) / Fraction(1150 * 10**9) * 10**12


@dataclass(frozen=True)
class DecayParams:
    """Continuous annual decay rate for past carbon.

    Rates outside ``RATE_GUARD`` are refused unless ``override`` is set.
    """

    annual_rate: float = DEFAULT_DECAY_RATE
    override: bool = False

    def __post_init__(self):
        lo, hi = RATE_GUARD
        if not math.isfinite(self.annual_rate):
            raise ValueError("decay rate must be finite")
        if not self.override and not lo <= self.annual_rate <= hi:
            raise ValueError(
                f"decay rate {self.annual_rate} outside guard rail [{lo}, {hi}]"
            )

    @classmethod
    def from_bps(cls, bps: float, override: bool = False) -> DecayParams:
        return cls(bps / 10_000, override)


@dataclass(frozen=True)
class CarbonSummary:
    as_of: date
    past_accumulated: Fraction = Fraction(0)
    future_undiscounted: Fraction = Fraction(0)

    @property
    def total(self) -> Fraction:
        return self.past_accumulated + self.future_undiscounted

    def __add__(self, other: CarbonSummary) -> CarbonSummary:
        if other.as_of != self.as_of:
            raise CepError(f"cannot net summaries as of {self.as_of} and {other.as_of}")
        return CarbonSummary(
            self.as_of,
            self.past_accumulated + other.past_accumulated,
            self.future_undiscounted + other.future_undiscounted,
        )


def decay_factor(flow_date: date, as_of: date, params: DecayParams = DecayParams()) -> float:
    if flow_date >= as_of:
        return 1.0
    years = (as_of - flow_date).days / DAYS_PER_YEAR
    return math.exp(params.annual_rate * years)


def summarize(flows: Iterable[CarbonFlow], as_of: date, params: DecayParams = DecayParams()) -> CarbonSummary:
    past = Fraction(0)
    future = Fraction(0)
    for f in sorted(flows, key=canonical_key):
        if f.date < as_of:
            past += f.amount * Fraction(decay_factor(f.date, as_of, params))
        else:
            future += f.amount
    return CarbonSummary(as_of, past, future)


def net_portfolio(summaries: Sequence[tuple[str, CarbonSummary]]) -> CarbonSummary:
    """Component-wise sum of per-product summaries sharing one as-of date."""
    if not summaries:
        raise CepError("cannot net an empty portfolio without an as-of date")
    total = CarbonSummary(summaries[0][1].as_of)
    for _, s in summaries:
        total = total + s
    return total


def required_offset(
    s: CarbonSummary,
    strategy_id: str = "OFFSET",
    payer: str = "OFFSET-PROVIDER",
    receiver: str = "PORTFOLIO",
) -> CarbonFlow:
    """Flow dated ``s.as_of`` that brings the summarized total to zero."""
    return CarbonFlow(strategy_id, s.as_of, -s.total, payer, receiver, FlowStatus.FIXED, "offset")


def to_pico_degrees(amount_tco2e) -> Fraction:
    return Fraction(amount_tco2e) * PICO_DEGREES_PER_TONNE


SUMMARY_HEADER = ["strategy_id", "as_of", "past_tco2e", "future_tco2e", "total_tco2e", "total_pico_degC"]


def summary_row(strategy_id: str, s: CarbonSummary) -> list[str]:
    return [
        strategy_id,
        s.as_of.isoformat(),
        format_amount(s.past_accumulated),
        format_amount(s.future_undiscounted),
        format_amount(s.total),
        format_amount(to_pico_degrees(s.total)),
    ]
