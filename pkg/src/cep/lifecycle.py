"""Lifecycle events on linked products and emission-permit exercise.

A product moves Active -> Matured or Active -> Defaulted, once. On maturity
the carbon flows after the redemption date revert to the issuer; on default
the remaining money flows are cancelled and the carbon flows either stay
with the buyer or stop, by explicit policy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from datetime import date
from fractions import Fraction
from typing import Union

from cep.errors import LifecycleError, PermitError
from cep.flowgen import CarbonFlow, FlowStatus, MoneyFlow, generate_money_flows, product_carbon_flows
from cep.temporal import WEEKENDS_ONLY, Calendar
from cep.termsheet import LifecycleState, LinkedProduct, Party, Role, Status

__all__ = [
    "Default", "FlowSet", "LifecycleState", "Maturity", "PermitOption", "Status",
    "XcaNonPayment", "XcaPolicy", "apply_event", "apply_events", "exercise_permit",
    "expand", "product_life", "remaining_flows",
]


class XcaPolicy(enum.Enum):
    CONTINUE = "CONTINUE"
    CEASE = "CEASE"


@dataclass(frozen=True)
class Maturity:
    date: date
    label = "MATURITY"


@dataclass(frozen=True)
class Default:
    date: date
    policy: XcaPolicy
    label = "DEFAULT"


@dataclass(frozen=True)
class XcaNonPayment:
    """Carbon flows not honoured: handled as a default.

    ``policy`` None means the run configuration decides.
    """

    date: date
    policy: XcaPolicy | None = None
    label = "XCA_NONPAYMENT"


Event = Union[Maturity, Default, XcaNonPayment]


@dataclass(frozen=True)
class FlowSet:
    money: tuple[MoneyFlow, ...] = ()
    carbon: tuple[CarbonFlow, ...] = ()

    def after(self, as_of: date) -> FlowSet:
        return FlowSet(
            tuple(f for f in self.money if f.date > as_of),
            tuple(f for f in self.carbon if f.date > as_of),
        )


def expand(p: LinkedProduct, cal: Calendar = WEEKENDS_ONLY) -> FlowSet:
    return FlowSet(tuple(generate_money_flows(p, cal)), tuple(product_carbon_flows(p, cal)))


def product_life(p: LinkedProduct, flows: FlowSet) -> tuple[date, date]:
    """From the effective date to the last money or carbon flow, whichever is later."""
    last = max([p.money_leg.maturity_date] + [f.date for f in flows.money] + [f.date for f in flows.carbon])
    return p.money_leg.effective_date, last


def _event_text(event: Event, policy: XcaPolicy | None) -> str:
    if isinstance(event, Maturity):
        return event.label
    return f"{event.label}:{policy.value}"


def apply_event(
    p: LinkedProduct,
    flows: FlowSet,
    event: Event,
    nonpayment_policy: XcaPolicy | None = None,
) -> tuple[LinkedProduct, FlowSet]:
    if not p.state.is_active:
        raise LifecycleError(
            f"{p.strategy_id}: illegal transition, product is already {p.state.status.value}"
        )
    start, end = product_life(p, flows)
    if not start <= event.date <= end:
        raise LifecycleError(f"{p.strategy_id}: event date {event.date} outside product life {start}..{end}")
    if p.state.events and event.date < p.state.events[-1][0]:
        raise LifecycleError(f"{p.strategy_id}: event date {event.date} precedes the last logged event")

    d = event.date
    if isinstance(event, Maturity):
        status = Status.MATURED
        policy = None
        carbon = tuple(
            replace(f, payer=f.receiver, receiver=f.payer) if f.date > d else f for f in flows.carbon
        )
        money = flows.money
    else:
        policy = event.policy
        if isinstance(event, XcaNonPayment) and policy is None:
            policy = nonpayment_policy
        if policy is None:
            raise LifecycleError(f"{p.strategy_id}: XCA non-payment needs an explicit carbon policy")
        status = Status.DEFAULTED
        money = tuple(f for f in flows.money if f.date <= d)
        if policy is XcaPolicy.CEASE:
            carbon = tuple(f for f in flows.carbon if f.date <= d)
        else:
            carbon = flows.carbon

    state = LifecycleState(status, p.state.events + ((d, _event_text(event, policy)),))
    return replace(p, state=state), FlowSet(money, carbon)


def apply_events(p, flows, events, nonpayment_policy=None):
    for ev in events:
        p, flows = apply_event(p, flows, ev, nonpayment_policy)
    return p, flows


def remaining_flows(p: LinkedProduct, flows: FlowSet, as_of: date) -> FlowSet:
    """Flows strictly after ``as_of``; carbon often outlives the money leg."""
    return flows.after(as_of)


# -- permits ----------------------------------------------------------------


@dataclass(frozen=True)
class PermitOption:
    """Government-granted allowance, exercisable in parts within a closed date window."""

    holder: Party
    grantor: Party
    volume: Fraction
    window_start: date
    window_end: date
    exercised: Fraction = field(default=Fraction(0))
    permit_id: str = ""

    def __post_init__(self):
        if self.grantor.role is not Role.GOVERNMENT:
            raise PermitError("permit grantor must be a Government party")
        if self.volume <= 0:
            raise PermitError("permit volume must be positive")
        if self.window_start > self.window_end:
            raise PermitError("permit window start is after its end")
        if not 0 <= self.exercised <= self.volume:
            raise PermitError("exercised amount must lie within [0, volume]")

    @property
    def remaining(self) -> Fraction:
        return self.volume - self.exercised


def exercise_permit(perm: PermitOption, when: date, amount) -> tuple[PermitOption, CarbonFlow]:
    amount = Fraction(amount)
    if amount <= 0:
        raise PermitError("exercise amount must be positive")
    if when < perm.window_start:
        raise PermitError(f"permit window not open until {perm.window_start}")
    if when > perm.window_end:
        raise PermitError(f"permit window expired on {perm.window_end}")
    if perm.exercised + amount > perm.volume:
        raise PermitError(f"insufficient permit volume: {perm.remaining} left, {amount} requested")
    flow = CarbonFlow(
        perm.permit_id or "PERMIT", when, -amount, perm.grantor.id, perm.holder.id,
        FlowStatus.FIXED, "permit",
    )
    return replace(perm, exercised=perm.exercised + amount), flow


def parse_event(event: str, when: date, policy: str) -> Event:
    """Build an event from the event-file vocabulary (MATURITY, DEFAULT, XCA_NONPAYMENT)."""
    kind = event.strip().upper()
    pol = policy.strip().upper()
    chosen = None if pol in ("", "-") else _policy(pol)
    if kind == "MATURITY":
        if chosen is not None:
            raise LifecycleError("MATURITY takes no carbon policy")
        return Maturity(when)
    if kind == "DEFAULT":
        if chosen is None:
            raise LifecycleError("DEFAULT needs a carbon policy (CONTINUE or CEASE)")
        return Default(when, chosen)
    if kind == "XCA_NONPAYMENT":
        return XcaNonPayment(when, chosen)
    raise LifecycleError(f"unknown event {event!r}")


def _policy(text: str) -> XcaPolicy:
    try:
        return XcaPolicy(text)
    except ValueError:
        raise LifecycleError(f"unknown carbon policy {text!r}") from None


def event_fields(ev: Event) -> tuple[str, str, str]:
    """(date, event, policy) columns of the event file."""
    policy = getattr(ev, "policy", None)
    return ev.date.isoformat(), ev.label, policy.value if policy else "-"
