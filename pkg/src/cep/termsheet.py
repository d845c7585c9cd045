"""Linked money/carbon termsheets: data model, JSON format, validation.

A product is one money leg plus its carbon representation, joined by a
strategy identifier. The carbon side is either a full dated leg built from
parametric profiles, or a single summary flow (shorthand).
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from datetime import date
from decimal import Decimal, InvalidOperation
from typing import Any, Union

from cep.errors import ProductFormatError
from cep.temporal import DayCount, RollConvention, anniversary, unadjusted_schedule


class Role(enum.Enum):
    FUNDER = "Funder"
    ISSUER = "Issuer"
    GOVERNMENT = "Government"
    OTHER = "Other"


class Sign(enum.Enum):
    EMISSION = "emission"
    ABSORPTION = "absorption"

    @property
    def factor(self) -> int:
        return 1 if self is Sign.EMISSION else -1


class ProfileKind(enum.Enum):
    SINGLE = "SingleFlow"
    CONSTANT = "ConstantAnnual"
    REVERSE_AMORTIZING = "ReverseAmortizing"


class Status(enum.Enum):
    ACTIVE = "Active"
    MATURED = "Matured"
    DEFAULTED = "Defaulted"


@dataclass(frozen=True)
class LifecycleState:
    status: Status = Status.ACTIVE
    # (date, event label) in application order
    events: tuple[tuple[date, str], ...] = ()

    @property
    def is_active(self) -> bool:
        return self.status is Status.ACTIVE


@dataclass(frozen=True)
class Party:
    id: str
    name: str
    role: Role = Role.OTHER


@dataclass(frozen=True)
class MoneyLeg:
    """Fixed-rate bullet leg.

    ``payer`` pays the notional on the effective date to ``receiver``;
    coupons and the redemption flow back the other way.
    """

    currency: str
    notional: Decimal
    effective_date: date
    maturity_date: date
    fixed_rate: Decimal
    coupon_month: int
    coupon_day: int
    first_coupon_year: int
    last_coupon_year: int
    payer: str
    receiver: str
    roll: RollConvention = RollConvention.MODIFIED_FOLLOWING
    daycount: DayCount = DayCount.ACT_360
    extras: dict[str, Any] = field(default_factory=dict, compare=True)

    def coupon_anchors(self) -> list[date]:
        return unadjusted_schedule(
            (self.coupon_month, self.coupon_day), self.first_coupon_year, self.last_coupon_year
        )


@dataclass(frozen=True)
class CarbonProfile:
    """Per-unit carbon flows over profile years ``start_year..end_year`` (1 = base year).

    For a reverse-amortizing profile ``amount_per_unit`` is the terminal
    amount reached in ``end_year``; the ramp starts at zero.
    """

    kind: ProfileKind
    sign: Sign
    start_year: int
    end_year: int
    amount_per_unit: Decimal
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def years(self) -> range:
        return range(self.start_year, self.end_year + 1)


@dataclass(frozen=True)
class CarbonLeg:
    unit_quantity: Decimal
    unit_kind: str
    base_year: int
    profiles: tuple[CarbonProfile, ...]
    payer: str
    receiver: str
    floating: bool = False
    extras: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ShorthandCarbon:
    amount_tco2e: Decimal
    as_of: date


Carbon = Union[CarbonLeg, ShorthandCarbon]


@dataclass(frozen=True)
class LinkedProduct:
    strategy_id: str
    parties: tuple[Party, ...]
    money_leg: MoneyLeg
    carbon: Carbon | None
    labels: dict[str, str] = field(default_factory=dict)
    state: LifecycleState = LifecycleState()
    extras: dict[str, Any] = field(default_factory=dict)

    def party(self, party_id: str) -> Party | None:
        for p in self.parties:
            if p.id == party_id:
                return p
        return None

    def party_with_role(self, role: Role) -> Party | None:
        for p in self.parties:
            if p.role is role:
                return p
        return None


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == "error"


_GREEN = re.compile(r"\bgreen\b", re.IGNORECASE)


def has_green_label(labels: dict[str, str]) -> bool:
    return any(_GREEN.search(str(k)) or _GREEN.search(str(v)) for k, v in labels.items())


def validate_product(p: LinkedProduct) -> list[Finding]:
    """All invariant breaches of ``p``, errors and warnings, in a fixed order."""
    out: list[Finding] = []

    def err(code, msg):
        out.append(Finding("error", code, msg))

    def warn(code, msg):
        out.append(Finding("warning", code, msg))

    if not p.strategy_id or not p.strategy_id.strip():
        err("strategy-id", "strategy_id must be nonempty")

    ids = [party.id for party in p.parties]
    if any(not i for i in ids):
        err("party-id", "party id must be nonempty")
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        err("party-id", f"duplicate party ids: {', '.join(dupes)}")

    if has_green_label(p.labels):
        err("manifesto-iii", "Manifesto III: Green label forbidden")

    m = p.money_leg
    for who in ("payer", "receiver"):
        if getattr(m, who) not in ids:
            err("money-party", f"money leg {who} {getattr(m, who)!r} is not a listed party")
    if m.payer == m.receiver:
        err("money-party", "money leg payer and receiver are the same party")
    if not re.fullmatch(r"[A-Z]{3}", m.currency):
        err("currency", f"currency {m.currency!r} is not a 3-letter code")
    if m.notional <= 0:
        err("notional", "notional must be positive")
    if m.fixed_rate < 0:
        err("rate", "fixed rate must be non-negative")
    if m.effective_date >= m.maturity_date:
        err("dates", "effective date must precede maturity date")
    if m.first_coupon_year > m.last_coupon_year:
        err("coupon", "first coupon year is after last coupon year")
    else:
        try:
            anchors = m.coupon_anchors()
        except ValueError:
            err("coupon", f"invalid coupon anchor {m.coupon_month}-{m.coupon_day}")
        else:
            if anchors[0] <= m.effective_date:
                err("coupon", f"first coupon {anchors[0]} is not after the effective date")
            last_anchor = anchors[-1]
            if last_anchor > m.maturity_date:
                warn(
                    "coupon-after-maturity",
                    f"last coupon {last_anchor} falls after redemption {m.maturity_date}",
                )

    c = p.carbon
    if c is None:
        err("manifesto-ii", "carbon representation required")
    elif isinstance(c, ShorthandCarbon):
        if not c.amount_tco2e.is_finite():
            err("shorthand", "shorthand carbon amount must be finite")
    else:
        _validate_carbon_leg(p, c, err, warn)
    return out


def _validate_carbon_leg(p: LinkedProduct, c: CarbonLeg, err, warn) -> None:
    if c.unit_quantity <= 0:
        err("unit-quantity", "carbon leg unit_quantity must be positive")
    if not c.profiles:
        err("profiles", "carbon leg needs at least one profile")
    payer, receiver = p.party(c.payer), p.party(c.receiver)
    if payer is None or receiver is None:
        err("carbon-party", "carbon leg payer/receiver must be listed parties")
    elif payer.role is not Role.ISSUER or receiver.role is not Role.FUNDER:
        err("carbon-direction", "carbon flows must run from the Issuer to the Funder")
    for i, prof in enumerate(c.profiles):
        tag = f"profile {i} ({prof.kind.value})"
        if prof.start_year < 1 or prof.start_year > prof.end_year:
            err("profile-years", f"{tag}: need 1 <= start_year <= end_year")
        if prof.kind is ProfileKind.SINGLE and prof.start_year != prof.end_year:
            err("profile-years", f"{tag}: single flow must have start_year == end_year")
        if prof.amount_per_unit < 0 or not prof.amount_per_unit.is_finite():
            err("profile-amount", f"{tag}: amount_per_unit must be a finite value >= 0")
    # same-sign profiles only: planting emission alongside absorption is expected
    for i, a in enumerate(c.profiles):
        for j in range(i + 1, len(c.profiles)):
            b = c.profiles[j]
            if a.sign is b.sign and a.start_year <= b.end_year and b.start_year <= a.end_year:
                warn("profile-overlap", f"profiles {i} and {j} overlap in years")


# -- JSON format ------------------------------------------------------------

_TOP_KEYS = ("strategy_id", "parties", "money_leg", "carbon_leg", "shorthand_carbon", "labels", "state")
_PARTY_KEYS = ("id", "name", "role")
_MONEY_KEYS = (
    "currency", "notional", "effective_date", "maturity_date", "fixed_rate",
    "coupon", "roll", "daycount", "payer", "receiver",
)
_COUPON_KEYS = ("month", "day", "first_year", "last_year")
_CARBON_KEYS = ("unit_quantity", "unit_kind", "base_year", "floating", "payer", "receiver", "profiles")
_PROFILE_KEYS = ("kind", "sign", "start_year", "end_year", "amount_per_unit")
_SHORTHAND_KEYS = ("amount_tco2e", "as_of")


class _Reader:
    """Typed access to one JSON object, reporting dotted paths on failure."""

    def __init__(self, obj: Any, path: str):
        if not isinstance(obj, dict):
            raise ProductFormatError(f"{path or 'document'}: expected an object")
        self.obj = obj
        self.path = path

    def _where(self, key):
        return f"{self.path}.{key}" if self.path else key

    def raw(self, key, default=...):
        if key not in self.obj:
            if default is ...:
                raise ProductFormatError(f"missing mandatory field {self._where(key)}")
            return default
        return self.obj[key]

    def text(self, key, default=...):
        v = self.raw(key, default)
        if not isinstance(v, str):
            raise ProductFormatError(f"{self._where(key)}: expected a string")
        return v

    def integer(self, key):
        v = self.raw(key)
        if isinstance(v, bool) or not isinstance(v, int):
            if isinstance(v, str) and re.fullmatch(r"-?\d+", v.strip()):
                return int(v)
            raise ProductFormatError(f"{self._where(key)}: expected an integer")
        return v

    def decimal(self, key):
        v = self.raw(key)
        if isinstance(v, bool) or not isinstance(v, (str, int)):
            raise ProductFormatError(f"{self._where(key)}: expected a decimal string")
        try:
            d = Decimal(str(v).strip())
        except InvalidOperation:
            raise ProductFormatError(f"{self._where(key)}: invalid number {v!r}") from None
        if not d.is_finite():
            raise ProductFormatError(f"{self._where(key)}: number must be finite")
        return d

    def date(self, key):
        v = self.text(key)
        try:
            return date.fromisoformat(v)
        except ValueError:
            raise ProductFormatError(f"{self._where(key)}: invalid date {v!r}") from None

    def enum(self, key, cls, default=...):
        v = self.raw(key, default)
        if isinstance(v, cls):
            return v
        for member in cls:
            if str(v).lower() == member.value.lower():
                return member
        choices = ", ".join(m.value for m in cls)
        raise ProductFormatError(f"{self._where(key)}: {v!r} is not one of {choices}")

    def boolean(self, key, default=...):
        v = self.raw(key, default)
        if not isinstance(v, bool):
            raise ProductFormatError(f"{self._where(key)}: expected true/false")
        return v

    def child(self, key):
        return _Reader(self.raw(key), self._where(key))

    def extras(self, known) -> dict[str, Any]:
        return {k: v for k, v in self.obj.items() if k not in known}


def parse_product(text: str | bytes) -> LinkedProduct:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProductFormatError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from None
    return product_from_dict(doc)


def product_from_dict(doc: Any) -> LinkedProduct:
    r = _Reader(doc, "")
    parties_raw = r.raw("parties")
    if not isinstance(parties_raw, list):
        raise ProductFormatError("parties: expected a list")
    parties = []
    for i, item in enumerate(parties_raw):
        pr = _Reader(item, f"parties[{i}]")
        parties.append(Party(pr.text("id"), pr.text("name", ""), pr.enum("role", Role, Role.OTHER)))

    has_leg, has_short = "carbon_leg" in doc, "shorthand_carbon" in doc
    if has_leg and has_short:
        raise ProductFormatError("give either carbon_leg or shorthand_carbon, not both")
    if not (has_leg or has_short):
        raise ProductFormatError("carbon representation required: carbon_leg or shorthand_carbon")
    carbon = _carbon_leg(r.child("carbon_leg")) if has_leg else _shorthand(r.child("shorthand_carbon"))

    labels = r.raw("labels", {})
    if not isinstance(labels, dict):
        raise ProductFormatError("labels: expected an object")

    return LinkedProduct(
        strategy_id=r.text("strategy_id"),
        parties=tuple(parties),
        money_leg=_money_leg(r.child("money_leg")),
        carbon=carbon,
        labels={str(k): str(v) for k, v in labels.items()},
        state=_state(r.child("state")) if "state" in doc else LifecycleState(),
        extras=r.extras(_TOP_KEYS),
    )


def _money_leg(r: _Reader) -> MoneyLeg:
    cp = r.child("coupon")
    if cp.extras(_COUPON_KEYS):
        raise ProductFormatError(f"money_leg.coupon: unknown keys {sorted(cp.extras(_COUPON_KEYS))}")
    return MoneyLeg(
        currency=r.text("currency"),
        notional=r.decimal("notional"),
        effective_date=r.date("effective_date"),
        maturity_date=r.date("maturity_date"),
        fixed_rate=r.decimal("fixed_rate"),
        coupon_month=cp.integer("month"),
        coupon_day=cp.integer("day"),
        first_coupon_year=cp.integer("first_year"),
        last_coupon_year=cp.integer("last_year"),
        roll=r.enum("roll", RollConvention, RollConvention.MODIFIED_FOLLOWING),
        daycount=r.enum("daycount", DayCount, DayCount.ACT_360),
        payer=r.text("payer"),
        receiver=r.text("receiver"),
        extras=r.extras(_MONEY_KEYS),
    )


def _carbon_leg(r: _Reader) -> CarbonLeg:
    raw = r.raw("profiles")
    if not isinstance(raw, list):
        raise ProductFormatError("carbon_leg.profiles: expected a list")
    profiles = []
    for i, item in enumerate(raw):
        pr = _Reader(item, f"carbon_leg.profiles[{i}]")
        profiles.append(
            CarbonProfile(
                kind=pr.enum("kind", ProfileKind),
                sign=pr.enum("sign", Sign),
                start_year=pr.integer("start_year"),
                end_year=pr.integer("end_year"),
                amount_per_unit=pr.decimal("amount_per_unit"),
                extras=pr.extras(_PROFILE_KEYS),
            )
        )
    return CarbonLeg(
        unit_quantity=r.decimal("unit_quantity"),
        unit_kind=r.text("unit_kind"),
        base_year=r.integer("base_year"),
        profiles=tuple(profiles),
        payer=r.text("payer"),
        receiver=r.text("receiver"),
        floating=r.boolean("floating", False),
        extras=r.extras(_CARBON_KEYS),
    )


def _shorthand(r: _Reader) -> ShorthandCarbon:
    return ShorthandCarbon(amount_tco2e=r.decimal("amount_tco2e"), as_of=r.date("as_of"))


def _state(r: _Reader) -> LifecycleState:
    events = []
    for i, item in enumerate(r.raw("events", [])):
        er = _Reader(item, f"state.events[{i}]")
        events.append((er.date("date"), er.text("event")))
    return LifecycleState(r.enum("status", Status), tuple(events))


def format_decimal(d: Decimal) -> str:
    """Plain positional notation, no exponent, no trailing zeros."""
    if d == 0:
        return "0"
    return format(d.normalize(), "f")


def product_to_dict(p: LinkedProduct) -> dict[str, Any]:
    m = p.money_leg
    doc: dict[str, Any] = {
        "strategy_id": p.strategy_id,
        "parties": [{"id": x.id, "name": x.name, "role": x.role.value} for x in p.parties],
        "money_leg": {
            "currency": m.currency,
            "notional": format_decimal(m.notional),
            "effective_date": m.effective_date.isoformat(),
            "maturity_date": m.maturity_date.isoformat(),
            "fixed_rate": format_decimal(m.fixed_rate),
            "coupon": {
                "month": m.coupon_month,
                "day": m.coupon_day,
                "first_year": m.first_coupon_year,
                "last_year": m.last_coupon_year,
            },
            "roll": m.roll.value,
            "daycount": m.daycount.value,
            "payer": m.payer,
            "receiver": m.receiver,
            **_sorted(m.extras),
        },
    }
    c = p.carbon
    if isinstance(c, CarbonLeg):
        doc["carbon_leg"] = {
            "unit_quantity": format_decimal(c.unit_quantity),
            "unit_kind": c.unit_kind,
            "base_year": c.base_year,
            "floating": c.floating,
            "payer": c.payer,
            "receiver": c.receiver,
            "profiles": [
                {
                    "kind": pr.kind.value,
                    "sign": pr.sign.value,
                    "start_year": pr.start_year,
                    "end_year": pr.end_year,
                    "amount_per_unit": format_decimal(pr.amount_per_unit),
                    **_sorted(pr.extras),
                }
                for pr in c.profiles
            ],
            **_sorted(c.extras),
        }
    elif isinstance(c, ShorthandCarbon):
        doc["shorthand_carbon"] = {
            "amount_tco2e": format_decimal(c.amount_tco2e),
            "as_of": c.as_of.isoformat(),
        }
    doc["labels"] = _sorted(p.labels)
    if p.state != LifecycleState():
        doc["state"] = {
            "status": p.state.status.value,
            "events": [{"date": d.isoformat(), "event": e} for d, e in p.state.events],
        }
    doc.update(_sorted(p.extras))
    return doc


def _sorted(d: dict[str, Any]) -> dict[str, Any]:
    return {k: d[k] for k in sorted(d)}


def serialize_product(p: LinkedProduct) -> str:
    """Canonical UTF-8 JSON text; serialize(parse(serialize(p))) is byte-identical."""
    return json.dumps(product_to_dict(p), indent=2, ensure_ascii=False) + "\n"


def carbon_year_date(p: LinkedProduct, profile_year: int) -> date:
    """Unadjusted date of carbon-leg year ``profile_year`` (year 1 = base year)."""
    leg = p.carbon
    assert isinstance(leg, CarbonLeg)
    return anniversary(p.money_leg.effective_date, leg.base_year + profile_year - 1)
