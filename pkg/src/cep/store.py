"""Plain-file position keeping.

Layout under the store root::

    products/<strategy_id>.json   canonical product documents, written once
    journal.csv                   append-only lifecycle events
    fixings.csv                   observed floating carbon amounts
    permits.csv                   emission permits and their exercised volume

Documents are published with write-to-temp then rename, so a reader never
sees a half-written booking. Lifecycle state is never stored in the product
file; it is the replay of the journal.
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
import re
import tempfile
from dataclasses import dataclass, replace
from datetime import date
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from cep.errors import DuplicateBookingError, LifecycleError, StoreError
from cep.flowgen import FixingTable, format_amount, format_fixings, parse_fixings
from cep.lifecycle import (
    Event,
    FlowSet,
    PermitOption,
    XcaNonPayment,
    XcaPolicy,
    apply_event,
    event_fields,
    expand,
    parse_event,
)
from cep.temporal import WEEKENDS_ONLY, Calendar
from cep.termsheet import (
    LifecycleState,
    LinkedProduct,
    Party,
    Role,
    Status,
    parse_product,
    serialize_product,
    validate_product,
)

JOURNAL_HEADER = ["seq", "strategy_id", "date", "event", "policy"]
PERMIT_HEADER = [
    "permit_id", "holder_id", "holder_name", "holder_role", "grantor_id", "grantor_name",
    "volume", "window_start", "window_end", "exercised",
]
_SAFE_ID = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]*")


@dataclass(frozen=True)
class Receipt:
    strategy_id: str
    content_hash: str


def _atomic_write(path: Path, data: str) -> None:
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class PositionStore:
    """Single-writer store of linked products keyed by strategy id."""

    def __init__(self, root: str | os.PathLike, cal: Calendar = WEEKENDS_ONLY):
        self.root = Path(root)
        self.cal = cal
        self.products_dir = self.root / "products"
        self.journal_path = self.root / "journal.csv"
        self.fixings_path = self.root / "fixings.csv"
        self.permits_path = self.root / "permits.csv"
        try:
            self.products_dir.mkdir(parents=True, exist_ok=True)
            if not self.journal_path.exists():
                _atomic_write(self.journal_path, ",".join(JOURNAL_HEADER) + "\n")
        except OSError as exc:
            raise StoreError(f"cannot open store at {self.root}: {exc}") from exc
        self._states = self.replay()

    # -- products --

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.products_dir.glob("*.json") if not p.name.startswith("."))

    def _path(self, strategy_id: str) -> Path:
        if not _SAFE_ID.fullmatch(strategy_id):
            raise StoreError(f"strategy id {strategy_id!r} cannot be used as a file name")
        return self.products_dir / f"{strategy_id}.json"

    def book(self, product: LinkedProduct) -> Receipt:
        errors = [f for f in validate_product(product) if f.is_error]
        if errors:
            raise StoreError(
                f"{product.strategy_id}: cannot book, " + "; ".join(f.message for f in errors)
            )
        if product.state != LifecycleState():
            raise StoreError(f"{product.strategy_id}: only fresh Active products can be booked")
        path = self._path(product.strategy_id)
        if path.exists():
            raise DuplicateBookingError(f"strategy id {product.strategy_id} is already booked")
        doc = serialize_product(product)
        try:
            _atomic_write(path, doc)
        except OSError as exc:
            raise StoreError(f"storage failure booking {product.strategy_id}: {exc}") from exc
        self._states[product.strategy_id] = LifecycleState()
        return Receipt(product.strategy_id, hashlib.sha256(doc.encode("utf-8")).hexdigest())

    def read_document(self, strategy_id: str) -> str:
        path = self._path(strategy_id)
        if not path.exists():
            raise StoreError(f"unknown strategy id {strategy_id}")
        return path.read_text(encoding="utf-8")

    def booked(self, strategy_id: str) -> LinkedProduct:
        """The product as booked, without lifecycle events."""
        return parse_product(self.read_document(strategy_id))

    def get(self, strategy_id: str) -> LinkedProduct:
        return replace(self.booked(strategy_id), state=self.state(strategy_id))

    def state(self, strategy_id: str) -> LifecycleState:
        if strategy_id not in self._states:
            if strategy_id not in self.ids():
                raise StoreError(f"unknown strategy id {strategy_id}")
            self._states[strategy_id] = LifecycleState()
        return self._states[strategy_id]

    # -- events --

    def journal(self) -> list[tuple[int, str, Event]]:
        with open(self.journal_path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != JOURNAL_HEADER:
                raise StoreError("journal.csv has an unexpected header")
            out = []
            for row in reader:
                when = date.fromisoformat(row["date"])
                out.append((int(row["seq"]), row["strategy_id"], parse_event(row["event"], when, row["policy"])))
        return out

    def materialize(self, strategy_id: str) -> tuple[LinkedProduct, FlowSet]:
        """Booked product with every journaled event applied, and its resulting flows."""
        p = self.booked(strategy_id)
        flows = expand(p, self.cal)
        for _, sid, ev in self.journal():
            if sid == strategy_id:
                p, flows = apply_event(p, flows, ev)
        return p, flows

    def record_event(self, strategy_id: str, event: Event,
                     nonpayment_policy: XcaPolicy | None = None) -> LifecycleState:
        if isinstance(event, XcaNonPayment) and event.policy is None:
            if nonpayment_policy is None:
                raise LifecycleError(f"{strategy_id}: XCA non-payment needs an explicit carbon policy")
            event = XcaNonPayment(event.date, nonpayment_policy)
        p, flows = self.materialize(strategy_id)
        p, _ = apply_event(p, flows, event)
        seq = len(self.journal()) + 1
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow([seq, strategy_id, *event_fields(event)])
        with open(self.journal_path, "a", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
            fh.flush()
            os.fsync(fh.fileno())
        self._states[strategy_id] = p.state
        return p.state

    def replay(self) -> dict[str, LifecycleState]:
        """Lifecycle state of every booked product rebuilt from the journal alone."""
        states = {sid: LifecycleState() for sid in self.ids()}
        cache: dict[str, tuple[LinkedProduct, FlowSet]] = {}
        for seq, sid, ev in self.journal():
            if sid not in states:
                raise StoreError(f"journal entry {seq} refers to unknown strategy id {sid}")
            if sid not in cache:
                p = self.booked(sid)
                cache[sid] = (p, expand(p, self.cal))
            cache[sid] = apply_event(*cache[sid], ev)
            states[sid] = cache[sid][0].state
        return states

    def list_portfolio(
        self,
        status: Status | None = None,
        party: str | None = None,
        start: date | None = None,
        end: date | None = None,
    ) -> list[LinkedProduct]:
        """Products in strategy-id order; the date filter keeps money legs overlapping [start, end]."""
        out = []
        for sid in self.ids():
            p = self.get(sid)
            if status is not None and p.state.status is not status:
                continue
            if party is not None and all(x.id != party for x in p.parties):
                continue
            if start is not None and p.money_leg.maturity_date < start:
                continue
            if end is not None and p.money_leg.effective_date > end:
                continue
            out.append(p)
        return out

    # -- fixings --

    def fixings(self) -> FixingTable:
        if not self.fixings_path.exists():
            return {}
        return parse_fixings(self.fixings_path.read_text(encoding="utf-8"))

    def add_fixings(self, table: FixingTable) -> FixingTable:
        merged = self.fixings()
        for key, value in table.items():
            if key in merged and merged[key] != value:
                raise StoreError(f"fixing {key[0]}/{key[1]} already recorded with a different value")
            merged[key] = value
        _atomic_write(self.fixings_path, format_fixings(merged))
        return merged

    # -- permits --

    def permits(self) -> dict[str, PermitOption]:
        if not self.permits_path.exists():
            return {}
        out = {}
        with open(self.permits_path, encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                out[row["permit_id"]] = PermitOption(
                    holder=Party(row["holder_id"], row["holder_name"], Role(row["holder_role"])),
                    grantor=Party(row["grantor_id"], row["grantor_name"], Role.GOVERNMENT),
                    volume=Fraction(Decimal(row["volume"])),
                    window_start=date.fromisoformat(row["window_start"]),
                    window_end=date.fromisoformat(row["window_end"]),
                    exercised=Fraction(Decimal(row["exercised"])),
                    permit_id=row["permit_id"],
                )
        return out

    def save_permit(self, perm: PermitOption) -> None:
        if not perm.permit_id:
            raise StoreError("permit needs an id to be stored")
        allp = self.permits()
        allp[perm.permit_id] = perm
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(PERMIT_HEADER)
        for pid in sorted(allp):
            x = allp[pid]
            w.writerow([pid, x.holder.id, x.holder.name, x.holder.role.value, x.grantor.id, x.grantor.name,
                        format_amount(x.volume), x.window_start.isoformat(), x.window_end.isoformat(),
                        format_amount(x.exercised)])
        _atomic_write(self.permits_path, buf.getvalue())
