"""``cep`` command line.

Exit codes: 0 success, 1 domain error (message on stderr), 2 usage error.
Reports are CSV on stdout unless ``--format table`` is given.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass
from datetime import date
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from cep.accounting import (
    DEFAULT_DECAY_RATE,
    SUMMARY_HEADER,
    CarbonSummary,
    DecayParams,
    net_portfolio,
    required_offset,
    summarize,
    summary_row,
)
from cep.errors import CepError
from cep.flowgen import FLOW_HEADER, apply_fixings, flow_rows, format_amount, parse_fixings
from cep.lifecycle import FlowSet, PermitOption, XcaPolicy, exercise_permit, expand, parse_event
from cep.pricing import REPORT_HEADER, load_curve, monetize, report_rows
from cep.store import PositionStore
from cep.temporal import WEEKENDS_ONLY, Calendar, load_calendar
from cep.termsheet import LinkedProduct, Party, Role, parse_product, validate_product


@dataclass
class RunConfig:
    store: str | None
    as_of: date
    decay: DecayParams
    xca_default_policy: XcaPolicy | None
    calendar: Calendar
    curve: str | None
    fmt: str


def _iso(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from None


def _common() -> argparse.ArgumentParser:
    # SUPPRESS keeps a flag given before the subcommand from being reset by the subparser
    common = argparse.ArgumentParser(add_help=False)
    s = argparse.SUPPRESS
    common.add_argument("--store", default=s, help="store directory (default $CEP_STORE)")
    common.add_argument("--as-of", type=_iso, default=s, help="valuation date, YYYY-MM-DD (default today)")
    common.add_argument("--decay-rate", type=float, default=s, metavar="BPS",
                        help=f"annual decay of past carbon in basis points (default {DEFAULT_DECAY_RATE * 1e4:g})")
    common.add_argument("--force-rate", action="store_true", default=s, help="allow a decay rate outside the guard rail")
    common.add_argument("--xca-default-policy", choices=["continue", "cease"], default=s,
                        help="carbon policy for XCA non-payment events without one")
    common.add_argument("--curve", default=s, help="carbon price curve CSV")
    common.add_argument("--holidays", default=s, help="holiday file, one ISO date per line")
    common.add_argument("--format", choices=["csv", "table"], default=s, dest="fmt")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="cep", parents=[common],
                                     description="Linked carbon termsheets: flows, summaries, pricing, lifecycle.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_text, products=True):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if products:
            sp.add_argument("products", nargs="*", metavar="PRODUCT",
                            help="product JSON files (default: every product in the store)")
        return sp

    sp = sub.add_parser("validate", parents=[common], help="check product files")
    sp.add_argument("products", nargs="+", metavar="PRODUCT")
    sp = sub.add_parser("book", parents=[common], help="book product files into the store")
    sp.add_argument("products", nargs="+", metavar="PRODUCT")
    sp = add("flows", "expand products into dated money and carbon flows")
    sp.add_argument("--fixings", help="fixing CSV applied to floating carbon flows")
    add("summarize", "carbon summary per product")
    add("net", "net carbon summary of the portfolio")
    add("offset", "offset flow that brings the portfolio to net zero")
    add("price", "monetize carbon flows on a price curve")
    add("report", "per-product and portfolio carbon report")

    sp = sub.add_parser("event", parents=[common], help="record lifecycle events in the store")
    sp.add_argument("strategy_id", nargs="?")
    sp.add_argument("date", nargs="?", type=_iso)
    sp.add_argument("event", nargs="?", choices=["MATURITY", "DEFAULT", "XCA_NONPAYMENT"])
    sp.add_argument("policy", nargs="?", default="-", choices=["CONTINUE", "CEASE", "-"])
    sp.add_argument("--file", help="event CSV: strategy_id,date,event,policy")

    sp = sub.add_parser("permit", parents=[common], help="grant, exercise and list emission permits")
    psub = sp.add_subparsers(dest="permit_command", required=True, metavar="ACTION")
    g = psub.add_parser("grant", parents=[common])
    g.add_argument("permit_id")
    g.add_argument("--holder", required=True)
    g.add_argument("--grantor", required=True)
    g.add_argument("--volume", required=True, type=Fraction)
    g.add_argument("--window-start", required=True, type=_iso)
    g.add_argument("--window-end", required=True, type=_iso)
    e = psub.add_parser("exercise", parents=[common])
    e.add_argument("permit_id")
    e.add_argument("--date", required=True, type=_iso)
    e.add_argument("--amount", required=True, type=Fraction)
    psub.add_parser("list", parents=[common])
    return parser


def _config(args, parser) -> RunConfig:
    rate = getattr(args, "decay_rate", None)
    try:
        decay = DecayParams() if rate is None else DecayParams.from_bps(rate, getattr(args, "force_rate", False))
    except ValueError as exc:
        parser.error(f"--decay-rate: {exc}; pass --force-rate to use it anyway")
    cal = WEEKENDS_ONLY
    if getattr(args, "holidays", None):
        try:
            cal = load_calendar(args.holidays)
        except (OSError, ValueError) as exc:
            raise CepError(f"holiday file: {exc}") from exc
    policy = getattr(args, "xca_default_policy", None)
    return RunConfig(
        store=getattr(args, "store", None) or os.environ.get("CEP_STORE"),
        as_of=getattr(args, "as_of", None) or date.today(),
        decay=decay,
        xca_default_policy=XcaPolicy(policy.upper()) if policy else None,
        calendar=cal,
        curve=getattr(args, "curve", None),
        fmt=getattr(args, "fmt", None) or "csv",
    )


# -- output -----------------------------------------------------------------


def _emit(out, header: list[str], rows: list[list[str]], fmt: str) -> None:
    if fmt == "table":
        widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
        for r in [header, *rows]:
            out.write("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


# -- inputs -----------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CepError(f"{path}: {exc.strerror}") from exc


def _open_store(cfg: RunConfig, parser) -> PositionStore:
    if not cfg.store:
        parser.error("a store is required: pass --store DIR or set CEP_STORE")
    return PositionStore(cfg.store, cfg.calendar)


def _portfolio(args, cfg: RunConfig, parser) -> list[tuple[LinkedProduct, FlowSet]]:
    """Products from files, or the whole store with journaled events applied."""
    fixings = {}
    if args.products:
        out = []
        for path in args.products:
            p = parse_product(_read(path))
            out.append((p, expand(p, cfg.calendar)))
        if cfg.store:
            fixings.update(PositionStore(cfg.store, cfg.calendar).fixings())
    else:
        store = _open_store(cfg, parser)
        out = [store.materialize(sid) for sid in store.ids()]
        fixings.update(store.fixings())
    extra = getattr(args, "fixings", None)
    if extra:
        fixings.update(parse_fixings(_read(extra)))
    if fixings:
        out = [(p, FlowSet(fs.money, tuple(apply_fixings(fs.carbon, fixings)))) for p, fs in out]
    ids = [p.strategy_id for p, _ in out]
    if len(set(ids)) != len(ids):
        raise CepError("duplicate strategy ids in input")
    return sorted(out, key=lambda pf: pf[0].strategy_id)


def _summaries(items, cfg: RunConfig) -> list[tuple[str, CarbonSummary]]:
    return [(p.strategy_id, summarize(fs.carbon, cfg.as_of, cfg.decay)) for p, fs in items]


def _portfolio_summary(summaries, cfg: RunConfig) -> CarbonSummary:
    return net_portfolio(summaries) if summaries else CarbonSummary(cfg.as_of)


# -- commands ---------------------------------------------------------------


def cmd_validate(args, cfg, parser, out) -> int:
    rows = []
    failed = False
    for path in args.products:
        p = parse_product(_read(path))
        for f in validate_product(p):
            rows.append([path, p.strategy_id, f.severity, f.code, f.message])
            failed = failed or f.is_error
    _emit(out, ["file", "strategy_id", "severity", "code", "message"], rows, cfg.fmt)
    if failed:
        for r in rows:
            if r[2] == "error":
                print(f"error: {r[1]}: {r[4]}", file=sys.stderr)
        return 1
    return 0


def cmd_book(args, cfg, parser, out) -> int:
    store = _open_store(cfg, parser)
    rows = []
    for path in args.products:
        receipt = store.book(parse_product(_read(path)))
        rows.append([receipt.strategy_id, receipt.content_hash])
    _emit(out, ["strategy_id", "content_hash"], rows, cfg.fmt)
    return 0


def cmd_flows(args, cfg, parser, out) -> int:
    rows = []
    for _, fs in _portfolio(args, cfg, parser):
        rows += flow_rows(fs.money, fs.carbon)
    _emit(out, FLOW_HEADER, rows, cfg.fmt)
    return 0


def cmd_summarize(args, cfg, parser, out) -> int:
    summaries = _summaries(_portfolio(args, cfg, parser), cfg)
    _emit(out, SUMMARY_HEADER, [summary_row(sid, s) for sid, s in summaries], cfg.fmt)
    return 0


def cmd_net(args, cfg, parser, out) -> int:
    total = _portfolio_summary(_summaries(_portfolio(args, cfg, parser), cfg), cfg)
    _emit(out, SUMMARY_HEADER, [summary_row("PORTFOLIO", total)], cfg.fmt)
    return 0


def cmd_offset(args, cfg, parser, out) -> int:
    total = _portfolio_summary(_summaries(_portfolio(args, cfg, parser), cfg), cfg)
    _emit(out, FLOW_HEADER, flow_rows([], [required_offset(total)]), cfg.fmt)
    return 0


def _curve(cfg, parser):
    if not cfg.curve:
        parser.error("--curve FILE is required")
    return load_curve(_read(cfg.curve))


def cmd_price(args, cfg, parser, out) -> int:
    curve = _curve(cfg, parser)
    flows = [f for _, fs in _portfolio(args, cfg, parser) for f in fs.carbon]
    _emit(out, REPORT_HEADER, report_rows(monetize(flows, curve)), cfg.fmt)
    return 0


REPORT_COLUMNS = SUMMARY_HEADER + ["offset_tco2e", "carbon_cost", "currency"]


def cmd_report(args, cfg, parser, out) -> int:
    items = _portfolio(args, cfg, parser)
    curve = load_curve(_read(cfg.curve)) if cfg.curve else None
    summaries = _summaries(items, cfg)
    costs = {}
    if curve is not None:
        report = monetize([f for _, fs in items for f in fs.carbon], curve)
        costs = report.product_totals()
        costs["PORTFOLIO"] = report.total
    rows = []
    for sid, s in [*summaries, ("PORTFOLIO", _portfolio_summary(summaries, cfg))]:
        cost = format_amount(costs.get(sid, Fraction(0)), 2) if curve else ""
        rows.append(summary_row(sid, s) + [format_amount(-s.total), cost, curve.currency if curve else ""])
    _emit(out, REPORT_COLUMNS, rows, cfg.fmt)
    return 0


def cmd_event(args, cfg, parser, out) -> int:
    store = _open_store(cfg, parser)
    if args.file:
        if args.strategy_id:
            parser.error("give either --file or a single event, not both")
        reader = csv.DictReader(io.StringIO(_read(args.file)))
        if reader.fieldnames != ["strategy_id", "date", "event", "policy"]:
            raise CepError("event file header must be strategy_id,date,event,policy")
        todo = []
        for row in reader:
            try:
                when = date.fromisoformat(row["date"])
            except ValueError:
                raise CepError(f"event file: bad date {row['date']!r}") from None
            todo.append((row["strategy_id"], parse_event(row["event"], when, row["policy"] or "-")))
    else:
        if not (args.strategy_id and args.date and args.event):
            parser.error("event needs STRATEGY_ID DATE EVENT [POLICY] or --file")
        todo = [(args.strategy_id, parse_event(args.event, args.date, args.policy))]
    rows = []
    for sid, ev in todo:
        state = store.record_event(sid, ev, cfg.xca_default_policy)
        rows.append([sid, ev.date.isoformat(), ev.label, state.status.value])
    _emit(out, ["strategy_id", "date", "event", "state"], rows, cfg.fmt)
    return 0


PERMIT_COLUMNS = ["permit_id", "holder", "grantor", "volume", "exercised", "remaining", "window_start", "window_end"]


def _permit_row(p: PermitOption) -> list[str]:
    return [p.permit_id, p.holder.id, p.grantor.id, format_amount(p.volume), format_amount(p.exercised),
            format_amount(p.remaining), p.window_start.isoformat(), p.window_end.isoformat()]


def cmd_permit(args, cfg, parser, out) -> int:
    store = _open_store(cfg, parser)
    permits = store.permits()
    if args.permit_command == "grant":
        if args.permit_id in permits:
            raise CepError(f"permit {args.permit_id} already exists")
        perm = PermitOption(
            holder=Party(args.holder, args.holder, Role.FUNDER),
            grantor=Party(args.grantor, args.grantor, Role.GOVERNMENT),
            volume=args.volume,
            window_start=args.window_start,
            window_end=args.window_end,
            permit_id=args.permit_id,
        )
        store.save_permit(perm)
        _emit(out, PERMIT_COLUMNS, [_permit_row(perm)], cfg.fmt)
    elif args.permit_command == "exercise":
        if args.permit_id not in permits:
            raise CepError(f"unknown permit {args.permit_id}")
        perm, flow = exercise_permit(permits[args.permit_id], args.date, args.amount)
        store.save_permit(perm)
        _emit(out, FLOW_HEADER, flow_rows([], [flow]), cfg.fmt)
    else:
        _emit(out, PERMIT_COLUMNS, [_permit_row(permits[k]) for k in sorted(permits)], cfg.fmt)
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "book": cmd_book,
    "flows": cmd_flows,
    "summarize": cmd_summarize,
    "net": cmd_net,
    "offset": cmd_offset,
    "price": cmd_price,
    "report": cmd_report,
    "event": cmd_event,
    "permit": cmd_permit,
}


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args, parser)
        return COMMANDS[args.command](args, cfg, parser, out)
    except SystemExit as exc:
        return int(exc.code or 0)
    except CepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
