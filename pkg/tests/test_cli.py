import csv
import io
from fractions import Fraction

import pytest

import oracles
from cep.cli import run
from conftest import DATA

TWO_POINT = "# scenario: test\n# currency: USD\nyear,price\n2025,100\n2035,300\n"


def cep(*argv):
    out = io.StringIO()
    code = run([str(a) for a in argv], out=out)
    return code, out.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def store(tmp_path, fixture_path):
    s = tmp_path / "store"
    code, _ = cep("book", "--store", s, fixture_path("forest"), fixture_path("wind"), fixture_path("coal"))
    assert code == 0
    return s


def forest_oracle_total(as_of, rate=-0.002):
    """Decayed forest carbon from the termsheet numbers, dates via the day-stepping oracle."""
    total = 0.0
    for k in range(1, 51):
        d = oracles.modified_following((2021 + k, 1, 3))
        amount = -10 * 1000 * (k - 1) / 49 + (500 if k == 1 else 0)
        days = oracles.days_between(d, as_of)
        total += amount * (2.718281828459045 ** (rate * days / 365.25))
    return total


def test_summarize_forest_matches_oracle(store):
    code, out = cep("summarize", "--store", store, "--as-of", "2072-01-01")
    assert code == 0
    forest = next(r for r in rows(out) if r["strategy_id"] == "FOREST-G-2022")
    assert float(forest["future_tco2e"]) == 0
    assert float(forest["total_tco2e"]) == pytest.approx(forest_oracle_total((2072, 1, 1)), abs=1e-5)
    assert float(forest["total_pico_degC"]) == pytest.approx(float(forest["total_tco2e"]) * 2 / 1.15, rel=1e-9)


def test_validate_green_bond_fails():
    code, out = cep("validate", DATA / "green_bond.json")
    assert code == 1
    assert "Manifesto III" in out


def test_validate_fixture_passes(fixture_path):
    code, out = cep("validate", fixture_path("forest"))
    assert code == 0
    assert rows(out)[0]["severity"] == "warning"


def test_price_with_no_carbon_is_zero(tmp_path):
    curve = tmp_path / "two_point.csv"
    curve.write_text(TWO_POINT)
    empty = tmp_path / "empty"
    code, out = cep("price", "--curve", curve, "--store", empty)
    assert code == 0
    assert rows(out)[-1]["cost"] == "0"


def test_price_fixtures(store, tmp_path):
    curve = tmp_path / "c.csv"
    curve.write_text(TWO_POINT)
    code, out = cep("--curve", curve, "price", "--store", store)
    assert code == 0
    total = rows(out)[-1]
    assert total["strategy_id"] == "PORTFOLIO"


def test_flows_counts(store):
    code, out = cep("flows", "--store", store)
    assert code == 0
    got = {}
    for r in rows(out):
        got.setdefault(r["strategy_id"], []).append(r["leg"])
    assert (got["FOREST-G-2022"].count("money"), got["FOREST-G-2022"].count("carbon")) == (13, 51)
    assert (got["WIND-K-2022"].count("money"), got["WIND-K-2022"].count("carbon")) == (24, 22)
    assert (got["COAL-K-2022"].count("money"), got["COAL-K-2022"].count("carbon")) == (23, 43)


def test_flows_from_files_without_store(fixture_path, monkeypatch):
    monkeypatch.delenv("CEP_STORE", raising=False)
    code, out = cep("flows", fixture_path("wind"))
    assert code == 0
    assert len(rows(out)) == 46


def test_net_and_offset_cancel(store):
    _, net = cep("net", "--store", store, "--as-of", "2040-01-01")
    _, off = cep("offset", "--store", store, "--as-of", "2040-01-01")
    total = Fraction(rows(net)[0]["total_tco2e"])
    assert Fraction(rows(off)[0]["amount"]) == -total


def test_events_and_report(store, tmp_path):
    events = tmp_path / "events.csv"
    events.write_text("strategy_id,date,event,policy\nCOAL-K-2022,2030-06-30,DEFAULT,CEASE\n")
    assert cep("event", "--store", store, "--file", events)[0] == 0
    code, out = cep("event", "--store", store, "COAL-K-2022", "2031-01-01", "MATURITY")
    assert code == 1
    _, flows = cep("flows", "--store", store)
    coal = [r for r in rows(flows) if r["strategy_id"] == "COAL-K-2022" and r["leg"] == "carbon"]
    assert max(r["date"] for r in coal) <= "2030-06-30"
    code, out = cep("report", "--store", store, "--as-of", "2030-01-01", "--format", "table")
    assert code == 0
    assert out.splitlines()[-1].startswith("PORTFOLIO")


def test_xca_nonpayment_uses_configured_policy(store):
    code, _ = cep("event", "--store", store, "WIND-K-2022", "2026-01-01", "XCA_NONPAYMENT")
    assert code == 1
    code, out = cep("event", "--store", store, "--xca-default-policy", "continue",
                    "WIND-K-2022", "2026-01-01", "XCA_NONPAYMENT")
    assert code == 0
    assert rows(out)[0]["state"] == "Defaulted"


def test_permit_commands(store):
    assert cep("permit", "grant", "EUA-1", "--store", store, "--holder", "A", "--grantor", "GOV",
               "--volume", "1000", "--window-start", "2025-01-01", "--window-end", "2025-12-31")[0] == 0
    code, out = cep("permit", "exercise", "EUA-1", "--store", store, "--date", "2025-12-31", "--amount", "400")
    assert code == 0
    assert rows(out)[0]["amount"] == "-400"
    assert cep("permit", "exercise", "EUA-1", "--store", store, "--date", "2025-06-01", "--amount", "700")[0] == 1
    _, out = cep("permit", "list", "--store", store)
    assert rows(out)[0]["remaining"] == "600"


def test_output_is_deterministic(store):
    first = cep("report", "--store", store, "--as-of", "2050-06-30")
    assert first == cep("report", "--store", store, "--as-of", "2050-06-30")


def test_env_store_default(store, monkeypatch):
    monkeypatch.setenv("CEP_STORE", str(store))
    code, out = cep("summarize", "--as-of", "2030-01-01")
    assert code == 0 and len(rows(out)) == 3


def test_usage_errors_exit_2(store, tmp_path, monkeypatch):
    monkeypatch.delenv("CEP_STORE", raising=False)
    assert cep("nonsense")[0] == 2
    assert cep("summarize", "--store", store, "--decay-rate", "-100")[0] == 2
    assert cep("summarize", "--store", store, "--as-of", "2030-13-01")[0] == 2
    assert cep("summarize")[0] == 2
    assert cep("price", "--store", store)[0] == 2


def test_force_rate(store):
    assert cep("summarize", "--store", store, "--as-of", "2072-01-01", "--decay-rate", "0", "--force-rate")[0] == 0


def test_holidays_shift_dates(tmp_path, fixture_path):
    hol = tmp_path / "hol.txt"
    hol.write_text("# closed\n2022-12-29\n")
    _, out = cep("flows", "--holidays", hol, fixture_path("forest"))
    coupon_dates = [r["date"] for r in rows(out) if r["kind"] == "Coupon"]
    assert coupon_dates[0] == "2022-12-30"


def test_domain_error_exit_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert cep("validate", bad)[0] == 1
    assert cep("validate", tmp_path / "missing.json")[0] == 1
