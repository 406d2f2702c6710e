import io
import json

import pytest

from chensieve.bound_tables import PRINTED_H, PRINTED_h
from chensieve.cli import RunConfig, parse_config_text, resolve_config, run
from chensieve.constant_engine import TermBreakdown
from chensieve.errors import DomainError


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def test_omega():
    assert call("omega", "--u", "1.5") == (0, "0.6666667\n")


def test_omega_domain_error_exit_2():
    assert call("omega", "--u", "0.5")[0] == 2


def test_unknown_subcommand_exit_64():
    assert call("frobnicate")[0] == 64


def test_tables_csv_matches_printed():
    code, text = call("tables", "--format", "csv")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "table,i,s,bound"
    for line in lines[1:]:
        name, i, _, v = line.split(",")
        ref = (PRINTED_H if name == "H" else PRINTED_h)[int(i)]
        assert abs(float(v) - ref) <= 5e-7


def test_tables_json_shape():
    code, text = call("tables")
    d = json.loads(text)
    assert d["H"][0] == {"i": 2, "s": 2.2, "bound": 0.0223939}


def test_constant_default_run(terms):
    code, text = call("constant", "--kappa1-inv", "13.27", "--kappa2-inv", "8.24")
    assert code == 0
    back = TermBreakdown.from_json(text)
    assert back.final > 0.899
    assert back.F == terms.F and back.final == terms.final


def test_constant_invalid_kappa():
    assert call("constant", "--kappa1-inv", "8", "--kappa2-inv", "8")[0] == 2


def test_scan(tmp_path):
    grid = tmp_path / "g.csv"
    grid.write_text("kappa1_inv,kappa2_inv\n13.27,8.24\n8,8\n")
    code, text = call("scan", "--grid", str(grid))
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "rank,kappa1_inv,kappa2_inv,final" and len(lines) == 2
    assert float(lines[1].split(",")[3]) > 0.899


def test_empirical_csv(tmp_path):
    out = tmp_path / "r.csv"
    code, _ = call("empirical", "--n-max", "1000", "--step", "10", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "N,D,D12,C_N,Theta,D_over_2Theta,D12_over_Theta"
    assert lines[1].startswith("10,3,3,")


@pytest.mark.parametrize("sub", ["", "tables", "constant", "scan", "empirical", "omega"])
def test_help(sub, capsys):
    argv = ([sub] if sub else []) + ["--help"]
    assert run(argv) == 0
    text = capsys.readouterr().out
    assert "usage" in text and "--format" in text if sub else "usage" in text


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text("# comment\ntol = 2\npmax=5000\nformat=csv\n")
    assert resolve_config(str(cfg), env={}).tol == 2.0
    env = {"CHENSIEVE_TOL": "3", "CHENSIEVE_EXACT_OMEGA": "yes"}
    r = resolve_config(str(cfg), env=env)
    assert (r.tol, r.pmax, r.exact_omega) == (3.0, 5000, True)
    assert resolve_config(str(cfg), env=env, tol=0.5).tol == 0.5


def test_config_errors():
    with pytest.raises(DomainError):
        parse_config_text("nonsense")
    with pytest.raises(DomainError):
        parse_config_text("colour = blue")
    with pytest.raises(DomainError):
        RunConfig(format="xml")
    with pytest.raises(DomainError):
        RunConfig(tol=0)


def test_env_format(monkeypatch):
    monkeypatch.setenv("CHENSIEVE_FORMAT", "json")
    code, text = call("omega", "--u", "2.5")
    assert json.loads(text)[0]["omega"] == pytest.approx(0.5621860)
