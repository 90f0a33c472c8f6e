"""Command-line front end: exit codes, output formats, round trips.

All invocations go through cli.main(argv) in-process so exit codes and
stdout can be asserted directly.
"""

import csv
import io
import json

import pytest

from wkserver import cli, lemma_checks
from wkserver.constants import ConstantTable, build_constants
from wkserver.errors import NonConvergenceError
from wkserver.potentials import PotentialTable, solve_direct
from wkserver.reports import CheckReport


def invoke(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


# ---------------------------------------------------------------------------
# happy paths and round trips
# ---------------------------------------------------------------------------


def test_constants_json_round_trip(capsys):
    code, out = invoke(capsys, "constants", "--k", "3", "--out", "json")
    assert code == cli.EXIT_OK
    obj = json.loads(out)
    table = ConstantTable.from_json(json.dumps(obj["table"]))
    assert table == build_constants(3)
    assert obj["identities"]["passed"] is True
    assert obj["growth"]["passed"] is True
    assert obj["alpha_k_below_1.6^(2^k)"] is True


def test_potentials_json_matches_library(capsys):
    code, out = invoke(capsys, "potentials", "--p", "3,2", "--out", "json")
    assert code == cli.EXIT_OK
    back = PotentialTable.from_json(out)
    lib = solve_direct(2, (3.0, 2.0))
    assert back.phi == lib.phi
    assert back.f == lib.f
    assert back.backend == "direct"


def test_ratio_json_fields(capsys):
    code, out = invoke(capsys, "ratio", "--beta", "1,10", "--optimal",
                       "--out", "json")
    assert code == cli.EXIT_OK
    obj = json.loads(out)
    assert obj["alpha_tilde"] == pytest.approx(5.0, rel=1e-12)
    assert obj["arg_t"] == 2
    assert obj["p"] == [3.0, 0.2]
    assert obj["p_mode"] == "optimal"


def test_verify_passes_and_reports(capsys):
    code, out = invoke(capsys, "verify", "--k", "2", "--trials", "1",
                       "--out", "json")
    assert code == cli.EXIT_OK
    obj = json.loads(out)
    assert obj["failures"] == 0
    assert obj["checks"] > 0


def test_simulate_deterministic_output(capsys):
    argv = ("simulate", "--beta", "1,10", "--optimal", "--steps", "2000",
            "--trials", "2", "--seed", "9", "--out", "json")
    code1, out1 = invoke(capsys, *argv)
    code2, out2 = invoke(capsys, *argv)
    assert code1 == code2 == cli.EXIT_OK
    assert out1 == out2
    obj = json.loads(out1)
    assert len(obj["per_trial"]) == 2
    assert obj["pooled"]["in_band"] is True
    assert obj["pooled"]["sigma"] is not None
    assert obj["audit_failures"] == 0


def test_sweep_csv_parses(capsys):
    code, out = invoke(capsys, "sweep", "--k", "2", "--r", "10,100",
                       "--out", "csv")
    assert code == cli.EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["report", "check", "S", "i", "lhs", "rhs",
                       "defect", "pass"]
    assert len(rows) > 4


def test_human_output_default(capsys):
    code, out = invoke(capsys, "constants", "--k", "2")
    assert code == cli.EXIT_OK
    assert "alpha" in out


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------


def test_usage_errors_exit_1(capsys):
    for argv in (
        ("constants", "--k", "0"),
        ("constants", "--k", "99"),
        ("ratio", "--beta", "1,10", "--p", "1,2"),       # p not monotone
        ("ratio", "--beta", "1,10"),                     # no p choice
        ("potentials",),                                 # nothing to solve
        ("simulate", "--beta", "1,10", "--optimal", "--trials", "2",
         "--transcript", "/tmp/nope.csv"),               # transcript: 1 trial
        ("sweep", "--k", "2"),                           # missing --r
        ("sweep", "--k", "2", "--r", "100,10"),          # not increasing
    ):
        code = cli.main(list(argv))
        capsys.readouterr()
        assert code == cli.EXIT_USAGE, argv


def test_bad_flags_exit_1():
    # argparse's own error path is rerouted from its default exit 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["constants", "--k", "notanumber"])
    assert exc.value.code == cli.EXIT_USAGE


def test_failed_checks_exit_2(capsys, monkeypatch):
    # wire a failing report through the verify aggregation
    def broken(table, slack=lemma_checks.SLACK_DEFAULT):
        rep = CheckReport("tight-system")
        rep.add("tight-system", 0, 1, 1.0, 2.0, 1.0, False)
        return rep
    monkeypatch.setattr(cli.lemma_checks, "verify_tight_system", broken)
    code, out = invoke(capsys, "verify", "--k", "2", "--trials", "1",
                       "--out", "json")
    assert code == cli.EXIT_VERIFY
    assert json.loads(out)["failures"] > 0


def test_internal_errors_exit_3(capsys, monkeypatch):
    def explode(args):
        raise NonConvergenceError("no convergence")
    monkeypatch.setattr(cli, "cmd_potentials", explode)
    # reroute through the parser-bound function table
    parser = cli.build_parser()
    args = parser.parse_args(["potentials", "--p", "3,2"])
    monkeypatch.setattr(args, "func", explode, raising=False)
    # simplest end-to-end: gs backend with pathological max_sweeps is
    # not reachable from the CLI, so check main()'s mapping directly
    monkeypatch.setattr(cli, "build_parser", lambda: parser)
    parser.parse_args = lambda argv=None: args
    code = cli.main(["potentials", "--p", "3,2"])
    capsys.readouterr()
    assert code == cli.EXIT_INTERNAL


def test_verify_zero_trials_trivially_green(capsys):
    code, out = invoke(capsys, "verify", "--k", "2", "--trials", "0",
                       "--out", "json")
    assert code == cli.EXIT_OK
    assert json.loads(out)["checks"] == 0


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def test_sample_monotone_p():
    import numpy as np
    rng = np.random.default_rng(0)
    for k in (1, 3, 6):
        p = cli.sample_monotone_p(rng, k)
        assert len(p) == k
        assert all(x > 0 for x in p)
        assert all(a >= b for a, b in zip(p, p[1:]))


def test_float_list_parsing():
    assert tuple(cli._float_list("1,2.5,3")) == (1.0, 2.5, 3.0)
    import argparse
    with pytest.raises(argparse.ArgumentTypeError):
        cli._float_list("1,,2")
    with pytest.raises(argparse.ArgumentTypeError):
        cli._float_list("abc")
