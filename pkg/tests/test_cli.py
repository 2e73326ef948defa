"""Command-line interface: exit codes, output, and determinism."""

import json

import pytest

from catdb.cli import run_cli
from tests.conftest import FIXTURES

GROUP = str(FIXTURES / "group.cdb")
WORKSPACE = str(FIXTURES / "paper.cdb")


def run(capsys, *argv):
    code = run_cli(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCheck:
    def test_employee_workspace(self, capsys):
        code, out, _ = run(capsys, "check", WORKSPACE)
        assert code == 0
        assert out.startswith("ok (")

    def test_group_workspace(self, capsys):
        code, out, _ = run(capsys, "check", GROUP)
        assert code == 0 and "1 theories" in out


class TestComplete:
    def test_group_rules(self, capsys):
        code, out, _ = run(capsys, "complete", GROUP, "--theory", "Grp")
        assert code == 0
        lines = [l for l in out.splitlines() if "~>" in l]
        assert len(lines) == 10
        assert "*(1, x) ~> x" in out
        assert "*(x, y).inv ~> *(y.inv, x.inv)" in out

    def test_unknown_theory(self, capsys):
        code, _, err = run(capsys, "complete", GROUP, "--theory", "Nope")
        assert code == 2 and "Nope" in err


class TestEq:
    def test_equal_words(self, capsys):
        code, out, _ = run(capsys, "eq", GROUP, "--theory", "Grp",
                           "(inv(a)*a)*(b*inv(b))", "b*((inv(a*b))*a)")
        assert code == 0 and out.strip() == "Equal"

    def test_not_equal_words(self, capsys):
        code, out, _ = run(capsys, "eq", GROUP, "--theory", "Grp",
                           "1*(a*b)", "b*(1*a)")
        assert code == 0 and out.strip() == "NotEqual"

    def test_bad_term_is_domain_error(self, capsys):
        code, _, err = run(capsys, "eq", GROUP, "--theory", "Grp",
                           "a*nonsense", "a")
        assert code == 1 and "nonsense" in err


class TestSaturate:
    def test_employee_tables(self, capsys):
        code, out, _ = run(capsys, "saturate", WORKSPACE, "--instance", "J")
        assert code == 0
        assert '"Hypatia"' in out and "null x : Int" in out
        assert "(150 <= x) = true" in out

    def test_json_format_matches_ascii_data(self, capsys):
        code, out, _ = run(capsys, "saturate", WORKSPACE, "--instance", "J",
                           "--format", "json")
        assert code == 0
        data = json.loads(out)
        assert set(data["entities"]) == {"Emp", "Dept"}
        assert len(data["entities"]["Emp"]["rows"]) == 7
        code2, ascii_out, _ = run(capsys, "saturate", WORKSPACE,
                                  "--instance", "J")
        for row in data["entities"]["Emp"]["rows"]:
            for cell in row:
                assert cell in ascii_out

    def test_missing_file_is_usage_error(self, capsys):
        code, _, err = run(capsys, "saturate", "missing.cdb",
                           "--instance", "J")
        assert code == 2 and "missing.cdb" in err

    def test_unknown_instance_is_usage_error(self, capsys):
        code, _, err = run(capsys, "saturate", WORKSPACE, "--instance", "ZZ")
        assert code == 2 and "ZZ" in err


class TestHoms:
    def test_frozen_to_employees(self, capsys):
        code, out, _ = run(capsys, "homs", WORKSPACE, "--from", "I", "--to", "J")
        assert code == 0
        assert out.strip().splitlines()[-1] == "count: 3"

    def test_presented_transforms(self, capsys):
        code, out, _ = run(capsys, "homs", WORKSPACE, "--from", "I",
                           "--to", "I'")
        assert code == 0
        assert "[e := e', d := e'.wrk]" in out
        assert "[e := e'.wrk.sec, d := e'.wrk]" in out
        assert out.strip().splitlines()[-1] == "count: 2"


class TestQuery:
    def test_three_row_result(self, capsys):
        code, out, _ = run(capsys, "query", WORKSPACE, "--query", "Q",
                           "--instance", "J")
        assert code == 0
        for needle in ('"Noether"', '"Euclid"', '"HR"', '"Admin"',
                       "100", "150"):
            assert needle in out

    def test_crosscheck(self, capsys):
        code, out, _ = run(capsys, "query", WORKSPACE, "--query", "Q",
                           "--instance", "J", "--crosscheck")
        assert code == 0 and "crosscheck: ok" in out

    def test_uber_query(self, capsys):
        code, out, _ = run(capsys, "query", WORKSPACE, "--query", "N",
                           "--instance", "J")
        assert code == 0 and '"Euclid"' in out and "A'" in out


class TestMigrate:
    def test_pi(self, capsys):
        code, out, _ = run(capsys, "migrate", WORKSPACE, "--mapping", "G",
                           "--instance", "J", "--mode", "pi")
        assert code == 0 and "QR" in out
        qr_block = out[out.index("QR"):]
        assert qr_block.count("qr") >= 3

    def test_delta(self, capsys):
        code, out, _ = run(capsys, "migrate", WORKSPACE, "--mapping", "G",
                           "--instance", "J", "--mode", "delta")
        assert code == 0 and '"Hypatia"' in out and "QR" not in out

    def test_sigma_presentation_then_saturated(self, capsys):
        code, out, _ = run(capsys, "migrate", WORKSPACE, "--mapping", "H",
                           "--instance", "J", "--mode", "sigma")
        assert code == 0 and out.startswith("generators")
        code, out, _ = run(capsys, "migrate", WORKSPACE, "--mapping", "H",
                           "--instance", "J", "--mode", "sigma",
                           "--saturate")
        assert code == 0 and "Team" in out


class TestUsage:
    def test_no_command(self, capsys):
        assert run(capsys, )[0] == 2

    def test_unknown_flag(self, capsys):
        assert run(capsys, "check", WORKSPACE, "--bogus")[0] == 2

    def test_help_exits_zero(self, capsys):
        assert run(capsys, "--help")[0] == 0


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ("saturate", WORKSPACE, "--instance", "J"),
        ("complete", GROUP, "--theory", "Grp"),
        ("query", WORKSPACE, "--query", "Q", "--instance", "J"),
        ("migrate", WORKSPACE, "--mapping", "H", "--instance", "J",
         "--mode", "sigma", "--saturate"),
    ])
    def test_byte_identical_output(self, capsys, argv):
        _, out1, _ = run(capsys, *argv)
        _, out2, _ = run(capsys, *argv)
        assert out1 == out2
