import json
from fractions import Fraction

import pytest

from qlattice.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out.strip(), out.err.strip()


class TestKernelCommands:
    def test_link_json(self, capsys):
        code, out, _ = run(capsys, "kernel", "link", "--x", "+:2,+:0")
        assert code == 0
        assert json.loads(out) == {"(+:0)": "2/3", "(+:1)": "1/3", "tail": "0"}

    def test_link_csv(self, capsys):
        code, out, _ = run(capsys, "kernel", "link", "--x", "+:2,+:0", "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "config,weight,tail_bound"
        assert "(+:0),2/3,0" in lines

    def test_compose(self, capsys):
        code, out, _ = run(capsys, "kernel", "compose", "--x", "+:3,+:2,+:0", "--k", "1")
        assert code == 0
        table = json.loads(out)
        assert sum(Fraction(v) for k, v in table.items() if k != "tail") == 1

    def test_closed_entry(self, capsys):
        code, out, _ = run(capsys, "kernel", "closed", "--x", "+:2,+:0", "--y", "+:1")
        assert code == 0
        assert json.loads(out) == {"value": "1/3"}

    def test_closed_multi_point(self, capsys):
        code, out, _ = run(
            capsys, "kernel", "closed", "--x", "+:3,+:2,+:0", "--y", "+:2,+:0"
        )
        assert code == 0
        val = Fraction(json.loads(out)["value"])
        assert 0 < val < 1

    def test_zeros_in_x(self, capsys):
        code, out, _ = run(capsys, "kernel", "link", "--x", "0,0,+:0", "--min-abs", "1/4096")
        assert code == 0
        table = json.loads(out)
        assert "(0,+:0)" in table

    def test_byte_determinism(self, capsys):
        a = run(capsys, "kernel", "link", "--x=-:0,+:0", "--min-abs", "1/1024")
        b = run(capsys, "kernel", "link", "--x=-:0,+:0", "--min-abs", "1/1024")
        assert a == b

    def test_malformed_config(self, capsys):
        code, _out, err = run(capsys, "kernel", "link", "--x", "bogus")
        assert code == 2
        assert "error" in err


class TestSplineCommands:
    def test_moment_example(self, capsys):
        code, out, _ = run(capsys, "spline", "moments", "--x", "+:2,+:0", "--m", "1")
        assert code == 0
        assert out == "5/6"

    def test_table(self, capsys):
        code, out, _ = run(capsys, "spline", "table", "--x", "+:2,+:0")
        assert code == 0
        assert json.loads(out) == {"(+:0)": "2/3", "(+:1)": "1/3", "tail": "0"}


class TestTransformCommands:
    def test_forward_exact(self, capsys):
        code, out, _ = run(
            capsys, "transform", "fwd", "--atoms", "+:0=1", "--z", "0,2", "--order", "2"
        )
        assert code == 0
        got = json.loads(out)
        assert Fraction(got["re"]) == Fraction(56, 85)
        assert Fraction(got["im"]) == Fraction(-48, 85)

    def test_inverse_roundtrip(self, capsys):
        code, out, _ = run(
            capsys,
            "transform",
            "inv",
            "--atoms",
            "+:0=1/3,+:1=2/3",
            "--y",
            "+:1",
            "--order",
            "3",
            "--precision",
            "32",
        )
        assert code == 0
        got = json.loads(out)
        assert abs(float(got["re"]) - 2 / 3) < 1e-6

    def test_bad_order(self, capsys):
        code, _out, err = run(
            capsys, "transform", "fwd", "--atoms", "+:0=1", "--z", "0,2", "--order", "1"
        )
        assert code == 2


class TestBoundaryCommands:
    def test_family(self, capsys):
        code, out, _ = run(
            capsys, "boundary", "family", "--x", "+:0", "--kmax", "1", "--min-abs", "1/4096"
        )
        assert code == 0
        payload = json.loads(out)
        assert "1" in payload
        assert float(payload["1"]["(+:0)"]) == pytest.approx(0.2887880950866, abs=1e-9)

    def test_check(self, capsys):
        code, out, _ = run(
            capsys,
            "boundary",
            "check",
            "--x",
            "+:0",
            "--k",
            "1",
            "--nu",
            "[1]",
            "--min-abs",
            "1/1048576",
        )
        assert code == 0
        payload = json.loads(out)
        assert float(payload["coherence_residual"]) < 1e-7
        assert float(payload["moment_residual[1]"]) < 1e-7


class TestSampleCommand:
    def test_frequencies(self, capsys):
        code, out, _ = run(
            capsys, "sample", "--x", "+:2,+:0", "--k", "1", "--n-draws", "300", "--seed", "5"
        )
        assert code == 0
        table = json.loads(out)
        assert table["draws"] == "300"
        assert int(table["(+:0)"]) + int(table["(+:1)"]) == 300

    def test_trajectories(self, capsys):
        code, out, _ = run(
            capsys,
            "sample",
            "--x",
            "+:3,+:2,+:0",
            "--k",
            "1",
            "--n-draws",
            "2",
            "--trajectories",
            "--seed",
            "5",
        )
        assert code == 0
        blocks = out.split("--")
        assert len([b for b in blocks if b.strip()]) == 2

    def test_seed_reproducibility(self, capsys):
        a = run(capsys, "sample", "--x", "+:2,+:0", "--k", "1", "--n-draws", "100", "--seed", "9")
        b = run(capsys, "sample", "--x", "+:2,+:0", "--k", "1", "--n-draws", "100", "--seed", "9")
        assert a == b


class TestValidateCommand:
    def test_subset_quick(self, capsys):
        code, out, _ = run(capsys, "validate", "--level", "quick", "--only", "4,6")
        assert code == 0
        assert out.count("PASS") == 2
        assert out.splitlines()[-1].startswith("OK")


class TestArgumentValidation:
    def test_precision_floor(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["kernel", "link", "--x", "+:1,+:0", "--precision", "8"])
        assert exc.value.code == 2

    def test_bad_rational(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["kernel", "link", "--x", "+:1,+:0", "--q", "abc"])
        assert exc.value.code == 2

    def test_missing_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
