import json
import os

import pytest

from cli import main
from services.dispatch import BAD_INPUT, FAILED, INCONCLUSIVE, OK
from services.fincat import identity_functor, terminal_category
from tests.conftest import arrow_category, base_a, base_b, collapse_span, inclusion, omega_span
from utils.serialization import category_to_file, functor_to_file, write_json


@pytest.fixture
def files(tmp_path):
    """Categories, spans and extensions on disk, referenced by relative names"""
    a, b = base_a(), base_b()
    write_json(category_to_file(a), str(tmp_path / "a.cat"))
    write_json(category_to_file(b), str(tmp_path / "b.cat"))
    write_json(category_to_file(terminal_category()), str(tmp_path / "one.cat"))
    two = arrow_category()
    write_json(category_to_file(two), str(tmp_path / "two.cat"))

    omega = omega_span()
    write_json(category_to_file(omega.source), str(tmp_path / "x.cat"))
    write_json(functor_to_file(omega, source_ref="x.cat", target_ref=["a.cat", "b.cat"]), str(tmp_path / "omega.fun"))

    ident = identity_functor(omega.target)
    write_json(functor_to_file(ident, target_ref=["a.cat", "b.cat"]), str(tmp_path / "identity.fun"))

    collapse = collapse_span()
    write_json(functor_to_file(collapse, target_ref=["a.cat", "one.cat"]), str(tmp_path / "collapse.fun"))

    write_json(functor_to_file(inclusion(two, "0"), target_ref="two.cat"), str(tmp_path / "incl.fun"))
    write_json(functor_to_file(identity_functor(two), source_ref="two.cat", target_ref="two.cat"),
               str(tmp_path / "two.fun"))

    write_json({"name": "broken", "elements": ["0", "1"], "table": [["0", "1"], ["1", "1"]], "unit": "0"},
               str(tmp_path / "broken.grp"))

    z4 = {"0": "0", "1": "1", "2": "2", "3": "3"}
    write_json({"name": "X", "n": 1, "c": "Z2", "b": "Z2", "terms": ["Z4"],
                "maps": [{"0": "0", "1": "1", "2": "0", "3": "1"}, {"0": "0", "1": "2"}]},
               str(tmp_path / "x.ext"))
    write_json({"source": "Z2", "target": "Z2", "map": {"0": "0", "1": "0"}}, str(tmp_path / "zero.hom"))
    write_json({"source": "Z1", "target": "Z2", "map": {"0": "0"}}, str(tmp_path / "point.hom"))
    write_json({"name": "id", "source": "x.ext", "target": "x.ext", "gamma": {"0": "0", "1": "1"},
                "f": [z4], "beta": {"0": "0", "1": "1"}}, str(tmp_path / "id.mor"))
    return tmp_path


def path(files, name: str) -> str:
    return str(files / name)


def run_json(capsys, argv):
    status = main(["--format", "json", *argv])
    return status, json.loads(capsys.readouterr().out)


class TestFibrationCommands:
    def test_regular_span(self, files):
        assert main(["check-regular-span", "--span", path(files, "omega.fun")]) == OK

    def test_two_sided_fails_on_comparison(self, files, capsys):
        status, report = run_json(capsys, ["check-regular-span", "--two-sided", "--span", path(files, "omega.fun")])
        assert status == FAILED
        assert [v["property"] for v in report["verdicts"]] == ["regular span", "two-sided fibration"]
        assert report["verdicts"][1]["witness"]["omega"] == "e"

    def test_condition_c(self, files):
        assert main(["check-condition-c", "--span", path(files, "omega.fun")]) == FAILED
        assert main(["check-condition-c", "--span", path(files, "identity.fun")]) == OK

    def test_check_fibration_property(self, files, capsys):
        status, report = run_json(capsys, ["check-fibration", "--property", "opfibration",
                                           "--functor", path(files, "incl.fun")])
        assert status == FAILED
        assert report["verdicts"][0]["witness"] == {"object": "*", "arrow": "u"}
        assert main(["check-fibration", "--property", "discrete-fibration", "--functor", path(files, "incl.fun")]) == OK

    def test_chevalley(self, files):
        assert main(["chevalley", "--functor", path(files, "two.fun")]) == OK
        assert main(["chevalley", "--functor", path(files, "incl.fun")]) == FAILED


class TestFactorizeAndAct:
    def test_emit_bar(self, files):
        out = files / "out"
        assert main(["--out", str(out), "factorize", "--emit-bar", "--span", path(files, "collapse.fun")]) == OK
        assert sorted(os.listdir(out)) == ["bar_f.fun", "bar_p.fun", "bar_x.cat", "blocks.json", "q.fun",
                                           "report.json"]

    def test_emit_bar_needs_out(self, files, capsys):
        status, report = run_json(capsys, ["factorize", "--emit-bar", "--span", path(files, "collapse.fun")])
        assert status == BAD_INPUT
        assert report["error"]["witness"] == {"missing": "out"}

    def test_factorize_needs_product_target(self, files):
        assert main(["factorize", "--span", path(files, "incl.fun")]) == BAD_INPUT

    def test_act(self, files, capsys):
        status, report = run_json(capsys, ["act", "--span", path(files, "identity.fun"),
                                           "--class", "[(a0,b0)]", "--beta", "beta"])
        assert status == OK
        assert report["payload"]["result"] == "[(a0,b1)]"
        assert report["payload"]["members"] == ["(a0,b1)"]


class TestGroupCommands:
    def test_classify(self, capsys):
        assert main(["classify", "--c", "Z2", "--b", "Z2"]) == OK
        assert "classes: 2" in capsys.readouterr().out

    def test_classify_two_fold_is_relative(self, capsys):
        status, report = run_json(capsys, ["classify", "--c", "Z1", "--b", "Z2", "--n", "2"])
        assert status == OK
        assert report["payload"]["classification"]["relative_to_bound"]
        assert report["summary"] == "classes: 1 (relative to order 4)"

    def test_validate_broken_group(self, files):
        assert main(["validate", "--group", path(files, "broken.grp")]) == FAILED
        assert main(["validate", "--group", "S3"]) == OK

    def test_pushforward(self, files, capsys):
        status, report = run_json(capsys, ["pushforward", "--ext", path(files, "x.ext"),
                                           "--beta", path(files, "zero.hom")])
        assert status == OK
        assert len(report["payload"]["extension"]["terms"][0]["elements"]) == 4

    def test_pullback(self, files, capsys):
        status, report = run_json(capsys, ["pullback", "--ext", path(files, "x.ext"),
                                           "--gamma", path(files, "point.hom")])
        assert status == OK
        assert len(report["payload"]["extension"]["terms"][0]["elements"]) == 2

    def test_factorize_identity_morphism(self, files):
        assert main(["factorize-morphism", "--mor", path(files, "id.mor")]) == OK


class TestErrors:
    def test_missing_file(self, files, capsys):
        status, report = run_json(capsys, ["check-fibration", "--functor", path(files, "nowhere.fun")])
        assert status == BAD_INPUT
        assert report["error"]["error"] == "InputError"

    def test_schema_error_is_bad_input(self, files, capsys):
        write_json({"name": "broken", "objects": ["x"]}, path(files, "broken.cat"))
        status, report = run_json(capsys, ["validate", "--category", path(files, "broken.cat")])
        assert status == BAD_INPUT
        assert report["error"]["error"] == "InputError"

    def test_invalid_bound(self, files):
        assert main(["--max-arrows", "0", "check-fibration", "--functor", path(files, "incl.fun")]) == BAD_INPUT

    def test_bound_exceeded(self, files):
        assert main(["--max-arrows", "2", "check-fibration", "--functor", path(files, "two.fun")]) == INCONCLUSIVE

    def test_report_written_to_out(self, files):
        out = files / "reports"
        main(["--out", str(out), "classify", "--c", "Z2", "--b", "Z3"])
        with open(out / "report.json", encoding="utf-8") as fh:
            assert json.load(fh)["summary"] == "classes: 1"
