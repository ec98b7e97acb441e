import json
import os
from pathlib import Path

import pytest

import ontorules

FIXTURES = Path(os.environ.get("ONTORULES_FIXTURE_DIR", Path(__file__).resolve().parents[2] / "fixtures"))
CASE = FIXTURES / "case_study"


@pytest.fixture(scope="module")
def case():
    ds = ontorules.Dataset.load_csv_file(str(CASE / "survey.csv"))
    onto = ontorules.Ontology.parse_file(str(CASE / "ontology.json"))
    rules = ontorules.read_rules((CASE / "rules.tsv").read_text(), ds)
    return ds, onto, rules


def test_mine_four_transactions():
    ds = ontorules.Dataset.load_csv("a,b,c\n1,1,\n1,,\n,1,\n1,1,1\n")
    rules = ontorules.mine(ds, min_sup=0.5, min_conf=0.6)
    got = {(tuple(r.antecedent), tuple(r.consequent)): (r.count_xy, r.count_x, r.n) for r in rules}
    assert got == {(("a=1",), ("b=1",)): (2, 3, 4), (("b=1",), ("a=1",)): (2, 3, 4)}
    assert ds.support([]) == (4, 4)


def test_rules_round_trip(case):
    ds, _, rules = case
    assert len(rules) == 22
    again = ontorules.read_rules(ontorules.write_rules(rules), ds)
    assert [(r.antecedent, r.consequent) for r in again] == [(r.antecedent, r.consequent) for r in rules]


def test_extensions(case):
    ds, onto, _ = case
    assert ontorules.item_extension(onto, "Q1", ds) == ["q1=1", "q1=2", "q1=3", "q1=4", "q1=95", "q1=99"]
    sat = ontorules.item_extension(onto, '{"concept": "SatisfComfortApartment"}', ds)
    assert len(sat) == 10
    assert "Q3" in onto.leaves_under("District")


def test_script_parse_and_format():
    script = ontorules.parse_script((CASE / "operators.rsl").read_text())
    assert [name for name, _ in script.schemas] == ["RS1", "RS2", "RS3", "RS4", "RS5"]
    assert script.operators[-1] == "unexpected(condition) RS5"
    assert ontorules.format_schema(script, "RS3") == "<UnsatPrice, UnsatCalmDistrict>"
    again = ontorules.parse_script(ontorules.format_script(script))
    assert again.schemas == script.schemas


def test_session_run_undo_persist(case):
    ds, onto, rules = case
    s = ontorules.Session(ds, onto, rules)
    log = s.run_script((CASE / "operators.rsl").read_text())
    assert [e["after"] for e in log] == [19, 17, 3, 2, 4]
    unexpected = s.results[log[-1]["result"]]
    assert {(" ".join(r.antecedent), r.consequent[0]) for r in unexpected} == {
        ("q62=4 q64=4", "q63=4"),
        ("q64=4 q97=4", "q73=4"),
        ("q62=4 q72=4", "q63=4"),
        ("q58=4 q59=4 q62=4", "q63=4"),
    }
    report = json.loads(s.report())
    assert report["working_count"] == 17

    restored = ontorules.Session.restore(s.persist(), ds, onto, rules)
    assert restored.log == s.log
    s.undo()
    assert len(s.log) == 4


def test_errors_carry_codes(case):
    ds, onto, rules = case
    with pytest.raises(ontorules.Error) as info:
        ontorules.parse_script("schema S: <A,, B>\n")
    assert info.value.code == "parse_error"
    assert info.value.line == 1
    s = ontorules.Session(ds, onto, rules)
    with pytest.raises(ontorules.Error) as info:
        s.undo()
    assert info.value.code == "nothing_to_undo"
    with pytest.raises(ontorules.Error) as info:
        ontorules.mine(ds, min_sup=0.5, max_sup=0.4)
    assert info.value.code == "config_error"
