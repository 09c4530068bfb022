"""Tests for scenario loading, validation and serialization."""

import copy
import json

import pytest
import yaml

from config import DEFAULT_SCENARIO
from engine.errors import NonRationalValue, ScenarioReferenceError, SchemaError
from engine.exact_core import Poly1
from engine.scenario_parser import (
    ScenarioParser,
    parse_scenario,
    parse_scenario_text,
    serialize_scenario,
)
from engine.threefold_ring import ThreefoldClass


@pytest.fixture
def raw():
    return json.loads(DEFAULT_SCENARIO.read_text(encoding="utf-8"))


def parse(raw):
    return ScenarioParser("test").parse(raw)


class TestShippedScenario:

    def test_contents(self, scenario):
        assert set(scenario.surfaces) == {"quadric", "F0", "F2", "dP5"}
        assert set(scenario.tables) == {"qtilde", "E", "H"}
        assert len(scenario.restrictions) == 4
        assert scenario.divisors["Qtilde"] == ThreefoldClass(2, -1)
        assert scenario.form.anticanonical_degree == 30

    def test_tables_carry_polynomials(self, scenario):
        piece = scenario.tables["E"].pieces[1]
        assert piece.negative[0].label == "Qtilde"
        assert piece.negative[0].coefficient == Poly1((-1, 3))

    def test_case_ids_are_sorted_and_filtered(self, scenario):
        ids = scenario.case_ids()
        assert ids == sorted(ids)
        thresholds = scenario.case_ids("thresholds")
        assert set(thresholds) == {"pseff-qtilde", "pseff-E", "pseff-H", "nef-qtilde", "nef-E", "nef-H"}

    def test_curve_cases(self, scenario):
        assert scenario.curve_cases["star"].symbolic
        f, g = scenario.curve_cases["example"].forms()
        assert f.coeffs == (0, 0, 0, 1)
        assert g.coeffs == (1, 1, 0, 0)


class TestValidation:

    def test_asymmetric_gram(self, raw):
        raw["surfaces"].append({
            "id": "bad", "kind": "custom", "basis": ["a", "b"],
            "gram": [["0", "1"], ["2", "0"]], "negative_curves": {"a": ["1", "0"]},
        })
        with pytest.raises(SchemaError, match="not symmetric"):
            parse(raw)

    def test_decimal_value(self, raw):
        raw["tables"][0]["pieces"][0]["hi"] = "0.5"
        with pytest.raises(NonRationalValue, match="tables"):
            parse(raw)

    def test_float_value(self, raw):
        raw["threefold"]["tensor"]["EEE"] = -14.0
        with pytest.raises(NonRationalValue):
            parse(raw)

    def test_missing_section(self, raw):
        del raw["tables"]
        with pytest.raises(SchemaError, match="tables"):
            parse(raw)

    def test_unknown_key(self, raw):
        raw["surfaces"][0]["colour"] = "red"
        with pytest.raises(SchemaError):
            parse(raw)

    def test_non_hirzebruch_keys_in_threefold_class(self, raw):
        raw["threefold"]["divisors"]["bad"] = {"H": "1", "L": "1"}
        with pytest.raises(SchemaError, match="H and E"):
            parse(raw)

    def test_hirzebruch_needs_n(self, raw):
        del raw["surfaces"][1]["n"]
        with pytest.raises(SchemaError):
            parse(raw)

    def test_json_syntax_error(self):
        with pytest.raises(SchemaError, match="line"):
            parse_scenario_text('{"surfaces": [}', "broken.json")

    def test_json_syntax_error_in_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "surfaces": \n}', encoding="utf-8")
        with pytest.raises(SchemaError, match="line 3"):
            parse_scenario(path)


class TestReferences:

    def test_duplicate_case_id(self, raw):
        raw["expected"].append(copy.deepcopy(raw["expected"][0]))
        with pytest.raises(SchemaError, match="duplicate"):
            parse(raw)

    def test_dangling_table(self, raw):
        raw["flag_cases"][0]["table"] = "missing"
        with pytest.raises(ScenarioReferenceError, match="missing"):
            parse(raw)

    def test_dangling_input(self, raw):
        raw["expected"][0]["inputs"]["divisor"] = "nowhere"
        with pytest.raises(ScenarioReferenceError, match="nowhere"):
            parse(raw)

    def test_unknown_oracle(self, raw):
        raw["expected"][0]["oracle"] = "no-such-oracle"
        with pytest.raises(ScenarioReferenceError, match="oracle"):
            parse(raw)

    def test_unknown_curve_label(self, raw):
        raw["flag_cases"][0]["z"] = {"l": "1"}
        with pytest.raises(ScenarioReferenceError):
            parse(raw)

    def test_flag_case_needs_known_curves(self, raw):
        case = next(c for c in raw["flag_cases"] if c["id"] == "H-point-l12-l34")
        case["curve_multiplicity"] = {"l56": 1}
        with pytest.raises(ScenarioReferenceError):
            parse(raw)

    def test_point_case_without_flag_case(self, raw):
        case = next(c for c in raw["expected"] if c["kind"] == "s_point")
        del case["inputs"]["flag_case"]
        with pytest.raises(SchemaError, match="flag_case"):
            parse(raw)

    def test_hirzebruch_dot_needs_a_divisor(self, raw):
        case = next(c for c in raw["expected"] if c["kind"] == "hirzebruch_dot")
        del case["inputs"]["divisor"]
        with pytest.raises(SchemaError, match="divisor"):
            parse(raw)

    def test_unknown_displayed_integrand(self, raw):
        case = next(c for c in raw["expected"] if c["kind"] == "displayed_integral")
        case["inputs"]["integrand"] = "nowhere"
        with pytest.raises(ScenarioReferenceError, match="nowhere"):
            parse(raw)


class TestFormats:

    def test_yaml(self, raw, tmp_path):
        path = tmp_path / "scenario.yaml"
        path.write_text(yaml.safe_dump(raw, allow_unicode=True), encoding="utf-8")
        scenario = parse_scenario(path)
        assert set(scenario.tables) == {"qtilde", "E", "H"}

    def test_yaml_syntax_error(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("surfaces: [\n  - id: x\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            parse_scenario(path)

    def test_serialize_then_parse(self, scenario):
        text = serialize_scenario(scenario)
        again = parse_scenario_text(text, "roundtrip")
        assert again.case_ids() == scenario.case_ids()
        assert serialize_scenario(again) == text
        assert '"1783/3240"' in text
