"""Scenario parser: turns a JSON/YAML scenario file into engine objects."""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml
from loguru import logger
from pydantic import ValidationError

from engine.errors import LatticeMismatch, NonRationalValue, SchemaError, ScenarioReferenceError
from engine.exact_core import Poly1, X, parse_rational
from engine.flag_engine import FlagCase
from engine.oracles import ORACLES
from engine.quartic_curve import BinaryForm, pencil_forms
from engine.surface_lattice import (
    DivisorClass,
    SurfaceKind,
    SurfaceLattice,
    make_custom_surface,
    make_surface,
)
from engine.threefold_ring import (
    NakayamaPiece,
    NakayamaTable,
    NegativeTerm,
    RestrictionMap,
    ThreefoldClass,
    TripleForm,
)
from models import CaseKind, CaseSpec, ScenarioDocument

REFERENCE_INPUTS = {
    "divisor": "divisors",
    "table": "tables",
    "restriction": "restrictions",
    "flag_case": "flag_cases",
    "curve": "curve_cases",
}
REQUIRED_INPUTS = (
    (CaseKind.S_CURVE, "flag_case"),
    (CaseKind.S_POINT, "flag_case"),
    (CaseKind.HIRZEBRUCH_DOT, "divisor"),
    (CaseKind.DISPLAYED_INTEGRAL, "integrand"),
)


@dataclass(frozen=True)
class CurveCase:
    """Parameters of u(x^3 + a x^2 y) = v(y^3 + b y^2 x)."""

    id: str
    a: Optional[Fraction] = None
    b: Optional[Fraction] = None
    symbolic: bool = False

    def forms(self) -> Tuple[BinaryForm, BinaryForm]:
        if self.symbolic:
            return pencil_forms(X, X)
        return pencil_forms(self.a, self.b)


@dataclass
class Scenario:
    """A fully resolved scenario: every id points at a constructed object."""

    source: str
    document: ScenarioDocument
    form: TripleForm
    divisors: Dict[str, ThreefoldClass] = field(default_factory=dict)
    surfaces: Dict[str, SurfaceLattice] = field(default_factory=dict)
    tables: Dict[str, NakayamaTable] = field(default_factory=dict)
    restrictions: Dict[str, RestrictionMap] = field(default_factory=dict)
    flag_cases: Dict[str, FlagCase] = field(default_factory=dict)
    curve_cases: Dict[str, CurveCase] = field(default_factory=dict)
    cases: Dict[str, CaseSpec] = field(default_factory=dict)

    def case_ids(self, tag: Optional[str] = None) -> List[str]:
        return sorted(cid for cid, case in self.cases.items() if tag is None or tag in case.tags)


def _poly(value: Union[str, List[str]]) -> Union[Fraction, Poly1]:
    if isinstance(value, list):
        return Poly1(tuple(parse_rational(c) for c in value))
    return parse_rational(value)


class ScenarioParser:
    """Builds a Scenario from a validated ScenarioDocument."""

    def __init__(self, source: str = "<memory>"):
        self.source = source

    def parse(self, raw: Any) -> Scenario:
        document = self._validate(raw)
        logger.info(f"Building scenario from {self.source}")

        scenario = Scenario(source=self.source, document=document, form=self._build_form(document))
        self._build_divisors(scenario)
        self._build_surfaces(scenario)
        self._build_tables(scenario)
        self._build_restrictions(scenario)
        self._build_flag_cases(scenario)
        self._build_curve_cases(scenario)
        self._register_cases(scenario)

        logger.info(
            f"Parsed scenario {self.source}: {len(scenario.surfaces)} surfaces, "
            f"{len(scenario.tables)} tables, {len(scenario.restrictions)} restriction maps, "
            f"{len(scenario.cases)} cases"
        )
        return scenario

    def _validate(self, raw: Any) -> ScenarioDocument:
        try:
            return ScenarioDocument.model_validate(raw)
        except ValidationError as exc:
            problems = []
            for error in exc.errors():
                location = ".".join(str(part) for part in error["loc"])
                cause = error.get("ctx", {}).get("error")
                if isinstance(cause, NonRationalValue):
                    raise NonRationalValue(f"{self.source}: {location}: {cause}") from None
                problems.append(f"{location}: {error['msg']}")
            raise SchemaError(f"{self.source}: " + "; ".join(problems)) from None

    def _build_form(self, document: ScenarioDocument) -> TripleForm:
        spec = document.threefold
        tensor = tuple(parse_rational(spec.tensor[key]) for key in ("HHH", "HHE", "HEE", "EEE"))
        return TripleForm(
            tensor,
            anticanonical=self._threefold_class(spec.anticanonical, "anticanonical"),
            effective_cone=tuple(self._threefold_class(g, "effective_cone") for g in spec.effective_cone),
            nef_cone=tuple(self._threefold_class(g, "nef_cone") for g in spec.nef_cone),
        )

    def _threefold_class(self, spec: Dict[str, Any], where: str) -> ThreefoldClass:
        unknown = set(spec) - {"H", "E"}
        if unknown:
            raise SchemaError(f"{self.source}: {where}: threefold classes use H and E, got {sorted(unknown)}")
        return ThreefoldClass(_poly(spec.get("H", "0")), _poly(spec.get("E", "0")))

    def _build_divisors(self, scenario: Scenario) -> None:
        for name, spec in scenario.document.threefold.divisors.items():
            scenario.divisors[name] = self._threefold_class(spec, f"divisors.{name}")

    def _build_surfaces(self, scenario: Scenario) -> None:
        for spec in scenario.document.surfaces:
            self._unique(scenario.surfaces, spec.id, "surface")
            try:
                if spec.kind == SurfaceKind.CUSTOM.value:
                    lattice = make_custom_surface(
                        spec.id,
                        spec.basis,
                        spec.gram,
                        spec.negative_curves,
                        spec.effective_generators,
                    )
                else:
                    lattice = make_surface(SurfaceKind(spec.kind), spec.n, name=spec.id)
            except ValueError as exc:
                raise SchemaError(f"{self.source}: surface {spec.id}: {exc}") from None
            scenario.surfaces[spec.id] = lattice

    def _divisor(self, scenario: Scenario, name: str, where: str) -> ThreefoldClass:
        if name not in scenario.divisors:
            raise ScenarioReferenceError(f"{self.source}: {where}: unknown divisor {name!r}")
        return scenario.divisors[name]

    def _surface_class(self, lattice: SurfaceLattice, spec: Dict[str, str], where: str) -> DivisorClass:
        try:
            return lattice.from_mapping(spec)
        except LatticeMismatch as exc:
            raise ScenarioReferenceError(f"{self.source}: {where}: {exc}") from None

    def _build_tables(self, scenario: Scenario) -> None:
        for spec in scenario.document.tables:
            self._unique(scenario.tables, spec.id, "table")
            pieces = []
            for index, piece in enumerate(spec.pieces):
                where = f"tables.{spec.id}.pieces.{index}"
                negative = tuple(
                    NegativeTerm(
                        label=term.divisor,
                        divisor=self._divisor(scenario, term.divisor, where),
                        coefficient=Poly1._coerce(_poly(term.coefficient)),
                    )
                    for term in piece.negative
                )
                pieces.append(NakayamaPiece(
                    parse_rational(piece.lo),
                    parse_rational(piece.hi),
                    self._threefold_class(piece.positive, where),
                    negative,
                ))
            scenario.tables[spec.id] = NakayamaTable(
                name=spec.id,
                divisor_label=spec.divisor,
                divisor=self._divisor(scenario, spec.divisor, f"tables.{spec.id}"),
                pieces=tuple(pieces),
                form=scenario.form,
            )

    def _build_restrictions(self, scenario: Scenario) -> None:
        for spec in scenario.document.restrictions:
            self._unique(scenario.restrictions, spec.id, "restriction")
            where = f"restrictions.{spec.id}"
            if spec.surface not in scenario.surfaces:
                raise ScenarioReferenceError(f"{self.source}: {where}: unknown surface {spec.surface!r}")
            lattice = scenario.surfaces[spec.surface]
            scenario.restrictions[spec.id] = RestrictionMap(
                name=spec.id,
                surface=lattice,
                divisor_label=spec.divisor,
                divisor=self._divisor(scenario, spec.divisor, where),
                image_h=self._surface_class(lattice, spec.images["H"], where),
                image_e=self._surface_class(lattice, spec.images["E"], where),
            )

    def _build_flag_cases(self, scenario: Scenario) -> None:
        for spec in scenario.document.flag_cases:
            self._unique(scenario.flag_cases, spec.id, "flag case")
            where = f"flag_cases.{spec.id}"
            if spec.table not in scenario.tables:
                raise ScenarioReferenceError(f"{self.source}: {where}: unknown table {spec.table!r}")
            if spec.restriction not in scenario.restrictions:
                raise ScenarioReferenceError(f"{self.source}: {where}: unknown restriction {spec.restriction!r}")
            restriction = scenario.restrictions[spec.restriction]
            for label in list(spec.n_multiplicity) + list(spec.n_prime_multiplicity):
                self._divisor(scenario, label, where)
            try:
                scenario.flag_cases[spec.id] = FlagCase(
                    name=spec.id,
                    table=scenario.tables[spec.table],
                    restriction=restriction,
                    z_class=self._surface_class(restriction.surface, spec.z, where),
                    z_label=spec.z_label,
                    n_multiplicity=dict(spec.n_multiplicity),
                    flag_curve=spec.flag_curve,
                    curve_multiplicity=dict(spec.curve_multiplicity),
                    n_prime_multiplicity=dict(spec.n_prime_multiplicity),
                )
            except KeyError as exc:
                raise ScenarioReferenceError(f"{self.source}: {where}: {exc.args[0]}") from None
            except ValueError as exc:
                raise SchemaError(f"{self.source}: {where}: {exc}") from None

    def _build_curve_cases(self, scenario: Scenario) -> None:
        for spec in scenario.document.curve_cases:
            self._unique(scenario.curve_cases, spec.id, "curve case")
            scenario.curve_cases[spec.id] = CurveCase(
                id=spec.id,
                a=parse_rational(spec.a) if spec.a is not None else None,
                b=parse_rational(spec.b) if spec.b is not None else None,
                symbolic=spec.symbolic,
            )

    def _register_cases(self, scenario: Scenario) -> None:
        for case in scenario.document.expected:
            self._unique(scenario.cases, case.id, "case")
            for key, registry in REFERENCE_INPUTS.items():
                if key in case.inputs and case.inputs[key] not in getattr(scenario, registry):
                    raise ScenarioReferenceError(
                        f"{self.source}: expected.{case.id}: unknown {key} {case.inputs[key]!r}"
                    )
            for name in case.inputs.get("restrictions", []):
                if name not in scenario.restrictions:
                    raise ScenarioReferenceError(f"{self.source}: expected.{case.id}: unknown restriction {name!r}")
            if case.oracle is not None and case.oracle not in ORACLES:
                raise ScenarioReferenceError(f"{self.source}: expected.{case.id}: unknown oracle {case.oracle!r}")
            for kind, key in REQUIRED_INPUTS:
                if case.kind == kind and key not in case.inputs:
                    raise SchemaError(f"{self.source}: expected.{case.id}: {case.kind} cases need a {key}")
            if case.kind == CaseKind.DISPLAYED_INTEGRAL and case.inputs["integrand"] not in ORACLES:
                raise ScenarioReferenceError(
                    f"{self.source}: expected.{case.id}: unknown integrand {case.inputs['integrand']!r}"
                )
            scenario.cases[case.id] = case

    def _unique(self, registry: Dict[str, Any], key: str, what: str) -> None:
        if key in registry:
            raise SchemaError(f"{self.source}: duplicate {what} id {key!r}")


def load_raw(path: Path) -> Any:
    """Read JSON or YAML, reporting syntax errors with line and column."""
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".yaml", ".yml"):
        try:
            return yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f"line {mark.line + 1} column {mark.column + 1}: " if mark else ""
            raise SchemaError(f"{path.name}: {where}{getattr(exc, 'problem', exc)}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path.name}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def parse_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    return ScenarioParser(str(path)).parse(load_raw(path))


def parse_scenario_text(text: str, source: str = "<memory>") -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return ScenarioParser(source).parse(raw)


def serialize_scenario(scenario: Union[Scenario, ScenarioDocument]) -> str:
    """Canonical JSON form; rationals stay "p/q" strings."""
    document = scenario.document if isinstance(scenario, Scenario) else scenario
    payload = document.model_dump(mode="json", exclude_none=True)
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
