"""Scenario verifier: evaluates registered cases and writes the reports."""

import asyncio
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from loguru import logger

from config import settings
from engine.errors import KStabError, ScenarioReferenceError, SchemaError, UnknownCase
from engine.exact_core import Poly1, format_rational, parse_rational
from engine.flag_engine import chamber_sweep, s_curve_breakdown, s_point
from engine.oracles import run_oracle
from engine.quartic_curve import (
    branch_certificate,
    certificate_at_square,
    classify_pencil,
    cubic_discriminant,
    exceptional_lambdas,
    resultant_cubics,
)
from engine.scenario_parser import Scenario, parse_scenario
from engine.surface_lattice import intersect
from engine.threefold_ring import (
    admissible_hirzebruch_indices,
    cube,
    exceptional_restriction,
    hirzebruch_twist,
    nef_threshold,
    pseff_threshold,
    restrict,
    s_divisor,
    validate_table,
)
from models import LABEL_KINDS, CaseKind, CaseResult, CaseSpec, Report, Status, Summary

Computed = Any  # str, or list of str
_COMPARATORS: Dict[str, Callable[[Fraction, Fraction], bool]] = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def _text(value: Any) -> Computed:
    """Engine value -> report value ("p/q" strings)."""
    if isinstance(value, Poly1):
        return [format_rational(c) for c in value.coeffs] or ["0"]
    if isinstance(value, (list, tuple)):
        return [_text(v) for v in value]
    if isinstance(value, str):
        return value
    return format_rational(Fraction(value))


def check_predicate(computed: Computed, predicate: str) -> bool:
    op, bound = predicate.split()
    if not isinstance(computed, str):
        return False
    return _COMPARATORS[op](parse_rational(computed), parse_rational(bound))


class ScenarioVerifier:
    """Runs the cases of a scenario against the exact engine."""

    def __init__(
        self,
        scenario: Scenario,
        refinement_depth: Optional[int] = None,
        max_workers: Optional[int] = None,
    ):
        self.scenario = scenario
        self.refinement_depth = refinement_depth or settings.refinement_depth
        self.max_workers = max_workers or settings.max_workers
        self._oracle_values: Dict[str, Computed] = {}

        self._handlers: Dict[CaseKind, Callable[[CaseSpec, List[str]], Any]] = {
            CaseKind.CUBE: self._cube,
            CaseKind.PSEFF_THRESHOLD: self._pseff_threshold,
            CaseKind.NEF_THRESHOLD: self._nef_threshold,
            CaseKind.S_DIVISOR: self._s_divisor,
            CaseKind.VALIDATE_TABLE: self._validate_table,
            CaseKind.RESTRICTION: self._restriction,
            CaseKind.S_CURVE: self._s_curve,
            CaseKind.S_POINT: self._s_point,
            CaseKind.HIRZEBRUCH_K: self._hirzebruch_k,
            CaseKind.HIRZEBRUCH_DOT: self._hirzebruch_dot,
            CaseKind.HIRZEBRUCH_INDICES: self._hirzebruch_indices,
            CaseKind.CURVE_RESULTANT: self._curve_resultant,
            CaseKind.CURVE_DISCRIMINANT: self._curve_discriminant,
            CaseKind.BRANCH_COUNT: self._branch_count,
            CaseKind.CLASSIFY: self._classify,
            CaseKind.CERTIFICATE_EXPANSION: self._certificate_expansion,
            CaseKind.CERTIFICATE_VALUE: self._certificate_value,
            CaseKind.EXCEPTIONAL_SEARCH: self._exceptional_search,
            CaseKind.DISPLAYED_INTEGRAL: self._displayed_integral,
        }

    @classmethod
    def from_file(cls, path: Path, **kwargs: Any) -> "ScenarioVerifier":
        return cls(parse_scenario(path), **kwargs)

    # -- single case --------------------------------------------------------------

    def run_case(self, case_id: str, dump_chambers: bool = False) -> CaseResult:
        if case_id not in self.scenario.cases:
            raise UnknownCase(f"no case {case_id!r} in {self.scenario.source}")
        case = self.scenario.cases[case_id]
        logger.info(f"Running case {case_id} ({case.kind})")

        notes = list(case.notes)
        result = CaseResult(
            id=case.id,
            kind=case.kind,
            description=case.description,
            expected=case.value,
            predicates=case.predicates,
            provenance=case.provenance,
            anchor=case.anchor,
            oracle=case.oracle,
            tags=case.tags,
            status=Status.ERROR,
        )

        try:
            computed = _text(self._handlers[CaseKind(case.kind)](case, notes))
            result.computed = computed
            result.status, result.detail = self._judge(case, computed, notes)
            if dump_chambers and case.kind in (CaseKind.S_CURVE, CaseKind.S_POINT):
                result.chambers = self.dump_chambers(case.inputs["flag_case"])
        except (KStabError, ValueError) as exc:
            result.status = Status.ERROR
            result.detail = f"{type(exc).__name__}: {exc}"

        result.notes = notes
        if result.status == Status.PASS:
            logger.info(f"Case {case_id}: PASS ({result.computed})")
        else:
            logger.warning(f"Case {case_id}: {result.status} {result.detail or ''}")
        return result

    def _judge(self, case: CaseSpec, computed: Computed, notes: List[str]) -> Tuple[Status, Optional[str]]:
        failures = []
        if case.value is not None and computed != case.value:
            failures.append(f"expected {case.value}, computed {computed}")
        for predicate in case.predicates:
            if not check_predicate(computed, predicate):
                failures.append(f"predicate {predicate!r} does not hold for {computed}")
        if case.oracle:
            oracle_value = self._oracle(case.oracle)
            if oracle_value != computed:
                failures.append(f"oracle {case.oracle} gives {oracle_value}")
                notes.append(f"oracle {case.oracle} disagrees: {oracle_value}")
        if failures:
            return Status.FAIL, "; ".join(failures)
        return Status.PASS, None

    def _oracle(self, name: str) -> Computed:
        if name not in self._oracle_values:
            self._oracle_values[name] = _text(run_oracle(name))
        return self._oracle_values[name]

    def dump_chambers(self, flag_case_id: str) -> List[Dict[str, Any]]:
        """Chamber summaries at the midpoint of every table piece."""
        case = self.scenario.flag_cases[flag_case_id]
        slices = []
        for piece in case.table.pieces:
            u = (piece.lo + piece.hi) / 2
            sweep = chamber_sweep(case, u)
            slices.append({
                "u": format_rational(u),
                "pseff_limit": format_rational(sweep.pseff_limit),
                "chambers": sweep.summary(),
            })
        return slices

    # -- handlers -------------------------------------------------------------------

    def _input(self, case: CaseSpec, key: str) -> Any:
        if key not in case.inputs:
            raise SchemaError(f"case {case.id} ({case.kind}) needs input {key!r}")
        return case.inputs[key]

    def _divisor(self, case: CaseSpec):
        name = self._input(case, "divisor")
        if name not in self.scenario.divisors:
            raise ScenarioReferenceError(f"case {case.id}: unknown divisor {name!r}")
        return self.scenario.divisors[name]

    def _cube(self, case: CaseSpec, notes: List[str]) -> Any:
        return cube(self.scenario.form, self._divisor(case))

    def _pseff_threshold(self, case: CaseSpec, notes: List[str]) -> Any:
        return pseff_threshold(self._divisor(case), self.scenario.form)

    def _nef_threshold(self, case: CaseSpec, notes: List[str]) -> Any:
        return nef_threshold(self._divisor(case), self.scenario.form)

    def _s_divisor(self, case: CaseSpec, notes: List[str]) -> Any:
        return s_divisor(self.scenario.tables[self._input(case, "table")])

    def _validate_table(self, case: CaseSpec, notes: List[str]) -> Any:
        table = self.scenario.tables[self._input(case, "table")]
        maps = [self.scenario.restrictions[name] for name in case.inputs.get("restrictions", [])]
        diagnostics = validate_table(table, maps)
        notes.extend(diagnostics.violations)
        notes.extend(diagnostics.notes)
        return len(diagnostics.violations)

    def _restriction(self, case: CaseSpec, notes: List[str]) -> Any:
        m = self.scenario.restrictions[self._input(case, "restriction")]
        if "table" in case.inputs:
            D = self.scenario.tables[case.inputs["table"]].positive_at(parse_rational(self._input(case, "u")))
        else:
            D = self._divisor(case)
        return list(restrict(m, D).coeffs)

    def _s_curve(self, case: CaseSpec, notes: List[str]) -> Any:
        breakdown = s_curve_breakdown(self.scenario.flag_cases[case.inputs["flag_case"]], self.refinement_depth)
        part = case.inputs.get("part", "total")
        if part == "total":
            return breakdown.total
        if part == "correction":
            return breakdown.correction
        if isinstance(part, int) and 0 <= part < len(breakdown.pieces):
            return breakdown.pieces[part].value
        raise SchemaError(f"case {case.id}: part must be 'total', 'correction' or a piece index, got {part!r}")

    def _s_point(self, case: CaseSpec, notes: List[str]) -> Any:
        flag = self.scenario.flag_cases[case.inputs["flag_case"]]
        breakdown = s_point(flag, self.refinement_depth)
        part = case.inputs.get("part", "total")
        if part not in ("total", "f_term", "integral_term"):
            raise SchemaError(f"case {case.id}: part must be total, f_term or integral_term, got {part!r}")
        return getattr(breakdown, part)

    def _hirzebruch_k(self, case: CaseSpec, notes: List[str]) -> Any:
        return hirzebruch_twist(self.scenario.form, int(self._input(case, "n")))

    def _hirzebruch_dot(self, case: CaseSpec, notes: List[str]) -> Any:
        m = exceptional_restriction(self.scenario.form, int(self._input(case, "n")))
        divisor = self._divisor(case)
        return intersect(m.surface, restrict(m, divisor), m.surface.curve("s"))

    def _hirzebruch_indices(self, case: CaseSpec, notes: List[str]) -> Any:
        return admissible_hirzebruch_indices(self.scenario.form, int(case.inputs.get("limit", 30)))

    def _curve(self, case: CaseSpec, numeric: bool = False):
        curve = self.scenario.curve_cases[self._input(case, "curve")]
        if numeric and curve.symbolic:
            raise SchemaError(f"case {case.id}: {case.kind} needs a curve with numeric a and b")
        return curve.forms()

    def _curve_resultant(self, case: CaseSpec, notes: List[str]) -> Any:
        return resultant_cubics(*self._curve(case))

    def _curve_discriminant(self, case: CaseSpec, notes: List[str]) -> Any:
        f, g = self._curve(case)
        which = case.inputs.get("form", "f")
        if which not in ("f", "g"):
            raise SchemaError(f"case {case.id}: form must be 'f' or 'g', got {which!r}")
        return cubic_discriminant(f if which == "f" else g)

    def _branch_count(self, case: CaseSpec, notes: List[str]) -> Any:
        return classify_pencil(*self._curve(case, numeric=True))[2]

    def _classify(self, case: CaseSpec, notes: List[str]) -> Any:
        classification, resultant, count = classify_pencil(*self._curve(case, numeric=True))
        notes.append(f"resultant {format_rational(resultant)}, {count} branch points")
        return classification.value

    def _certificate_expansion(self, case: CaseSpec, notes: List[str]) -> Any:
        return branch_certificate().polynomial

    def _certificate_value(self, case: CaseSpec, notes: List[str]) -> Any:
        return certificate_at_square(parse_rational(str(self._input(case, "t"))))

    def _exceptional_search(self, case: CaseSpec, notes: List[str]) -> Any:
        return exceptional_lambdas(int(case.inputs.get("bound", 50)))

    def _displayed_integral(self, case: CaseSpec, notes: List[str]) -> Any:
        """A printed integrand evaluated as printed; no chamber data involved."""
        integrand = self._input(case, "integrand")
        notes.append(f"evaluated literally by {integrand}")
        return run_oracle(integrand)

    # -- whole scenario -------------------------------------------------------------

    async def run_all_async(self, tag: Optional[str] = None) -> Report:
        case_ids = self.scenario.case_ids(tag)
        logger.info(f"Running {len(case_ids)} cases from {self.scenario.source} with {self.max_workers} workers")
        semaphore = asyncio.Semaphore(self.max_workers)

        async def evaluate(case_id: str) -> CaseResult:
            async with semaphore:
                return await asyncio.to_thread(self.run_case, case_id)

        results = await asyncio.gather(*(evaluate(case_id) for case_id in case_ids))
        results = sorted(results, key=lambda r: r.id)

        summary = Summary(
            total=len(results),
            passed=sum(r.status == Status.PASS for r in results),
            failed=sum(r.status == Status.FAIL for r in results),
            errors=sum(r.status == Status.ERROR for r in results),
        )
        logger.info(f"Finished: {summary.passed} pass, {summary.failed} fail, {summary.errors} error")
        return Report(scenario=self.scenario.source, summary=summary, results=results)

    def run_all(self, tag: Optional[str] = None) -> Report:
        return asyncio.run(self.run_all_async(tag))

    # -- reports --------------------------------------------------------------------

    @staticmethod
    def report_json(report: Report) -> str:
        payload = report.model_dump(mode="json", by_alias=True, exclude_none=True)
        return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"

    @staticmethod
    def report_markdown(report: Report) -> str:
        def cell(value: Any) -> str:
            if value is None:
                return ""
            if isinstance(value, list):
                value = "[" + ", ".join(value) + "]"
            return str(value).replace("|", "\\|")

        summary = report.summary
        lines = [
            "# K-stability verification report",
            "",
            f"**Scenario:** {report.scenario}",
            f"**Generated:** {report.generated_at.strftime('%Y-%m-%d %H:%M:%S')}",
            "",
            f"**Total:** {summary.total} | **Pass:** {summary.passed} | "
            f"**Fail:** {summary.failed} | **Error:** {summary.errors}",
            "",
            "| Case | Kind | Computed | Expected | Status | Provenance | Anchor |",
            "|---|---|---|---|---|---|---|",
        ]
        for r in report.results:
            expected = cell(r.expected)
            if r.predicates:
                expected = " and ".join([expected] + r.predicates if expected else r.predicates)
            lines.append(
                f"| {r.id} | {r.kind} | {cell(r.computed)} | {expected} | {r.status} | "
                f"{r.provenance} | {cell(r.anchor)} |"
            )

        details = [r for r in report.results if r.detail or r.notes]
        if details:
            lines.extend(["", "## Notes", ""])
            for r in details:
                lines.append(f"### {r.id}")
                if r.detail:
                    lines.append(f"- **{r.status}:** {cell(r.detail)}")
                lines.extend(f"- {note}" for note in r.notes)
                lines.append("")
        return "\n".join(lines) + "\n"

    def write_reports(self, report: Report, json_path: Optional[Path] = None, md_path: Optional[Path] = None) -> None:
        if json_path:
            json_path.parent.mkdir(parents=True, exist_ok=True)
            json_path.write_text(self.report_json(report), encoding="utf-8")
            logger.info(f"JSON report written to {json_path}")
        if md_path:
            md_path.parent.mkdir(parents=True, exist_ok=True)
            md_path.write_text(self.report_markdown(report), encoding="utf-8")
            logger.info(f"Markdown report written to {md_path}")
