"""Data models for the K-stability verification scenarios and reports."""

from datetime import datetime
from enum import Enum
from typing import Annotated, Any, Dict, List, Optional, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator

from engine.errors import NonRationalValue
from engine.exact_core import format_rational, parse_rational


def _rational_text(value: Any) -> str:
    """Normalize an exact rational given as "p/q" text or an int."""
    if isinstance(value, bool):
        raise NonRationalValue(f"{value!r} is not a rational number")
    if isinstance(value, float):
        raise NonRationalValue(f"{value!r} is not exact; write it as a fraction such as \"1/2\"")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return format_rational(parse_rational(value))
    raise NonRationalValue(f"{value!r} is not a rational number")


RationalText = Annotated[str, BeforeValidator(_rational_text)]
# a constant, or ascending coefficients of a polynomial in u
PolyText = Union[RationalText, List[RationalText]]
ClassText = Dict[str, PolyText]


class SurfaceKindName(str, Enum):
    QUADRIC = "quadric"
    HIRZEBRUCH = "hirzebruch"
    DELPEZZO5 = "delpezzo5"
    CUSTOM = "custom"


class CaseKind(str, Enum):
    """Computations a scenario case can request."""
    CUBE = "cube"
    PSEFF_THRESHOLD = "pseff_threshold"
    NEF_THRESHOLD = "nef_threshold"
    S_DIVISOR = "s_divisor"
    VALIDATE_TABLE = "validate_table"
    RESTRICTION = "restriction"
    S_CURVE = "s_curve"
    S_POINT = "s_point"
    HIRZEBRUCH_K = "hirzebruch_k"
    HIRZEBRUCH_DOT = "hirzebruch_dot"
    HIRZEBRUCH_INDICES = "hirzebruch_indices"
    CURVE_RESULTANT = "curve_resultant"
    CURVE_DISCRIMINANT = "curve_discriminant"
    BRANCH_COUNT = "branch_count"
    CLASSIFY = "classify"
    CERTIFICATE_EXPANSION = "certificate_expansion"
    CERTIFICATE_VALUE = "certificate_value"
    EXCEPTIONAL_SEARCH = "exceptional_search"
    DISPLAYED_INTEGRAL = "displayed_integral"


class Provenance(str, Enum):
    PAPER_DISPLAY = "paper-display"
    DERIVED_ORACLE = "derived-oracle"


class Status(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    ERROR = "ERROR"


LABEL_KINDS = (CaseKind.CLASSIFY,)


class SurfaceSpec(BaseModel):
    """A built-in surface family or a user lattice."""
    model_config = ConfigDict(extra="forbid", use_enum_values=True)

    id: str
    kind: SurfaceKindName
    n: Optional[int] = Field(None, ge=0)
    basis: Optional[List[str]] = None
    gram: Optional[List[List[RationalText]]] = None
    negative_curves: Optional[Dict[str, List[RationalText]]] = None
    effective_generators: Optional[List[List[RationalText]]] = None

    @model_validator(mode="after")
    def _check_shape(self) -> "SurfaceSpec":
        if self.kind == SurfaceKindName.HIRZEBRUCH and self.n is None:
            raise ValueError(f"surface {self.id}: hirzebruch surfaces need n")
        if self.kind == SurfaceKindName.CUSTOM:
            if not self.basis or self.gram is None or not self.negative_curves:
                raise ValueError(f"surface {self.id}: custom lattices need basis, gram and negative_curves")
            rank = len(self.basis)
            if len(self.gram) != rank or any(len(row) != rank for row in self.gram):
                raise ValueError(f"gram of surface {self.id} must be {rank}x{rank}")
            for i in range(rank):
                for j in range(i + 1, rank):
                    if parse_rational(self.gram[i][j]) != parse_rational(self.gram[j][i]):
                        raise ValueError(f"gram of surface {self.id} is not symmetric at ({i}, {j})")
        return self


class ThreefoldSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tensor: Dict[str, RationalText]
    anticanonical: ClassText
    effective_cone: List[ClassText]
    nef_cone: List[ClassText]
    divisors: Dict[str, ClassText]

    @model_validator(mode="after")
    def _check_tensor(self) -> "ThreefoldSpec":
        missing = {"HHH", "HHE", "HEE", "EEE"} - set(self.tensor)
        if missing:
            raise ValueError(f"threefold tensor is missing {sorted(missing)}")
        if len(self.effective_cone) != 2 or len(self.nef_cone) != 2:
            raise ValueError("effective_cone and nef_cone each need two generators")
        return self


class TermSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    divisor: str
    coefficient: PolyText


class PieceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lo: RationalText
    hi: RationalText
    positive: ClassText
    negative: List[TermSpec] = Field(default_factory=list)


class TableSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    divisor: str
    pieces: List[PieceSpec]


class RestrictionSpec(BaseModel):
    """Images of H and E on a surface, keyed by surface basis labels."""
    model_config = ConfigDict(extra="forbid")

    id: str
    surface: str
    divisor: str
    images: Dict[str, Dict[str, RationalText]]

    @model_validator(mode="after")
    def _check_images(self) -> "RestrictionSpec":
        if set(self.images) != {"H", "E"}:
            raise ValueError(f"restriction {self.id} needs images of exactly H and E")
        return self


class FlagCaseSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    table: str
    restriction: str
    z: Dict[str, RationalText]
    z_label: str = "Z"
    n_multiplicity: Dict[str, int] = Field(default_factory=dict)
    flag_curve: Optional[str] = None
    curve_multiplicity: Dict[str, int] = Field(default_factory=dict)
    n_prime_multiplicity: Dict[str, int] = Field(default_factory=dict)


class CurveCaseSpec(BaseModel):
    """A pencil u(x^3 + a x^2 y) = v(y^3 + b y^2 x); symbolic means a = b = lambda."""
    model_config = ConfigDict(extra="forbid")

    id: str
    a: Optional[RationalText] = None
    b: Optional[RationalText] = None
    symbolic: bool = False

    @model_validator(mode="after")
    def _check_parameters(self) -> "CurveCaseSpec":
        if not self.symbolic and (self.a is None or self.b is None):
            raise ValueError(f"curve case {self.id} needs a and b unless symbolic")
        return self


class CaseSpec(BaseModel):
    """One registered verification with its expected value and provenance."""
    model_config = ConfigDict(extra="forbid", use_enum_values=True)

    id: str
    kind: CaseKind
    description: str = ""
    inputs: Dict[str, Any] = Field(default_factory=dict)
    value: Optional[Union[str, List[str]]] = None
    predicates: List[str] = Field(default_factory=list)
    provenance: Provenance
    anchor: str = ""
    oracle: Optional[str] = None
    tags: List[str] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_expectation(self) -> "CaseSpec":
        if self.value is None and not self.predicates:
            raise ValueError(f"case {self.id} has neither a value nor a predicate")
        if self.kind not in LABEL_KINDS and self.value is not None:
            values = self.value if isinstance(self.value, list) else [self.value]
            normalized = [_rational_text(v) for v in values]
            self.value = normalized if isinstance(self.value, list) else normalized[0]
        for predicate in self.predicates:
            parts = predicate.split()
            if len(parts) != 2 or parts[0] not in ("<", "<=", "=", ">=", ">"):
                raise ValueError(f"case {self.id}: predicate {predicate!r} must look like \"< 1\"")
            parse_rational(parts[1])
        return self


class ScenarioDocument(BaseModel):
    """Top-level scenario file."""
    model_config = ConfigDict(extra="forbid")

    surfaces: List[SurfaceSpec]
    threefold: ThreefoldSpec
    tables: List[TableSpec]
    restrictions: List[RestrictionSpec]
    flag_cases: List[FlagCaseSpec] = Field(default_factory=list)
    curve_cases: List[CurveCaseSpec] = Field(default_factory=list)
    expected: List[CaseSpec]


ComputedValue = Optional[Union[str, List[str]]]


class CaseResult(BaseModel):
    """Outcome of one case."""
    model_config = ConfigDict(use_enum_values=True, validate_assignment=True)

    id: str
    kind: CaseKind
    description: str = ""
    computed: ComputedValue = None
    expected: ComputedValue = None
    predicates: List[str] = Field(default_factory=list)
    provenance: Provenance
    anchor: str = ""
    oracle: Optional[str] = None
    status: Status
    detail: Optional[str] = None
    chambers: Optional[List[Dict[str, Any]]] = None
    notes: List[str] = Field(default_factory=list)
    tags: List[str] = Field(default_factory=list)


class Summary(BaseModel):
    total: int = 0
    passed: int = Field(0, alias="pass")
    failed: int = Field(0, alias="fail")
    errors: int = Field(0, alias="error")

    model_config = ConfigDict(populate_by_name=True)


class Report(BaseModel):
    """Ordered case results plus a summary block."""
    scenario: str
    generated_at: datetime = Field(default_factory=datetime.now)
    summary: Summary
    results: List[CaseResult] = Field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if self.summary.errors:
            return 2
        if self.summary.failed:
            return 1
        return 0
