from pydantic import BaseModel, Field, field_validator
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from config import Bounds


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

class Violation(BaseModel):
    """One failed law, naming the offending arrows or elements"""
    kind: str
    items: List[str] = Field(default_factory=list)
    message: str = ""


class ValidationReport(BaseModel):
    """Schema for validator output; violations are data, not failures"""
    subject: str
    violations: List[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> List[str]:
        return [v.kind for v in self.violations]

    def add(self, kind: str, items: List[str], message: str = "") -> None:
        self.violations.append(Violation(kind=kind, items=[str(i) for i in items], message=message))

    def __bool__(self) -> bool:
        return self.ok


class Verdict(BaseModel):
    """Outcome of a property check; `property` carries the verbatim property name"""
    property: str
    holds: bool
    inconclusive: bool = False
    witness: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = Field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.holds


class FunctorClassification(BaseModel):
    fibration: bool
    opfibration: bool
    discrete_fibration: bool
    discrete_opfibration: bool
    witness: Dict[str, Any] = Field(default_factory=dict)


class SimilarityClass(BaseModel):
    class_id: int
    representative: str
    members: List[str]

    @property
    def member_count(self) -> int:
        return len(self.members)


class ClassificationReport(BaseModel):
    property: str = "similarity classes"
    c: str
    b: str
    n: int
    classes: List[SimilarityClass]
    count: int
    relative_to_bound: bool = False
    bound: Optional[int] = None


class CommandReport(BaseModel):
    """Top-level report written by the command-line dispatcher"""
    command: str
    status: int
    summary: str
    verdicts: List[Verdict] = Field(default_factory=list)
    payload: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[Dict[str, Any]] = None


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

class ArrowSpec(BaseModel):
    name: str = Field(..., min_length=1)
    src: str
    dst: str


class CategoryFile(BaseModel):
    """Category document: objects, arrows, identities, composition triples [g, f, g∘f]"""
    name: Optional[str] = None
    objects: List[str]
    arrows: List[ArrowSpec]
    identities: Dict[str, str]
    compose: List[Tuple[str, str, str]]


class FunctorFile(BaseModel):
    """Functor document; a two-element target list denotes the product of those categories"""
    name: Optional[str] = None
    source: Union[str, CategoryFile]
    target: Union[str, CategoryFile, List[Union[str, CategoryFile]]]
    obj_map: Dict[str, str]
    arr_map: Dict[str, str]

    @field_validator("target")
    @classmethod
    def product_has_two_factors(cls, v):
        if isinstance(v, list) and len(v) != 2:
            raise ValueError("a product target needs exactly two factors")
        return v


class GroupFile(BaseModel):
    """Group document: table is row-major in element order, table[i][j] = e_i * e_j"""
    name: Optional[str] = None
    elements: List[str] = Field(..., min_length=1)
    table: List[List[str]]
    unit: str

    @field_validator("table")
    @classmethod
    def table_is_square(cls, v, info):
        elements = info.data.get("elements") or []
        if len(v) != len(elements) or any(len(row) != len(elements) for row in v):
            raise ValueError("table must be |elements| x |elements|")
        return v


GroupRef = Union[str, GroupFile]


class HomFile(BaseModel):
    name: Optional[str] = None
    source: GroupRef
    target: GroupRef
    map: Dict[str, str]


class ModuleFile(BaseModel):
    name: Optional[str] = None
    base: GroupRef
    carrier: GroupRef
    action: Optional[Dict[str, Dict[str, str]]] = None


class ExtensionFile(BaseModel):
    """
    Crossed n-fold extension 0 -> B -> G_n -> ... -> G_1 -> C -> 1.

    `terms` lists G_1..G_n, `maps` lists p, ∂, d_2, ..., d_{n-1}, j as element
    maps, `action` is the G_1 action on G_2 (n >= 2), `modules` the C-actions
    on G_3..G_n.
    """
    name: Optional[str] = None
    n: int = Field(..., ge=1)
    c: GroupRef
    b: GroupRef
    b_action: Optional[Dict[str, Dict[str, str]]] = None
    terms: List[GroupRef]
    maps: List[Dict[str, str]]
    action: Optional[Dict[str, Dict[str, str]]] = None
    modules: List[Dict[str, Dict[str, str]]] = Field(default_factory=list)

    @field_validator("terms")
    @classmethod
    def terms_match_length(cls, v, info):
        n = info.data.get("n")
        if n is not None and len(v) != n:
            raise ValueError(f"expected {n} middle terms, got {len(v)}")
        return v


class MorphismFile(BaseModel):
    """Morphism of extensions: gamma on C, f_1..f_n on the terms, beta on B"""
    name: Optional[str] = None
    source: Union[str, ExtensionFile]
    target: Union[str, ExtensionFile]
    gamma: Dict[str, str]
    f: List[Dict[str, str]]
    beta: Dict[str, str]


# ---------------------------------------------------------------------------
# Command configuration
# ---------------------------------------------------------------------------

class RunConfig(BaseModel):
    """Schema for one dispatcher run"""
    command: Literal[
        "validate", "check-fibration", "check-regular-span", "check-condition-c",
        "chevalley", "factorize", "classify", "pushforward", "pullback",
        "factorize-morphism", "act",
    ]
    inputs: Dict[str, str] = Field(default_factory=dict)
    options: Dict[str, Any] = Field(default_factory=dict)
    bounds: Bounds = Field(default_factory=Bounds)
    out_dir: Optional[str] = None
    format: Literal["text", "json"] = "text"


# ---------------------------------------------------------------------------
# HTTP payloads
# ---------------------------------------------------------------------------

class TriangleRequest(BaseModel):
    """Inline triangle; functors refer to the categories by name"""
    x: CategoryFile
    m: CategoryFile
    a: CategoryFile
    p: FunctorFile
    g: FunctorFile
    f: Optional[FunctorFile] = None
    check_initial: bool = False


class FactorizationResponse(BaseModel):
    blocks: Dict[str, List[str]]
    verdicts: List[Verdict]


class ClassifyRequest(BaseModel):
    c: GroupRef
    b: GroupRef
    action: Optional[Dict[str, Dict[str, str]]] = None
    n: Literal[1, 2] = 1
    max_order: int = Field(default=4, gt=0)


class PushforwardRequest(BaseModel):
    extension: ExtensionFile
    beta: HomFile
    module: Optional[ModuleFile] = None


class PullbackRequest(BaseModel):
    extension: ExtensionFile
    gamma: HomFile


class ExtensionResponse(BaseModel):
    extension: Dict[str, Any]
    morphism: Dict[str, Any]
    valid: bool
