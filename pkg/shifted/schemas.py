"""
Pydantic models for the quiver description file and for every command output.

The JSON schema of each output model is what `qlg.py schema export` writes.
"""

from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field


class QuiverFile(BaseModel):
    model_config = ConfigDict(extra='forbid')

    type: str
    vertices: list[str]
    arrows: list[tuple[str, str, str]]
    cartan: Optional[list[list[int]]] = None
    kind: Optional[str] = None
    cartan_vertices: Optional[list[str]] = None
    window: Optional[tuple[int, int]] = None


class CartanResult(BaseModel):
    result: dict[str, int]
    l_dominant: bool


class QCharTerm(BaseModel):
    monomial: dict[str, int]
    mult: int


class KRSummary(BaseModel):
    dim: int
    dominant_count: int


class KRCharacter(BaseModel):
    dim: int
    dominant_count: int
    incomplete: bool
    highest: dict[str, int]
    terms: list[QCharTerm]


class NormalizedTerm(BaseModel):
    a_vector: dict[str, int]
    degree: int
    mult: int


class HJLevel(BaseModel):
    l: int
    terms: list[NormalizedTerm]
    agreement_with_next: Optional[int] = None


class HJLimitResult(BaseModel):
    levels: list[HJLevel]
    stable_degree: int
    stabilized: list[NormalizedTerm]


class SocleCertificateModel(BaseModel):
    variant: str
    socle: dict[str, int]
    parity_socle: dict[str, int]
    socle_identity: bool
    cone_ok: bool
    right_negative_ok: bool
    closure_ok: bool
    lowered_monomials: list[dict[str, int]]
    witness: Optional[dict[str, int]] = None
    holds: bool


class TPKRResult(BaseModel):
    criterion: bool
    certificate: SocleCertificateModel


class TPKRSweepResult(BaseModel):
    seed: int
    configurations: int
    agreements: int
    all_agree: bool


class CatalogueEntry(BaseModel):
    name: str
    family: str
    statement: str
    vertices: list[str]
    convention: Optional[str] = None


class CatalogueResult(BaseModel):
    kind: str
    relations: list[CatalogueEntry]


class RelationEntry(BaseModel):
    relation: str
    indices: dict[str, Any]
    status: str
    witness: Optional[dict[str, str]] = None


class RelationsReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    passed: int = Field(alias='pass')
    fail: int
    undetermined: int
    entries: Optional[list[RelationEntry]] = None


class LatticeCoeffResult(BaseModel):
    source: list[int]
    target: list[int]
    n: int
    value: str


class OffDiagonalEntry(BaseModel):
    target: list[int]
    value: str


class CommutatorResult(BaseModel):
    passed: bool
    lhs: str
    rhs: str
    off_diagonal: list[OffDiagonalEntry]


class PsiResult(BaseModel):
    lam: list[int]
    sign: str
    trunc: int
    coefficients: dict[str, str]


class QuotResult(BaseModel):
    poly: str
    euler: int


class QuotCell(BaseModel):
    composition: list[int]
    dim: int
    punctual_dim: int


class QuotCellsResult(BaseModel):
    cells: list[QuotCell]


class SubmoduleCertModel(BaseModel):
    dimvec: dict[str, int]
    basis: list[str]
    flags: dict[str, bool]


class GrassEnumResult(BaseModel):
    module_dim: int
    count: int
    certificates: list[SubmoduleCertModel]


class EulerPerV(BaseModel):
    v: dict[str, int]
    submodules: int
    fm_mult: int


class EulerVsKrResult(BaseModel):
    passed: bool
    grassmannian_count: int
    kr_dim: int
    refinement_ok: bool
    per_v: list[EulerPerV]


class SchemaExportResult(BaseModel):
    written: list[str]


class ErrorResult(BaseModel):
    error: str
    message: str


# command name -> output model, for schema export
COMMAND_MODELS = {
    'quiver derive': QuiverFile,
    'cartan': CartanResult,
    'qchar kr': KRCharacter,
    'qchar kr --summary': KRSummary,
    'qchar hj-limit': HJLimitResult,
    'qchar tpkr': TPKRResult,
    'qchar tpkr --random': TPKRSweepResult,
    'relations catalogue': CatalogueResult,
    'relations check': RelationsReport,
    'lattice coeff': LatticeCoeffResult,
    'lattice commutator': CommutatorResult,
    'lattice psi': PsiResult,
    'quot poincare': QuotResult,
    'quot cells': QuotCellsResult,
    'grass enum': GrassEnumResult,
    'grass euler-vs-kr': EulerVsKrResult,
    'schema export': SchemaExportResult,
    'error': ErrorResult,
}
