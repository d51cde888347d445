"""Request/response models for the HTTP service.

The service is stateless: every request carries the data it needs (schema
text, report text, corpus records), and responses are plain JSON built
from these models. Domain findings (parse diagnostics, schema violations)
are data in 200 responses or structured 422 details, never server errors.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


# -- schema -----------------------------------------------------------------


class SchemaCheckRequest(BaseModel):
    schema_text: str | None = None  # omitted: the shipped default schema


class SchemaCheckResponse(BaseModel):
    ok: bool
    version: str | None = None
    organs: list[str] = []
    n_slot_paths: int = 0
    slot_paths: list[str] = []
    error: str | None = None


class SchemaLinearizeRequest(BaseModel):
    schema_text: str | None = None
    organs: list[str] | None = None


class SchemaLinearizeResponse(BaseModel):
    text: str


# -- reportql ---------------------------------------------------------------


class RqlTextRequest(BaseModel):
    text: str


class RqlParseResponse(BaseModel):
    ok: bool
    n_entries: int = 0
    canonical: str | None = None
    warnings: list[str] = []
    error: str | None = None


class SlotPairModel(BaseModel):
    path: list[str]
    value: str


class RqlFlattenResponse(BaseModel):
    pairs: list[SlotPairModel]
    warnings: list[str]


class RqlDiffRequest(BaseModel):
    pred: str
    gold: str


class RqlDiffResponse(BaseModel):
    matched: list[SlotPairModel]
    missing: list[SlotPairModel]
    spurious: list[SlotPairModel]
    n_matched: int
    n_missing: int
    n_spurious: int


class ViolationModel(BaseModel):
    kind: str
    path: list[str]
    value: str | None
    message: str


class RqlValidateRequest(BaseModel):
    text: str
    schema_text: str | None = None


class RqlValidateResponse(BaseModel):
    violations: list[ViolationModel]
    warnings: list[str]


# -- corpus / pipeline ------------------------------------------------------


class RecordModel(BaseModel):
    id: str
    report: str
    target: str | None = None
    annotator: list[str] | None = None


class MaskRequest(BaseModel):
    records: list[RecordModel]
    rate: float = 0.15
    mean_span_len: float = Field(default=3.0, gt=0)
    seed: int = 0


class MaskedExampleModel(BaseModel):
    id: str
    input: str
    target: str
    seed: int
    rate: float


class MaskResponse(BaseModel):
    examples: list[MaskedExampleModel]


class SplitRequest(BaseModel):
    ids: list[str]
    fraction: float = 0.8
    seed: int = 0


class SplitResponse(BaseModel):
    seed: int
    fraction: float
    train: list[str]
    test: list[str]


class PrepareRequest(BaseModel):
    records: list[RecordModel]
    schema_text: str | None = None
    organs: list[str] | None = None
    separator: str = "[REPORT]"


class PreparedExampleModel(BaseModel):
    id: str
    input: str
    target: str | None = None


class PrepareResponse(BaseModel):
    examples: list[PreparedExampleModel]
    warnings: list[str]


# -- scoring ----------------------------------------------------------------


class ScorePairModel(BaseModel):
    pred: str
    gold: str


class ScoreRequest(BaseModel):
    pairs: list[ScorePairModel]
    pooled_rouge: bool = False
    metric: str | None = None


class EvaluateRequest(BaseModel):
    predictions: list[dict]  # {id, prediction}
    golds: list[dict]  # {id, target} (or prediction/report as fallback keys)
    pooled_rouge: bool = False


class AgreementRequest(BaseModel):
    records_a: list[RecordModel]
    records_b: list[RecordModel]
    schema_text: str | None = None


class SlotAgreementModel(BaseModel):
    path: list[str]
    n_items: int
    observed_agreement: float


class AgreementResponse(BaseModel):
    kappa: float
    table: list[SlotAgreementModel]
