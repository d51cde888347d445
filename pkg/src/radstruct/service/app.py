"""FastAPI service exposing every pipeline stage over JSON.

All endpoints are pure functions of their request bodies. HTTP 422 carries
domain findings that make the operation impossible (malformed ReportQL
where a tree is required, malformed schema text); HTTP 400 carries usage
errors (unknown organ filters, mismatched corpus sizes).
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..corpus import CorpusError, ReportRecord, agreement, assemble_input, split
from ..corruption import corrupt_corpus
from ..fixtures import default_schema_text
from ..metrics import score_corpus
from ..reportql import (
    ReportQLError,
    diff_reports,
    flatten,
    parse_report,
    serialize_canonical,
    validate_against_schema,
)
from ..schema import (
    SchemaError,
    linearize_schema,
    list_slot_paths,
    parse_schema,
)
from . import models as m

app = FastAPI(
    title="radstruct",
    version=__version__,
    description="Structured radiology reporting toolkit: schemas, ReportQL, "
    "span-corruption data generation, corpus preparation, and scoring.",
)


def _load_schema(schema_text: str | None):
    if schema_text is None:
        text, version = default_schema_text(), "abdominopelvic-v1"
    else:
        text, version = schema_text, "user"
    try:
        return parse_schema(text, version=version)
    except SchemaError as exc:
        raise HTTPException(status_code=422, detail=f"schema: {exc}") from exc


def _parse_rql(text: str, what: str = "report"):
    try:
        return parse_report(text)
    except ReportQLError as exc:
        raise HTTPException(status_code=422, detail=f"{what}: {exc}") from exc


@app.get("/health", response_model=m.HealthResponse)
def health() -> m.HealthResponse:
    return m.HealthResponse(status="ok", version=__version__)


@app.get("/schema/default")
def schema_default() -> dict:
    return {"text": default_schema_text()}


@app.post("/schema/check", response_model=m.SchemaCheckResponse)
def schema_check(req: m.SchemaCheckRequest) -> m.SchemaCheckResponse:
    try:
        schema = _load_schema(req.schema_text)
    except HTTPException as exc:
        return m.SchemaCheckResponse(ok=False, error=str(exc.detail))
    paths = list_slot_paths(schema)
    return m.SchemaCheckResponse(
        ok=True,
        version=schema.version,
        organs=[o.name for o in schema.organs],
        n_slot_paths=len(paths),
        slot_paths=["/".join(p) for p in paths],
    )


@app.post("/schema/linearize", response_model=m.SchemaLinearizeResponse)
def schema_linearize(req: m.SchemaLinearizeRequest) -> m.SchemaLinearizeResponse:
    schema = _load_schema(req.schema_text)
    try:
        return m.SchemaLinearizeResponse(text=linearize_schema(schema, req.organs))
    except SchemaError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.post("/rql/parse", response_model=m.RqlParseResponse)
def rql_parse(req: m.RqlTextRequest) -> m.RqlParseResponse:
    try:
        doc, warnings = parse_report(req.text)
    except ReportQLError as exc:
        return m.RqlParseResponse(ok=False, error=str(exc))
    return m.RqlParseResponse(
        ok=True,
        n_entries=len(doc.entries),
        canonical=serialize_canonical(doc),
        warnings=warnings,
    )


@app.post("/rql/fmt")
def rql_fmt(req: m.RqlTextRequest) -> dict:
    doc, warnings = _parse_rql(req.text)
    return {"canonical": serialize_canonical(doc), "warnings": warnings}


@app.post("/rql/flatten", response_model=m.RqlFlattenResponse)
def rql_flatten(req: m.RqlTextRequest) -> m.RqlFlattenResponse:
    doc, parse_warnings = _parse_rql(req.text)
    pairs, flat_warnings = flatten(doc)
    return m.RqlFlattenResponse(
        pairs=[m.SlotPairModel(path=list(p.path), value=p.value) for p in pairs],
        warnings=parse_warnings + flat_warnings,
    )


@app.post("/rql/diff", response_model=m.RqlDiffResponse)
def rql_diff(req: m.RqlDiffRequest) -> m.RqlDiffResponse:
    pred, _ = _parse_rql(req.pred, "pred")
    gold, _ = _parse_rql(req.gold, "gold")
    matched, missing, spurious = diff_reports(pred, gold)

    def pack(pairs):
        return [m.SlotPairModel(path=list(p.path), value=p.value) for p in pairs]

    return m.RqlDiffResponse(
        matched=pack(matched),
        missing=pack(missing),
        spurious=pack(spurious),
        n_matched=len(matched),
        n_missing=len(missing),
        n_spurious=len(spurious),
    )


@app.post("/rql/validate", response_model=m.RqlValidateResponse)
def rql_validate(req: m.RqlValidateRequest) -> m.RqlValidateResponse:
    schema = _load_schema(req.schema_text)
    doc, warnings = _parse_rql(req.text)
    violations = validate_against_schema(doc, schema)
    return m.RqlValidateResponse(
        violations=[
            m.ViolationModel(kind=v.kind, path=list(v.path), value=v.value, message=v.message)
            for v in violations
        ],
        warnings=warnings,
    )


@app.post("/mask", response_model=m.MaskResponse)
def mask(req: m.MaskRequest) -> m.MaskResponse:
    try:
        examples = corrupt_corpus(
            [r.report for r in req.records], req.rate, req.mean_span_len, req.seed
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return m.MaskResponse(
        examples=[
            m.MaskedExampleModel(
                id=r.id,
                input=" ".join(ex.input_tokens),
                target=" ".join(ex.target_tokens),
                seed=ex.seed,
                rate=req.rate,
            )
            for r, ex in zip(req.records, examples)
        ]
    )


@app.post("/split", response_model=m.SplitResponse)
def split_endpoint(req: m.SplitRequest) -> m.SplitResponse:
    records = [ReportRecord(i, "") for i in req.ids]
    try:
        manifest = split(records, req.fraction, req.seed)
    except CorpusError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return m.SplitResponse(
        seed=manifest.seed,
        fraction=manifest.fraction,
        train=list(manifest.train_ids),
        test=list(manifest.test_ids),
    )


@app.post("/prepare", response_model=m.PrepareResponse)
def prepare(req: m.PrepareRequest) -> m.PrepareResponse:
    schema = _load_schema(req.schema_text)
    examples = []
    warnings: list[str] = []
    for rec in req.records:
        record = ReportRecord(rec.id, rec.report, rec.target)
        try:
            example, w = assemble_input(record, schema, req.organs, req.separator)
        except SchemaError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except CorpusError as exc:
            raise HTTPException(status_code=422, detail=f"record '{rec.id}': {exc}") from exc
        examples.append(
            m.PreparedExampleModel(id=example.id, input=example.input_text, target=example.target_text)
        )
        warnings.extend(f"record '{rec.id}': {msg}" for msg in w)
    return m.PrepareResponse(examples=examples, warnings=warnings)


def _score_report_json(preds: list[str], golds: list[str], pooled: bool) -> dict:
    try:
        return score_corpus(preds, golds, pooled_rouge=pooled).to_json_dict()
    except ReportQLError as exc:
        raise HTTPException(status_code=422, detail=f"gold: {exc}") from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.post("/score")
def score(req: m.ScoreRequest) -> dict:
    result = _score_report_json(
        [p.pred for p in req.pairs], [p.gold for p in req.pairs], req.pooled_rouge
    )
    if req.metric is not None:
        if req.metric not in result:
            raise HTTPException(
                status_code=400,
                detail=f"unknown metric '{req.metric}' (known: {', '.join(sorted(result))})",
            )
        return {req.metric: result[req.metric], "n_reports": result["n_reports"]}
    return result


@app.post("/evaluate")
def evaluate(req: m.EvaluateRequest) -> dict:
    golds: dict[str, str] = {}
    for obj in req.golds:
        rid = obj.get("id")
        text = obj.get("target", obj.get("prediction", obj.get("report")))
        if not isinstance(rid, str) or not isinstance(text, str):
            raise HTTPException(status_code=400, detail="gold records need 'id' and 'target'")
        golds[rid] = text
    preds: dict[str, str] = {}
    for obj in req.predictions:
        rid = obj.get("id")
        text = obj.get("prediction", obj.get("target"))
        if not isinstance(rid, str) or not isinstance(text, str):
            raise HTTPException(status_code=400, detail="predictions need 'id' and 'prediction'")
        if rid not in golds:
            raise HTTPException(status_code=400, detail=f"prediction for unknown id '{rid}'")
        preds[rid] = text
    if not golds:
        raise HTTPException(status_code=400, detail="empty gold corpus")
    # ids missing from the predictions are scored as empty predictions
    ordered_ids = list(golds)
    return _score_report_json(
        [preds.get(i, "") for i in ordered_ids],
        [golds[i] for i in ordered_ids],
        req.pooled_rouge,
    )


@app.post("/agreement", response_model=m.AgreementResponse)
def agreement_endpoint(req: m.AgreementRequest) -> m.AgreementResponse:
    schema = _load_schema(req.schema_text)
    recs_a = [ReportRecord(r.id, r.report, r.target) for r in req.records_a]
    recs_b = [ReportRecord(r.id, r.report, r.target) for r in req.records_b]
    try:
        kappa, table = agreement(recs_a, recs_b, schema)
    except CorpusError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return m.AgreementResponse(
        kappa=kappa,
        table=[
            m.SlotAgreementModel(
                path=list(t.path), n_items=t.n_items, observed_agreement=t.observed_agreement
            )
            for t in table
        ],
    )
