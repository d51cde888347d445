"""Command-line client for the pipeline service.

Every subcommand is a thin client over the HTTP API: it reads files,
builds a JSON request, posts it to the service, and writes the response.
By default the service runs in-process (no network); `--server URL`
targets a running instance instead. Machine output goes to stdout,
diagnostics to stderr.

Exit codes: 0 success, 1 validation findings, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import json
import sys

import click
import httpx

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_IO = 3


class ServiceClient:
    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=120.0)
        else:
            # in-process ASGI client: same HTTP surface, no network
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from starlette.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app, base_url="http://radstruct.internal")

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        return self._handle(response)

    def get(self, path: str) -> dict:
        return self._handle(self._client.get(path))

    @staticmethod
    def _handle(response: httpx.Response) -> dict:
        if response.status_code == 422:
            detail = response.json().get("detail", response.text)
            click.echo(f"error: {detail}", err=True)
            sys.exit(EXIT_FINDINGS)
        if response.status_code == 400:
            detail = response.json().get("detail", response.text)
            click.echo(f"usage error: {detail}", err=True)
            sys.exit(EXIT_USAGE)
        response.raise_for_status()
        return response.json()


def _read_text(path: str | None) -> str:
    try:
        if path is None or path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        sys.exit(EXIT_IO)


def _read_jsonl(path: str) -> list[dict]:
    text = _read_text(path)
    records = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            click.echo(f"error: {path}:{line_no}: invalid JSON: {exc}", err=True)
            sys.exit(EXIT_FINDINGS)
    return records


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        click.echo(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        sys.exit(EXIT_IO)


def _emit_warnings(warnings: list[str]) -> None:
    for w in warnings:
        click.echo(f"warning: {w}", err=True)


def _schema_payload(schema_path: str | None) -> str | None:
    return None if schema_path is None else _read_text(schema_path)


def _organs_list(organs: tuple[str, ...]) -> list[str] | None:
    if not organs:
        return None
    names: list[str] = []
    for chunk in organs:
        names.extend(o.strip() for o in chunk.split(",") if o.strip())
    return names or None


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Remote service URL; default runs the service in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Structured radiology reporting pipeline."""
    ctx.obj = ServiceClient(server)


# -- schema -------------------------------------------------------------


@main.group()
def schema() -> None:
    """Information-schema operations."""


@schema.command("check")
@click.argument("schema_file", required=False)
@click.pass_obj
def schema_check(client: ServiceClient, schema_file: str | None) -> None:
    """Parse and validate a schema file (default: the shipped schema)."""
    result = client.post("/schema/check", {"schema_text": _schema_payload(schema_file)})
    if not result["ok"]:
        click.echo(f"error: {result['error']}", err=True)
        sys.exit(EXIT_FINDINGS)
    click.echo(json.dumps(
        {k: result[k] for k in ("version", "organs", "n_slot_paths", "slot_paths")}
    ))


@schema.command("linearize")
@click.argument("schema_file", required=False)
@click.option("--organs", multiple=True, help="Organ filter (comma-separated, repeatable).")
@click.pass_obj
def schema_linearize(client: ServiceClient, schema_file: str | None, organs) -> None:
    """Render the schema as a single brace-free context line."""
    result = client.post(
        "/schema/linearize",
        {"schema_text": _schema_payload(schema_file), "organs": _organs_list(organs)},
    )
    click.echo(result["text"])


# -- reportql -----------------------------------------------------------


@main.group()
def rql() -> None:
    """ReportQL text operations."""


@rql.command("parse")
@click.argument("file", required=False)
@click.pass_obj
def rql_parse(client: ServiceClient, file: str | None) -> None:
    """Parse ReportQL text (file or stdin); report structure or diagnostics."""
    result = client.post("/rql/parse", {"text": _read_text(file)})
    if not result["ok"]:
        click.echo(f"error: {result['error']}", err=True)
        sys.exit(EXIT_FINDINGS)
    _emit_warnings(result["warnings"])
    click.echo(json.dumps({"n_entries": result["n_entries"], "canonical": result["canonical"]}))


@rql.command("fmt")
@click.argument("file", required=False)
@click.pass_obj
def rql_fmt(client: ServiceClient, file: str | None) -> None:
    """Canonicalize ReportQL text (idempotent)."""
    result = client.post("/rql/fmt", {"text": _read_text(file)})
    _emit_warnings(result["warnings"])
    click.echo(result["canonical"])


@rql.command("flatten")
@click.argument("file", required=False)
@click.pass_obj
def rql_flatten(client: ServiceClient, file: str | None) -> None:
    """Flatten a report to (key-path, value) pairs, one JSON object per line."""
    result = client.post("/rql/flatten", {"text": _read_text(file)})
    _emit_warnings(result["warnings"])
    for pair in result["pairs"]:
        click.echo(json.dumps(pair))


@rql.command("diff")
@click.option("--pred", required=True, help="Predicted ReportQL file.")
@click.option("--gold", required=True, help="Gold ReportQL file.")
@click.pass_obj
def rql_diff(client: ServiceClient, pred: str, gold: str) -> None:
    """Multiset diff of flattened pairs between two reports."""
    result = client.post("/rql/diff", {"pred": _read_text(pred), "gold": _read_text(gold)})
    click.echo(json.dumps(result))
    if result["n_missing"] or result["n_spurious"]:
        sys.exit(EXIT_FINDINGS)


@rql.command("validate")
@click.argument("file", required=False)
@click.option("--schema", "schema_file", default=None, help="Schema file (default: shipped).")
@click.pass_obj
def rql_validate(client: ServiceClient, file: str | None, schema_file: str | None) -> None:
    """Check a report against a schema; violations exit with status 1."""
    result = client.post(
        "/rql/validate",
        {"text": _read_text(file), "schema_text": _schema_payload(schema_file)},
    )
    _emit_warnings(result["warnings"])
    click.echo(json.dumps(result["violations"]))
    if result["violations"]:
        sys.exit(EXIT_FINDINGS)


# -- pipeline -----------------------------------------------------------


@main.command("mask")
@click.option("--in", "in_path", required=True, help="Corpus JSONL ({id, report, ...}).")
@click.option("--out", default=None, help="Masked-corpus JSONL output (default stdout).")
@click.option("--rate", default=0.15, show_default=True)
@click.option("--mean-span", default=3.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_obj
def mask(client: ServiceClient, in_path: str, out: str | None,
         rate: float, mean_span: float, seed: int) -> None:
    """Generate span-corruption pre-training pairs from report text."""
    records = _read_jsonl(in_path)
    result = client.post(
        "/mask",
        {"records": records, "rate": rate, "mean_span_len": mean_span, "seed": seed},
    )
    _write_output("\n".join(json.dumps(ex) for ex in result["examples"]), out)


@main.command("split")
@click.option("--in", "in_path", required=True, help="Corpus JSONL.")
@click.option("--out", default=None, help="Manifest JSON output (default stdout).")
@click.option("--fraction", default=0.8, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_obj
def split_cmd(client: ServiceClient, in_path: str, out: str | None,
              fraction: float, seed: int) -> None:
    """Deterministic train/test split of a corpus."""
    records = _read_jsonl(in_path)
    ids = [r.get("id") for r in records]
    if any(not isinstance(i, str) for i in ids):
        click.echo("error: every corpus record needs an 'id'", err=True)
        sys.exit(EXIT_FINDINGS)
    result = client.post("/split", {"ids": ids, "fraction": fraction, "seed": seed})
    _write_output(json.dumps(result), out)


@main.command("prepare")
@click.option("--in", "in_path", required=True, help="Corpus JSONL.")
@click.option("--out", default=None, help="Prepared JSONL output (default stdout).")
@click.option("--schema", "schema_file", default=None, help="Schema file (default: shipped).")
@click.option("--organs", multiple=True, help="Organ filter (comma-separated, repeatable).")
@click.pass_obj
def prepare(client: ServiceClient, in_path: str, out: str | None,
            schema_file: str | None, organs) -> None:
    """Assemble model inputs: linearized schema + separator + report text."""
    records = _read_jsonl(in_path)
    result = client.post(
        "/prepare",
        {
            "records": records,
            "schema_text": _schema_payload(schema_file),
            "organs": _organs_list(organs),
        },
    )
    _emit_warnings(result["warnings"])
    _write_output("\n".join(json.dumps(ex) for ex in result["examples"]), out)


# -- scoring ------------------------------------------------------------


def _text_of(obj: dict, keys: tuple[str, ...], path: str) -> str:
    for key in keys:
        value = obj.get(key)
        if isinstance(value, str):
            return value
    click.echo(f"error: record in {path} lacks any of {keys}", err=True)
    sys.exit(EXIT_FINDINGS)


@main.command("score")
@click.option("--pred", required=True, help="Predictions JSONL ({id, prediction}).")
@click.option("--gold", required=True, help="Gold JSONL ({id, target} or corpus format).")
@click.option("--metric", default=None, help="Emit a single metric from the report.")
@click.option("--pooled", is_flag=True, help="Corpus-pooled ROUGE instead of macro-average.")
@click.pass_obj
def score(client: ServiceClient, pred: str, gold: str, metric: str | None, pooled: bool) -> None:
    """Score line-aligned prediction/gold pairs (joined by id)."""
    _evaluate_common(client, pred, gold, pooled, metric)


@main.command("evaluate")
@click.option("--pred", required=True, help="Predictions JSONL ({id, prediction}).")
@click.option("--gold", required=True, help="Gold JSONL ({id, target} or corpus format).")
@click.option("--pooled", is_flag=True, help="Corpus-pooled ROUGE instead of macro-average.")
@click.pass_obj
def evaluate(client: ServiceClient, pred: str, gold: str, pooled: bool) -> None:
    """Full score report (ROUGE, BLEU variants, exact-match) as JSON."""
    _evaluate_common(client, pred, gold, pooled, None)


def _evaluate_common(client: ServiceClient, pred: str, gold: str,
                     pooled: bool, metric: str | None) -> None:
    preds = _read_jsonl(pred)
    golds = _read_jsonl(gold)
    result = client.post(
        "/evaluate",
        {"predictions": preds, "golds": golds, "pooled_rouge": pooled},
    )
    if metric is not None:
        if metric not in result:
            click.echo(f"usage error: unknown metric '{metric}'", err=True)
            sys.exit(EXIT_USAGE)
        result = {metric: result[metric], "n_reports": result["n_reports"]}
    click.echo(json.dumps(result))


@main.command("agreement")
@click.option("--a", "path_a", required=True, help="Annotator A corpus JSONL.")
@click.option("--b", "path_b", required=True, help="Annotator B corpus JSONL.")
@click.option("--schema", "schema_file", default=None, help="Schema file (default: shipped).")
@click.pass_obj
def agreement_cmd(client: ServiceClient, path_a: str, path_b: str,
                  schema_file: str | None) -> None:
    """Cohen's kappa between two annotators over schema slot decisions."""
    result = client.post(
        "/agreement",
        {
            "records_a": _read_jsonl(path_a),
            "records_b": _read_jsonl(path_b),
            "schema_text": _schema_payload(schema_file),
        },
    )
    click.echo(json.dumps(result))


# -- misc ---------------------------------------------------------------


@main.command("fixtures")
@click.option("--out", default=None, help="Output corpus JSONL (default stdout).")
@click.option("--n", default=40, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--organs", multiple=True, help="Organs to template (comma-separated).")
def fixtures_cmd(out: str | None, n: int, seed: int, organs) -> None:
    """Write the synthetic templated fixture corpus (runs locally)."""
    from .fixtures import make_synthetic_corpus

    names = _organs_list(organs)
    kwargs = {"organs": tuple(names)} if names else {}
    records = make_synthetic_corpus(n=n, seed=seed, **kwargs)
    lines = [
        json.dumps({"id": r.id, "report": r.report_text, "target": r.target})
        for r in records
    ]
    _write_output("\n".join(lines), out)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("radstruct.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
