"""Toolkit for structured radiology reporting: hierarchical information
schemas, the bracketed ReportQL output language, span-corruption data
generation, corpus preparation, and the evaluation battery."""

from .corpus import (
    PreparedExample,
    ReportRecord,
    SplitManifest,
    agreement,
    assemble_input,
    export_prepared,
    import_predictions,
    import_prepared,
    load_corpus,
    split,
)
from .corruption import MaskedExample, corrupt, corrupt_corpus, reconstruct
from .metrics import (
    BleuScore,
    ExactMatchScore,
    RougeScore,
    ScoreReport,
    bleu_corpus,
    cohen_kappa,
    exact_match,
    rouge_l,
    rouge_n,
    score_corpus,
    tokenize_canonical,
    tokenize_simple,
)
from .reportql import (
    Entry,
    ReportDoc,
    ReportQLError,
    SlotPair,
    diff_reports,
    flatten,
    parse_report,
    serialize_canonical,
    validate_against_schema,
)
from .schema import (
    OrganSchema,
    SchemaError,
    SchemaSet,
    SlotNode,
    linearize_schema,
    list_slot_paths,
    parse_schema,
    serialize_schema,
)

__version__ = "0.1.0"
