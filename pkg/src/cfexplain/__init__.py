"""Counterfactual explanations for black-box code-diff classifiers."""

from .adapters import (
    MASK_SENTINEL,
    Classifier,
    FillCandidate,
    FillRequest,
    MaskFiller,
    NgramClassifier,
    NgramFiller,
    Prediction,
    TriggerClassifier,
)
from .diffs import Diff, DiffLine, LineKind, parse_diff
from .evaluation import (
    ComparisonOutcome,
    MethodStats,
    Rationale,
    Report,
    Verdict,
    alignment,
    decide_win,
    report_table,
)
from .lexer import DEFAULT_KEYWORDS, TokenKind, load_keywords
from .program import (
    ConsistencyGroup,
    Token,
    TokenizedProgram,
    apply_substitution,
    program_to_json,
    remove_groups,
    render_diff,
    tokenize,
)
from .ranking import RankedExplanations, proximity_span, rank, ranked_to_json
from .remote import ProcTransport, RemoteClassifier, RemoteFiller, TcpTransport, ping
from .search import (
    Candidate,
    Explanation,
    SearchConfig,
    choose,
    filter_added_lines,
    find_counterfactual,
    generate_explanations,
)
from .sedc import RemovalExplanation, sedc_explain
from .synth import (
    PlantedInstance,
    brute_force_oracle,
    explanation_key,
    generate_instance,
    instance_classifier,
    instance_filler,
    load_instance,
    write_fill_corpus,
    write_instance,
)

__version__ = "0.1.0"
