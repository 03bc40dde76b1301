"""Contrastive explanations for black-box text generators.

Given a prompt and the response a generator produced for it, the searches in
this package look for a minimally perturbed prompt (word spans masked and
infilled) whose response differs by a chosen metric threshold, optionally
under a hard cap on generator calls.
"""

from .cache import ResponseCache, fingerprint
from .clients import (
    CachedEmbedder,
    CachedGenerator,
    CachedInfiller,
    CachedJudgeScorer,
    CachedNliScorer,
    CachedPreferenceScorer,
    EmbedderClient,
    GeneratorClient,
    GeneratorSession,
    InfillerClient,
    JudgeClient,
    MockEmbedder,
    MockGenerator,
    MockInfiller,
    MockJudgeScorer,
    MockNliScorer,
    MockPreferenceScorer,
    NliClient,
    NliProbs,
    PreferenceClient,
)
from .config import (
    ClientBundle,
    MetricParams,
    RunConfig,
    build_clients,
    build_metric,
    load_config,
    parse_config,
)
from .errors import (
    AuthError,
    BudgetExhaustedError,
    ClientError,
    ConfigError,
    DuplicateSpanError,
    EmptyBatchError,
    EmptyPromptError,
    IndexNotRemainingError,
    MalformedResponseError,
    MaskTokenError,
    NetworkError,
    PromptContrastError,
)
from .evaluation import (
    DEFAULT_BASELINE_TEMPLATE,
    ColumnStats,
    EvalReport,
    EvalRow,
    aggregate,
    baseline_contrast,
    content_preservation,
    cosine_similarity,
    flip_rate,
    plot_data,
)
from .http import (
    HttpEmbedder,
    HttpEndpoint,
    HttpGenerator,
    HttpInfiller,
    HttpJudgeScorer,
    HttpNliScorer,
    HttpPreferenceScorer,
)
from .metrics import (
    ContrastMetric,
    bleu_composite_metric,
    contradiction_metric,
    preference_metric,
    report_distance,
    rubric_judge_metric,
)
from .perturb import extract_replacement, perturb_candidate
from .search_budget import (
    best_subset,
    budgeted_search,
    generate_centers,
    num_centers,
    sample_centers,
    sampling_quota,
)
from .search_greedy import greedy_search
from .scoring import ScoredCandidate, score_candidates
from .textops import (
    MaskedPrompt,
    bleu,
    diff_modifications,
    mask,
    span_surfaces,
    split_tokens,
    word_levenshtein,
)
from .types import (
    ANCHOR_CURRENT,
    ANCHOR_ORIGINAL,
    MASK_TOKEN,
    MODE_MEMOIZED,
    MODE_STRICT,
    BestTracker,
    BudgetLedger,
    Candidate,
    ExplanationRecord,
    FOUND_BUDGET,
    FOUND_ERROR,
    FOUND_EXHAUSTED,
    FOUND_THRESHOLD,
    ModificationRecord,
    PromptText,
    ScheduleState,
    SearchConfig,
    SpanSplit,
    normalize_prompt,
)

__version__ = "0.1.0"
