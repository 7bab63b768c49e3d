"""Block-level document comparison.

Matches layout blocks between two versions of a document with an
attributed layout graph and an iterative cross-graph matcher under
Sinkhorn normalization, then reports per-block text deltas as edit
scripts.  Ships its own differentiable kernel, synthetic mutation
corpus generator and training loop.
"""

from .docmodel import (
    BBox,
    Block,
    Document,
    DocumentError,
    Page,
    StyledRun,
    load_document,
    save_document,
)
from .editscript import EditScript, apply_script, char_distance, levenshtein, word_tokens
from .encoder import encode_layout, layout_similarity
from .layoutgraph import LayoutGraph, build_graph
from .matching import (
    MatchError,
    MatchOptions,
    MatchSet,
    SoftCorrespondence,
    discretize,
    match_documents,
    match_graphs,
)
from .nn import Model
from .pipeline import DiffReport, PairDiff, compare_documents
from .synth import GroundTruth, MutationConfig, config_for_intensity, gen_document, mutate_document
from .training import CorpusSpec, build_corpus, evaluate, greedy_text_match, train

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "Block",
    "CorpusSpec",
    "DiffReport",
    "Document",
    "DocumentError",
    "EditScript",
    "GroundTruth",
    "LayoutGraph",
    "MatchError",
    "MatchOptions",
    "MatchSet",
    "Model",
    "MutationConfig",
    "Page",
    "PairDiff",
    "SoftCorrespondence",
    "StyledRun",
    "apply_script",
    "build_corpus",
    "build_graph",
    "char_distance",
    "compare_documents",
    "config_for_intensity",
    "discretize",
    "encode_layout",
    "evaluate",
    "gen_document",
    "greedy_text_match",
    "layout_similarity",
    "levenshtein",
    "load_document",
    "match_documents",
    "match_graphs",
    "mutate_document",
    "save_document",
    "train",
    "word_tokens",
    "__version__",
]
