"""Numeric fused-head identification and resolution."""
from .baselines import LinearResolutionBaseline, extract_linear_resolution_features, noun_baseline
from .corpus import (AnchorSpan, Example, FormatError, IMPLICIT_CLASSES, Resolution, Token,
                     ValidationError, parse_example_record, partition_by_source, read_examples,
                     serialize_example, write_examples)
from .deterministic import PatternMatch, match_deterministic
from .embeddings import EmbeddingTable, load_embeddings
from .evaluation import Metrics, corpus_stats, evaluate, identification_scores
from .identify_ml import extract_identification_features, identify_learned, train_identifier
from .identify_rules import (RuleDecision, apply_filters, apply_textual_patterns,
                             identify_by_constituency, identify_rule_based)
from .linear import FeatureVector, LinearModel, TrainConfig, classify_span
from .neural import (ResolverConfig, ResolverParams, anchor_representation, encode_tokens,
                     loss_and_gradients, resolve, score_candidates, train_resolver)
from .numerals import detect_numeric_spans
from .trees import ConstituencyNode, parse_bracketed

__version__ = '0.1.0'
