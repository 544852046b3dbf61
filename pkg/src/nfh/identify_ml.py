"""Learned FH/not-FH classification of numeric spans.

Four templates: the anchor string, lowercased words in a 3-token window on
each side, POS tags in the same window, and the POS tag of the anchor's
syntactic head.  Windows stop at sentence boundaries and are padded.
"""
from .identify_rules import identify_rule_based, span_head
from .linear import DEFAULT_BITS, LinearModel, TrainConfig, train_linear, vectorize

PAD = '<PAD>'
WINDOW = 3
ABLATIONS = ('full', '-dep', '-pos', '-dep-pos')
_ABLATION_CODES = {name: k for k, name in enumerate(ABLATIONS)}


def _check_ablation(ablation):
    if ablation not in _ABLATION_CODES:
        raise ValueError('unknown ablation %r (choose from %s)' % (ablation, ', '.join(ABLATIONS)))


def identification_feature_names(example, span, ablation='full'):
    _check_ablation(ablation)
    tokens = example.tokens
    s, e = example.sentence_range(span.start)
    names = ['T1=' + ' '.join(tokens[k].surface for k in span.indices())]

    def window():
        for d in range(1, WINDOW + 1):
            k = span.start - d
            yield 'L%d' % d, tokens[k] if k >= s else None
            k = span.end + d
            yield 'R%d' % d, tokens[k] if k <= e else None

    for pos_name, tok in window():
        names.append('T2:%s=%s' % (pos_name, tok.lower if tok else PAD))
    if ablation in ('full', '-dep'):
        for pos_name, tok in window():
            names.append('T3:%s=%s' % (pos_name, tok.pos if tok else PAD))
    if ablation in ('full', '-pos'):
        head = tokens[span_head(tokens, span)].dep_head
        names.append('T4=%s' % (tokens[head].pos if head >= 0 else 'ROOT'))
    return names


def extract_identification_features(example, span, ablation='full', bits=DEFAULT_BITS):
    return vectorize(identification_feature_names(example, span, ablation), bits)


def rule_labeled_dataset(examples, ablation='full', bits=DEFAULT_BITS, patterns=None):
    """(features, label) pairs for every cardinal span, labeled by the rule cascade.

    Examples that carry a gold ``is_fh`` for their anchor use it instead.
    """
    from .identify_rules import DEFAULT_PATTERNS
    patterns = DEFAULT_PATTERNS if patterns is None else patterns
    vectors, labels = [], []
    for ex in examples:
        if ex.is_fh is not None and ex.anchor is not None:
            vectors.append(extract_identification_features(ex, ex.anchor, ablation, bits))
            labels.append(ex.is_fh)
            continue
        positives = set(identify_rule_based(ex, patterns))
        for span in ex.numeric_spans(cardinal_only=True):
            vectors.append(extract_identification_features(ex, span, ablation, bits))
            labels.append(span in positives)
    return vectors, labels


def train_identifier(vectors, labels, config=None, ablation='full'):
    _check_ablation(ablation)
    config = config or TrainConfig()
    model = train_linear(vectors, labels, config)
    model.meta = _ABLATION_CODES[ablation]
    return model


def model_ablation(model):
    return ABLATIONS[model.meta] if model.meta < len(ABLATIONS) else 'full'


def identify_learned(model, example):
    """Spans classified FH by ``model``, with margins: ``[(span, margin), ...]``."""
    ablation = model_ablation(model)
    out = []
    for span in example.numeric_spans(cardinal_only=True):
        is_fh, margin = model.classify(
            extract_identification_features(example, span, ablation, model.bits))
        if is_fh:
            out.append((span, margin))
    return out


def load_identifier(path):
    return LinearModel.load(path)
