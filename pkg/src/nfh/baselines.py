"""Noun-position baselines and a one-vs-rest linear resolution baseline."""
import re

from .corpus import IMPLICIT_CLASSES, Resolution
from .evaluation import head_correct
from .identify_rules import CURRENCY_SYMBOLS, NOUN_TAGS, UD_NOUN_TAGS, span_head
from .linear import TrainConfig, train_linear, vectorize
from .numerals import is_digit_token, numeric_value

FIRST, LAST, CLOSEST = 'FIRST', 'LAST', 'CLOSEST'
STRATEGIES = (FIRST, LAST, CLOSEST)

CURRENCY_WORDS = frozenset([
    'dollar', 'dollars', 'buck', 'bucks', 'cent', 'cents', 'euro', 'euros',
    'pound', 'pounds', 'quid', 'grand', 'penny', 'pennies', 'nickel', 'dime',
    'yen', 'peso', 'pesos', 'dollar', 'franc', 'francs',
])
TIME_RE = re.compile(r"^(\d{1,2}:\d{2}|o'clock|[ap]\.?m\.?|noon|midnight)$", re.IGNORECASE)
PUNCT_RE = re.compile(r'^\W+$')
SIZE_BINS = (1, 10, 100, 1600, 2100)

_NOUNS = NOUN_TAGS | UD_NOUN_TAGS


def noun_baseline(example, anchor=None, strategy=CLOSEST, noun_tags=_NOUNS):
    """Index of the first, last or closest noun outside the anchor (ties go left)."""
    anchor = anchor or example.anchor
    nouns = [k for k, t in enumerate(example.tokens) if t.pos in noun_tags and k not in anchor]
    if not nouns:
        return None
    if strategy == FIRST:
        return nouns[0]
    if strategy == LAST:
        return nouns[-1]
    if strategy == CLOSEST:
        return min(nouns, key=lambda k: (anchor.distance(k), k))
    raise ValueError('unknown strategy %r' % (strategy,))


def noun_baseline_accuracy(examples, strategy):
    """Head accuracy of a noun baseline on the Reference examples only."""
    refs = [ex for ex in examples if ex.gold is not None and ex.gold.is_reference]
    if not refs:
        return 0.0
    hits = 0
    for ex in refs:
        k = noun_baseline(ex, ex.anchor, strategy)
        if k is not None and head_correct(Resolution.reference(k), ex.gold, ex.tokens):
            hits += 1
    return hits / len(refs)


def _bin(value, edges, labels):
    for edge, label in zip(edges, labels):
        if value < edge:
            return label
    return labels[-1]


def size_bin(value):
    if value is None:
        return 'NA'
    labels = ('<1', '1-10', '10-100', '100-1600', '1600-2100', '>=2100')
    return _bin(value, SIZE_BINS, labels)


def linear_resolution_feature_names(example, anchor=None):
    anchor = anchor or example.anchor
    toks = example.tokens
    s, e = example.sentence_range(anchor.start)
    i, j = anchor.start, anchor.end
    span_toks = toks[i:j + 1]
    f = ['bias']

    # labels
    head = span_head(toks, anchor)
    parent = toks[head].dep_head
    anchor_lemma = ' '.join(t.lemma for t in span_toks)
    parent_lemma = toks[parent].lemma if parent >= 0 else 'ROOT'
    f.append('anchor_head_lemma=%s|%s' % (anchor_lemma, parent_lemma))
    for d in (1, 2):
        for name, k in (('L%d' % d, i - d), ('R%d' % d, j + d)):
            inside = s <= k <= e
            f.append('lemma_%s=%s' % (name, toks[k].lemma if inside else '<PAD>'))
            f.append('pos_%s=%s' % (name, toks[k].pos if inside else '<PAD>'))
    f.append('dep=%s' % toks[head].dep_label)
    f.append('head_pos=%s' % (toks[parent].pos if parent >= 0 else 'ROOT'))
    f.append('head_lemma=%s' % parent_lemma)
    if parent >= 0:
        children = [k for k, t in enumerate(toks) if t.dep_head == parent]
        f.append('head_leftmost_child=%s' % (toks[children[0]].lemma if children else 'NONE'))
        for k in children:
            if k not in anchor:
                f.append('head_child=%s' % toks[k].lemma)

    # structure
    if any(toks[k].surface == '?' for k in range(s, i)):
        f.append('question_before')
    if any(toks[k].surface == '?' for k in range(j + 1, e + 1)):
        f.append('question_after')
    length = e - s + 1
    f.append('sent_len=%s' % _bin(length, (5, 10), ('<5', '<10', '>=10')))
    f.append('span_len=%s' % ('1' if len(anchor) == 1 else '2+'))
    if any('-' in t.surface for t in span_toks):
        f.append('span_hyphen')
    if any('/' in t.surface for t in span_toks):
        f.append('span_slash')
    if (i > 0 and "'" in toks[i - 1].surface) or (j + 1 < len(toks) and "'" in toks[j + 1].surface):
        f.append('apostrophe_adjacent')
    if j + 1 < len(toks) and toks[j + 1].lower == "'s":
        f.append('apostrophe_s_after')
    if all(PUNCT_RE.match(toks[k].surface) for k in range(j + 1, e + 1)):
        f.append('ends_sentence')

    # match
    outside = [t for k, t in enumerate(toks) if k not in anchor]
    if any(t.lower in CURRENCY_SYMBOLS or t.lower in CURRENCY_WORDS for t in outside):
        f.append('text_has_currency')
    if any(TIME_RE.match(t.surface) for t in outside):
        f.append('text_has_time')
    if any(t.entity is not None for t in toks):
        if any(toks[k].entity not in (None, '', 'O') for k in range(s, i)):
            f.append('entity_before')

    # other
    f.append('size=%s' % size_bin(numeric_value(span_toks)))
    f.append('shape=%s' % ('DIGIT' if all(is_digit_token(t.surface) for t in span_toks) else 'WORD'))
    return f


def extract_linear_resolution_features(example, anchor=None, bits=18):
    return vectorize(linear_resolution_feature_names(example, anchor), bits)


REF_LABELS = ('REF_' + CLOSEST, 'REF_' + FIRST, 'REF_' + LAST)
LABELS = IMPLICIT_CLASSES + REF_LABELS


def baseline_label(example):
    """Training label: the implicit class, or the first noun strategy that finds the head."""
    gold = example.gold
    if not gold.is_reference:
        return gold.implicit_class
    for strategy in (CLOSEST, FIRST, LAST):
        k = noun_baseline(example, example.anchor, strategy)
        if k is not None and head_correct(Resolution.reference(k), gold, example.tokens):
            return 'REF_' + strategy
    return 'REF_' + CLOSEST


class LinearResolutionBaseline:
    """One-vs-rest hinge classifiers over the six classes and three noun pickers."""

    def __init__(self, models, bits):
        self.models = models
        self.bits = bits

    @classmethod
    def train(cls, examples, config=None):
        config = config or TrainConfig(bits=18)
        vectors = [extract_linear_resolution_features(ex, ex.anchor, config.bits) for ex in examples]
        labels = [baseline_label(ex) for ex in examples]
        models = {}
        for name in LABELS:
            ys = [lab == name for lab in labels]
            if any(ys) and not all(ys):
                models[name] = train_linear(vectors, ys, config)
        if not models:
            raise ValueError('training data must contain at least two labels')
        return cls(models, config.bits)

    def predict(self, example, anchor=None):
        anchor = anchor or example.anchor
        x = extract_linear_resolution_features(example, anchor, self.bits)
        ranked = sorted(self.models, key=lambda name: (-self.models[name].margin(x), LABELS.index(name)))
        for name in ranked:
            if name.startswith('REF_'):
                k = noun_baseline(example, anchor, name[4:])
                if k is not None:
                    return Resolution.reference(k)
            else:
                return Resolution.implicit(name)
        return Resolution.implicit('OTHER')
