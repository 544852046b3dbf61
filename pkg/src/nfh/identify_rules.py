"""Rule-based NFH identification over constituency and dependency parses.

Candidates come from headless noun phrases in the constituency tree and are
then pruned with dependency and surface filters.  A small registry of
textual patterns adds positives that parsers tend to miss.
"""
import json
from dataclasses import dataclass

from .numerals import detect_numeric_spans, is_ordinal_span

PHRASE_LABELS = frozenset(['NP', 'QP', 'NP-TMP', 'NX', 'SQ'])
# QP/NX are modifiers inside an NP; the NP decides whether a noun is present
_MODIFIER_PHRASES = frozenset(['QP', 'NX'])
_NP_LABELS = frozenset(['NP', 'NP-TMP'])

NOUN_TAGS = frozenset(['NN', 'NNS', 'NNP', 'NNPS'])
UD_NOUN_TAGS = frozenset(['NOUN', 'PROPN'])
PROPER_TAGS = frozenset(['NNP', 'NNPS', 'PROPN'])
DET_TAGS = frozenset(['DT', 'PDT', 'PRP$', 'WDT', 'DET'])
PRON_TAGS = frozenset(['PRP', 'PRON', 'WP'])
CURRENCY_SYMBOLS = frozenset(['$', '£', '€', '¥', 'us$', 'c$', 'a$'])
NUMMOD_LABELS = frozenset(['nummod', 'num'])
NAME_LABELS = frozenset(['compound', 'flat', 'flat:name', 'name', 'nn', 'appos'])
CLOCK_WORDS = frozenset(['strikes', 'strike', 'struck', 'striking', 'at'])
CLOCK_SUFFIXES = frozenset(["o'clock", 'am', 'pm', 'a.m.', 'p.m.'])

ORDINAL = 'ORD'
F_NOUN_HEAD, F_NUMMOD, F_CURRENCY, F_NAME = 'F1', 'F2', 'F3', 'F4'


class MissingParseError(ValueError):
    pass


def normalize_label(label):
    """Strip coindexation and function tags, keeping NP-TMP distinct."""
    label = label.split('=')[0]
    if label in PHRASE_LABELS:
        return label
    base = label.split('-')[0]
    return base if base and label[0] != '-' else label


def is_noun(pos, noun_tags=NOUN_TAGS | UD_NOUN_TAGS):
    return pos in noun_tags


@dataclass(frozen=True)
class RuleDecision:
    span: object
    fired_rule: str
    filtered_by: str = None

    @property
    def positive(self):
        return self.filtered_by is None


def span_head(tokens, span):
    """The span token whose dependency head lies outside the span."""
    for k in span.indices():
        h = tokens[k].dep_head
        if h < 0 or h not in span:
            return k
    return span.end


def _parents(tree):
    parents = {}
    stack = [tree]
    while stack:
        node = stack.pop()
        for child in node.children:
            parents[id(child)] = node
            stack.append(child)
    return parents


def identify_by_constituency(tree, tokens, noun_tags=NOUN_TAGS | UD_NOUN_TAGS):
    """Numeric spans whose innermost noun-phrase-like constituent has no noun.

    ``tree`` covers one sentence; numeric spans are detected within its
    leaves.  A QP or NX directly under an NP defers to that NP, so the number
    in ``(NP (QP eight or nine) (NNS clubs))`` is not headless.
    """
    leaves = tree.leaves()
    start = leaves[0]
    words = [tokens[k] for k in leaves]
    spans = [type(s)(s.start + start, s.end + start) for s in detect_numeric_spans(words)]
    if not spans:
        return []
    parents = _parents(tree)
    phrases = []
    for node in tree.subtrees():
        if normalize_label(node.label) in PHRASE_LABELS:
            lo, hi = node.span()
            phrases.append((hi - lo, lo, hi, node))
    out = []
    for span in spans:
        covering = [p for p in phrases if p[1] <= span.start and span.end <= p[2]]
        if not covering:
            continue
        node = min(covering, key=lambda p: p[0])[3]
        while normalize_label(node.label) in _MODIFIER_PHRASES:
            parent = parents.get(id(node))
            if parent is None or normalize_label(parent.label) not in _NP_LABELS:
                break
            node = parent
        if not any(leaf.label in noun_tags for leaf in node.preterminals()):
            out.append(span)
    return out


def _adjacent(tokens, span):
    out = []
    if span.start > 0:
        out.append(span.start - 1)
    if span.end + 1 < len(tokens):
        out.append(span.end + 1)
    return out


def _is_currency(token):
    return token.lower in CURRENCY_SYMBOLS or token.pos == '$'


def _in_name(tokens, span, head):
    for k in _adjacent(tokens, span):
        tok = tokens[k]
        if tok.pos not in PROPER_TAGS:
            continue
        if tok.dep_head in span and tok.dep_label in NAME_LABELS:
            return True
        if tokens[head].dep_head == k and tokens[head].dep_label in NAME_LABELS | NUMMOD_LABELS:
            return True
    return False


def check_filters(tokens, span, noun_tags=NOUN_TAGS | UD_NOUN_TAGS, dependency=True):
    """Return the first filter that rejects ``span``, or None.

    Surface filters run before the dependency ones: ordinals, an adjacent
    currency symbol (F3), membership in a proper name (F4), a noun as the
    syntactic head (F1), attachment by ``nummod`` (F2).
    """
    if is_ordinal_span(tokens, span):
        return ORDINAL
    if any(_is_currency(tokens[k]) for k in _adjacent(tokens, span)):
        return F_CURRENCY
    head = span_head(tokens, span)
    if _in_name(tokens, span, head):
        return F_NAME
    if not dependency:
        return None
    parent = tokens[head].dep_head
    if parent >= 0 and tokens[parent].pos in noun_tags:
        return F_NOUN_HEAD
    if tokens[head].dep_label in NUMMOD_LABELS:
        return F_NUMMOD
    return None


def apply_filters(candidates, tokens, noun_tags=NOUN_TAGS | UD_NOUN_TAGS, rule='CONST'):
    return [RuleDecision(span, rule, check_filters(tokens, span, noun_tags))
            for span in candidates]


# -- textual patterns -------------------------------------------------------

def _spans_at(tokens):
    return {s.start: s for s in detect_numeric_spans(tokens)}


def _followed_by_noun(tokens, span, noun_tags):
    k = span.end + 1
    return k < len(tokens) and tokens[k].pos in noun_tags


def pattern_num_or_num(tokens, noun_tags):
    """"eight or nine clubs": the first number of a coordinated pair."""
    spans = _spans_at(tokens)
    out = []
    for s in spans.values():
        k = s.end + 1
        if k + 1 < len(tokens) and tokens[k].lower == 'or' and (k + 1) in spans:
            second = spans[k + 1]
            if _followed_by_noun(tokens, second, noun_tags):
                out.append(s)
    return out


def pattern_noun_or_num(tokens, noun_tags):
    """"a thing or two": a bare number coordinated with a preceding noun."""
    out = []
    for s in detect_numeric_spans(tokens):
        if (s.start >= 2 and tokens[s.start - 1].lower == 'or'
                and tokens[s.start - 2].pos in noun_tags
                and not _followed_by_noun(tokens, s, noun_tags)):
            out.append(s)
    return out


def pattern_partitive(tokens, noun_tags):
    """"one of the reasons", "nine of them"."""
    out = []
    n = len(tokens)
    for s in detect_numeric_spans(tokens):
        k = s.end + 1
        if k + 1 >= n or tokens[k].lower != 'of':
            continue
        nxt = tokens[k + 1]
        if nxt.pos in PRON_TAGS:
            out.append(s)
        elif nxt.pos in DET_TAGS:
            if any(tokens[m].pos in noun_tags for m in range(k + 2, min(k + 5, n))):
                out.append(s)
    return out


def pattern_clock(tokens, noun_tags):
    """"when the clock strikes one", "meet me at five"."""
    out = []
    for s in detect_numeric_spans(tokens):
        if s.start == 0 or tokens[s.start - 1].lower not in CLOCK_WORDS:
            continue
        k = s.end + 1
        if k < len(tokens) and (tokens[k].pos in noun_tags or tokens[k].lower in CLOCK_SUFFIXES):
            continue
        out.append(s)
    return out


PATTERNS = {
    'P1': pattern_num_or_num,
    'P2': pattern_noun_or_num,
    'P3': pattern_partitive,
    'P4': pattern_clock,
}
DEFAULT_PATTERNS = ('P1', 'P2', 'P3', 'P4')


def load_pattern_registry(path):
    """Read ``[{"id": "P1", "enabled": true}, ...]`` and return enabled ids in order."""
    with open(path, encoding='utf-8') as f:
        entries = json.load(f)
    if not isinstance(entries, list):
        raise ValueError('pattern registry must be a JSON list')
    ids = []
    for entry in entries:
        if isinstance(entry, str):
            entry = {'id': entry, 'enabled': True}
        pid = entry.get('id')
        if pid not in PATTERNS:
            raise ValueError('unknown pattern id %r' % (pid,))
        if entry.get('enabled', True):
            ids.append(pid)
    return tuple(ids)


def _per_sentence(pattern, example, noun_tags):
    for s, e in example.sentence_bounds:
        for span in pattern(example.tokens[s:e + 1], noun_tags):
            yield type(span)(span.start + s, span.end + s)


def apply_textual_patterns(tokens, patterns=DEFAULT_PATTERNS, noun_tags=NOUN_TAGS | UD_NOUN_TAGS):
    """Spans matched by the enabled textual patterns, sorted and deduplicated."""
    found = set()
    for pid in patterns:
        found.update(PATTERNS[pid](tokens, noun_tags))
    return sorted(found)


def rule_decisions(example, patterns=DEFAULT_PATTERNS, noun_tags=NOUN_TAGS | UD_NOUN_TAGS):
    """Every candidate with the rule that produced it and any filter that removed it.

    Pattern hits bypass the dependency filters (they exist to recover cases the
    parses get wrong) but still honour the ordinal, currency and name filters.
    """
    if not example.trees:
        raise MissingParseError('example %s has no constituency trees; use the learned '
                                'identifier (identify --model) for unparsed input' % example.id)
    tokens = example.tokens
    decisions = {}
    for tree in example.trees:
        for d in apply_filters(identify_by_constituency(tree, tokens, noun_tags), tokens, noun_tags):
            decisions[d.span] = d
    for pid in patterns:
        for span in _per_sentence(PATTERNS[pid], example, noun_tags):
            current = decisions.get(span)
            if current is not None and current.positive:
                continue
            reason = check_filters(tokens, span, noun_tags, dependency=False)
            if current is None or reason is None:
                decisions[span] = RuleDecision(span, pid, reason)
    return [decisions[s] for s in sorted(decisions)]


def identify_rule_based(example, patterns=DEFAULT_PATTERNS, noun_tags=NOUN_TAGS | UD_NOUN_TAGS):
    """Positive NFH anchors of ``example``, sorted by position."""
    return [d.span for d in rule_decisions(example, patterns, noun_tags) if d.positive]
