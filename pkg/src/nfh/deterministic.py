"""High-precision patterns resolved without the neural model.

``no one`` and ``you two`` are literal matches resolving to PEOPLE.  The
partitive (``four of the children``) and copular (``Theresa is the one``)
patterns follow dependency arcs to a noun in the context.  Both PTB/spaCy
style arcs (prep/pobj, attr) and UD style arcs (nmod+case, cop) are read.
"""
from dataclasses import dataclass

from .corpus import Resolution
from .identify_rules import NOUN_TAGS, PRON_TAGS, UD_NOUN_TAGS

NO_ONE, YOU_TWO, PARTITIVE, COPULAR = 'NO_ONE', 'YOU_TWO', 'PARTITIVE', 'COPULAR'
PATTERN_ORDER = (NO_ONE, YOU_TWO, PARTITIVE, COPULAR)

_NOUNS = NOUN_TAGS | UD_NOUN_TAGS
_SUBJECT_LABELS = frozenset(['nsubj', 'nsubjpass', 'nsubj:pass'])


@dataclass(frozen=True)
class PatternMatch:
    pattern: str
    resolution: Resolution


def _children(tokens, parents):
    for k, tok in enumerate(tokens):
        if tok.dep_head in parents:
            yield k


def _literal(tokens, anchor, before, word):
    return (anchor.start == anchor.end and anchor.start > 0
            and tokens[anchor.start].lower == word
            and tokens[anchor.start - 1].lower == before)


def _partitive_object(tokens, anchor):
    for k in _children(tokens, anchor):
        tok = tokens[k]
        # PTB/spaCy: NUM -prep-> of -pobj-> NOUN
        if tok.lower == 'of' and tok.dep_label == 'prep':
            for m in _children(tokens, (k,)):
                if tokens[m].dep_label == 'pobj':
                    return m
        # UD: NUM -nmod-> NOUN -case-> of
        if tok.dep_label.split(':')[0] == 'nmod':
            if any(tokens[m].lower == 'of' and tokens[m].dep_label == 'case'
                   for m in _children(tokens, (k,))):
                return k
    return None


def _copular_subject(tokens, anchor):
    if anchor.start != anchor.end or tokens[anchor.start].lower != 'one':
        return None
    a = anchor.start
    head = tokens[a].dep_head
    # spaCy: one -attr-> be <-nsubj- X
    if head >= 0 and tokens[head].lemma == 'be':
        for k in _children(tokens, (head,)):
            if tokens[k].dep_label in _SUBJECT_LABELS:
                return k
    # UD: be -cop-> one <-nsubj- X
    if any(tokens[k].dep_label == 'cop' and tokens[k].lemma == 'be' for k in _children(tokens, (a,))):
        for k in _children(tokens, (a,)):
            if tokens[k].dep_label in _SUBJECT_LABELS:
                return k
    return None


def match_deterministic(example, anchor=None):
    """First matching pattern in NO_ONE, YOU_TWO, PARTITIVE, COPULAR order, or None."""
    anchor = anchor or example.anchor
    tokens = example.tokens
    if _literal(tokens, anchor, 'no', 'one'):
        return PatternMatch(NO_ONE, Resolution.implicit('PEOPLE'))
    if _literal(tokens, anchor, 'you', 'two'):
        return PatternMatch(YOU_TWO, Resolution.implicit('PEOPLE'))
    obj = _partitive_object(tokens, anchor)
    if obj is not None and obj not in anchor and tokens[obj].pos in _NOUNS \
            and tokens[obj].pos not in PRON_TAGS:
        return PatternMatch(PARTITIVE, Resolution.reference(obj))
    subj = _copular_subject(tokens, anchor)
    if subj is not None and subj not in anchor and tokens[subj].pos in _NOUNS:
        return PatternMatch(COPULAR, Resolution.reference(subj))
    return None
