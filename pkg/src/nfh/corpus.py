"""Data model, JSONL ingestion/serialization and corpus splitting."""
import json
from dataclasses import dataclass, field

import numpy as np

from .trees import TreeFormatError, parse_bracketed

ROOT = -1

IMPLICIT_CLASSES = ('YEAR', 'AGE', 'CURRENCY', 'PEOPLE', 'TIME', 'OTHER')
REFERENCE = 'REFERENCE'
IMPLICIT = 'IMPLICIT'
# annotators' UNKNOWN answers are folded into OTHER
_CLASS_ALIASES = {'UNKNOWN': 'OTHER', 'PERSON': 'PEOPLE', 'PERSON/PEOPLE': 'PEOPLE'}


class FormatError(ValueError):
    """Input that cannot be decoded at all (bad JSON, bad tree, bad vectors)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = 'line %d: %s' % (line, message)
        super().__init__(message)


class ValidationError(ValueError):
    """Decoded input that violates an invariant; ``field`` names the culprit."""

    def __init__(self, field, message, line=None):
        self.field = field
        self.line = line
        prefix = '' if line is None else 'line %d: ' % line
        super().__init__('%sinvalid %s: %s' % (prefix, field, message))


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str = '_'
    dep_head: int = ROOT
    dep_label: str = '_'
    lemma: str = None
    entity: str = None

    def __post_init__(self):
        if self.lemma is None:
            object.__setattr__(self, 'lemma', self.surface.lower())

    @property
    def lower(self):
        return self.surface.lower()


@dataclass(frozen=True, order=True)
class AnchorSpan:
    """Inclusive token range ``start..end``."""
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError('span start %d > end %d' % (self.start, self.end))

    def __len__(self):
        return self.end - self.start + 1

    def __contains__(self, index):
        return self.start <= index <= self.end

    def indices(self):
        return range(self.start, self.end + 1)

    def distance(self, index):
        """Token distance from ``index`` to the nearest edge of the span."""
        if index < self.start:
            return self.start - index
        if index > self.end:
            return index - self.end
        return 0


@dataclass(frozen=True)
class Resolution:
    kind: str
    ref_token: int = None
    implicit_class: str = None
    gold_ref_tokens: tuple = ()

    def __post_init__(self):
        if self.kind == REFERENCE:
            if self.ref_token is None or self.implicit_class is not None:
                raise ValueError('a Reference resolution needs ref_token only')
            if not self.gold_ref_tokens:
                object.__setattr__(self, 'gold_ref_tokens', (self.ref_token,))
        elif self.kind == IMPLICIT:
            if self.implicit_class not in IMPLICIT_CLASSES or self.ref_token is not None:
                raise ValueError('bad implicit resolution %r' % (self.implicit_class,))
        else:
            raise ValueError('unknown resolution kind %r' % (self.kind,))

    @classmethod
    def reference(cls, token, heads=None):
        return cls(REFERENCE, ref_token=token,
                   gold_ref_tokens=tuple(heads) if heads else (token,))

    @classmethod
    def implicit(cls, name):
        return cls(IMPLICIT, implicit_class=name)

    @property
    def is_reference(self):
        return self.kind == REFERENCE

    @property
    def category(self):
        """The 7-way label: an implicit class name or REFERENCE."""
        return REFERENCE if self.is_reference else self.implicit_class

    def to_json(self):
        if self.is_reference:
            return {'kind': 'reference', 'heads': list(self.gold_ref_tokens)}
        return {'kind': 'implicit', 'class': self.implicit_class}


@dataclass(frozen=True)
class Example:
    id: str
    tokens: tuple
    sentence_bounds: tuple
    turn_bounds: tuple = ()
    tree_strings: tuple = ()
    anchor: AnchorSpan = None
    gold: Resolution = None
    is_fh: bool = None
    trees: tuple = field(default=(), compare=False, repr=False)

    def __len__(self):
        return len(self.tokens)

    @property
    def source(self):
        return self.id.split('/', 1)[0]

    @property
    def words(self):
        return [t.surface for t in self.tokens]

    def sentence_of(self, index):
        """Index into ``sentence_bounds`` of the sentence holding token ``index``."""
        for k, (s, e) in enumerate(self.sentence_bounds):
            if s <= index <= e:
                return k
        raise IndexError(index)

    def sentence_range(self, index):
        return self.sentence_bounds[self.sentence_of(index)]

    def with_anchor(self, anchor, gold=None, is_fh=None):
        return Example(self.id, self.tokens, self.sentence_bounds,
                       self.turn_bounds, self.tree_strings, anchor, gold,
                       is_fh, self.trees)

    def numeric_spans(self, cardinal_only=False):
        """Numeric spans detected sentence by sentence."""
        from .numerals import detect_numeric_spans, is_ordinal_span
        out = []
        for s, e in self.sentence_bounds:
            for span in detect_numeric_spans(self.tokens[s:e + 1]):
                span = AnchorSpan(span.start + s, span.end + s)
                if not (cardinal_only and is_ordinal_span(self.tokens, span)):
                    out.append(span)
        return out

    def text(self, span=None):
        if span is None:
            return ' '.join(self.words)
        return ' '.join(self.words[span.start:span.end + 1])


def closest_head(heads, anchor):
    """Closest head to the anchor by token distance; ties go leftward."""
    return min(heads, key=lambda k: (anchor.distance(k), k))


def _check_tiling(name, ranges, n, line):
    expected = 0
    for s, e in ranges:
        if s != expected or e < s:
            raise ValidationError(name, 'ranges must tile tokens 0..%d in order' % (n - 1), line)
        expected = e + 1
    if expected != n:
        raise ValidationError(name, 'ranges cover %d of %d tokens' % (expected, n), line)


def _pair(value, name, line):
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)):
        raise ValidationError(name, 'expected a pair of integers, got %r' % (value,), line)
    return int(value[0]), int(value[1])


def example_from_dict(obj, line=None):
    """Build and validate an Example from a decoded JSON record."""
    if not isinstance(obj, dict):
        raise FormatError('record is not a JSON object', line)
    for key in ('id', 'tokens', 'sents'):
        if key not in obj:
            raise ValidationError(key, 'missing', line)
    if not isinstance(obj['id'], str) or not obj['id']:
        raise ValidationError('id', 'must be a non-empty string', line)
    raw_tokens = obj['tokens']
    if not isinstance(raw_tokens, list) or not raw_tokens:
        raise ValidationError('tokens', 'must be a non-empty list', line)
    n = len(raw_tokens)

    sents = tuple(_pair(v, 'sents', line) for v in obj['sents'])
    _check_tiling('sents', sents, n, line)

    turns_raw = obj.get('turns') or []
    turns = []
    for v in turns_raw:
        if not isinstance(v, (list, tuple)) or len(v) != 3:
            raise ValidationError('turns', 'expected [speaker, start, end], got %r' % (v,), line)
        s, e = _pair(v[1:], 'turns', line)
        turns.append((str(v[0]), s, e))
    turns = tuple(turns)
    if turns:
        _check_tiling('turns', [(s, e) for _, s, e in turns], n, line)

    def sentence_index(i):
        for k, (s, e) in enumerate(sents):
            if s <= i <= e:
                return k
        return None

    tokens = []
    for i, t in enumerate(raw_tokens):
        if not isinstance(t, dict) or not isinstance(t.get('t'), str) or not t['t']:
            raise ValidationError('tokens[%d]' % i, 'needs a non-empty "t" surface', line)
        head = t.get('h', ROOT)
        if head is None:
            head = ROOT
        if not isinstance(head, int) or isinstance(head, bool):
            raise ValidationError('tokens[%d].h' % i, 'head must be an integer', line)
        if head != ROOT:
            if not 0 <= head < n or head == i:
                raise ValidationError('tokens[%d].h' % i, 'head %d out of range' % head, line)
            if sentence_index(head) != sentence_index(i):
                raise ValidationError('tokens[%d].h' % i, 'head %d crosses a sentence boundary' % head, line)
        tokens.append(Token(t['t'], t.get('p', '_'), head, t.get('d', '_'),
                            t.get('l') or t['t'].lower(), t.get('e')))
    tokens = tuple(tokens)

    tree_strings = tuple(obj.get('trees') or ())
    trees = ()
    if tree_strings:
        if len(tree_strings) != len(sents):
            raise ValidationError('trees', 'need one tree per sentence (%d vs %d)'
                                  % (len(tree_strings), len(sents)), line)
        parsed = []
        for (s, e), text in zip(sents, tree_strings):
            if not isinstance(text, str):
                raise ValidationError('trees', 'each tree must be a bracketed string', line)
            try:
                tree, words = parse_bracketed(text, offset=s)
            except TreeFormatError as err:
                raise FormatError('bad tree: %s' % err, line) from None
            if len(words) != e - s + 1:
                raise ValidationError('trees', 'tree has %d leaves for a %d-token sentence'
                                      % (len(words), e - s + 1), line)
            parsed.append(tree)
        trees = tuple(parsed)

    anchor = None
    if obj.get('anchor') is not None:
        i, j = _pair(obj['anchor'], 'anchor', line)
        if not (0 <= i <= j < n):
            raise ValidationError('anchor', 'span [%d,%d] out of range' % (i, j), line)
        if sentence_index(i) != sentence_index(j):
            raise ValidationError('anchor', 'span [%d,%d] crosses a sentence boundary' % (i, j), line)
        anchor = AnchorSpan(i, j)
        if turns:
            k = next(k for k, (_, s, e) in enumerate(turns) if s <= i <= e)
            if turns[k][2] < j:
                raise ValidationError('anchor', 'span crosses a turn boundary', line)
            if k > 2 or len(turns) - k - 1 > 1:
                raise ValidationError('turns', 'context may hold at most two turns before '
                                      'and one after the anchor turn', line)

    gold = None
    if obj.get('gold') is not None:
        gold = _resolution_from_json(obj['gold'], anchor, n, line, 'gold')

    is_fh = obj.get('is_fh')
    if is_fh is not None and not isinstance(is_fh, bool):
        raise ValidationError('is_fh', 'must be true, false or null', line)

    return Example(obj['id'], tokens, sents, turns, tree_strings, anchor, gold, is_fh, trees)


def _resolution_from_json(g, anchor, n, line, name):
    if not isinstance(g, dict):
        raise ValidationError(name, 'must be an object', line)
    kind = g.get('kind')
    if kind == 'reference':
        heads = g.get('heads')
        if (not isinstance(heads, list) or not heads
                or not all(isinstance(h, int) and not isinstance(h, bool) for h in heads)):
            raise ValidationError(name + '.heads', 'must be a non-empty list of token indices', line)
        for h in heads:
            if not 0 <= h < n:
                raise ValidationError(name + '.heads', 'head %d out of range' % h, line)
            if anchor is not None and h in anchor:
                raise ValidationError(name + '.heads', 'head %d lies inside the anchor' % h, line)
        target = closest_head(heads, anchor) if anchor is not None else heads[0]
        return Resolution.reference(target, heads)
    if kind == 'implicit':
        cls = str(g.get('class', '')).upper()
        cls = _CLASS_ALIASES.get(cls, cls)
        if cls not in IMPLICIT_CLASSES:
            raise ValidationError(name + '.class', 'unknown class %r' % g.get('class'), line)
        return Resolution.implicit(cls)
    raise ValidationError(name + '.kind', 'must be "reference" or "implicit"', line)


def resolution_from_json(obj, anchor=None, n=None, line=None):
    return _resolution_from_json(obj, anchor, n if n is not None else 10 ** 9, line, 'resolution')


def parse_example_record(line, lineno=None):
    """Parse one JSONL line into a validated Example."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as err:
        raise FormatError('malformed JSON: %s' % err.msg, lineno) from None
    return example_from_dict(obj, lineno)


def example_to_dict(ex):
    tokens = []
    for t in ex.tokens:
        d = {'t': t.surface, 'p': t.pos, 'h': t.dep_head, 'd': t.dep_label, 'l': t.lemma}
        if t.entity is not None:
            d['e'] = t.entity
        tokens.append(d)
    obj = {
        'id': ex.id,
        'tokens': tokens,
        'sents': [list(b) for b in ex.sentence_bounds],
        'turns': [list(b) for b in ex.turn_bounds],
        'trees': list(ex.tree_strings),
        'anchor': None if ex.anchor is None else [ex.anchor.start, ex.anchor.end],
        'gold': None if ex.gold is None else ex.gold.to_json(),
    }
    if ex.is_fh is not None:
        obj['is_fh'] = ex.is_fh
    return obj


def serialize_example(ex):
    return json.dumps(example_to_dict(ex), ensure_ascii=False)


def read_examples(path):
    """Read a JSONL corpus; blank lines are skipped."""
    out = []
    with open(path, encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if line.strip():
                out.append(parse_example_record(line, lineno))
    return out


def write_examples(path, examples):
    with open(path, 'w', encoding='utf-8') as f:
        for ex in examples:
            f.write(serialize_example(ex) + '\n')


def partition_by_source(examples, ratios=(0.8, 0.1, 0.1), seed=13):
    """Split examples into len(ratios) parts with no source work in two parts.

    Sources (the id prefix before the first '/') are assigned largest first,
    each to the split currently furthest below its target size.  Equal-sized
    sources are ordered by a seeded shuffle.
    """
    ratios = np.asarray(ratios, dtype=float)
    if ratios.ndim != 1 or len(ratios) == 0 or (ratios < 0).any() or ratios.sum() <= 0:
        raise ValueError('ratios must be a non-empty list of non-negative numbers')
    groups = {}
    for ex in examples:
        groups.setdefault(ex.source, []).append(ex)
    if len(groups) < len(ratios):
        raise ValueError('%d sources cannot fill %d splits' % (len(groups), len(ratios)))
    names = sorted(groups)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(names))
    shuffled = [names[k] for k in order]
    shuffled.sort(key=lambda name: -len(groups[name]))  # stable: ties keep shuffled order
    targets = ratios / ratios.sum() * len(examples)
    sizes = np.zeros(len(ratios))
    assignment = {}
    for name in shuffled:
        k = int(np.argmax(targets - sizes))
        assignment[name] = k
        sizes[k] += len(groups[name])
    splits = [[] for _ in ratios]
    for ex in examples:
        splits[assignment[ex.source]].append(ex)
    return tuple(splits)
