"""Numeric span detection over pre-tokenized text.

A numeric span is a maximal run of numeric tokens: digit strings
(``42``, ``1,000``, ``3.5``, ``9/11``), cardinal number words
(``thirty``, ``twenty-one``, ``million``) and ordinals (``first``,
``21st``).  The connective ``and`` joins two groups only when it follows a
scale word ("one hundred and six", "thousand and seventy").
"""
import re

UNITS = {
    'zero': 0, 'one': 1, 'two': 2, 'three': 3, 'four': 4, 'five': 5,
    'six': 6, 'seven': 7, 'eight': 8, 'nine': 9,
}
TEENS = {
    'ten': 10, 'eleven': 11, 'twelve': 12, 'thirteen': 13, 'fourteen': 14,
    'fifteen': 15, 'sixteen': 16, 'seventeen': 17, 'eighteen': 18,
    'nineteen': 19,
}
TENS = {
    'twenty': 20, 'thirty': 30, 'forty': 40, 'fifty': 50, 'sixty': 60,
    'seventy': 70, 'eighty': 80, 'ninety': 90,
}
SCALES = {
    'hundred': 100, 'thousand': 1000, 'million': 10 ** 6,
    'billion': 10 ** 9, 'trillion': 10 ** 12,
}
ORDINALS = {
    'first': 1, 'second': 2, 'third': 3, 'fourth': 4, 'fifth': 5,
    'sixth': 6, 'seventh': 7, 'eighth': 8, 'ninth': 9, 'tenth': 10,
    'eleventh': 11, 'twelfth': 12, 'thirteenth': 13, 'fourteenth': 14,
    'fifteenth': 15, 'sixteenth': 16, 'seventeenth': 17, 'eighteenth': 18,
    'nineteenth': 19, 'twentieth': 20, 'thirtieth': 30, 'fortieth': 40,
    'fiftieth': 50, 'sixtieth': 60, 'seventieth': 70, 'eightieth': 80,
    'ninetieth': 90, 'hundredth': 100, 'thousandth': 1000,
    'millionth': 10 ** 6, 'billionth': 10 ** 9,
}

DIGITS_RE = re.compile(r'^\d+(?:[,./]\d+)*$')
DIGIT_ORDINAL_RE = re.compile(r'^\d+(?:st|nd|rd|th)$', re.IGNORECASE)

# word classes used by the composition grammar
_UNIT, _TEEN, _TENS, _COMPOUND, _SCALE, _DIGIT, _ORD = range(7)


def _word_class(word):
    """Classify a lowercased token, or return None if it is not numeric."""
    if word in UNITS:
        return _UNIT
    if word in TEENS:
        return _TEEN
    if word in TENS:
        return _TENS
    if word in SCALES:
        return _SCALE
    if word in ORDINALS or DIGIT_ORDINAL_RE.match(word):
        return _ORD
    if DIGITS_RE.match(word):
        return _DIGIT
    if '-' in word:
        parts = word.split('-')
        if len(parts) == 2 and parts[0] in TENS:
            if parts[1] in UNITS and parts[1] != 'zero':
                return _COMPOUND
            if parts[1] in ORDINALS and ORDINALS[parts[1]] < 10:
                return _ORD
    return None


def _lower(token):
    return token.lower() if isinstance(token, str) else token.lower


def is_numeric_word(word):
    return _word_class(_lower(word)) is not None


def is_digit_token(word):
    return DIGITS_RE.match(_lower(word)) is not None


def is_ordinal_word(word):
    return _word_class(_lower(word)) == _ORD


def detect_numeric_spans(tokens):
    """Return maximal numeric spans as ``AnchorSpan`` objects, sorted by start.

    ``tokens`` may be strings or objects with a ``lower`` attribute.

    >>> [(s.start, s.end) for s in detect_numeric_spans('thirty six chairs'.split())]
    [(0, 1)]
    """
    from .corpus import AnchorSpan

    words = [_lower(t) for t in tokens]
    numeric = [_word_class(w) is not None for w in words]
    spans = []
    i, n = 0, len(words)
    while i < n:
        if not numeric[i]:
            i += 1
            continue
        j = i
        while True:
            if j + 1 < n and numeric[j + 1]:
                j += 1
            elif (j + 2 < n and words[j + 1] == 'and'
                    and _word_class(words[j]) == _SCALE
                    and _word_class(words[j + 2]) in (_UNIT, _TEEN, _TENS,
                                                      _COMPOUND, _ORD)):
                j += 2
            else:
                break
        spans.append(AnchorSpan(i, j))
        i = j + 1
    return spans


def is_ordinal_span(tokens, span):
    """True if the span denotes an ordinal ("first", "twenty first", "3rd")."""
    return is_ordinal_word(tokens[span.end])


def numeric_value(words):
    """Compose the value of a numeric span, or None if it does not compose.

    >>> numeric_value('Fifteen million sixty one thousand and seventy six'.split())
    15061076
    >>> numeric_value(['100', 'million'])
    100000000
    """
    words = [_lower(w) for w in words]
    total = current = 0
    prev = None
    for word in words:
        if word == 'and':
            if prev != _SCALE:
                return None
            continue
        cls = _word_class(word)
        if cls is None:
            return None
        if cls == _DIGIT:
            if prev is not None and prev != _SCALE:
                return None
            if '/' in word:
                return None
            text = word.replace(',', '')
            try:
                value = int(text)
            except ValueError:
                try:
                    value = float(text)
                except ValueError:
                    return None
            current += value
        elif cls == _UNIT:
            if prev in (_UNIT, _TEEN, _COMPOUND, _DIGIT):
                return None
            current += UNITS[word]
        elif cls == _TEEN:
            if prev in (_UNIT, _TEEN, _TENS, _COMPOUND, _DIGIT):
                return None
            current += TEENS[word]
        elif cls == _TENS:
            if prev in (_UNIT, _TEEN, _TENS, _COMPOUND, _DIGIT):
                return None
            current += TENS[word]
        elif cls == _COMPOUND:
            if prev in (_UNIT, _TEEN, _TENS, _COMPOUND, _DIGIT):
                return None
            tens, unit = word.split('-')
            current += TENS[tens] + UNITS[unit]
        elif cls == _ORD:
            if DIGIT_ORDINAL_RE.match(word):
                if prev is not None:
                    return None
                current += int(word[:-2])
            elif '-' in word:
                tens, unit = word.split('-')
                current += TENS[tens] + ORDINALS[unit]
            else:
                value = ORDINALS[word]
                if value >= 100:
                    current = max(current, 1) * value
                else:
                    current += value
        elif cls == _SCALE:
            scale = SCALES[word]
            if scale == 100:
                current = max(current, 1) * 100
            else:
                total += max(current, 1) * scale
                current = 0
        prev = cls
    return total + current
