"""Resolution metrics, identification P/R/F1 and corpus statistics."""
import csv
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import IMPLICIT_CLASSES, REFERENCE
from .numerals import is_digit_token

GOLD_ROWS = IMPLICIT_CLASSES + (REFERENCE,)
PRED_COLS = GOLD_ROWS + ('REF-WRONG',)


@dataclass
class Metrics:
    head_accuracy: float
    categorical_accuracy: float
    binary_accuracy: float
    confusion: np.ndarray
    n: int

    def per_class(self):
        """Precision/recall/support for the seven categorical labels."""
        out = {}
        cm = self.confusion
        for k, name in enumerate(GOLD_ROWS):
            predicted = cm[:, k].sum() + (cm[:, -1].sum() if name == REFERENCE else 0)
            correct = cm[k, k] + (cm[k, -1] if name == REFERENCE else 0)
            support = cm[k].sum()
            out[name] = {
                'precision': float(correct / predicted) if predicted else 0.0,
                'recall': float(correct / support) if support else 0.0,
                'support': int(support),
            }
        return out

    def to_json(self):
        return {
            'n': self.n,
            'head_accuracy': self.head_accuracy,
            'categorical_accuracy': self.categorical_accuracy,
            'binary_accuracy': self.binary_accuracy,
            'confusion': {
                'rows': list(GOLD_ROWS),
                'cols': list(PRED_COLS),
                'matrix': self.confusion.tolist(),
            },
            'per_class': self.per_class(),
        }

    def write_confusion_csv(self, path):
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(['gold'] + list(PRED_COLS))
            for name, row in zip(GOLD_ROWS, self.confusion.tolist()):
                writer.writerow([name] + row)


def head_correct(pred, gold, tokens=None):
    """Implicit classes must match; a Reference pick may share a gold head's lemma."""
    if pred.is_reference != gold.is_reference:
        return False
    if not pred.is_reference:
        return pred.implicit_class == gold.implicit_class
    if pred.ref_token in gold.gold_ref_tokens:
        return True
    if tokens is None:
        return False
    lemmas = {tokens[k].lemma for k in gold.gold_ref_tokens}
    return tokens[pred.ref_token].lemma in lemmas


def evaluate(predictions, golds, contexts=None):
    """Head, categorical and binary accuracy plus the 7x8 confusion matrix.

    ``contexts`` (Examples or token sequences aligned with ``golds``) enable
    lemma equivalence for Reference heads; without them only exact token
    indices count.
    """
    if len(predictions) != len(golds):
        raise ValueError('%d predictions for %d gold labels' % (len(predictions), len(golds)))
    if contexts is not None and len(contexts) != len(golds):
        raise ValueError('contexts must align with gold labels')
    confusion = np.zeros((len(GOLD_ROWS), len(PRED_COLS)), dtype=np.int64)
    head = cat = binary = 0
    for k, (pred, gold) in enumerate(zip(predictions, golds)):
        tokens = None
        if contexts is not None:
            tokens = getattr(contexts[k], 'tokens', contexts[k])
        h = head_correct(pred, gold, tokens)
        head += h
        cat += pred.category == gold.category
        binary += pred.is_reference == gold.is_reference
        col = pred.category
        if gold.is_reference and pred.is_reference and not h:
            col = 'REF-WRONG'
        confusion[GOLD_ROWS.index(gold.category), PRED_COLS.index(col)] += 1
    n = len(golds)
    if n == 0:
        return Metrics(0.0, 0.0, 0.0, confusion, 0)
    m = Metrics(head / n, cat / n, binary / n, confusion, n)
    if not m.head_accuracy <= m.categorical_accuracy <= m.binary_accuracy:
        raise AssertionError('metric ordering violated: %r' % (m,))
    return m


def identification_scores(predicted, gold):
    """Precision, recall and F1 (in percent) over sets of (example id, span) pairs."""
    predicted, gold = set(predicted), set(gold)
    tp = len(predicted & gold)
    p = 100.0 * tp / len(predicted) if predicted else 0.0
    r = 100.0 * tp / len(gold) if gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return {'precision': p, 'recall': r, 'f1': f, 'tp': tp,
            'predicted': len(predicted), 'gold': len(gold)}


def _percent_table(counter, total):
    return [{'value': key, 'count': count, 'percent': 100.0 * count / total}
            for key, count in sorted(counter.items(), key=lambda kv: (-kv[1], str(kv[0])))]


def corpus_stats(examples):
    """Frequency tables over anchored examples (identification positives or resolution data)."""
    anchored = [ex for ex in examples if ex.anchor is not None]
    total = len(anchored)
    report = {'examples': total}
    if not total:
        return report
    anchors = Counter(ex.text(ex.anchor).lower() for ex in anchored)
    lengths = Counter(len(ex.anchor) for ex in anchored)
    shapes = Counter('digit' if all(is_digit_token(t.surface)
                                    for t in ex.tokens[ex.anchor.start:ex.anchor.end + 1])
                     else 'word' for ex in anchored)
    report['anchor_tokens'] = _percent_table(anchors, total)
    report['unique_anchors'] = len(anchors)
    report['singleton_anchors'] = sum(1 for c in anchors.values() if c == 1)
    report['span_lengths'] = _percent_table(lengths, total)
    report['shape'] = _percent_table(shapes, total)

    labeled = [ex for ex in anchored if ex.gold is not None]
    if labeled:
        classes = Counter(ex.gold.category for ex in labeled)
        report['classes'] = _percent_table(classes, len(labeled))
        refs = [ex for ex in labeled if ex.gold.is_reference]
        if refs:
            direction, sentence, heads = Counter(), Counter(), Counter()
            for ex in refs:
                hs = ex.gold.gold_ref_tokens
                heads['3+' if len(hs) >= 3 else str(len(hs))] += 1
                before = [h < ex.anchor.start for h in hs]
                direction['before' if all(before) else 'after' if not any(before) else 'both'] += 1
                own = ex.sentence_of(ex.anchor.start)
                same = [ex.sentence_of(h) == own for h in hs]
                sentence['same' if all(same) else 'other' if not any(same) else 'mixed'] += 1
            report['reference_direction'] = _percent_table(direction, len(refs))
            report['reference_sentence'] = _percent_table(sentence, len(refs))
            report['reference_head_counts'] = _percent_table(heads, len(refs))
    return report
