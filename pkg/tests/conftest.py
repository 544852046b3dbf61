import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from nfh.corpus import example_from_dict  # noqa: E402
from nfh.embeddings import EmbeddingTable  # noqa: E402

_CRITERIA = {}
_NODES = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker('criterion')
        if mark is not None:
            _NODES[item.nodeid] = mark.args[0]
            _CRITERIA.setdefault(mark.args[0], [])


def pytest_runtest_logreport(report):
    n = _NODES.get(report.nodeid)
    if n is None:
        return
    if report.when == 'call' or (report.when == 'setup' and not report.passed):
        _CRITERIA[n].append(report)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section('acceptance criteria')
    for n in sorted(_CRITERIA):
        reports = _CRITERIA[n]
        if not reports:
            status = 'NOT RUN'
        elif any(r.failed for r in reports):
            status = 'FAIL'
        elif all(r.skipped for r in reports):
            status = 'SKIP'
        else:
            status = 'PASS'
        detail = '; '.join(dict.fromkeys(_detail(r) for r in reports if _detail(r)))
        terminalreporter.write_line('criterion %d: %s%s' % (n, status, ' (%s)' % detail if detail else ''))


def _detail(report):
    if report.skipped and isinstance(report.longrepr, tuple):
        return report.longrepr[2].replace('Skipped: ', '')
    for name, text in report.user_properties:
        if name == 'detail':
            return text
    return ''


# -- shared synthetic data ------------------------------------------------------

NOUNS = ['apple', 'boat', 'car', 'dog', 'egg', 'fox', 'gun', 'hat', 'ink', 'jar',
         'kite', 'lamp', 'map', 'net', 'owl', 'pen', 'quilt', 'rug', 'sock', 'tent']
VERBS = ['want', 'see', 'have', 'need', 'like', 'take']
NUMBERS = ['one', 'two', 'three', 'four', 'five']
CLASSES = ['YEAR', 'AGE', 'CURRENCY', 'PEOPLE', 'TIME', 'OTHER']


def synthetic_record(k, rng):
    """'I <verb> the <noun> . You <verb> <num> .' with a reference or implicit gold."""
    noun = NOUNS[rng.integers(len(NOUNS))]
    v1, v2 = (VERBS[i] for i in rng.integers(len(VERBS), size=2))
    num = NUMBERS[rng.integers(len(NUMBERS))]
    toks = [('I', 'PRP', 1, 'nsubj'), (v1, 'VBP', -1, 'ROOT'), ('the', 'DT', 3, 'det'),
            (noun, 'NN', 1, 'dobj'), ('.', '.', 1, 'punct'),
            ('You', 'PRP', 6, 'nsubj'), (v2, 'VBP', -1, 'ROOT'), (num, 'CD', 6, 'dobj'),
            ('.', '.', 6, 'punct')]
    if rng.random() < 0.5:
        gold = {'kind': 'reference', 'heads': [3]}
    else:
        gold = {'kind': 'implicit', 'class': CLASSES[rng.integers(len(CLASSES))]}
    return {
        'id': 'syn%d/ex%d' % (k % 7, k),
        'tokens': [{'t': t, 'p': p, 'h': h, 'd': d, 'l': t.lower()} for t, p, h, d in toks],
        'sents': [[0, 4], [5, 8]],
        'turns': [['A', 0, 4], ['B', 5, 8]],
        'anchor': [7, 7],
        'gold': gold,
    }


def synthetic_examples(n, seed=0):
    rng = np.random.default_rng(seed)
    return [example_from_dict(synthetic_record(k, rng)) for k in range(n)]


def random_embeddings(dim, seed=0):
    rng = np.random.default_rng(seed)
    words = ['I', 'You', 'the', '.'] + NOUNS + VERBS + NUMBERS
    return EmbeddingTable(words, rng.normal(0, 0.5, (len(words), dim)))


def write_embeddings(path, table):
    with open(path, 'w', encoding='utf-8') as f:
        for w, row in zip(table.words, table.matrix):
            f.write(w + ' ' + ' '.join('%.6f' % x for x in row) + '\n')


@pytest.fixture
def small_embeddings():
    return random_embeddings(8)
