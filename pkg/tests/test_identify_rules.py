import json

import pytest
from hypothesis import given, strategies as st

from nfh.corpus import AnchorSpan, Token
from nfh.identify_rules import (MissingParseError, apply_filters,
                                apply_textual_patterns, check_filters, identify_by_constituency,
                                identify_rule_based, load_pattern_registry, rule_decisions)
from nfh.numerals import detect_numeric_spans
from nfh.trees import parse_bracketed
from nfh_fixtures import FIXTURES, fixture_example, gold_spans

BY_ID = {e[0]: e for e in FIXTURES}


def spans(xs):
    return [(s.start, s.end) for s in xs]


def toks(conll):
    """'word/POS' items; no dependency information."""
    out = []
    for item in conll.split():
        w, p = item.rsplit('/', 1)
        out.append(Token(w, p, -1, 'dep'))
    return out


@pytest.mark.parametrize('entry', FIXTURES, ids=[e[0] for e in FIXTURES])
def test_fixture(entry):
    ex = fixture_example(entry)
    assert spans(identify_rule_based(ex)) == gold_spans(entry)


def test_fixture_suite_covers_table():
    ids = set(BY_ID)
    for row in ['i', 'ii', 'iii', 'iv', 'v', 'vi', 'vii', 'viii', 'ix', 'x', 'xi', 'xii', 'xiii',
                'xiv', 'xv', 'xvi']:
        assert 'kinds/' + row in ids
    assert len(FIXTURES) >= 40


def test_constituency_examples():
    ex = fixture_example(BY_ID['kinds/vii'])
    assert spans(identify_by_constituency(ex.trees[0], ex.tokens)) == [(1, 1)]
    ex = fixture_example(BY_ID['kinds/xvi'])
    assert identify_by_constituency(ex.trees[0], ex.tokens) == []
    tree, _ = parse_bracketed('(QP (CD thirty) (CD six))', offset=0)
    assert spans(identify_by_constituency(tree, toks('thirty/CD six/CD'))) == [(0, 1)]


def test_nested_qp_defers_to_np():
    ex = fixture_example(BY_ID['pattern/clubs'])
    assert identify_by_constituency(ex.trees[0], ex.tokens) == []


@pytest.mark.parametrize('fid, start, reason', [
    ('filter/cosmos', 3, 'F1'), ('filter/apollo', 1, 'F4'), ('filter/dollar', 3, 'F3'),
    ('filter/pound', 3, 'F3'), ('filter/oclock', 3, 'F2'), ('filter/first', 3, 'ORD'),
    ('filter/god', 4, 'F1'),
])
def test_filters(fid, start, reason):
    ex = fixture_example(BY_ID[fid])
    decisions = {d.span.start: d for d in rule_decisions(ex)}
    assert decisions[start].filtered_by == reason
    assert not decisions[start].positive


def test_apply_filters_annotates_every_candidate():
    ex = fixture_example(BY_ID['filter/cosmos'])
    out = apply_filters([AnchorSpan(3, 3)], ex.tokens)
    assert len(out) == 1 and out[0].fired_rule == 'CONST' and out[0].filtered_by == 'F1'


def test_textual_patterns():
    assert spans(apply_textual_patterns(toks('eight/CD or/CC nine/CD clubs/NNS'))) == [(0, 0)]
    assert spans(apply_textual_patterns(toks('a/DT thing/NN or/CC two/CD'))) == [(3, 3)]
    assert spans(apply_textual_patterns(toks('clock/NN strikes/VBZ one/CD'))) == [(2, 2)]
    assert spans(apply_textual_patterns(toks('one/CD of/IN the/DT reasons/NNS'))) == [(0, 0)]
    assert apply_textual_patterns(toks('at/IN five/CD o\'clock/RB')) == []
    assert apply_textual_patterns(toks('a/DT thing/NN or/CC two/CD things/NNS')) == []


def test_pattern_hit_survives_dependency_filter():
    ex = fixture_example(BY_ID['kinds/i'])
    d = {x.span.start: x for x in rule_decisions(ex)}[9]
    assert d.fired_rule == 'P2' and d.positive
    assert spans(identify_rule_based(ex, patterns=())) == []


def test_spec_sentences():
    assert spans(identify_rule_based(fixture_example(BY_ID['kinds/vii']))) == [(1, 1)]
    assert identify_rule_based(fixture_example(BY_ID['kinds/xv'])) == []
    assert spans(identify_rule_based(fixture_example(BY_ID['basic/3']))) == [(7, 7)]


def test_missing_trees():
    ex = fixture_example(BY_ID['kinds/vii'])
    bare = type(ex)(ex.id, ex.tokens, ex.sentence_bounds, ex.turn_bounds, ())
    with pytest.raises(MissingParseError, match='learned identifier'):
        identify_rule_based(bare)


def test_pattern_registry(tmp_path):
    p = tmp_path / 'reg.json'
    p.write_text(json.dumps([{'id': 'P3', 'enabled': True}, {'id': 'P1', 'enabled': False},
                             {'id': 'P2', 'enabled': True}]))
    assert load_pattern_registry(str(p)) == ('P3', 'P2')
    p.write_text(json.dumps([{'id': 'P9'}]))
    with pytest.raises(ValueError):
        load_pattern_registry(str(p))


@pytest.mark.parametrize('entry', FIXTURES, ids=[e[0] for e in FIXTURES])
def test_output_within_numeric_spans_and_deterministic(entry):
    ex = fixture_example(entry)
    out = identify_rule_based(ex)
    assert set(out) <= set(ex.numeric_spans())
    assert out == identify_rule_based(fixture_example(entry))
    # patterns only ever add positives
    assert set(identify_rule_based(ex, patterns=())) <= set(out)


TAGS = st.sampled_from(['CD', 'NN', 'NNP', 'PRP', '$', 'VBZ', 'JJ'])
LABELS = st.sampled_from(['nummod', 'dobj', 'compound', 'attr', 'nsubj'])
WORDS = st.sampled_from(['one', '11', 'first', '$', 'dog', 'Apollo', 'is'])


@st.composite
def sentences(draw):
    n = draw(st.integers(2, 7))
    out = []
    for k in range(n):
        h = draw(st.integers(-1, n - 1))
        out.append(Token(draw(WORDS), draw(TAGS), -1 if h == k else h, draw(LABELS)))
    return out


@given(sentences())
def test_filters_are_monotone(tokens):
    for span in detect_numeric_spans(tokens):
        strict = check_filters(tokens, span)
        loose = check_filters(tokens, span, dependency=False)
        if strict is None:
            assert loose is None
