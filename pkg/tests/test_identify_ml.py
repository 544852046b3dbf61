import pytest
from hypothesis import given, strategies as st

from nfh.corpus import AnchorSpan, example_from_dict
from nfh.identify_ml import (ABLATIONS, PAD, extract_identification_features,
                             identification_feature_names, identify_learned, load_identifier,
                             rule_labeled_dataset, train_identifier)
from nfh.identify_rules import identify_rule_based
from nfh.linear import TrainConfig
from nfh_fixtures import FIXTURES, fixture_example, record


def no_one_cares(prefix=()):
    sentences = list(prefix) + [(
        'no|DT|2|det one|CD|3|nsubj cares|VBZ|0|ROOT .|.|3|punct',
        '(S (NP (DT no) (CD one)) (VP (VBZ cares)) (. .))')]
    return example_from_dict(record('t/1', sentences))


def test_hand_enumerated_templates():
    ex = no_one_cares()
    names = identification_feature_names(ex, AnchorSpan(1, 1))
    assert names == [
        'T1=one',
        'T2:L1=no', 'T2:R1=cares', 'T2:L2=' + PAD, 'T2:R2=.', 'T2:L3=' + PAD, 'T2:R3=' + PAD,
        'T3:L1=DT', 'T3:R1=VBZ', 'T3:L2=' + PAD, 'T3:R2=.', 'T3:L3=' + PAD, 'T3:R3=' + PAD,
        'T4=VBZ',
    ]


def test_ablation_dep_pos_keeps_t1_t2():
    names = identification_feature_names(no_one_cares(), AnchorSpan(1, 1), '-dep-pos')
    assert {n.split('=')[0].split(':')[0] for n in names} == {'T1', 'T2'}
    assert len(names) == 7


def test_two_token_anchor_single_t1():
    entry = next(e for e in FIXTURES if e[0] == 'misc/thirty-six')
    names = identification_feature_names(fixture_example(entry), AnchorSpan(2, 3))
    assert [n for n in names if n.startswith('T1=')] == ['T1=thirty six']


def test_root_head():
    entry = next(e for e in FIXTURES if e[0] == 'misc/longest')
    names = identification_feature_names(fixture_example(entry), AnchorSpan(0, 7))
    assert 'T4=ROOT' in names


def test_unknown_ablation():
    with pytest.raises(ValueError):
        identification_feature_names(no_one_cares(), AnchorSpan(1, 1), '-lex')


PREFIX = [('hello|UH|0|ROOT', '(INTJ (UH hello))'),
          ('yes|UH|2|intj sir|NN|0|ROOT', '(NP (UH yes) (NN sir))')]


@given(st.integers(0, 2), st.sampled_from(ABLATIONS))
def test_position_stable(k, ablation):
    base = no_one_cares()
    shifted = no_one_cares(PREFIX[:k])
    offset = len(shifted.tokens) - len(base.tokens)
    a = extract_identification_features(base, AnchorSpan(1, 1), ablation, 18)
    b = extract_identification_features(shifted, AnchorSpan(1 + offset, 1 + offset), ablation, 18)
    assert a == b


@pytest.mark.parametrize('entry', FIXTURES[:20], ids=[e[0] for e in FIXTURES[:20]])
def test_ablation_subsets(entry):
    ex = fixture_example(entry)
    for span in ex.numeric_spans():
        f = {a: set(identification_feature_names(ex, span, a)) for a in ABLATIONS}
        assert f['-dep-pos'] <= f['-dep'] <= f['full']
        assert f['-dep-pos'] <= f['-pos'] <= f['full']


def test_trained_on_rule_labels(tmp_path):
    examples = [fixture_example(e) for e in FIXTURES]
    vectors, labels = rule_labeled_dataset(examples, 'full', 16)
    assert sum(labels) == sum(len(identify_rule_based(ex)) for ex in examples)
    model = train_identifier(vectors, labels, TrainConfig(bits=16, epochs=30), 'full')
    acc = sum(model.classify(v)[0] == l for v, l in zip(vectors, labels)) / len(labels)
    assert acc >= 0.9
    path = tmp_path / 'id.nfhl'
    model.save(str(path))
    loaded = load_identifier(str(path))
    for ex in examples:
        assert identify_learned(loaded, ex) == identify_learned(model, ex)


def test_gold_is_fh_overrides_rules():
    ex = no_one_cares().with_anchor(AnchorSpan(1, 1), is_fh=False)
    _, labels = rule_labeled_dataset([ex], 'full', 16)
    assert labels == [False]
