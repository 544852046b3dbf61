import json

import pytest

from nfh import cli
from nfh.corpus import read_examples, write_examples
from nfh.deterministic import match_deterministic
from nfh.neural import TrainingError
from cli_runs import SMALL, all_outputs, make_workspace, run
from nfh_fixtures import FIXTURES, gold_spans, resolution_examples


@pytest.fixture
def workspace(tmp_path):
    return make_workspace(tmp_path)


def lines(path):
    return [json.loads(x) for x in open(path) if x.strip()]


def test_identify_rules(workspace):
    out = workspace / 'ids.jsonl'
    assert run('identify', '--in', workspace / 'raw.jsonl', '--out', out) == 0
    found = {(r['id'], tuple(r['anchor'])) for r in lines(out)}
    expect = {(e[0], s) for e in FIXTURES for s in gold_spans(e)}
    assert found == expect
    assert all(r['gold'] is None and r['identified_by'] for r in lines(out))
    echo = json.load(open(str(out) + '.config.json'))
    assert echo['seed'] == 13 and echo['version']


def test_identify_with_learned_model(workspace):
    model = workspace / 'id.nfhl'
    assert run('train-identifier', '--in', workspace / 'raw.jsonl', '--out', model,
               '--bits', '14', '--epochs', '20') == 0
    out = workspace / 'ml.jsonl'
    assert run('identify', '--in', workspace / 'raw.jsonl', '--out', out, '--model', model) == 0
    recs = lines(out)
    assert recs and all(r['identified_by'] == 'model' and 'margin' in r for r in recs)


def test_train_resolve_eval_stats(workspace):
    model = workspace / 'r.nfhr'
    assert run('train-resolver', '--train', workspace / 'train.jsonl', '--dev', workspace / 'dev.jsonl',
               '--out', model, '--embeddings', workspace / 'emb.txt', '--epochs', '2', *SMALL) == 0
    echo = json.load(open(str(model) + '.config.json'))
    assert len(echo['history']) == 2

    pred = workspace / 'pred.jsonl'
    assert run('resolve', '--in', workspace / 'res.jsonl', '--out', pred, '--model', model) == 0
    recs = lines(pred)
    examples = read_examples(workspace / 'res.jsonl')
    assert [r['id'] for r in recs] == [ex.id for ex in examples]
    for r, ex in zip(recs, examples):
        matched = match_deterministic(ex)
        assert r['source'] == ('pattern' if matched else 'model')
        if matched:
            assert r['pattern'] == matched.pattern

    report = workspace / 'eval.json'
    assert run('eval', '--pred', pred, '--gold', workspace / 'res.jsonl', '--out', report,
               '--csv', workspace / 'cm.csv', '--noun-baselines') == 0
    rep = json.load(open(report))
    n_pat = sum(1 for r in recs if r['source'] == 'pattern')
    assert n_pat > 0
    assert rep['excluded_pattern_cases'] == n_pat
    assert rep['n'] == len(recs) - n_pat
    assert rep['head_accuracy'] <= rep['categorical_accuracy'] <= rep['binary_accuracy']
    assert set(rep['noun_baselines']) == {'FIRST', 'LAST', 'CLOSEST'}

    assert run('eval', '--pred', pred, '--gold', workspace / 'res.jsonl', '--out', report,
               '--include-patterns') == 0
    assert json.load(open(report))['n'] == len(recs)

    stats = workspace / 'stats.json'
    assert run('stats', '--in', workspace / 'res.jsonl', '--out', stats) == 0
    assert json.load(open(stats))['examples'] == len(recs)


def test_resolve_patterns_only(workspace):
    matched = [ex for ex in resolution_examples() if match_deterministic(ex)]
    write_examples(workspace / 'pat.jsonl', matched)
    out = workspace / 'p.jsonl'
    assert run('resolve', '--in', workspace / 'pat.jsonl', '--out', out) == 0
    assert all(r['source'] == 'pattern' for r in lines(out))
    # without a model, unmatched examples are an input error
    assert run('resolve', '--in', workspace / 'res.jsonl', '--out', out) == 1


def test_eval_identification(workspace, capsys):
    out = workspace / 'ids.jsonl'
    run('identify', '--in', workspace / 'raw.jsonl', '--out', out)
    assert run('eval', '--identification', '--pred', out, '--gold', out) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep['identification']['f1'] == 100.0


def test_exit_codes(workspace, monkeypatch):
    assert run('identify', '--in', workspace / 'missing.jsonl', '--out', workspace / 'x') == 1
    assert run('identify', '--bogus-flag') == 1
    assert run('no-such-command') == 1
    bad = workspace / 'bad.jsonl'
    bad.write_text('{"id": 1\n')
    assert run('stats', '--in', bad) == 1

    def boom(*a, **k):
        raise TrainingError('diverged')
    monkeypatch.setattr(cli, 'train_resolver', boom)
    assert run('train-resolver', '--train', workspace / 'train.jsonl', '--dev', workspace / 'dev.jsonl',
               '--out', workspace / 'm', '--embeddings', workspace / 'emb.txt') == 2

    def crash(*a, **k):
        raise RuntimeError('bug')
    monkeypatch.setattr(cli, 'corpus_stats', crash)
    assert run('stats', '--in', workspace / 'res.jsonl') == 2


def test_byte_identical_reruns(workspace, monkeypatch):
    first = all_outputs(workspace, '')
    again = all_outputs(workspace, '')
    assert first == again
    monkeypatch.setenv('NFH_THREADS', '4')
    threaded = all_outputs(workspace, '')
    assert threaded == first
