"""A small end-to-end CLI workspace shared by the CLI and acceptance tests."""
from conftest import random_embeddings, synthetic_examples, write_embeddings
from nfh import cli
from nfh.corpus import write_examples
from nfh_fixtures import FIXTURES, fixture_example, resolution_examples

SMALL = ['--hidden', '5', '--mlp-hidden', '7', '--char-dim', '4', '--char-hidden', '3']


def make_workspace(tmp_path):
    write_examples(tmp_path / 'raw.jsonl', [fixture_example(e) for e in FIXTURES])
    syn = synthetic_examples(12, 2)
    write_examples(tmp_path / 'train.jsonl', syn + resolution_examples())
    write_examples(tmp_path / 'dev.jsonl', synthetic_examples(6, 9))
    write_examples(tmp_path / 'res.jsonl', resolution_examples() + synthetic_examples(4, 5))
    write_embeddings(tmp_path / 'emb.txt', random_embeddings(8))
    return tmp_path


def run(*argv):
    return cli.main([str(a) for a in argv])


def all_outputs(ws, tag):
    files = {}
    steps = [
        ('identify', '--in', ws / 'raw.jsonl', '--out', ws / ('ids%s.jsonl' % tag)),
        ('train-identifier', '--in', ws / 'raw.jsonl', '--out', ws / ('id%s.nfhl' % tag), '--bits', '12'),
        ('train-resolver', '--train', ws / 'train.jsonl', '--dev', ws / 'dev.jsonl',
         '--out', ws / ('r%s.nfhr' % tag), '--embeddings', ws / 'emb.txt', '--epochs', '2', *SMALL),
        ('resolve', '--in', ws / 'res.jsonl', '--out', ws / ('pred%s.jsonl' % tag),
         '--model', ws / ('r%s.nfhr' % tag)),
        ('eval', '--pred', ws / ('pred%s.jsonl' % tag), '--gold', ws / 'res.jsonl',
         '--out', ws / ('eval%s.json' % tag)),
        ('stats', '--in', ws / 'res.jsonl', '--out', ws / ('stats%s.json' % tag)),
    ]
    for argv in steps:
        assert run(*argv) == 0
        out = argv[argv.index('--out') + 1]
        files[argv[0]] = out.read_bytes()
    return files
