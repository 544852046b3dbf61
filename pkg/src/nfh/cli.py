"""Command-line front end: ``nfh <command> [options]``.

Exit codes: 0 success, 1 invalid input or usage, 2 internal error.  Progress
goes to stderr; data goes to the files named on the command line.  Every run
that writes an output file also writes ``<out>.config.json`` echoing the
resolved options and seed.
"""
import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .baselines import CLOSEST, FIRST, LAST, noun_baseline_accuracy
from .corpus import (AnchorSpan, FormatError, ValidationError, example_to_dict,
                     read_examples, resolution_from_json)
from .deterministic import match_deterministic
from .embeddings import load_embeddings
from .evaluation import corpus_stats, evaluate, identification_scores
from .identify_ml import (ABLATIONS, identify_learned, load_identifier, rule_labeled_dataset,
                          train_identifier)
from .identify_rules import (DEFAULT_PATTERNS, MissingParseError, load_pattern_registry,
                             rule_decisions)
from .linear import TrainConfig
from .neural import (ResolverConfig, ResolverParams, TrainingError, load_contextual_vectors,
                     resolve as neural_resolve, train_resolver)
from .trees import TreeFormatError

log = logging.getLogger('nfh')

DEFAULT_SEED = 13
INPUT_ERRORS = (FormatError, ValidationError, MissingParseError, TreeFormatError,
                FileNotFoundError, IsADirectoryError, KeyError, ValueError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError('%s: error: %s' % (self.prog, message))


def _threads():
    try:
        return max(1, int(os.environ.get('NFH_THREADS', '1')))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """Apply ``fn`` over ``items`` with up to NFH_THREADS workers, preserving order."""
    items = list(items)
    workers = min(_threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _dump(obj):
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def write_jsonl(path, records):
    with open(path, 'w', encoding='utf-8') as f:
        for r in records:
            f.write(_dump(r) + '\n')


def write_json(path, obj):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + '\n')


def write_config_echo(out, args):
    echo = {k: v for k, v in sorted(vars(args).items()) if k != 'func'}
    echo['version'] = __version__
    write_json(out + '.config.json', echo)


def _patterns(args):
    if getattr(args, 'patterns', None):
        return load_pattern_registry(args.patterns)
    return DEFAULT_PATTERNS


# -- identify ------------------------------------------------------------------

def cmd_identify(args):
    examples = read_examples(args.inp)
    if args.model:
        model = load_identifier(args.model)

        def find(ex):
            return [(span, {'identified_by': 'model', 'margin': round(m, 6)})
                    for span, m in identify_learned(model, ex)]
    else:
        patterns = _patterns(args)

        def find(ex):
            return [(d.span, {'identified_by': d.fired_rule})
                    for d in rule_decisions(ex, patterns) if d.positive]
    found = ordered_map(find, examples)
    records = []
    for ex, hits in zip(examples, found):
        for span, extra in hits:
            rec = example_to_dict(ex.with_anchor(span))
            rec['gold'] = None
            rec.pop('is_fh', None)
            rec.update(extra)
            records.append(rec)
    write_jsonl(args.out, records)
    log.info('%d anchors in %d examples', len(records), len(examples))
    return 0


def cmd_train_identifier(args):
    examples = read_examples(args.inp)
    vectors, labels = rule_labeled_dataset(examples, args.ablation, args.bits, _patterns(args))
    log.info('%d spans (%d positive)', len(labels), sum(labels))
    config = TrainConfig(epochs=args.epochs, c=args.c, bits=args.bits, seed=args.seed)
    model = train_identifier(vectors, labels, config, args.ablation)
    model.save(args.out)
    return 0


# -- resolve -------------------------------------------------------------------

def _load_resolver(args):
    embeddings = load_embeddings(args.embeddings) if args.embeddings else None
    return ResolverParams.load(args.model, embeddings)


def cmd_resolve(args):
    examples = read_examples(args.inp)
    for ex in examples:
        if ex.anchor is None:
            raise ValidationError('anchor', 'example %s has no anchor to resolve' % ex.id)
    params = None
    contextual = load_contextual_vectors(args.contextual) if args.contextual else None
    use_patterns = args.deterministic_first and not args.no_patterns

    def run(ex):
        if use_patterns:
            match = match_deterministic(ex)
            if match is not None:
                return match.resolution, {'source': 'pattern', 'pattern': match.pattern}
        vectors = contextual.get(ex.id) if contextual is not None else None
        return neural_resolve(params, ex, token_vectors=vectors), {'source': 'model'}

    if args.model:
        params = _load_resolver(args)
    elif not use_patterns:
        raise ValueError('resolve needs --model unless deterministic patterns are enabled')
    else:
        unmatched = [ex.id for ex in examples if match_deterministic(ex) is None]
        if unmatched:
            raise ValueError('no --model given and %d examples match no pattern (first: %s)'
                             % (len(unmatched), unmatched[0]))
    results = ordered_map(run, examples)
    records = []
    for ex, (res, extra) in zip(examples, results):
        rec = {'id': ex.id, 'anchor': [ex.anchor.start, ex.anchor.end], 'resolution': res.to_json()}
        if res.is_reference:
            rec['head'] = ex.tokens[res.ref_token].surface
        rec.update(extra)
        records.append(rec)
    write_jsonl(args.out, records)
    n_pat = sum(1 for r in records if r['source'] == 'pattern')
    log.info('%d resolved (%d by pattern)', len(records), n_pat)
    return 0


def cmd_train_resolver(args):
    train = read_examples(args.train)
    dev = read_examples(args.dev)
    overrides = {
        'max_epochs': args.epochs, 'patience': args.patience, 'lr': args.lr,
        'dropout': args.dropout, 'hidden': args.hidden, 'mlp_hidden': args.mlp_hidden,
        'char_dim': args.char_dim, 'char_hidden': args.char_hidden, 'stop_at': args.stop_at,
    }
    config = ResolverConfig(seed=args.seed, **{k: v for k, v in overrides.items() if v is not None})
    embeddings = contextual = None
    if args.contextual:
        contextual = load_contextual_vectors(args.contextual)
        config.contextual_dim = int(next(iter(contextual.values())).shape[1])
    else:
        if not args.embeddings:
            raise ValueError('train-resolver needs --embeddings (or --contextual)')
        embeddings = load_embeddings(args.embeddings)
        config.embeddings_path = os.path.abspath(args.embeddings)
    if not args.no_patterns:
        # pattern-resolved cases form a separate dataset and are not trained on
        train = [ex for ex in train if match_deterministic(ex) is None]
        dev = [ex for ex in dev if match_deterministic(ex) is None]
    params = train_resolver(train, dev, embeddings, config, contextual)
    params.save(args.out)
    args.history = params.history
    return 0


# -- eval / stats ----------------------------------------------------------------

def _key(rec_id, anchor):
    return rec_id, anchor.start, anchor.end


def _read_predictions(path):
    preds = {}
    with open(path, encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise FormatError('malformed JSON: %s' % err.msg, lineno) from None
            anchor = AnchorSpan(*obj['anchor'])
            res = resolution_from_json(obj['resolution'], anchor, line=lineno)
            preds[_key(obj['id'], anchor)] = (res, obj.get('source', 'model'))
    return preds


def _identification_report(args):
    pred = [ex for ex in read_examples(args.pred) if ex.anchor is not None]
    gold = read_examples(args.gold)
    gold_pos = {(ex.id, ex.anchor) for ex in gold if ex.anchor is not None and ex.is_fh is not False}
    pred_pos = {(ex.id, ex.anchor) for ex in pred}
    return {'identification': identification_scores(pred_pos, gold_pos)}


def cmd_eval(args):
    if args.identification:
        report = _identification_report(args)
    else:
        gold = [ex for ex in read_examples(args.gold) if ex.gold is not None]
        preds = _read_predictions(args.pred)
        pairs, excluded = [], 0
        for ex in gold:
            key = _key(ex.id, ex.anchor)
            if key not in preds:
                raise ValidationError('pred', 'no prediction for %s [%d,%d]' % key)
            res, source = preds[key]
            if source == 'pattern' and not args.include_patterns:
                excluded += 1
                continue
            pairs.append((res, ex))
        metrics = evaluate([p for p, _ in pairs], [ex.gold for _, ex in pairs],
                           [ex for _, ex in pairs])
        report = metrics.to_json()
        report['excluded_pattern_cases'] = excluded
        if args.noun_baselines:
            kept = [ex for _, ex in pairs]
            report['noun_baselines'] = {s: noun_baseline_accuracy(kept, s)
                                        for s in (FIRST, LAST, CLOSEST)}
        if args.csv:
            metrics.write_confusion_csv(args.csv)
        log.info('head %.4f categorical %.4f binary %.4f (n=%d)', metrics.head_accuracy,
                 metrics.categorical_accuracy, metrics.binary_accuracy, metrics.n)
    if args.out:
        write_json(args.out, report)
    else:
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + '\n')
    return 0


def cmd_stats(args):
    report = corpus_stats(read_examples(args.inp))
    if args.out:
        write_json(args.out, report)
    else:
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + '\n')
    return 0


# -- parser --------------------------------------------------------------------

def build_parser():
    p = _Parser(prog='nfh', description='Numeric fused-head identification and resolution.')
    p.add_argument('--version', action='version', version=__version__)
    p.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    sub = p.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    s = sub.add_parser('identify', help='find NFH anchors')
    s.add_argument('--in', dest='inp', required=True)
    s.add_argument('--out', required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument('--rules', action='store_true', help='rule cascade (default)')
    g.add_argument('--model', help='trained NFHL identifier')
    s.add_argument('--patterns', help='pattern registry JSON')
    s.add_argument('--seed', type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_identify)

    s = sub.add_parser('train-identifier', help='train the linear identifier on rule labels')
    s.add_argument('--in', dest='inp', required=True)
    s.add_argument('--out', required=True)
    s.add_argument('--ablation', choices=ABLATIONS, default='full')
    s.add_argument('--epochs', type=int, default=10)
    s.add_argument('--c', type=float, default=1.0)
    s.add_argument('--bits', type=int, default=22)
    s.add_argument('--patterns')
    s.add_argument('--seed', type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_train_identifier)

    s = sub.add_parser('resolve', help='resolve anchors to heads')
    s.add_argument('--in', dest='inp', required=True)
    s.add_argument('--out', required=True)
    s.add_argument('--model', help='NFHR checkpoint')
    s.add_argument('--embeddings', help='word vectors (default: path recorded in the checkpoint)')
    s.add_argument('--contextual', help='per-token vector JSONL replacing word+char input')
    s.add_argument('--deterministic-first', dest='deterministic_first', action='store_true',
                   default=True)
    s.add_argument('--no-patterns', dest='no_patterns', action='store_true')
    s.add_argument('--seed', type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_resolve)

    s = sub.add_parser('train-resolver', help='train the neural resolver')
    s.add_argument('--train', required=True)
    s.add_argument('--dev', required=True)
    s.add_argument('--out', required=True)
    s.add_argument('--embeddings')
    s.add_argument('--contextual')
    s.add_argument('--epochs', type=int)
    s.add_argument('--patience', type=int)
    s.add_argument('--lr', type=float)
    s.add_argument('--dropout', type=float)
    s.add_argument('--hidden', type=int)
    s.add_argument('--mlp-hidden', dest='mlp_hidden', type=int)
    s.add_argument('--char-dim', dest='char_dim', type=int)
    s.add_argument('--char-hidden', dest='char_hidden', type=int)
    s.add_argument('--stop-at', dest='stop_at', type=float)
    s.add_argument('--no-patterns', dest='no_patterns', action='store_true',
                   help='keep pattern-resolvable cases in training')
    s.add_argument('--seed', type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_train_resolver)

    s = sub.add_parser('eval', help='score predictions against gold')
    s.add_argument('--pred', required=True)
    s.add_argument('--gold', required=True)
    s.add_argument('--out')
    s.add_argument('--csv', help='write the confusion matrix as CSV')
    s.add_argument('--noun-baselines', dest='noun_baselines', action='store_true')
    s.add_argument('--identification', action='store_true',
                   help='score identify output (P/R/F1) instead of resolutions')
    s.add_argument('--include-patterns', dest='include_patterns', action='store_true')
    s.add_argument('--seed', type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser('stats', help='corpus statistics')
    s.add_argument('--in', dest='inp', required=True)
    s.add_argument('--out')
    s.add_argument('--seed', type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_stats)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        sys.stderr.write('%s\n' % err)
        return 1
    except SystemExit as err:  # --help / --version
        return int(err.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr,
                        force=True)
    try:
        code = args.func(args)
    except INPUT_ERRORS as err:
        log.error('%s', err)
        return 1
    except TrainingError as err:
        log.error('training failed: %s', err)
        return 2
    except Exception:  # noqa: BLE001
        log.exception('internal error')
        return 2
    out = getattr(args, 'out', None)
    if code == 0 and out:
        write_config_echo(out, args)
    return code


if __name__ == '__main__':
    sys.exit(main())
