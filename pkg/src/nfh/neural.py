"""Neural head resolution: score every context token and six implicit classes.

Each token is the concatenation of its (frozen) word vector and the final
state of a character LSTM.  A BiLSTM contextualizes the tokens; the anchor is
the mean of its contextualized tokens.  Every candidate head ``h`` (context
tokens outside the anchor, then the six class embeddings) is scored by an MLP
over ``[h; a; h*a]`` and the scores are normalized with a softmax.

Everything runs in float64 numpy with hand-written backpropagation.
"""
import copy
import json
import logging
import math
import struct
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .corpus import IMPLICIT_CLASSES, Resolution
from .lstm import init_lstm, lstm_backward, lstm_forward

log = logging.getLogger(__name__)

CHARSET = [chr(c) for c in range(32, 127)]
CHAR_INDEX = {ch: k for k, ch in enumerate(CHARSET)}
CHAR_OOV = len(CHARSET)
N_CHARS = len(CHARSET) + 1
N_CLASSES = len(IMPLICIT_CLASSES)

CHECKPOINT_MAGIC = b'NFHR'
CHECKPOINT_VERSION = 1


class TrainingError(RuntimeError):
    pass


@dataclass
class ResolverConfig:
    word_dim: int = 300
    char_dim: int = 30
    char_hidden: int = 10
    hidden: int = 50
    mlp_hidden: int = 150
    dropout: float = 0.2
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_epochs: int = 100
    patience: int = 10
    seed: int = 13
    # stop as soon as dev accuracy reaches this value (None: never)
    stop_at: float = None
    # per-token vectors from an external file replace word+char encoding
    contextual_dim: int = None
    embeddings_path: str = None

    @property
    def input_dim(self):
        if self.contextual_dim:
            return self.contextual_dim
        return self.word_dim + self.char_hidden

    @property
    def token_dim(self):
        return 2 * self.hidden

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


class ResolverParams:
    """Trainable tensors plus the frozen word-vector table they were built for."""

    def __init__(self, config, tensors, embeddings=None):
        self.config = config
        self.tensors = tensors
        self.embeddings = embeddings
        self.history = []

    @classmethod
    def initialize(cls, config, embeddings=None, seed=None):
        cfg = config
        if not cfg.contextual_dim:
            if embeddings is None:
                raise ValueError('word embeddings are required unless contextual_dim is set')
            cfg = copy.copy(config)
            cfg.word_dim = embeddings.dimension
        rng = np.random.default_rng(cfg.seed if seed is None else seed)
        D = cfg.token_dim
        t = {}
        if not cfg.contextual_dim:
            t['char_emb'] = rng.uniform(-0.1, 0.1, (N_CHARS, cfg.char_dim))
            t.update(init_lstm(rng, cfg.char_dim, cfg.char_hidden, 'char_'))
        t.update(init_lstm(rng, cfg.input_dim, cfg.hidden, 'fw_'))
        t.update(init_lstm(rng, cfg.input_dim, cfg.hidden, 'bw_'))
        t['implicit'] = rng.uniform(-0.1, 0.1, (N_CLASSES, D))
        t['mlp_W1'] = rng.uniform(-0.1, 0.1, (cfg.mlp_hidden, 3 * D))
        t['mlp_b1'] = rng.uniform(-0.1, 0.1, cfg.mlp_hidden)
        t['mlp_w2'] = rng.uniform(-0.1, 0.1, cfg.mlp_hidden)
        return cls(cfg, t, embeddings)

    def copy(self):
        other = ResolverParams(copy.copy(self.config),
                               {k: v.copy() for k, v in self.tensors.items()},
                               self.embeddings)
        other.history = list(self.history)
        return other

    def round_to_float32(self):
        for k, v in self.tensors.items():
            self.tensors[k] = v.astype(np.float32).astype(np.float64)

    def save(self, path):
        """Write an ``NFHR`` checkpoint: header, config echo, named float32 tensors."""
        cfg = json.dumps(asdict(self.config), sort_keys=True).encode('utf-8')
        with open(path, 'wb') as f:
            f.write(CHECKPOINT_MAGIC)
            f.write(struct.pack('<IQI', CHECKPOINT_VERSION, int(self.config.seed), len(cfg)))
            f.write(cfg)
            f.write(struct.pack('<I', len(self.tensors)))
            for name in sorted(self.tensors):
                arr = self.tensors[name]
                raw = name.encode('utf-8')
                f.write(struct.pack('<H', len(raw)))
                f.write(raw)
                f.write(struct.pack('<B', arr.ndim))
                f.write(struct.pack('<%dI' % arr.ndim, *arr.shape))
                f.write(np.ascontiguousarray(arr, dtype='<f4').tobytes())

    @classmethod
    def load(cls, path, embeddings=None):
        with open(path, 'rb') as f:
            data = f.read()
        if data[:4] != CHECKPOINT_MAGIC:
            raise ValueError('%s is not an NFHR checkpoint' % path)
        version, seed, cfg_len = struct.unpack_from('<IQI', data, 4)
        if version != CHECKPOINT_VERSION:
            raise ValueError('unsupported checkpoint version %d' % version)
        pos = 4 + struct.calcsize('<IQI')
        config = ResolverConfig.from_dict(json.loads(data[pos:pos + cfg_len].decode('utf-8')))
        config.seed = seed
        pos += cfg_len
        (count,) = struct.unpack_from('<I', data, pos)
        pos += 4
        tensors = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from('<H', data, pos)
            pos += 2
            name = data[pos:pos + name_len].decode('utf-8')
            pos += name_len
            (rank,) = struct.unpack_from('<B', data, pos)
            pos += 1
            dims = struct.unpack_from('<%dI' % rank, data, pos)
            pos += 4 * rank
            size = int(np.prod(dims)) if rank else 1
            arr = np.frombuffer(data, dtype='<f4', count=size, offset=pos)
            tensors[name] = arr.astype(np.float64).reshape(dims)
            pos += 4 * size
        if not config.contextual_dim:
            if embeddings is None:
                if not config.embeddings_path:
                    raise ValueError('checkpoint needs word embeddings; none given or recorded')
                from .embeddings import load_embeddings
                embeddings = load_embeddings(config.embeddings_path)
            if embeddings.dimension != config.word_dim:
                raise ValueError('embedding dimension %d does not match checkpoint (%d)'
                                 % (embeddings.dimension, config.word_dim))
        return cls(config, tensors, embeddings)


# -- inputs ------------------------------------------------------------------

@dataclass
class TokenInput:
    """Per-example arrays that do not depend on trainable parameters."""
    n: int
    words: np.ndarray = None
    chars: np.ndarray = None
    char_mask: np.ndarray = None
    vectors: np.ndarray = None


def char_ids(word):
    return [CHAR_INDEX.get(ch, CHAR_OOV) for ch in word]


def prepare_input(params, tokens, token_vectors=None):
    surfaces = [t if isinstance(t, str) else t.surface for t in tokens]
    if not surfaces:
        raise ValueError('cannot encode an empty token sequence')
    if any(not s for s in surfaces):
        raise ValueError('token with empty surface')
    n = len(surfaces)
    if params.config.contextual_dim:
        if token_vectors is None:
            raise ValueError('this model reads contextual token vectors; none supplied')
        vectors = np.asarray(token_vectors, dtype=np.float64)
        if vectors.shape != (n, params.config.contextual_dim):
            raise ValueError('contextual vectors have shape %s, expected (%d, %d)'
                             % (vectors.shape, n, params.config.contextual_dim))
        return TokenInput(n, vectors=vectors)
    words = params.embeddings.lookup_many(surfaces)
    length = max(len(s) for s in surfaces)
    chars = np.full((length, n), CHAR_OOV, dtype=np.int64)
    mask = np.zeros((length, n))
    for k, s in enumerate(surfaces):
        chars[:len(s), k] = char_ids(s)
        mask[:len(s), k] = 1.0
    return TokenInput(n, words, chars, mask)


def _dropout_mask(rng, shape, rate):
    if rng is None or rate <= 0.0:
        return None
    return (rng.random(shape) >= rate) / (1.0 - rate)


# -- forward pieces ------------------------------------------------------------

@dataclass
class EncodedContext:
    x: np.ndarray
    t: np.ndarray
    n: int
    cache: dict = field(default=None, repr=False)


@dataclass
class CandidateScores:
    """Scores for tokens ``0..n-1`` then classes ``n..n+5``.

    Anchor tokens are scored but masked out of the softmax (probability 0).
    """
    scores: np.ndarray
    probabilities: np.ndarray
    valid: np.ndarray
    cache: dict = field(default=None, repr=False)

    @property
    def n_candidates(self):
        return int(self.valid.sum())


def _encode(params, inp, rng, rate):
    P = params.tensors
    cfg = params.config
    cache = {}
    if inp.vectors is not None:
        x0 = inp.vectors
    else:
        emb = P['char_emb'][inp.chars]
        hs, cache['char'] = lstm_forward(P['char_W'], P['char_U'], P['char_b'], emb, inp.char_mask)
        x0 = np.concatenate([inp.words, hs[-1]], axis=1)
    mx = _dropout_mask(rng, x0.shape, rate)
    x = x0 if mx is None else x0 * mx
    xs = x[:, None, :]
    hf, cache['fw'] = lstm_forward(P['fw_W'], P['fw_U'], P['fw_b'], xs)
    hb, cache['bw'] = lstm_forward(P['bw_W'], P['bw_U'], P['bw_b'], xs[::-1])
    t0 = np.concatenate([hf[:, 0, :], hb[::-1, 0, :]], axis=1)
    mt = _dropout_mask(rng, t0.shape, rate)
    t = t0 if mt is None else t0 * mt
    cache.update(mx=mx, mt=mt, inp=inp, word_dim=cfg.word_dim)
    return EncodedContext(x, t, inp.n, cache)


def encode_tokens(params, tokens, train_mode=False, seed=None, token_vectors=None):
    """Contextualized vectors for ``tokens``; dropout only when ``train_mode``."""
    inp = prepare_input(params, tokens, token_vectors)
    rng = np.random.default_rng(seed) if train_mode else None
    return _encode(params, inp, rng, params.config.dropout if train_mode else 0.0)


def anchor_representation(encoded, anchor):
    if not (0 <= anchor.start <= anchor.end < encoded.n):
        raise IndexError('anchor [%d,%d] outside a %d-token context'
                         % (anchor.start, anchor.end, encoded.n))
    return encoded.t[anchor.start:anchor.end + 1].mean(axis=0)


def masked_softmax(scores, valid):
    out = np.zeros_like(scores)
    s = scores[valid]
    e = np.exp(s - s.max())
    out[valid] = e / e.sum()
    return out


def score_candidates(params, encoded, anchor_vec, anchor=None, rng=None, rate=0.0):
    """MLP scores over ``[h; a; h*a]`` for all n tokens and the six classes."""
    P = params.tensors
    D = P['implicit'].shape[1]
    anchor_vec = np.asarray(anchor_vec, dtype=np.float64)
    if anchor_vec.shape != (D,) or encoded.t.shape[1] != D:
        raise ValueError('anchor vector width %s does not match candidate width %d'
                         % (anchor_vec.shape, D))
    Hc = np.concatenate([encoded.t, P['implicit']], axis=0)
    Z = np.concatenate([Hc, np.broadcast_to(anchor_vec, Hc.shape), Hc * anchor_vec], axis=1)
    hid0 = np.tanh(Z @ P['mlp_W1'].T + P['mlp_b1'])
    mh = _dropout_mask(rng, hid0.shape, rate)
    hid = hid0 if mh is None else hid0 * mh
    scores = hid @ P['mlp_w2']
    valid = np.ones(len(scores), dtype=bool)
    if anchor is not None:
        valid[anchor.start:anchor.end + 1] = False
    probs = masked_softmax(scores, valid)
    cache = dict(Hc=Hc, Z=Z, hid0=hid0, hid=hid, mh=mh, a=anchor_vec)
    return CandidateScores(scores, probs, valid, cache)


def _forward(params, inp, anchor, rng=None, rate=0.0):
    enc = _encode(params, inp, rng, rate)
    a = anchor_representation(enc, anchor)
    return enc, score_candidates(params, enc, a, anchor, rng, rate)


# -- backward ------------------------------------------------------------------

def target_index(example, anchor=None):
    """Candidate index of the gold head (closest reference head, or n + class)."""
    gold = example.gold
    if gold is None:
        raise ValueError('example %s has no gold label' % example.id)
    anchor = anchor or example.anchor
    n = len(example.tokens)
    if gold.is_reference:
        from .corpus import closest_head
        k = closest_head(gold.gold_ref_tokens, anchor)
        if not 0 <= k < n or k in anchor:
            raise ValueError('example %s: gold head %d is outside the candidate tokens'
                             % (example.id, k))
        return k
    return n + IMPLICIT_CLASSES.index(gold.implicit_class)


def _backward(params, enc, sc, target):
    P = params.tensors
    c = sc.cache
    n = enc.n
    D = P['implicit'].shape[1]
    H = D // 2
    grads = {}

    ds = sc.probabilities.copy()
    ds[target] -= 1.0
    grads['mlp_w2'] = c['hid'].T @ ds
    dhid = np.outer(ds, P['mlp_w2'])
    if c['mh'] is not None:
        dhid *= c['mh']
    dpre = dhid * (1.0 - c['hid0'] ** 2)
    grads['mlp_W1'] = dpre.T @ c['Z']
    grads['mlp_b1'] = dpre.sum(axis=0)
    dZ = dpre @ P['mlp_W1']
    a, Hc = c['a'], c['Hc']
    dHc = dZ[:, :D] + dZ[:, 2 * D:] * a
    da = dZ[:, D:2 * D].sum(axis=0) + (dZ[:, 2 * D:] * Hc).sum(axis=0)
    grads['implicit'] = dHc[n:]
    dt = dHc[:n].copy()
    anchor = sc.cache['anchor']
    dt[anchor.start:anchor.end + 1] += da / len(anchor)

    ec = enc.cache
    if ec['mt'] is not None:
        dt *= ec['mt']
    dhf = dt[:, None, :H]
    dhb = dt[::-1, None, H:]
    dxf, grads['fw_W'], grads['fw_U'], grads['fw_b'] = lstm_backward(
        P['fw_W'], P['fw_U'], ec['fw'], dhs=dhf)
    dxb, grads['bw_W'], grads['bw_U'], grads['bw_b'] = lstm_backward(
        P['bw_W'], P['bw_U'], ec['bw'], dhs=dhb)
    dx = dxf[:, 0, :] + dxb[::-1, 0, :]
    if ec['mx'] is not None:
        dx *= ec['mx']
    if 'char' in ec:
        inp = ec['inp']
        dfinal = dx[:, ec['word_dim']:]
        demb, grads['char_W'], grads['char_U'], grads['char_b'] = lstm_backward(
            P['char_W'], P['char_U'], ec['char'], dh_last=dfinal)
        dchar = np.zeros_like(P['char_emb'])
        np.add.at(dchar, inp.chars, demb)
        grads['char_emb'] = dchar
    return grads


def loss_and_gradients(params, example, seed=None, anchor=None, inp=None, dropout=True,
                       token_vectors=None):
    """Cross-entropy of the gold candidate and the gradient for every trainable tensor.

    Dropout masks come from ``default_rng(seed)``; with ``seed=None`` or
    ``dropout=False`` the pass is deterministic and dropout-free.
    """
    anchor = anchor or example.anchor
    target = target_index(example, anchor)
    if inp is None:
        inp = prepare_input(params, example.tokens, token_vectors)
    rate = params.config.dropout if (dropout and seed is not None) else 0.0
    rng = np.random.default_rng(seed) if rate > 0 else None
    enc, sc = _forward(params, inp, anchor, rng, rate)
    sc.cache['anchor'] = anchor
    p = sc.probabilities[target]
    loss = -math.log(p) if p > 0 else math.inf
    return loss, _backward(params, enc, sc, target)


# -- inference -------------------------------------------------------------

def candidate_scores(params, example, anchor=None, inp=None, token_vectors=None):
    anchor = anchor or example.anchor
    if inp is None:
        inp = prepare_input(params, example.tokens, token_vectors)
    return _forward(params, inp, anchor)[1]


def resolution_from_index(k, n):
    if k < n:
        return Resolution.reference(int(k))
    return Resolution.implicit(IMPLICIT_CLASSES[k - n])


def resolve(params, example, anchor=None, inp=None, token_vectors=None):
    """Highest-probability head; ties go to the lowest candidate index."""
    sc = candidate_scores(params, example, anchor, inp, token_vectors)
    return resolution_from_index(int(np.argmax(sc.probabilities)), len(example.tokens))


# -- training ----------------------------------------------------------------

class Adam:
    def __init__(self, tensors, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in tensors.items()}
        self.v = {k: np.zeros_like(v) for k, v in tensors.items()}
        self.t = 0

    def step(self, tensors, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            tensors[k] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def _vectors_for(contextual, ex):
    if contextual is None:
        return None
    if ex.id not in contextual:
        raise ValueError('no contextual vectors for example %s' % ex.id)
    return contextual[ex.id]


def head_accuracy(params, examples, inputs=None):
    from .evaluation import evaluate
    inputs = inputs or [None] * len(examples)
    preds = [resolve(params, ex, inp=inp) for ex, inp in zip(examples, inputs)]
    return evaluate(preds, [ex.gold for ex in examples], examples).head_accuracy


def train_resolver(train, dev, embeddings=None, config=None, contextual=None, params=None):
    """Adam with per-example updates and early stopping on dev head accuracy.

    Returns the parameters from the best dev epoch; ``params.history`` holds
    one record per epoch (mean training loss, dev accuracy).
    """
    config = config or ResolverConfig()
    if not train or not dev:
        raise ValueError('train and dev splits must be non-empty')
    if params is None:
        params = ResolverParams.initialize(config, embeddings)
    config = params.config
    train_inputs = [prepare_input(params, ex.tokens, _vectors_for(contextual, ex)) for ex in train]
    dev_inputs = [prepare_input(params, ex.tokens, _vectors_for(contextual, ex)) for ex in dev]
    for ex in train:
        target_index(ex)
    rng = np.random.default_rng(config.seed)
    opt = Adam(params.tensors, config.lr, config.beta1, config.beta2, config.eps)
    best, best_acc, wait = params.copy(), -1.0, 0
    history = []
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train))
        seeds = rng.integers(0, 2 ** 63 - 1, size=len(train))
        total = 0.0
        for k, i in enumerate(order):
            ex = train[i]
            loss, grads = loss_and_gradients(params, ex, seed=int(seeds[k]), inp=train_inputs[i])
            if not math.isfinite(loss) or not all(np.isfinite(g).all() for g in grads.values()):
                raise TrainingError('non-finite loss %r at epoch %d on example %s'
                                    % (loss, epoch, ex.id))
            opt.step(params.tensors, grads)
            total += loss
        acc = head_accuracy(params, dev, dev_inputs)
        history.append({'epoch': epoch, 'loss': total / len(train), 'dev_accuracy': acc})
        log.info('epoch %d loss %.4f dev head accuracy %.4f', epoch, total / len(train), acc)
        if acc > best_acc:
            best, best_acc, wait = params.copy(), acc, 0
        else:
            wait += 1
        if config.stop_at is not None and acc >= config.stop_at:
            break
        if wait >= config.patience:
            break
    best.history = history
    best.round_to_float32()
    return best


def load_contextual_vectors(path):
    """Read ``{"id": ..., "vectors": [[...], ...]}`` lines into ``{id: array}``."""
    out = {}
    with open(path, encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            rows = np.asarray(obj['vectors'], dtype=np.float64)
            if rows.ndim != 2:
                raise ValueError('line %d: vectors must be a 2-d list' % lineno)
            out[obj['id']] = rows
    return out
