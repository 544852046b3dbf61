"""Hashed binary features and a linear max-margin classifier.

Feature strings are mapped to ``[0, 2**bits)`` with 64-bit FNV-1a followed
by a multiply-shift step::

    index = (fnv1a64(utf8(feature)) * 0x9E3779B97F4A7C15 mod 2**64) >> (64 - bits)

Training minimises ``lambda/2 |w|^2 + mean(hinge)`` with ``lambda = 1/(C*N)``
by stochastic subgradient steps, and returns the average of all iterates.
"""
import struct
from dataclasses import dataclass

import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MULTIPLIER = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

DEFAULT_BITS = 22


def fnv1a64(data):
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK64
    return h


def hash_feature(feature, bits=DEFAULT_BITS):
    h = fnv1a64(feature.encode('utf-8'))
    return ((h * MULTIPLIER) & _MASK64) >> (64 - bits)


@dataclass(frozen=True)
class FeatureVector:
    """Sorted, duplicate-free hashed indices of binary (1.0-valued) features."""
    indices: tuple
    names: tuple = ()

    def __post_init__(self):
        idx = self.indices
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError('feature indices must be strictly increasing')

    @property
    def values(self):
        return (1.0,) * len(self.indices)

    def __len__(self):
        return len(self.indices)


def vectorize(names, bits=DEFAULT_BITS):
    """Hash feature strings into a FeatureVector; ``names`` are kept for debugging."""
    names = tuple(names)
    return FeatureVector(tuple(sorted({hash_feature(f, bits) for f in names})), names)


@dataclass
class TrainConfig:
    epochs: int = 10
    c: float = 1.0
    lr0: float = 0.1
    lr_decay: float = 1e-4
    bits: int = DEFAULT_BITS
    seed: int = 13


class LinearModel:
    """``decision = w.x + b``; positive iff strictly greater than zero."""

    def __init__(self, weights, bias=0.0, bits=None, meta=0):
        weights = np.asarray(weights, dtype=np.float32)
        if bits is None:
            bits = int(np.log2(len(weights)))
        if len(weights) != 1 << bits:
            raise ValueError('weight vector must have 2**bits entries')
        if not np.all(np.isfinite(weights)) or not np.isfinite(bias):
            raise ValueError('non-finite model weights')
        self.weights = weights
        self.bias = float(np.float32(bias))
        self.bits = bits
        self.meta = meta

    def margin(self, features):
        idx = np.fromiter(features.indices, dtype=np.int64, count=len(features.indices))
        return float(self.weights[idx].astype(np.float64).sum() + self.bias)

    def classify(self, features):
        m = self.margin(features)
        return m > 0.0, m

    def save(self, path):
        """Write the ``NFHL`` model file (little endian throughout)."""
        with open(path, 'wb') as f:
            f.write(MODEL_MAGIC)
            f.write(struct.pack('<IIB', MODEL_VERSION, self.bits, self.meta))
            f.write(self.weights.astype('<f4').tobytes())
            f.write(struct.pack('<f', self.bias))

    @classmethod
    def load(cls, path):
        with open(path, 'rb') as f:
            data = f.read()
        if data[:4] != MODEL_MAGIC:
            raise ValueError('%s is not an NFHL model file' % path)
        version, bits, meta = struct.unpack_from('<IIB', data, 4)
        if version != MODEL_VERSION:
            raise ValueError('unsupported model version %d' % version)
        offset = 4 + struct.calcsize('<IIB')
        size = 1 << bits
        expected = offset + 4 * size + 4
        if len(data) != expected:
            raise ValueError('truncated model file (%d of %d bytes)' % (len(data), expected))
        weights = np.frombuffer(data, dtype='<f4', count=size, offset=offset).astype(np.float32)
        (bias,) = struct.unpack_from('<f', data, offset + 4 * size)
        return cls(weights, bias, bits, meta)


MODEL_MAGIC = b'NFHL'
MODEL_VERSION = 1


def classify_span(model, features):
    return model.classify(features)


def train_linear(vectors, labels, config=None):
    """Averaged SGD on the L2-regularised hinge loss.

    ``labels`` are booleans (or +/-1).  The iterate is kept as ``scale * v``
    so the per-step shrinkage is O(1); the running sum of iterates is kept as
    ``u + beta * v`` so averaging stays O(nnz) per step.
    """
    config = config or TrainConfig()
    y = np.array([1.0 if (l is True or l == 1) else -1.0 for l in labels])
    if len(y) == 0 or len(y) != len(vectors):
        raise ValueError('need one label per feature vector')
    if (y > 0).all() or (y < 0).all():
        raise ValueError('training data must contain both classes')
    size = 1 << config.bits
    rows = [np.fromiter(v.indices, dtype=np.int64, count=len(v.indices)) for v in vectors]
    n = len(rows)
    lam = 1.0 / (config.c * n)
    if config.lr0 * lam >= 1.0:
        raise ValueError('lr0 * lambda >= 1 (lr0=%g, C=%g, n=%d): the shrink step would '
                         'flip the weights' % (config.lr0, config.c, n))
    rng = np.random.default_rng(config.seed)

    v = np.zeros(size)
    u = np.zeros(size)
    scale, beta = 1.0, 0.0
    b = b_sum = 0.0
    t = 0
    for _ in range(config.epochs):
        for i in rng.permutation(n):
            t += 1
            eta = config.lr0 / (1.0 + t * config.lr_decay)
            idx = rows[i]
            margin = y[i] * (scale * v[idx].sum() + b)
            scale *= 1.0 - eta * lam
            if margin < 1.0:
                delta = eta * y[i] / scale
                v[idx] += delta
                u[idx] -= beta * delta
                b += eta * y[i]
            beta += scale
            b_sum += b
            if scale < 1e-9:
                # materialise the running sum in u, then fold the scale into v
                u += beta * v
                beta = 0.0
                v *= scale
                scale = 1.0
    weights = (u + beta * v) / t
    return LinearModel(weights.astype(np.float32), b_sum / t, config.bits)
