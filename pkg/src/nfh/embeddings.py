"""Plain-text word vectors ("word f1 f2 ... fd" per line)."""
import numpy as np

from .corpus import FormatError


class EmbeddingTable:
    """Frozen word vectors with a mean-of-vocabulary fallback for unknown words.

    Lookup tries the exact surface first and then its lowercased form, since
    common pre-trained tables are case sensitive.
    """

    def __init__(self, words, matrix, unk_vector=None):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(words) or matrix.shape[1] == 0:
            raise ValueError('matrix shape %s does not match %d words' % (matrix.shape, len(words)))
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        self.matrix = matrix
        self.matrix.setflags(write=False)
        if unk_vector is None:
            unk_vector = matrix.mean(axis=0)
        self.unk_vector = np.asarray(unk_vector, dtype=np.float64)
        self.unk_vector.setflags(write=False)

    @property
    def dimension(self):
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index or word.lower() in self.index

    def lookup(self, word):
        i = self.index.get(word)
        if i is None:
            i = self.index.get(word.lower())
        if i is None:
            return self.unk_vector
        return self.matrix[i]

    def lookup_many(self, words):
        return np.stack([self.lookup(w) for w in words])


def load_embeddings(path):
    """Load a textual vector file.

    A leading ``<count> <dim>`` header (word2vec text format) is skipped.
    Rows of inconsistent width raise FormatError.
    """
    words, rows = [], []
    width = None
    with open(path, encoding='utf-8', errors='replace') as f:
        for lineno, line in enumerate(f, 1):
            parts = line.rstrip('\n').rstrip().split(' ')
            if not parts or parts == ['']:
                continue
            if lineno == 1 and len(parts) == 2 and parts[0].isdigit() and parts[1].isdigit():
                continue
            if len(parts) < 2:
                raise FormatError('vector row without values', lineno)
            if width is None:
                width = len(parts) - 1
            elif len(parts) - 1 != width:
                raise FormatError('row has %d values, expected %d' % (len(parts) - 1, width), lineno)
            try:
                rows.append([float(v) for v in parts[1:]])
            except ValueError:
                raise FormatError('non-numeric vector value', lineno) from None
            words.append(parts[0])
    if not rows:
        raise FormatError('no vectors in %s' % path)
    return EmbeddingTable(words, np.array(rows))
