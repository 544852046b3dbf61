"""Bracketed constituency trees whose leaves are token indices."""
from dataclasses import dataclass


class TreeFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ConstituencyNode:
    """A phrase node (``children`` non-empty) or a preterminal (``index`` set).

    Preterminals carry the position of their token within the example, so
    ``(CD one)`` in a sentence starting at token 7 becomes
    ``ConstituencyNode('CD', (), 7)`` when ``one`` is that sentence's first word.
    """
    label: str
    children: tuple = ()
    index: int = None

    @property
    def is_leaf(self):
        return self.index is not None

    def leaves(self):
        if self.is_leaf:
            return [self.index]
        out = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def preterminals(self):
        if self.is_leaf:
            return [self]
        out = []
        for child in self.children:
            out.extend(child.preterminals())
        return out

    def subtrees(self):
        """Pre-order traversal of phrase nodes (preterminals excluded)."""
        if self.is_leaf:
            return
        yield self
        for child in self.children:
            yield from child.subtrees()

    def span(self):
        leaves = self.leaves()
        return leaves[0], leaves[-1]

    def to_bracketed(self, words):
        if self.is_leaf:
            return '(%s %s)' % (self.label, words[self.index])
        return '(%s %s)' % (self.label, ' '.join(
            child.to_bracketed(words) for child in self.children))


def _tokenize(text):
    return text.replace('(', ' ( ').replace(')', ' ) ').split()


def parse_bracketed(text, offset=0):
    """Parse a bracketed tree; leaves are numbered left-to-right from ``offset``.

    Returns ``(tree, words)``; ``words`` are the leaf strings, kept only for
    sanity checks against the token sequence.  A bare outer bracket
    ``( (S ...) )`` as printed by some parsers is unwrapped to ``ROOT``.
    """
    toks = _tokenize(text)
    if not toks:
        raise TreeFormatError('empty tree')
    words = []
    pos = 0

    def node():
        nonlocal pos
        if toks[pos] != '(':
            raise TreeFormatError('expected "(" at token %d of %r' % (pos, text))
        pos += 1
        if pos >= len(toks):
            raise TreeFormatError('unexpected end of tree %r' % text)
        if toks[pos] == '(':
            label = 'ROOT'
        else:
            label = toks[pos]
            pos += 1
        if pos >= len(toks):
            raise TreeFormatError('unexpected end of tree %r' % text)
        if toks[pos] not in '()':
            # preterminal: (TAG word)
            words.append(toks[pos])
            pos += 1
            if pos >= len(toks) or toks[pos] != ')':
                raise TreeFormatError('preterminal %s has more than one word' % label)
            pos += 1
            return ConstituencyNode(label, (), offset + len(words) - 1)
        children = []
        while pos < len(toks) and toks[pos] == '(':
            children.append(node())
        if pos >= len(toks) or toks[pos] != ')':
            raise TreeFormatError('unbalanced brackets in %r' % text)
        pos += 1
        if not children:
            raise TreeFormatError('empty phrase %s' % label)
        return ConstituencyNode(label, tuple(children))

    tree = node()
    if pos != len(toks):
        raise TreeFormatError('trailing material after tree in %r' % text)
    return tree, words
