"""Word vectors and the derived definition, example, and context vectors.

Embedding files are plain text: an optional header line ``N D`` followed by
one ``token v1 v2 ... vD`` row per line.  All derived vectors are stopword
filtered averages; a token window never crosses sentence (or example)
boundaries and never includes the target token itself.
"""

from dataclasses import dataclass, field
from importlib import resources

import numpy as np


@dataclass
class EmbeddingStore:
    dim: int
    vectors: dict
    stopwords: frozenset = field(default_factory=frozenset)

    def __contains__(self, token):
        return token in self.vectors

    def __len__(self):
        return len(self.vectors)

    def get(self, token):
        """Vector for ``token``, or None when the token is unknown."""
        return self.vectors.get(token)


@dataclass(frozen=True)
class ContextSpec:
    """Symmetric context window of ``window`` tokens (half on each side)."""

    window: int = 8

    def __post_init__(self):
        if self.window < 2 or self.window % 2 != 0:
            raise ValueError("window must be an even integer >= 2, got %r" % (self.window,))

    @property
    def half(self):
        return self.window // 2


def load_stopwords(path):
    """One token per line; '#' starts a comment."""
    stopwords = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            token = line.split("#", 1)[0].strip()
            if token:
                stopwords.add(token)
    return frozenset(stopwords)


def default_stopwords():
    """The English stopword list shipped with the package."""
    text = resources.files("senseforge").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(
        tok for tok in (line.split("#", 1)[0].strip() for line in text.splitlines()) if tok)


def load_embeddings(path, stopwords=None):
    """Load a text embedding file into an EmbeddingStore.

    The dimension comes from the header when present, otherwise from the
    first data row, and is enforced on every row.
    """
    vectors = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        first = True
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if first:
                first = False
                if len(parts) == 2 and all(p.isdigit() for p in parts):
                    dim = int(parts[1])
                    continue
            token, fields = parts[0], parts[1:]
            if dim is None:
                dim = len(fields)
                if dim == 0:
                    raise ValueError(
                        "embedding line %d: token %r has no vector values" % (lineno, token))
            if len(fields) != dim:
                raise ValueError(
                    "embedding line %d: token %r has %d values, expected %d"
                    % (lineno, token, len(fields), dim))
            try:
                vec = np.array([float(f) for f in fields])
            except ValueError as exc:
                raise ValueError(
                    "embedding line %d: token %r has a non-numeric field (%s)"
                    % (lineno, token, exc)) from exc
            if token in vectors:
                raise ValueError("embedding line %d: duplicate token %r" % (lineno, token))
            vectors[token] = vec
    if dim is None:
        raise ValueError("embedding file %s contains no vectors" % path)
    return EmbeddingStore(dim, vectors, frozenset(stopwords or ()))


def average_vector(tokens, store):
    """Mean of the vectors of the non-stopword, in-vocabulary tokens.

    The divisor is the number of tokens actually averaged; returns None
    when no token qualifies.
    """
    used = [store.vectors[t] for t in tokens if t not in store.stopwords and t in store.vectors]
    if not used:
        return None
    return np.mean(used, axis=0)


def definition_vector(sense, store):
    """Average vector of a sense's definition tokens, or None."""
    return average_vector(sense.definition, store)


def _window(tokens, index, half):
    return list(tokens[max(0, index - half):index]) + list(tokens[index + 1:index + 1 + half])


def example_vector(sense, lemma, spec, store):
    """Average vector of the window around ``lemma`` in the sense's first example.

    Falls back to averaging the whole example when the lemma does not occur
    in it; returns None when the sense has no example.
    """
    if not sense.examples:
        return None
    example = sense.examples[0]
    try:
        pos = example.index(lemma)
    except ValueError:
        return average_vector(example, store)
    return average_vector(_window(example, pos, spec.half), store)


def context_vector(sentence, index, spec, store):
    """Average vector of the window around ``sentence[index]``, target excluded.

    Clips at sentence boundaries, filters stopwords, and skips tokens absent
    from the store; returns None when nothing remains.
    """
    if index < 0 or index >= len(sentence):
        raise IndexError("index %d out of range for sentence of length %d" % (index, len(sentence)))
    return average_vector(_window(sentence, index, spec.half), store)
