import hashlib
import json
import logging
import re
from collections import OrderedDict

import numpy as np

from .autodiff.rng import Rng, fnv1a64
from .errors import ConfigError, EmptyTextError

TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text):
    """
    Case-folds text and splits it on everything but letters and digits
    """
    return TOKEN_RE.findall(text.casefold())


class FrozenTextEncoder(object):
    """
    Deterministic bag-of-words text encoder.

    Every token is hashed with FNV-1a 64 into one of vocab_buckets buckets.
    The embedding of a text is the L2-normalized sum of the projection rows
    of its tokens. The projection is drawn once from the seed and is
    read-only afterwards.

    :param seed:          Seed of the projection
    :param vocab_buckets: Number of hash buckets V
    :param embed_dim:     Embedding dimension d
    """

    HASH = 'fnv1a64'
    TOKENIZER = 'lower+split'

    def __init__(self, seed=0, vocab_buckets=4096, embed_dim=32):
        if vocab_buckets < 1 or embed_dim < 1:
            raise ConfigError("Text encoder needs vocab_buckets >= 1 and "
                              "embed_dim >= 1")
        self.seed = int(seed)
        self.vocab_buckets = int(vocab_buckets)
        self.embed_dim = int(embed_dim)
        projection = Rng(self.seed).split('projection').normal(
            size=(self.vocab_buckets, self.embed_dim))
        projection.setflags(write=False)
        self._projection = projection
        self._cache = {}
        self.log = logging.getLogger('gfmlab.text_encoder')

    @property
    def projection(self):
        return self._projection

    def bucket(self, token):
        return fnv1a64(token) % self.vocab_buckets

    def embed_text(self, text):
        """
        :returns: unit-norm d-vector (a fresh copy)
        """
        cached = self._cache.get(text)
        if cached is None:
            tokens = tokenize(text)
            if not tokens:
                raise EmptyTextError("Text %r contains no tokens" % text)
            rows = [self.bucket(t) for t in tokens]
            v = self._projection[rows].sum(axis=0)
            norm = np.linalg.norm(v)
            if norm == 0.0:
                raise EmptyTextError("Text %r embeds to the zero vector" %
                                     text)
            cached = v / norm
            self._cache[text] = cached
        return cached.copy()

    def embed_many(self, texts):
        if not len(texts):
            return np.zeros((0, self.embed_dim))
        return np.stack([self.embed_text(t) for t in texts])

    def embed_labels(self, label_sentences):
        """
        :returns: K x d matrix of unit rows, one per label sentence
        """
        if len(label_sentences) < 2:
            raise ConfigError("Zero-shot needs at least 2 label sentences, "
                              "got %d" % len(label_sentences))
        return self.embed_many(label_sentences)

    def dictify(self):
        d = OrderedDict()
        d['seed'] = self.seed
        d['vocab_buckets'] = self.vocab_buckets
        d['embed_dim'] = self.embed_dim
        d['hash'] = self.HASH
        d['tokenizer'] = self.TOKENIZER
        return d

    @classmethod
    def from_dict(cls, d):
        if d.get('hash', cls.HASH) != cls.HASH or \
                d.get('tokenizer', cls.TOKENIZER) != cls.TOKENIZER:
            raise ConfigError("Unsupported text encoder %s/%s" %
                              (d.get('hash'), d.get('tokenizer')))
        return cls(d.get('seed', 0), d.get('vocab_buckets', 4096),
                   d.get('embed_dim', 32))

    @classmethod
    def from_settings(cls, settings):
        return cls(settings.get_int('TEXT', 'seed'),
                   settings.get_int('TEXT', 'vocab_buckets'),
                   settings.get_int('TEXT', 'embed_dim'))

    def save(self, path):
        with open(path, 'w') as f:
            f.write(json.dumps(self.dictify(), sort_keys=True))
            f.write('\n')

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def fingerprint(self):
        """
        sha256 over the projection bytes, constant for a frozen encoder
        """
        return hashlib.sha256(
            self._projection.astype('<f8').tobytes()).hexdigest()

    def __repr__(self):
        return "FrozenTextEncoder(seed=%d, V=%d, d=%d)" % (
            self.seed, self.vocab_buckets, self.embed_dim)
