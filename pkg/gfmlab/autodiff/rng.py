import numpy as np

from ..errors import ConfigError

FNV_OFFSET = 0xcbf29ce484222325
FNV_PRIME = 0x100000001b3
MASK64 = 0xffffffffffffffff


def fnv1a64(data):
    """
    64-bit FNV-1a over the UTF-8 bytes of data.

    :param data: str or bytes
    :returns:    The hash as unsigned 64-bit integer
    """
    if isinstance(data, str):
        data = data.encode('utf-8')
    h = FNV_OFFSET
    for byte in bytearray(data):
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


class Rng(object):
    """
    Seeded deterministic random source on top of numpy's Philox-4x64-10
    counter-based generator.

    The 128-bit Philox key is ``seed | (stream << 64)``. Sub-streams obtained
    with :meth:`split` hash their label into the stream word, so they do not
    depend on how many draws the parent made.

    :ivar seed:    unsigned 64-bit seed
    :ivar stream:  unsigned 64-bit stream id
    """

    ALGORITHM = 'philox4x64-10'

    def __init__(self, seed=0, stream=0):
        seed = int(seed)
        if seed < 0 or seed > MASK64:
            raise ConfigError("Seed %d is not an unsigned 64-bit integer" % seed,
                              field='seed')
        self.seed = seed
        self.stream = int(stream) & MASK64
        bit_generator = np.random.Philox(key=self.seed | (self.stream << 64))
        self._gen = np.random.Generator(bit_generator)

    def split(self, label):
        """
        Returns an independent Rng for the given sub-stream label
        """
        stream = fnv1a64('%d/%s' % (self.stream, label))
        return Rng(self.seed, stream)

    def random(self, size=None):
        return self._gen.random(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def laplace(self, loc=0.0, scale=1.0, size=None):
        return self._gen.laplace(loc, scale, size)

    def poisson(self, lam=1.0, size=None):
        return self._gen.poisson(lam, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def permutation(self, n):
        return self._gen.permutation(n)

    def choice(self, a, size=None, replace=True):
        return self._gen.choice(a, size=size, replace=replace)

    def __repr__(self):
        return "Rng(seed=%d, stream=0x%016x)" % (self.seed, self.stream)
