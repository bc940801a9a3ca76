"""Counter-based random streams with explicit, hierarchical substreams.

Each :class:`RngStream` is a Philox4x64 generator keyed by ``(seed, path)``.
The path is a tuple of integers naming the substream (for example
``(iteration, sample_index)``), so the numbers a Monte Carlo sample sees do
not depend on how many other samples were drawn before it or on which thread
drew them.
"""

from __future__ import annotations

import hashlib
from typing import Hashable

import numpy as np

_MASK64 = (1 << 64) - 1


def _label_to_int(label: Hashable) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & _MASK64
    digest = hashlib.blake2b(str(label).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """A reproducible random stream identified by ``(seed, path)``.

    Parameters
    ----------
    seed : int
        64-bit master seed.
    path : tuple
        Substream identifier. Integers are used as-is; other labels
        (strings) are hashed to 64 bits.

    Examples
    --------
    >>> a = RngStream(7).substream(3)
    >>> b = RngStream(7, (3,))
    >>> float(a.standard_normal()) == float(b.standard_normal())
    True
    """

    __slots__ = ("seed", "path", "_gen")

    def __init__(self, seed: int, path: tuple = ()):
        self.seed = int(seed) & _MASK64
        self.path = tuple(path)
        spawn_key = tuple(_label_to_int(p) for p in self.path)
        key = np.random.SeedSequence(self.seed, spawn_key=spawn_key).generate_state(2, np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    @property
    def stream_id(self) -> tuple:
        return self.path

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def substream(self, *labels: Hashable) -> "RngStream":
        """Child stream; independent of the parent's consumption state."""
        return RngStream(self.seed, self.path + tuple(labels))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path!r})"

    # thin pass-throughs used throughout the package
    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def chisquare(self, dof, size=None):
        return self._gen.chisquare(dof, size)

    def gamma(self, shape, scale=1.0, size=None):
        return self._gen.gamma(shape, scale, size)

    def exponential(self, scale=1.0, size=None):
        return self._gen.exponential(scale, size)
