# src/sasshalab/numkit/rng.py
"""
rng
===

- **Module:** `src/sasshalab/numkit/rng.py`

Deterministic random streams.

All randomness in sasshalab flows through `RngStream`. A stream wraps a
numpy `Generator` seeded from a 64-bit integer; child streams are derived
from ``(seed, label)`` by hashing, so the data, optimizer and metric
streams of one run never share draws and never depend on call order.

The generator algorithm is pinned here (`RNG_ALGORITHM`) and recorded in
every run manifest.

Usage
-----
```python
root = RngStream(7)
data_rng = root.child("data")
z = rademacher(root.child("probe"), 10)
```
"""

import hashlib

import numpy as np
from numpy.typing import NDArray

from sasshalab.exception.base_exceptions import PreconditionError

RNG_ALGORITHM = "numpy.PCG64/blake2b-64-child"

_SEED_MASK = (1 << 64) - 1


def derive_seed(seed: int, label: str) -> int:
    """
    Derive a child seed from a parent seed and a label.

    Parameters
    ----------
    seed : int
        Parent 64-bit seed.
    label : str
        Name of the child stream.

    Returns
    -------
    int
        Child seed in ``[0, 2**64)``.
    """
    digest = hashlib.blake2b(
        f"{seed & _SEED_MASK}:{label}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """
    Single-owner deterministic random stream.

    Identical seeds produce identical draw sequences. Streams must not be
    shared between workers; derive one child per worker instead.

    Attributes
    ----------
    seed : int
        The 64-bit seed of this stream.
    path : str
        Slash-separated labels from the root stream, for diagnostics.
    """

    def __init__(self, seed: int, path: str = ""):
        self.seed = int(seed) & _SEED_MASK
        self.path = path
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def child(self, label: str) -> "RngStream":
        """
        Derive an independent child stream.

        The child depends only on this stream's seed and `label`, not on how
        many draws were already taken from the parent.
        """
        return RngStream(derive_seed(self.seed, label), f"{self.path}/{label}")

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def normal(self, size) -> NDArray[np.float64]:
        return self._generator.standard_normal(size)

    def uniform(self, low: float, high: float, size=None):
        return self._generator.uniform(low, high, size)

    def integers(self, low: int, high: int, size=None):
        return self._generator.integers(low, high, size)

    def permutation(self, n: int) -> NDArray[np.int64]:
        return self._generator.permutation(n)

    def signs(self, size) -> NDArray[np.float64]:
        """Independent uniform ±1 entries."""
        bits = self._generator.integers(0, 2, size)
        return 2.0 * bits.astype(np.float64) - 1.0

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path='{self.path}')"


def rademacher(rng: RngStream, d: int) -> NDArray[np.float64]:
    """
    Draw a Rademacher probe vector.

    Parameters
    ----------
    rng : RngStream
        Source stream.
    d : int
        Dimension, ``d >= 1``.

    Returns
    -------
    ndarray
        Vector of independent ±1 entries.
    """
    if d < 1:
        raise PreconditionError(f"rademacher: dimension must be >= 1, got {d}")
    return rng.signs(d)


def unit_sphere_direction(rng: RngStream, d: int) -> NDArray[np.float64]:
    """
    Draw a direction uniformly on the unit sphere (normalized Gaussian).

    Parameters
    ----------
    rng : RngStream
        Source stream.
    d : int
        Dimension, ``d >= 1``.

    Returns
    -------
    ndarray
        Vector with unit Euclidean norm.
    """
    if d < 1:
        raise PreconditionError(f"unit_sphere_direction: dimension must be >= 1, got {d}")
    while True:
        z = rng.normal(d)
        norm = float(np.linalg.norm(z))
        if norm > 0.0:
            return z / norm
