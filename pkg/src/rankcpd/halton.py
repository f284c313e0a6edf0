"""Unscrambled Halton points used as the fixed target measure of rank maps."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

MAX_DIM = 100


def first_primes(k):
    """Return the first ``k`` primes as an int array."""
    primes = []
    candidate = 2
    while len(primes) < k:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return np.array(primes, dtype=np.int64)


def radical_inverse(indices, base):
    """Van der Corput radical inverse of integer ``indices`` in ``base``.

    Digits are accumulated from the least significant end so every value is
    a finite sum of exact dyadic/base-b fractions, evaluated in float64.
    """
    idx = np.asarray(indices, dtype=np.int64).copy()
    out = np.zeros(idx.shape, dtype=np.float64)
    scale = 1.0 / base
    while np.any(idx > 0):
        idx, digit = np.divmod(idx, base)
        out += digit * scale
        scale /= base
    return out


@dataclass(frozen=True, eq=False)
class HaltonGrid:
    """``count`` Halton points in ``(0, 1)^dim``; row ``k`` is sequence index ``k + 1``."""

    points: np.ndarray
    bases: tuple

    @property
    def count(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def centroid(self):
        return self.points.mean(axis=0)

    def __len__(self):
        return self.count


def generate_halton(count, dim):
    """Generate the first ``count`` points of the ``dim``-dimensional Halton sequence.

    Coordinate ``k`` uses the ``k``-th prime as radical-inverse base. Index 0
    (the origin) is skipped, so all coordinates lie strictly inside (0, 1).
    Plain Halton shows visible correlation between coordinates once the bases
    get large (roughly ``dim`` above 10); it is accepted up to ``MAX_DIM``.

    >>> generate_halton(3, 2).points.tolist()
    [[0.5, 0.3333333333333333], [0.25, 0.6666666666666666], [0.75, 0.1111111111111111]]
    """
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise InvalidArgumentError(f"count must be a positive integer, got {count!r}")
    if isinstance(dim, bool) or int(dim) != dim or dim < 1:
        raise InvalidArgumentError(f"dim must be a positive integer, got {dim!r}")
    if dim > MAX_DIM:
        raise InvalidArgumentError(f"dim must be at most {MAX_DIM}, got {dim}")
    count, dim = int(count), int(dim)
    bases = first_primes(dim)
    indices = np.arange(1, count + 1, dtype=np.int64)
    points = np.column_stack([radical_inverse(indices, b) for b in bases])
    points.setflags(write=False)
    return HaltonGrid(points=points, bases=tuple(int(b) for b in bases))
