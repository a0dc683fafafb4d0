"""Seedable random generation for every random object used by the simulations.

All randomness flows through :func:`make_rng`.  A stream is identified by a
``(seed, stream_id)`` pair; the child key is a pure hash of the pair, so
replicas can be generated in parallel (one stream per replica) and still be
bit-reproducible across runs and platforms.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

# Streams are numpy Generators driven by counter-based Philox; the alias is
# the type used throughout the package.
RngStream = np.random.Generator

_U64 = (1 << 64) - 1


def make_rng(seed: int, stream_id: int = 0) -> RngStream:
    """Create the random stream identified by ``(seed, stream_id)``.

    The Philox key is the first 128 bits of SHA-256 over the two values
    packed as little-endian u64, so distinct stream ids derived from one
    master seed share no state, and the mapping is a documented pure
    function of its inputs.
    """
    if seed < 0 or stream_id < 0:
        raise ValueError("seed and stream_id must be nonnegative")
    digest = hashlib.sha256(struct.pack("<QQ", seed & _U64, stream_id & _U64)).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class MultisetWord:
    """A word of length k*n over {1..n} in which each letter occurs exactly k times.

    The word is identified with the planar point set {(i, letters[i-1])}; the
    position index is the x coordinate and the letter is the row.
    """

    n: int
    k: int
    letters: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1 or self.k < 1:
            raise ValueError("n and k must be >= 1")
        if len(self.letters) != self.n * self.k:
            raise ValueError("word length must be k*n")
        counts = np.bincount(np.asarray(self.letters, dtype=np.int64), minlength=self.n + 1)
        if counts[0] != 0 or len(counts) > self.n + 1 or not np.all(counts[1:] == self.k):
            raise ValueError("each letter in 1..n must occur exactly k times")

    @property
    def size(self) -> int:
        return self.n * self.k


@dataclass(frozen=True, eq=False)
class PlanarPointSet:
    """Finite set of (x, row) points with x in (0, x_max] and row in {1..t_max}.

    Positions are stored per row, sorted ascending; duplicate (x, row) pairs
    are rejected because their multiplicity semantics under the chain orders
    would be ambiguous.
    """

    row_positions: tuple[np.ndarray, ...]
    x_max: float

    def __post_init__(self) -> None:
        if self.x_max <= 0:
            raise ValueError("x_max must be positive")
        for i, xs in enumerate(self.row_positions):
            if xs.ndim != 1:
                raise ValueError("row positions must be 1-d arrays")
            if xs.size and (xs[0] <= 0 or xs[-1] > self.x_max):
                raise ValueError(f"row {i + 1}: positions must lie in (0, x_max]")
            if xs.size > 1:
                if np.any(np.diff(xs) < 0):
                    raise ValueError(f"row {i + 1}: positions must be sorted ascending")
                if np.any(np.diff(xs) == 0):
                    raise ValueError(f"row {i + 1}: duplicate (x, row) point")

    @property
    def t_max(self) -> int:
        return len(self.row_positions)

    @property
    def size(self) -> int:
        return int(sum(xs.size for xs in self.row_positions))

    def row(self, i: int) -> np.ndarray:
        """Positions on row ``i`` (1-based)."""
        return self.row_positions[i - 1]

    def points(self) -> list[tuple[float, int]]:
        return [(float(x), i + 1) for i, xs in enumerate(self.row_positions) for x in xs]

    def chain_rows(self) -> np.ndarray:
        """Row indices sorted by x ascending, ties broken by row descending.

        With this tie-break an equal-x pair can never chain under either
        partial order, so the planar problem reduces to a subsequence
        problem on the returned row sequence.
        """
        xs = np.concatenate([np.asarray(p, dtype=float) for p in self.row_positions]) \
            if self.row_positions else np.empty(0)
        rows = np.concatenate(
            [np.full(p.size, i + 1, dtype=np.int64) for i, p in enumerate(self.row_positions)]
        ) if self.row_positions else np.empty(0, dtype=np.int64)
        if xs.size == 0:
            return rows
        order = np.lexsort((-rows, xs))
        return rows[order]

    def restrict(self, x_lo: float = 0.0, x_hi: float | None = None) -> "PlanarPointSet":
        """Sub point set with positions in (x_lo, x_hi]."""
        hi = self.x_max if x_hi is None else x_hi
        rows = tuple(xs[(xs > x_lo) & (xs <= hi)] for xs in self.row_positions)
        return PlanarPointSet(rows, self.x_max)

    @staticmethod
    def from_points(points, x_max: float, t_max: int) -> "PlanarPointSet":
        rows: list[list[float]] = [[] for _ in range(t_max)]
        for x, r in points:
            if not 1 <= r <= t_max:
                raise ValueError("row out of range")
            rows[r - 1].append(float(x))
        return PlanarPointSet(tuple(np.sort(np.asarray(r, dtype=float)) for r in rows), x_max)


@dataclass(frozen=True, eq=False)
class BoundarySample:
    """Boundary data for a particle process run.

    ``sources`` are positions on the bottom edge (row 0), strictly increasing.
    ``sinks[i]`` is the sink multiplicity at (0, i+1); the strict process
    only ever uses multiplicities 0 or 1.
    """

    sources: np.ndarray
    sinks: np.ndarray

    def __post_init__(self) -> None:
        if self.sources.size > 1 and np.any(np.diff(self.sources) <= 0):
            raise ValueError("source positions must be strictly increasing")
        if self.sinks.size and (np.any(self.sinks < 0) or self.sinks.dtype.kind not in "iu"):
            raise ValueError("sink multiplicities must be nonnegative integers")

    @property
    def total_sinks(self) -> int:
        return int(self.sinks.sum())


def _uniform_positions(rng: RngStream, count: int, x: float) -> np.ndarray:
    """``count`` distinct sorted uniforms in (0, x]; exact duplicates are re-drawn."""
    pos = x * (1.0 - rng.random(count))
    pos = np.unique(pos)
    while pos.size < count:
        extra = x * (1.0 - rng.random(count - pos.size))
        pos = np.unique(np.concatenate([pos, extra]))
    return pos


def sample_uniform_permutation(n: int, rng: RngStream) -> MultisetWord:
    """Uniform permutation of {1..n} as a multiset word with k=1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    letters = np.arange(1, n + 1, dtype=np.int64)
    rng.shuffle(letters)
    return MultisetWord(n=n, k=1, letters=tuple(int(v) for v in letters))


def sample_uniform_multiset_permutation(n: int, k: int, rng: RngStream) -> MultisetWord:
    """Uniform word over {1..n} with each letter repeated exactly k times.

    Shuffling the fixed multiset (1^k, ..., n^k) is uniform over the
    multinomial(kn; k,...,k) distinct words because every word corresponds
    to the same number (k!)^n of shuffle outcomes.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    letters = np.repeat(np.arange(1, n + 1, dtype=np.int64), k)
    rng.shuffle(letters)
    return MultisetWord(n=n, k=k, letters=tuple(int(v) for v in letters))


def sample_poisson_cloud(x: float, t: int, lam: float, rng: RngStream) -> PlanarPointSet:
    """Independent rows: row i carries Poisson(lam*x) points, i.i.d. uniform in (0, x].

    Draw order is fixed (all counts first, then positions row by row) so a
    given stream always yields the same cloud.
    """
    if x <= 0 or lam <= 0:
        raise ValueError("x and lam must be positive")
    if t < 1:
        raise ValueError("t must be >= 1")
    counts = rng.poisson(lam * x, size=t)
    rows = tuple(_uniform_positions(rng, int(c), x) for c in counts)
    return PlanarPointSet(rows, float(x))


def sample_boundary(x: float, t: int, rates, rng: RngStream) -> BoundarySample:
    """Sources and sinks for a stationary boundary process.

    Sources form a PPP with the source rate on (0, x]; sinks are i.i.d. per
    row: Bernoulli(p) for the strict variant, Geometric_{>=0}(1 - beta*) for
    the weak one.  Sources are drawn before sinks.
    """
    if x <= 0 or t < 1:
        raise ValueError("x must be positive and t >= 1")
    n_src = int(rng.poisson(rates.source_rate * x))
    sources = _uniform_positions(rng, n_src, x)
    if rates.variant == "strict":
        sinks = (rng.random(t) < rates.sink_param).astype(np.int64)
    else:
        # numpy's geometric counts trials in {1,2,...}; shift to {0,1,...}
        sinks = rng.geometric(1.0 - rates.sink_param, size=t).astype(np.int64) - 1
    return BoundarySample(sources=sources, sinks=sinks)
