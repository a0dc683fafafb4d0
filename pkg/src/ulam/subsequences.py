"""Exact longest-chain computation under the strict and weak partial orders.

Orders on the quarter-plane: (x, y) precedes (x', y') strictly when x < x'
and y < y', weakly when x < x' and y <= y'.  The boundary extension lets a
chain additionally run through source points along the bottom edge
(x < x', y = y' = 0) and through sink points stacked on the left edge
(x = x' = 0, y < y', or y <= y' in the weak variant so multiplicities count).

Fast paths reduce everything to a patience pass over row sequences; a
quadratic relation-based DP (`brute_force_longest_chain`) is kept as a fully
independent oracle.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from fractions import Fraction

import numpy as np

from .sampling import BoundarySample, MultisetWord, PlanarPointSet

ORDERS = ("strict", "weak")

_BRUTE_FORCE_CAP = 2000


def _check_order(order: str) -> None:
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order!r}")


def _row_sequence(obj) -> np.ndarray:
    """Row values in chain-sort order (x ascending, ties by row descending).

    For a word, positions are the distinct integers 1..kn, so the letters in
    word order are already the row sequence.
    """
    if isinstance(obj, MultisetWord):
        return np.asarray(obj.letters, dtype=np.int64)
    if isinstance(obj, PlanarPointSet):
        return obj.chain_rows()
    return np.asarray(obj, dtype=np.int64)


def _patience_length(rows, strict: bool) -> int:
    tails: list = []
    bis = bisect_left if strict else bisect_right
    for v in rows:
        i = bis(tails, v)
        if i == len(tails):
            tails.append(v)
        else:
            tails[i] = v
    return len(tails)


def _patience_witness(rows, strict: bool) -> list[int]:
    """Indices of one maximizing chain, via per-pile back pointers."""
    bis = bisect_left if strict else bisect_right
    tails: list = []
    tails_idx: list[int] = []
    prev = [-1] * len(rows)
    for j, v in enumerate(rows):
        i = bis(tails, v)
        prev[j] = tails_idx[i - 1] if i > 0 else -1
        if i == len(tails):
            tails.append(v)
            tails_idx.append(j)
        else:
            tails[i] = v
            tails_idx[i] = j
    chain: list[int] = []
    j = tails_idx[-1] if tails_idx else -1
    while j >= 0:
        chain.append(j)
        j = prev[j]
    chain.reverse()
    return chain


def lis_strict(obj) -> int:
    """Length of the longest strictly increasing chain."""
    return _patience_length(_row_sequence(obj).tolist(), strict=True)


def lnds_weak(obj) -> int:
    """Length of the longest non-decreasing chain."""
    return _patience_length(_row_sequence(obj).tolist(), strict=False)


def _boundary_nodes(points: PlanarPointSet, boundary: BoundarySample):
    """Map boundary elements onto auxiliary plane coordinates.

    The i-th source (ascending x) gets a negative row -S+i, so sources chain
    among themselves and below every interior row; the j-th sink unit
    (ascending row) gets a negative x -T+j, so sink units chain among
    themselves and to the left of every interior point.  Mixing sources with
    sinks stays impossible: a source has positive x and negative row while a
    sink has negative x and positive row.
    """
    xs: list[float] = []
    rows: list[int] = []
    kinds: list[int] = []  # 0 interior, 1 source, 2 sink
    n_src = boundary.sources.size
    for i, x in enumerate(boundary.sources):
        xs.append(float(x))
        rows.append(-(n_src - i))
        kinds.append(1)
    total = boundary.total_sinks
    j = 0
    for r, mult in enumerate(boundary.sinks, start=1):
        for _ in range(int(mult)):
            xs.append(float(-(total - j)))
            rows.append(r)
            kinds.append(2)
            j += 1
    for x, r in points.points():
        xs.append(x)
        rows.append(r)
        kinds.append(0)
    return np.asarray(xs), np.asarray(rows, dtype=np.int64), np.asarray(kinds, dtype=np.int64)


def _boundary_chain(points: PlanarPointSet, boundary: BoundarySample, order: str,
                    witness: bool):
    _check_order(order)
    if order == "strict" and boundary.sinks.size and int(boundary.sinks.max()) > 1:
        raise ValueError("strict variant admits sink multiplicities 0 or 1 only")
    xs, rows, kinds = _boundary_nodes(points, boundary)
    if xs.size == 0:
        return (0, [], 0, 0) if witness else 0
    # Weak sink units at an equal row must still chain, and the x tie-break
    # (row descending) would forbid it; mapped sink x values are distinct,
    # so plain lexsort is safe here.
    order_idx = np.lexsort((-rows, xs))
    seq = rows[order_idx].tolist()
    if not witness:
        return _patience_length(seq, strict=(order == "strict"))
    chain_pos = _patience_witness(seq, strict=(order == "strict"))
    chosen = order_idx[chain_pos]
    used_sources = int(np.sum(kinds[chosen] == 1))
    used_sinks = int(np.sum(kinds[chosen] == 2))
    chain = [(float(xs[i]), int(rows[i]), int(kinds[i])) for i in chosen]
    return len(chain), chain, used_sources, used_sinks


def longest_chain_with_boundary(points: PlanarPointSet, boundary: BoundarySample,
                                order: str) -> int:
    """Longest chain through interior points, sources, and sink units."""
    return _boundary_chain(points, boundary, order, witness=False)


def boundary_chain_witness(points: PlanarPointSet, boundary: BoundarySample,
                           order: str):
    """(length, chain, sources_used, sinks_used) for one maximizing chain.

    Chain entries are (mapped_x, mapped_row, kind) with kind 0 interior,
    1 source, 2 sink; boundary elements keep their real coordinate on the
    non-mapped axis.
    """
    return _boundary_chain(points, boundary, order, witness=True)


# ---------------------------------------------------------------------------
# Independent quadratic oracle

def _as_nodes(obj, boundary: BoundarySample | None):
    if isinstance(obj, MultisetWord):
        xs = np.arange(1, obj.size + 1, dtype=float)
        ys = np.asarray(obj.letters, dtype=np.int64)
        kinds = np.zeros(obj.size, dtype=np.int64)
    elif isinstance(obj, PlanarPointSet):
        pts = obj.points()
        xs = np.asarray([p[0] for p in pts])
        ys = np.asarray([p[1] for p in pts], dtype=np.int64)
        kinds = np.zeros(len(pts), dtype=np.int64)
    else:
        raise TypeError("expected MultisetWord or PlanarPointSet")
    if boundary is not None:
        sx = boundary.sources.astype(float)
        xs = np.concatenate([xs, sx])
        ys = np.concatenate([ys, np.zeros(sx.size, dtype=np.int64)])
        kinds = np.concatenate([kinds, np.ones(sx.size, dtype=np.int64)])
        sink_rows = np.repeat(np.arange(1, boundary.sinks.size + 1, dtype=np.int64),
                              boundary.sinks)
        xs = np.concatenate([xs, np.zeros(sink_rows.size)])
        ys = np.concatenate([ys, sink_rows])
        kinds = np.concatenate([kinds, np.full(sink_rows.size, 2, dtype=np.int64)])
    return xs, ys, kinds


def brute_force_longest_chain(obj, boundary: BoundarySample | None = None,
                              order: str = "strict") -> int:
    """Quadratic longest-path DP straight from the order relations.

    Kept deliberately separate from the patience machinery so the two code
    paths can certify each other.  Capped at 2000 elements.
    """
    _check_order(order)
    xs, ys, kinds = _as_nodes(obj, boundary)
    n = xs.size
    if n > _BRUTE_FORCE_CAP:
        raise ValueError(f"brute force capped at {_BRUTE_FORCE_CAP} elements, got {n}")
    if n == 0:
        return 0
    idx = np.lexsort((ys, xs))
    xs, ys, kinds = xs[idx], ys[idx], kinds[idx]
    is_source = kinds == 1
    is_sink = kinds == 2
    best = np.ones(n, dtype=np.int64)
    for i in range(1, n):
        if order == "strict":
            rel = (xs[:i] < xs[i]) & (ys[:i] < ys[i])
            rel |= is_source[:i] & is_source[i] & (xs[:i] < xs[i])
            rel |= is_sink[:i] & is_sink[i] & (ys[:i] < ys[i])
        else:
            rel = (xs[:i] < xs[i]) & (ys[:i] <= ys[i])
            rel |= is_sink[:i] & is_sink[i] & (ys[:i] <= ys[i])
        if rel.any():
            best[i] = 1 + best[:i][rel].max()
    return int(best.max())


# ---------------------------------------------------------------------------
# Exact expectations by enumeration

_ENUM_CAP = 9
_exact_cache: dict[tuple[int, ...], Fraction] = {}


def _multiset_words(counts: list[int]):
    """All distinct words over letters 1..len(counts) with the given
    multiplicities, in lexicographic order."""
    total = sum(counts)
    word = [0] * total
    def rec(pos: int):
        if pos == total:
            yield word
            return
        for letter in range(len(counts)):
            if counts[letter]:
                counts[letter] -= 1
                word[pos] = letter + 1
                yield from rec(pos + 1)
                counts[letter] += 1
    yield from rec(0)


def exact_expected_lis(row_counts) -> Fraction:
    """Exact E[longest strictly increasing chain] for row multiplicities.

    Enumerates every relative x-ordering: with row i carrying row_counts[i]
    points, the uniform relative order is the uniform word with those letter
    multiplicities, and each distinct word is equally likely.  Capped at a
    total of 9 points.
    """
    counts = [int(c) for c in row_counts]
    if any(c < 0 for c in counts):
        raise ValueError("row counts must be nonnegative")
    counts = [c for c in counts if c > 0]  # empty rows carry no points
    total = sum(counts)
    if total > _ENUM_CAP:
        raise ValueError(f"enumeration capped at {_ENUM_CAP} points, got {total}")
    key = tuple(counts)
    if key in _exact_cache:
        return _exact_cache[key]
    if total == 0:
        return Fraction(0)
    n_words = 0
    acc = 0
    for word in _multiset_words(counts):
        n_words += 1
        acc += _patience_length(word, strict=True)
    result = Fraction(acc, n_words)
    _exact_cache[key] = result
    return result
