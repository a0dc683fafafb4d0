"""Semi-discrete Hammersley particle dynamics for the two chain orders.

Particles on [0, x] are the jump locations of y -> (longest chain length in
[0, y] x {1..t}); one time step feeds one row of points.  The step rules are
the unique ones consistent with that description:

strict step (one row, optional sink):
  * with a sink and at least one particle, the leftmost particle exits and
    every row point below its old position becomes unavailable;
  * each remaining particle, left to right, moves to the smallest row point
    strictly inside the gap to its left neighbour (old positions bound the
    gaps), staying put if the gap is empty; all other points in the gap are
    swallowed;
  * at most one particle is born, at the smallest row point beyond the
    pre-step maximum.

weak step (one row, sink multiplicity s):
  * min(s, #particles) leftmost particles exit; no points are invalidated;
  * each remaining particle, left to right, moves to the smallest
    still-available row point strictly below its old position, consuming
    only that point;
  * every unconsumed row point spawns a new particle.  (Points below the old
    maximum can be born too: a pair of same-row points left of a particle
    already forms a weak chain of length two, so both locations must carry
    particles afterwards.)

With boundary data, sources are the initial particle configuration and the
particle count plus the total sink multiplicity equals the boundary chain
length; without boundary the count equals the plain chain length.  Those
identities are what `verify_line_identity` checks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import BoundaryRates, _check_variant
from .sampling import (BoundarySample, PlanarPointSet, RngStream,
                       sample_boundary, sample_poisson_cloud)
from .subsequences import (boundary_chain_witness, lis_strict, lnds_weak,
                           longest_chain_with_boundary)


@dataclass(frozen=True, eq=False)
class ParticleState:
    """Sorted particle positions in [0, x_max] plus the cumulative exit count."""

    positions: np.ndarray
    exits: int
    x_max: float

    def __post_init__(self) -> None:
        if self.exits < 0:
            raise ValueError("exits must be nonnegative")
        p = self.positions
        if p.size:
            if p[0] < 0 or p[-1] > self.x_max:
                raise ValueError("positions must lie in [0, x_max]")
            if p.size > 1 and np.any(np.diff(p) <= 0):
                raise ValueError("positions must be strictly increasing")

    @property
    def count(self) -> int:
        return int(self.positions.size)


def empty_state(x_max: float) -> ParticleState:
    return ParticleState(np.empty(0), 0, float(x_max))


def _check_row_points(pts: np.ndarray, x_max: float) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if pts.size:
        if pts[0] <= 0 or pts[-1] > x_max:
            raise ValueError("row points must lie in (0, x_max]")
        if pts.size > 1 and np.any(np.diff(pts) < 0):
            raise ValueError("row points must be sorted")
    return pts


def step_strict(state: ParticleState, row_points, sink_present: bool) -> ParticleState:
    pts = _check_row_points(row_points, state.x_max)
    y = state.positions
    exits = state.exits
    old_max = float(y[-1]) if y.size else 0.0
    if sink_present:
        if y.size:
            exits += 1
            pts = pts[pts >= y[0]]  # exit swallows everything below the old position
            y = y[1:]
        else:
            # A sink with no particle to absorb still swallows the whole row:
            # the sink column grows by one, and a strict chain cannot leave it
            # sideways within the same row, so no point of this row can raise
            # the chain length and none may be born.
            pts = pts[:0]
    if y.size and pts.size:
        gaps_lo = np.concatenate(([0.0], y[:-1]))
        idx = np.searchsorted(pts, gaps_lo, side="right")
        safe = np.minimum(idx, pts.size - 1)
        cand = np.where(idx < pts.size, pts[safe], np.inf)
        new_y = np.where(cand < y, cand, y)
    else:
        new_y = y.copy()
    if pts.size:
        j = int(np.searchsorted(pts, old_max, side="right"))
        if j < pts.size:
            new_y = np.append(new_y, pts[j])
    return ParticleState(new_y, exits, state.x_max)


def step_weak(state: ParticleState, row_points, sink_multiplicity: int) -> ParticleState:
    if sink_multiplicity < 0:
        raise ValueError("sink multiplicity must be nonnegative")
    pts = _check_row_points(row_points, state.x_max)
    y = state.positions
    n_exit = min(int(sink_multiplicity), y.size)
    exits = state.exits + n_exit
    remaining = y[n_exit:].tolist()
    pt_list = pts.tolist()
    i = 0
    r = len(pt_list)
    new_pos: list[float] = []
    for pos in remaining:
        if i < r and pt_list[i] < pos:
            new_pos.append(pt_list[i])
            i += 1
        else:
            new_pos.append(pos)
    new_pos.extend(pt_list[i:])  # every unconsumed point is born
    return ParticleState(np.asarray(new_pos), exits, state.x_max)


@dataclass(frozen=True, eq=False)
class DynamicsRecord:
    """Outcome of running the dynamics over a full cloud."""

    state: ParticleState
    counts: np.ndarray       # particle count after each step, length t_max
    exit_counts: np.ndarray  # cumulative exits after each step
    events: list | None = None       # (step, particle_index, position, event)
    line_visits: list | None = None  # per line: [(x, row), ...] points visited


def _diff_events(step: int, old: ParticleState, new: ParticleState,
                 events: list, line_ids: list[int], visits: list[list]) -> None:
    n_exit = new.exits - old.exits
    old_pos = old.positions
    for j in range(n_exit):
        events.append((step, j, float(old_pos[j]), "exit"))
    del line_ids[:n_exit]
    rem = old_pos[n_exit:]
    new_pos = new.positions
    for j in range(rem.size):
        if new_pos[j] != rem[j]:
            events.append((step, n_exit + j, float(new_pos[j]), "move"))
            visits[line_ids[j]].append((float(new_pos[j]), step))
        else:
            events.append((step, n_exit + j, float(new_pos[j]), "stay"))
    for j in range(rem.size, new_pos.size):
        events.append((step, j, float(new_pos[j]), "birth"))
        visits.append([(float(new_pos[j]), step)])
        line_ids.append(len(visits) - 1)


def run_dynamics(cloud: PlanarPointSet, boundary: BoundarySample | None,
                 variant: str, trace: bool = False) -> DynamicsRecord:
    """Apply the deterministic dynamics of one variant to a given cloud."""
    _check_variant(variant)
    if boundary is not None:
        if boundary.sinks.size != cloud.t_max:
            raise ValueError("need one sink multiplicity per row")
        if variant == "strict" and boundary.sinks.size and int(boundary.sinks.max()) > 1:
            raise ValueError("strict variant admits sink multiplicities 0 or 1 only")
        if boundary.sources.size and boundary.sources[-1] > cloud.x_max:
            raise ValueError("sources must lie within [0, x_max]")
        state = ParticleState(boundary.sources.astype(float), 0, cloud.x_max)
    else:
        state = empty_state(cloud.x_max)
    events: list | None = [] if trace else None
    visits: list[list] | None = None
    line_ids: list[int] | None = None
    if trace:
        visits = [[(float(x), 0)] for x in state.positions]
        line_ids = list(range(len(visits)))
    counts = np.empty(cloud.t_max, dtype=np.int64)
    exit_counts = np.empty(cloud.t_max, dtype=np.int64)
    for step in range(1, cloud.t_max + 1):
        pts = cloud.row(step)
        sink = int(boundary.sinks[step - 1]) if boundary is not None else 0
        if variant == "strict":
            new_state = step_strict(state, pts, sink_present=bool(sink))
        else:
            new_state = step_weak(state, pts, sink_multiplicity=sink)
        if trace:
            _diff_events(step, state, new_state, events, line_ids, visits)
        state = new_state
        counts[step - 1] = state.count
        exit_counts[step - 1] = state.exits
    return DynamicsRecord(state, counts, exit_counts, events, visits)


@dataclass(frozen=True, eq=False)
class ProcessRun:
    state: ParticleState
    counts: np.ndarray
    exit_counts: np.ndarray
    cloud: PlanarPointSet
    boundary: BoundarySample | None
    events: list | None = None


def run_process(x: float, t: int, lam: float, variant: str,
                rates: BoundaryRates | None, rng: RngStream,
                trace: bool = False) -> ProcessRun:
    """Sample a cloud (and boundary, if rates are given) and run the dynamics.

    Draw order is cloud first, then boundary, so runs are reproducible from
    the stream alone.
    """
    _check_variant(variant)
    cloud = sample_poisson_cloud(x, t, lam, rng)
    boundary = None
    if rates is not None:
        if rates.variant != variant:
            raise ValueError("rates variant does not match process variant")
        boundary = sample_boundary(x, t, rates, rng)
    rec = run_dynamics(cloud, boundary, variant, trace=trace)
    return ProcessRun(rec.state, rec.counts, rec.exit_counts, cloud, boundary,
                      rec.events)


def verify_line_identity(cloud: PlanarPointSet, boundary: BoundarySample | None,
                         variant: str) -> bool:
    """Check particle count == chain length (plus total sinks with boundary)."""
    rec = run_dynamics(cloud, boundary, variant)
    if boundary is None:
        expected = lis_strict(cloud) if variant == "strict" else lnds_weak(cloud)
        return rec.state.count == expected
    expected = longest_chain_with_boundary(cloud, boundary, order=variant)
    return rec.state.count + boundary.total_sinks == expected


@dataclass(frozen=True)
class Witness:
    """A certified maximizing chain.

    points are (x, row) pairs in chain order; for boundary witnesses the
    sources_used / sinks_used counters report how much of the chain runs
    along the edges.
    """

    points: tuple[tuple[float, float], ...]
    length: int
    sources_used: int
    sinks_used: int


def _witness_from_lines(cloud: PlanarPointSet, variant: str) -> Witness:
    rec = run_dynamics(cloud, None, variant, trace=True)
    visits = rec.line_visits or []
    if not visits:
        return Witness((), 0, 0, 0)
    strict = variant == "strict"
    chain: list[tuple[float, int]] = []
    # Walk lines right to left; each line contributes one visited cloud point.
    x_cur, row_cur = visits[-1][-1]
    chain.append((x_cur, row_cur))
    for line in reversed(visits[:-1]):
        ok = [(x, r) for (x, r) in line
              if x < x_cur and (r < row_cur if strict else r <= row_cur)]
        if not ok:
            raise AssertionError("line witness reconstruction failed")
        x_cur, row_cur = max(ok, key=lambda p: (p[1], p[0]))
        chain.append((x_cur, row_cur))
    chain.reverse()
    for (x0, r0), (x1, r1) in zip(chain, chain[1:]):
        valid = x0 < x1 and (r0 < r1 if strict else r0 <= r1)
        if not valid:
            raise AssertionError("reconstructed chain violates the order")
    if len(chain) != rec.state.count:
        raise AssertionError("witness length does not match the particle count")
    return Witness(tuple(chain), len(chain), 0, 0)


def extract_witness(cloud: PlanarPointSet, boundary: BoundarySample | None = None,
                    variant: str = "strict") -> Witness:
    """Produce one maximizing chain and certify it.

    Without boundary the chain is rebuilt from the recorded particle
    trajectories (one point per line); with boundary it comes from the chain
    DP and reports how many sources and sinks the path uses.
    """
    _check_variant(variant)
    if boundary is None:
        return _witness_from_lines(cloud, variant)
    length, chain, n_src, n_sink = boundary_chain_witness(cloud, boundary, variant)
    pts = tuple((x, float(r)) for (x, r, _kind) in chain)
    return Witness(pts, length, n_src, n_sink)
