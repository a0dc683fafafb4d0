import os

import numpy as np
import pytest

from ulam.bounds import BoundaryRates
from ulam.hammersley import (ParticleState, empty_state, extract_witness,
                             run_dynamics, run_process, step_strict, step_weak,
                             verify_line_identity)
from ulam.sampling import (BoundarySample, PlanarPointSet, make_rng,
                           sample_boundary, sample_poisson_cloud)
from ulam.subsequences import lis_strict, lnds_weak, longest_chain_with_boundary


def state(*positions, exits=0, x_max=1.0):
    return ParticleState(np.asarray(positions, dtype=float), exits, x_max)


class TestStepStrict:
    def test_moves_and_birth(self):
        s = step_strict(state(0.5, 0.8), [0.2, 0.6, 0.9], sink_present=False)
        assert s.positions.tolist() == [0.2, 0.6, 0.9]
        assert s.exits == 0

    def test_sink_absorbs_leftmost(self):
        s = step_strict(state(0.4, 0.7), [0.5], sink_present=True)
        assert s.positions.tolist() == [0.5]
        assert s.exits == 1

    def test_birth_from_empty(self):
        s = step_strict(empty_state(1.0), [0.3, 0.7], sink_present=False)
        assert s.positions.tolist() == [0.3]

    def test_sink_invalidates_below_exiting_particle(self):
        # the leaving particle sweeps everything below its old position
        s = step_strict(state(0.4, 0.7), [0.3, 0.5], sink_present=True)
        assert s.positions.tolist() == [0.5]
        assert s.exits == 1

    def test_sink_without_particles_swallows_the_row(self):
        s = step_strict(empty_state(1.0), [0.3, 0.7], sink_present=True)
        assert s.positions.size == 0
        assert s.exits == 0  # no particle actually left

    def test_gap_rule_uses_old_positions(self):
        # second particle's gap ends at its own old position, starts at the
        # first particle's old position, even after the first one moved
        s = step_strict(state(0.4, 0.8), [0.1, 0.2, 0.5], sink_present=False)
        assert s.positions.tolist() == [0.1, 0.5]

    def test_single_birth_only(self):
        s = step_strict(state(0.2), [0.5, 0.7, 0.9], sink_present=False)
        assert s.positions.tolist() == [0.2, 0.5]

    def test_rejects_out_of_range_points(self):
        with pytest.raises(ValueError):
            step_strict(state(0.5), [1.5], sink_present=False)


class TestStepWeak:
    def test_moves_keep_other_points_available(self):
        s = step_weak(state(0.5, 0.8), [0.2, 0.3, 0.9], sink_multiplicity=0)
        assert s.positions.tolist() == [0.2, 0.3, 0.9]

    def test_births_for_every_free_point_on_the_right(self):
        s = step_weak(state(0.5), [0.6, 0.7, 0.9], sink_multiplicity=0)
        assert s.positions.tolist() == [0.5, 0.6, 0.7, 0.9]

    def test_sink_multiplicity_absorbs(self):
        s = step_weak(state(0.4, 0.7), [], sink_multiplicity=2)
        assert s.positions.size == 0
        assert s.exits == 2

    def test_sink_multiplicity_capped_by_particles(self):
        s = step_weak(state(0.4), [], sink_multiplicity=3)
        assert s.exits == 1

    def test_unconsumed_point_below_old_max_is_born(self):
        # two same-row points below the particle already chain weakly, so
        # both locations carry particles afterwards
        s = step_weak(state(0.5), [0.3, 0.4], sink_multiplicity=0)
        assert s.positions.tolist() == [0.3, 0.4]

    def test_two_particles_share_row_points_in_order(self):
        s = step_weak(state(0.4, 0.5), [0.3], sink_multiplicity=0)
        assert s.positions.tolist() == [0.3, 0.5]


class TestRunDynamics:
    def test_empty_cloud(self):
        cloud = PlanarPointSet((np.empty(0),) * 5, 2.0)
        for variant in ("strict", "weak"):
            rec = run_dynamics(cloud, None, variant)
            assert rec.counts.tolist() == [0] * 5

    def test_counts_non_decreasing_without_boundary(self):
        rng = make_rng(21)
        for variant in ("strict", "weak"):
            run = run_process(8.0, 30, 1.0, variant, None, rng)
            assert np.all(np.diff(np.concatenate(([0], run.counts))) >= 0)
            if variant == "strict":
                assert np.all(np.diff(np.concatenate(([0], run.counts))) <= 1)
            assert run.exit_counts.tolist() == [0] * 30

    def test_prefix_counts_match_chain_lengths(self):
        rng = make_rng(22)
        cloud = sample_poisson_cloud(6.0, 12, 1.0, rng)
        for variant, fn in (("strict", lis_strict), ("weak", lnds_weak)):
            rec = run_dynamics(cloud, None, variant)
            for t in range(1, 13):
                prefix = PlanarPointSet(cloud.row_positions[:t], cloud.x_max)
                assert rec.counts[t - 1] == fn(prefix)

    def test_mismatched_sinks_rejected(self):
        cloud = PlanarPointSet((np.empty(0),) * 3, 1.0)
        b = BoundarySample(np.empty(0), np.zeros(2, dtype=np.int64))
        with pytest.raises(ValueError):
            run_dynamics(cloud, b, "strict")

    def test_strict_rejects_multiplicity(self):
        cloud = PlanarPointSet((np.empty(0),), 1.0)
        b = BoundarySample(np.empty(0), np.asarray([2], dtype=np.int64))
        with pytest.raises(ValueError):
            run_dynamics(cloud, b, "strict")


class TestLineIdentity:
    def test_empty_and_single_point(self):
        empty = PlanarPointSet((np.empty(0),), 1.0)
        single = PlanarPointSet.from_points([(0.5, 1)], 1.0, 1)
        for variant in ("strict", "weak"):
            assert verify_line_identity(empty, None, variant)
            assert verify_line_identity(single, None, variant)

    def test_random_clouds(self):
        rng = make_rng(23)
        for _ in range(600):
            x = 0.2 + 19.8 * rng.random()
            t = int(rng.integers(1, 21))
            lam = 0.05 + 1.95 * rng.random()
            cloud = sample_poisson_cloud(x, t, lam, rng)
            assert verify_line_identity(cloud, None, "strict")
            assert verify_line_identity(cloud, None, "weak")

    def test_random_boundary_instances(self):
        rng = make_rng(24)
        for _ in range(300):
            x = 0.2 + 15 * rng.random()
            t = int(rng.integers(1, 16))
            lam = 0.05 + 1.95 * rng.random()
            cloud = sample_poisson_cloud(x, t, lam, rng)
            alpha = 0.05 + 2 * rng.random()
            bs = sample_boundary(x, t, BoundaryRates.strict_from_alpha(lam, alpha), rng)
            assert verify_line_identity(cloud, bs, "strict")
            beta = lam * (1.05 + 2 * rng.random())
            bw = sample_boundary(x, t, BoundaryRates.weak_from_beta(lam, beta), rng)
            assert verify_line_identity(cloud, bw, "weak")

    def test_boundary_identity_decomposition(self):
        # the two sides are computed by fully independent code paths
        rng = make_rng(25)
        cloud = sample_poisson_cloud(10.0, 10, 1.0, rng)
        rates = BoundaryRates.strict_from_alpha(1.0, 1.0)
        b = sample_boundary(10.0, 10, rates, rng)
        rec = run_dynamics(cloud, b, "strict")
        assert (rec.state.count + b.total_sinks
                == longest_chain_with_boundary(cloud, b, "strict"))


class TestWitness:
    def test_witness_certified_on_random_clouds(self):
        rng = make_rng(26)
        for variant, fn in (("strict", lis_strict), ("weak", lnds_weak)):
            for _ in range(40):
                cloud = sample_poisson_cloud(2 + 10 * rng.random(),
                                             int(rng.integers(1, 12)),
                                             0.2 + 1.5 * rng.random(), rng)
                w = extract_witness(cloud, None, variant)
                assert w.length == fn(cloud)
                cloud_pts = set(cloud.points())
                assert all((x, int(r)) in cloud_pts for x, r in w.points)

    def test_witness_with_boundary_reports_edge_usage(self):
        rng = make_rng(27)
        cloud = sample_poisson_cloud(8.0, 8, 1.0, rng)
        rates = BoundaryRates.strict_from_alpha(1.0, 1.5)
        b = sample_boundary(8.0, 8, rates, rng)
        w = extract_witness(cloud, b, "strict")
        assert w.length == longest_chain_with_boundary(cloud, b, "strict")
        assert w.sources_used <= b.sources.size
        assert w.sinks_used <= b.total_sinks
        assert w.sources_used == 0 or w.sinks_used == 0

    def test_trace_events_cover_all_transitions(self):
        rng = make_rng(28)
        run = run_process(5.0, 10, 1.0, "strict", None, rng, trace=True)
        kinds = {e[3] for e in run.events}
        assert kinds <= {"move", "stay", "birth", "exit"}
        assert "birth" in kinds


@pytest.mark.perf
@pytest.mark.skipif(not os.environ.get("ULAM_RUN_PERF"),
                    reason="heavy performance gate; set ULAM_RUN_PERF=1")
def test_large_run_performance():
    import time
    rng = make_rng(999)
    start = time.monotonic()
    run = run_process(10_000.0, 10_000, 1.0, "strict", None, rng)
    elapsed = time.monotonic() - start
    assert run.counts[-1] > 0
    print(f"strict run x=1e4 t=1e4 lam=1: {elapsed:.1f}s")
