import numpy as np
import pytest

from movant.channel import achievable_rate, trace_objective
from movant.errors import InfeasibleSpacing
from movant.positioning import (
    PenaltyConfig,
    optimize_positions,
    pgd_optimize,
    project_box_disk,
    separate_anchors,
    unconstrained_deploy,
)
from movant.scenario import Deployment, Scenario, Topology, two_antenna_line_scenario

from conftest import random_instance


def min_pair(points):
    n = len(points)
    return min(
        np.linalg.norm(points[i] - points[j]) for i in range(n) for j in range(i + 1, n)
    )


class TestProjection:
    def test_feasible_point_unchanged(self):
        p = np.array([3.0, 4.0])
        out = project_box_disk(p, np.array([3.5, 4.5]), 1.0, 10.0)
        assert np.array_equal(out, p)

    def test_zero_radius_returns_center(self):
        center = np.array([2.0, 7.0])
        out = project_box_disk(np.array([9.0, 9.0]), center, 0.0, 10.0)
        assert np.array_equal(out, center)

    def test_pure_disk_projection_formula(self):
        center = np.array([5.0, 5.0])
        p = np.array([7.0, 8.0])
        out = project_box_disk(p, center, 1.0, 10.0)
        expected = center + (p - center) / np.linalg.norm(p - center)
        assert np.allclose(out, expected, atol=1e-10)

    @pytest.mark.parametrize("topology", [Topology.SQUARE_2D, Topology.SEGMENT_1D])
    def test_corner_active_matches_grid_search(self, topology):
        # disk pokes out of the region corner so both constraints bind
        center = np.array([0.4, 0.3 if topology is Topology.SQUARE_2D else 0.0])
        radius = 0.9
        point = np.array([-1.0, -1.2])
        out = project_box_disk(point, center, radius, 10.0, topology)

        def refine(x_lo, x_hi, y_lo, y_hi, step):
            xs = np.arange(x_lo, x_hi + step / 2, step)
            ys = (
                np.arange(y_lo, y_hi + step / 2, step)
                if topology is Topology.SQUARE_2D
                else np.array([0.0])
            )
            X, Y = np.meshgrid(xs, ys, indexing="ij")
            ok = (X - center[0]) ** 2 + (Y - center[1]) ** 2 <= radius**2
            ok &= (X >= 0) & (Y >= 0)
            dist = (X - point[0]) ** 2 + (Y - point[1]) ** 2
            dist[~ok] = np.inf
            idx = np.unravel_index(np.argmin(dist), dist.shape)
            return np.array([X[idx], Y[idx]])

        coarse = refine(0.0, 1.5, 0.0, 1.5, 1e-2)
        best = refine(
            max(coarse[0] - 2e-2, 0.0),
            coarse[0] + 2e-2,
            max(coarse[1] - 2e-2, 0.0),
            coarse[1] + 2e-2,
            1e-4,
        )
        assert np.linalg.norm(out - best) <= 2e-4

    def test_idempotent(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            center = rng.uniform(0, 10, 2)
            radius = rng.uniform(0, 3)
            p = rng.uniform(-5, 15, 2)
            once = project_box_disk(p, center, radius, 10.0)
            twice = project_box_disk(once, center, radius, 10.0)
            assert np.linalg.norm(twice - once) <= 1e-9

    def test_feasibility_over_random_cases(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            center = rng.uniform(0, 10, 2)
            radius = rng.uniform(0, 5)
            p = rng.uniform(-10, 20, 2)
            out = project_box_disk(p, center, radius, 10.0)
            assert np.all(out >= -1e-10) and np.all(out <= 10.0 + 1e-10)
            assert np.linalg.norm(out - center) <= radius + 1e-10


class TestSeparateAnchors:
    def test_feasible_input_unchanged(self):
        pts = np.array([[1.0, 1.0], [3.0, 1.0], [5.0, 5.0]])
        out = separate_anchors(pts, 0.5, region_side=10.0)
        assert np.array_equal(out, pts)

    def test_coincident_pair_splits_along_x(self):
        pts = np.array([[3.0, 2.0], [3.0, 2.0]])
        out = separate_anchors(pts, 0.5, region_side=10.0)
        assert np.allclose(out, [[2.75, 2.0], [3.25, 2.0]], atol=1e-12)

    def test_spacing_satisfied_and_objective_monotone(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            cluster = rng.uniform(4.0, 4.7, (5, 2))
            history = []
            out = separate_anchors(cluster, 0.5, region_side=10.0, history=history)
            assert min_pair(out) >= 0.5 - 1e-9
            assert all(
                history[i] >= history[i + 1] - 1e-12 for i in range(len(history) - 1)
            )

    def test_near_optimal_against_random_perturbations(self):
        rng = np.random.default_rng(33)
        for _ in range(3):
            cluster = rng.uniform(4.0, 4.8, (5, 2))
            out = separate_anchors(cluster, 0.5, region_side=10.0)
            ours = ((out - cluster) ** 2).sum()
            best = np.inf
            for _ in range(10_000):
                cand = np.clip(cluster + rng.normal(0, 0.4, cluster.shape), 0, 10)
                if min_pair(cand) >= 0.5:
                    best = min(best, ((cand - cluster) ** 2).sum())
            assert ours <= best * 1.05

    def test_packing_bound_raises(self):
        rng = np.random.default_rng(1)
        with pytest.raises(InfeasibleSpacing):
            separate_anchors(rng.uniform(0, 1, (50, 2)), 2.0, region_side=10.0)

    def test_segment_mode_stays_on_axis(self):
        pts = np.array([[4.0, 0.0], [4.1, 0.0], [4.2, 0.0]])
        out = separate_anchors(
            pts, 0.5, region_side=10.0, topology=Topology.SEGMENT_1D
        )
        assert np.all(out[:, 1] == 0.0)
        assert min_pair(out) >= 0.5 - 1e-9


class TestPgdOptimize:
    def test_zero_duration_returns_initial(self, case_wide):
        out = pgd_optimize(case_wide, 0.0, case_wide.initial_positions.coords, 1.0)
        assert np.allclose(out.coords, case_wide.initial_positions.coords, atol=1e-12)

    def test_large_penalty_pins_to_anchors(self, case_wide):
        anchors = np.array([[3.6, 0.0], [6.4, 0.0]])
        out = pgd_optimize(case_wide, 1.0, anchors, 1e6)
        assert np.max(np.linalg.norm(out.coords - anchors, axis=1)) <= 1e-3

    def test_penalized_objective_never_increases(self, case_wide):
        anchors = case_wide.initial_positions.coords
        for rho in [0.0, 0.5, 10.0]:
            out = pgd_optimize(case_wide, 1.5, anchors, rho)
            start_val = trace_objective(case_wide, anchors)
            end_val = trace_objective(case_wide, out) + rho * float(
                ((out.coords - anchors) ** 2).sum()
            )
            assert end_val <= start_val + 1e-12

    def test_reaches_optimal_spacing_with_room(self, case_wide):
        out = pgd_optimize(case_wide, 4.0, case_wide.initial_positions.coords, 0.0)
        assert trace_objective(case_wide, out) == pytest.approx(1.0, abs=1e-9)


class TestOptimizePositions:
    def test_zero_duration_trivial(self, case_wide):
        out = optimize_positions(case_wide, 0.0)
        assert np.array_equal(out.coords if hasattr(out, "coords") else out.deployment.coords,
                              case_wide.initial_positions.coords)
        assert out.objective == trace_objective(case_wide, case_wide.initial_positions)
        assert out.converged

    def test_wide_gap_reaches_best_spacing_at_two_seconds(self, case_wide):
        out = optimize_positions(case_wide, 2.0)
        xs = np.sort(out.deployment.coords[:, 0])
        assert xs[1] - xs[0] == pytest.approx(4.0, abs=1e-6)
        assert achievable_rate(case_wide, out.deployment) == pytest.approx(1.0, abs=1e-9)

    def test_matches_brute_force_grid(self):
        rng = np.random.default_rng(77)
        cfg = PenaltyConfig(restarts=8)
        for _ in range(5):
            freq = rng.uniform(np.pi / 6, np.pi / 2)
            x1 = rng.uniform(1, 7)
            x2 = x1 + rng.uniform(0.6, 2.5)
            vmax = rng.uniform(0.2, 0.6)
            t = float(rng.choice([0.5, 1.0, 2.0]))
            s = two_antenna_line_scenario(x1, x2, spatial_freq=freq, max_speed=vmax)
            out = optimize_positions(s, t, config=cfg)
            r = vmax * t
            g1 = np.arange(max(0, x1 - r), min(10, x1 + r) + 1e-12, 0.01)
            g2 = np.arange(max(0, x2 - r), min(10, x2 + r) + 1e-12, 0.01)
            A, B = np.meshgrid(g1, g2, indexing="ij")
            tr = 1.0 / np.sin(freq * (A - B) / 2) ** 2
            tr[np.abs(A - B) < 0.5] = np.inf
            assert out.objective <= tr.min() * 1.01

    def test_feasibility_invariants(self):
        rng = np.random.default_rng(55)
        for _ in range(10):
            s = random_instance(rng, n_max=5, k_max=3)
            if s.initial_positions.min_pair_distance() < 0.4:
                continue
            s = s.with_(min_spacing=0.4)
            t = float(rng.uniform(0.2, 2.0))
            out = optimize_positions(s, t)
            coords = out.deployment.coords
            tol = PenaltyConfig().feasibility_tol
            shift = np.linalg.norm(coords - s.initial_positions.coords, axis=1).max()
            assert shift <= s.max_speed * t + tol
            assert out.deployment.min_pair_distance() >= s.min_spacing - tol
            assert np.all(coords >= -1e-9) and np.all(coords <= s.region_side + 1e-9)
            assert out.max_constraint_violation <= tol

    def test_never_worse_than_initial(self):
        rng = np.random.default_rng(91)
        for _ in range(10):
            s = random_instance(rng, n_max=4, k_max=3)
            t = float(rng.uniform(0.0, 2.0))
            out = optimize_positions(s, t)
            assert out.objective <= trace_objective(s, s.initial_positions) + 1e-9

    def test_monotone_gap_history_when_spacing_binds(self):
        s = two_antenna_line_scenario(
            4.4, 5.6, spatial_freq=np.pi, min_spacing=1.2, max_speed=0.5
        )
        out = optimize_positions(s, 1.0)
        gaps = out.gap_history
        assert len(gaps) >= 2
        assert all(gaps[i] >= gaps[i + 1] - 1e-12 for i in range(len(gaps) - 1))
        assert out.converged

    def test_radius_monotone_with_warm_start(self, case_wide):
        prev = None
        prev_obj = np.inf
        for t in [0.25, 0.5, 1.0, 1.5, 2.0]:
            out = optimize_positions(case_wide, t, start=prev)
            assert out.objective <= prev_obj + 1e-6
            prev, prev_obj = out.deployment, out.objective

    def test_segment_topology_keeps_axis(self, case_narrow):
        out = optimize_positions(case_narrow, 1.5)
        assert np.all(out.deployment.coords[:, 1] == 0.0)


class TestUnconstrainedDeploy:
    def test_two_antenna_line_reaches_best_spacing(self, case_wide):
        out = unconstrained_deploy(case_wide)
        xs = np.sort(out.deployment.coords[:, 0])
        assert xs[1] - xs[0] == pytest.approx(4.0, abs=1e-5)
        assert out.objective == pytest.approx(1.0, abs=1e-9)

    def test_single_user_objective_is_position_free(self):
        s = Scenario(
            num_antennas=3,
            num_users=1,
            elevation_angles=np.array([0.4]),
            azimuth_angles=np.array([0.2]),
            fading_coeffs=np.array([2.0]),
            noise_power=1.0,
            total_power=1.0,
            interval=5.0,
            region_side=10.0,
            min_spacing=0.5,
            max_speed=1.0,
            initial_positions=Deployment.from_x([1.0, 2.0, 3.0]),
        )
        out = unconstrained_deploy(s)
        assert out.objective == pytest.approx(1.0 / (3 * 2.0), rel=1e-9)
        assert out.deployment.min_pair_distance() >= 0.5 - PenaltyConfig().feasibility_tol

    def test_beats_random_sampling_oracle(self):
        rng = np.random.default_rng(123)
        s = random_instance(rng, n_max=3, k_max=2)
        while s.num_antennas != 3 or s.num_users != 2:
            s = random_instance(rng, n_max=3, k_max=2)
        out = unconstrained_deploy(s, config=PenaltyConfig(restarts=4))
        best = np.inf
        for _ in range(10_000):
            cand = rng.uniform(0, s.region_side, (3, 2))
            try:
                best = min(best, trace_objective(s, cand))
            except Exception:
                continue
        assert out.objective <= best
