import json
import math
import time

import numpy as np
import pytest

from hypercell import cell, metrics, process
from hypercell.errors import WindowOverflow
from hypercell.rng import KeyedStream


BOX2 = (np.vstack([np.eye(2), -np.eye(2)]), np.full(4, 50.0))


def random_instance(rng, max_n=40):
    n = int(rng.integers(4, max_n))
    th = rng.uniform(0, 2 * math.pi, n)
    U = np.column_stack([np.cos(th), np.sin(th)])
    T = rng.uniform(0.3, 2.0, n)
    return U, T


class TestHalfspaceIntersection:
    def test_unit_box(self):
        U = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])
        T = np.ones(4)
        inter = cell.halfspace_intersection(U, T, *BOX2)
        got = sorted(map(tuple, np.round(inter.vertices, 9)))
        assert got == [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]

    def test_triangle_defining_pairs(self):
        th = np.array([0.0, 2 * math.pi / 3, 4 * math.pi / 3])
        U = np.column_stack([np.cos(th), np.sin(th)])
        T = np.ones(3)
        inter = cell.halfspace_intersection(U, T, *BOX2)
        assert len(inter.vertices) == 3
        for row in inter.defining:
            assert len(set(row.tolist())) == 2
            assert all(i < 3 for i in row)  # no box plane active

    def test_vertices_feasible_and_defining_tight(self, rng):
        for _ in range(50):
            U, T = random_instance(rng)
            inter = cell.halfspace_intersection(U, T, *BOX2)
            A = np.vstack([U, BOX2[0]])
            b = np.concatenate([T, BOX2[1]])
            for v, d in zip(inter.vertices, inter.defining):
                assert np.all(A @ v <= b + 1e-9)
                assert np.abs(A[d] @ v - b[d]).max() < 1e-9

    def test_fast_path_matches_oracle_1000(self, rng):
        t0 = time.time()
        mismatches = 0
        for _ in range(1000):
            U, T = random_instance(rng)
            fast = cell.halfspace_intersection(U, T, *BOX2)
            slow = cell.halfspace_intersection_bruteforce(U, T, *BOX2)
            if not cell._vertex_sets_match(fast.vertices, slow.vertices, 1e-7):
                mismatches += 1
        assert mismatches == 0
        assert time.time() - t0 < 10.0

    def test_incremental_3d_matches_oracle(self, rng):
        box3 = (np.vstack([np.eye(3), -np.eye(3)]), np.full(6, 20.0))
        for _ in range(40):
            n = int(rng.integers(4, 14))
            U = rng.standard_normal((n, 3))
            U /= np.linalg.norm(U, axis=1, keepdims=True)
            T = rng.uniform(0.3, 2.0, n)
            fast = cell.halfspace_intersection(U, T, *box3)
            slow = cell.halfspace_intersection_bruteforce(U, T, *box3)
            assert cell._vertex_sets_match(fast.vertices, slow.vertices, 1e-7)

    def test_offsets_must_be_positive(self):
        with pytest.raises(ValueError):
            cell.halfspace_intersection(np.array([[1.0, 0]]), np.array([-0.5]), *BOX2)


@pytest.fixture
def params50(iso):
    return process.ProcessParams(50.0, iso, 2)


class TestKCell:
    def test_contains_body_exactly(self, params50, ball):
        for rep in range(30):
            z = cell.k_cell(params50, ball, stream_key=KeyedStream(31, rep))
            slack = z.offsets - ball.support_batch(z.normals)
            assert slack.min() > 0  # sampled hyperplanes all miss the body

    def test_vertices_satisfy_all_halfspaces(self, params50, square):
        for rep in range(20):
            z = cell.k_cell(params50, square, stream_key=KeyedStream(32, rep))
            assert (z.vertices @ z.normals.T - z.offsets).max() < 1e-9

    def test_defining_constraints_tight(self, params50, ball):
        z = cell.k_cell(params50, ball, stream_key=KeyedStream(33, 0))
        for v, d in zip(z.vertices, z.defining):
            assert np.abs(z.normals[d] @ v - z.offsets[d]).max() < 1e-9

    def test_vertices_strictly_inside_window(self, params50, ball):
        for rep in range(20):
            z = cell.k_cell(params50, ball, stream_key=KeyedStream(34, rep))
            assert ball.distance_batch(z.vertices).max() < z.window_radius - 1e-9

    def test_window_overflow_at_tiny_intensity(self, iso, ball):
        params = process.ProcessParams(1e-12, iso, 2)
        policy = cell.WindowPolicy(max_rounds=8)
        with pytest.raises(WindowOverflow):
            cell.k_cell(params, ball, policy, stream_key=KeyedStream(35, 0))

    def test_certificate_stability_under_window_doubling(self, params50, ball):
        changed = 0
        for rep in range(100):
            key = KeyedStream(36, rep)
            a = cell.k_cell(params50, ball, stream_key=key)
            b = cell.k_cell(params50, ball, stream_key=key, extra_rings=1)
            if not cell._vertex_sets_match(a.vertices, b.vertices, 1e-9):
                changed += 1
        assert changed == 0

    def test_monte_carlo_regression_fixture(self, params50, ball):
        # frozen behavior: at intensity 50, cells hug the unit ball
        good = 0
        runs = 300
        for rep in range(runs):
            z = cell.k_cell(params50, ball, stream_key=KeyedStream(37, rep))
            if metrics.hausdorff_cell(ball, z) < 1.0:
                good += 1
        assert good / runs >= 0.99

    def test_debug_oracle_mode(self, ball, iso):
        params = process.ProcessParams(10.0, iso, 2)
        z = cell.k_cell(params, ball, stream_key=KeyedStream(38, 0), debug_oracle=True)
        assert len(z.vertices) >= 3


class TestCellsAlongIntensity:
    def test_nesting_vertex_inclusion(self, iso, square):
        params = process.ProcessParams(1.0, iso, 2)
        cells = cell.cells_along_intensity(
            params, square, [4, 8, 16, 32], stream_key=KeyedStream(39, 0)
        )
        for za, zb in zip(cells, cells[1:]):
            assert np.all(zb.vertices @ za.normals.T <= za.offsets + 1e-9)

    def test_delta_nonincreasing(self, iso, ball):
        params = process.ProcessParams(1.0, iso, 2)
        for rep in range(30):
            cells = cell.cells_along_intensity(
                params, ball, [2, 4, 8, 16, 32, 64], stream_key=KeyedStream(40, rep)
            )
            ds = [metrics.hausdorff_cell(ball, z) for z in cells]
            assert all(a >= b - 1e-12 for a, b in zip(ds, ds[1:]))

    def test_sampled_counts_nondecreasing(self, iso, ball):
        params = process.ProcessParams(1.0, iso, 2)
        cells = cell.cells_along_intensity(
            params, ball, [2, 4, 8], stream_key=KeyedStream(41, 0)
        )
        counts = [z.stats.sampled for z in cells]
        assert counts == sorted(counts)

    def test_mark_thinning_matches_poisson_mean(self, iso, ball):
        # hyperplanes born by the first grid level form a Poisson sample at
        # that intensity; at gamma=64 the window almost never grows, so the
        # sampled count is the ring-0 thinned count
        params = process.ProcessParams(1.0, iso, 2)
        reps = 2000
        counts = []
        for rep in range(reps):
            cells = cell.cells_along_intensity(
                params, ball, [64, 256], stream_key=KeyedStream(42, rep)
            )
            counts.append(cells[0].stats.sampled)
        mean = float(np.mean(counts))
        expected = 2 * 64 * 1.0  # annulus mass at gamma=64, width = diameter/2 = 1
        assert abs(mean - expected) < 4 * math.sqrt(expected / reps) + 0.2

    def test_atomic_directions_respected_end_to_end(self, facet_atoms, square):
        params = process.ProcessParams(1.0, facet_atoms, 2)
        cells = cell.cells_along_intensity(
            params, square, [64, 256], stream_key=KeyedStream(43, 0)
        )
        for z in cells:
            best = np.abs(z.normals @ facet_atoms.atoms.T).max(axis=1)
            assert np.all(best > 1 - 1e-12)


class TestCellSerialization:
    def test_json_round_trip(self, params50, ball):
        z = cell.k_cell(params50, ball, stream_key=KeyedStream(44, 0))
        back = cell.CellPolytope.from_json(json.loads(z.dumps()))
        assert np.allclose(back.vertices, z.vertices)
        assert np.allclose(back.normals, z.normals)
        assert back.window_radius == z.window_radius
        assert back.stats.sampled == z.stats.sampled
