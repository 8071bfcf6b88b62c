import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercell import geom
from hypercell.errors import ContainmentViolated, UnsupportedBody

from oracles import cube_distance_oracle, polygon_perimeter_numeric


class TestSupport:
    def test_square_vertex_maximum(self, square):
        assert geom.support(square, [1, 0]) == pytest.approx(1.0, abs=1e-15)

    def test_ball_constant(self, ball, rng):
        for _ in range(20):
            u = rng.standard_normal(2)
            u /= np.linalg.norm(u)
            assert geom.support(ball, u) == pytest.approx(1.0, abs=1e-15)

    def test_ballsum_additivity(self):
        body = geom.BallSum([[-1, -1], [1, -1], [1, 1], [-1, 1]], 0.5)
        assert geom.support(body, [0, 1]) == pytest.approx(1.5, abs=1e-15)

    def test_rejects_non_unit_directions(self, square):
        with pytest.raises(ValueError):
            geom.support(square, [1, 1])

    def test_dominates_vertices_with_equality(self, square, rng):
        u = rng.standard_normal(2)
        u /= np.linalg.norm(u)
        h = geom.support(square, u)
        dots = square.vertices @ u
        assert np.all(dots <= h + 1e-12)
        assert dots.max() == pytest.approx(h)


class TestExtensionSupport:
    def test_outside_point_wins(self, ball):
        assert geom.extension_support(ball, [2, 0], [1, 0]) == pytest.approx(2.0)

    def test_body_dominates(self, ball):
        assert geom.extension_support(ball, [2, 0], [-1, 0]) == pytest.approx(1.0)

    def test_square_offset(self, square):
        assert geom.extension_support(square, [1.1, 0], [1, 0]) == pytest.approx(1.1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_support_sublinearity(seed):
    rng = np.random.default_rng(seed)
    bodies = [
        geom.Polytope([[-1, -1], [1, -1], [1, 1], [-1, 1]]),
        geom.Ball([0, 0], 1.0),
        geom.BallSum([[-1, 0], [1, 0]], 1.0),
    ]
    u, w = rng.standard_normal((2, 2))
    u /= np.linalg.norm(u)
    w /= np.linalg.norm(w)
    s = u + w
    ns = np.linalg.norm(s)
    if ns < 1e-9:
        return
    for body in bodies:
        lhs = body.support(s / ns) * ns
        assert lhs <= body.support(u) + body.support(w) + 1e-12


class TestDistance:
    def test_ball_pythagorean(self, ball):
        assert geom.distance(ball, [3, 4]) == pytest.approx(4.0, abs=1e-15)

    def test_square_corner(self, square):
        assert geom.distance(square, [2, 2]) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_interior_zero(self, square):
        assert geom.distance(square, [0, 0]) == 0.0

    def test_cube_against_closed_form(self, cube, rng):
        X = rng.uniform(-3, 3, size=(60, 3))
        got = cube.distance_batch(X)
        want = np.array([cube_distance_oracle(x) for x in X])
        assert np.abs(got - want).max() < 1e-9

    def test_project_consistency(self, square, stadium, cube, rng):
        for body in (square, stadium, cube):
            for _ in range(40):
                x = rng.uniform(-3, 3, size=body.dim)
                d, p = geom.project(body, x)
                assert d == pytest.approx(geom.distance(body, x), abs=1e-9)
                assert geom.distance(body, p) <= 1e-9
                if d > 0:
                    assert np.linalg.norm(x - p) == pytest.approx(d, abs=1e-9)


class TestParallelBoundarySample:
    def test_sphere_radius_exact(self, ball, rng):
        for _ in range(100):
            y = geom.parallel_boundary_sample(ball, 0.5, rng)
            assert np.linalg.norm(y) == pytest.approx(1.5, abs=1e-12)

    def test_distance_equals_offset(self, square, stadium, rng):
        for body in (square, stadium):
            Y = np.array([geom.parallel_boundary_sample(body, 0.1, rng) for _ in range(300)])
            assert np.abs(body.distance_batch(Y) - 0.1).max() < 1e-9

    def test_facet_pieces_are_reached(self, square, rng):
        # flat parts of the offset boundary must carry positive mass
        Y = np.array([geom.parallel_boundary_sample(square, 0.1, rng) for _ in range(400)])
        on_right_facet = (np.abs(Y[:, 0] - 1.1) < 1e-12) & (np.abs(Y[:, 1]) < 1.0 - 1e-9)
        assert on_right_facet.sum() > 10

    def test_rejects_nonpositive_offset(self, square, rng):
        with pytest.raises(ValueError):
            geom.parallel_boundary_sample(square, 0.0, rng)


class TestSurfaceMeasure:
    def test_square_edge_atoms(self, square):
        sm = geom.surface_measure(square)
        assert sm.sphere_density == 0.0
        assert sm.total_mass == pytest.approx(8.0, abs=1e-9)
        atoms = {tuple(np.round(u, 9)): w for u, w in sm.atoms}
        for key in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]:
            assert atoms[key] == pytest.approx(2.0, abs=1e-12)

    def test_ball_density(self, ball):
        sm = geom.surface_measure(ball)
        assert sm.atoms == []
        assert sm.sphere_density == pytest.approx(1.0)
        assert sm.total_mass == pytest.approx(2 * math.pi, abs=1e-9)

    def test_stadium_decomposition_matches_numeric_arc_length(self, stadium):
        sm = geom.surface_measure(stadium)
        atoms = {tuple(np.round(u, 9)): w for u, w in sm.atoms}
        assert atoms == {(0.0, 1.0): pytest.approx(2.0), (0.0, -1.0): pytest.approx(2.0)}
        assert sm.sphere_density == pytest.approx(1.0)
        # independent oracle: measure the boundary length numerically
        numeric = polygon_perimeter_numeric(geom.BoundaryPath2D(stadium, 1e-12))
        assert sm.total_mass == pytest.approx(numeric, abs=1e-6)
        assert sm.total_mass == pytest.approx(4 + 2 * math.pi, abs=1e-9)

    def test_cube_facets(self, cube):
        sm = geom.surface_measure(cube)
        assert len(sm.atoms) == 6
        assert sm.total_mass == pytest.approx(24.0, abs=1e-9)

    def test_ballsum_3d_unsupported(self):
        body = geom.BallSum([[0, 0, 0], [1, 0, 0]], 0.5)
        with pytest.raises(UnsupportedBody):
            geom.surface_measure(body)

    def test_atoms_even_for_symmetric_bodies(self, square, stadium):
        for body in (square, stadium):
            sm = geom.surface_measure(body)
            for u, w in sm.atoms:
                match = [w2 for u2, w2 in sm.atoms if np.linalg.norm(u2 + u) < 1e-9]
                assert match and match[0] == pytest.approx(w, abs=1e-12)


class TestHausdorffContaining:
    def test_double_square(self, square):
        verts = [[-2, -2], [2, -2], [2, 2], [-2, 2]]
        assert geom.hausdorff_containing(square, verts) == pytest.approx(math.sqrt(2))

    def test_ball_in_square(self, ball, square):
        cert = list(zip(square.edge_normals, square.edge_offsets))
        got = geom.hausdorff_containing(ball, square.vertices, certificate=cert)
        assert got == pytest.approx(math.sqrt(2) - 1, abs=1e-12)

    def test_boundary_vertices_zero(self, square):
        assert geom.hausdorff_containing(square, square.vertices) == 0.0

    def test_certificate_violation(self, ball):
        bad = [(np.array([1.0, 0.0]), 0.5)]  # halfplane cuts the ball
        with pytest.raises(ContainmentViolated):
            geom.hausdorff_containing(ball, [[0.5, 0]], certificate=bad)

    def test_dense_offset_boundary_recovers_eps(self, square):
        path = geom.boundary_path(square, 0.35)
        pts = path.point_at(np.linspace(0, path.total, 20000, endpoint=False))
        assert geom.hausdorff_containing(square, pts) == pytest.approx(0.35, abs=1e-7)


class TestBoundaryPath:
    def test_total_length_square(self, square):
        path = geom.boundary_path(square, 0.5)
        assert path.total == pytest.approx(8 + math.pi, abs=1e-12)

    def test_points_at_exact_offset(self, square, ball, stadium):
        for body in (square, ball, stadium):
            path = geom.boundary_path(body, 0.2)
            pts = path.point_at(np.linspace(0, path.total, 5000, endpoint=False))
            assert np.abs(body.distance_batch(pts) - 0.2).max() < 1e-9


class TestParallelBodies:
    def test_family_closed(self, square, ball, stadium):
        assert isinstance(geom.outer_parallel(square, 0.3), geom.BallSum)
        assert isinstance(geom.outer_parallel(ball, 0.3), geom.Ball)
        assert isinstance(geom.outer_parallel(stadium, 0.3), geom.BallSum)

    def test_support_shifts_by_rho(self, square, rng):
        W = geom.outer_parallel(square, 0.7)
        U = rng.standard_normal((50, 2))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        assert np.allclose(W.support_batch(U), square.support_batch(U) + 0.7, atol=1e-12)

    def test_gap_detection(self, square, ball, stadium):
        assert geom.parallel_gap(square, geom.outer_parallel(square, 0.7)) == pytest.approx(0.7)
        assert geom.parallel_gap(ball, geom.outer_parallel(ball, 0.3)) == pytest.approx(0.3)
        assert geom.parallel_gap(stadium, geom.outer_parallel(stadium, 0.1)) == pytest.approx(0.1)
        assert geom.parallel_gap(square, geom.outer_parallel(ball, 0.3)) is None


class TestSerialization:
    def test_round_trip(self, square, ball, stadium):
        for body in (square, ball, stadium):
            back = geom.body_from_json(geom.body_to_json(body))
            assert type(back) is type(body)
            U = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
            assert np.allclose(back.support_batch(U), body.support_batch(U))

    def test_normalization_recentres(self):
        body = geom.Polytope([[9, 9], [11, 9], [11, 11], [9, 11]])
        assert np.allclose(body.vertices.mean(axis=0), 0.0, atol=1e-12)
        ball = geom.Ball([5, -3], 2.0)
        assert np.allclose(ball.center, 0.0)

    def test_degenerate_polytope_rejected(self):
        with pytest.raises(ValueError):
            geom.Polytope([[0, 0], [1, 1], [2, 2]])
