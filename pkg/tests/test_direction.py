import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import kstest

from hypercell import direction as dn
from hypercell import geom
from hypercell.errors import InfeasibleBudget, RejectionStall
from hypercell.rng import stream

from oracles import square_mean_support_oracle


def cap_budget(n):
    if n <= 1:
        return math.inf
    return abs(math.log1p(-(n**-2)))


@pytest.fixture
def starved():
    return dn.cap_starved([1, 0], lambda n: n**-0.25, 64, cap_budget, radius=1.0)


class TestSampling:
    def test_atomic_frequencies(self, facet_atoms):
        rng = stream(1, "atomic")
        U = facet_atoms.sample_batch(rng, 100_000)
        freq = float((U @ np.array([1.0, 0.0]) > 0.5).mean())
        sigma = math.sqrt(0.25 * 0.75 / 100_000)
        assert abs(freq - 0.25) < 3 * sigma

    def test_atomic_support_only(self, facet_atoms):
        rng = stream(2, "atomic")
        U = facet_atoms.sample_batch(rng, 1000)
        best = np.abs(U @ facet_atoms.atoms.T).max(axis=1)
        assert np.all(best > 1 - 1e-12)

    def test_isotropic_angle_uniform(self, iso):
        rng = stream(3, "iso")
        U = iso.sample_batch(rng, 100_000)
        angles = (np.arctan2(U[:, 1], U[:, 0]) % (2 * math.pi)) / (2 * math.pi)
        assert kstest(angles, "uniform").statistic < 1.63 / math.sqrt(100_000)

    def test_degenerate_mixture_passes_through(self, facet_atoms):
        mix = dn.Mixture([(1.0, dn.Atomic.symmetrized([[0, 1]], [1.0]))])
        rng = stream(4, "mix")
        U = mix.sample_batch(rng, 500)
        assert np.all(np.abs(np.abs(U[:, 1]) - 1.0) < 1e-12)

    def test_rejection_stall_raises(self):
        bad = dn.DensityOnSphere(lambda U: np.ones(len(np.atleast_2d(U))), 1e9, 2)
        with pytest.raises(RejectionStall):
            bad.sample_batch(stream(5, "stall"), 10)

    def test_evenness_all_variants(self, iso, facet_atoms, starved):
        w = np.array([0.6, 0.8])
        for i, dist in enumerate((iso, facet_atoms, starved)):
            U = dist.sample_batch(stream(6, "even", i), 50_000)
            frac = float((U @ w > 0).mean())
            assert abs(frac - 0.5) < 2.58 * 0.5 / math.sqrt(50_000)


class TestIntegrate:
    def test_isotropic_ball_support_exact(self, iso, ball):
        res = dn.integrate(iso, ball.support_batch)
        assert res.value == pytest.approx(1.0, abs=1e-12)
        assert res.stderr == 0.0

    def test_isotropic_square_support_cauchy(self, iso, square):
        oracle = square_mean_support_oracle()
        assert oracle == pytest.approx(4 / math.pi, abs=1e-12)
        res = dn.integrate(iso, square.support_batch)
        assert res.value == pytest.approx(oracle, abs=1e-6)

    def test_atomic_exact(self, facet_atoms, square):
        res = dn.integrate(facet_atoms, square.support_batch)
        assert res.value == pytest.approx(1.0, abs=1e-15)

    def test_constant_normalization(self, iso, facet_atoms, starved):
        for dist in (iso, facet_atoms, starved, dn.Mixture([(0.5, facet_atoms), (0.5, iso)])):
            res = dn.integrate(dist, lambda U: np.ones(len(U)))
            assert res.value == pytest.approx(1.0, abs=1e-9)

    def test_atomic_equals_bruteforce(self, square):
        at = dn.Atomic.symmetrized([[1, 0], [0, 1]], [0.7, 0.3])
        res = dn.integrate(at, square.support_batch)
        brute = sum(w * square.support(u) for u, w in zip(at.atoms, at.weights))
        assert res.value == pytest.approx(brute, abs=1e-15)

    def test_monte_carlo_reports_error(self, cube):
        iso3 = dn.Isotropic(3)
        res = dn.integrate(iso3, cube.support_batch, dn.IntegrationConfig(samples=100_000))
        assert res.stderr > 0
        assert abs(res.value - 1.5) < 4 * res.stderr


class TestSupportOf:
    def test_atomic(self, facet_atoms):
        sup = dn.support_of(facet_atoms)
        assert sup.kind == "atoms" and len(sup.atoms) == 4

    def test_isotropic(self, iso):
        assert dn.support_of(iso).kind == "full"

    def test_mixture_with_full_component(self, iso, facet_atoms):
        mix = dn.Mixture([(0.5, facet_atoms), (0.5, iso)])
        assert dn.support_of(mix).kind == "full"

    def test_mixture_of_atomics(self):
        a = dn.Atomic.symmetrized([[1, 0]], [1.0])
        b = dn.Atomic.symmetrized([[0, 1]], [1.0])
        sup = dn.support_of(dn.Mixture([(0.5, a), (0.5, b)]))
        assert sup.kind == "atoms" and len(sup.atoms) == 4


class TestSupportsApproximation:
    def test_truth_table(self, square, ball, stadium, iso, facet_atoms):
        expected = {
            ("square", "atomic"): True,
            ("square", "iso"): True,
            ("ball", "atomic"): False,
            ("ball", "iso"): True,
            ("stadium", "atomic"): False,
            ("stadium", "iso"): True,
        }
        bodies = {"square": square, "ball": ball, "stadium": stadium}
        dists = {"atomic": facet_atoms, "iso": iso}
        got = {
            (bn, dname): dn.supports_approximation(b, d)
            for bn, b in bodies.items()
            for dname, d in dists.items()
        }
        assert got == expected

    def test_rotated_square_fails_axis_atoms(self, facet_atoms):
        c, s = math.cos(0.3), math.sin(0.3)
        R = np.array([[c, -s], [s, c]])
        rotated = geom.Polytope((R @ np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]]).T).T)
        assert not dn.supports_approximation(rotated, facet_atoms)


class TestFromSurfaceMeasure:
    def test_square_gives_facet_atoms(self, square):
        dist = dn.from_surface_measure(square, 0.0)
        assert isinstance(dist, dn.Atomic)
        assert np.allclose(dist.weights, 0.25)

    def test_ball_gives_isotropic(self, ball):
        assert isinstance(dn.from_surface_measure(ball, 0.0), dn.Isotropic)

    def test_stadium_mass_split(self, stadium):
        dist = dn.from_surface_measure(stadium, 0.0)
        assert isinstance(dist, dn.Mixture)
        sm = geom.surface_measure(stadium)
        atom_mass = sum(w for _, w in sm.atoms)
        expected_atomic_weight = atom_mass / sm.total_mass
        kinds = {type(c).__name__: w for w, c in zip(dist.weights, dist.components)}
        assert kinds["Atomic"] == pytest.approx(expected_atomic_weight, abs=1e-12)
        assert kinds["Isotropic"] == pytest.approx(1 - expected_atomic_weight, abs=1e-12)

    def test_mix_blends_isotropic(self, square):
        dist = dn.from_surface_measure(square, 0.25)
        assert isinstance(dist, dn.Mixture)
        assert dn.support_of(dist).kind == "full"

    def test_support_matches_surface_measure_support(self, square, ball, stadium):
        for body in (square, ball, stadium):
            sup = dn.support_of(dn.from_surface_measure(body, 0.0))
            sm = geom.surface_measure(body)
            assert (sup.kind == "full") == sm.has_density


class TestCapStarved:
    def test_budget_satisfied_with_margin(self, starved):
        # oracle: cap masses recovered by 1-d quadrature of the stored density
        for n in range(1, 65):
            eps = n**-0.25
            thresh = 1 / (1 + eps)
            angle = math.acos(thresh)
            dens = lambda t: starved.density(np.array([[math.cos(t), math.sin(t)]]))[0]
            pieces = [a for a in np.concatenate([starved.cap_angles, -starved.cap_angles]) if -angle < a < angle]
            mass, _ = quad(dens, -angle, angle, points=sorted(pieces), limit=300)
            mass /= 2 * math.pi
            assert mass == pytest.approx(starved.cap_mass(thresh), abs=1e-9)
            assert 2 * n * eps * mass < 1.01 * n**-2

    def test_bookkeeping_exact_at_boundaries(self, starved):
        for n in (1, 2, 31, 64):
            eps = n**-0.25
            assert starved.cap_mass(1 / (1 + eps)) == pytest.approx(
                starved.cap_masses[n - 1], abs=1e-12
            )

    def test_sampled_mean_vanishes(self, starved):
        U = starved.sample_batch(stream(7, "cs"), 100_000)
        assert np.abs(U.mean(axis=0)).max() < 4 / math.sqrt(100_000)

    def test_empirical_cap_frequency(self, starved):
        rng = stream(8, "csfreq")
        U = starved.sample_batch(rng, 200_000)
        for n in (2, 5):
            thresh = 1 / (1 + n**-0.25)
            p = starved.cap_mass(thresh)
            emp = float((U @ starved.axis >= thresh).mean())
            assert abs(emp - p) < 4 * math.sqrt(p * (1 - p) / 200_000)

    def test_infeasible_budget(self):
        with pytest.raises(InfeasibleBudget):
            dn.cap_starved([1, 0], lambda n: n**-0.5, 8, lambda n: -1.0)

    def test_full_support_density_positive(self, starved):
        rng = stream(9, "pos")
        U = rng.standard_normal((500, 2))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        assert starved.density(U).min() > 0


class TestSerialization:
    def test_round_trips(self, iso, facet_atoms, starved):
        mix = dn.Mixture([(0.25, facet_atoms), (0.75, iso)])
        for dist in (iso, facet_atoms, starved, mix):
            back = dn.distribution_from_json(dn.distribution_to_json(dist))
            assert type(back) is type(dist)
            rng = stream(10, "ser")
            U = back.sample_batch(rng, 200)
            assert U.shape == (200, 2)

    def test_density_not_serializable(self):
        d = dn.DensityOnSphere(lambda U: np.ones(len(np.atleast_2d(U))), 2.0, 2)
        with pytest.raises(ValueError):
            dn.distribution_to_json(d)


class TestValidation:
    def test_atomic_needs_antipodal_pairs(self):
        with pytest.raises(ValueError):
            dn.Atomic([[1, 0], [0, 1]], [0.5, 0.5])

    def test_atomic_needs_unit_mass(self):
        with pytest.raises(ValueError):
            dn.Atomic([[1, 0], [-1, 0]], [0.5, 0.4])

    def test_nondegenerate(self, iso, facet_atoms):
        assert dn.nondegenerate(iso)
        assert dn.nondegenerate(facet_atoms)
        assert not dn.nondegenerate(dn.Atomic.symmetrized([[1, 0]], [1.0]))
