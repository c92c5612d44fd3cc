"""Configuration energies, certificates, the descent optimizer."""

import math

import numpy as np
import pytest

from greenlab import energy as en
from greenlab.errors import DomainError, SingularityError, UnsupportedManifoldError
from greenlab.green import get_profile
from greenlab.manifold import (
    Family,
    ManifoldSpec,
    Point,
    sample_uniform,
)

S2 = ManifoldSpec(Family.SPHERE, 2)
S3 = ManifoldSpec(Family.SPHERE, 3)
RP2 = ManifoldSpec(Family.REAL_PROJ, 2)
CP1 = ManifoldSpec(Family.COMPLEX_PROJ, 1)
CP2 = ManifoldSpec(Family.COMPLEX_PROJ, 2)
HP1 = ManifoldSpec(Family.QUAT_PROJ, 1)
OP2 = ManifoldSpec(Family.CAYLEY_PLANE, 2)


def random_config(spec, n, seed):
    rng = np.random.default_rng(seed)
    return en.Configuration(spec, [sample_uniform(spec, rng) for _ in range(n)])


def hopf_image(p: Point) -> Point:
    """Complex projective line to unit two-sphere."""
    z0, z1 = p.coords
    x = 2.0 * (z0.conjugate() * z1).real
    y = 2.0 * (z0.conjugate() * z1).imag
    z = abs(z0) ** 2 - abs(z1) ** 2
    return Point(S2, np.array([x, y, z]) / np.linalg.norm([x, y, z]))


class TestEnergy:
    def test_single_point(self):
        cfg = en.Configuration(S2, [sample_uniform(S2, np.random.default_rng(0))])
        assert en.energy(cfg) == 0.0

    def test_antipodal_pair(self):
        p = Point(S2, np.array([0.0, 0.0, 1.0]))
        q = Point(S2, np.array([0.0, 0.0, -1.0]))
        cfg = en.Configuration(S2, [p, q])
        assert en.energy(cfg) == pytest.approx(-1 / (2 * math.pi), rel=1e-10)

    def test_relabeling_invariance(self):
        cfg = random_config(S2, 30, 5)
        shuffled = en.Configuration(S2, list(reversed(cfg.points)))
        assert en.energy(shuffled) == pytest.approx(en.energy(cfg), abs=1e-10)

    def test_orthogonal_invariance(self):
        rng = np.random.default_rng(8)
        cfg = random_config(S3, 15, 8)
        q_mat, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        rotated = en.Configuration(
            S3, [Point(S3, q_mat @ p.coords) for p in cfg.points]
        )
        assert en.energy(rotated) == pytest.approx(en.energy(cfg), abs=1e-10)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(9)
        cfg = random_config(CP2, 12, 9)
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        q_mat, _ = np.linalg.qr(a)
        rotated = en.Configuration(
            CP2, [Point(CP2, q_mat @ p.coords) for p in cfg.points]
        )
        assert en.energy(rotated) == pytest.approx(en.energy(cfg), abs=1e-10)

    def test_quaternionic_isometry_invariance(self):
        # coordinate permutation composed with a left unit-quaternion twist
        # preserves the Hermitian inner product
        from greenlab.manifold import _quat_scale

        rng = np.random.default_rng(10)
        cfg = random_config(HP1, 10, 10)
        u = rng.standard_normal(4)
        u /= np.linalg.norm(u)

        def act(p):
            flipped = p.coords[::-1].copy()
            twisted = np.stack(
                [
                    np.array(
                        [
                            u[0] * q[0] - u[1] * q[1] - u[2] * q[2] - u[3] * q[3],
                            u[0] * q[1] + u[1] * q[0] + u[2] * q[3] - u[3] * q[2],
                            u[0] * q[2] + u[2] * q[0] + u[3] * q[1] - u[1] * q[3],
                            u[0] * q[3] + u[3] * q[0] + u[1] * q[2] - u[2] * q[1],
                        ]
                    )
                    for q in flipped
                ]
            )
            return Point(HP1, twisted / np.linalg.norm(twisted))

        moved = en.Configuration(HP1, [act(p) for p in cfg.points])
        assert en.energy(moved) == pytest.approx(en.energy(cfg), abs=1e-10)

    def test_mean_zero_over_uniform_configurations(self):
        vals = [en.energy(random_config(S2, 50, 1000 + k)) for k in range(200)]
        mean = float(np.mean(vals))
        stderr = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
        assert abs(mean) < 3 * stderr

    def test_duplicate_guard_names_indices(self):
        p = Point(S2, np.array([0.0, 0.0, 1.0]))
        q = sample_uniform(S2, np.random.default_rng(1))
        cfg = en.Configuration(S2, [p, q, p])
        with pytest.raises(SingularityError, match="0 and 2"):
            en.energy(cfg)

    def test_profile_spec_mismatch(self):
        cfg = random_config(S2, 3, 2)
        with pytest.raises(DomainError):
            en.energy(cfg, get_profile(S3))

    def test_thread_count_does_not_change_bits(self):
        cfg = random_config(S3, 600, 33)
        single = en.energy(cfg, threads=1)
        multi = en.energy(cfg, threads=4)
        assert single == multi


class TestEnergyReport:
    def test_certificate_holds_for_random_configs(self):
        for k in range(5):
            cfg = random_config(CP2, 10, 300 + k)
            rep = en.EnergyReport.from_configuration(cfg, seed=300 + k)
            assert rep.slack >= 0.0
            assert rep.energy >= rep.bound.best_bound

    def test_serialization(self):
        cfg = random_config(S2, 8, 77)
        rep = en.EnergyReport.from_configuration(cfg, seed=77)
        payload = rep.to_dict()
        assert payload["N"] == 8 and payload["family"] == "s"
        assert payload["slack"] >= 0.0


class TestIsometryRelations:
    def test_complex_line_energy_transfers_to_sphere(self):
        # map a CP^1 configuration through the Riemann-sphere identification;
        # dimension-2 Green kernels are scale invariant, so energies agree
        cfg = random_config(CP1, 10, 4)
        mapped = en.Configuration(S2, [hopf_image(p) for p in cfg.points])
        assert en.energy(mapped) == pytest.approx(en.energy(cfg), abs=1e-8)

    def test_real_projective_plane_affine_relation(self):
        # E_RP2 = alpha * E_S2(antipodal lift) + beta * N; recover the
        # constants from two configurations, then hold them fixed
        def pair(seed, n=12):
            cfg = random_config(RP2, n, seed)
            lifted = []
            for p in cfg.points:
                lifted.append(Point(S2, p.coords.copy()))
                lifted.append(Point(S2, -p.coords.copy()))
            return en.energy(cfg), en.energy(en.Configuration(S2, lifted))

        # solve e_rp = alpha * e_s2 + c from two independent samples
        (r1, s1), (r2, s2) = pair(11), pair(12)
        alpha = (r1 - r2) / (s1 - s2)
        const = r1 - alpha * s1
        assert alpha == pytest.approx(0.5, rel=1e-6)
        assert const == pytest.approx(12 / (4 * math.pi), rel=1e-6)
        for seed in range(20):
            r, s = pair(500 + seed)
            assert r == pytest.approx(alpha * s + const, abs=1e-8)


class TestOptimizer:
    def test_energy_never_increases_from_start(self):
        seed = 21
        spec = S2
        rng = np.random.default_rng(seed)
        start = en.Configuration(spec, [sample_uniform(spec, rng) for _ in range(20)])
        optimized = en.optimize(spec, 20, 30, np.random.default_rng(seed))
        assert en.energy(optimized) < en.energy(start)

    def test_deterministic_for_fixed_seed(self):
        a = en.optimize(S2, 10, 15, np.random.default_rng(3))
        b = en.optimize(S2, 10, 15, np.random.default_rng(3))
        assert np.array_equal(a.coords_array(), b.coords_array())

    def test_tetrahedron(self):
        prof = get_profile(S2)
        cfg = en.optimize(S2, 4, 300, np.random.default_rng(7))
        target = 12 * prof.phi(math.acos(-1.0 / 3.0))
        assert en.energy(cfg) == pytest.approx(target, abs=1e-6)

    def test_optimized_beats_random_and_respects_bound(self):
        from greenlab.bounds import best_finite_bound

        spec = S2
        n = 60
        optimized = en.optimize(spec, n, 40, np.random.default_rng(50))
        e_opt = en.energy(optimized)
        e_rand = np.mean([en.energy(random_config(spec, n, 600 + k)) for k in range(5)])
        bound = best_finite_bound(spec, n).best_bound
        assert e_opt < e_rand
        assert e_opt >= bound

    def test_projective_families_run(self):
        for spec in (CP2, HP1):
            cfg = en.optimize(spec, 6, 10, np.random.default_rng(2))
            assert len(cfg) == 6

    def test_cayley_plane_rejected(self):
        with pytest.raises(UnsupportedManifoldError):
            en.optimize(OP2, 5, 5, np.random.default_rng(0))


class TestMonteCarloMoments:
    def test_mean_zero_two_sphere(self):
        mean, stderr = en.mc_energy_moment(S2, 20, 200, np.random.default_rng(12))
        assert abs(mean) < 3 * stderr

    def test_mean_zero_cayley_plane(self):
        # one million radial pair draws in total (N(N-1) = 2 per sample)
        mean, stderr = en.mc_energy_moment(OP2, 2, 500_000, np.random.default_rng(13))
        assert abs(mean) < 3 * stderr

    def test_stderr_scaling(self):
        _, se1 = en.mc_energy_moment(S2, 10, 200, np.random.default_rng(14))
        _, se2 = en.mc_energy_moment(S2, 10, 800, np.random.default_rng(15))
        assert 0.3 < se2 / se1 < 0.75

    def test_validation(self):
        with pytest.raises(DomainError):
            en.mc_energy_moment(S2, 1, 100, np.random.default_rng(0))
