"""Core objective/derivative tests against frozen oracles and finite differences."""

import math

import numpy as np
import pytest

from centconf import core
from centconf.core import (
    CollisionError,
    Configuration,
    PotentialModel,
    analyze_spectrum,
    finite_difference_gradient,
    finite_difference_hessian,
    gradient_f,
    hessian_f,
    moment_of_inertia,
    mutual_distance,
    objective_f,
    potential_energy,
    rotation_vector,
    symmetric_eigenvalues,
)

TWO_BODY = Configuration([[0.5, 0.0], [-0.5, 0.0]])
UNIT_SQUARE = Configuration([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])

# 2 sin(2 pi / 5), frozen from 40-digit evaluation
PENTAGON_CHORD = 1.9021130325903071442
# value of f at the equal-mass square central configuration, A = 3
SQUARE_F_A3 = 9.2500662453403803757
SQUARE_RADIUS_A3 = 0.620821574117058625


def random_config(rng, n, lo=0.4, hi=1.6):
    while True:
        pos = rng.uniform(-hi, hi, (n, 2))
        d = pos[:, None, :] - pos[None, :, :]
        r = np.sqrt(np.sum(d * d, axis=-1))
        np.fill_diagonal(r, np.inf)
        if np.min(r) > lo:
            return Configuration(pos)


class TestModelAndConfiguration:
    def test_total_mass(self):
        model = PotentialModel(3.0, (1.0, 2.0, 3.5))
        assert model.total_mass == pytest.approx(6.5, abs=1e-15)
        assert model.n_bodies == 3

    def test_exponent_below_two_rejected(self):
        with pytest.raises(ValueError):
            PotentialModel(1.99, (1.0, 1.0))

    def test_nonpositive_mass_rejected(self):
        with pytest.raises(ValueError):
            PotentialModel(3.0, (1.0, 0.0))
        with pytest.raises(ValueError):
            PotentialModel(3.0, (1.0, -2.0))

    def test_single_body_rejected(self):
        with pytest.raises(ValueError):
            PotentialModel(3.0, (1.0,))

    def test_collision_rejected(self):
        with pytest.raises(CollisionError):
            Configuration([[0.0, 0.0], [0.0, 0.0]])
        with pytest.raises(CollisionError):
            Configuration([[0.0, 0.0], [5e-13, 0.0]])

    def test_positions_read_only(self):
        cfg = Configuration([[0.0, 0.0], [1.0, 0.0]])
        with pytest.raises(ValueError):
            cfg.positions[0, 0] = 2.0


class TestMutualDistance:
    def test_two_bodies(self):
        assert mutual_distance(TWO_BODY, 0, 1) == pytest.approx(1.0, abs=1e-15)

    def test_unit_square(self):
        assert mutual_distance(UNIT_SQUARE, 0, 1) == pytest.approx(1.0, abs=1e-15)
        assert mutual_distance(UNIT_SQUARE, 0, 2) == pytest.approx(math.sqrt(2), abs=1e-15)

    def test_pentagon_chord(self):
        th = 2 * np.pi * np.arange(5) / 5
        cfg = Configuration(np.column_stack([np.cos(th), np.sin(th)]))
        assert mutual_distance(cfg, 0, 2) == pytest.approx(PENTAGON_CHORD, abs=1e-12)

    def test_symmetry_and_errors(self):
        assert mutual_distance(UNIT_SQUARE, 2, 0) == mutual_distance(UNIT_SQUARE, 0, 2)
        with pytest.raises(ValueError):
            mutual_distance(UNIT_SQUARE, 1, 1)
        with pytest.raises(IndexError):
            mutual_distance(UNIT_SQUARE, 0, 4)


class TestMomentOfInertia:
    def test_two_bodies(self):
        model = PotentialModel.equal_masses(2, 3.0)
        assert moment_of_inertia(model, TWO_BODY) == pytest.approx(0.5, abs=1e-15)

    def test_ngon_is_n_r_squared(self):
        model = PotentialModel.equal_masses(6, 3.0)
        r = 0.83
        th = 2 * np.pi * np.arange(6) / 6
        cfg = Configuration(np.column_stack([r * np.cos(th), r * np.sin(th)]))
        assert moment_of_inertia(model, cfg) == pytest.approx(6 * r * r, rel=1e-14)

    def test_parallel_axis(self):
        rng = np.random.default_rng(7)
        model = PotentialModel.equal_masses(5, 3.0)
        for _ in range(10):
            cfg = random_config(rng, 5)
            centered = cfg.translated(-core.center_of_mass(model, cfg))
            shifted = centered.translated(rng.uniform(0.1, 1.0, 2))
            assert moment_of_inertia(model, shifted) > moment_of_inertia(model, centered)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            moment_of_inertia(PotentialModel.equal_masses(3, 3.0), TWO_BODY)


class TestPotentialEnergy:
    def test_unit_distance(self):
        assert potential_energy(PotentialModel.equal_masses(2, 3.0), TWO_BODY) == 1.0
        assert potential_energy(PotentialModel.equal_masses(2, 2.0), TWO_BODY) == 0.0

    def test_unit_square_newtonian(self):
        model = PotentialModel.equal_masses(4, 3.0)
        # 4 sides at distance 1 plus 2 diagonals at sqrt(2)
        assert potential_energy(model, UNIT_SQUARE) == pytest.approx(
            5.4142135623730950488, rel=1e-15
        )


class TestObjective:
    def test_two_body_values(self):
        assert objective_f(PotentialModel.equal_masses(2, 3.0), TWO_BODY) == pytest.approx(1.5)
        assert objective_f(PotentialModel.equal_masses(2, 2.0), TWO_BODY) == pytest.approx(0.5)

    def test_square_golden_value(self):
        from centconf.polygon import polygon_configuration

        model = PotentialModel.equal_masses(4, 3.0)
        cfg = polygon_configuration(4, 3.0)
        assert np.linalg.norm(cfg.positions[0]) == pytest.approx(SQUARE_RADIUS_A3, abs=1e-14)
        assert objective_f(model, cfg) == pytest.approx(SQUARE_F_A3, rel=1e-14)


class TestGradient:
    def test_two_body_critical(self):
        g = gradient_f(PotentialModel.equal_masses(2, 3.0), TWO_BODY)
        assert np.max(np.abs(g)) < 1e-15

    @pytest.mark.parametrize("n", [3, 4, 5, 8, 11])
    @pytest.mark.parametrize("a", [2.0, 2.5, 3.0, 7.0, 20.0])
    def test_polygon_critical(self, n, a):
        from centconf.polygon import polygon_configuration

        model = PotentialModel.equal_masses(n, a)
        g = gradient_f(model, polygon_configuration(n, a))
        assert np.max(np.abs(g)) < 1e-10 * n

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        model = PotentialModel(3.0, (1.0, 0.7, 1.3, 2.0, 0.5))
        for _ in range(5):
            cfg = random_config(rng, 5)
            g = gradient_f(model, cfg)
            fd = finite_difference_gradient(model, cfg, step=1e-5)
            assert np.max(np.abs(g - fd)) / max(1.0, np.max(np.abs(g))) < 1e-6

    def test_translation_identity(self):
        rng = np.random.default_rng(11)
        model = PotentialModel(2.5, (1.0, 2.0, 0.4, 1.1))
        for _ in range(5):
            cfg = random_config(rng, 4)
            g = gradient_f(model, cfg).reshape(-1, 2)
            weighted = model.mass_array() @ cfg.positions
            assert np.allclose(np.sum(g, axis=0), model.total_mass * weighted, rtol=1e-12, atol=1e-12)

    def test_rotation_covariance(self):
        rng = np.random.default_rng(13)
        model = PotentialModel.equal_masses(5, 3.0)
        for _ in range(5):
            cfg = random_config(rng, 5)
            angle = rng.uniform(0, 2 * np.pi)
            g = gradient_f(model, cfg).reshape(-1, 2)
            g_rot = gradient_f(model, cfg.rotated(angle)).reshape(-1, 2)
            c, s = np.cos(angle), np.sin(angle)
            rot = np.array([[c, -s], [s, c]])
            assert np.allclose(g_rot, g @ rot.T, rtol=1e-11, atol=1e-12)

    def test_log_branch_same_formula(self):
        # gradient is a single code path in A; at A=2 it must equal the
        # finite-difference gradient of the logarithmic-branch f exactly
        rng = np.random.default_rng(17)
        model = PotentialModel.equal_masses(4, 2.0)
        cfg = random_config(rng, 4)
        g = gradient_f(model, cfg)
        fd = finite_difference_gradient(model, cfg, step=1e-5)
        assert np.max(np.abs(g - fd)) < 1e-6
        near = PotentialModel.equal_masses(4, 2.0 + 1e-9)
        assert np.max(np.abs(g - gradient_f(near, cfg))) < 1e-7


class TestHessian:
    def test_rotation_vector_in_kernel_at_critical_point(self):
        model = PotentialModel.equal_masses(2, 3.0)
        h = hessian_f(model, TWO_BODY)
        v = rotation_vector(TWO_BODY)
        assert np.max(np.abs(h @ v)) < 1e-10

    def test_symmetry(self):
        rng = np.random.default_rng(5)
        model = PotentialModel(2.5, (1.0, 0.3, 2.2, 1.4))
        for _ in range(5):
            cfg = random_config(rng, 4)
            h = hessian_f(model, cfg)
            assert np.max(np.abs(h - h.T)) < 1e-12 * max(1, np.max(np.abs(h)))

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(19)
        model = PotentialModel(2.5, (1.0, 1.5, 0.8, 1.2))
        for _ in range(3):
            cfg = random_config(rng, 4)
            h = hessian_f(model, cfg)
            fd = finite_difference_hessian(model, cfg, step=2e-5)
            assert np.max(np.abs(h - fd)) / np.max(np.abs(h)) < 1e-5

    def test_square_eigenvalues_match_polygon_blocks(self):
        from centconf.polygon import eigenvalue_pair, polygon_configuration

        model = PotentialModel.equal_masses(4, 3.0)
        dense = symmetric_eigenvalues(hessian_f(model, polygon_configuration(4, 3.0)))
        blocks = np.sort(np.ravel([eigenvalue_pair(4, 3.0, i) for i in range(4)]))
        assert np.max(np.abs(dense - blocks)) < 1e-9


class TestFiniteDifferenceOracles:
    def test_exact_on_quadratic(self):
        # f has a pure M*I/2 part; with a huge separation the interaction
        # is negligible and the Hessian is essentially diagonal
        model = PotentialModel.equal_masses(2, 3.0)
        cfg = Configuration([[50.0, 0.0], [-50.0, 0.0]])
        fd = finite_difference_hessian(model, cfg, step=1e-4)
        assert np.allclose(np.diag(fd), 2.0, atol=1e-4)

    def test_fd_hessian_symmetric(self):
        rng = np.random.default_rng(23)
        model = PotentialModel.equal_masses(3, 3.0)
        cfg = random_config(rng, 3)
        fd = finite_difference_hessian(model, cfg, step=1e-4)
        assert np.max(np.abs(fd - fd.T)) < 1e-10 * max(1, np.max(np.abs(fd)))

    def test_bad_step_rejected(self):
        model = PotentialModel.equal_masses(2, 3.0)
        with pytest.raises(ValueError):
            finite_difference_gradient(model, TWO_BODY, step=0.0)
        with pytest.raises(CollisionError):
            finite_difference_gradient(model, TWO_BODY, step=0.3)


class TestSymmetricEigenvalues:
    def test_identity(self):
        assert np.allclose(symmetric_eigenvalues(np.eye(4)), np.ones(4))

    def test_diagonal(self):
        assert np.allclose(symmetric_eigenvalues(np.diag([-2.0, 0.0, 3.0])), [-2, 0, 3])

    def test_two_by_two_block_formula(self):
        # [[P, s], [s, Q]] has eigenvalues (P+Q)/2 +- sqrt((P-Q)^2 + 4 s^2)/2,
        # the same pair formula the polygon blocks use
        rng = np.random.default_rng(29)
        for _ in range(20):
            p, q, s = rng.uniform(-3, 3, 3)
            got = symmetric_eigenvalues(np.array([[p, s], [s, q]]))
            disc = math.sqrt((p - q) ** 2 + 4 * s * s)
            want = np.sort([0.5 * (p + q - disc), 0.5 * (p + q + disc)])
            assert np.allclose(got, want, atol=1e-12)

    def test_trace_and_frobenius_preserved(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            raw = rng.normal(size=(8, 8))
            mat = raw + raw.T
            eigs = symmetric_eigenvalues(mat)
            assert np.trace(mat) == pytest.approx(np.sum(eigs), rel=1e-12, abs=1e-12)
            assert np.linalg.norm(mat) == pytest.approx(
                math.sqrt(np.sum(eigs**2)), rel=1e-12
            )

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            symmetric_eigenvalues(np.array([[1.0, 2.0], [1.0, 1.0]]))


class TestInvariants:
    def test_rotation_invariance_of_f(self):
        rng = np.random.default_rng(37)
        model = PotentialModel.equal_masses(5, 3.0)
        for _ in range(10):
            cfg = random_config(rng, 5)
            val = objective_f(model, cfg)
            rot = objective_f(model, cfg.rotated(rng.uniform(0, 2 * np.pi)))
            assert rot == pytest.approx(val, rel=1e-12)

    def test_criticality_implies_centered(self):
        from centconf.search import random_start, refine

        model = PotentialModel.equal_masses(4, 3.0)
        found = 0
        for seed in range(40):
            try:
                cfg = refine(model, random_start(seed, 4, 0.2, 1.5))
            except core.ConvergenceError:
                continue
            found += 1
            weighted = model.mass_array() @ cfg.positions
            assert np.linalg.norm(weighted) < 1e-9
        assert found >= 20

    def test_spectrum_analysis(self):
        res = analyze_spectrum(np.array([-1.0, -1e-12, 1e-9, 2.0]))
        assert res.negative_count == 1
        assert res.zero_count == 2
        assert res.eigenvalues[0] == -1.0
