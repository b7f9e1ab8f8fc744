"""Polygon spectrum tests: closed forms, vortex values, bifurcations."""

import math
from fractions import Fraction

import numpy as np
import pytest

from centconf import core, polygon
from centconf.polygon import (
    block_diagonals,
    eigenvalue_pair,
    find_bifurcation,
    limiting_radius,
    pade_estimate,
    polygon_configuration,
    polygon_eigenvalues,
    polygon_morse_index,
    polygon_radius,
    polygon_spectrum,
    scan_sign_changes,
    unit_polygon_distance,
    vortex_closed_forms,
)

HEPTAGON_CHORD_2 = 1.5636629649360596174  # 2 sin(2 pi / 7)
HEPTAGON_Q22_A4 = 23.38535866733713366    # sqrt(4375/8)
HEPTAGON_S22_A4 = 6.3972163999539662207   # (214375/128)^(1/4)


class TestUnitDistances:
    def test_diameter(self):
        assert unit_polygon_distance(4, 2) == pytest.approx(2.0, abs=1e-15)

    def test_triangle(self):
        assert unit_polygon_distance(3, 1) == pytest.approx(math.sqrt(3), abs=1e-15)

    def test_heptagon(self):
        assert unit_polygon_distance(7, 2) == pytest.approx(HEPTAGON_CHORD_2, abs=1e-14)

    def test_range_check(self):
        with pytest.raises(ValueError):
            unit_polygon_distance(5, 0)
        with pytest.raises(ValueError):
            unit_polygon_distance(5, 5)


class TestRadius:
    @pytest.mark.parametrize("a", [2.0, 3.0, 5.0, 17.0])
    def test_two_bodies(self, a):
        assert polygon_radius(2, a) == pytest.approx(0.5, rel=1e-14)

    @pytest.mark.parametrize("a", [2.0, 3.0, 10.0, 50.0])
    def test_triangle_constant_in_a(self, a):
        assert polygon_radius(3, a) == pytest.approx(1 / math.sqrt(3), rel=1e-13)

    def test_pentagon_vortex(self):
        assert polygon_radius(5, 2.0) == pytest.approx(0.6324555320336758664, abs=1e-15)

    @pytest.mark.parametrize("n", [4, 5, 8, 13])
    def test_vortex_closed_form(self, n):
        assert polygon_radius(n, 2.0) == pytest.approx(math.sqrt((n - 1) / (2 * n)), rel=1e-14)

    @pytest.mark.parametrize("n", [4, 7, 12])
    def test_monotone_toward_limit(self, n):
        grid = [2.0, 3.0, 5.0, 10.0, 25.0, 60.0]
        values = [polygon_radius(n, a) for a in grid]
        assert all(x < y for x, y in zip(values, values[1:]))
        assert all(v < limiting_radius(n) for v in values)
        assert polygon_radius(n, 200.0) == pytest.approx(limiting_radius(n), rel=1e-2)


class TestBlockDiagonals:
    @pytest.mark.parametrize("a", [2.0, 2.5, 3.0, 5.0, 11.0])
    def test_square_p11_closed_form(self, a):
        p, _, _ = block_diagonals(4, a, 1)
        t = 2.0 ** (a / 2.0)
        assert p == pytest.approx(2 * (t * a + 2) / (1 + t), rel=1e-12)

    def test_heptagon_lemma_values(self):
        p, q, s = block_diagonals(7, 4.0, 2)
        assert p == pytest.approx(7.0 / 4.0, abs=1e-12)
        assert q == pytest.approx(HEPTAGON_Q22_A4, rel=1e-13)
        assert abs(s) == pytest.approx(HEPTAGON_S22_A4, rel=1e-13)

    @pytest.mark.parametrize("n", [3, 4, 7, 10])
    @pytest.mark.parametrize("a", [2.0, 3.0, 8.0])
    def test_zero_mode_column(self, n, a):
        p, q, s = block_diagonals(n, a, 0)
        assert q == pytest.approx(0.0, abs=1e-12)
        assert s == 0.0
        assert p == pytest.approx(n * a, rel=1e-12)  # row sum identity

    @pytest.mark.parametrize("n", [5, 6, 9, 12])
    def test_q_positive_above_zero_mode(self, n):
        for a in [2.0, 3.0, 9.0]:
            for i in range(1, n):
                assert block_diagonals(n, a, i)[1] > 0.0

    @pytest.mark.parametrize("n", [5, 6, 8, 11])
    def test_s_antisymmetric(self, n):
        a = 3.7
        for i in range(1, n):
            s_i = block_diagonals(n, a, i)[2]
            s_ni = block_diagonals(n, a, n - i)[2]
            assert s_i == pytest.approx(-s_ni, abs=1e-12)


class TestTrueDiagonals:
    """The full DFT sums against the closed forms of the square section."""

    @pytest.mark.parametrize("a", [2.0, 2.5, 3.0, 5.0, 11.0])
    def test_square_frequency_one(self, a):
        r = polygon_radius(4, a)
        p, q, s = polygon._dft_diagonals(4, a, 1)
        t = 2.0 ** (a / 2.0)
        assert p == pytest.approx(2 * (t * a + 2) / (1 + t), rel=1e-12)
        assert q == pytest.approx((2 * t * a + 4) * r * r / (1 + t), rel=1e-12)
        assert abs(s) == pytest.approx(2 * (a - 2) * r / (1 + 2 ** (-a / 2)), rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize("a", [2.0, 3.0, 6.0])
    def test_square_frequency_two(self, a):
        r = polygon_radius(4, a)
        p, q, s = polygon._dft_diagonals(4, a, 2)
        t = 2.0 ** (a / 2.0)
        assert p == pytest.approx(4 * a / (1 + t), rel=1e-12)
        assert q == pytest.approx(2 ** (a / 2 + 2) * r * r * a / (1 + t), rel=1e-12)
        assert s == pytest.approx(0.0, abs=1e-13)

    @pytest.mark.parametrize("n", [3, 5, 7, 9])
    def test_odd_n_agrees_with_half_range_forms(self, n):
        for a in [2.0, 3.3, 8.0]:
            for i in range(n):
                got = polygon._dft_diagonals(n, a, i)
                want = block_diagonals(n, a, i)
                for g, w in zip(got, want):
                    assert g == pytest.approx(w, rel=1e-11, abs=1e-11)

    @pytest.mark.parametrize("n", [4, 6, 10])
    def test_even_n_q_diameter_term(self, n):
        # the half-range closed form drops the diameter contribution
        # r^(2-A) 2^(-A) (1 - (-1)^i) that the full circulant sum carries
        a = 3.3
        r = polygon_radius(n, a)
        for i in range(n):
            _, q_true, _ = polygon._dft_diagonals(n, a, i)
            _, q_half, _ = block_diagonals(n, a, i)
            gap = r ** (2 - a) * 2.0 ** (-a) * (1 - (-1) ** i)
            assert q_true - q_half == pytest.approx(gap, rel=1e-10, abs=1e-12)


class TestEigenvaluePairs:
    @pytest.mark.parametrize("a", [2.0, 3.0, 7.0])
    def test_square_zero_mode(self, a):
        lp, lm = eigenvalue_pair(4, a, 0)
        assert lp == pytest.approx(4 * a, rel=1e-12)
        assert lm == pytest.approx(0.0, abs=1e-10)

    def test_heptagon_zero_at_a4(self):
        assert abs(eigenvalue_pair(7, 4.0, 2)[1]) < 1e-9

    def test_vortex_pentagon_set(self):
        # at A = 2 the Cartesian pair for frequency 2 is {P_2, Q_2 / r^2}
        r2 = polygon_radius(5, 2.0) ** 2
        lp, lm = eigenvalue_pair(5, 2.0, 2)
        assert sorted([lp, lm]) == pytest.approx(sorted([2.5, 3.0 / r2]), rel=1e-12)

    @pytest.mark.parametrize("n", [4, 5, 7, 9, 12])
    def test_mirror_symmetry(self, n):
        a = 4.2
        for i in range(1, n):
            li = eigenvalue_pair(n, a, i)
            lni = eigenvalue_pair(n, a, n - i)
            assert li[0] == pytest.approx(lni[0], rel=1e-12)
            assert li[1] == pytest.approx(lni[1], rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 5, 8, 13])
    @pytest.mark.parametrize("a", [2.0, 3.0, 9.0])
    def test_frequency_one_positive(self, n, a):
        lp, lm = eigenvalue_pair(n, a, 1)
        assert lp > 0.0
        assert lm > 0.0

    @pytest.mark.parametrize("n", range(2, 13))
    @pytest.mark.parametrize("a", [2.0, 2.5, 3.0, 4.0, 7.0, 20.0])
    def test_oracle_agreement_with_dense_hessian(self, n, a):
        model = core.PotentialModel.equal_masses(n, a)
        dense = core.symmetric_eigenvalues(
            core.hessian_f(model, polygon_configuration(n, a))
        )
        blocks = polygon_eigenvalues(n, a)
        scale = max(1.0, float(np.max(np.abs(dense))))
        assert np.max(np.abs(dense - blocks)) / scale < 1e-8


class TestVortexClosedForms:
    def test_degenerate_heptagon_direction(self):
        p, q = vortex_closed_forms(7, 3)
        assert p == 0
        assert q == 6

    def test_octagon(self):
        p, q = vortex_closed_forms(8, 2)
        assert p == Fraction(16, 7)
        assert q == 6

    @pytest.mark.parametrize("n", [2, 5, 9, 14])
    def test_zero_frequency(self, n):
        p, q = vortex_closed_forms(n, 0)
        assert p == 2 * n
        assert q == 0

    @pytest.mark.parametrize("n", range(2, 16))
    def test_agree_with_block_diagonals(self, n):
        for i in range(n):
            p, q, s = block_diagonals(n, 2.0, i)
            pv, qv = vortex_closed_forms(n, i)
            assert p == pytest.approx(float(pv), abs=1e-9)
            assert q == pytest.approx(float(qv), abs=1e-9)
            assert s == 0.0


class TestMorseIndex:
    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_vortex_minima(self, n):
        assert polygon_morse_index(n, 2.0) == (0, False)

    def test_vortex_heptagon_degenerate(self):
        index, degenerate = polygon_morse_index(7, 2.0)
        assert degenerate
        assert index == 0

    @pytest.mark.parametrize("n", [8, 10, 15, 20])
    def test_vortex_large_n(self, n):
        assert polygon_morse_index(n, 2.0) == (n - 5, False)

    @pytest.mark.parametrize("n", [8, 9, 12])
    def test_index_transition(self, n):
        assert polygon_morse_index(n, 2.0 + 1e-4)[0] == n - 5
        a_n = find_bifurcation(n, 2.0 + 1e-6, 40.0, 1e-10)
        assert polygon_morse_index(n, a_n + 0.5)[0] == n - 3


class TestBifurcation:
    def test_pentagon(self):
        a5 = find_bifurcation(5, 2.0, 10.0, 1e-10)
        assert 6.755 < a5 < 6.756

    def test_heptagon_exact_four(self):
        assert find_bifurcation(7, 2.0, 10.0, 1e-10) == pytest.approx(4.0, abs=1e-8)

    def test_pentagon_cross_check_pade(self):
        a10 = find_bifurcation(10, 2.0, 10.0, 1e-10)
        assert abs(a10 - pade_estimate(10)) / a10 < 0.01

    def test_auto_bracket(self):
        # a bracket with no sign change falls back to the scan grid
        a7 = find_bifurcation(7, 30.0, 40.0, 1e-10)
        assert a7 == pytest.approx(4.0, abs=1e-8)

    def test_no_sign_change_errors(self):
        with pytest.raises(core.ConvergenceError):
            find_bifurcation(3, 2.0, 40.0, 1e-10)

    def test_scan_reports_changes(self):
        assert len(scan_sign_changes(5)) == 1

    def test_invalid_bracket(self):
        with pytest.raises(ValueError):
            find_bifurcation(5, 10.0, 2.0, 1e-10)
        with pytest.raises(ValueError):
            find_bifurcation(5, 2.0, 10.0, -1.0)


class TestPade:
    def test_pentagon_value(self):
        assert pade_estimate(5) == pytest.approx(100.565 / 15.15, rel=1e-12)

    def test_heptagon_within_one_percent(self):
        assert abs(pade_estimate(7) - 4.0) / 4.0 < 0.011

    def test_decreasing_toward_two(self):
        values = [pade_estimate(n) for n in range(5, 201)]
        assert all(x > y for x, y in zip(values, values[1:]))
        assert values[-1] > 2.0
        assert values[-1] < 2.1

    def test_range_guard(self):
        with pytest.raises(ValueError):
            pade_estimate(4)
        with pytest.raises(ValueError):
            pade_estimate(201)


class TestSpectrumType:
    def test_invariants(self):
        spec = polygon_spectrum(6, 3.0)
        assert spec.n_bodies == 6
        assert spec.radius == pytest.approx(polygon_radius(6, 3.0))
        p0, q0, s0 = spec.diagonals[0]
        assert q0 == pytest.approx(0.0, abs=1e-12)
        assert s0 == 0.0
        for i in range(1, 6):
            assert spec.diagonals[i][1] > 0.0
            assert spec.diagonals[i][2] == pytest.approx(-spec.diagonals[6 - i][2], abs=1e-12)
            assert spec.pairs[i][0] == pytest.approx(spec.pairs[6 - i][0], rel=1e-12)
