"""Grids, transforms, projectors, multipliers, norms, invariants."""

import numpy as np
import pytest

from szego_rg import (
    ConservedReport,
    Domain,
    SpectralField,
    apply_D,
    apply_abs_D,
    apply_inv_D_minus,
    conserved_series,
    cubic_product,
    energy,
    field_from_modes,
    free_flow,
    from_physical,
    make_grid,
    mass,
    momentum,
    project_minus,
    project_plus,
    random_field,
    sobolev_norm,
    to_physical,
    zero_field,
)
from szego_rg.spectral import conjugate_field, l2_norm_sq, quartic_mean

TWO_PI = 2.0 * np.pi


class TestGrid:
    def test_torus_frequencies_are_modes(self):
        g = make_grid(8, Domain.TORUS)
        assert g.freq(3) == 3.0
        assert g.length == pytest.approx(TWO_PI)

    def test_bigbox_frequency_scaling(self):
        g = make_grid(8, Domain.BIGBOX, 16.0 * np.pi)
        assert g.freq(1) == pytest.approx(1.0 / 8.0)

    def test_small_grid_rejected(self):
        with pytest.raises(ValueError):
            make_grid(2, Domain.TORUS)

    def test_torus_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            make_grid(8, Domain.TORUS, 4.0 * np.pi)

    def test_grid_symmetry(self):
        g = make_grid(8, Domain.BIGBOX, 64.0 * np.pi)
        for k in range(1, 9):
            assert g.freq(-k) == -g.freq(k)

    def test_mode_out_of_range(self):
        g = make_grid(4, Domain.TORUS)
        with pytest.raises(ValueError):
            g.freq(5)


class TestTransforms:
    def test_dc_mode_is_constant(self, torus8):
        f = field_from_modes(torus8, {0: 1.0})
        u = to_physical(f)
        assert np.allclose(u, 1.0)

    def test_single_mode_samples(self, torus8):
        f = field_from_modes(torus8, {1: 1.0})
        u = to_physical(f)
        x = TWO_PI * np.arange(u.size) / u.size
        assert np.allclose(u, np.exp(1j * x), atol=1e-13)

    def test_round_trip_identity(self, torus8, rng):
        f = random_field(torus8, rng)
        g = from_physical(to_physical(f), torus8)
        assert np.max(np.abs(g.coeff - f.coeff)) < 1e-13

    def test_aliasing_of_out_of_band_mode(self, torus8):
        # e^{i (n_max+1) x} sampled on the padded grid: every retained
        # coefficient is zero because n_max+1 stays clear of [-n, n] mod N
        n_pts = 2 * torus8.size
        x = TWO_PI * np.arange(n_pts) / n_pts
        f = from_physical(np.exp(1j * (torus8.n_max + 1) * x), torus8)
        assert np.max(np.abs(f.coeff)) < 1e-14

    def test_oversample_below_two_rejected(self, torus8):
        f = field_from_modes(torus8, {0: 1.0})
        with pytest.raises(ValueError):
            to_physical(f, oversample=1)

    def test_plancherel_after_round_trip(self, torus8, rng):
        f = random_field(torus8, rng)
        g = from_physical(to_physical(f), torus8)
        lhs = sobolev_norm(g, 0.0) ** 2
        rhs = float(np.sum(np.abs(f.coeff) ** 2))
        assert abs(lhs - rhs) <= 1e-12 * rhs

    def test_cubic_product_single_mode(self, torus8):
        f = field_from_modes(torus8, {1: 0.5})
        c = cubic_product(f)
        # |u|^2 u for u = 0.5 e^{ix} is 0.125 e^{ix}
        assert c[1] == pytest.approx(0.125)
        assert np.sum(np.abs(c.coeff)) == pytest.approx(0.125)


class TestProjectors:
    def test_negative_mode_killed(self, torus8):
        f = field_from_modes(torus8, {-1: 1.0})
        assert np.all(project_plus(f).coeff == 0.0)

    def test_zero_mode_belongs_to_plus(self, torus8):
        f = field_from_modes(torus8, {0: 1.0})
        assert np.array_equal(project_plus(f).coeff, f.coeff)
        assert np.all(project_minus(f).coeff == 0.0)

    def test_minus_keeps_negative(self, torus8):
        f = field_from_modes(torus8, {-2: 3.0j})
        assert np.array_equal(project_minus(f).coeff, f.coeff)

    def test_partition_bitwise(self, torus8, rng):
        f = random_field(torus8, rng)
        p, m = project_plus(f), project_minus(f)
        assert np.array_equal(p.coeff + m.coeff, f.coeff)
        assert np.array_equal(project_plus(p).coeff, p.coeff)
        assert np.all(project_minus(p).coeff == 0.0)
        assert np.all(project_plus(m).coeff == 0.0)


class TestMultipliers:
    def test_abs_d_torus(self, torus8):
        f = field_from_modes(torus8, {-2: 1.0})
        assert apply_abs_D(f)[-2] == pytest.approx(2.0)

    def test_d_kills_zero_mode(self, torus8):
        f = field_from_modes(torus8, {0: 5.0})
        assert np.all(apply_D(f).coeff == 0.0)

    def test_abs_d_bigbox(self):
        g = make_grid(8, Domain.BIGBOX, 16.0 * np.pi)
        f = field_from_modes(g, {4: 1.0})
        assert apply_abs_D(f)[4] == pytest.approx(0.5)

    def test_inv_d_minus_torus(self, torus8):
        f = field_from_modes(torus8, {-2: 4.0})
        assert apply_inv_D_minus(f)[-2] == pytest.approx(-2.0)

    def test_inv_d_minus_zeroes_plus(self, torus8):
        f = field_from_modes(torus8, {3: 7.0})
        assert np.all(apply_inv_D_minus(f).coeff == 0.0)

    def test_inv_d_minus_bigbox_amplifies(self):
        g = make_grid(8, Domain.BIGBOX, 16.0 * np.pi)
        f = field_from_modes(g, {-1: 1.0})
        assert apply_inv_D_minus(f)[-1] == pytest.approx(-8.0)

    def test_inv_d_after_d_is_minus_projector(self, torus8, rng):
        f = random_field(torus8, rng)
        lhs = apply_inv_D_minus(apply_D(f))
        ref = project_minus(f)
        assert np.max(np.abs(lhs.coeff - ref.coeff)) <= 1e-15 * np.max(np.abs(f.coeff))

    def test_conjugate_field(self, torus8):
        f = field_from_modes(torus8, {2: 1.0 + 2.0j})
        g = conjugate_field(f)
        assert g[-2] == pytest.approx(1.0 - 2.0j)
        assert g[2] == 0.0


class TestFreeFlow:
    def test_identity_at_zero(self, rand_torus8):
        assert np.array_equal(free_flow(rand_torus8, 0.0).coeff, rand_torus8.coeff)

    def test_group_law(self, rand_torus8):
        a = free_flow(rand_torus8, 0.7 + 1.3)
        b = free_flow(free_flow(rand_torus8, 0.7), 1.3)
        assert np.max(np.abs(a.coeff - b.coeff)) < 1e-12

    def test_unitary_per_mode(self, rand_torus8):
        f = free_flow(rand_torus8, 17.3)
        assert np.allclose(np.abs(f.coeff), np.abs(rand_torus8.coeff), rtol=1e-12)

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0, 2.5])
    def test_sobolev_isometry(self, rand_torus8, s):
        before = sobolev_norm(rand_torus8, s)
        after = sobolev_norm(free_flow(rand_torus8, 123.456), s)
        assert abs(after - before) <= 1e-12 * before


class TestNorms:
    def test_dc_norm_is_one(self, torus8):
        f = field_from_modes(torus8, {0: 1.0})
        for s in (0.0, 0.5, 1.0, 3.0):
            assert sobolev_norm(f, s) == pytest.approx(1.0)

    def test_single_mode_h1(self, torus8):
        f = field_from_modes(torus8, {1: 1.0})
        assert sobolev_norm(f, 1.0) == pytest.approx(np.sqrt(2.0))

    def test_monotone_in_s(self, rand_torus8):
        norms = [sobolev_norm(rand_torus8, s) for s in (0.0, 0.5, 1.0, 2.0)]
        assert all(a <= b + 1e-14 for a, b in zip(norms, norms[1:]))

    def test_negative_s_rejected(self, rand_torus8):
        with pytest.raises(ValueError):
            sobolev_norm(rand_torus8, -0.5)


class TestConserved:
    def test_single_plus_mode(self, torus8):
        f = field_from_modes(torus8, {1: 1.0})
        assert mass(f) == pytest.approx(1.0)
        assert momentum(f) == pytest.approx(1.0)
        assert energy(f) == pytest.approx(0.75)  # 1/2 + 1/4 since |e^{ix}|^4 = 1

    def test_negative_mode_momentum(self, torus8):
        f = field_from_modes(torus8, {-1: 1.0})
        assert momentum(f) == pytest.approx(-1.0)

    def test_zero_field(self, torus8):
        f = zero_field(torus8)
        assert (energy(f), mass(f), momentum(f)) == (0.0, 0.0, 0.0)

    def test_positivity(self, torus8, rng):
        for _ in range(5):
            f = random_field(torus8, rng)
            assert mass(f) >= 0.0
            assert energy(f) >= 0.0

    def test_2e_minus_m_identity(self, torus8, rng):
        # 2E - M = 2 sum_{k<0} |k| |c|^2 + (1/2) (1/length) int |u|^4 >= 0
        for _ in range(5):
            f = random_field(torus8, rng)
            lhs = 2.0 * energy(f) - momentum(f)
            neg = f.grid.modes < 0
            rhs = 2.0 * float(
                np.sum(np.abs(f.grid.freqs[neg]) * np.abs(f.coeff[neg]) ** 2)
            ) + 0.5 * quartic_mean(f)
            assert lhs == pytest.approx(rhs, rel=1e-12)
            assert lhs >= 0.0

    def test_report_drift_and_floor(self, torus8):
        fields = [field_from_modes(torus8, {1: a}) for a in (1.0, 1.0, 1.0 + 1e-9)]
        rep = conserved_series([0.0, 1.0, 2.0], fields)
        assert rep.max_rel_drift("mass") == pytest.approx(2e-9, rel=1e-3)
        zeros = [zero_field(torus8)] * 3
        rep0 = conserved_series([0.0, 1.0, 2.0], zeros)
        assert rep0.max_rel_drift("energy") == 0.0  # floor prevents 0/0

    def test_report_length_mismatch(self, torus8):
        with pytest.raises(ValueError):
            ConservedReport(
                np.array([0.0, 1.0]),
                np.array([1.0]),
                np.array([1.0, 1.0]),
                np.array([1.0, 1.0]),
            )


class TestFieldValue:
    def test_immutable(self, rand_torus8):
        with pytest.raises(ValueError):
            rand_torus8.coeff[0] = 1.0

    def test_wrong_size_rejected(self, torus8):
        with pytest.raises(ValueError):
            SpectralField(torus8, np.zeros(5, dtype=complex))

    def test_arithmetic(self, torus8):
        a = field_from_modes(torus8, {1: 1.0})
        b = field_from_modes(torus8, {2: 2.0})
        c = 2.0 * a + b - a
        assert c[1] == pytest.approx(1.0)
        assert c[2] == pytest.approx(2.0)

    def test_mixed_grid_rejected(self, torus8):
        other = make_grid(6, Domain.TORUS)
        with pytest.raises(ValueError):
            field_from_modes(torus8, {1: 1.0}) + field_from_modes(other, {1: 1.0})

    def test_l2_norm_sq(self, torus8):
        f = field_from_modes(torus8, {1: 3.0, -2: 4.0})
        assert l2_norm_sq(f) == pytest.approx(25.0)
