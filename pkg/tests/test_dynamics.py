"""Flow right-hand sides, the exponential integrator, ansatz constructors."""

import numpy as np
import pytest

from szego_rg import (
    Domain,
    SpectralField,
    conserved_series,
    field_from_modes,
    free_flow,
    make_grid,
    mass,
    negative_mode_mass,
    project_plus,
    random_field,
    sobolev_norm,
    zero_field,
)
from szego_rg import resonance as rs
from szego_rg.dynamics import (
    Flow,
    FlowSpec,
    Trajectory,
    first_order_ansatz,
    integrate,
    residual_first_order,
    rhs_first_order,
    rhs_full_nlw,
    rhs_second_order,
    second_order_ansatz,
)
from szego_rg.spectral import cubic_product


def spec(flow, grid, eps, dt, t_end, **kw):
    kw.setdefault("slow_time_cap", max(100.0, t_end * eps**2 + 1.0))
    return FlowSpec(flow=flow, grid=grid, eps=eps, dt=dt, t_end=t_end, **kw)


class TestFlowSpec:
    def test_eps_range(self, torus8):
        with pytest.raises(ValueError):
            spec(Flow.FULL_NLW, torus8, eps=1.5, dt=0.1, t_end=1.0)
        spec(Flow.FIRST_ORDER_RG, torus8, eps=1.0, dt=0.1, t_end=1.0)  # eps=1 allowed

    def test_dt_envelope(self, torus8):
        with pytest.raises(ValueError):
            spec(Flow.FULL_NLW, torus8, eps=0.1, dt=0.75, t_end=1.0)

    def test_slow_time_cap(self, torus8):
        with pytest.raises(ValueError):
            FlowSpec(Flow.FULL_NLW, torus8, eps=0.5, dt=0.1, t_end=100.0, slow_time_cap=2.0)

    def test_s_minimum(self, torus8):
        with pytest.raises(ValueError):
            spec(Flow.FULL_NLW, torus8, eps=0.1, dt=0.1, t_end=1.0, s=0.25)

    def test_second_order_needs_torus(self, box8):
        with pytest.raises(ValueError):
            spec(Flow.SECOND_ORDER_AVERAGED, box8, eps=0.1, dt=0.1, t_end=1.0)


class TestRightHandSides:
    def test_full_nlw_zero(self, torus8):
        assert np.all(rhs_full_nlw(zero_field(torus8)).coeff == 0.0)

    def test_full_nlw_single_mode(self, torus8):
        eps = 0.1
        v = field_from_modes(torus8, {1: eps})
        r = rhs_full_nlw(v)
        assert r[1] == pytest.approx(-1j * eps - 1j * eps**3)

    def test_full_nlw_gauge_covariant(self, rand_torus8, coeff_diff):
        theta = 1.3
        a = rhs_full_nlw(SpectralField(rand_torus8.grid, np.exp(1j * theta) * rand_torus8.coeff))
        b = SpectralField(rand_torus8.grid, np.exp(1j * theta) * rhs_full_nlw(rand_torus8).coeff)
        assert coeff_diff(a, b) <= 1e-12

    def test_first_order_hardy_is_szego(self, torus8, rng, coeff_diff):
        w = random_field(torus8, rng, hardy=True)
        eps = 0.2
        expected = SpectralField(
            torus8, -1j * eps**2 * project_plus(cubic_product(w)).coeff
        )
        assert coeff_diff(rhs_first_order(w, eps), expected) <= 1e-14

    def test_first_order_general_uses_closed_form(self, rand_torus8, coeff_diff):
        eps = 0.2
        expected = SpectralField(
            rand_torus8.grid, eps**2 * rs.f_res_closed_torus(rand_torus8).coeff
        )
        assert coeff_diff(rhs_first_order(rand_torus8, eps), expected) == 0.0

    def test_second_order_single_mode_reduces(self, torus8):
        w = field_from_modes(torus8, {1: 1.0})
        eps = 0.2
        a = rhs_second_order(w, eps)
        b = rhs_first_order(w, eps)
        assert np.max(np.abs(a.coeff - b.coeff)) <= 1e-14

    def test_second_order_matches_bruteforce_quintic(self, rng, coeff_diff):
        g = make_grid(6, Domain.TORUS)
        w = random_field(g, rng, hardy=True)
        eps = 0.3
        expected = SpectralField(
            g,
            rhs_first_order(w, eps).coeff + eps**4 * rs.r2_bruteforce(w).coeff,
        )
        assert coeff_diff(rhs_second_order(w, eps), expected) <= 1e-10

    def test_second_order_output_is_hardy(self, torus8, rng):
        w = random_field(torus8, rng, hardy=True)
        out = rhs_second_order(w, 0.2)
        assert negative_mode_mass(out) == 0.0

    def test_second_order_rejects_non_hardy(self, rand_torus8):
        with pytest.raises(ValueError):
            rhs_second_order(rand_torus8, 0.2)


class TestIntegrator:
    def test_zero_data_stays_zero(self, torus8):
        traj = integrate(spec(Flow.FULL_NLW, torus8, 0.1, 0.1, 5.0), zero_field(torus8))
        assert all(np.all(f.coeff == 0.0) for f in traj.states)

    def test_linear_only_matches_free_flow(self, torus8, rng):
        u0 = random_field(torus8, rng)
        traj = integrate(
            spec(Flow.FULL_NLW, torus8, 0.1, 0.25, 30.0, snapshot_stride=3.0, nonlinear=False),
            u0,
        )
        worst = max(
            float(np.max(np.abs(traj.state_at(t).coeff - free_flow(u0, t).coeff)))
            for t in traj.times
        )
        assert worst <= 1e-13

    def test_fourth_order_convergence(self):
        g = make_grid(16, Domain.TORUS)
        v0 = 0.2 * field_from_modes(g, {1: 2.0, 2: 1.0})
        ref = integrate(spec(Flow.FULL_NLW, g, 0.2, 0.00125, 5.0, snapshot_stride=5.0), v0).states[-1]
        errs = []
        for dt in (0.02, 0.01):
            st = integrate(spec(Flow.FULL_NLW, g, 0.2, dt, 5.0, snapshot_stride=5.0), v0).states[-1]
            errs.append(float(np.max(np.abs(st.coeff - ref.coeff))))
        assert errs[0] / errs[1] >= 12.0  # fourth order gives ~16

    def test_deterministic_bitwise(self, torus8, rng):
        v0 = 0.1 * random_field(torus8, rng, hardy=True)
        s = spec(Flow.FULL_NLW, torus8, 0.1, 0.05, 10.0, snapshot_stride=1.0)
        a = integrate(s, v0)
        b = integrate(s, v0)
        assert np.array_equal(a.times, b.times)
        for x, y in zip(a.states, b.states):
            assert np.array_equal(x.coeff, y.coeff)

    def test_blow_up_guard_truncates(self):
        g = make_grid(12, Domain.TORUS)
        vbig = 80.0 * field_from_modes(g, {1: 1.0, 2: 1.0})
        traj = integrate(
            spec(Flow.FULL_NLW, g, 0.9, 0.4, 100.0, snapshot_stride=0.4), vbig
        )
        assert traj.blown_up
        assert traj.times[-1] < 100.0
        assert len(traj.states) == len(traj.times)

    def test_snapshot_times(self, torus8):
        traj = integrate(
            spec(Flow.FIRST_ORDER_RG, torus8, 0.5, 0.1, 2.0, snapshot_stride=0.5),
            field_from_modes(torus8, {1: 1.0}),
        )
        assert traj.times[0] == 0.0
        assert traj.times[-1] == pytest.approx(2.0)
        assert np.all(np.diff(traj.times) > 0)

    def test_state_at_unknown_time(self, torus8):
        traj = integrate(
            spec(Flow.FIRST_ORDER_RG, torus8, 0.5, 0.1, 1.0),
            field_from_modes(torus8, {1: 1.0}),
        )
        with pytest.raises(ValueError):
            traj.state_at(0.123456)

    def test_wrong_grid_rejected(self, torus8):
        other = make_grid(6, Domain.TORUS)
        with pytest.raises(ValueError):
            integrate(spec(Flow.FULL_NLW, torus8, 0.1, 0.1, 1.0), zero_field(other))

    def test_hardy_invariance_along_effective_flows(self, torus8, rng):
        w0 = random_field(torus8, rng, hardy=True)
        for flow in (Flow.FIRST_ORDER_RG, Flow.SECOND_ORDER_AVERAGED):
            traj = integrate(spec(flow, torus8, 0.3, 0.1, 20.0, snapshot_stride=2.0), w0)
            assert max(negative_mode_mass(f) for f in traj.states) <= 1e-12

    def test_first_order_conserves_q_and_m(self, torus8, rng):
        w0 = random_field(torus8, rng, hardy=True, decay=1.5)
        traj = integrate(spec(Flow.FIRST_ORDER_RG, torus8, 0.3, 0.05, 50.0, snapshot_stride=5.0), w0)
        rep = conserved_series(traj.times, traj.states)
        assert rep.max_rel_drift("mass") <= 1e-8
        assert rep.max_rel_drift("momentum") <= 1e-8

    def test_time_reparametrization(self, rng):
        g = make_grid(12, Domain.TORUS)
        w = random_field(g, rng, hardy=True)
        eps = 0.3
        a = integrate(spec(Flow.FIRST_ORDER_RG, g, eps, 0.1, 50.0, snapshot_stride=10.0), w)
        b = integrate(
            spec(Flow.FIRST_ORDER_RG, g, 1.0, 0.1 * eps**2, 50.0 * eps**2,
                 snapshot_stride=10.0 * eps**2),
            w,
        )
        worst = max(
            float(np.max(np.abs(x.coeff - y.coeff))) for x, y in zip(a.states, b.states)
        )
        assert worst <= 1e-12


class TestAnsatz:
    def test_first_order_at_zero(self, torus8):
        w0 = field_from_modes(torus8, {1: 1.0, 2: 0.5})
        eps = 0.2
        traj = integrate(spec(Flow.FIRST_ORDER_RG, torus8, eps, 0.1, 1.0, snapshot_stride=0.5), w0)
        v = first_order_ansatz(traj)(0.0)
        assert np.max(np.abs(v.coeff - eps * w0.coeff)) <= 1e-15

    def test_first_order_isometry(self, torus8, rng):
        w0 = random_field(torus8, rng, hardy=True)
        traj = integrate(spec(Flow.FIRST_ORDER_RG, torus8, 0.2, 0.1, 5.0, snapshot_stride=1.0), w0)
        ansatz = first_order_ansatz(traj)
        for t in traj.times:
            lhs = sobolev_norm(ansatz(t), 1.0)
            rhs = sobolev_norm(0.2 * traj.state_at(t), 1.0)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_first_order_flow_mismatch_rejected(self, torus8):
        traj = integrate(
            spec(Flow.FULL_NLW, torus8, 0.2, 0.1, 1.0), field_from_modes(torus8, {1: 0.2})
        )
        with pytest.raises(ValueError):
            first_order_ansatz(traj)

    def test_ansatz_residual_in_equation_scales_cubically(self, torus8):
        # plug the first-order ansatz into the full equation: the defect is
        # i (cubic(v_app) - exp(-i|D|t) P+(|cal_W|^2 cal_W)), of size eps^3
        w0 = field_from_modes(torus8, {0: 0.6, 1: 1.0, 2: 0.5})
        t = 0.7
        defects = []
        for eps in (0.2, 0.1):
            traj = integrate(
                spec(Flow.FIRST_ORDER_RG, torus8, eps, 0.1, 1.0, snapshot_stride=0.7), w0
            )
            cal_w = eps * traj.state_at(t)
            v_app = free_flow(cal_w, t)
            defect = cubic_product(v_app).coeff - free_flow(
                project_plus(cubic_product(cal_w)), t
            ).coeff
            defects.append(float(np.linalg.norm(defect)))
        assert defects[0] / defects[1] >= 7.0

    def test_second_order_single_mode_reduces_to_first(self, torus8):
        w0 = field_from_modes(torus8, {1: 1.0})
        eps = 0.2
        tr2 = integrate(
            spec(Flow.SECOND_ORDER_AVERAGED, torus8, eps, 0.1, 2.0, snapshot_stride=0.5), w0
        )
        tr1 = integrate(
            spec(Flow.FIRST_ORDER_RG, torus8, eps, 0.1, 2.0, snapshot_stride=0.5), w0
        )
        a2, a1 = second_order_ansatz(tr2), first_order_ansatz(tr1)
        for t in tr2.times:
            assert np.max(np.abs(a2(t).coeff - a1(t).coeff)) <= 1e-12

    def test_second_order_wiggle_bounded_by_cubic_norm(self, torus8, rng):
        w0 = random_field(torus8, rng, hardy=True, decay=1.5)
        eps = 0.2
        traj = integrate(
            spec(Flow.SECOND_ORDER_AVERAGED, torus8, eps, 0.1, 5.0, snapshot_stride=1.0), w0
        )
        ansatz = second_order_ansatz(traj)
        for t in traj.times:
            cal_w = eps * traj.state_at(t)
            gap = sobolev_norm(ansatz(t) - free_flow(cal_w, t), 1.0)
            assert gap <= 10.0 * sobolev_norm(cal_w, 1.0) ** 3

    def test_second_order_nonzero_initial_wiggle(self, torus8):
        w0 = field_from_modes(torus8, {0: 0.6, 1: 1.0, 2: 0.5})
        eps = 0.2
        traj = integrate(
            spec(Flow.SECOND_ORDER_AVERAGED, torus8, eps, 0.1, 1.0, snapshot_stride=0.5), w0
        )
        v0 = second_order_ansatz(traj)(0.0)
        assert np.max(np.abs(v0.coeff - eps * w0.coeff)) > 1e-6


class TestResidual:
    def test_zero_field(self, torus8):
        assert np.all(residual_first_order(zero_field(torus8), 0.5, 0.1).coeff == 0.0)

    def test_leading_quintic_scaling(self, torus8, rng):
        w = random_field(torus8, rng, hardy=True)
        eps, t = 0.1, 0.4
        norms = [
            float(np.linalg.norm(residual_first_order(lam * w, t, eps).coeff))
            for lam in (0.1, 0.05)
        ]
        assert 28.0 <= norms[0] / norms[1] <= 36.0  # lambda^5 gives 32

    def test_box_derivative_bound(self, rng):
        # |eps^4 dF_osc . f_res| <= C (sqrt(t) + |W|^5) on Hardy box data
        g = make_grid(24, Domain.BIGBOX, 128.0 * np.pi)
        w = random_field(g, rng, hardy=True, decay=1.5)
        h = rs.f_res_closed_line(w)
        den = sobolev_norm(w, 1.0) ** 5
        ratios = [
            sobolev_norm(rs.dF_osc(w, t, h), 1.0) / (np.sqrt(t) + den)
            for t in (1.0, 4.0, 16.0, 64.0, 256.0)
        ]
        assert max(ratios) <= 4.0


class TestTrajectoryValue:
    def test_times_must_increase(self, torus8):
        f = zero_field(torus8)
        s = spec(Flow.FULL_NLW, torus8, 0.1, 0.1, 1.0)
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 0.5, 0.5]), (f, f, f), s)

    def test_state_count_must_match(self, torus8):
        f = zero_field(torus8)
        s = spec(Flow.FULL_NLW, torus8, 0.1, 0.1, 1.0)
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 0.5]), (f,), s)


class TestBoxDegeneracy:
    def test_length_two_pi_box_matches_torus_for_hardy_data(self, rng):
        # at L = 2*pi the box grid carries the same frequencies as the torus,
        # and on Hardy data both resonant closed forms reduce to the same
        # Szego term, so the flows coincide exactly
        n = 16
        gt = make_grid(n, Domain.TORUS)
        gb = make_grid(n, Domain.BIGBOX, 2.0 * np.pi)
        c = random_field(gt, rng, hardy=True).coeff
        wt, wb = SpectralField(gt, c), SpectralField(gb, c)
        for flow, amp in ((Flow.FULL_NLW, 0.1), (Flow.FIRST_ORDER_RG, 1.0)):
            a = integrate(spec(flow, gt, 0.1, 0.1, 10.0, snapshot_stride=2.0), amp * wt)
            b = integrate(spec(flow, gb, 0.1, 0.1, 10.0, snapshot_stride=2.0), amp * wb)
            for x, y in zip(a.states, b.states):
                assert np.array_equal(x.coeff, y.coeff)
