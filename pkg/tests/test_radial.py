import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from hyperball.params import Params
from hyperball import energy, galerkin, radial
from hyperball.radial import (CLASS_DECAYING, RadialProfile, ShootConfig,
                              SolutionNotFoundError)

from conftest import synthetic_bump


class TestRhsAndSeries:
    def test_zero_state(self):
        P = Params(4, 3.0, 2.1)
        assert radial.radial_ode_rhs(1.0, (0.0, 0.0), P) == (0.0, 0.0)

    def test_large_t_constant_coefficient_limit(self):
        # coth(t) -> 1, so u'' -> -(N-1)u' - lam u - |u|^(p-1)u
        P = Params(5, 2.0, 1.0)
        u, v = 0.3, -0.2
        _, upp = radial.radial_ode_rhs(40.0, (u, v), P)
        expected = -(P.N - 1) * v - P.lam * u - abs(u) ** (P.p - 1) * u
        assert upp == pytest.approx(expected, rel=1e-15)

    def test_matches_cartesian_laplacian(self):
        # radial reduction against the conformal-factor form of the operator,
        # evaluated by finite differences in Cartesian coordinates
        N = 4
        a = 0.7

        def f(x):
            r2 = np.sum(x * x, axis=-1)
            return np.exp(-a * r2)

        h = 1e-4
        rng = np.random.default_rng(0)
        for _ in range(10):
            x = rng.uniform(-0.35, 0.35, N)
            lap = 0.0
            f0 = f(x)
            grad = np.zeros(N)
            for i in range(N):
                xp = x.copy(); xp[i] += h
                xm = x.copy(); xm[i] -= h
                lap += (f(xp) - 2 * f0 + f(xm)) / h ** 2
                grad[i] = (f(xp) - f(xm)) / (2 * h)
            w = (1 - x @ x) / 2
            lap_hyp = w ** 2 * lap + (N - 2) * w * (x @ grad)

            # geodesic-polar form at the matched radius
            r = math.sqrt(x @ x)
            t = 2 * math.atanh(r)
            fr = lambda rr: math.exp(-a * rr * rr)
            eps = 1e-5
            rr = lambda tt: math.tanh(tt / 2)
            ft = lambda tt: fr(rr(tt))
            d1 = (ft(t + eps) - ft(t - eps)) / (2 * eps)
            d2 = (ft(t + eps) - 2 * ft(t) + ft(t - eps)) / eps ** 2
            lap_polar = d2 + (N - 1) / math.tanh(t) * d1
            assert abs(lap_hyp - lap_polar) < 1e-5

    def test_series_start_satisfies_equation(self):
        P = Params(3, 3.0, 0.0)
        s = 2.5
        t0 = 1e-3
        h = 1e-4
        u = lambda t: radial._series_eval(s, P, np.asarray([t]))[0][0]
        upp = (u(t0 + h) - 2 * u(t0) + u(t0 - h)) / h ** 2
        du = (u(t0 + h) - u(t0 - h)) / (2 * h)
        res = upp + (P.N - 1) / math.tanh(t0) * du + P.lam * u(t0) + u(t0) ** 3
        assert abs(res) < 1e-4


class TestShoot:
    def test_trivial(self):
        P = Params(4, 3.0, 2.1)
        res = radial.shoot(0.0, P)
        assert res.energy == 0.0 and res.classification == CLASS_DECAYING

    def test_sign_flip_symmetry(self):
        P = Params(3, 3.0, 0.0)
        r1 = radial.shoot(2.0, P)
        r2 = radial.shoot(-2.0, P)
        n = min(len(r1.profile.u), len(r2.profile.u))
        assert np.max(np.abs(r1.profile.u[:n] + r2.profile.u[:n])) < 1e-12

    def test_generic_trajectory_is_slow(self):
        P = Params(5, 7.0 / 3.0, 1.0)
        res = radial.shoot(1.0, P)
        assert res.classification == radial.CLASS_SLOW

    def test_ground_state(self, ground_n4):
        P, res = ground_n4
        assert res.classification == CLASS_DECAYING
        assert res.node_count == 0
        rep = energy.energy(res.profile, P)
        assert abs(rep.nehari_residual) < 1e-6 * rep.nonlinear_term
        assert abs(res.profile.decay_rate - P.decay_rate) < 0.02 * P.decay_rate


class TestNodalFamily:
    def test_node_counts_and_monotone_energies(self, solutions_n3):
        P, sols = solutions_n3
        for k in range(4):
            assert sols[k].classification == CLASS_DECAYING
            assert sols[k].node_count == k
        energies = [sols[k].energy for k in range(4)]
        norms = [sols[k].norm_lambda for k in range(4)]
        assert all(e1 < e2 for e1, e2 in zip(energies[:-1], energies[1:]))
        assert all(n1 < n2 for n1, n2 in zip(norms[:-1], norms[1:]))

    def test_against_variational_oracle(self, solutions_n3):
        # independent piecewise-linear minimization, run live
        P, sols = solutions_n3
        lv0 = galerkin.ground_level(P, T=15.0)
        assert sols[0].energy == pytest.approx(lv0, rel=2e-3)
        lv1 = galerkin.nodal_level(P, 1, T=18.0)
        assert sols[1].energy == pytest.approx(lv1, rel=5e-3)
        # the discrete level is an upper bound
        assert sols[0].energy < lv0
        assert sols[1].energy < lv1

    def test_ode_residual(self, solutions_n3):
        P, sols = solutions_n3
        for k in range(4):
            assert radial.ode_residual_max(sols[k].profile, P) < 1e-8

    def test_decay_rates(self, solutions_n3):
        P, sols = solutions_n3
        for k in range(4):
            assert abs(sols[k].profile.decay_rate - P.decay_rate) < 0.02 * P.decay_rate

    def test_node_count_stable_under_refinement(self, solutions_n3):
        P, sols = solutions_n3
        prof = sols[2].profile
        for factor in (2, 4):
            t = np.linspace(prof.t[0], prof.T, factor * len(prof.t))
            u, du = prof.evaluate(t)
            refined = RadialProfile.from_arrays(t, u, du)
            assert refined.node_count == 2

    def test_uniqueness_probe_critical_ground(self, ground_n4):
        # exactly one tail-sign transition in a wide scan window
        P, res = ground_n4
        brackets = radial.solution_brackets(P, 1e1, 1e6, per_decade=10)
        assert len(brackets) == 1
        assert brackets[0][0] < res.s < brackets[0][1]


class TestNonexistenceRegimes:
    def test_nodal_not_found_in_low_lambda_critical(self):
        # lam below N(N-2)/4 at the critical power: no sign-changing solution
        P = Params(5, 7.0 / 3.0, 1.0)
        with pytest.raises(SolutionNotFoundError):
            radial.find_nodal_solution(1, P, s_max=1e4)

    def test_scan_certifies(self):
        P = Params(5, 7.0 / 3.0, 1.0)
        report = radial.nonexistence_scan(P, np.geomspace(1e-2, 1e2, 25))
        assert report.certified
        assert report.n_undetermined == 0
        assert report.n_decaying_sign_changing == 0

    def test_scan_requires_critical_power(self):
        with pytest.raises(ValueError):
            radial.nonexistence_scan(Params(5, 2.0, 1.0), [1.0])


class TestDecayCheck:
    def test_zero_profile(self):
        P = Params(4, 3.0, 2.1)
        rep = radial.decay_check(RadialProfile.zero(), P)
        assert rep["embedding_bound_holds"]
        assert rep["conformal_ratio_C"] == 0.0

    def test_ground_state_bounds(self, ground_n4):
        P, res = ground_n4
        rep = radial.decay_check(res.profile, P)
        assert rep["embedding_bound_holds"]
        assert rep["sup_tail_u"] < 1e-8
        assert rep["sup_tail_grad"] < 1e-8
        assert rep["conformal_ratio_C"] > 0.0

    def test_conformal_ratio_at_threshold_lambda(self, ground_n4_sub):
        # lam = N(N-2)/4 exactly: the weighted ratio stays bounded
        P, res = ground_n4_sub
        assert P.lam == P.lambda_conformal
        rep = radial.decay_check(res.profile, P)
        assert rep["low_lambda_regime"]
        assert np.isfinite(rep["conformal_ratio_C"])


class TestIntegratorOrder:
    def test_stepwise_convergence(self):
        P = Params(3, 3.0, 0.0)

        def rhs(t, y):
            return radial.radial_ode_rhs(t, y, P)

        ref = solve_ivp(rhs, (1.0, 6.0), (1.0, 0.0), method="DOP853",
                        rtol=1e-13, atol=1e-15).y[0][-1]
        errs = []
        for h in (0.1, 0.05, 0.025):
            sol = solve_ivp(rhs, (1.0, 6.0), (1.0, 0.0), method="RK45",
                            max_step=h, rtol=1e-3, atol=1e308)
            errs.append(abs(sol.y[0][-1] - ref))
        # nominal order 5: halving the step cuts the error by about 2^5
        for e1, e2 in zip(errs[:-1], errs[1:]):
            assert 8.0 < e1 / e2 < 600.0


class TestProfileIO:
    def test_csv_roundtrip(self, tmp_path, solutions_n3):
        P, sols = solutions_n3
        path = tmp_path / "profile.csv"
        sols[1].profile.to_csv(path)
        back = RadialProfile.from_csv(path)
        assert back.node_count == 1
        assert np.array_equal(back.t, sols[1].profile.t)
        assert np.array_equal(back.u, sols[1].profile.u)

    def test_positive_negative_parts(self, solutions_n3):
        P, sols = solutions_n3
        prof = sols[1].profile
        plus = prof.positive_part()
        minus = prof.negative_part()
        t = np.linspace(0, prof.T, 500)
        u, _ = prof.evaluate(t)
        up, _ = plus.evaluate(t)
        um, _ = minus.evaluate(t)
        assert np.allclose(up - um, u, atol=1e-12)
        assert np.all(up >= 0) and np.all(um >= 0)

    def test_zeros_located(self, solutions_n3):
        P, sols = solutions_n3
        zs = sols[2].profile.zeros()
        assert len(zs) == 2
        vals = sols[2].profile(zs)
        assert np.max(np.abs(vals)) < 1e-9
