import math

import numpy as np
import pytest
from scipy.integrate import quad

from hyperball.params import Params, omega_sphere
from hyperball import energy, galerkin, geometry, radial
from hyperball.energy import NotProjectableError
from hyperball.radial import RadialProfile

from conftest import synthetic_bump


def exp_profile(a=2.0, T=18.0):
    f = lambda t: np.exp(-a * t)
    df = lambda t: -a * np.exp(-a * t)
    return RadialProfile.from_callable(f, df, T, n=3001)


class TestEnergyReport:
    def test_zero_profile(self):
        P = Params(3, 3.0, 0.0)
        rep = energy.energy(RadialProfile.zero(), P)
        assert rep.gradient_term == rep.mass_term == rep.nonlinear_term == 0.0
        assert rep.I_lambda == 0.0

    def test_bookkeeping_identity_exact(self, solutions_n3):
        P, sols = solutions_n3
        rep = energy.energy(sols[1].profile, P)
        lhs = (rep.gradient_term - P.lam * rep.mass_term) / 2.0 \
            - rep.nonlinear_term / (P.p + 1.0)
        assert rep.I_lambda == lhs
        assert rep.nehari_residual == rep.gradient_term - P.lam * rep.mass_term - rep.nonlinear_term

    def test_exponential_against_reference_quadrature(self):
        # independent oracle: adaptive quadrature of the same integrands
        P = Params(3, 3.0, 0.0)
        a = 2.0
        prof = exp_profile(a)
        om = omega_sphere(3)
        g_ref = quad(lambda t: a * a * np.exp(-2 * a * t) * om * np.sinh(t) ** 2,
                     0, prof.T, epsabs=1e-14, epsrel=1e-13, limit=300)[0]
        m_ref = quad(lambda t: np.exp(-2 * a * t) * om * np.sinh(t) ** 2,
                     0, prof.T, epsabs=1e-14, epsrel=1e-13, limit=300)[0]
        n_ref = quad(lambda t: np.exp(-4 * a * t) * om * np.sinh(t) ** 2,
                     0, prof.T, epsabs=1e-16, epsrel=1e-13, limit=300)[0]
        rep = energy.energy(prof, P)
        assert rep.gradient_term == pytest.approx(g_ref, rel=1e-9)
        assert rep.mass_term == pytest.approx(m_ref, rel=1e-9)
        assert rep.nonlinear_term == pytest.approx(n_ref, rel=1e-9)

    def test_decayed_solution_nehari(self, solutions_n3):
        P, sols = solutions_n3
        for k in range(4):
            rep = energy.energy(sols[k].profile, P)
            assert abs(rep.nehari_residual) < 1e-6 * rep.nonlinear_term
            # critical-point bookkeeping: I = (1/2 - 1/(p+1)) * nonlinear
            assert rep.I_lambda == pytest.approx(
                (0.5 - 1.0 / (P.p + 1.0)) * rep.nonlinear_term, rel=1e-6)

    def test_error_estimate_small_for_smooth(self):
        P = Params(4, 3.0, 2.1)
        rep = energy.energy(synthetic_bump(), P)
        assert rep.quadrature_error_estimate < 1e-10 * max(1.0, abs(rep.I_lambda))


class TestNehariProjection:
    def test_solution_already_on_manifold(self, solutions_n3):
        P, sols = solutions_n3
        _, tstar = energy.nehari_project(sols[0].profile, P)
        assert tstar == pytest.approx(1.0, abs=1e-7)

    def test_scaling_covariance(self):
        P = Params(3, 3.0, 0.0)
        prof = synthetic_bump(T=6.0)
        proj1, _ = energy.nehari_project(prof, P)
        proj2, _ = energy.nehari_project(prof.scaled(7.5), P)
        t = np.linspace(0, 6.0, 200)
        assert np.allclose(proj1(t), proj2(t), rtol=1e-12, atol=1e-14)

    def test_idempotent(self):
        P = Params(3, 3.0, 0.0)
        proj, _ = energy.nehari_project(synthetic_bump(T=6.0), P)
        again, tstar = energy.nehari_project(proj, P)
        assert abs(tstar - 1.0) < 1e-12

    def test_not_projectable(self):
        # wide flat profile: mass dominates the gradient, Q < 0
        P = Params(3, 3.0, 0.9)
        prof = synthetic_bump(T=14.0)
        with pytest.raises(NotProjectableError):
            energy.nehari_project(prof, P)


class TestCriticalRatio:
    def test_zero_maps_to_zero(self):
        P = Params(4, 3.0, 2.1)
        assert energy.f_lambda(RadialProfile.zero(), P) == 0.0

    def test_nehari_membership_gives_one(self, ground_n4):
        P, res = ground_n4
        assert energy.f_lambda(res.profile, P) == pytest.approx(1.0, abs=1e-6)

    def test_sign_split_projected_parts(self, solutions_n3):
        # project the positive and negative parts separately onto the
        # critical natural constraint; the ratio must be exactly one for each
        _, sols = solutions_n3
        P = Params(3, 5.0, 0.9)  # critical power in dimension 3
        prof = sols[1].profile
        plus, _ = energy.nehari_project(prof.positive_part(), P)
        minus, _ = energy.nehari_project(prof.negative_part(), P)
        assert energy.f_lambda(plus, P) == pytest.approx(1.0, abs=1e-5)
        assert energy.f_lambda(minus, P) == pytest.approx(1.0, abs=1e-5)


class TestSobolevConstant:
    def test_critical_consistency(self, ground_n4):
        # N * I(ground) = S^(N/2) at the critical power
        P, res = ground_n4
        S = energy.rayleigh_quotient(res.profile, P)
        assert P.N * res.energy == pytest.approx(S ** (P.N / 2.0), rel=1e-4)

    def test_two_oracles_agree_subcritical(self, ground_n4_sub):
        P, _ = ground_n4_sub
        est = energy.estimate_sobolev_constant(P)
        assert est.oracle_gap < 1e-4
        assert est.converged

    def test_monotone_in_lambda(self):
        # the quotient decreases pointwise in lam, so the infimum does too
        vals = []
        for lam in (1.0, 1.5, 2.0):
            P = Params(4, 1.5, lam)
            ground = radial.find_nodal_solution(0, P)
            vals.append(energy.rayleigh_quotient(ground.profile, P))
        assert vals[0] > vals[1] > vals[2]


class TestCapMass:
    def cap_on_axis(self, N, r):
        a = np.zeros(N)
        a[0] = math.sqrt(1.0 + r * r)
        return geometry.Cap(a, r)

    def test_zero_function(self):
        P = Params(4, 3.0, 2.1)
        cap = self.cap_on_axis(4, 1.0)
        f = lambda x: np.zeros(x.shape[0])
        assert energy.cap_mass(f, cap, P) == 0.0

    def test_exhaustion_recovers_total_mass(self):
        # cap grown to cover the support of a compactly supported profile
        P = Params(4, 3.0, 2.1)
        prof = synthetic_bump(T=4.0)
        total = energy.pnorm_integral(prof, P.p + 1.0, P)
        big = self.cap_on_axis(4, 2000.0)
        got = energy.cap_mass(energy.profile_on_ball(prof), big, P, t_max=6.0)
        assert got == pytest.approx(total, rel=1e-6)

    def test_isometry_invariance(self, ground_n4_sub):
        # mass of a cap equals the mass of its image under the cap-to-cap
        # isometry, with the integrand transported accordingly
        P, res = ground_n4_sub
        c1 = self.cap_on_axis(4, 1.2)
        c2 = self.cap_on_axis(4, 0.7)
        tau = geometry.cap_isometry(c1, c2)
        b = tau(np.zeros(4))
        beta = geometry.distance_to_origin(b) * math.copysign(1.0, b[0])

        m1 = energy.cap_mass(energy.profile_on_ball(res.profile), c1, P,
                             q=P.p + 1.0, n_t=18, n_theta=16)

        def moved(x):
            x = np.asarray(x, dtype=float)
            r = np.sqrt(np.sum(x * x, axis=-1))
            t = 2.0 * np.arctanh(np.minimum(r, 1 - 1e-15))
            cosx = np.divide(x[..., 0], np.maximum(r, 1e-300))
            theta = np.arccos(np.clip(cosx, -1, 1))
            D, _, _ = energy._axis_geometry(t, theta, beta)
            u, _ = res.profile.evaluate(np.ravel(D))
            return u.reshape(D.shape)

        m2 = energy.cap_mass(moved, c2, P, q=P.p + 1.0, n_t=18, n_theta=16)
        assert m2 == pytest.approx(m1, rel=1e-5)


class TestOffCenterIntegrals:
    def test_translation_invariance_of_total_integral(self, ground_n4_sub):
        P, res = ground_n4_sub
        base = energy.pnorm_integral(res.profile, 2.5, P)
        for beta in (1.0, 2.5):
            moved = energy.offcenter_pnorm(res.profile, beta, 2.5, P)
            assert moved == pytest.approx(base, rel=1e-6)
