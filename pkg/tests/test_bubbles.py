import math

import numpy as np
import pytest

from hyperball.params import Params
from hyperball import bubbles, energy, geometry
from hyperball.bubbles import Bubble


class TestCutoffBubble:
    def test_center_value(self):
        b = Bubble(0.05)
        assert bubbles.bubble_eval(b, np.zeros(5)) == pytest.approx(
            0.05 ** (-1.5), rel=1e-14)

    def test_support(self):
        b = Bubble(0.1)
        x = np.zeros((3, 4))
        x[0, 0] = 0.55
        x[1, 0] = 0.75
        x[2, 1] = 0.51
        assert np.all(bubbles.bubble_eval(b, x) == 0.0)

    def test_radial_monotone_inside_plateau(self):
        b = Bubble(0.2)
        rho = np.linspace(0.0, b.r_inner, 100)
        vals = b.radial(rho, 5)
        assert np.all(np.diff(vals) < 0)

    def test_cutoff_smoothness_range(self):
        b = Bubble(0.1)
        rho = np.linspace(0.0, 0.9, 500)
        phi = b.cutoff(rho)
        assert np.all((phi >= 0) & (phi <= 1))
        assert np.all(phi[rho < b.r_inner] == 1.0)
        assert np.all(phi[rho > b.r_outer] == 0.0)

    def test_scale_substitution_identity(self):
        # v_eps and mu^((N-2)/4) w_mu are the same function to machine precision
        N = 5
        eps = 0.03
        mu = eps * eps
        b = Bubble(eps)
        rho = np.linspace(0.0, 0.6, 400)
        v = b.radial(rho, N)
        w_mu = b.cutoff(rho) / (mu + rho * rho) ** ((N - 2) / 2.0)
        assert np.allclose(v, mu ** ((N - 2) / 4.0) * w_mu, rtol=1e-14, atol=0.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            Bubble(-1.0)
        with pytest.raises(ValueError):
            Bubble(0.1, r_inner=0.5, r_outer=0.4)


class TestFlatBubbleEnergy:
    def test_level_identity(self):
        for N in (4, 5, 7):
            sb = bubbles.standard_bubble_energy(N)
            assert sb["level_identity_gap"] < 1e-8
            assert sb["S"] > 0 and sb["J"] > 0

    def test_extremal_solves_flat_equation(self):
        # fully analytic radial derivatives of the extremal profile
        N = 5
        p_crit = (N + 2.0) / (N - 2.0)
        m = (N - 2.0) / 2.0
        amp = (N * (N - 2.0)) ** ((N - 2.0) / 4.0)
        for rho in (0.1, 0.7, 1.3, 2.5, 7.0):
            v0, dv0 = bubbles.aubin_talenti(rho, N)
            d2 = amp * (-2 * m * (1 + rho * rho) ** (-m - 1)
                        + 4 * m * (m + 1) * rho * rho * (1 + rho * rho) ** (-m - 2))
            res = d2 + (N - 1) / rho * dv0 + abs(v0) ** (p_crit - 1.0) * v0
            assert abs(res) < 1e-10 * max(1.0, abs(v0))

    def test_scale_invariance_of_dirichlet_energy(self):
        from scipy.integrate import quad
        N = 5
        om = 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)

        def dirichlet(eps):
            half = (N - 2.0) / 2.0

            def dU(r):
                return -(N - 2.0) * r * eps ** half / (eps * eps + r * r) ** (N / 2.0)

            a = quad(lambda r: dU(r) ** 2 * r ** (N - 1), 0, 1.0,
                     points=[eps], epsabs=1e-14, epsrel=1e-13)[0]
            b = quad(lambda r: dU(r) ** 2 * r ** (N - 1), 1.0, np.inf,
                     epsabs=1e-14, epsrel=1e-13)[0]
            return om * (a + b)

        ref = dirichlet(1.0)
        for eps in (0.1, 10.0):
            assert dirichlet(eps) == pytest.approx(ref, rel=1e-8)

    def test_quadrature_refinement_stability(self):
        # the reported constant is stable against a change of quadrature split
        from scipy.integrate import quad
        N = 5
        sb = bubbles.standard_bubble_energy(N)
        om = 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)

        def grad_integrand(rho):
            _, dv = bubbles.aubin_talenti(rho, N)
            return dv * dv * rho ** (N - 1)

        parts = [quad(grad_integrand, a, b, epsabs=1e-15, epsrel=1e-14, limit=400)[0]
                 for a, b in [(0, 0.5), (0.5, 2.0), (2.0, 50.0)]]
        tail = quad(lambda s: grad_integrand(1.0 / s) / s ** 2, 1e-12, 1.0 / 50.0,
                    epsabs=1e-15, epsrel=1e-14, limit=400)[0]
        grad2 = om * (sum(parts) + tail)
        two_star = 2.0 * N / (N - 2.0)
        S2 = grad2 / sb["critical_mass"] ** (2.0 / two_star)
        assert abs(S2 - sb["S"]) < 1e-8 * sb["S"]


class TestScalingLaws:
    def test_slopes_small_grid(self):
        rep = bubbles.verify_bubble_estimates(5, np.geomspace(1e-5, 1e-3, 5))
        for key in rep.slopes:
            assert abs(rep.slopes[key] - rep.predicted[key]) < 0.05, key

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            bubbles.verify_bubble_estimates(5, [1e-4, 2e-4, 3e-4, 4e-4])
        with pytest.raises(ValueError):
            bubbles.verify_bubble_estimates(4, np.geomspace(1e-6, 1e-3, 5))


class TestConcentratingProfiles:
    def test_energy_converges_to_flat_level(self):
        P = Params(4, 3.0, 2.1)
        J = bubbles.standard_bubble_energy(4)["J"]
        spec = bubbles.make_concentrating_sequence([1e-1, 1e-2, 1e-3], P)
        gaps = []
        for n in range(3):
            prof = bubbles.hyperbolic_bubble_profile(spec.bubbles[n][0], 4)
            I = energy.energy(prof, P).I_lambda
            gaps.append(abs(I - J) / J)
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-3

    def test_gradient_term_approaches_flat_constant(self):
        P = Params(4, 3.0, 2.1)
        S_half = bubbles.standard_bubble_energy(4)["gradient"]
        prof = bubbles.hyperbolic_bubble_profile(Bubble(1e-3, normalized=True), 4)
        rep = energy.energy(prof, P)
        assert rep.gradient_term == pytest.approx(S_half, rel=1e-3)

    def test_mass_concentrates(self):
        P = Params(4, 3.0, 2.1)
        from hyperball import _quad
        from hyperball.params import omega_sphere
        om = omega_sphere(4)
        fracs = []
        for eps in (1e-1, 1e-2, 1e-3):
            prof = bubbles.hyperbolic_bubble_profile(Bubble(eps, normalized=True), 4)
            t_split = 2.0 * math.atanh(min(math.sqrt(eps), 0.999))

            def f(t):
                u, _ = prof.evaluate(t)
                return np.abs(u) ** P.two_star * om * np.sinh(t) ** 3

            inner = _quad.integrate_panels(f, _quad.geometric_edges(0, t_split, 1e-7), 16)
            outer = _quad.integrate_panels(f, _quad.geometric_edges(t_split, prof.T, 1e-6), 16)
            fracs.append(outer / (inner + outer))
        assert fracs[0] > fracs[1] > fracs[2]
        assert fracs[2] < 1e-2

    def test_eps_list_must_decrease(self):
        P = Params(4, 3.0, 2.1)
        with pytest.raises(ValueError):
            bubbles.make_concentrating_sequence([1e-2, 1e-1], P)


class TestTranslatedSequences:
    def test_center_zero_is_constant_sequence(self, ground_n4_sub):
        P, res = ground_n4_sub
        spec = bubbles.make_translated_sequence(res.profile, [0.0, 1.0, 2.0], P)
        f0 = spec.evaluator(0)
        x = np.random.default_rng(5).uniform(-0.4, 0.4, (50, 4))
        r = np.sqrt(np.sum(x * x, axis=-1))
        expected = res.profile(2.0 * np.arctanh(r))
        assert np.allclose(f0(x), expected, rtol=1e-12, atol=1e-14)

    def test_term_energies_match_base(self, ground_n4_sub):
        P, res = ground_n4_sub
        spec = bubbles.make_translated_sequence(res.profile, [1.0, 4.0, 8.0], P)
        rows = bubbles.quantization_check(spec)
        for row in rows:
            assert row.gap < 1e-6

    def test_evaluator_matches_isometry_composition(self, ground_n4_sub):
        # translated profile equals the base profile composed with the
        # inverse hyperbolic translation
        P, res = ground_n4_sub
        beta = 1.5
        b = np.zeros(4)
        b[0] = math.tanh(beta / 2.0)
        tau = geometry.translation(b)
        spec = bubbles.make_translated_sequence(res.profile, [beta], P)
        f = spec.evaluator(0)
        rng = np.random.default_rng(6)
        x = rng.uniform(-0.4, 0.4, (100, 4))
        pulled = tau.inverse()(x)
        expected = res.profile(geometry.distance_to_origin(pulled))
        assert np.allclose(f(x), expected, rtol=1e-10, atol=1e-12)

    def test_origin_mass_decays_along_sequence(self, ground_n4_sub):
        P, res = ground_n4_sub
        cap = geometry.Cap(np.asarray([math.sqrt(2.0), 0, 0, 0]), 1.0)
        masses = []
        for beta in (0.5, 2.0, 4.0, 6.0):
            def f(x, _b=beta):
                x = np.asarray(x, dtype=float)
                r = np.sqrt(np.sum(x * x, axis=-1))
                t = 2.0 * np.arctanh(np.minimum(r, 1 - 1e-15))
                cosx = np.divide(x[..., 0], np.maximum(r, 1e-300))
                theta = np.arccos(np.clip(cosx, -1, 1))
                D, _, _ = energy._axis_geometry(t, theta, _b)
                u, _ = res.profile.evaluate(np.ravel(D))
                return u.reshape(D.shape)

            masses.append(energy.cap_mass(f, cap, P))
        assert all(m1 > m2 for m1, m2 in zip(masses[:-1], masses[1:]))

    def test_centers_must_increase(self, ground_n4_sub):
        P, res = ground_n4_sub
        with pytest.raises(ValueError):
            bubbles.make_translated_sequence(res.profile, [2.0, 1.0], P)


class TestQuantization:
    def test_translate_plus_bubble(self, ground_n4):
        P, res = ground_n4
        spec = bubbles.make_superposition_sequence(res.profile, [10.0], [1e-3], P)
        rows = bubbles.quantization_check(spec)
        assert rows[0].gap < 1e-2

    def test_two_translates(self, ground_n4):
        P, res = ground_n4
        rep = bubbles.superposition_energy([(-6.0, res.profile), (6.0, res.profile)], P)
        level = 2.0 * res.energy
        assert abs(rep.I_lambda - level) / level < 1e-2

    def test_gaps_shrink_with_separation(self, ground_n4):
        P, res = ground_n4
        spec = bubbles.make_superposition_sequence(
            res.profile, [4.0, 6.0, 8.0, 10.0], [1e-1, 1e-2, 1e-3, 1e-3], P)
        rows = bubbles.quantization_check(spec)
        gaps = [r.gap for r in rows]
        assert all(g1 >= g2 for g1, g2 in zip(gaps[:-1], gaps[1:]))
