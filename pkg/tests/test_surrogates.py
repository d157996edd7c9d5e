import math

import numpy as np
import pytest

from conftest import fd_gradient, make_scenario, random_feasible_W
from secbeam import rates
from secbeam import surrogates as su
from secbeam.atoms import Layout
from secbeam.errors import DegenerateExpansion, DomainError, GuardViolation
from secbeam.model import Regime, min_norm_sq, sample_channels, unstack_beamformers


class TestScalarInequalities:
    def test_log_inv_product_tight_and_examples(self):
        assert su.lb_log_inv_product(1, 1, 1, 1) == pytest.approx(math.log(2.0))
        v = su.lb_log_inv_product(2.0, 1.0, 1.0, 1.0)
        assert v == pytest.approx(math.log(2.0) - 0.5)
        assert v == pytest.approx(0.193147, abs=1e-6)
        assert v <= math.log(1.5)

    def test_log_inv_product_random_domination(self, rng):
        for _ in range(10**4):
            x, y, xb, yb = rng.uniform(0.05, 5.0, 4)
            lb = su.lb_log_inv_product(x, y, xb, yb)
            assert lb <= math.log1p(1.0 / (x * y)) + 1e-12

    def test_log_ratio_tight_and_examples(self):
        assert su.ub_log_ratio(1, 1, 1, 1) == pytest.approx(math.log(2.0))
        v = su.ub_log_ratio(3.0, 1.0, 1.0, 1.0)
        assert v == pytest.approx(math.log(2.0) + 1.0)
        assert v == pytest.approx(1.6931, abs=1e-4)
        assert v >= math.log(4.0)

    def test_log_ratio_random_domination(self, rng):
        for _ in range(10**4):
            x, y, xb, yb = rng.uniform(0.05, 5.0, 4)
            assert su.ub_log_ratio(x, y, xb, yb) >= math.log1p(x / y) - 1e-12

    def test_ratio_sqrt_tight_and_examples(self):
        assert su.lb_ratio_sqrt(1, 1, 1, 1) == pytest.approx(1.0)
        v = su.lb_ratio_sqrt(4.0, 1.0, 1.0, 1.0)
        assert v == pytest.approx(3.0) and v <= 4.0

    def test_ratio_sqrt_random_domination(self, rng):
        for _ in range(10**4):
            r, w, rb, wb = rng.uniform(0.05, 5.0, 4)
            assert su.lb_ratio_sqrt(r, w, rb, wb) <= r / w + 1e-12

    def test_domain_errors(self):
        for fn in (su.lb_log_inv_product, su.ub_log_ratio, su.lb_ratio_sqrt):
            with pytest.raises(DomainError):
                fn(-1.0, 1.0, 1.0, 1.0)


def _ev_setup(seed, M=3, fill=0.9):
    rng = np.random.default_rng(seed)
    sc = make_scenario(M=M, regime=Regime.EV_OUTAGE)
    ch = sample_channels(sc, seed)
    W = random_feasible_W(sc, rng, fill=fill)
    r = np.array([rates.eve_outage_sinr(W, ch, sc, i) for i in range(M)])
    st = su.ExpansionState.at(W, ch, sc, r=r)
    lay = Layout(M, sc.Nt, with_r=True)
    return sc, ch, W, r, st, lay


def _user_setup(seed, M=3, fill=0.9):
    rng = np.random.default_rng(seed)
    sc = make_scenario(M=M, regime=Regime.USER_OUTAGE)
    ch = sample_channels(sc, seed)
    W = random_feasible_W(sc, rng, fill=fill)
    r = np.array([rates.eve_outage_sinr(W, ch, sc, i) for i in range(M)])
    R = np.array([rates.user_outage_sinr(W, ch, sc, i) for i in range(M)])
    st = su.ExpansionState.at(W, ch, sc, r=r, R=R)
    lay = Layout(M, sc.Nt, with_r=True, with_R=True)
    return sc, ch, W, r, R, st, lay


class TestExpansionState:
    def test_cached_constants_match_definitions(self, rng):
        sc, ch, W, r, st, lay = _ev_setup(31)
        norms = np.sum(np.abs(W) ** 2, axis=1)
        assert np.allclose(st.norms, norms)
        for i in range(sc.M):
            assert st.sinr_user[i] == pytest.approx(
                rates.user_sinr(W, ch, sc, i), rel=1e-12)
            for j in range(sc.M):
                if j == i:
                    continue
                x_ij = r[i] * ch.h_eve_var[j] * norms[j] / (
                    ch.h_eve_var[i] * norms[i])
                assert st.x_pair[i, j] == pytest.approx(x_ij, rel=1e-12)
                assert st.y_pair[i, j] == pytest.approx(
                    x_ij / (1 + x_ij), rel=1e-12)
        assert np.all(st.x_pair[np.eye(sc.M, dtype=bool)] == 0.0)

    def test_min_norm_index(self, rng):
        sc, ch, W, r, R, st, lay = _user_setup(32)
        val, idx = min_norm_sq(W)
        assert st.i_min == idx
        assert np.allclose(st.x_ratio, st.phi / val)


def _fd_wrt_w(fn, lay, x, sc):
    """Finite-difference gradient of a W-only exact function at stacked x."""
    nw = 2 * sc.M * sc.Nt

    def wrapped(z):
        full = x.copy()
        full[:nw] = z
        return fn(unstack_beamformers(full, sc.M, sc.Nt), full)

    return fd_gradient(wrapped, x[:nw].copy())


class TestInstantBounds:
    def test_tightness_domination_gradient(self, rng):
        sc = make_scenario(M=3)
        ch = sample_channels(sc, 33)
        W = random_feasible_W(sc, rng)
        st = su.ExpansionState.at(W, ch, sc)
        lay = Layout(sc.M, sc.Nt)
        x_k = lay.stack(W)
        for i in range(sc.M):
            f_expr, f_trust = su.build_f_lb(st, ch, sc, lay, i)
            g_expr, g_trust = su.build_g_ub(st, ch, sc, lay, i)
            # tightness at the expansion point
            assert f_expr.value(x_k) == pytest.approx(
                rates.user_rate(W, ch, sc, i), abs=1e-9)
            assert g_expr.value(x_k) == pytest.approx(
                rates.eve_rate_instant(W, ch, sc, i), abs=1e-9)
            assert f_trust.value(x_k) < 0.0
            # first-order tightness against finite differences
            g_fd = fd_gradient(
                lambda z: rates.user_rate(
                    unstack_beamformers(z, sc.M, sc.Nt), ch, sc, i), x_k)
            assert np.abs(f_expr.grad(x_k) - g_fd).max() <= \
                1e-4 * max(1.0, np.abs(g_fd).max())
            g_fd = fd_gradient(
                lambda z: rates.eve_rate_instant(
                    unstack_beamformers(z, sc.M, sc.Nt), ch, sc, i), x_k)
            assert np.abs(g_expr.grad(x_k) - g_fd).max() <= \
                1e-4 * max(1.0, np.abs(g_fd).max())
        # domination over random in-trust-region points
        hits = 0
        while hits < 1000:
            Wp = W + 0.3 * (rng.standard_normal(W.shape)
                            + 1j * rng.standard_normal(W.shape))
            xp = lay.stack(Wp)
            for i in range(sc.M):
                f_expr, f_trust = su.build_f_lb(st, ch, sc, lay, i)
                g_expr, g_trust = su.build_g_ub(st, ch, sc, lay, i)
                if f_trust.value(xp) > 0 or (g_trust is not None
                                             and g_trust.value(xp) > 0):
                    continue
                assert f_expr.value(xp) <= rates.user_rate(Wp, ch, sc, i) + 1e-9
                assert g_expr.value(xp) >= \
                    rates.eve_rate_instant(Wp, ch, sc, i) - 1e-9
                hits += 1

    def test_degenerate_expansion_rejected(self, rng):
        sc = make_scenario(M=2)
        ch = sample_channels(sc, 34)
        W = random_feasible_W(sc, rng)
        # beam orthogonal to its own channel: zero signal gain
        h = ch.h_direct[0, 0]
        W[0] -= (np.vdot(h, W[0]) / np.vdot(h, h)) * h
        st = su.ExpansionState.at(W, ch, sc)
        lay = Layout(sc.M, sc.Nt)
        with pytest.raises(DegenerateExpansion):
            su.build_f_lb(st, ch, sc, lay, 0)


class TestTangentBound:
    def test_values(self):
        sc, ch, W, r, st, lay = _ev_setup(35)
        x_k = lay.stack(W, r=r)
        for i in range(sc.M):
            a = su.build_a_ub(st, lay, i)
            assert a.value(x_k) == pytest.approx(math.log1p(r[i]), abs=1e-12)
        # tangent line dominates ln(1+r) on a wide grid
        a0 = su.build_a_ub(st, lay, 0)
        for rv in np.linspace(0.0, 100.0, 500):
            x = x_k.copy()
            x[lay.r_index(0)] = rv
            assert a0.value(x) >= math.log1p(rv) - 1e-12

    def test_example_numbers(self):
        sc, ch, W, r, st, lay = _ev_setup(36, M=2)
        st = su.ExpansionState.at(W, ch, sc, r=np.array([1.0, 1.0]))
        a = su.build_a_ub(st, lay, 0)
        x = lay.stack(W, r=np.array([3.0, 3.0]))
        assert a.value(x) == pytest.approx(math.log(2.0) + 1.0)
        assert a.value(x) >= math.log(4.0)


class TestOutageEquationBound:
    def test_tightness_and_domination(self, rng):
        sc, ch, W, r, st, lay = _ev_setup(37)
        x_k = lay.stack(W, r=r)
        for i in range(sc.M):
            gio = su.build_g_io_lb(st, ch, sc, lay, i)
            assert gio.value(x_k) == pytest.approx(
                rates.eve_outage_gap(W, ch, sc, i, r[i]), abs=1e-9)
            lam = su.build_lambda_lb(st, ch, sc, lay, i, (i + 1) % sc.M)
            expect = math.log1p(r[i] * ch.h_eve_var[(i + 1) % sc.M]
                                * st.norms[(i + 1) % sc.M]
                                / (ch.h_eve_var[i] * st.norms[i]))
            assert lam.value(x_k) == pytest.approx(expect, abs=1e-9)
        hits = 0
        while hits < 1000:
            Wp = W + 0.25 * (rng.standard_normal(W.shape)
                             + 1j * rng.standard_normal(W.shape))
            rp = r * rng.uniform(0.4, 2.5, sc.M)
            xp = lay.stack(Wp, r=rp)
            if any(su.build_w_trust(st, lay, j).value(xp) > 0
                   for j in range(sc.M)):
                continue
            for i in range(sc.M):
                gio = su.build_g_io_lb(st, ch, sc, lay, i)
                assert gio.value(xp) <= \
                    rates.eve_outage_gap(Wp, ch, sc, i, rp[i]) + 1e-9
                hits += 1

    def test_gradient_match(self, rng):
        sc, ch, W, r, st, lay = _ev_setup(38)
        x_k = lay.stack(W, r=r)
        for i in range(sc.M):
            gio = su.build_g_io_lb(st, ch, sc, lay, i)

            def exact(z):
                Wz = unstack_beamformers(z, sc.M, sc.Nt)
                return rates.eve_outage_gap(Wz, ch, sc, i, z[lay.r_index(i)])

            g_fd = fd_gradient(exact, x_k)
            assert np.abs(gio.grad(x_k) - g_fd).max() <= \
                1e-4 * max(1.0, np.abs(g_fd).max())

    def test_single_pair_has_no_cross_terms(self, rng):
        sc = make_scenario(M=1, regime=Regime.EV_OUTAGE)
        ch = sample_channels(sc, 39)
        W = random_feasible_W(sc, np.random.default_rng(39))
        r = np.array([rates.eve_outage_sinr(W, ch, sc, 0)])
        st = su.ExpansionState.at(W, ch, sc, r=r)
        lay = Layout(1, sc.Nt, with_r=True)
        gio = su.build_g_io_lb(st, ch, sc, lay, 0)
        # beta plus the outage-level constant only
        assert len(gio.atoms) == 2
        assert gio.const == pytest.approx(
            ch.h_eve_var[0] * math.log1p(-sc.eps_ev))


class TestRobustBounds:
    def test_ell_and_varphi_tightness(self, rng):
        sc, ch, W, r, R, st, lay = _user_setup(40)
        x_k = lay.stack(W, r=r, R=R)
        for i in range(sc.M):
            ell = su.build_ell_lb(st, ch, lay, i)
            expect = abs(np.vdot(ch.h_nominal[i, i], W[i])) ** 2 / R[i]
            assert ell.value(x_k) == pytest.approx(expect, rel=1e-9)
            vp = su.build_varphi_lb(st, ch, sc, lay, i)
            assert vp.value(x_k) == pytest.approx(
                rates.sinr_margin(W, ch, sc, i, R[i]), abs=1e-9)

    def test_varphi_domination_and_gradient(self, rng):
        sc, ch, W, r, R, st, lay = _user_setup(41)
        x_k = lay.stack(W, r=r, R=R)
        for trial in range(1000):
            Wp = W + 0.3 * (rng.standard_normal(W.shape)
                            + 1j * rng.standard_normal(W.shape))
            Rp = R * rng.uniform(0.5, 2.0, sc.M)
            xp = lay.stack(Wp, r=r, R=Rp)
            i = int(rng.integers(sc.M))
            vp = su.build_varphi_lb(st, ch, sc, lay, i)
            assert vp.value(xp) <= \
                rates.sinr_margin(Wp, ch, sc, i, Rp[i]) + 1e-9
        for i in range(sc.M):
            vp = su.build_varphi_lb(st, ch, sc, lay, i)

            def exact(z):
                Wz = unstack_beamformers(z, sc.M, sc.Nt)
                return rates.sinr_margin(Wz, ch, sc, i, z[lay.R_index(i)])

            g_fd = fd_gradient(exact, x_k)
            assert np.abs(vp.grad(x_k) - g_fd).max() <= \
                1e-4 * max(1.0, np.abs(g_fd).max())

    def test_zero_channel_gives_zero_ell(self, rng):
        sc, ch, W, r, R, st, lay = _user_setup(42, M=2)
        ch.h_nominal[0, 0] = 0.0
        st2 = su.ExpansionState.at(W, ch, sc, r=r, R=R)
        ell = su.build_ell_lb(st2, ch, lay, 0)
        x = lay.stack(W, r=r, R=R)
        assert ell.value(x) == 0.0

    def test_robust_constraints_hold_at_expansion(self, rng):
        # feasibility preservation plus both numeric guards over random
        # simulation-style instances
        for seed in range(50):
            sc, ch, W, r, R, st, lay = _user_setup(100 + seed, M=3,
                                                   fill=float(rng.uniform(0.4, 1.0)))
            cons = su.build_robust_constraints(st, ch, sc, lay)
            x_k = lay.stack(W, r=r, R=R)
            assert len(cons) == 2 * sc.M
            for c in cons:
                assert c.value(x_k) <= 1e-12

    def test_threshold_constraint_value_is_gap(self, rng):
        # at the expansion point the second constraint equals zeta(R_i)
        sc, ch, W, r, R, st, lay = _user_setup(43)
        cons = su.build_robust_constraints(st, ch, sc, lay, eta_scale=0.0)
        x_k = lay.stack(W, r=r, R=R)
        for i in range(sc.M):
            expect = rates.user_outage_gap(W, ch, sc, i, R[i])
            assert cons[2 * i + 1].value(x_k) == pytest.approx(expect, abs=1e-9)

    def test_guard_violation_raised(self, rng):
        sc, ch, W, r, R, st, lay = _user_setup(44, M=2)
        # an absurdly small margin ratio x_i trips the k2 >= 0 guard
        bad = su.ExpansionState(
            W=st.W, r=st.r, R=st.R, norms=st.norms, sig_gain=st.sig_gain,
            denom_user=st.denom_user, sinr_user=st.sinr_user,
            eve_gain=None, denom_eve=None, sinr_eve=None,
            x_pair=st.x_pair, y_pair=st.y_pair,
            phi=np.full(sc.M, 1e-9), x_ratio=np.full(sc.M, 1e-9),
            i_min=st.i_min)
        with pytest.raises(GuardViolation) as exc:
            su.build_robust_constraints(bad, ch, sc, lay)
        assert "k2" in exc.value.details

    def test_rate_term(self):
        sc, ch, W, r, R, st, lay = _user_setup(45)
        A = su.build_rate_term(lay, 0)
        x = lay.stack(W, r=r, R=R)
        x[lay.R_index(0)] = 0.0
        assert A.value(x) == pytest.approx(0.0)
        x[lay.R_index(0)] = 1.0
        assert A.value(x) == pytest.approx(math.log(2.0))
        assert A.is_concave()
        # concavity on a grid
        vals = []
        for Rv in np.linspace(0.1, 10.0, 50):
            x[lay.R_index(0)] = Rv
            vals.append(A.value(x))
        d2 = np.diff(vals, 2)
        assert np.all(d2 <= 1e-12)
