import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from hardyplap import closed_forms as cf
from hardyplap import ground_state as gs
from hardyplap._numerics import spow
from hardyplap.ef_system import vector_field
from hardyplap.exceptions import DomainError, ParameterError
from hardyplap.exponents import Params, derive, gamma_mu, t_minus_level
from hardyplap.verify import compare_to_closed_form

from conftest import valid_params
from oracles import h_flow_time

P2_POINT = Params(4, 2, 0.5, 0.5)
MU0_POINT = Params(5, 3, 0.0, 1.0)
OPEN_POINT = Params(5, 3, -2.0, 0.0)


@pytest.fixture(scope="module")
def solutions():
    return {P: gs.solve(P) for P in (P2_POINT, MU0_POINT, OPEN_POINT)}


def algebraic_y(h, params, exps):
    """``y`` from ``(p/p*) y^{p*-p} = -Gamma_mu(h)``."""
    ps, p = exps.p_star_s, params.p
    return (ps * -gamma_mu(h, params) / p) ** (1.0 / (ps - p))


def assert_offsets_monotone(tab):
    left, right = tab.t <= 0.0, tab.t >= 0.0
    assert np.all(np.diff(tab.above_gamma1[left]) > 0.0)
    assert np.all(np.diff(tab.below_gamma2[right]) < 0.0)


# --- time_of_h ---------------------------------------------------------------

def test_time_zero_at_delta():
    for P in (P2_POINT, OPEN_POINT, Params(7, 1.4, 0.2, 0.3)):
        assert gs.time_of_h(P.delta, P) == 0.0


def test_time_closed_value_for_laplacian():
    P = Params(4, 2)
    assert gs.time_of_h(1.5, P) == pytest.approx(0.5 * math.log(3.0), rel=1e-12)
    h = np.array([0.01, 0.5, 1.2, 1.99])
    assert gs.time_of_h(h, P) == pytest.approx(0.5 * np.log(h / (2 - h)), rel=1e-12)


@pytest.mark.parametrize("params", [P2_POINT, MU0_POINT, OPEN_POINT, Params(6, 1.5, -0.7, 1.1),
                                    Params(3, 2.5, 0.01, 0.0)])
def test_time_matches_quad_oracle(params):
    exps = derive(params)
    h = np.linspace(exps.gamma1, exps.gamma2, 13)[1:-1]
    h = h[np.abs(h) > 1e-3]
    ours = gs.time_of_h(h, params)
    ref = np.array([h_flow_time(x, params.N, params.p, params.mu, params.s) for x in h])
    assert np.max(np.abs(ours - ref) / np.maximum(1.0, np.abs(ref))) <= 1e-9


@settings(max_examples=15)
@given(valid_params(), st.lists(st.floats(0.001, 0.999), min_size=2, max_size=100, unique=True))
def test_time_increasing_in_h(params, fractions):
    exps = derive(params)
    h = exps.gamma1 + np.sort(fractions) * (exps.gamma2 - exps.gamma1)
    h = np.unique(h)
    t = gs.time_of_h(h, params)
    assert np.all(np.diff(t) > 0.0)


@pytest.mark.parametrize("offset", [0.0, -0.1])
def test_time_domain(offset):
    exps = derive(OPEN_POINT)
    for h in (exps.gamma1 + offset, exps.gamma2 - offset):
        with pytest.raises(DomainError):
            gs.time_of_h(h, OPEN_POINT)


def test_time_near_endpoints_diverges_logarithmically():
    P = Params(4, 2)
    t = gs.time_of_h(np.array([1e-4, 1e-8, 1e-12]), P)
    assert np.all(np.diff(t) < 0.0)
    assert t[-1] == pytest.approx(0.5 * math.log(1e-12 / 2.0), rel=1e-10)


# --- y_of_h ------------------------------------------------------------------

def test_y_at_delta_is_M():
    for P in (P2_POINT, OPEN_POINT):
        assert gs.y_of_h(P.delta, P) == pytest.approx(derive(P).M, rel=1e-15)


def test_y_value_for_laplacian():
    assert gs.y_of_h(1.5, Params(4, 2)) == pytest.approx(math.sqrt(1.5), rel=1e-12)


@settings(max_examples=20)
@given(valid_params())
def test_y_agrees_with_algebraic_identity(params):
    exps = derive(params)
    h = exps.gamma1 + np.linspace(0.0, 1.0, 202)[1:-1] * (exps.gamma2 - exps.gamma1)
    h = h[h != 0.0]
    y = gs.y_of_h(h, params)
    ref = np.array([algebraic_y(x, params, exps) for x in h])
    assert np.max(np.abs(y - ref)) <= 1e-9 * exps.M


def test_y_decreases_toward_both_ends():
    P = OPEN_POINT
    exps = derive(P)
    left = exps.gamma1 + np.geomspace(1.0, 1e-6, 7) * (P.delta - exps.gamma1)
    right = exps.gamma2 - np.geomspace(1.0, 1e-6, 7) * (exps.gamma2 - P.delta)
    yl = gs.y_of_h(left[1:], P)
    yr = gs.y_of_h(right[1:], P)
    assert np.all(np.diff(yl) < 0.0) and np.all(np.diff(yr) < 0.0)


# --- h_profile -----------------------------------------------------------------

@pytest.mark.parametrize("params", [P2_POINT, OPEN_POINT, Params(6, 1.5, 0.3, 1.0)])
def test_h_profile_structure(params):
    exps = derive(params)
    tab = gs.h_profile(params, t_span=20.0, n_points=401)
    assert tab.h[200] == pytest.approx(exps.delta, abs=1e-12)
    # H rounds to the roots far out; each offset stays strictly monotone on its side
    assert np.all(np.diff(tab.h) >= 0.0)
    assert_offsets_monotone(tab)
    assert np.all(tab.above_gamma1 > 0.0) and np.all(tab.below_gamma2 > 0.0)
    gaps = []
    for span in (5.0, 10.0, 20.0):
        t = gs.h_profile(params, t_span=span, n_points=3)
        gaps.append((t.above_gamma1[0], t.below_gamma2[-1]))
    assert np.all(np.diff(np.array(gaps), axis=0) < 0.0)


def test_h_profile_inverts_time():
    P = Params(6, 2.5, -1.0, 0.5)
    tab = gs.h_profile(P, t_span=8.0, n_points=41)
    inner = np.abs(tab.h) > 1e-6
    # rounding H near the roots costs digits because dt/dH is large there
    assert gs.time_of_h(tab.h[inner], P) == pytest.approx(tab.t[inner], rel=1e-9, abs=1e-10)


def test_h_profile_rejects_bad_span():
    with pytest.raises(ParameterError):
        gs.h_profile(P2_POINT, t_span=0.0)
    with pytest.raises(ParameterError):
        gs.h_profile(P2_POINT, n_points=1)


@pytest.mark.parametrize("params", [OPEN_POINT, Params(4, 1.5, -0.5), Params(7, 4, -3.0, 1.0)])
def test_level_where_h_vanishes(params):
    sol_t = gs.flow(params).t_minus()
    assert sol_t < 0.0
    y0 = gs.y_of_h(np.array([1e-300]), params)[0]
    assert abs(y0 - t_minus_level(params)) <= 1e-8 * derive(params).M
    tab = gs.h_profile(params, t_span=abs(sol_t) + 1.0, n_points=3)
    assert tab.h[0] < 0.0 < tab.h[-1]


# --- asymptotic constants ----------------------------------------------------------

def aligned_tau(params):
    # the numeric profile has its y-maximum at t = 0
    return math.exp(cf.log_argmax_y(cf.select(params), params))


@pytest.mark.parametrize("params", [MU0_POINT, Params(4, 2), Params(6, 1.6, 0.0, 1.2), Params(3, 2.5)])
def test_c1_for_mu0_matches_closed_form(params):
    C1, C2 = gs.asymptotic_constants(params)
    tau = aligned_tau(params)
    c = cf.select(params).constant_c
    assert C1 == pytest.approx(tau ** params.delta * c, rel=1e-6)
    exps = derive(params)
    assert C2 == pytest.approx(tau ** (params.delta - exps.gamma2) * c, rel=1e-6)
    u0 = gs.solve(params, r=np.geomspace(1e-12, 1.0, 50)).profile.u[0]
    assert u0 == pytest.approx(C1, rel=1e-6)


@pytest.mark.parametrize("params", [Params(4, 2, 0.75), P2_POINT, Params(6, 2, -3.0, 1.5)])
def test_constants_for_p2_match_closed_form(params):
    exps = derive(params)
    C1, C2 = gs.asymptotic_constants(params)
    tau = aligned_tau(params)
    c = cf.select(params).constant_c
    assert C1 == pytest.approx(c * tau ** (params.delta - exps.gamma1), rel=1e-6)
    assert C2 == pytest.approx(c * tau ** (params.delta - exps.gamma2), rel=1e-6)


@pytest.mark.parametrize("params", [Params(4, 2, 0.75), P2_POINT, MU0_POINT, Params(8, 3, 0.0, 2.5)])
def test_log_invariant_needs_no_alignment(params):
    exps = derive(params)
    C1, C2 = gs.asymptotic_constants(params)
    expected = (exps.gamma2 - exps.gamma1) * math.log(cf.select(params).constant_c)
    assert abs(gs.log_invariant(C1, C2, exps) - expected) <= 1e-8 * max(1.0, abs(expected))


@given(st.floats(1e-3, 1e3))
def test_log_invariant_unchanged_by_dilation(tau):
    exps = derive(OPEN_POINT)
    C1, C2 = gs.asymptotic_constants(OPEN_POINT)
    # u^tau(r) = tau^delta u(tau r) has constants tau^{delta-gamma_i} C_i
    D1 = tau ** (exps.delta - exps.gamma1) * C1
    D2 = tau ** (exps.delta - exps.gamma2) * C2
    base = gs.log_invariant(C1, C2, exps)
    assert gs.log_invariant(D1, D2, exps) == pytest.approx(base, abs=1e-10 * max(1.0, abs(base)))


def test_constants_read_off_profile(solutions):
    for P, sol in solutions.items():
        prof, e = sol.profile, sol.exps
        assert prof.u[0] * prof.r[0] ** e.gamma1 == pytest.approx(sol.C1, rel=1e-4)
        assert prof.u[-1] * prof.r[-1] ** e.gamma2 == pytest.approx(sol.C2, rel=1e-4)
        grad = abs(prof.du_dr[-1]) * prof.r[-1] ** (e.gamma2 + 1)
        assert grad == pytest.approx(e.gamma2 * sol.C2, rel=1e-4)


# --- solve ----------------------------------------------------------------------

@pytest.mark.parametrize("params", [P2_POINT, MU0_POINT])
def test_solve_matches_closed_form(solutions, params):
    rep = compare_to_closed_form(solutions[params].profile, params)
    assert rep.measured <= 1e-6


def test_solve_open_point_report(solutions):
    sol = solutions[OPEN_POINT]
    rep, exps = sol.report, sol.exps
    assert rep.max_first_integral <= 1e-9
    assert rep.max_ode_residual <= 1e-6
    assert rep.slope_fit_0 == pytest.approx(-exps.gamma1, abs=1e-3)
    assert rep.slope_fit_inf == pytest.approx(-exps.gamma2, abs=1e-3)
    assert rep.t_minus_level_error <= 1e-8


def test_solution_invariants(solutions):
    for P, sol in solutions.items():
        e, rep = sol.exps, sol.report
        assert rep.monotone and rep.z_sign_ok
        assert rep.max_first_integral <= rep.first_integral_allowed
        assert rep.max_y_over_M <= 1 + 1e-9
        assert rep.identity_residual <= 1e-9
        assert sol.C1 > 0.0 and sol.C2 > 0.0
        tab = sol.h_table
        assert np.all(np.diff(tab.h) >= 0.0)
        assert_offsets_monotone(tab)
        assert np.all(tab.above_gamma1 > 0.0) and np.all(tab.below_gamma2 > 0.0)
        assert np.all(sol.profile.u > 0.0)
        assert (sol.t_minus is not None) == (P.mu < 0.0)
        i = int(np.argmin(np.abs(sol.t)))
        assert sol.y[i] == pytest.approx(e.M, rel=1e-10)


def test_h_vanishes_at_t_minus():
    fl = gs.flow(OPEN_POINT)
    tm = fl.t_minus()
    theta, _ = fl.invert(np.array([tm]))
    v, sigma, _, _ = fl.chart(theta)
    assert abs(sigma[0]) <= 1e-8


def test_profile_flux_consistent(solutions):
    for P, sol in solutions.items():
        prof = sol.profile
        flux = prof.r ** (P.N - 1) * spow(prof.du_dr, P.p - 1)
        assert np.max(np.abs(flux / prof.flux - 1.0)) <= 1e-12


@pytest.mark.parametrize("params", [P2_POINT, OPEN_POINT])
def test_trajectory_matches_direct_integration(params):
    exps = derive(params)
    t0, t1 = -3.0, 3.0
    sol = gs.solve(params, r=np.exp(np.linspace(t0, t1, 61)))
    ivp = solve_ivp(vector_field(params, exps), (t0, t1), [sol.y[0], sol.z[0]], method="DOP853",
                    rtol=1e-13, atol=1e-15, t_eval=sol.t)
    assert ivp.success
    assert np.max(np.abs(ivp.y[0] - sol.y)) <= 1e-7 * exps.M
    scale = (exps.delta * exps.M) ** (params.p - 1)
    assert np.max(np.abs(ivp.y[1] - sol.z)) <= 1e-7 * scale


def test_equality_case_on_ground_state():
    P = OPEN_POINT
    sol = gs.solve(P, r=np.exp(np.linspace(-0.5, 0.5, 101)))
    eps = np.abs(sol.y - sol.exps.M)
    gap = np.abs(sol.exps.delta * sol.y + spow(sol.z, 1 / (P.p - 1)))
    assert np.all(gap <= 10.0 * np.sqrt(eps) + 1e-10)


def test_solve_rejects_lambda():
    with pytest.raises(ParameterError):
        gs.solve(Params(4, 2, 0.5, lam=1.0))


@pytest.mark.parametrize("r", [np.array([1.0]), np.array([2.0, 1.0]), np.array([0.0, 1.0])])
def test_solve_rejects_bad_grid(r):
    with pytest.raises(ParameterError):
        gs.solve(P2_POINT, r=r)


def test_default_grid():
    r = gs.default_grid()
    assert r.size == 2001 and r[0] == pytest.approx(1e-6) and r[-1] == pytest.approx(1e6)
    with pytest.raises(ParameterError):
        gs.default_grid(1.0, 0.5)


def test_wide_grid_stays_accurate():
    P = Params(5, 2.5, -1.0, 0.5)
    sol = gs.solve(P, r=np.geomspace(1e-30, 1e30, 201))
    e = sol.exps
    assert np.all(sol.profile.u > 0.0) and np.all(np.isfinite(sol.profile.u))
    assert sol.profile.u[0] * 1e-30 ** e.gamma1 == pytest.approx(sol.C1, rel=1e-10)
    assert sol.profile.u[-1] * 1e30 ** e.gamma2 == pytest.approx(sol.C2, rel=1e-10)
