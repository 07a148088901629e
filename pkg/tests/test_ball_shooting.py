import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardyplap import ball_shooting as bs
from hardyplap import ground_state as gs
from hardyplap.exceptions import DomainError, NoSolutionError, ParameterError
from hardyplap.exponents import Params, derive

from conftest import valid_params
from oracles import bessel_first_eigenvalue, fd_first_eigenvalue


def sign_changes(values):
    return int(np.count_nonzero((values[:-1] > 0.0) != (values[1:] > 0.0)))


# --- singular start ----------------------------------------------------------------

def test_start_without_hardy_term_is_regular():
    P = Params(5, 3, 0.0, 1.0)
    assert bs.singular_start(2.5, 1e-6, P, derive(P)) == (2.5, 0.0)


def test_start_follows_power_law():
    P = Params(4, 2, 0.75)
    e = derive(P)
    u, du = bs.singular_start(3.0, 1e-4, P, e)
    assert u == pytest.approx(3.0 * 1e-4 ** -0.5, rel=1e-15)
    assert du == pytest.approx(-0.5 * u / 1e-4, rel=1e-15)


@pytest.mark.parametrize("C, r0", [(0.0, 1e-6), (-1.0, 1e-6), (1.0, 0.0), (1.0, 1.5)])
def test_start_rejects_bad_input(C, r0):
    P = Params(4, 2, 0.5)
    with pytest.raises(DomainError):
        bs.singular_start(C, r0, P, derive(P))


@pytest.mark.parametrize("params", [Params(4, 2, 0.5, 0.5), Params(5, 3, -2.0), Params(6, 1.8, 0.3, 1.0)])
def test_ground_state_near_origin_matches_start(params):
    e = derive(params)
    C1, _ = gs.asymptotic_constants(params)
    r0 = 1e-6
    u_gs = gs.solve(params, r=np.array([r0, 1.0])).profile.u[0]
    u0, _ = bs.singular_start(C1, r0, params, e)
    # leading-order start error is a power of r0 smaller than the start itself
    assert abs(u0 / u_gs - 1.0) <= 1e-4


@pytest.mark.parametrize("params", [Params(4, 2, 0.5, 0.5), Params(5, 3, -2.0), Params(5, 3, 0.0, 1.0),
                                    Params(6, 1.8, 0.3, 1.0), Params(3, 1.875, 0.0, 1.75)])
def test_corrected_start_matches_ground_state(params):
    e = derive(params)
    C1, _ = gs.asymptotic_constants(params)
    r, U, Q = bs.start_state(C1, 1e-6, params, e)
    assert 0.0 < r <= 1e-6
    u_gs = gs.solve(params, r=np.array([r, 1.0])).profile.u[0]
    assert abs(U * r ** -e.gamma1 / u_gs - 1.0) <= 1e-10
    u_lead, _ = bs.singular_start(C1, r, params, e)
    # the correction is resolved: it moves the start by about eta, toward the ground state
    assert abs(u_lead / u_gs - 1.0) <= 2e-6


def test_start_moves_inward_with_amplitude():
    P = Params(4, 2, 0.5, 0.5)
    e = derive(P)
    radii = [bs.start_state(C, 1e-6, P, e)[0] for C in (1.0, 1e2, 1e4, 1e6)]
    assert radii[0] == 1e-6
    assert all(a > b for a, b in zip(radii, radii[1:]))
    # the relative correction sits at eta once the radius is below r0
    r, U, _ = bs.start_state(1e6, 1e-6, P, e)
    assert abs(U / 1e6 - 1.0) == pytest.approx(bs.START_ETA, rel=1e-9)


def test_regular_start_with_two_forcing_terms():
    # for p = 2 the drift is linear in Q, so the quadrature equals the sum of the closed forms
    P = Params(5, 2, 0.0, 0.5, -3.0)
    e = derive(P)
    C = 2.0
    r, U, Q = bs.start_state(C, 1e-3, P, e, eta=1e-3)
    b, c = P.N - P.p, P.p - P.s
    ys = [(-(C ** (e.p_star_s - 1.0)) / (c + b), c), (-(P.lam * C) / (P.p + b), P.p)]
    s0 = math.log(r)
    assert Q == pytest.approx(sum(y * math.exp(k * s0) for y, k in ys), rel=1e-14)
    assert U - C == pytest.approx(sum(y * math.exp(k * s0) / k for y, k in ys), rel=1e-10)


def test_start_state_domain():
    P = Params(4, 2, 0.5)
    with pytest.raises(DomainError):
        bs.start_state(0.0, 1e-6, P, derive(P))
    with pytest.raises(DomainError):
        bs.start_state(1.0, 0.0, P, derive(P))


def test_shot_insensitive_to_start_radius_near_p():
    # the leading-order error would decay only like r0^0.125 here
    P = Params(3, 1.875, 0.0, 1.75)
    C1, _ = gs.asymptotic_constants(P)
    a, b = (bs.shoot(C1, P, r0=r0) for r0 in (1e-6, 5e-7))
    assert a == pytest.approx(b, rel=1e-10)


@pytest.mark.parametrize("params", [Params(4, 2, 0.5, 0.5), Params(5, 3, -2.0), Params(5, 3, 0.0, 1.0),
                                    Params(6, 1.8, 0.3, 1.0)])
def test_integration_reproduces_ground_state(params):
    C1, _ = gs.asymptotic_constants(params)
    traj = bs.integrate_radial(C1, params, r_end=1.0, n_points=201)
    assert traj.r_zero is None
    assert np.all(traj.profile.u > 0.0)
    ref = gs.solve(params, r=traj.profile.r).profile
    # the corrected start leaves a second-order error far below the leading-order one
    assert np.max(np.abs(traj.profile.u / ref.u - 1.0)) <= 1e-9


def test_flux_decreasing_near_origin():
    P = Params(4, 2, 0.5)
    C1, _ = gs.asymptotic_constants(P)
    traj = bs.integrate_radial(C1, P, r_end=1e-3, n_points=400)
    assert np.all(np.diff(traj.profile.flux) < 0.0)


@pytest.mark.parametrize("C", [1e-3, 0.1, 1.0, 30.0, 1e3])
def test_negative_lambda_keeps_u_positive(C):
    P = Params(5, 2, 0.5, 0.0, -3.0)
    traj = bs.integrate_radial(C, P)
    assert traj.r_zero is None
    assert traj.u_end > 0.0


def test_integrate_radial_domain():
    P = Params(4, 2, 0.5)
    with pytest.raises(DomainError):
        bs.integrate_radial(0.0, P)
    with pytest.raises(DomainError):
        bs.integrate_radial(1.0, P, r0=1.0, r_end=0.5)


def test_first_zero_is_located():
    P = Params(5, 2, 0.5, 0.0, 40.0)
    traj = bs.integrate_radial(1.0, P)
    assert traj.r_zero is not None and traj.r_zero < 1.0
    assert traj.profile.r[-1] == traj.r_zero
    u, _ = traj.evaluate(traj.r_zero)
    assert abs(u) <= 1e-10 * np.max(traj.profile.u)
    assert bs.shoot(1.0, P) == pytest.approx(-(1.0 - traj.r_zero), rel=1e-14)


# --- shooting --------------------------------------------------------------------

@pytest.mark.parametrize("C", [1e-2, 1.0, 1e2])
def test_shoot_positive_without_lambda(C):
    assert bs.shoot(C, Params(5, 2, 0.5)) > 0.0


def test_default_bracket_centred_on_ground_state():
    P = Params(5, 2, 0.5, 0.0, 3.0)
    lo, hi = bs.default_bracket(P)
    C1, _ = gs.asymptotic_constants(P.replace(lam=0.0))
    assert math.sqrt(lo * hi) == pytest.approx(C1, rel=1e-12)
    assert hi / lo == pytest.approx(1e6, rel=1e-12)


def test_scan_rejects_bad_bracket():
    with pytest.raises(ParameterError):
        bs.scan(Params(5, 2, 0.5), C_bracket=(2.0, 1.0))


def test_ball_solution(ball_point):
    params, lam1, sol = ball_point
    assert sol.params.lam == pytest.approx(0.3 * lam1)
    scale = float(np.max(sol.profile.u))
    assert abs(sol.boundary_value) <= 1e-10 * scale
    assert sol.boundary_slope < 0.0
    assert np.all(sol.profile.u[:-1] > 0.0)
    assert sol.pohozaev_defect <= 1e-5
    for r in np.linspace(0.1, 0.95, 10):
        assert bs.pohozaev_defect(sol, r) <= 1e-5
    assert sol.start_sensitivity <= 1e-6


def test_single_root_on_default_bracket(ball_point):
    params, _, sol = ball_point
    cs, vals = bs.scan(params)
    assert sign_changes(vals) == 1
    i = int(np.flatnonzero((vals[:-1] > 0) != (vals[1:] > 0))[0])
    assert cs[i] <= sol.amplitude_C <= cs[i + 1]


def test_pohozaev_at_boundary_reduces(ball_point):
    _, _, sol = ball_point
    lhs, rhs = bs.pohozaev_sides(sol, 1.0)
    p = sol.params.p
    assert rhs == pytest.approx((p - 1) / p * abs(sol.boundary_slope) ** p, rel=1e-8)
    assert lhs > 0.0


def test_pohozaev_zero_profile(ball_point):
    _, _, sol = ball_point
    zero = dataclasses.replace(sol, amplitude_C=0.0,
                               evaluate=lambda r: (0.0 * np.asarray(r), 0.0 * np.asarray(r)))
    assert bs.pohozaev_sides(zero, 0.5) == (0.0, 0.0)
    assert bs.pohozaev_defect(zero, 0.5) == 0.0


def test_pohozaev_radius_domain(ball_point):
    _, _, sol = ball_point
    for r in (0.0, sol.r0, 1.5):
        with pytest.raises(DomainError):
            bs.pohozaev_defect(sol, r)


def worst_defect(sol, tol, method):
    tr = bs.integrate_radial(sol.amplitude_C, sol.params, tol=tol, method=method)
    trial = dataclasses.replace(sol, evaluate=tr.evaluate)
    return max(bs.pohozaev_defect(trial, r) for r in np.linspace(0.1, 1.0, 10))


def test_pohozaev_defect_converges_with_tolerance(ball_point):
    _, _, sol = ball_point
    # with the 4/5 pair the defect drops tenfold per decade of tolerance
    rk45 = [worst_defect(sol, tol, "RK45") for tol in (1e-4, 1e-5, 1e-6, 1e-7, 1e-8)]
    assert all(a >= 10.0 * b for a, b in zip(rk45, rk45[1:]))
    # the default order 8 pair converges too, less regularly
    dop = [worst_defect(sol, tol, bs.METHOD) for tol in (1e-4, 1e-7, 1e-10)]
    assert dop[0] >= 1e3 * dop[2] and dop[1] > dop[2]


@pytest.mark.parametrize("lam", [0.0, -1.0])
def test_no_solution_without_positive_lambda(lam):
    P = Params(5, 2, 0.5, 0.0, lam)
    with pytest.raises(NoSolutionError, match="no sign change"):
        bs.solve_ball(P)


@pytest.mark.parametrize("point", [(5, 2, 0.5, 0.0), (3, 1.5, 0.3, 0.0), (6, 2.2, 0.4, 0.5)])
def test_unique_root_for_lambda_fractions(point):
    N, p, mu, s = point
    lam1 = bs.first_eigenvalue(N, p, mu)
    for frac in (0.1, 0.3, 0.6, 0.9):
        _, vals = bs.scan(Params(N, p, mu, s, frac * lam1))
        assert sign_changes(vals) == 1, frac


def resolvable(params, cs, floor=100.0 * bs.DEFAULT_ODE_TOL):
    """Amplitudes whose ``lam = 0`` boundary value is at least ``floor * C``.

    The value is read off the dilated ground state; outward shooting loses
    ``u(1)`` to cancellation against ``C`` below the integration tolerance.
    """
    base = params.replace(lam=0.0)
    e = derive(base)
    C1, _ = gs.asymptotic_constants(base)
    tau = (cs / C1) ** (1.0 / (e.delta - e.gamma1))
    u1 = tau ** e.delta * gs.solve(base, r=tau).profile.u
    return u1 >= floor * cs


@settings(max_examples=6)
@given(valid_params(max_p=3.5, mu_low=-1.0, mu_frac=0.8, s_frac=0.8), st.sampled_from([0.0, -1.0, -10.0]))
def test_nonexistence_for_nonpositive_lambda(params, lam):
    # for lam <= 0 the boundary value lies above the lam = 0 one; with s <= 0.8 p
    # at least 26 of the 40 amplitudes are resolvable at the corners of the box
    cs, vals = bs.scan(params.replace(lam=lam), n=40)
    vals = vals[resolvable(params, cs)]
    assert vals.size >= 10
    assert sign_changes(vals) == 0
    assert np.all(vals > 0.0)


def test_nonexistence_scan_resolves_whole_bracket_at_standard_point():
    params = Params(5, 2, 0.5)
    cs, _ = bs.scan(params, n=40)
    assert np.all(resolvable(params, cs, floor=1e-7))


# --- w trace -----------------------------------------------------------------

def test_w_limit_on_ground_state():
    P = Params(4, 2, 0.5)
    e = derive(P)
    sol = gs.solve(P)
    tr = bs.w_trace(sol.profile, e, sol.h_table.above_gamma1)
    assert abs(tr.limit - e.gamma1 ** (P.p - 1)) <= 1e-4
    near = sol.profile.r <= 1e-4
    assert np.all(np.diff(np.abs(tr.deviation[near])) > 0.0)
    assert tr.rate > 0.0


def test_w_vanishes_without_hardy_term():
    P = Params(5, 3, 0.0, 1.0)
    sol = gs.solve(P)
    tr = bs.w_trace(sol.profile, derive(P))
    assert abs(tr.limit) <= 1e-6
    assert tr.w[0] >= 0.0


@pytest.mark.parametrize("params", [Params(4, 2, 0.5), Params(5, 3, -2.0)])
def test_w_large_radius_limit(params):
    e = derive(params)
    sol = gs.solve(params)
    tr = bs.w_trace(sol.profile, e)
    assert tr.w[-1] == pytest.approx(e.gamma2 ** (params.p - 1), rel=1e-6)


def test_w_on_ball_solution(ball_point):
    _, _, sol = ball_point
    e = sol.exps
    assert abs(sol.w_trace.limit - e.gamma1 ** (e.p - 1)) <= 1e-4
    dev = np.abs(sol.w_trace.deviation[sol.profile.r <= 1e-4])
    assert dev[0] < dev[-1]


# --- first eigenvalue ------------------------------------------------------------

def test_eigenvalue_of_the_unit_ball_laplacian():
    lam = bs.first_eigenvalue(3, 2, 0.0)
    assert lam == pytest.approx(math.pi ** 2, rel=1e-4)
    assert lam == pytest.approx(fd_first_eigenvalue(3, 0.0), rel=1e-4)


@pytest.mark.parametrize("N, mu", [(3, 0.2), (4, 0.5), (5, 0.5), (5, -1.0), (6, 3.5)])
def test_eigenvalue_with_hardy_term_against_bessel_zero(N, mu):
    assert bs.first_eigenvalue(N, 2, mu) == pytest.approx(bessel_first_eigenvalue(N, mu), rel=1e-8)


@pytest.mark.parametrize("N, mu", [(4, 0.5), (5, 0.5), (5, -1.0), (6, 1.0)])
def test_eigenvalue_with_hardy_term_against_finite_differences(N, mu):
    # second differences need the r^{1/2 + nu} edge behaviour with nu >= 1/2
    assert bs.first_eigenvalue(N, 2, mu) == pytest.approx(fd_first_eigenvalue(N, mu), rel=1e-4)


def test_eigenvalue_decreases_with_mu():
    vals = [bs.first_eigenvalue(4, 2, mu) for mu in (-1.0, 0.0, 0.1, 0.2)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@settings(max_examples=8)
@given(valid_params(max_p=4.0))
def test_eigenvalue_positive(params):
    assert bs.first_eigenvalue(params.N, params.p, params.mu, tol=1e-6) > 0.0


def test_eigenvalue_for_p_laplacian_reproduces_zero_at_boundary():
    lam = bs.first_eigenvalue(4, 3, 0.0)
    P = Params(4, 3, 0.0, 0.0, lam)
    traj = bs.integrate_radial(1.0, P, linear=True)
    u_end = traj.u_end if traj.r_zero is None else 0.0
    assert abs(u_end) <= 1e-8
    assert traj.r_zero is None or traj.r_zero == pytest.approx(1.0, abs=1e-8)
