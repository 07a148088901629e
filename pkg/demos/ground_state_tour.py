"""Whole-space ground states, from the indicial roots to the profile.

Walks one parameter point with an explicit solution and one without:
exponents, the H-flow, the asymptotic constants and the checks that
tie the numerical profile to its asymptotics.

    python3 demos/ground_state_tour.py
"""

import numpy as np

from hardyplap import ground_state as gs
from hardyplap import verify
from hardyplap.exponents import Params, derive


def show_exponents(P):
    e = derive(P)
    print(f"  gamma1 = {e.gamma1:.12f}   gamma2 = {e.gamma2:.12f}")
    print(f"  delta  = {e.delta:.6f}   p*(s) = {e.p_star_s:.6f}   M = {e.M:.10f}")
    return e


def show_profile(sol):
    r = sol.profile.r
    for target in (1e-6, 1e-3, 1.0, 1e3, 1e6):
        i = int(np.argmin(np.abs(np.log(r / target))))
        print(f"  u({r[i]:8.1e}) = {sol.profile.u[i]:.10e}")


def main():
    explicit = Params(4, 2, 0.5, 0.5)
    print(f"explicit family at {explicit}")
    show_exponents(explicit)
    sol = gs.solve(explicit)
    print(f"  C1 = {sol.C1:.12f}  C2 = {sol.C2:.12f}  (both equal the explicit constant)")
    rep = verify.compare_to_closed_form(sol.profile, explicit)
    print(f"  sup relative error against the explicit solution on [1e-2, 1e2]: {rep.measured:.2e}")

    open_point = Params(5, 3, -2.0, 0.0)
    print(f"\nno explicit solution at {open_point}")
    e = show_exponents(open_point)
    table = gs.h_profile(open_point, t_span=6.0, n_points=7)
    print("  H-flow  t      H(t)")
    for t, h in zip(table.t, table.h):
        print(f"        {t:5.1f}  {h: .10f}")
    sol = gs.solve(open_point)
    print(f"  H crosses 0 at t_minus = {sol.t_minus:.10f}; u rises from 0 there on")
    print(f"  C1 = {sol.C1:.10f}  C2 = {sol.C2:.10f}")
    show_profile(sol)
    rep = sol.report
    print(f"  max |V| along the orbit: {rep.max_first_integral:.2e} "
          f"(allowed {rep.first_integral_allowed:.1e}); max y/M = {rep.max_y_over_M:.12f}")
    for check in verify.slope_checks(sol.profile, open_point, e, exclude=0.0):
        print("  " + check.line())


if __name__ == "__main__":
    main()
