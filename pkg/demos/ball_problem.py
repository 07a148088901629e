"""The Dirichlet problem on the unit ball by singular shooting.

Computes the first eigenvalue of the Hardy operator, solves the ball
problem for several multiples of it, checks the integral identity at the
boundary and shows that the shooting map keeps its sign for lam <= 0.

    python3 demos/ball_problem.py
"""

import numpy as np

from hardyplap import ball_shooting as bs
from hardyplap.exceptions import NoSolutionError
from hardyplap.exponents import Params

N, P_EXP, MU = 5, 2.0, 0.5


def main():
    lam1 = bs.first_eigenvalue(N, P_EXP, MU)
    print(f"first eigenvalue for N={N}, p={P_EXP:g}, mu={MU}: {lam1:.10f}")

    print("\n frac    amplitude C      u'(1)          Pohozaev defect  start sensitivity")
    for frac in (0.1, 0.3, 0.6, 0.9):
        sol = bs.solve_ball(Params(N, P_EXP, MU, 0.0, frac * lam1))
        print(f" {frac:4.1f}  {sol.amplitude_C:14.8f}  {sol.boundary_slope:13.8f}  "
              f"{sol.pohozaev_defect:15.2e}  {sol.start_sensitivity:17.2e}")

    print("\nshooting map u(1) over the amplitude bracket (40 points)")
    for lam in (0.0, -1.0):
        cs, vals = bs.scan(Params(N, P_EXP, MU, 0.0, lam), n=40)
        print(f"  lam = {lam:4.1f}: min u(1) = {vals.min():.3e}, "
              f"sign changes = {int(np.count_nonzero(np.diff(vals > 0)))}")
        try:
            bs.solve_ball(Params(N, P_EXP, MU, 0.0, lam))
        except NoSolutionError as exc:
            print(f"    solve_ball: {exc}")


if __name__ == "__main__":
    main()
