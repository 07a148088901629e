"""Emden-Fowler phase plane: the ground state as a homoclinic orbit.

Maps an explicit solution into (y, z) variables, shows that it stays on
the zero level of the first integral and that y peaks at M, then follows
nearby orbits with the autonomous vector field and reports their drift.

    python3 demos/phase_plane.py
"""

import numpy as np
from scipy.integrate import solve_ivp

from hardyplap import closed_forms as cf
from hardyplap.ef_system import first_integral, h_of, to_ef, vector_field
from hardyplap.exponents import Params, derive


def main():
    P = Params(5, 3, 0.0, 1.0)
    e = derive(P)
    r = np.geomspace(1e-3, 1e3, 7)
    u, du = cf.eval(cf.select(P), P, r)
    print(f"explicit solution at {P} in Emden-Fowler variables (M = {e.M:.10f})")
    print("        r           y            z             H          V")
    for ri, ui, di in zip(r, u, du):
        st = to_ef(ri, ui, di, e)
        V = first_integral(st.y, st.z, P, e)
        print(f"  {ri:8.1e}  {st.y:11.8f}  {st.z: .6e}  {h_of(st, P):10.7f}  {V: .1e}")

    field = vector_field(P, e)
    print("\norbits started inside the homoclinic loop (V < 0), t in [0, 20]")
    for frac in (0.3, 0.6, 0.9):
        y0, z0 = frac * e.M, -(e.delta * frac * e.M) ** (P.p - 1.0)
        sol = solve_ivp(field, (0.0, 20.0), [y0, z0], method="DOP853", rtol=1e-12, atol=1e-16,
                        dense_output=True)
        V = first_integral(*sol.sol(np.linspace(0.0, 20.0, 2001)), P, e)
        print(f"  y0 = {frac:.1f} M: V0 = {V[0]: .6e}, max |V - V0| = {np.max(np.abs(V - V[0])):.1e}")


if __name__ == "__main__":
    main()
