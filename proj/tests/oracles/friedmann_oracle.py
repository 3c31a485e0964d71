"""Independent check of the effective radiation density of the extended
Friedmann equation, integrated with scipy's Radau in w = ln(H^2/H0^2)
against s = ln(1+z).

H^2 = E(z) - 6 eps P with P = 2 H Hdd + 6 H^2 Hd - Hd^2; in (s, w) form
P = H^4 (w'' + 3/4 w'^2 - 3 w'), which gives the second-order ODE below.
For eps > 0 the linearised fast mode oscillates with frequency ~ (6 eps)^(-1/2)/H
in s; the loose absolute tolerance on w' lets Radau damp it instead of
resolving it, which is what tracking the slow solution requires.
"""
import numpy as np
from scipy.integrate import solve_ivp

OL, OM, OR = 0.6999, 0.3, 1e-4


def E(s):
    x = np.exp(s)
    return OL + OM * x**3 + OR * x**4


def dE(s):
    x = np.exp(s)
    return 3 * OM * x**3 + 4 * OR * x**4


def omega_r_tilde(eps, rtol=1e-9):
    def rhs(s, y):
        w, v = y
        return [v, 3 * v - 0.75 * v * v + (E(s) * np.exp(-w) - 1) * np.exp(-w) / (6 * eps)]

    def jac(s, y):
        w, v = y
        ew = np.exp(-w)
        return [[0.0, 1.0], [(1 - 2 * E(s) * ew) * ew / (6 * eps), 3 - 1.5 * v]]

    y0 = [0.0, dE(0.0) / E(0.0)]
    zs = np.logspace(7, 9, 65)
    sol = solve_ivp(rhs, (0.0, np.log1p(1e9)), y0, method="Radau", jac=jac, rtol=rtol, atol=[1e-11, 1e-3],
                    t_eval=np.log1p(zs), dense_output=False)
    assert sol.success, sol.message
    a = 1 / (1 + zs)
    h2 = np.exp(sol.y[0])
    omr = (h2 - OL - OM * a**-3) * a**4
    return omr.mean(), np.max(np.abs(omr / omr.mean() - 1))


if __name__ == "__main__":
    for eps in (1e-18, 1e-17, 1e-16, 1e-15):
        o, r = omega_r_tilde(eps)
        print(f"eps={eps:.0e}  Omega_r_tilde={o:.10e}  ratio={o / OR:.8f}  spread={r:.2e}")
