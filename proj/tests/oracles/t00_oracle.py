"""Per-mode energy density of a conformally coupled scalar on FLRW.

Route: lapse variation of the mode-reduced action, rho = -(1/a^4) dS/dN at N = 1.
"""
import sympy as sp

tau = sp.symbols('tau', real=True)
k, m, xi = sp.symbols('k m xi', positive=True)
N = sp.Function('N')(tau)
a = sp.Function('a')(tau)
p1 = sp.Function('p1')(tau)
p2 = sp.Function('p2')(tau)

# proper time dt = N a dtau; R = 6 (a_tt/a + a_t^2/a^2), positive for de Sitter
d_t = lambda f: sp.diff(f, tau) / (N * a)
a_t = d_t(a)
a_tt = d_t(a_t)
R = 6 * (a_tt / a + a_t**2 / a**2)

L = sp.Rational(1, 2) * N * a**4 * (sp.diff(p1, tau) * sp.diff(p2, tau) / (N**2 * a**2)
                                    - (k**2 / a**2 + m**2 + xi * R) * p1 * p2)

# Euler-Lagrange operator with respect to N
dLdN = sp.diff(L, N) - sp.diff(sp.diff(L, sp.diff(N, tau)), tau) \
    + sp.diff(sp.diff(L, sp.diff(N, tau, 2)), tau, 2)
rho = -dLdN / a**4
rho = rho.subs(N, 1).doit()
rho = rho.subs({sp.Derivative(N, (tau, 2)): 0, sp.Derivative(N, tau): 0}).doit()

c1 = sp.Function('c1')(tau)
c2 = sp.Function('c2')(tau)
rho = rho.subs({p1: c1 / a, p2: c2 / a}).doit()
# impose the mode equation c'' = -(k^2 + m^2 a^2 + (xi - 1/6) R a^2) c
Rconf = 6 * sp.diff(a, tau, 2) / a**3
for c in (c1, c2):
    rho = rho.subs(sp.Derivative(c, (tau, 2)),
                   -(k**2 + m**2 * a**2 + (xi - sp.Rational(1, 6)) * Rconf * a**2) * c)
rho = sp.simplify(sp.expand(rho.subs(xi, sp.Rational(1, 6))))
print('rho (xi=1/6) =', rho)
target = (sp.diff(c1, tau) * sp.diff(c2, tau) + (k**2 + m**2 * a**2) * c1 * c2) / (2 * a**4)
print('difference to (|chi\'|^2 + omega^2 |chi|^2)/(2 a^4):', sp.simplify(rho - target))
