"""Adiabatic (WKB) expansion of the per-mode energy 1/2(|chi'|^2 + omega^2 |chi|^2).

chi = exp(-i int Omega)/sqrt(2 Omega),  Omega^2 = omega^2 - 1/2 (Omega''/Omega - 3/2 (Omega'/Omega)^2).
Mode energy: E = (Omega^2 + omega^2 + Omega'^2/(4 Omega^2)) / (4 Omega).
Series are coefficient lists in the adiabatic order (index = number of time derivatives), truncated
at 4. Coefficients are Laurent polynomials in u = 1/omega and w1..w6 (conformal-time derivatives
of omega), so every operation stays polynomial.
"""
import sympy as sp

ORDER = 4
u = sp.symbols('u', positive=True)
w = sp.symbols('w0:8')


def dt(c):
    # d/dtau: du = -u^2 w1, dw_i = w_{i+1}
    return sp.expand(sp.diff(c, u) * (-u**2 * w[1]) + sum(sp.diff(c, w[i]) * w[i + 1] for i in range(1, 7)))


def D(s):
    out = [0] * (ORDER + 1)
    for n, c in enumerate(s[:-1]):
        out[n + 1] = dt(c)
    return out


def add(*ss):
    return [sp.expand(sum(c)) for c in zip(*ss)]


def scale(s, f):
    return [sp.expand(f * c) for c in s]


def mul(x, y):
    out = [0] * (ORDER + 1)
    for i in range(ORDER + 1):
        for j in range(ORDER + 1 - i):
            out[i + j] += x[i] * y[j]
    return [sp.expand(c) for c in out]


def inv(x, x0_inv):
    out = [x0_inv] + [0] * ORDER
    for n in range(1, ORDER + 1):
        out[n] = sp.expand(-sum(x[j] * out[n - j] for j in range(1, n + 1)) * x0_inv)
    return out


def sqrt(x, root0):
    # root0 is sqrt(x[0]) given as 1/u
    out = [root0] + [0] * ORDER
    for n in range(1, ORDER + 1):
        acc = x[n] - sum(out[j] * out[n - j] for j in range(1, n))
        out[n] = sp.expand(acc * u / 2)
    return out


const = lambda c: [c] + [0] * ORDER
omega2 = const(u**-2)
Omega = const(1 / u)
for _ in range(2):
    dO = D(Omega)
    iO = inv(Omega, u)
    q = add(mul(D(dO), iO), scale(mul(mul(dO, iO), mul(dO, iO)), -sp.Rational(3, 2)))
    Omega = sqrt(add(omega2, scale(q, -sp.Rational(1, 2))), 1 / u)
dO = D(Omega)
iO = inv(Omega, u)
num = add(mul(Omega, Omega), omega2, scale(mul(mul(dO, dO), mul(iO, iO)), sp.Rational(1, 4)))
E = scale(mul(num, iO), sp.Rational(1, 4))

W = sp.symbols('W', positive=True)
show = lambda c: sp.expand(c.subs(u, 1 / W))
print('odd orders:', E[1], E[3], Omega[1], Omega[3])
print('E0 =', show(E[0]))
print('E2 =', show(E[2]))
print('E4 =', show(E[4]))
print('Omega2 =', show(Omega[2]))
print('Omega4 =', show(Omega[4]))

vals = {u: sp.Rational(2, 3), w[1]: sp.Rational(1, 5), w[2]: -sp.Rational(1, 7),
        w[3]: sp.Rational(1, 3), w[4]: sp.Rational(2, 9)}
print('frozen at omega=3/2, w1..w4=(1/5,-1/7,1/3,2/9): E2 =', sp.N(E[2].subs(vals), 17),
      ' E4 =', sp.N(E[4].subs(vals), 17))
