"""Reference values for the unit tests, computed with scipy/mpmath only.

Run once; the output is pasted into reference_values.hpp and frozen.
"""
import math

import mpmath as mp
import numpy as np
from scipy import integrate, optimize, special

mp.mp.dps = 30


def mp_edges(y):
    return (1 - math.sqrt(y)) ** 2, (1 + math.sqrt(y)) ** 2


def mp_density1(x, y):
    lo, hi = mp_edges(y)
    if x <= lo or x >= hi:
        return 0.0
    return math.sqrt((hi - x) * (x - lo)) / (2 * math.pi * y * x)


def mp_cdf(x, y, which):
    # nu_{y,1}: law of XX^* eigenvalues (M x M); nu_{y,2}: X^*X (N x N)
    lo, hi = mp_edges(y)
    atom1 = max(0.0, 1 - 1 / y)
    if which == 1:
        atom = atom1
        dens = lambda t: mp_density1(t, y)
    else:
        atom = max(0.0, 1 - y)
        dens = lambda t: y * mp_density1(t, y)
    if x < 0:
        return 0.0
    mass = 0.0
    if x > lo:
        mass, _ = integrate.quad(dens, lo, min(x, hi), limit=400, epsabs=1e-14, epsrel=1e-13)
    return atom + mass


def stieltjes(z, y, which):
    lo, hi = mp_edges(y)
    dens = (lambda t: mp_density1(t, y)) if which == 1 else (lambda t: y * mp_density1(t, y))
    atom = max(0.0, 1 - 1 / y) if which == 1 else max(0.0, 1 - y)
    re, _ = integrate.quad(lambda t: (dens(t) / (t - z)).real, lo, hi, limit=400, epsabs=1e-14)
    im, _ = integrate.quad(lambda t: (dens(t) / (t - z)).imag, lo, hi, limit=400, epsabs=1e-14)
    return complex(re, im) + atom / (0 - z)


def classical(M, N):
    y = M / N
    K = min(M, N)
    out = []
    for j in range(1, K + 1):
        target = (j - 0.5) / N  # mass of nu_{y,2} to the right
        lo, hi = mp_edges(y)
        f = lambda x: (1 - mp_cdf(x, y, 2)) - target
        out.append(optimize.brentq(f, lo, hi, xtol=1e-15))
    return out


def tw1(s):
    # Bornemann's Nystrom method in mpmath with a Gauss-Legendre rule on [s, b].
    # The kernel Ai((x+y)/2) only dies once x + y is large, so b must clear -s.
    n = 100
    xs, ws = np.polynomial.legendre.leggauss(n)
    a, b = s, max(-s, 0) + 30
    x = [mp.mpf(a) + (mp.mpf(b) - a) * (mp.mpf(t) + 1) / 2 for t in xs]
    w = [(mp.mpf(b) - a) / 2 * mp.mpf(t) for t in ws]
    K = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            K[i, j] = (1 if i == j else 0) - mp.sqrt(w[i]) * mp.airyai((x[i] + x[j]) / 2) / 2 * mp.sqrt(w[j])
    return float(mp.det(K))


def lp_second_moment(p, M):
    return math.exp(math.lgamma(3 / p) + math.lgamma(1 + M / p) - math.lgamma(1 / p) - math.lgamma(1 + (M + 2) / p))


if __name__ == "__main__":
    print("// mp_cdf(x, y, which)")
    for y in (0.25, 0.5, 2.0, 4.0):
        lo, hi = mp_edges(y)
        for which in (1, 2):
            for frac in (0.1, 0.35, 0.5, 0.8, 0.97):
                x = lo + frac * (hi - lo)
                print(f"{{{y!r}, {which}, {x!r}, {mp_cdf(x, y, which)!r}}},")
    print("// stieltjes(z, y): m1, m2")
    for y in (0.5, 2.0):
        for z in (complex(1.0, 0.5), complex(0.3, 0.05), complex(5.0, 1e-3), complex(-1.0, 2.0)):
            m1 = stieltjes(z, y, 1)
            m2 = stieltjes(z, y, 2)
            print(f"{{{y!r}, {z.real!r}, {z.imag!r}, {m1.real!r}, {m1.imag!r}, {m2.real!r}, {m2.imag!r}}},")
    print("// classical locations")
    for M, N in ((6, 12), (12, 6)):
        print(M, N, [repr(v) for v in classical(M, N)])
    print("// TW1 cdf")
    for s in (-5.0, -4.0, -3.0, -2.0, -1.2, 0.0, 1.0, 2.0, 3.0, 4.0):
        print(f"{{{s!r}, {tw1(s)!r}}},")
    print("// lp ball E u_1^2")
    for p, M in ((1.0, 10), (1.0, 200), (1.5, 50), (2.0, 10), (3.0, 30)):
        print(f"{{{p!r}, {M}, {lp_second_moment(p, M)!r}}},")
    print("// Ai")
    for x in (-20.0, -8.5, -3.0, 0.0, 2.0, 7.0, 12.0):
        print(f"{{{x!r}, {float(mp.airyai(x))!r}}},")
