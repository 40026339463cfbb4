"""Independent reference computations used as test oracles.

Nothing here imports the package's numerical code: each oracle is a
different route to a quantity the package also computes.
"""
import numpy as np
from scipy import integrate, optimize


def p_laplacian_1d(u, x, s, p, eps, breaks=(), y_max=np.inf):
    """``2 int_{|x-y|>eps} |u(x)-u(y)|^(p-2) (u(x)-u(y)) |x-y|^(-1-sp) dy`` in y.

    Integrated over the two half-lines in the variable y (no pairing of
    opposite rays), with the kernel written for the p-Laplacian directly.
    """
    ux = u(x)

    def f(y):
        d = ux - u(y)
        return abs(d) ** (p - 2) * d * abs(x - y) ** (-1 - s * p)

    total = 0.0
    right = sorted({b for b in breaks if x + eps < b < x + y_max} | {x + eps})
    left = sorted({b for b in breaks if x - y_max < b < x - eps} | {x - eps}, reverse=True)
    for pts, end in ((right, x + y_max), (left, x - y_max)):
        for a, b in zip(pts, pts[1:] + [end]):
            lo, hi = (a, b) if a < b else (b, a)
            total += integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=500)[0]
    return 2.0 * total


def conjugate_by_maximisation(G, w, t_hi=1e4):
    """``sup_t (t w - G(t))`` by bounded scalar maximisation."""
    res = optimize.minimize_scalar(lambda t: -(t * w - G(t)), bounds=(0.0, t_hi), method="bounded",
                                   options={"xatol": 1e-14})
    return -res.fun


def dense_ellipticity(g, g_prime, t_min=1e-6, t_max=1e6, n=200_001):
    t = np.geomspace(t_min, t_max, n)
    r = t * g_prime(t) / g(t)
    return float(r.min()), float(r.max())


def root_mp(fun, lo, hi, digits=40):
    """High-precision root by mpmath bisection-secant (anderson)."""
    import mpmath

    mpmath.mp.dps = digits
    return float(mpmath.findroot(fun, (lo, hi), solver="anderson"))
