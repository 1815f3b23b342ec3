"""Symbolic single-application oracle for q'' = f(t) q, built directly with sympy.

It shares no code with the package: weights come from the product
formula, kernels are written out stage by stage.
"""
import sympy as sp

h = sp.symbols("h", positive=True)


def weights(ks):
    out = []
    for i, ki in enumerate(ks):
        c = sp.Integer(1)
        for j, kj in enumerate(ks):
            if j != i:
                c *= sp.Rational(ki**2, ki**2 - kj**2)
        out.append(c)
    return out


def _drift(s, w):
    return (sp.expand(s[0] + w * s[1]), s[1])


def _kick(s, w, t, f):
    return (s[0], sp.expand(s[1] + w * f(t) * s[0]))


def _dkd(s, t, w, f):
    s = _drift(s, w / 2)
    s = _kick(s, w, t + w / 2, f)
    return _drift(s, w / 2)


def _kdk(s, t, w, f):
    s = _kick(s, w / 2, t, f)
    s = _drift(s, w)
    return _kick(s, w / 2, t + w, f)


def _power(kern, s, k, f):
    t = sp.Integer(0)
    for _ in range(k):
        s = kern(s, t, h / k, f)
        t += h / k
    return s


def _u(s, n, f, first_kick=None):
    x = 2 * n - 1
    t = sp.Integer(0)
    s = first_kick(s, h / x) if first_kick else _kick(s, h / x, t, f)
    for _ in range(n - 1):
        s = _drift(s, 2 * h / x)
        t += 2 * h / x
        s = _kick(s, 2 * h / x, t, f)
    return _drift(s, h / x)


def even_q(n, f, kernel="ba"):
    """Polynomial q_{2n}(h) from q(0)=0, p(0)=1."""
    kern = _dkd if kernel == "ba" else _kdk
    ks = list(range(1, n + 1))
    return sp.Poly(sp.expand(sum(c * _power(kern, (sp.Integer(0), sp.Integer(1)), k, f)[0]
                                 for c, k in zip(weights(ks), ks))), h)


def odd_q(n, f, first_kick=None):
    ks = [2 * i - 1 for i in range(1, n + 1)]
    return sp.Poly(sp.expand(sum(c * _u((sp.Integer(0), sp.Integer(1)), i + 1, f, first_kick)[0]
                                 for i, c in enumerate(weights(ks)))), h)


def coefficient(poly, power):
    return sp.Rational(poly.coeff_monomial(h**power))


def oscillator(t):
    return t**2 - 3


def hydrogen(t):
    return 1 - 2 / t


def hydrogen_first_kick(s, w):
    """Limit of the first kick at t = 0 with q = 0."""
    return (s[0], s[1] - 2 * w * s[1])
