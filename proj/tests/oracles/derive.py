"""Independent reference values for the unit tests (scipy / mpmath).

Run: python3 tests/oracles/derive.py
The printed numbers are frozen into the C++ tests.
"""
import math

import mpmath as mp
import numpy as np
from scipy import integrate, optimize, stats

mp.mp.dps = 30

GG = dict(a=3.33246873, b=0.67977335, c=0.3645056)
X = dict(p0=0.5605836, w=(0.7193306, 0.2806694), mu=(8.590078, 9.603317), s=(1.316284, 0.2598194), k=0.29504)
Y = dict(p0=0.1683231, w=(0.3142661, 0.6857334), mu=(-0.05958437, 0.9696933), s=(1.1458589, 0.7298423), k=1.23178)


def ncdf(z):
    return 0.5 * math.erfc(-z / math.sqrt(2))


def nsf(z):
    return 0.5 * math.erfc(z / math.sqrt(2))


def npdf(z):
    return math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)


def gg():
    return stats.gengamma(GG["a"], GG["b"], scale=GG["c"])


def section(name):
    print(f"\n# {name}")


section("generalized gamma")
d = gg()
for x in (0.25, 1.0, 2.5, 6.0):
    print(f"pdf({x}) = {d.pdf(x):.15g}   cdf({x}) = {d.cdf(x):.15g}")
print(f"mean = {d.mean():.15g}")
print(f"q(0.5) = {d.ppf(0.5):.15g}  q(0.99) = {d.ppf(0.99):.15g}")


def sev_survival(m, x, zeta):
    """1 - F(x | zeta) straight from the mixture definition."""
    shift = m["k"] * math.log1p(365 * zeta)
    tot = m["w"][0] + m["w"][1]
    s = sum(w / tot * nsf((math.log(x) - mu - shift) / sg) for w, mu, sg in zip(m["w"], m["mu"], m["s"]))
    return (1 - m["p0"]) * s


def sev_moment(m, zeta, order):
    # E[X^r] = ∫ r x^{r-1} (1 - F(x)) dx on (0, ∞), in log space u = ln x
    f = lambda u: order * math.exp(order * u) * sev_survival(m, math.exp(u), zeta)
    return integrate.quad(f, -80, 60, points=[0, 10, 20], limit=500, epsabs=0, epsrel=1e-13)[0]


section("conditional severity moments (quadrature of 1 - F)")
for name, m in (("X", X), ("Y", Y)):
    for z in (0.0, 0.5, 2.0):
        print(f"E[{name}|{z}] = {sev_moment(m, z, 1):.15g}   E[{name}^2|{z}] = {sev_moment(m, z, 2):.15g}")


def debye1(th):
    return integrate.quad(lambda t: t / np.expm1(t), 0, th)[0] / th


def frank_tau(th):
    return 1 - 4 / th * (1 - debye1(th))


section("frank copula")
th = 1.413523
print(f"tau({th}) = {frank_tau(th):.15g}")
print(f"theta(0.3) = {optimize.brentq(lambda t: frank_tau(t) - 0.3, 1e-6, 50, xtol=1e-15):.15g}")
print(f"tau(-4) = {frank_tau(-4.0):.15g}")


def frank_cdf(u, v, th):
    return -1 / th * math.log(1 + math.expm1(-th * u) * math.expm1(-th * v) / math.expm1(-th))


print(f"C(0.3, 0.7) = {frank_cdf(0.3, 0.7, th):.15g}")


def frank_pdf(u, v, th):
    num = -th * math.expm1(-th) * math.exp(-th * (u + v))
    den = (math.expm1(-th) + math.expm1(-th * u) * math.expm1(-th * v)) ** 2
    return num / den


print(f"c(0.3, 0.7) = {frank_pdf(0.3, 0.7, th):.15g}")


def mix_cdf_pdf(m, u):
    """Positive-part CDF and density of ln(amount) at u (no zero mass, no shift)."""
    tot = m["w"][0] + m["w"][1]
    F = sum(w / tot * ncdf((u - mu) / sg) for w, mu, sg in zip(m["w"], m["mu"], m["s"]))
    f = sum(w / tot * npdf((u - mu) / sg) / sg for w, mu, sg in zip(m["w"], m["mu"], m["s"]))
    return F, f


def frank_product_moment():
    # E[X~ Y~] = ∫∫ x y c(F_X(x), F_Y(y)) dF_X dF_Y over the positive parts, in log space;
    # F_X(x) = p0 + (1 - p0) G(ln x)
    p0x, p0y = X["p0"], Y["p0"]

    def integrand(uy, ux):
        Gx, gx = mix_cdf_pdf(X, ux)
        Gy, gy = mix_cdf_pdf(Y, uy)
        cu = p0x + (1 - p0x) * Gx
        cv = p0y + (1 - p0y) * Gy
        return math.exp(ux + uy) * frank_pdf(cu, cv, th) * (1 - p0x) * gx * (1 - p0y) * gy

    return integrate.dblquad(integrand, -4, 24, -12, 14, epsabs=0, epsrel=1e-10)[0]


section("frank product moment (reference severity margins, theta 1.413523)")
print(f"E[XY] = {frank_product_moment():.12g}")


def first_moment(m, zeta):
    shift = m["k"] * math.log1p(365 * zeta)
    tot = sum(m["w"])
    return (1 - m["p0"]) * sum(w / tot * math.exp(mu + shift + sg * sg / 2) for w, mu, sg in zip(m["w"], m["mu"], m["s"]))


def second_moment(m, zeta):
    shift = m["k"] * math.log1p(365 * zeta)
    tot = sum(m["w"])
    return (1 - m["p0"]) * sum(w / tot * math.exp(2 * (mu + shift) + 2 * sg * sg) for w, mu, sg in zip(m["w"], m["mu"], m["s"]))


section("single open claim, t = 2, occurrence 1.2, reporting delay 0.5")
a1, a2, b1, b2, t = 0.045692, 0.041744, 0.06, 0.06, 2
T, xi = 1.2, 0.5
lo, hi = t - T - xi, t + 2 - 1 - T - xi
mass = d.cdf(hi) - d.cdf(lo)
A1 = lambda x: math.exp(a1 * x - b1 * (x - t))
A2 = lambda x: math.exp(a2 * x - b2 * (x - t))
m1 = integrate.quad(lambda v: (A1(T + xi + v) * first_moment(X, v) + A2(T + xi + v) * first_moment(Y, v)) * d.pdf(v),
                    lo, hi, epsabs=0, epsrel=1e-13)[0] / mass
m2 = integrate.quad(lambda v: (A1(T + xi + v) ** 2 * second_moment(X, v)
                               + 2 * A1(T + xi + v) * A2(T + xi + v) * first_moment(X, v) * first_moment(Y, v)
                               + A2(T + xi + v) ** 2 * second_moment(Y, v)) * d.pdf(v),
                    lo, hi, epsabs=0, epsrel=1e-13)[0] / mass
print(f"window = ({lo:.15g}, {hi:.15g}]  mass = {mass:.15g}")
print(f"cell(2,2) mean = {m1:.15g}  second = {m2:.15g}  sd = {math.sqrt(m2 - m1 * m1):.15g}")

section("ibnr count proportion for power trend, exponential reporting mean m on horizon 1")
m = 1.5219104
for g in (0.5, 1.0, 1.5):
    val = integrate.quad(lambda s: g * s ** (g - 1) * math.exp(-(1 - s) / m), 0, 1)[0]
    print(f"gamma {g}: {val:.6f}")

section("mack, 3x3 cumulative triangle")
C = [[100.0, 150.0, 165.0], [110.0, 168.0], [120.0]]
f1 = (150 + 168) / (100 + 110)
f2 = 165 / 150
print(f"f1 = {f1:.15g} f2 = {f2:.15g}")
ult = [165.0, 168 * f2, 120 * f1 * f2]
print(f"reserve = {sum(u - c[-1] for u, c in zip(ult, C)):.15g}")

section("ks two-sample, a = 1..10, b = 6..15 (scipy, asymptotic)")
r = stats.ks_2samp(np.arange(1, 11), np.arange(6, 16), method="asymp")
print(f"D = {r.statistic:.15g} p = {r.pvalue:.15g}")


section("hazard and truncated cdf (reference settlement delay)")
d = gg()
print(f"h(0.5) = {d.pdf(0.5) / d.sf(0.5):.15g}")
print(f"truncated cdf at 2 on (1, 3] = {(d.cdf(2) - d.cdf(1)) / (d.cdf(3) - d.cdf(1)):.15g}")
print(f"4^1.2 = {4 ** 1.2:.15g}  e^-0.12 = {math.exp(-0.12):.15g}  e^(0.045692*12) = {math.exp(0.045692 * 12):.15g}")
sh = X["k"] * math.log(366)
x = math.exp(X["mu"][0] + sh)
f = X["p0"] + (1 - X["p0"]) * (X["w"][0] * 0.5 + X["w"][1] * ncdf((math.log(x) - X["mu"][1] - sh) / X["s"][1]))
print(f"severity cdf at zeta 1, x = exp(mu1 + kappa ln 366): {f:.15g}")
