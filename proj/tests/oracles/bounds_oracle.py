"""Independent high-precision evaluation of the bound formulas.

Writes tests/golden/bounds.txt as `name value` lines. Run from the repository
root: python3 tests/oracles/bounds_oracle.py
"""
import os

from mpmath import mp, mpf, sqrt, log, exp, ceil, e, inf

mp.dps = 40


def step(alpha, h, xi, k):
    return alpha / (k + h) ** xi


def eps_tilde_terms(alpha, h, xi, nu, M, N, sb2, sh2, u, d, f, k, delta, u_exp=4):
    kp = k + 1
    fv = f(delta / 2, k)
    g = 24 * u**4 * max(sb2, alpha * (1 + M) * sh2 * h ** (1 - xi) * fv / ((1 - xi) * kp**xi))
    t1 = g / (nu**2 * kp) * log(2 / delta)
    t2 = 3 * u**u_exp * d * sb2 / (nu**2 * kp)
    t3 = 9 * h**xi * (1 + M) * fv / (2 * alpha * kp ** (2 - xi)) * (3 + xi**2 / (1 - xi / 2) ** 2)
    t4 = 3 * h ** (2 - 2 * xi) * alpha**2 * N**2 * fv**2 * (1 + M) / (2 * nu**2 * kp ** (2 * xi) * (1 - xi) ** 2)
    t5 = 3 * h ** (1 - xi) * u**4 * alpha * d * (1 + M) * sh2 * fv / (kp ** (1 + xi) * (1 - xi))
    return g, t1 + t2 + t3 + t4 + t5


def k0(alpha, h, xi, R, f, k, delta):
    if R == inf:
        return 0
    v = ceil((alpha * f(delta / 2, k) / R**2) ** (1 / xi) - h)
    return int(min(max(v, 0), k + 1))


def eps_bar(alpha, h, xi, R, f, k, delta):
    kz = k0(alpha, h, xi, R, f, k, delta)
    if kz == 0:
        return mpf(0)
    ex = 1 - xi / 2
    br = (kz - 1 + h) ** ex - (h - 1) ** ex
    return alpha * f(delta, kz - 1) * br**2 / (ex**2 * (k + 1) ** 2)


def crude(alpha, h, xi, f, k, delta):
    ex = 1 - xi / 2
    return alpha * h ** (2 - xi) / ex**2 * f(delta, k + 1) / (k + 1) ** xi


def f_additive(sigma2, gamma_c, mu, alpha, h, xi, c_d, x0, L, delta, k,
               u_cM=1, l_cM=1, u_Mc=1, l_cs=1, u_cs=1):
    gt = gamma_c * sqrt(1 + mu * u_cs**2) / sqrt(1 + mu * l_cs**2)
    D = 2 * (1 - gt)
    c1 = 16 * sigma2 * u_Mc**2 * u_cM**2 * alpha / (1 - gt)
    c2 = u_cM**2 / l_cM**2
    c5 = 16 * e * u_cM**2 * c_d * sigma2 * L * alpha / (mu * l_cs**2 * (1 - gt))
    c6 = 32 * u_cM**2 * sigma2 * u_Mc**2 * alpha / (1 - gt)
    # The summand is log-concave in t = i + h; scan until it has fallen far
    # past its peak, which also certifies the tail.
    best = mpf(0)
    i = 0
    while True:
        t = i + h
        v = c2 * x0 * t**xi / alpha * exp(-D * alpha * (t ** (1 - xi) - h ** (1 - xi)) / (2 * (1 - xi)))
        best = max(best, v)
        if i > 10 and v < best * mpf("1e-6"):
            break
        i += 1
    d1 = best
    return c1 * log(1 / delta) / alpha + d1 + (c5 + c6 * log(k + 1)) / alpha, d1


def f_multiplicative(u0, beta4, alpha, h, xi, k, delta):
    a0 = step(alpha, h, xi, 0)
    s = sum(step(alpha, h, xi, j) for j in range(k + 1))
    return sqrt((u0 / a0**2 + 4 * beta4 * s) / delta)


def main():
    out = []

    def put(name, v):
        out.append(f"{name} {mp.nstr(v, 25, min_fixed=-inf, max_fixed=inf)}")

    # Set A: globally smooth, constant envelope.
    one = mpf(1)
    fA = lambda dl, k: mpf(10)
    a, h, xi = one, mpf(2), mpf("0.5")
    k, dl = 99, mpf("0.1")
    g, et = eps_tilde_terms(a, h, xi, one, one, one, one, one, one, mpf(2), fA, k, dl)
    put("A.g", g)
    put("A.eps_tilde", et)
    put("A.eps_bar", mpf(0))
    put("A.main", et)
    cr = crude(a, h, xi, fA, k, dl)
    put("A.crude", cr)
    put("A.combined", min(et, cr))

    # Set B: same with R = 2, so k0 is interior.
    R = mpf(2)
    kz = k0(a, h, xi, R, fA, k, dl)
    eb = eps_bar(a, h, xi, R, fA, k, dl)
    put("B.k0", mpf(kz))
    put("B.eps_tilde", et)
    put("B.eps_bar", eb)
    mb = (sqrt(et) + sqrt(eb)) ** 2
    put("B.main", mb)
    put("B.crude", cr)
    put("B.combined", min(mb, cr))

    # Set C: non-unit norm constant, both exponent conventions.
    u = mpf("1.5")
    _, e4 = eps_tilde_terms(a, h, xi, one, one, one, one, one, u, mpf(2), fA, k, dl, 4)
    _, e2 = eps_tilde_terms(a, h, xi, one, one, one, one, one, u, mpf(2), fA, k, dl, 2)
    put("C.eps_tilde_u4", e4)
    put("C.eps_tilde_u2", e2)

    # Additive envelope with unit norm constants.
    fa, d1 = f_additive(one, mpf("0.5"), mpf("0.1"), mpf(6), mpf(16), xi, mpf(4), one, one, dl, 1000)
    put("additive.f", fa)
    put("additive.d1", d1)
    # Same inputs with the smoothing norm equal to the contraction norm.
    m = mpf("0.1")
    fs, _ = f_additive(one, mpf("0.5"), m, mpf(6), mpf(16), xi, mpf(4), one, one, dl, 1000,
                       u_cM=sqrt(1 + m), l_cM=sqrt(1 + m), u_Mc=1 / sqrt(1 + m))
    put("additive_same_norm.f", fs)

    # Main bound driven by the additive envelope: N = 0, sigma_hat = 1, R = 50.
    fenv = lambda dd, kk: f_additive(one, mpf("0.5"), mpf("0.1"), mpf(6), mpf(16), xi, mpf(4), one, one, dd, kk)[0]
    g6, et6 = eps_tilde_terms(mpf(6), mpf(16), xi, one, one, mpf(0), one, one, one, mpf(2), fenv, 1000, dl)
    put("D.eps_tilde", et6)
    put("D.k0", mpf(k0(mpf(6), mpf(16), xi, mpf(50), fenv, 1000, dl)))
    eb6 = eps_bar(mpf(6), mpf(16), xi, mpf(50), fenv, 1000, dl)
    put("D.eps_bar", eb6)
    put("D.crude", crude(mpf(6), mpf(16), xi, fenv, 1000, dl))

    # Multiplicative envelope.
    put("mult.f_small", f_multiplicative(one, one, one, mpf(2), xi, 2, mpf("0.25")))
    put("mult.f_large", f_multiplicative(mpf(3), mpf("0.5"), mpf(2), mpf(4), mpf("0.75"), 50, mpf("0.05")))

    here = os.path.dirname(os.path.abspath(__file__))
    path = os.path.join(here, "..", "golden", "bounds.txt")
    with open(path, "w") as fh:
        fh.write("# generated by tests/oracles/bounds_oracle.py (mpmath, 40 digits)\n")
        fh.write("\n".join(out) + "\n")
    print("\n".join(out))


if __name__ == "__main__":
    main()
