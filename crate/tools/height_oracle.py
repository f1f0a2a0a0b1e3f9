"""Independent p-adic height oracle.

Builds σ in the formal-logarithm variable z: reverts z(t) to t(z), forms
℘(z) = x(t(z)) + b2/12 as a Laurent series, integrates ℘ − z⁻² twice in z and
exponentiates. Heights of a point P use Q = mP in the kernel of reduction:

    h_ω(P) = −z(Q)²/m²
    h_η(P) = (2/m²)·log_p(σ(z(Q))/d(Q)) + (b2/12)·z(Q)²/m²

Usage: height_oracle.py a1 a2 a3 a4 a6 p x y m N
"""

import sys
from fractions import Fraction as Fr

M = 44


def mul(a, b):
    out = [Fr(0)] * M
    for i, x in enumerate(a):
        if x:
            for j in range(M - i):
                out[i + j] += x * b[j]
    return out


def inv(a):
    out = [Fr(0)] * M
    out[0] = 1 / a[0]
    for n in range(1, M):
        out[n] = -sum(a[k] * out[n - k] for k in range(1, n + 1)) / a[0]
    return out


def compose(a, b):
    # a(b(z)), b(0) = 0
    out = [Fr(0)] * M
    for c in reversed(a):
        out = mul(out, b)
        out[0] += c
    return out


def formal(ai):
    a1, a2, a3, a4, a6 = map(Fr, ai)
    # w = t³(1 + …) from w = t³ + a1 t w + a2 t² w + a3 w² + a4 t w² + a6 w³
    sh = lambda a, k: [Fr(0)] * k + a[:M - k]
    w = [Fr(0)] * M
    for _ in range(M):
        w2 = mul(w, w)
        w3 = mul(w2, w)
        new = [a1 * sh(w, 1)[i] + a2 * sh(w, 2)[i] + a3 * w2[i] + a4 * sh(w2, 1)[i] + a6 * w3[i] for i in range(M)]
        new[3] += 1
        w = new
    # x = t/w = t⁻² U, U = t³/w; y = −1/w
    W = w[3:] + [Fr(0)] * 3
    U = inv(W)
    # ω = dx/(2y + a1 x + a3) → dz/dt
    # x = U/t², dx/dt = (U' t − 2U)/t³; 2y + a1x + a3 = (−2U + a1 t U + a3 t³)/t³
    dU = [(k + 1) * U[k + 1] for k in range(M - 1)] + [Fr(0)]
    num = [dU[k - 1] if k >= 1 else Fr(0) for k in range(M)]
    num = [num[k] - 2 * U[k] for k in range(M)]
    den = [-2 * U[k] + (a1 * U[k - 1] if k >= 1 else 0) + (a3 if k == 3 else 0) for k in range(M)]
    f = mul(num, inv(den))
    z = [Fr(0)] + [f[k] / (k + 1) for k in range(M - 1)]
    return U, z


def sigma_in_z(ai):
    a1, a2, a3, a4, a6 = ai
    b2 = Fr(a1 * a1 + 4 * a2)
    U, z = formal(ai)
    # revert by Lagrange inversion: [z^n] t = (1/n)·[t^{n−1}] (t/z(t))^n
    h = inv(z[1:] + [Fr(0)])
    t = [Fr(0)] * M
    hn = [Fr(1)] + [Fr(0)] * (M - 1)
    for n in range(1, M):
        hn = mul(hn, h)
        t[n] = hn[n - 1] / n
    # ℘ z² = x(t(z)) z² + (b2/12) z² with x = U(t)/t²
    tt = t[1:] + [Fr(0)]  # t/z
    Uz = compose(U, t)
    p2 = mul(Uz, inv(mul(tt, tt)))  # z²·x
    p2[2] += b2 / 12
    assert p2[0] == 1 and p2[1] == 0, p2[:3]
    g = p2[2:] + [Fr(0), Fr(0)]  # ℘ − z⁻²
    G = [Fr(0), Fr(0)] + [g[k] / ((k + 1) * (k + 2)) for k in range(M - 2)]
    # exp(−G)
    e = [Fr(1)] + [Fr(0)] * (M - 1)
    for n in range(1, M):
        e[n] = sum(k * (-G[k]) * e[n - k] for k in range(1, n + 1)) / n
    sig = [Fr(0)] + e[:M - 1]
    return sig, z, b2


def padic_reduce(q, p, n):
    """q ∈ Z_p (as Fraction) modulo p^n."""
    mod = p ** n
    num, den = q.numerator, q.denominator
    assert den % p != 0
    return num * pow(den, -1, mod) % mod


def vp(q, p):
    if q == 0:
        return 10 ** 9
    v = 0
    n, d = q.numerator, q.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def log_unit(u, p, n):
    """Iwasawa log of a p-adic unit given as an exact Fraction, to absolute precision n."""
    w = u ** (p - 1)
    x = w - 1
    assert vp(x, p) >= 1
    s = Fr(0)
    xk = Fr(1)
    k = 1
    while k - 2 * len(str(k)) < n + 10:
        xk *= x
        s += Fr((-1) ** (k + 1), k) * xk
        k += 1
    return s / (p - 1)


def add(ai, P, Q):
    a1, a2, a3, a4, a6 = map(Fr, ai)
    if P is None:
        return Q
    if Q is None:
        return P
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2 and y1 + y2 + a1 * x2 + a3 == 0:
        return None
    if x1 == x2:
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return (x3, y3)


def horner(c, x, red):
    acc = Fr(0)
    for a in reversed(c):
        acc = red(acc * x + a)
    return acc


def main():
    a = list(map(int, sys.argv[1:6]))
    p = int(sys.argv[6])
    P = (Fr(sys.argv[7]), Fr(sys.argv[8]))
    m = int(sys.argv[9])
    n = int(sys.argv[10])
    Q = None
    for _ in range(m):
        Q = add(a, Q, P)
    xq, yq = Q
    tq = -xq / yq
    sig, z, b2 = sigma_in_z(a)
    K = n + 60
    red = lambda q: q if q == 0 else Fr(padic_reduce(q / Fr(p) ** vp(q, p), p, K)) * Fr(p) ** vp(q, p)
    zq = horner(z, red(tq), red)
    sq = horner(sig, zq, red)
    d = int(round(xq.denominator ** 0.5))
    while d * d < xq.denominator:
        d += 1
    assert d * d == xq.denominator
    h_omega = -zq * zq / (m * m)
    h_eta = 2 * log_unit(sq / d, p, n) / (m * m) + b2 / 12 * zq * zq / (m * m)
    for name, h in [("h_omega", h_omega), ("h_eta", h_eta)]:
        v = vp(h, p)
        print(name, v, padic_reduce(h / Fr(p) ** v, p, n - v))


if __name__ == "__main__":
    main()
