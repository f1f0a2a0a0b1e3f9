"""Matrix of crystalline Frobenius on H^1_dR of y^2 = x^3 + A x + B over Z_p.

Monsky-Washnitzer reduction on the basis (dx/y, x dx/y), exact rational
arithmetic throughout. Columns of the returned matrix are the images of the
basis vectors. Only used to produce fixture data.
"""
from fractions import Fraction
from math import comb


def poly_add(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def poly_scale(a, c):
    return [c * x for x in a]


def poly_trim(a):
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def binom_half_neg(k):
    # binomial(-1/2, k)
    return Fraction((-1) ** k * comb(2 * k, k), 4 ** k)


def divmod_cubic(a, q):
    """Divide polynomial a by monic cubic q: returns (quotient, remainder)."""
    a = list(a)
    quo = [Fraction(0)] * max(1, len(a) - 3)
    for d in range(len(a) - 1, 2, -1):
        c = a[d]
        if c == 0:
            continue
        quo[d - 3] = c
        for i in range(4):
            a[d - 3 + i] -= c * q[i]
    return quo, (a + [0, 0, 0])[:3]


def frobenius_matrix(A, B, p, N):
    """Return 2x2 matrix (list of columns) of Frobenius modulo p^N as Fractions."""
    q = [Fraction(B), Fraction(A), Fraction(0), Fraction(1)]
    dq = [Fraction(A), Fraction(0), Fraction(3)]
    # E(x) = Q(x^p) - Q(x)^p
    qp = [Fraction(0)] * (3 * p + 1)
    qp[0], qp[p], qp[3 * p] = q[0], q[1], q[3]
    qpow = [Fraction(1)]
    for _ in range(p):
        qpow = poly_mul(qpow, q)
    E = poly_trim(poly_add(qp, poly_scale(qpow, -1)))
    loss = 1
    while p ** loss < 6 * p * (N + 10):
        loss += 1
    K = N + 2 * loss + 2
    # Q = U*Q + V*Q' solution for basis monomials 1, x, x^2 (deg U, V <= 1)
    cols = []
    for i in (0, 1):
        # terms: dict s -> poly R_s meaning R_s dx / y^(2s+1)
        terms = {}
        base = [Fraction(0)] * (p * (i + 1) - 1) + [Fraction(p)]
        Ek = [Fraction(1)]
        for k in range(K + 1):
            A_k = poly_scale(poly_mul(base, Ek), binom_half_neg(k))
            j = p * k + (p - 1) // 2
            # expand A_k = sum_m A_m Q^m, deg A_m <= 2
            m = 0
            rest = A_k
            while True:
                quo, rem = divmod_cubic(rest, q)
                s = j - m
                terms[s] = poly_add(terms.get(s, [Fraction(0)] * 3), rem)
                if all(c == 0 for c in quo):
                    break
                rest = quo
                m += 1
            Ek = poly_mul(Ek, E)
        # reduce positive-y-power pieces (s <= -1) to polynomials times dx/y
        total = [Fraction(0)] * 3
        for s in sorted(terms):
            if s <= 0:
                piece = terms[s]
                for _ in range(-s):
                    piece = poly_mul(piece, q)
                total = poly_add(total, piece)
        # descending reduction in s >= 1
        smax = max(terms)
        carry = [Fraction(0)] * 3
        for s in range(smax, 0, -1):
            R = poly_add(terms.get(s, [Fraction(0)] * 3), carry)
            R = (R + [Fraction(0)] * 3)[:3]
            U, V = solve_uv(R, A, B)
            coef = Fraction(2, 2 * s - 1)
            dV = [V[1], 2 * V[2]]
            carry = poly_add(U, poly_scale(dV, coef))
            carry = (carry + [Fraction(0)] * 3)[:3]
        total = poly_add(total, carry)
        total = reduce_x_powers(poly_trim(total), A, B)
        cols.append(total)
    return cols


def solve_uv(R, A, B):
    """Find U (deg <= 1), V (deg <= 2) with R = U*Q + V*Q' for deg R <= 2."""
    # unknowns (u0, u1, v0, v1, v2); rows are coefficients of x^0..x^4
    rows = [
        [B, 0, A, 0, 0],
        [A, B, 0, A, 0],
        [0, A, 3, 0, A],
        [1, 0, 0, 3, 0],
        [0, 1, 0, 0, 3],
    ]
    rhs = [R[0], R[1], R[2], 0, 0]
    sol = gauss_solve([[Fraction(c) for c in r] for r in rows], [Fraction(c) for c in rhs])
    return [sol[0], sol[1]], [sol[2], sol[3], sol[4]]


def gauss_solve(M, b):
    n = len(M)
    M = [row[:] + [b[i]] for i, row in enumerate(M)]
    for c in range(n):
        piv = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def reduce_x_powers(P, A, B):
    """Reduce P(x) dx/y to span of dx/y, x dx/y using d(x^m y)."""
    P = list(P) + [Fraction(0)] * 3
    for d in range(len(P) - 1, 1, -1):
        c = P[d]
        if c == 0:
            continue
        m = d - 2
        # d(x^m y) = (m x^(m-1) Q + x^m Q'/2) dx/y
        #          = ((m + 3/2) x^(m+2) + (m + 1/2) A x^m + m B x^(m-1)) dx/y
        lead = Fraction(2 * m + 3, 2)
        P[d] = Fraction(0)
        P[m] -= c * Fraction(2 * m + 1, 2) * A / lead
        if m >= 1:
            P[m - 1] -= c * m * B / lead
    return [P[0], P[1]]


def to_mod(fr, p, N):
    mod = p ** N
    num, den = fr.numerator, fr.denominator
    e = 0
    while den % p == 0:
        den //= p
        e += 1
    if e > 0:
        raise ValueError("non-integral Frobenius entry")
    return num * pow(den, -1, mod) % mod
