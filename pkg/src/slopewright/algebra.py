"""Exact algebra over Q and Q(sqrt d): polynomials, linear recurrences,
algebraic series relations, exact roots and nullspaces."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .numbers import QuadraticSurd, sqrt_exact

# -- polynomials (coefficient lists, lowest degree first) ---------------------------------


def trim(p: list) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def pmul(p: list, q: list) -> list:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return trim(out)


def padd(p: list, q: list) -> list:
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def pscale(p: list, c) -> list:
    return trim([a * c for a in p])


def pdivmod(p: list, q: list):
    p, q = trim(p), trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    quo = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    rem = list(p)
    while len(rem) >= len(q) and rem:
        c = rem[-1] / q[-1]
        k = len(rem) - len(q)
        quo[k] = c
        for i, b in enumerate(q):
            rem[k + i] -= c * b
        rem = trim(rem)
    return trim(quo), rem


def pgcd(p: list, q: list) -> list:
    p, q = trim(p), trim(q)
    while q:
        p, q = q, pdivmod(p, q)[1]
    if not p:
        return []
    return pscale(p, 1 / p[-1])


def peval(p: list, x):
    acc = Fraction(0)
    for a in reversed(p):
        acc = acc * x + a
    return acc


def pfloat_roots(p: list) -> np.ndarray:
    p = trim(p)
    if len(p) <= 1:
        return np.array([])
    return np.roots([float(a) for a in reversed(p)])


def positive_real_roots(p: list, imag_tol: float = 1e-9) -> list:
    out = []
    for r in pfloat_roots(p):
        if abs(r.imag) <= imag_tol * max(1.0, abs(r)) and r.real > 0:
            out.append(float(r.real))
    return sorted(out)


def root_multiplicity(p: list, x) -> int:
    k = 0
    p = trim(p)
    while p and peval(p, x) == 0:
        k += 1
        p = derivative(p)
    return k


def derivative(p: list) -> list:
    return trim([a * i for i, a in enumerate(p)][1:])


def exact_root(p: list, approx: float):
    """An exact rational or quadratic-surd root of p near ``approx``, or None."""
    p = trim(p)
    if not p:
        return None
    for den in (10**3, 10**6, 10**9):
        q = Fraction(approx).limit_denominator(den)
        if peval(p, q) == 0:
            return q
    roots = pfloat_roots(p)
    for r2 in roots:
        if abs(r2 - approx) < 1e-12 * max(1.0, abs(approx)):
            continue
        if abs(r2.imag) > 1e-9:
            continue
        s = Fraction(float(approx + r2.real)).limit_denominator(10**6)
        m = Fraction(float(approx * r2.real)).limit_denominator(10**6)
        quad = [m, -s, Fraction(1)]
        _, rem = pdivmod(p, quad)
        if rem:
            continue
        disc = s * s - 4 * m
        if disc < 0:
            continue
        root_d = sqrt_exact(disc)
        cands = [(s + root_d) / 2, (s - root_d) / 2]
        best = min(cands, key=lambda c: abs(float(c) - approx))
        if peval(p, best) == 0:
            return best
    return None


def minimal_polynomial(x) -> list:
    """Minimal polynomial (monic, lowest degree first) of a rational or surd."""
    if isinstance(x, QuadraticSurd):
        return [x.a * x.a - x.b * x.b * x.d, -2 * x.a, Fraction(1)]
    return [-Fraction(x), Fraction(1)]


def format_poly(p: list, var: str = "x") -> str:
    terms = []
    for i in range(len(p) - 1, -1, -1):
        a = p[i]
        if a == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if mono and abs(a) == 1:
            coef = "-" if a < 0 else "+"
            terms.append(f"{coef} {mono}")
        else:
            coef = f"{abs(a)}" if not mono else f"{abs(a)}*"
            terms.append(f"{'-' if a < 0 else '+'} {coef}{mono}")
    s = " ".join(terms) or "0"
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


# -- linear recurrences --------------------------------------------------------------------------


def berlekamp_massey(seq: list):
    """Shortest connection polynomial C (C[0] = 1) with
    sum_i C[i]*seq[n-i] = 0 for all n >= L.  Returns (C, L)."""
    s = [Fraction(v) for v in seq]
    C = [Fraction(1)]
    B = [Fraction(1)]
    L, m, b = 0, 1, Fraction(1)
    for n in range(len(s)):
        d = s[n]
        for i in range(1, L + 1):
            if i < len(C):
                d += C[i] * s[n - i]
        if d == 0:
            m += 1
            continue
        coef = d / b
        T = list(C)
        need = len(B) + m
        if len(C) < need:
            C = C + [Fraction(0)] * (need - len(C))
        for i, bi in enumerate(B):
            C[i + m] -= coef * bi
        if 2 * L <= n:
            L = n + 1 - L
            B, b, m = T, d, 1
        else:
            m += 1
    C = C[: L + 1] + [Fraction(0)] * max(0, L + 1 - len(C))
    return C, L


def recurrence_holds(C: list, seq: list, start: int) -> bool:
    L = len(C) - 1
    for n in range(max(start, L), len(seq)):
        if sum(C[i] * seq[n - i] for i in range(L + 1)) != 0:
            return False
    return True


def rational_gf(seq: list, C: list):
    """(P, C) with sum seq[n] z^n = P(z)/C(z)."""
    L = len(C) - 1
    prod = [Fraction(0)] * L
    for i in range(L):
        for j in range(i + 1):
            if j < len(C):
                prod[i] += C[j] * seq[i - j]
    return trim(prod), trim(C)


# -- linear algebra ------------------------------------------------------------------------------------


def nullspace(rows: list, ncols: int) -> list:
    """Basis of the right nullspace of a matrix over a field (exact entries)."""
    M = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -M[i][fc]
        basis.append(v)
    return basis


# -- algebraic relations for series ----------------------------------------------------------------


def series_mul(a: list, b: list, n: int) -> list:
    out = [Fraction(0)] * (n + 1)
    for i in range(min(n + 1, len(a))):
        if a[i] == 0:
            continue
        for j in range(min(n + 1 - i, len(b))):
            out[i + j] += a[i] * b[j]
    return out


def quadratic_relation(series: list, max_degree: int = 4, verify: int = 8):
    """Polynomials (P0, P1, P2), P2 != 0, with P0 + P1*F + P2*F^2 = 0 for the
    power series F whose coefficients are ``series`` (index = power).  The
    relation is fitted on the first coefficients and verified on the last
    ``verify`` ones."""
    N = len(series) - 1
    F = [Fraction(v) for v in series]
    F2 = series_mul(F, F, N)
    for d in range(1, max_degree + 1):
        unknowns = 3 * (d + 1)
        fit_rows = N - verify + 1
        if fit_rows < unknowns + 2:
            break

        def row(j):
            r = []
            for i in range(d + 1):  # P0 coefficient i contributes to z^i
                r.append(Fraction(1) if i == j else Fraction(0))
            for i in range(d + 1):  # P1 coefficient i times F
                r.append(F[j - i] if j - i >= 0 else Fraction(0))
            for i in range(d + 1):
                r.append(F2[j - i] if j - i >= 0 else Fraction(0))
            return r

        basis = nullspace([row(j) for j in range(fit_rows)], unknowns)
        for v in basis:
            P0, P1, P2 = trim(v[: d + 1]), trim(v[d + 1 : 2 * d + 2]), trim(v[2 * d + 2 :])
            if not P2:
                continue
            if all(sum(a * b for a, b in zip(row(j), v)) == 0 for j in range(fit_rows, N + 1)):
                return P0, P1, P2
        if basis:
            break
    return None
