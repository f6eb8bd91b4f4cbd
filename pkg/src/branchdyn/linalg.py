"""Dense exact linear algebra over the rationals.

Matrices are lists of rows of Fractions.  Everything here is textbook
elimination; no pivot-size cleverness is needed at the dimensions the
truncation work produces (a few hundred at most).
"""

from __future__ import annotations

from fractions import Fraction

F0 = Fraction(0)
F1 = Fraction(1)


def zeros(n: int, m: int) -> list:
    return [[F0] * m for _ in range(n)]


def identity(n: int) -> list:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = F1
    return out


def transpose(a: list) -> list:
    return [list(col) for col in zip(*a)] if a else []

def mat_mul(a: list, b: list) -> list:
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    out = zeros(n, p)
    for i in range(n):
        row = a[i]
        acc = out[i]
        for t in range(m):
            v = row[t]
            if v:
                brow = b[t]
                for j in range(p):
                    if brow[j]:
                        acc[j] += v * brow[j]
    return out


def mat_vec(a: list, v: list) -> list:
    return [sum((row[j] * v[j] for j in range(len(v)) if v[j]), F0) for row in a]


def mat_add(a: list, b: list) -> list:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: list, c: Fraction) -> list:
    return [[c * x for x in row] for row in a]


def mat_eq(a: list, b: list) -> bool:
    return a == b


def mat_pow(a: list, e: int) -> list:
    out = identity(len(a))
    base = a
    while e:
        if e & 1:
            out = mat_mul(out, base)
        base = mat_mul(base, base) if e > 1 else base
        e >>= 1
    return out


def rref(a: list) -> tuple:
    """Reduced row echelon form; returns (rref matrix, pivot columns)."""
    a = [list(map(Fraction, row)) for row in a]
    if not a:
        return a, []
    rows, cols = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if a[i][c]), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = F1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def nullspace(a: list) -> list:
    """A basis of {v : a v = 0}, one vector per free column."""
    if not a:
        return []
    cols = len(a[0])
    red, pivots = rref(a)
    pivot_set = set(pivots)
    basis = []
    for free in range(cols):
        if free in pivot_set:
            continue
        v = [F0] * cols
        v[free] = F1
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][free]
        basis.append(v)
    return basis


def rank(a: list) -> int:
    return len(rref(a)[1])


def char_poly(a: list) -> list:
    """Coefficients [c_0, ..., c_n] of det(xI - A), c_n = 1 (monic).

    Faddeev-LeVerrier recursion; exact over Fraction.
    """
    n = len(a)
    coeffs = [F0] * (n + 1)
    coeffs[n] = F1
    m = identity(n)
    for k in range(1, n + 1):
        am = mat_mul(a, m)
        ck = -sum(am[i][i] for i in range(n)) / k
        coeffs[n - k] = ck
        m = mat_add(am, mat_scale(identity(n), ck))
    return coeffs


def poly_eval(coeffs: list, x: Fraction) -> Fraction:
    acc = F0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _divisors(n: int) -> list:
    n = abs(n)
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def rational_eigenvalues(a: list) -> list:
    """All rational eigenvalues of an integer matrix, sorted.

    The characteristic polynomial is monic with integer coefficients,
    so every rational root is an integer dividing the lowest nonzero
    coefficient (after stripping factors of x, which contribute the
    root 0).
    """
    coeffs = char_poly(a)
    ints = []
    for c in coeffs:
        if c.denominator != 1:
            raise ValueError("matrix is not integral")
        ints.append(c.numerator)
    roots = set()
    low = next((i for i, c in enumerate(ints) if c != 0), None)
    if low is None:
        return []
    if low > 0:
        roots.add(0)
    const = ints[low]
    for d in _divisors(const):
        for cand in (d, -d):
            if poly_eval(coeffs, Fraction(cand)) == 0:
                roots.add(cand)
    return sorted(roots)


def dot(u: list, v: list) -> Fraction:
    return sum((a * b for a, b in zip(u, v) if a and b), F0)


def gram_schmidt_orthogonal(vectors: list) -> list:
    """Pairwise-orthogonal spanning set, rational entries, no normalizing.

    Unit lengths would force square roots out of the rationals, so the
    output is orthogonal only; callers track squared norms.
    """
    basis = []
    for v in vectors:
        w = list(map(Fraction, v))
        for b in basis:
            coeff = dot(w, b) / dot(b, b)
            if coeff:
                w = [wi - coeff * bi for wi, bi in zip(w, b)]
        if any(w):
            basis.append(w)
    return basis


def in_span(vectors: list, w: list) -> bool:
    """Is w in the span of the rows ``vectors``?"""
    if not any(w):
        return True
    if not vectors:
        return False
    return rank(vectors) == rank(vectors + [w])
