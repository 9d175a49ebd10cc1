"""Small exact linear algebra over Z used by the ideal and order machinery.

Lattices are stored as lists of row vectors (Python ints or Fractions).
Everything here is dimension-4-or-less and exact; no floating point.
"""

from __future__ import annotations

from fractions import Fraction


def hnf(rows):
    """Row Hermite normal form of an integer matrix.

    Returns an upper-triangular-by-pivot list of rows with positive pivots
    and entries above each pivot reduced into [0, pivot). Zero rows are
    dropped. Input rows are not modified.
    """
    rows = [list(map(int, r)) for r in rows if any(r)]
    if not rows:
        return []
    ncols = len(rows[0])
    out = []
    col = 0
    while col < ncols and rows:
        pivots = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        if not pivots:
            col += 1
            continue
        # euclidean elimination on the current column
        while len(pivots) > 1:
            pivots.sort(key=lambda r: abs(r[col]))
            p = pivots[0]
            new = [p]
            for r in pivots[1:]:
                q = r[col] // p[col]
                rr = [a - q * b for a, b in zip(r, p)]
                if rr[col] != 0:
                    new.append(rr)
                elif any(rr):
                    rest.append(rr)
            pivots = new
        p = pivots[0]
        if p[col] < 0:
            p = [-a for a in p]
        # reduce previously placed rows above this pivot
        for r in out:
            q = r[col] // p[col]
            if q:
                for i in range(ncols):
                    r[i] -= q * p[i]
        out.append(p)
        rows = rest
        col += 1
    return out


def hnf_key(rows):
    """Hashable canonical form of the lattice spanned by integer rows."""
    return tuple(tuple(r) for r in hnf(rows))


def det_upper(rows):
    """Determinant of a full-rank HNF (product of pivots)."""
    d = 1
    j = 0
    for r in rows:
        while j < len(r) and r[j] == 0:
            j += 1
        d *= r[j]
    return d


def in_lattice(vec, hnf_rows):
    """Exact membership of an integer/rational vector in the row lattice."""
    v = [Fraction(x) for x in vec]
    n = len(v)
    for r in hnf_rows:
        j = 0
        while j < n and r[j] == 0:
            j += 1
        if j == n:
            continue
        if v[j] == 0:
            continue
        q = v[j] / r[j]
        if q.denominator != 1:
            return False
        for i in range(j, n):
            v[i] -= q * r[i]
    return all(x == 0 for x in v)


def solve_coords(vec, basis_rows):
    """Coordinates of vec in terms of basis_rows (full rank), or None.

    Exact back-substitution against the (not necessarily triangular) basis,
    via rational Gaussian elimination. Returns a list of Fractions.
    """
    n = len(basis_rows)
    m = len(vec)
    a = [[Fraction(basis_rows[i][j]) for i in range(n)] for j in range(m)]
    b = [Fraction(x) for x in vec]
    # solve a * c = b (m equations, n unknowns) by elimination
    piv_rows = []
    used = [False] * m
    coords = [Fraction(0)] * n
    for colv in range(n):
        sel = None
        for r in range(m):
            if not used[r] and a[r][colv] != 0:
                sel = r
                break
        if sel is None:
            continue
        used[sel] = True
        piv_rows.append((sel, colv))
        inv = 1 / a[sel][colv]
        a[sel] = [x * inv for x in a[sel]]
        b[sel] *= inv
        for r in range(m):
            if r != sel and a[r][colv] != 0:
                f = a[r][colv]
                a[r] = [x - f * y for x, y in zip(a[r], a[sel])]
                b[r] -= f * b[sel]
    for r in range(m):
        if not used[r] and b[r] != 0:
            return None
    for sel, colv in piv_rows:
        coords[colv] = b[sel]
        for c2 in range(n):
            if c2 != colv and a[sel][c2] != 0:
                coords[colv] -= a[sel][c2] * coords[c2]
    # verify (cheap, guards against elimination ordering bugs)
    for j in range(m):
        s = sum(coords[i] * basis_rows[i][j] for i in range(n))
        if s != vec[j]:
            return None
    return coords


def integer_kernel(mat):
    """Basis of {x in Z^n : mat @ x = 0} for an integer matrix (m x n).

    Computed by running HNF on [mat^T | I_n] and collecting the
    transformation rows whose image is zero.
    """
    m = len(mat)
    n = len(mat[0]) if m else 0
    aug = []
    for i in range(n):
        row = [mat[r][i] for r in range(m)] + [0] * n
        row[m + i] = 1
        aug.append(row)
    red = hnf(aug)
    ker = []
    for r in red:
        if all(x == 0 for x in r[:m]):
            ker.append(r[m:])
    return ker


def congruence_lattice(mat, mod):
    """Basis of {x in Z^n : mat @ x = 0 (mod m)} as integer rows."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    # kernel of [mat | mod*I_m] projected to the first n coordinates
    big = [list(mat[r]) + [0] * m for r in range(m)]
    for r in range(m):
        big[r][n + r] = mod
    ker = integer_kernel(big)
    rows = [k[:n] for k in ker]
    return hnf(rows)
