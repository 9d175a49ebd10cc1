"""Relative quadratic orders over O_K, their class numbers, units, and the
optimal-embedding counts that weight geodesic classes.

An order is built from a pair (D, d) with d || (D), i.e. (D) = d * f^2.
With h_K = 1 we reduce by a generator f of the square part and model the
order as the integral span of (a + b*sqrt(D'))/2, D' = D/f^2, subject to the
exact integrality condition a^2 = b^2 D' mod 4. This span is always closed
under multiplication and is free of rank 2 over O_K: O = O_K[xi] with
xi^2 = p xi + q. Its realized relative discriminant ideal can be strictly
larger than d (only conductor-times-maximal discriminants are realizable);
non-realizable labels are flagged and count zero embeddings.

Class numbers are computed by a brute-force oracle: enumerate primitive
proper ideals up to the Minkowski-type norm bound, then partition them into
principal-multiple classes by exhaustive generator enumeration modulo the
unit subgroup generated by the base-field unit and the relative fundamental
unit. The partition structure itself certifies the run (overlapping class
sets would signal a covering failure); stability under a doubled bound is
the shipped certificate.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .fields import (
    BaseField,
    FieldElement,
    IdealK,
    ScopeError,
    factor_element,
    format_element,
    ideal_of_element,
    square_divisor_splits,
)
from .intlinalg import congruence_lattice, hnf, hnf_key, in_lattice, solve_coords

UNKNOWN = "UNKNOWN"

HYPERBOLIC_ELLIPTIC = "hyperbolic-elliptic"
TOTALLY_ELLIPTIC = "totally-elliptic"
OTHER_SIGNATURE = "other"

# Minkowski constants (n!/n^n)(4/pi)^r2 for quartic signatures
_MINK = {HYPERBOLIC_ELLIPTIC: (24 / 256) * (4 / math.pi), TOTALLY_ELLIPTIC: (24 / 256) * (4 / math.pi) ** 2}


class Inconclusive(RuntimeError):
    """An exact search exhausted its budget without a certificate."""


class SearchExhausted(Inconclusive):
    pass


# ---------------------------------------------------------------------------
# squares in K


def sqrt_fraction(x: Fraction):
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def sqrt_in_K(x: FieldElement):
    """Exact square root of x in K, or None."""
    K = x.field
    p, q = x.sqrt_coords()
    nrm = sqrt_fraction(p * p - q * q * K.m)
    if nrm is None:
        return None
    for s in (nrm, -nrm):
        u2 = (p + s) / 2
        u = sqrt_fraction(u2)
        if u is None:
            continue
        if u == 0:
            if q != 0:
                continue
            v2 = sqrt_fraction(p / K.m) if p != 0 else Fraction(0)
            if v2 is None:
                continue
            cand = K.from_sqrt_coords(0, v2)
        else:
            cand = K.from_sqrt_coords(u, q / (2 * u))
        if cand * cand == x:
            return cand
        if (-cand) * (-cand) == x:
            return -cand
    return None


def canonical_square_class(D: FieldElement) -> FieldElement:
    """Canonical representative of D modulo squares of K^*.

    Squarefree ideal kernel times the unique unit class in {1,-1,eps,-eps}
    making the quotient a square.
    """
    K = D.field
    _, fac = factor_element(D)
    g = K.one()
    for pi, e in fac:
        if e % 2:
            g = g * pi
    g = K.canonical_associate(g) if (g.a, g.b) != (1, 0) else K.one()
    for u in (K.one(), -K.one(), K.eps, -K.eps):
        cand = u * g
        if sqrt_in_K(D / cand) is not None:
            return cand
    raise AssertionError("no unit class matched the square kernel")


# ---------------------------------------------------------------------------
# the order


@dataclass(frozen=True)
class LatticeSpec:
    """Arithmetic lattice data: finite ramification set and r_A = #Ram_inf.

    ram_f entries are prime ideals of O_K (IdealK). vol is the user-supplied
    covolume for trace-formula evaluation, not derived here.
    """

    field_m: int
    ram_f: tuple = ()
    r_A: int = 0
    vol: float | None = None

    def __post_init__(self):
        if (len(self.ram_f) + self.r_A) % 2 != 0:
            raise ValueError("ramification set must have even size (finite + infinite)")

    @staticmethod
    def hilbert(field: BaseField, vol: float | None = None) -> "LatticeSpec":
        return LatticeSpec(field.m, (), 0, vol)


class RelativeQuadraticOrder:
    """The order attached to (D, d || (D)), as a rank-4 lattice over Z."""

    def __init__(self, field: BaseField, D: FieldElement, d_ideal: IdealK):
        if field.h_K != 1:
            raise ScopeError("relative orders require h_K = 1")
        if D.a == 0 and D.b == 0:
            raise ValueError("D must be nonzero")
        if sqrt_in_K(D) is not None:
            raise ValueError("D must not be a square in K")
        self.field = field
        self.D = D
        self.d_ideal = d_ideal
        # locate the split: (D) = d * f^2 with f generating the square part
        f_elt = None
        for dd, ff in square_divisor_splits(D):
            if dd.rows == d_ideal.rows:
                f_elt = ff.generator(field)
                break
        if f_elt is None:
            raise ValueError("d does not satisfy d || (D)")
        self.f_elt = f_elt
        self.Dred = D / (f_elt * f_elt)
        assert self.Dred.is_integral()
        self._canonicalize_dred()
        s0, s1 = self.Dred.sign(0), self.Dred.sign(1)
        if s0 > 0 and s1 < 0:
            self.signature = HYPERBOLIC_ELLIPTIC
        elif s0 < 0 and s1 < 0:
            self.signature = TOTALLY_ELLIPTIC
        else:
            self.signature = OTHER_SIGNATURE
        self._build_basis()

    def _canonicalize_dred(self):
        """Scale Dred by even unit powers into the |iota_0| window
        [sqrt|N|, sqrt|N| * iota_0(eps)^2); coordinates of isomorphic orders
        built from different traces then coincide (cache coherence)."""
        K = self.field
        E = K.eps
        E2 = E * E
        n_red = abs(self.Dred.norm())
        x, f = self.Dred, self.f_elt
        while True:
            v = x * x
            if (v - n_red).sign(0) < 0:
                x = x * E2
                f = f / E
            elif (v - E2 * E2 * n_red).sign(0) >= 0:
                x = x / E2
                f = f * E
            else:
                break
        assert f * f * x == self.D and x.is_integral() and f.is_integral()
        self.Dred, self.f_elt = x, f

    # -- structure ---------------------------------------------------------
    def _build_basis(self):
        K = self.field
        Dr = self.Dred
        sols = []
        for a0, a1, b0, b1 in product((0, 1), repeat=4):
            a = K.elt(a0, a1)
            b = K.elt(b0, b1)
            val = a * a - b * b * Dr
            if (val.a % 4 == 0) and (val.b % 4 == 0):
                sols.append((a, b))
        # z-basis over (1, w, r, w r), scaled by 2 to integer rows
        rows = []
        for base in (K.one(), K.w()):
            rows.append([int(2 * base.a), int(2 * base.b), 0, 0])
            rows.append([0, 0, int(2 * base.a), int(2 * base.b)])
        for a, b in sols:
            rows.append([int(a.a), int(a.b), int(b.a), int(b.b)])
        self._rows2 = hnf(rows)  # integer rows = 2 * coordinates over (1,w,r,wr)
        self.z_basis = [[Fraction(x, 2) for x in row] for row in self._rows2]
        # the ideal of sqrt coefficients and a module generator xi
        bideal_rows = hnf([[2, 0], [0, 2]] + [[int(b.a), int(b.b)] for _, b in sols])
        bg = K.principal_generator(bideal_rows)
        assert bg is not None
        a0 = None
        for a, b in sols:
            if in_lattice([(bg - b).a, (bg - b).b], [[2, 0], [0, 2]]):
                a0 = a
                break
        assert a0 is not None, "no parity class matches the coefficient ideal generator"
        self.xi_a = a0  # xi = (xi_a + xi_b * sqrt(Dred)) / 2
        self.xi_b = bg
        self.p_coef = a0
        self.q_coef = -(a0 * a0 - bg * bg * Dr) * Fraction(1, 4)
        assert self.p_coef.is_integral() and self.q_coef.is_integral()
        # realized relative discriminant (xi - conj xi)^2 = bg^2 Dred
        self.realized_disc = ideal_of_element(bg * bg * Dr)
        self.realizable = self.realized_disc.rows == self.d_ideal.rows
        # verify O = O_K + O_K xi as lattices
        xi_rows = [
            [2, 0, 0, 0],
            [0, 2, 0, 0],
            [int(a0.a), int(a0.b), int(bg.a), int(bg.b)],
        ]
        wxi = (K.w() * a0, K.w() * bg)
        xi_rows.append([int(wxi[0].a), int(wxi[0].b), int(wxi[1].a), int(wxi[1].b)])
        assert hnf_key(xi_rows) == hnf_key(self._rows2), "order is not O_K[xi]"

    # -- element helpers (u + v xi with u, v in O_K as int pairs) ------------
    def mul(self, x, y):
        """Multiply order elements given as ((u_a,u_b),(v_a,v_b)) int pairs."""
        K = self.field
        u1, v1 = x
        u2, v2 = y
        p = (int(self.p_coef.a), int(self.p_coef.b))
        q = (int(self.q_coef.a), int(self.q_coef.b))
        u = _kadd(K, _kmul(K, u1, u2), _kmul(K, _kmul(K, v1, v2), q))
        v = _kadd(K, _kadd(K, _kmul(K, u1, v2), _kmul(K, u2, v1)), _kmul(K, _kmul(K, v1, v2), p))
        return (u, v)

    def rel_conj(self, x):
        K = self.field
        u, v = x
        return (_kadd(K, u, _kmul(K, v, (int(self.p_coef.a), int(self.p_coef.b)))), _kneg(v))

    def rel_norm(self, x) -> FieldElement:
        K = self.field
        u, v = x
        uu = K.elt(*u)
        vv = K.elt(*v)
        return uu * uu + self.p_coef * uu * vv - self.q_coef * vv * vv

    def abs_norm_int(self, x) -> int:
        """N_{L/Q} for integer xi-coordinates (hot loops; exact ints)."""
        c0, c1, p, q = self._int_consts()
        u, v = x
        K = self.field
        uu = _kmul(K, u, u)
        uv = _kmul(K, u, v)
        vv = _kmul(K, v, v)
        nr = (
            uu[0] + p[0] * uv[0] + c0 * (p[1] * uv[1]) - (q[0] * vv[0] + c0 * (q[1] * vv[1])),
            uu[1] + p[0] * uv[1] + p[1] * uv[0] + c1 * (p[1] * uv[1])
            - (q[0] * vv[1] + q[1] * vv[0] + c1 * (q[1] * vv[1])),
        )
        a, b = nr
        return a * a + a * b * c1 - b * b * c0

    def _int_consts(self):
        if not hasattr(self, "_ic"):
            K = self.field
            self._ic = (
                int(K._w2[0]), int(K._w2[1]),
                (int(self.p_coef.a), int(self.p_coef.b)),
                (int(self.q_coef.a), int(self.q_coef.b)),
            )
        return self._ic

    def rel_trace(self, x) -> FieldElement:
        K = self.field
        u, v = x
        return 2 * K.elt(*u) + self.p_coef * K.elt(*v)

    def abs_norm(self, x) -> Fraction:
        return self.rel_norm(x).norm()

    def one(self):
        return ((1, 0), (0, 0))

    def from_sqrt_form(self, a: FieldElement, b: FieldElement):
        """Element (a + b sqrt(Dred))/2 in xi coordinates, or None if not in O."""
        # (a + b r)/2 = u + v xi with v = b/xi_b, u = (a - v xi_a)/2
        v = b / self.xi_b
        u = (a - v * self.xi_a) * Fraction(1, 2)
        if not (u.is_integral() and v.is_integral()):
            return None
        return ((int(u.a), int(u.b)), (int(v.a), int(v.b)))

    def to_sqrt_form(self, x):
        """(a, b) field elements with x = (a + b sqrt(Dred))/2."""
        K = self.field
        u, v = x
        vv = K.elt(*v)
        b = vv * self.xi_b
        a = 2 * K.elt(*u) + vv * self.xi_a
        return a, b

    def contains_sqrt_form(self, a: FieldElement, b: FieldElement) -> bool:
        return self.from_sqrt_form(a, b) is not None

    def disc_z(self) -> int:
        g = self.realized_disc
        return self.field.disc ** 2 * g.norm

    def embeddings(self, x, prec_bits: int = 64):
        """Complex embeddings of x at the two extensions of each place."""
        K = self.field
        a, b = self.to_sqrt_form(x)
        out = []
        for place in (0, 1):
            av = a.approx(place)
            bv = b.approx(place)
            dv = self.Dred.approx(place)
            if dv >= 0:
                rr = math.sqrt(dv)
                out.append(((av + bv * rr) / 2, (av - bv * rr) / 2))
            else:
                rr = math.sqrt(-dv)
                out.append(complex(av / 2, bv * rr / 2))
        return out

    def cache_key(self) -> tuple:
        canD = canonical_square_class(self.D)
        return (self.field.m, format_element(canD), tuple(self.d_ideal.rows))

    def __repr__(self):
        return (
            f"<order D={format_element(self.D)} d={list(map(list, self.d_ideal.rows))} "
            f"{self.signature}{'' if self.realizable else ' (non-realizable)'}>"
        )


def _kmul(K: BaseField, x, y):
    c0, c1 = int(K._w2[0]), int(K._w2[1])
    a, b = x
    c, d = y
    bd = b * d
    return (a * c + bd * c0, a * d + b * c + bd * c1)


def _kadd(K: BaseField, x, y):
    return (x[0] + y[0], x[1] + y[1])


def _kneg(x):
    return (-x[0], -x[1])


def build_order(field: BaseField, D: FieldElement, d_ideal: IdealK) -> RelativeQuadraticOrder:
    """Order for the split d || (D); see RelativeQuadraticOrder."""
    return RelativeQuadraticOrder(field, D, d_ideal)


# ---------------------------------------------------------------------------
# units


def relative_fundamental_unit(order: RelativeQuadraticOrder, iota0_cap: float = 1e9):
    """Fundamental relative-norm-one unit: minimal iota_0 > 1.

    Scans relative traces a in O_K ordered by iota_0(a) in (2, T], testing
    exactly whether (a^2-4)/Dred is a square b^2 with (a+b sqrt(Dred))/2 in
    the order. The first hit is fundamental because iota_0 of the unit is
    monotone in iota_0 of its relative trace.
    Returns (eps in xi-coords, regulator, torsion).
    """
    if order.signature != HYPERBOLIC_ELLIPTIC:
        raise ValueError("relative fundamental unit needs hyperbolic-elliptic signature")
    K = order.field
    T = 8.0
    while T <= 4 * iota0_cap:
        cands = _trace_candidates(K, T)
        for a in cands:
            kappa = (a * a - 4) / order.Dred
            b = sqrt_in_K(kappa)
            if b is None:
                continue
            x = order.from_sqrt_form(a, b)
            if x is None:
                x = order.from_sqrt_form(a, -b)
            if x is None:
                continue
            assert order.rel_norm(x) == 1
            rho = order.embeddings(x)[0]
            iota0 = max(abs(rho[0]), abs(rho[1]))
            reg = math.log(iota0)
            return x, reg, 2
        T *= 2
    raise SearchExhausted(f"no relative unit below iota_0 trace bound {T}")


def _trace_candidates(K: BaseField, T: float):
    """Elements a of O_K with 2 < iota_0(a) <= T and |iota_1(a)| < 2, ordered."""
    out = []
    w0 = K.w().approx(0)
    w1 = K.w().approx(1)
    amax = int((T + 2) / 2 + 2)
    bmax = int((T + 2) / abs(w0 - w1) + 2)
    for b in range(-bmax, bmax + 1):
        for a in range(-amax, amax + 1):
            x = K.elt(a, b)
            if x.sign(0) < 0:
                x = -x
            if (x - 2).sign(0) <= 0:
                continue
            if x.approx(0) > T + 1e-9:
                continue
            if not ((x - 2).sign(1) < 0 and (x + 2).sign(1) > 0):
                continue
            out.append(x)
    uniq = {(x.a, x.b): x for x in out}
    return sorted(uniq.values(), key=lambda z: (z.approx(0), z.a, z.b))


def torsion_units(order: RelativeQuadraticOrder) -> int:
    """Number of roots of unity in the order.

    A hyperbolic-elliptic order has a real embedding, so only +-1. For the
    totally-elliptic (CM) signature all relative-norm-one elements are roots
    of unity, counted by an exact box scan.
    """
    if order.signature == HYPERBOLIC_ELLIPTIC:
        return 2
    return norm_one_group_size(order)


def norm_one_group_size(order: RelativeQuadraticOrder) -> int:
    """#O^1 for totally-elliptic (finite) orders, exact."""
    if order.signature != TOTALLY_ELLIPTIC:
        raise ValueError("finite norm-one group needs totally-elliptic signature")
    return sum(1 for x in _box_elements(order, 1.0 + 1e-9) if order.rel_norm(x) == 1)


def _flat_embedding(order, x):
    """Four real embedding coordinates of x (complex places flattened)."""
    out = []
    for e in order.embeddings(x):
        if isinstance(e, tuple):
            out.extend([e[0], e[1]])
        else:
            out.extend([e.real, e.imag])
    return out


_STD_BASIS = [((1, 0), (0, 0)), ((0, 1), (0, 0)), ((0, 0), (1, 0)), ((0, 0), (0, 1))]


def _box_elements(order: RelativeQuadraticOrder, radius: float):
    """All nonzero x in O with every archimedean absolute value <= radius."""
    E = np.array([_flat_embedding(order, b) for b in _STD_BASIS]).T
    Einv = np.linalg.inv(E)
    pad = 1.05
    cmax = [0.0] * 4
    for c in product(*[(-radius * pad, radius * pad)] * 4):
        sol = Einv @ np.array(c)
        for i in range(4):
            cmax[i] = max(cmax[i], abs(sol[i]))
    ranges = [range(-int(c + 1), int(c + 1) + 1) for c in cmax]
    out = []
    for c in product(*ranges):
        if all(v == 0 for v in c):
            continue
        x = ((c[0], c[1]), (c[2], c[3]))
        es = order.embeddings(x)
        ok = True
        for e in es:
            if isinstance(e, tuple):
                ok = ok and abs(e[0]) <= radius and abs(e[1]) <= radius
            else:
                ok = ok and abs(e) <= radius
        if ok:
            out.append(x)
    return out


# ---------------------------------------------------------------------------
# enumeration modulo units (the engine behind class and unit searches)


def _log_vector(order, x):
    """Reduced log embedding: (log|rho1|, log|rho2|, 2 log|rho3|) for the
    hyperbolic-elliptic signature, (2 log|rho1|, 2 log|rho2|) for CM."""
    es = order.embeddings(x)
    logs = []
    for e in es:
        if isinstance(e, tuple):
            logs.extend([math.log(abs(e[0])), math.log(abs(e[1]))])
        else:
            logs.append(2 * math.log(abs(e)))
    return logs


def _balanced_logs(tau: float, is_he: bool):
    # point on the |N| = e^tau shell with balanced coordinates
    if is_he:
        return [tau / 4, tau / 4, tau / 2]
    return [tau / 2, tau / 2]


def _lll_rows_metric(rows, vecs):
    """Unimodular reduction of integer rows w.r.t. given embedding vectors.

    Numeric LLL; the lattice is unchanged, only its basis. Returns
    (reduced integer rows, reduced embedding vectors).
    """
    B = [list(map(int, r)) for r in rows]
    V = [np.array(v, dtype=float) for v in vecs]
    n = len(B)
    delta = 0.99

    def gso():
        star = []
        mu = [[0.0] * n for _ in range(n)]
        for i in range(n):
            v = V[i].copy()
            for j in range(i):
                denom = float(star[j] @ star[j])
                mu[i][j] = float(V[i] @ star[j]) / denom if denom > 0 else 0.0
                v -= mu[i][j] * star[j]
            star.append(v)
        return star, mu

    k = 1
    guard = 0
    while k < n and guard < 2000:
        guard += 1
        star, mu = gso()
        changed = False
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                B[k] = [a - q * b for a, b in zip(B[k], B[j])]
                V[k] = V[k] - q * V[j]
                for jj in range(j + 1):
                    mu[k][jj] -= q * mu[j][jj]
                changed = True
        if changed:
            star, mu = gso()
        if float(star[k] @ star[k]) >= (delta - mu[k][k - 1] ** 2) * float(star[k - 1] @ star[k - 1]):
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            V[k], V[k - 1] = V[k - 1], V[k]
            k = max(k - 1, 1)
    return B, V


def _lll_rows(order, rows):
    vecs = [_flat_embedding(order, ((r[0], r[1]), (r[2], r[3]))) for r in rows]
    B, _ = _lll_rows_metric(rows, vecs)
    return B


def enumerate_mod_units(order, basis_rows, norm_min: int, norm_max, units,
                        cell: float = 0.7, budget: int = 6_000_000):
    """Integer-coordinate lattice elements x (rows over the order Z-basis)
    with norm_min <= |N(x)| <= norm_max, at least one per unit-orbit.

    The reduced log-embedding space is tiled: the norm level in
    [log norm_min, log norm_max] and the coefficients along the unit log
    vectors in [0, 1), each in steps of at most `cell`. Every cell yields a
    rigorous upper-bound box per embedding coordinate, converted to a padded
    coordinate box and scanned exhaustively with exact norm checks. Any
    lattice element in the norm window has a unit multiple inside some cell,
    so each orbit is hit at least once.
    """
    if norm_max < norm_min:
        return []
    if norm_min < 1:
        raise ValueError("integral lattices only: norm_min >= 1")
    emb_rows = [_flat_embedding(order, ((r[0], r[1]), (r[2], r[3]))) for r in basis_rows]
    unit_logs = [_log_vector(order, u) for u in units]
    is_he = order.signature == HYPERBOLIC_ELLIPTIC
    dim = 3 if is_he else 2
    tau_lo_all = math.log(norm_min) - 1e-9
    tau_hi_all = math.log(float(norm_max)) + 1e-9
    tau_steps = max(1, math.ceil((tau_hi_all - tau_lo_all) / cell))
    s_steps = [max(1, math.ceil(math.sqrt(sum(v * v for v in ul)) / cell)) for ul in unit_logs]

    results = []
    seen = set()
    for ti in range(tau_steps):
        t0 = tau_lo_all + (tau_hi_all - tau_lo_all) * ti / tau_steps
        t1 = tau_lo_all + (tau_hi_all - tau_lo_all) * (ti + 1) / tau_steps
        for scell in product(*(range(k) for k in s_steps)):
            # upper bound per log coordinate over the cell (corners suffice)
            uppers = [-math.inf] * dim
            for tcorn in (t0, t1):
                base = _balanced_logs(tcorn, is_he)
                for corner_idx in product(*[(0, 1)] * len(units)):
                    vec = list(base)
                    for ui, (ci, k, flag) in enumerate(zip(scell, s_steps, corner_idx)):
                        s_val = (ci + flag) / k
                        for j in range(dim):
                            vec[j] += s_val * unit_logs[ui][j]
                    for j in range(dim):
                        uppers[j] = max(uppers[j], vec[j])
            for x in _cell_scan(order, basis_rows, emb_rows, uppers, is_he,
                                norm_min, norm_max, budget):
                if x in seen:
                    continue
                seen.add(x)
                results.append((None, x))
    return results


def _cell_scan(order, basis_rows, emb_rows, uppers, is_he, nmin, nmax, budget):
    """Exact lattice points in one embedding box {|emb_i| <= lims_i} with
    norm in [nmin, nmax]. The basis is LLL-reduced in the metric scaled by
    the box half-widths, so the covering coordinate box stays small even for
    very lopsided cells."""
    pad = 1.08
    if is_he:
        lims = [
            math.exp(uppers[0]) * pad,
            math.exp(uppers[1]) * pad,
            math.exp(0.5 * uppers[2]) * pad,
            math.exp(0.5 * uppers[2]) * pad,
        ]
    else:
        lims = [
            math.exp(0.5 * uppers[0]) * pad,
            math.exp(0.5 * uppers[0]) * pad,
            math.exp(0.5 * uppers[1]) * pad,
            math.exp(0.5 * uppers[1]) * pad,
        ]
    scale = np.array([1.0 / l for l in lims])
    scaled = [np.array(v) * scale for v in emb_rows]
    red_rows, red_vecs = _lll_rows_metric(basis_rows, scaled)
    S = np.array(red_vecs)  # rows: scaled embeddings of reduced basis
    try:
        Sinv = np.linalg.inv(S.T)
    except np.linalg.LinAlgError:
        raise Inconclusive("degenerate lattice embedding")
    cmax = [0.0] * 4
    for corner in product(*[(-1.0, 1.0)] * 4):
        sol = Sinv @ np.array(corner)
        for i in range(4):
            cmax[i] = max(cmax[i], abs(sol[i]))
    ks = [int(c + 1) for c in cmax]
    total = 1
    for k in ks:
        total *= 2 * k + 1
    if total > budget:
        raise Inconclusive(f"enumeration box too large ({total} points)")
    axes = [np.arange(-k, k + 1, dtype=np.int64) for k in ks]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=1)
    emb = grid.astype(float) @ S  # scaled embedding values
    inside = np.all(np.abs(emb) <= 1.0 + 1e-9, axis=1)
    emb_true = emb[inside] / scale  # unscale
    grid = grid[inside]
    if is_he:
        nrm = np.abs(emb_true[:, 0] * emb_true[:, 1]) * (emb_true[:, 2] ** 2 + emb_true[:, 3] ** 2)
    else:
        nrm = (emb_true[:, 0] ** 2 + emb_true[:, 1] ** 2) * (emb_true[:, 2] ** 2 + emb_true[:, 3] ** 2)
    mask = (nrm >= nmin * 0.98 - 0.5) & (nrm <= nmax * 1.02 + 0.5)
    out = []
    for row in grid[mask]:
        coords = tuple(int(v) for v in row)
        if not any(coords):
            continue
        x = _coords_to_elt(coords, red_rows)
        exact = abs(order.abs_norm_int(x))
        if nmin <= exact <= nmax:
            out.append(x)
    return out


def _coords_to_elt(coords, basis_rows):
    acc = [0, 0, 0, 0]
    for c, row in zip(coords, basis_rows):
        if c:
            for i in range(4):
                acc[i] += c * row[i]
    return ((acc[0], acc[1]), (acc[2], acc[3]))


# ---------------------------------------------------------------------------
# ideals of the order


def _ideal_lattice_rows(order, a: FieldElement, b: FieldElement):
    """Z^4 rows (over basis (1,w,xi,w xi)) of O_K a + O_K (b + xi)."""
    K = order.field
    rows = []
    for mult in (K.one(), K.w()):
        xa = mult * a
        rows.append([int(xa.a), int(xa.b), 0, 0])
        xb = mult * b
        xw = mult
        rows.append([int(xb.a), int(xb.b), int(xw.a), int(xw.b)])
    return hnf(rows)


def _residues_mod(K: BaseField, a: FieldElement):
    """Representatives of O_K/(a)."""
    ia = ideal_of_element(a)
    (p, q), (z, r) = ia.rows
    for i in range(int(p)):
        for j in range(int(r)):
            yield K.elt(i, j)


def _gcd_is_unit(K: BaseField, elts) -> bool:
    rows = []
    for x in elts:
        for mult in (K.one(), K.w()):
            xx = mult * x
            rows.append([int(xx.a), int(xx.b)])
    H = hnf(rows)
    return hnf_key(H) == ((1, 0), (0, 1))


def primitive_proper_ideals(order, bound: int):
    """Primitive proper ideals of norm <= bound, deduplicated by lattice.

    An ideal O_K a + O_K (b + xi) is an ideal iff a | b^2 + p b - q, and is
    proper iff gcd(a, 2b + p, (b^2+pb-q)/a) is a unit (the primitivity of the
    attached quadratic form). Returns dict key -> (a, b, norm).
    """
    K = order.field
    out = {}
    c0, c1, pi, qi = order._int_consts()
    by_norm = K.elements_up_to_norm(bound)
    gens = [(1, [K.one()])] + sorted((n, lst) for n, lst in by_norm.items() if n > 1)
    for na, lst in gens:
        for a in lst:
            ai = (int(a.a), int(a.b))
            ia = ideal_of_element(a)
            (h00, h01), (_, h11) = ia.rows
            arows = [list(ia.rows[0]), list(ia.rows[1])]
            for i in range(int(h00)):
                for j in range(int(h11)):
                    bi = (i, j)
                    g = _kadd(K, _kadd(K, _kmul(K, bi, bi), _kmul(K, pi, bi)), _kneg(qi))
                    # divisibility g in (a) and the integer quotient g/a
                    if not in_lattice([g[0], g[1]], arows):
                        continue
                    quo = _kdiv_exact(K, g, ai, na)
                    if quo is None:
                        continue
                    two_b_p = (2 * bi[0] + pi[0], 2 * bi[1] + pi[1])
                    if not _gcd_is_unit_int(K, [ai, two_b_p, quo]):
                        continue
                    b = K.elt(*bi)
                    rows = _ideal_lattice_rows(order, a, b)
                    key = tuple(tuple(r) for r in rows)
                    if key not in out:
                        out[key] = (a, b, na)
    return out


def _kdiv_exact(K: BaseField, x, y, ny: int):
    """x / y for int pairs when exact, via x * conj(y) / N(y); else None."""
    c1 = int(K._w2[1])
    yc = (y[0] + c1 * y[1], -y[1])
    num = _kmul(K, x, yc)
    nrm = y[0] * y[0] + y[0] * y[1] * c1 - y[1] * y[1] * int(K._w2[0])
    if nrm == 0:
        return None
    if num[0] % nrm or num[1] % nrm:
        return None
    return (num[0] // nrm, num[1] // nrm)


def _gcd_is_unit_int(K: BaseField, elts) -> bool:
    rows = []
    c0, c1 = int(K._w2[0]), int(K._w2[1])
    for x in elts:
        rows.append([x[0], x[1]])
        # x * w = (c0*x1, x0 + c1*x1)
        rows.append([c0 * x[1], x[0] + c1 * x[1]])
    return hnf_key(rows) == ((1, 0), (0, 1))


def _inverse_lattice(order, rows):
    """Lattice of x with x * J subseteq O, as (rows, denom)."""
    n = 1
    j = 0
    for r in rows:
        while r[j] == 0:
            j += 1
        n *= abs(r[j])
    # multiplication matrices of the 4 generators
    stacked = []
    for r in rows:
        g = ((r[0], r[1]), (r[2], r[3]))
        M = _mult_matrix(order, g)
        stacked.extend(M)
    lat = congruence_lattice(stacked, n)
    return lat, n


def _mult_matrix(order, g):
    """Integer matrix of y -> g*y on the Z-basis (1, w, xi, w xi)."""
    basis = [((1, 0), (0, 0)), ((0, 1), (0, 0)), ((0, 0), (1, 0)), ((0, 0), (0, 1))]
    cols = []
    for b in basis:
        prod_ = order.mul(g, b)
        (ua, ub), (va, vb) = prod_
        cols.append([ua, ub, va, vb])
    # rows of result: coordinate i of image of basis j -> matrix[i][j]
    return [[cols[j][i] for j in range(4)] for i in range(4)]


def _scale_rows(order, rows, x):
    """Rows of the lattice x * L for x in xi-coords with integer entries."""
    out = []
    for r in rows:
        g = ((r[0], r[1]), (r[2], r[3]))
        prod_ = order.mul(x, g)
        (ua, ub), (va, vb) = prod_
        out.append([ua, ub, va, vb])
    return hnf(out)


def _k_content_and_primitive(order, rows):
    """Largest c in O_K with rows = c * rows'; returns (c, primitive rows)."""
    K = order.field
    mod_rows = []
    for r in rows:
        for g in (K.elt(r[0], r[1]), K.elt(r[2], r[3])):
            mod_rows.append([int(g.a), int(g.b)])
            gw = g * K.w()
            mod_rows.append([int(gw.a), int(gw.b)])
    H = hnf(mod_rows)
    if hnf_key(H) == ((1, 0), (0, 1)):
        return K.one(), hnf(rows)
    c = K.principal_generator(H)
    assert c is not None
    prim = []
    for r in rows:
        u = K.elt(r[0], r[1]) / c
        v = K.elt(r[2], r[3]) / c
        assert u.is_integral() and v.is_integral()
        prim.append([int(u.a), int(u.b), int(v.a), int(v.b)])
    return c, hnf(prim)


@dataclass
class ClassNumberResult:
    h: int
    certified: bool
    bound: int
    bound2: int | None = None
    reason: str = ""


def class_number(order: RelativeQuadraticOrder, units, bound_scale: float = 1.0,
                 stability_check: bool = True, budget: int = 6_000_000) -> ClassNumberResult:
    """Proper-ideal class number by exhaustive enumeration and merging.

    units: list of fundamental units of the order in xi-coords (from
    relative_fundamental_unit and the base field unit); used only to bound
    the generator search, never to assert structure.
    """
    B = max(2, int(_MINK[order.signature] * math.sqrt(order.disc_z()) * bound_scale) + 1)
    try:
        h1 = _class_count_at(order, units, B, budget)
    except Inconclusive as e:
        return ClassNumberResult(0, False, B, None, str(e))
    if not stability_check:
        return ClassNumberResult(h1, False, B, None, "stability check skipped")
    try:
        h2 = _class_count_at(order, units, 2 * B, budget)
    except Inconclusive as e:
        return ClassNumberResult(h1, False, B, 2 * B, f"2x bound inconclusive: {e}")
    if h1 != h2:
        return ClassNumberResult(h2, False, B, 2 * B, f"unstable: h({B})={h1} h({2*B})={h2}")
    return ClassNumberResult(h1, True, B, 2 * B)


def _class_count_at(order, units, B: int, budget: int = 6_000_000) -> int:
    cands = primitive_proper_ideals(order, B)
    keys = set(cands.keys())
    classified: dict = {}
    n_classes = 0
    for key in sorted(keys, key=lambda k: (abs_det_of(k), k)):
        if key in classified:
            continue
        n_classes += 1
        rset = _class_set(order, units, key, cands[key], B, keys, budget)
        if key not in rset:
            raise Inconclusive("class set does not contain its own seed")
        for k2 in rset:
            if k2 in classified and classified[k2] != n_classes:
                raise Inconclusive("overlapping class sets: covering failure")
            classified[k2] = n_classes
    if set(classified.keys()) != keys:
        raise Inconclusive("class sets do not cover all candidates")
    return n_classes


def abs_det_of(key) -> int:
    d = 1
    j = 0
    for r in key:
        while j < len(r) and r[j] == 0:
            j += 1
        d *= abs(r[j])
    return d


def _class_set(order, units, key, abn, B: int, restrict_to, budget: int = 6_000_000):
    """All candidate keys equivalent to the ideal `key` (norm <= B).

    Every primitive ideal I ~ J of norm n2 <= B equals lam * J for a
    generator lam in J^{-1} with |N(lam)| = n2/N(J). Writing lam = y/N(J)
    with y in the integral inverse-scaled lattice, such y have
    |N(y)| = n2 * N(J)^3 in [N(J)^3, B*N(J)^3]; enumerating that window
    modulo units and taking K-primitive parts of y*J recovers the class.
    """
    _, _, nj = abn
    rows = [list(r) for r in key]
    inv_rows, denom = _inverse_lattice(order, rows)
    found = set()
    for _, y in enumerate_mod_units(order, inv_rows, denom ** 3, B * denom ** 3, units,
                                    budget=budget):
        prod_rows = _scale_rows(order, rows, y)
        _, prim = _k_content_and_primitive(order, prod_rows)
        k2 = tuple(tuple(r) for r in prim)
        if k2 in restrict_to:
            found.add(k2)
    return found


# ---------------------------------------------------------------------------
# unit norm index and embedding counts


def unit_norm_index(order: RelativeQuadraticOrder, eps_rel, budget: int = 6_000_000):
    """[O_K^* : n_rel(O^*)] in {1, 2, 4}, or UNKNOWN on budget exhaustion.

    Enumerates unit representatives modulo the subgroup generated by the
    base unit and the relative unit, takes relative norms, and measures the
    subgroup of O_K^*/(O_K^*)^2 they generate. Every coset of that subgroup
    in O^* contains a representative inside its log-fundamental domain, so
    the norm subgroup found is the full one.
    """
    K = order.field
    eps_base = _base_unit(order)
    units = [eps_base, eps_rel] if eps_rel is not None else [eps_base]
    basis_rows = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    try:
        found = enumerate_mod_units(order, basis_rows, 1, 1, units, budget=budget)
    except Inconclusive:
        return UNKNOWN
    hits = set()
    for _, x in found:
        nr = order.rel_norm(x)
        if not nr.is_unit():
            continue
        hits.add(_unit_square_class(K, nr))
    sub = _generated_subgroup(hits)
    return 4 // len(sub)


def _unit_square_class(K: BaseField, u: FieldElement) -> tuple:
    """Class of the unit u in O_K^*/(O_K^*)^2, encoded as (sign, eps-parity)."""
    k = 0
    x = u
    E = K.eps
    # reduce iota0 into [1, E) by multiplying by eps powers, tracking parity
    while True:
        v = x * x
        if (v - 1).sign(0) < 0:
            x = x * E
            k += 1
        elif (v - E * E).sign(0) >= 0:
            x = x / E
            k += 1
        else:
            break
    sign = 1 if x.sign(0) > 0 else -1
    # after reduction x is +-1 or +-eps^0..: x in {1,-1} exactly
    assert x == K.elt(sign, 0), f"unit reduction failed: {x}"
    return (sign, k % 2)


def _generated_subgroup(hits: set) -> set:
    sub = {(1, 0)}
    frontier = list(hits)
    while frontier:
        g = frontier.pop()
        for s in list(sub):
            prod_ = (g[0] * s[0], (g[1] + s[1]) % 2)
            if prod_ not in sub:
                sub.add(prod_)
                frontier.append(prod_)
    return sub


def local_splitting(field: BaseField, p_gen: FieldElement, Dred: FieldElement) -> str:
    """Splitting of the prime (p_gen) in K(sqrt(Dred)): split/inert/ramified."""
    v = 0
    x = Dred
    while True:
        q = x / p_gen
        if q.is_integral():
            x = q
            v += 1
        else:
            break
    if v % 2 == 1:
        return "ramified"
    u0 = x
    np_ = abs(int(p_gen.norm()))
    if np_ % 2 == 1:
        if _is_residue_square(field, p_gen, u0):
            return "split"
        return "inert"
    # dyadic prime: square tests modulo pi^(2e) and pi^(2e+1)
    e = 0
    two = field.elt(2)
    x2 = two
    while True:
        q = x2 / p_gen
        if q.is_integral():
            x2 = q
            e += 1
        else:
            break
    if _square_mod_pi_power(field, p_gen, u0, 2 * e + 1):
        return "split"
    if _square_mod_pi_power(field, p_gen, u0, 2 * e):
        return "inert"
    return "ramified"


def _is_residue_square(field: BaseField, p_gen: FieldElement, u: FieldElement) -> bool:
    np_ = abs(int(p_gen.norm()))
    ip = ideal_of_element(p_gen)
    if _is_prime_int(np_):
        # degree-1: find t with w = t mod p
        ell = np_
        t = None
        for cand in range(ell):
            if ip.contains(field.w() - cand):
                t = cand
                break
        assert t is not None
        val = (int(u.a) + int(u.b) * t) % ell
        if val == 0:
            raise ValueError("unit part reduced to zero mod p")
        return pow(val, (ell - 1) // 2, ell) == 1
    # inert rational prime ell: residue field F_{ell^2}
    ell = math.isqrt(np_)
    assert ell * ell == np_
    return _ff2_is_square(field, ell, (int(u.a) % ell, int(u.b) % ell))


def _ff2_is_square(field: BaseField, ell: int, u) -> bool:
    """Squareness in F_ell[w]/(w^2 - c1 w - c0)."""
    c0, c1 = int(field._w2[0]) % ell, int(field._w2[1]) % ell

    def mul(x, y):
        a, b = x
        c, d = y
        bd = b * d % ell
        return ((a * c + bd * c0) % ell, (a * d + b * c + bd * c1) % ell)

    e = (ell * ell - 1) // 2
    r = (1, 0)
    base = u
    while e:
        if e & 1:
            r = mul(r, base)
        base = mul(base, base)
        e >>= 1
    return r == (1, 0)


def _square_mod_pi_power(field: BaseField, p_gen: FieldElement, u: FieldElement, k: int) -> bool:
    if k == 0:
        return True
    pk = p_gen ** k
    ipk = ideal_of_element(pk)
    (p, q), (z, r) = ipk.rows
    for i in range(int(p)):
        for j in range(int(r)):
            x = field.elt(i, j)
            if ipk.contains(x * x - u):
                return True
    return False


def _is_prime_int(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def local_embedding_factor(order: RelativeQuadraticOrder, p: IdealK, spec: LatticeSpec) -> int:
    """Local optimal-embedding count at a finite ramified place: 0, 1, or 2."""
    K = order.field
    p_gen = p.generator(K)
    if not _maximal_at(order, p_gen):
        return 0
    s = local_splitting(K, p_gen, order.Dred)
    if s == "split":
        return 0
    return 1 if s == "ramified" else 2


def _maximal_at(order: RelativeQuadraticOrder, p_gen: FieldElement) -> bool:
    """Is the order maximal at (p_gen)? Compared against the minimal realizable
    relative discriminant over the full split list of its own D."""
    dmax = maximal_order_disc(order.field, order.D)
    return _val_at(order.field, order.realized_disc, p_gen) == _val_at(order.field, dmax, p_gen)


def _val_at(field: BaseField, ideal: IdealK, p_gen: FieldElement) -> int:
    g = ideal.generator(field)
    v = 0
    while True:
        q = g / p_gen
        if q.is_integral():
            g = q
            v += 1
        else:
            break
    return v


_MAXDISC_CACHE: dict = {}


def maximal_order_disc(field: BaseField, D: FieldElement) -> IdealK:
    """Relative discriminant of the maximal order of K(sqrt D)."""
    key = (field.m, format_element(canonical_square_class(D)))
    if key in _MAXDISC_CACHE:
        return _MAXDISC_CACHE[key]
    best = None
    for dd, ff in square_divisor_splits(D):
        o = RelativeQuadraticOrder(field, D, dd)
        if o.realizable and (best is None or o.realized_disc.norm < best.norm):
            best = o.realized_disc
    assert best is not None
    _MAXDISC_CACHE[key] = best
    return best


@dataclass(frozen=True)
class Multiplicity:
    """Embedding count, possibly an interval when inputs are uncertified."""

    lo: Fraction
    hi: Fraction
    certified: bool

    @property
    def value(self) -> Fraction:
        if self.lo != self.hi:
            raise Inconclusive("multiplicity is an interval")
        return self.lo

    def __add__(self, other):
        return Multiplicity(self.lo + other.lo, self.hi + other.hi, self.certified and other.certified)

    def scale(self, c) -> "Multiplicity":
        c = Fraction(c)
        return Multiplicity(self.lo * c, self.hi * c, self.certified)


def m1_from_data(h_O: int, h_K: int, unit_index, r_A: int, local_factors) -> Multiplicity:
    """Optimal-embedding count formula from its ingredients.

    m1 = (h_O / h_K) * unit_index * 2^(-r_A) * prod(local factors).
    unit_index may be UNKNOWN, in which case the result is the {1,..,4}
    interval, uncertified.
    """
    base = Fraction(h_O, h_K) * Fraction(1, 2 ** r_A)
    for lf in local_factors:
        base *= lf
    if unit_index == UNKNOWN:
        return Multiplicity(base * 1, base * 4, False)
    return Multiplicity(base * unit_index, base * unit_index, True)


def embedding_count(order: RelativeQuadraticOrder, spec: LatticeSpec, h_O: int,
                    unit_index, h_certified: bool = True) -> Multiplicity:
    """m1 for a built order against a lattice spec; 0 if non-realizable."""
    if not order.realizable:
        return Multiplicity(Fraction(0), Fraction(0), True)
    locs = [local_embedding_factor(order, p, spec) for p in spec.ram_f]
    m = m1_from_data(h_O, order.field.h_K, unit_index, spec.r_A, locs)
    if not h_certified:
        m = Multiplicity(m.lo, m.hi, False)
    return m


BOTH_ZERO = "BOTH_ZERO"


def correspondence_ratio(h_O: int, unit_index: int, local_factors, n: int):
    """Ratio of embedding counts between the unramified-at-infinity spec and
    its companion ramified at the n elliptic places; 2^n when nonzero.
    """
    if n % 2 != 0:
        raise ValueError("companion spec needs even n to keep the ramification set even")
    a = m1_from_data(h_O, 1, unit_index, 0, local_factors)
    b = m1_from_data(h_O, 1, unit_index, n, local_factors)
    if a.value == 0:
        return BOTH_ZERO
    return a.value / b.value


# ---------------------------------------------------------------------------
# order arithmetic bundle + cache


@dataclass
class OrderArithmetic:
    h_O: int
    reg: float
    eps_rel: tuple
    torsion: int
    unit_index: object
    certified: bool
    bounds: tuple
    reason: str = ""


class OrderCache:
    """Append-only JSON-lines cache of order arithmetic records."""

    def __init__(self, path: str | None):
        self.path = path
        self.mem: dict = {}
        if path and os.path.exists(path):
            with open(path) as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    self.mem[self._key(rec)] = rec

    @staticmethod
    def _key(rec) -> tuple:
        return (rec["field_m"], rec["D"], tuple(tuple(r) for r in rec["d_hnf"]))

    def get(self, key):
        return self.mem.get(key)

    def put(self, key, rec):
        self.mem[key] = rec
        if self.path:
            with open(self.path, "a") as fh:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
                fh.flush()


def compute_arithmetic(order: RelativeQuadraticOrder, cache: OrderCache | None = None,
                       stability_check: bool = True, bound_scale: float = 1.0,
                       budget: int = 6_000_000,
                       unit_height: float = 1e9) -> OrderArithmetic:
    """Class number, regulator, relative unit, torsion, unit index; cached."""
    key = order.cache_key()
    if cache is not None:
        rec = cache.get(key)
        if rec is not None:
            er = rec["eps_rel"]
            return OrderArithmetic(
                rec["h_O"], rec["reg"], _coords_from_json(er) if er else None, rec["torsion"],
                rec["unit_index"], rec["certified"], tuple(rec["oracle_bounds"]), rec.get("reason", ""),
            )
    if order.signature == HYPERBOLIC_ELLIPTIC:
        eps_rel, reg, torsion = relative_fundamental_unit(order, unit_height)
        units = [_base_unit(order), eps_rel]
    elif order.signature == TOTALLY_ELLIPTIC:
        eps_rel, reg = None, 0.0
        torsion = norm_one_group_size(order)
        units = [_base_unit(order)]
    else:
        raise ScopeError("class data is computed only for hyperbolic-elliptic and CM orders")
    try:
        cn = class_number(order, units, bound_scale, stability_check, budget)
    except Inconclusive as e:
        cn = ClassNumberResult(0, False, 0, None, str(e))
    ui = unit_norm_index(order, eps_rel, budget)
    certified = cn.certified and ui != UNKNOWN
    arith = OrderArithmetic(cn.h, reg, eps_rel, torsion, ui, certified,
                            (cn.bound, cn.bound2 or 0), cn.reason)
    if cache is not None:
        cache.put(key, {
            "field_m": order.field.m,
            "D": key[1],
            "d_hnf": [list(r) for r in order.d_ideal.rows],
            "h_O": arith.h_O,
            "reg": arith.reg,
            "eps_rel": _coords_to_json(eps_rel) if eps_rel else None,
            "torsion": torsion,
            "unit_index": ui,
            "certified": certified,
            "oracle_bounds": list(arith.bounds),
            "reason": arith.reason,
        })
    return arith


def _base_unit(order):
    K = order.field
    return ((int(K.eps.a), int(K.eps.b)), (0, 0))


def _coords_to_json(x):
    (ua, ub), (va, vb) = x
    return [int(ua), int(ub), int(va), int(vb)]


def _coords_from_json(v):
    return ((v[0], v[1]), (v[2], v[3]))
