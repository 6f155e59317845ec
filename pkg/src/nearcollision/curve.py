"""Rational points on y^2 = x^3 + A x + B: exact group law, naive and
canonical heights, the height-pairing matrix and a small basis search.

Points are ``(x, y)`` pairs of Fractions; the point at infinity is ``None``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import mpmath
import numpy as np
from mpmath import mpf
from sympy import factorint

from .errors import ContractViolation
from .numerics import (DEFAULT_CONTEXT, FieldElement, PrecisionContext, SymMatrix,
                       complex_root_moduli, min_eigenvalue, real_roots, to_mpf)

PointQ = Optional[tuple]
O = None


@dataclass(frozen=True)
class CurveQ:
    A: Fraction
    B: Fraction

    def __post_init__(self):
        object.__setattr__(self, "A", Fraction(self.A))
        object.__setattr__(self, "B", Fraction(self.B))
        if self.discriminant == 0:
            raise ContractViolation("singular curve: discriminant is zero")

    @property
    def discriminant(self) -> Fraction:
        return -16 * (4 * self.A ** 3 + 27 * self.B ** 2)

    @property
    def j_invariant(self) -> Fraction:
        return -1728 * (4 * self.A) ** 3 / self.discriminant

    def f(self, x):
        return x ** 3 + self.A * x + self.B

    def contains(self, P: PointQ) -> bool:
        if P is None:
            return True
        x, y = P
        return y * y == self.f(x)

    def cubic(self) -> list[Fraction]:
        return [Fraction(1), Fraction(0), self.A, self.B]

    def roots(self, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list[mpf]:
        """Real roots of x^3+Ax+B, decreasing (e1 > e2 > e3 when there are three)."""
        return real_roots(self.cubic(), ctx)

    def point(self, x, y) -> tuple:
        P = (Fraction(x), Fraction(y))
        if not self.contains(P):
            raise ContractViolation(f"point {P} is not on {self}")
        return P

    def __str__(self):
        return f"y^2 = x^3 + ({self.A})x + ({self.B})"


def as_point(P) -> PointQ:
    """Normalize to a pair of Fractions (or None)."""
    if P is None:
        return None
    return (Fraction(P[0]), Fraction(P[1]))


def _check(curve: CurveQ, P: PointQ) -> PointQ:
    P = as_point(P)
    if not curve.contains(P):
        raise ContractViolation(f"point {P} is not on {curve}")
    return P


def neg(curve: CurveQ, P: PointQ) -> PointQ:
    P = as_point(P)
    return None if P is None else (P[0], -P[1])


def _add(curve: CurveQ, P: PointQ, Q: PointQ) -> PointQ:
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if y1 + y2 == 0:
            return None
        lam = (3 * x1 * x1 + curve.A) / (2 * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam - x1 - x2
    return (x3, -(y1 + lam * (x3 - x1)))


def add(curve: CurveQ, P: PointQ, Q: PointQ) -> PointQ:
    return _add(curve, _check(curve, P), _check(curve, Q))


def sub(curve: CurveQ, P: PointQ, Q: PointQ) -> PointQ:
    return add(curve, P, neg(curve, Q))


def mul(curve: CurveQ, P: PointQ, n: int) -> PointQ:
    P = _check(curve, P)
    if n < 0:
        P, n = neg(curve, P), -n
    acc = None
    while n:
        if n & 1:
            acc = _add(curve, acc, P)
        P = _add(curve, P, P)
        n >>= 1
    return acc


@dataclass(frozen=True)
class MWBasis:
    generators: tuple
    torsion_order: int = 1
    torsion_points: tuple = (None,)

    @property
    def rank(self) -> int:
        return len(self.generators)


def multi_scalar(curve: CurveQ, basis: MWBasis, coeffs: Sequence[int],
                 torsion_choice: PointQ = None) -> PointQ:
    """m1*P1 + ... + mr*Pr + T, computed exactly."""
    if len(coeffs) != basis.rank:
        raise ContractViolation(f"expected {basis.rank} coefficients, got {len(coeffs)}")
    acc = _check(curve, torsion_choice)
    for m, P in zip(coeffs, basis.generators):
        if m:
            acc = _add(curve, acc, mul(curve, P, m))
    return acc


# ---------------------------------------------------------------------------
# heights

def naive_height(x, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """Absolute logarithmic Weil height of a rational or algebraic x.

    For an element of a number field the height is log(Mahler measure)/degree,
    computed from the integral primitive minimal polynomial.
    """
    with ctx.activate():
        if x is None:
            return mpf(0)
        if isinstance(x, FieldElement):
            if x.is_rational():
                return naive_height(x.coeffs[0], ctx)
            poly = x.char_poly()
            den = math.lcm(*(c.denominator for c in poly))
            ints = [int(c * den) for c in poly]
            g = math.gcd(*ints)
            ints = [c // g for c in ints]
            moduli = complex_root_moduli(ints, ctx)
            measure = mpmath.log(abs(ints[0]))
            for r in moduli:
                if r > 1:
                    measure += mpmath.log(r)
            return measure / (len(ints) - 1)
        x = Fraction(x)
        return mpmath.log(max(abs(x.numerator), x.denominator))


def _val(q: Fraction, p: int) -> int:
    """p-adic valuation; zero maps to a large sentinel."""
    q = Fraction(q)
    if q == 0:
        return 10 ** 9
    v = 0
    a, b = q.numerator, q.denominator
    while a % p == 0:
        a //= p
        v += 1
    while b % p == 0:
        b //= p
        v -= 1
    return v


@lru_cache(maxsize=64)
def _bad_primes(A: Fraction, B: Fraction) -> tuple:
    disc = -16 * (4 * A ** 3 + 27 * B ** 2)
    return tuple(sorted(factorint(abs(disc.numerator))))


def _assert_minimal(curve: CurveQ, primes):
    A, B = curve.A, curve.B
    if A.denominator != 1 or B.denominator != 1:
        raise ContractViolation("canonical_height needs an integral model")
    c4, c6 = -48 * A, -864 * B
    for p in primes:
        if p >= 5:
            if _val(A, p) >= 4 and _val(B, p) >= 6:
                raise ContractViolation(f"model is not minimal at {p}")
        elif not (_val(c4, p) < 4 or _val(c6, p) < 6 or _val(curve.discriminant, p) < 12):
            raise ContractViolation(f"cannot certify minimality at {p}")


def _lambda_inf(curve: CurveQ, x: mpf, ctx: PrecisionContext) -> mpf:
    """Archimedean local height by the doubling series in x."""
    A, B = to_mpf(curve.A), to_mpf(curve.B)
    half = mpf(1) / 2
    xi = x if abs(x) >= half else x + 1
    res = mpmath.log(abs(xi)) / 2
    weight = mpf(1) / 8
    terms = int(ctx.working_digits * math.log(10) / math.log(4)) + 10
    for _ in range(terms):
        phi = x ** 4 - 2 * A * x * x - 8 * B * x + A * A
        psi = 4 * x ** 3 + 4 * A * x + 4 * B
        x = phi / psi
        if abs(x) >= half:
            num, xi_next = phi, x
        else:
            num, xi_next = phi + psi, x + 1
        res += weight * mpmath.log(abs(num / xi ** 4))
        weight /= 4
        xi = xi_next
    return res


def _lambda_p(curve: CurveQ, P: tuple, p: int) -> Fraction:
    """Non-archimedean local height at p, in units of log p."""
    A, B = curve.A, curve.B
    x, y = P
    N = _val(curve.discriminant, p)
    a = _val(3 * x * x + A, p)
    b = _val(2 * y, p)
    if a <= 0 or b <= 0:
        r = Fraction(max(0, -_val(x, p)))
    elif _val(-48 * A, p) == 0:
        M = min(Fraction(b), Fraction(N, 2))
        r = -M * (N - M) / N
    else:
        C = _val(3 * x ** 4 + 6 * A * x * x + 12 * B * x - A * A, p)
        r = Fraction(-2 * b, 3) if C >= 3 * b else Fraction(-C, 4)
    return r / 2


def canonical_height(curve: CurveQ, P: PointQ, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """Canonical height with the normalization in which h(2P) = 4 h(P) and
    ĥ(P) - ½ h(x(P)) is bounded (half of the value some CAS systems print)."""
    P = _check(curve, P)
    if P is None:
        return mpf(0)
    primes = _bad_primes(curve.A, curve.B)
    _assert_minimal(curve, primes)
    x = P[0]
    with ctx.activate():
        h = _lambda_inf(curve, to_mpf(x), ctx)
        h += mpmath.log(x.denominator) / 2
        for p in primes:
            # replace the generic contribution ½ v_p(den x) log p by the exact one
            local = _lambda_p(curve, P, p) - Fraction(max(0, -_val(x, p)), 2)
            if local:
                h += to_mpf(local) * mpmath.log(p)
        # torsion points have height exactly zero; absorb rounding noise
        if abs(h) < mpf(10) ** (-ctx.decimal_digits + 5):
            return mpf(0)
        return h


def height_pairing(curve: CurveQ, P, Q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    with ctx.activate():
        return (canonical_height(curve, add(curve, P, Q), ctx)
                - canonical_height(curve, P, ctx) - canonical_height(curve, Q, ctx)) / 2


@dataclass(frozen=True)
class HeightPairing:
    matrix: SymMatrix
    rho: mpf
    gamma: Optional[mpf] = None

    @property
    def heights(self) -> list:
        return [self.matrix[i, i] for i in range(self.matrix.dimension)]


def pairing_matrix(curve: CurveQ, basis: MWBasis, ctx: PrecisionContext = DEFAULT_CONTEXT,
                   gamma=None) -> HeightPairing:
    gens = basis.generators
    r = len(gens)
    with ctx.activate():
        h = [canonical_height(curve, P, ctx) for P in gens]
        rows = [[mpf(0)] * r for _ in range(r)]
        for i in range(r):
            rows[i][i] = h[i]
            for j in range(i + 1, r):
                hij = canonical_height(curve, add(curve, gens[i], gens[j]), ctx)
                rows[i][j] = rows[j][i] = (hij - h[i] - h[j]) / 2
        H = SymMatrix.from_rows(rows)
        rho = min_eigenvalue(H, ctx)
    if rho <= 0:
        raise ContractViolation("height-pairing matrix is not positive definite: generators are dependent")
    return HeightPairing(H, rho, None if gamma is None else mpf(gamma))


def transform_basis(curve: CurveQ, basis: MWBasis, U) -> MWBasis:
    """New generators P'_j = sum_i U[i][j] P_i."""
    r = basis.rank
    gens = tuple(multi_scalar(curve, basis, [U[i][j] for i in range(r)]) for j in range(r))
    return MWBasis(gens, basis.torsion_order, basis.torsion_points)


def _exact_det(M) -> Fraction:
    m = [[Fraction(x) for x in row] for row in M]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


def _exact_inverse(M) -> list:
    n = len(M)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        pv = m[c][c]
        m[c] = [x / pv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return [row[n:] for row in m]


def _greedy_seed(H: np.ndarray, radius: int) -> tuple:
    """Best-improvement hill climb over elementary column operations."""
    r = len(H)
    U = np.eye(r, dtype=np.int64)
    best = np.linalg.eigvalsh(H)[0]
    while True:
        step = None
        for i, j in itertools.permutations(range(r), 2):
            for c in range(-radius, radius + 1):
                if c == 0:
                    continue
                V = U.copy()
                V[:, j] += c * V[:, i]
                if np.abs(V).max() > radius:
                    continue
                val = np.linalg.eigvalsh(V.T @ H @ V)[0]
                if val > best * (1 + 1e-12) and (step is None or val > step[0]):
                    step = (val, V)
        if step is None:
            return best, U
        best, U = step


def improve_basis(curve: CurveQ, basis: MWBasis, ctx: PrecisionContext = DEFAULT_CONTEXT,
                  search_radius: int = 2) -> MWBasis:
    """Basis of the same lattice with the largest least eigenvalue rho.

    Write H' = U^T H U and V = U^{-T}; then 1/rho(H') is the largest
    eigenvalue of V^T H^{-1} V, so every column v of V satisfies
    v^T H^{-1} v <= 1/rho(H').  Once some basis with rho0 is known, it
    suffices to enumerate the integer vectors with entries in
    [-search_radius, search_radius] below 1/rho0 and test every r-subset
    of determinant +-1; the search is exhaustive over that box.
    """
    r = basis.rank
    H = np.array([[float(x) for x in row] for row in pairing_matrix(curve, basis, ctx).matrix.entries])
    K = np.linalg.inv(H)
    rho0 = np.linalg.eigvalsh(H)[0]
    seed_rho, seed_U = _greedy_seed(H, search_radius)
    limit = (1 / seed_rho) * (1 + 1e-9)
    vecs = []
    for v in itertools.product(range(-search_radius, search_radius + 1), repeat=r):
        lead = next((c for c in v if c), 0)
        if lead <= 0:
            continue  # zero vector, or the negative of one already listed
        v = np.array(v)
        if v @ K @ v <= limit:
            vecs.append(v)
    vecs.sort(key=lambda v: float(v @ K @ v))

    best = {"lam": 1 / seed_rho, "V": None}

    def extend(start, chosen):
        if len(chosen) == r:
            V = np.array(chosen).T
            if abs(_exact_det(V.tolist())) != 1:
                return
            lam = np.linalg.eigvalsh(V.T @ K @ V)[-1]
            if lam < best["lam"] * (1 - 1e-12):
                best["lam"], best["V"] = lam, V
            return
        for i in range(start, len(vecs)):
            W = np.array(chosen + [vecs[i]]).T
            if np.linalg.matrix_rank(W) <= len(chosen):
                continue
            # the largest eigenvalue of a principal submatrix bounds the full one from below
            if np.linalg.eigvalsh(W.T @ K @ W)[-1] >= best["lam"]:
                continue
            extend(i + 1, chosen + [vecs[i]])

    extend(0, [])
    if best["V"] is not None:
        inv = _exact_inverse(best["V"].tolist())
        U = [[int(inv[j][i]) for j in range(r)] for i in range(r)]
    elif seed_rho > rho0 * (1 + 1e-12):
        U = seed_U.tolist()
    else:
        return basis
    return transform_basis(curve, basis, U)
