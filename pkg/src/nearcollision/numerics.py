"""High-precision real arithmetic: precision contexts, exact real-root
isolation, symmetric eigenvalues and exact arithmetic in Q(theta) for a
single real algebraic number theta.

Polynomials are coefficient lists with the highest degree first (the
mpmath convention).  Field elements store their coordinates lowest degree
first, i.e. ``c0 + c1*theta + c2*theta**2 + ...``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath
from mpmath import mpf

from .errors import ContractViolation, PrecisionError


@dataclass(frozen=True)
class PrecisionContext:
    decimal_digits: int = 60
    guard_digits: int = 10

    def __post_init__(self):
        if self.decimal_digits < 30:
            raise ContractViolation(f"decimal_digits must be >= 30, got {self.decimal_digits}")
        if self.guard_digits < 10:
            raise ContractViolation(f"guard_digits must be >= 10, got {self.guard_digits}")

    @property
    def working_digits(self) -> int:
        return self.decimal_digits + self.guard_digits

    def activate(self):
        """Context manager switching mpmath to the working precision."""
        return mpmath.workdps(self.working_digits)

    def eps(self):
        return mpf(10) ** (-self.decimal_digits)

    def with_digits(self, digits: int) -> "PrecisionContext":
        return PrecisionContext(max(30, int(digits)), self.guard_digits)


DEFAULT_CONTEXT = PrecisionContext()


def to_mpf(q) -> mpf:
    if isinstance(q, Fraction):
        return mpf(q.numerator) / q.denominator
    return mpf(q)


# ---------------------------------------------------------------------------
# exact polynomial helpers over Q

def as_poly(poly: Iterable) -> list[Fraction]:
    p = [Fraction(c) for c in poly]
    while p and p[0] == 0:
        p.pop(0)
    return p


def poly_eval(p: Sequence, x):
    acc = 0 * x
    for c in p:
        acc = acc * x + c
    return acc


def poly_deriv(p: Sequence[Fraction]) -> list[Fraction]:
    n = len(p) - 1
    return [c * (n - i) for i, c in enumerate(p[:-1])]


def poly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]):
    a = as_poly(a)
    b = as_poly(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [], a
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    r = list(a)
    for i in range(len(q)):
        coef = r[i] / b[0]
        q[i] = coef
        if coef:
            for j, bj in enumerate(b):
                r[i + j] -= coef * bj
    return q, as_poly(r[len(q):])


def poly_gcd(a, b) -> list[Fraction]:
    a, b = as_poly(a), as_poly(b)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    if not a:
        return []
    return [c / a[0] for c in a]


def sturm_chain(p: Sequence[Fraction]) -> list[list[Fraction]]:
    chain = [as_poly(p), poly_deriv(as_poly(p))]
    while chain[-1] and len(chain[-1]) > 1:
        rem = poly_divmod(chain[-2], chain[-1])[1]
        if not rem:
            break
        chain.append([-c for c in rem])
    return chain


def _sign_variations(chain, x) -> int:
    signs = []
    for q in chain:
        v = poly_eval(q, x)
        if v:
            signs.append(v > 0)
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def squarefree_part(p) -> list[Fraction]:
    p = as_poly(p)
    g = poly_gcd(p, poly_deriv(p))
    if len(g) <= 1:
        return p
    return poly_divmod(p, g)[0]


def count_real_roots(poly, lo=None, hi=None) -> int:
    """Exact number of distinct real roots in (lo, hi] (whole line by default)."""
    p = squarefree_part(poly)
    if len(p) < 2:
        return 0
    chain = sturm_chain(p)
    bound = cauchy_bound(p)
    lo = -bound if lo is None else Fraction(lo)
    hi = bound if hi is None else Fraction(hi)
    return _sign_variations(chain, lo) - _sign_variations(chain, hi)


def cauchy_bound(p: Sequence[Fraction]) -> Fraction:
    return 1 + max(abs(c / p[0]) for c in p[1:])


def _isolate(p: list[Fraction]) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals (lo, hi], each holding exactly one root of p."""
    chain = sturm_chain(p)
    bound = cauchy_bound(p)
    out = []
    stack = [(-bound, bound, _sign_variations(chain, -bound), _sign_variations(chain, bound))]
    while stack:
        lo, hi, vlo, vhi = stack.pop()
        n = vlo - vhi
        if n == 0:
            continue
        if n == 1:
            out.append((lo, hi))
            continue
        for k in (2, 3, 5, 7, 11, 13):
            mid = lo + (hi - lo) / k
            if poly_eval(p, mid) != 0:
                break
        vmid = _sign_variations(chain, mid)
        stack.append((lo, mid, vlo, vmid))
        stack.append((mid, hi, vmid, vhi))
    return out


def real_roots(poly, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list[mpf]:
    """All distinct real roots of a rational polynomial, in decreasing order.

    Roots are isolated exactly with a Sturm sequence, then refined by
    bisection and safeguarded Newton iteration at the working precision.
    """
    p = as_poly(poly)
    if len(p) < 2:
        raise ContractViolation("real_roots needs a nonzero polynomial of degree >= 1")
    p = squarefree_part(p)
    intervals = _isolate(p)
    dp = poly_deriv(p)
    roots = []
    with ctx.activate():
        pm = [to_mpf(c) for c in p]
        dpm = [to_mpf(c) for c in dp]
        tol = mpf(10) ** (-ctx.working_digits)
        for lo, hi in intervals:
            if poly_eval(p, hi) == 0:
                roots.append(to_mpf(hi))
                continue
            roots.append(_refine(pm, dpm, to_mpf(lo), to_mpf(hi), tol, ctx.eps()))
    roots.sort(reverse=True)
    return roots


def _refine(pm, dpm, a, b, tol, claimed=None, max_iter=2000):
    """Root in the bracket (a, b]: Newton to tol, or until the steps stall
    at rounding level while already below the claimed accuracy."""
    claimed = tol if claimed is None else claimed
    fa = poly_eval(pm, a)
    # bisect down to ~50 bits before handing over to Newton
    for _ in range(200):
        if b - a <= mpf(2) ** -50 * max(1, abs(a)):
            break
        m = (a + b) / 2
        fm = poly_eval(pm, m)
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    x = (a + b) / 2
    prev = None
    for _ in range(max_iter):
        fx = poly_eval(pm, x)
        dfx = poly_eval(dpm, x)
        if fx == 0:
            return x
        step = fx / dfx if dfx else None
        if step is None or not (a <= x - step <= b):
            # Newton left the bracket: one bisection step instead
            m = (a + b) / 2
            fm = poly_eval(pm, m)
            if (fm > 0) == (fa > 0):
                a, fa = m, fm
            else:
                b = m
            x = (a + b) / 2
            continue
        x -= step
        scale = max(1, abs(x))
        if abs(step) <= tol * scale:
            return x
        if prev is not None and abs(step) <= claimed * scale and abs(step) >= prev / 2:
            return x  # rounding noise: no further progress possible
        prev = abs(step)
    raise PrecisionError("root refinement did not converge")


# ---------------------------------------------------------------------------
# symmetric matrices

@dataclass(frozen=True)
class SymMatrix:
    entries: tuple

    def __post_init__(self):
        n = len(self.entries)
        if n == 0 or any(len(row) != n for row in self.entries):
            raise ContractViolation("SymMatrix needs a non-empty square array")
        scale = max(abs(x) for row in self.entries for x in row) or 1
        for i in range(n):
            for j in range(i):
                if abs(self.entries[i][j] - self.entries[j][i]) > scale * mpf(10) ** -20:
                    raise ContractViolation(f"matrix is not symmetric at ({i},{j})")

    @classmethod
    def from_rows(cls, rows) -> "SymMatrix":
        return cls(tuple(tuple(row) for row in rows))

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def congruent(self, U) -> "SymMatrix":
        """U^T H U for an integer matrix U given as a list of rows."""
        n = self.dimension
        HU = [[sum(self.entries[i][k] * U[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        out = [[sum(U[k][i] * HU[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(i):
                out[i][j] = out[j][i]
        return SymMatrix.from_rows(out)


def symmetric_eigenvalues(H, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list[mpf]:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending."""
    if not isinstance(H, SymMatrix):
        H = SymMatrix.from_rows(H)
    n = H.dimension
    with ctx.activate():
        a = [[mpf(x) for x in row] for row in H.entries]
        total = sum(a[i][j] ** 2 for i in range(n) for j in range(n))
        thresh = total * mpf(10) ** (-2 * ctx.working_digits)
        for _ in range(200):
            off = sum(a[i][j] ** 2 for i in range(n) for j in range(i + 1, n))
            if off <= thresh:
                break
            for p in range(n):
                for q in range(p + 1, n):
                    apq = a[p][q]
                    if apq == 0:
                        continue
                    theta = (a[q][q] - a[p][p]) / (2 * apq)
                    t = 1 / (abs(theta) + mpmath.sqrt(theta * theta + 1))
                    if theta < 0:
                        t = -t
                    c = 1 / mpmath.sqrt(t * t + 1)
                    s = t * c
                    for k in range(n):
                        akp, akq = a[k][p], a[k][q]
                        a[k][p] = c * akp - s * akq
                        a[k][q] = s * akp + c * akq
                    for k in range(n):
                        apk, aqk = a[p][k], a[q][k]
                        a[p][k] = c * apk - s * aqk
                        a[q][k] = s * apk + c * aqk
        else:
            raise PrecisionError("Jacobi sweeps did not converge")
        return sorted(a[i][i] for i in range(n))


def min_eigenvalue(H, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    return symmetric_eigenvalues(H, ctx)[0]


# ---------------------------------------------------------------------------
# a real algebraic number and exact arithmetic in the field it generates

@lru_cache(maxsize=None)
def _root_value(minpoly: tuple, index: int, digits: int, guard: int) -> mpf:
    return real_roots(minpoly, PrecisionContext(digits, guard))[index]


@dataclass(frozen=True)
class AlgebraicConstant:
    """A real root of a monic irreducible integer polynomial.

    ``chosen_root_index`` indexes the real roots in decreasing order.
    """

    name: str
    minimal_polynomial: tuple
    chosen_root_index: int = 0

    def __post_init__(self):
        if self.minimal_polynomial[0] != 1:
            raise ContractViolation("minimal polynomial must be monic")

    @property
    def degree(self) -> int:
        return len(self.minimal_polynomial) - 1

    def value(self, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
        return _root_value(tuple(self.minimal_polynomial), self.chosen_root_index,
                           ctx.decimal_digits, ctx.guard_digits)

    def element(self, coeffs) -> "FieldElement":
        return FieldElement(self, coeffs)

    def generator(self) -> "FieldElement":
        return FieldElement(self, (0, 1))


def _reduce_mod(field: AlgebraicConstant, coeffs: list[Fraction]) -> tuple:
    """Reduce a low-first coefficient list modulo the minimal polynomial."""
    deg = field.degree
    # theta^deg = -(m_{deg-1} theta^{deg-1} + ... + m_0)
    low_first = list(reversed(field.minimal_polynomial))
    c = list(coeffs)
    for k in range(len(c) - 1, deg - 1, -1):
        top = c[k]
        if top:
            for i in range(deg):
                c[k - deg + i] -= top * low_first[i]
        c[k] = 0
    c = c[:deg] + [Fraction(0)] * (deg - len(c))
    return tuple(Fraction(x) for x in c[:deg])


class FieldElement:
    """Exact element of Q(theta), stored as coordinates in the power basis."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: AlgebraicConstant, coeffs):
        self.field = field
        self.coeffs = _reduce_mod(field, [Fraction(c) for c in coeffs])

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ContractViolation("mixing elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, (other,))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, [-a for a in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prod = [Fraction(0)] * (2 * self.field.degree - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] += a * b
        return FieldElement(self.field, prod)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field element")
        # solve (multiplication matrix) * x = e_0 exactly
        n = self.field.degree
        cols = []
        basis = FieldElement(self.field, (1,))
        theta = self.field.generator()
        for _ in range(n):
            cols.append((self * basis).coeffs)
            basis = basis * theta
        m = [[cols[j][i] for j in range(n)] + [Fraction(int(i == 0))] for i in range(n)]
        for col in range(n):
            piv = next(r for r in range(col, n) if m[r][col] != 0)
            m[col], m[piv] = m[piv], m[col]
            pv = m[col][col]
            m[col] = [x / pv for x in m[col]]
            for r in range(n):
                if r != col and m[r][col]:
                    f = m[r][col]
                    m[r] = [x - f * y for x, y in zip(m[r], m[col])]
        return FieldElement(self.field, [m[i][n] for i in range(n)])

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = FieldElement(self.field, (1,))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.field.name, self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def numeric(self, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
        theta = self.field.value(ctx)
        with ctx.activate():
            return poly_eval([to_mpf(c) for c in reversed(self.coeffs)], theta)

    def char_poly(self) -> list[Fraction]:
        """Characteristic polynomial of multiplication-by-self (Faddeev-LeVerrier)."""
        n = self.field.degree
        theta = self.field.generator()
        basis = [theta ** k for k in range(n)]
        M = [[(self * b).coeffs[i] for b in basis] for i in range(n)]
        coeffs = [Fraction(1)]
        Mk = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for k in range(1, n + 1):
            AM = [[sum(M[i][t] * Mk[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
            ck = -sum(AM[i][i] for i in range(n)) / k
            coeffs.append(ck)
            Mk = [[AM[i][j] + (ck if i == j else 0) for j in range(n)] for i in range(n)]
        return coeffs

    def __repr__(self):
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            sym = "" if k == 0 else (self.field.name if k == 1 else f"{self.field.name}^{k}")
            terms.append(f"{c}*{sym}" if sym else f"{c}")
        return " + ".join(terms) if terms else "0"


def eval_algebraic(expr: FieldElement, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    return expr.numeric(ctx)


ZETA = AlgebraicConstant("zeta", (1, 0, 0, -15), 0)     # cube root of 15
SQRT35 = AlgebraicConstant("sqrt35", (1, 0, -35), 0)    # positive root


def complex_root_moduli(poly, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list[mpf]:
    with ctx.activate():
        roots = mpmath.polyroots([to_mpf(Fraction(c)) for c in as_poly(poly)],
                                 maxsteps=500, extraprec=4 * ctx.working_digits)
        return sorted((abs(r) for r in roots), reverse=True)
