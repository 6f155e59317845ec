"""The two equation families, their Weierstrass models and the birational
maps between them, the real Puiseux branch of the cubic family, the
special points P0, and recovery of the binomial variables.

Cubic family:   g(u,v) = 15u^3 - v^3 + 4v^2 - 15u - 3v - 90d,  d = (N^3-N)/6,
                E: y^2 = x^3 - 1575x + a6(N).
Quartic:        v^2 = Q(u) = 35u^4 - 350u^3 + 945u^2 - 630u + 315^2,
                E: y^2 = x^3 - 13968675x + 3410363250.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from .curve import CurveQ
from .errors import ContractViolation, ExceptionalPointError
from .numerics import (DEFAULT_CONTEXT, SQRT35, ZETA, FieldElement,
                       PrecisionContext, to_mpf)

# Rational-function templates: lists of (coefficient, power of N, power of
# the first variable, power of the second variable).

# X(u,v) numerator; denominator (N-u)^2
_X_NUM = [(-45, 3, 0, 1), (45, 2, 1, 1), (120, 3, 0, 0), (-60, 2, 1, 0), (-60, 1, 2, 0),
          (15, 1, 0, 1), (-15, 0, 1, 1), (3, 0, 0, 2), (60, 0, 1, 0), (-12, 0, 0, 1),
          (-60, 1, 0, 0), (9, 0, 0, 0)]

# Y(u,v) = (3/2) * numerator / (N-u)^3.  The overall sign is the one for
# which U, V below invert (X, Y); it also matches the d = -1 special forms.
_Y_SCALE = Fraction(3, 2)
_Y_NUM = [(675, 6, 0, 0), (-675, 5, 1, 0), (-675, 4, 2, 0), (675, 3, 3, 0), (120, 3, 0, 2),
          (-120, 2, 1, 2), (-675, 4, 0, 0), (1125, 3, 1, 0), (-480, 3, 0, 1), (-225, 2, 2, 0),
          (390, 2, 1, 1), (-225, 1, 3, 0), (90, 1, 2, 1), (420, 3, 0, 0), (-180, 2, 1, 0),
          (-180, 1, 2, 0), (-40, 1, 0, 2), (-60, 0, 3, 0), (40, 0, 1, 2), (150, 2, 0, 0),
          (-300, 1, 1, 0), (190, 1, 0, 1), (150, 0, 2, 0), (-190, 0, 1, 1), (6, 0, 0, 2),
          (-240, 1, 0, 0), (240, 0, 1, 0), (-24, 0, 0, 1), (18, 0, 0, 0)]

# U(x,y), V(x,y): common denominator _UV_DEN
_U_NUM = [(-2, 1, 3, 0), (-120, 0, 2, 0), (6, 0, 1, 1), (15525, 3, 1, 0), (-12375, 1, 1, 0),
          (540, 0, 1, 0), (4050, 4, 0, 1), (-2700, 2, 0, 1), (360, 1, 0, 1), (450, 0, 0, 1),
          (-1366875, 7, 0, 0), (1366875, 5, 0, 0), (135000, 4, 0, 0), (-455625, 3, 0, 0),
          (-67500, 2, 0, 0), (58725, 1, 0, 0), (-40500, 0, 0, 0)]
_V_NUM = [(5467500, 6, 0, 0), (-7290000, 4, 0, 0), (759375, 3, 0, 0), (3037500, 2, 0, 0),
          (-577125, 1, 0, 0), (-380700, 0, 0, 0), (-91125, 5, 1, 0), (60750, 3, 1, 0),
          (-8100, 2, 1, 0), (-10125, 1, 1, 0), (-8100, 0, 1, 0), (-270, 1, 2, 0),
          (5400, 3, 0, 1), (-1800, 1, 0, 1), (270, 0, 0, 1), (90, 2, 1, 1), (-30, 0, 1, 1)]
_UV_DEN = [(-2, 0, 3, 0), (-360, 1, 2, 0), (-9450, 2, 1, 0), (-4050, 0, 1, 0),
           (2733750, 6, 0, 0), (-2733750, 4, 0, 0), (297000, 3, 0, 0), (911250, 2, 0, 0),
           (-243000, 1, 0, 0), (-89100, 0, 0, 0)]


def _eval_terms(terms, N, a, b):
    return sum(c * N ** k * a ** i * b ** j for c, k, i, j in terms)


def a6(N: int) -> Fraction:
    N = Fraction(N)
    return (Fraction(-1366875, 4) * N ** 6 + Fraction(1366875, 2) * N ** 4 + 33750 * N ** 3
            - Fraction(1366875, 4) * N ** 2 - 33750 * N + 52650)


@dataclass(frozen=True)
class CubicFamily:
    N: int

    def __post_init__(self):
        if self.N == 0 or (self.N ** 3 - self.N) % 6:
            raise ContractViolation(f"N={self.N} does not give a nonzero integral d")
        if self.N in (1, -1):
            raise ContractViolation("d = 0 for N = +-1")

    kind = "cubic"

    @property
    def d(self) -> int:
        return (self.N ** 3 - self.N) // 6

    @property
    def curve(self) -> CurveQ:
        return CurveQ(-1575, a6(self.N))

    @property
    def exceptional_u(self) -> int:
        return self.N

    def g(self, u, v):
        return 15 * u ** 3 - v ** 3 + 4 * v ** 2 - 15 * u - 3 * v - 90 * self.d

    def on_model(self, u, v) -> bool:
        return self.g(Fraction(u), Fraction(v)) == 0

    def map_CtoE(self, u, v) -> tuple:
        u, v = Fraction(u), Fraction(v)
        if not self.on_model(u, v):
            raise ContractViolation(f"({u},{v}) is not on the model")
        if u == self.N:
            raise ExceptionalPointError(f"u = {u} is a pole of the map to E")
        N = self.N
        x = _eval_terms(_X_NUM, N, u, v) / (N - u) ** 2
        y = _Y_SCALE * _eval_terms(_Y_NUM, N, u, v) / (N - u) ** 3
        return (x, y)

    def map_EtoC(self, x, y=None) -> tuple:
        if x is None:
            raise ExceptionalPointError("the point at infinity has no affine image")
        x, y = Fraction(x), Fraction(y)
        N = self.N
        den = _eval_terms(_UV_DEN, N, x, y)
        if den == 0:
            raise ExceptionalPointError(f"x = {x} is a pole of the map to C")
        return (_eval_terms(_U_NUM, N, x, y) / den, _eval_terms(_V_NUM, N, x, y) / den)

    def P0(self) -> tuple:
        z = ZETA.generator()
        N = self.N
        x = 45 * N * N * z + 3 * z * z - 60 * N - 15 * z
        y = (90 - 60 * z * z - 135 * N * z + Fraction(675, 2) * N
             - Fraction(2025, 2) * N ** 3 + 180 * N * N * z * z)
        return (x, y)

    def real_v(self, u, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list:
        """Real roots v of g(u, v) = 0 for a rational u."""
        from .numerics import real_roots
        u = Fraction(u)
        return real_roots([-1, 4, -3, 15 * u ** 3 - 15 * u - 90 * self.d], ctx)

    def integral_v(self, u: int) -> list[int]:
        """Integer v with g(u, v) = 0, by the rational root theorem."""
        c = 15 * u ** 3 - 15 * u - 90 * self.d  # -v^3 + 4v^2 - 3v + c = 0
        if c == 0:
            return sorted(v for v in (0, 1, 3))
        out = []
        for p in _divisors(abs(c)):
            for v in (p, -p):
                if -v ** 3 + 4 * v * v - 3 * v + c == 0:
                    out.append(v)
        return sorted(out)

    def label(self) -> str:
        return f"N={self.N}"


_Q = (35, -350, 945, -630, 99225)


@dataclass(frozen=True)
class QuarticModel:
    coefficients: tuple = _Q

    kind = "quartic"

    @property
    def curve(self) -> CurveQ:
        return CurveQ(-13968675, 3410363250)

    @property
    def exceptional_u(self) -> int:
        return 0

    def Q(self, u):
        a, b, c, d, e = self.coefficients
        return (((a * u + b) * u + c) * u + d) * u + e

    def Qbar_coefficients(self) -> tuple:
        return tuple(c * (-1) ** (4 - i) for i, c in enumerate(self.coefficients))

    def on_model(self, u, v) -> bool:
        u, v = Fraction(u), Fraction(v)
        return v * v == self.Q(u)

    @staticmethod
    def q(x):
        return x * x - 630 * x - 13792275

    def map_CtoE(self, u, v) -> tuple:
        u, v = Fraction(u), Fraction(v)
        if not self.on_model(u, v):
            raise ContractViolation(f"({u},{v}) is not on the model")
        if u == 0:
            raise ExceptionalPointError("u = 0 is a pole of the map to E")
        x = 315 * (u * u - 2 * u - 2 * v + 630) / u ** 2
        # sign chosen so that (U, V) inverts (X, Y)
        y = 630 * (175 * u ** 3 - 945 * u * u - u * v + 945 * u + 630 * v - 198450) / u ** 3
        return (x, y)

    def map_EtoC(self, x, y=None) -> tuple:
        if x is None:
            return (Fraction(0), Fraction(-315))  # limit of (U, V) at infinity
        x, y = Fraction(x), Fraction(y)
        den = self.q(x)
        if den == 0:
            raise ExceptionalPointError(f"x = {x} is a root of q(x)")
        u = -630 * (x + 109935 + y) / den
        v = -315 * (x ** 4 + 630 * x ** 3 + 2 * x * x * y - 529200 * x * x + 439740 * x * y
                    + 22441718250 * x - 110933550 * y - 196956864680625) / den ** 2
        return (u, v)

    def P0(self) -> tuple:
        s = SQRT35.generator()
        return (630 * s + 315, 110250 + 630 * s)

    def P0_bar(self) -> tuple:
        x, y = self.P0()
        return (x, -y)

    def integral_v(self, u: int) -> list[int]:
        val = self.Q(u)
        if val < 0:
            return []
        r = math.isqrt(val)
        if r * r != val:
            return []
        return sorted({r, -r})

    def label(self) -> str:
        return "quartic"


def _divisors(n: int) -> list[int]:
    from sympy import divisors
    return divisors(n)


def map_CtoE(family, u, v):
    return family.map_CtoE(u, v)


def map_EtoC(family, x, y=None):
    if x is None:
        return family.map_EtoC(None)
    return family.map_EtoC(x, y)


# ---------------------------------------------------------------------------
# polynomials in the parameter N with coefficients in Q(zeta)

class NPoly:
    """Polynomial in an indeterminate N with FieldElement coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: c for k, c in (terms or {}).items() if not c.is_zero()}

    @staticmethod
    def const(c) -> "NPoly":
        if not isinstance(c, FieldElement):
            c = ZETA.element((c,))
        return NPoly({0: c})

    @staticmethod
    def var() -> "NPoly":
        return NPoly({1: ZETA.element((1,))})

    def _lift(self, other):
        return other if isinstance(other, NPoly) else NPoly.const(other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return NPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return NPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        out = {}
        for i, a in self.terms.items():
            for j, b in other.terms.items():
                out[i + j] = out[i + j] + a * b if i + j in out else a * b
        return NPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = NPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._lift(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def at(self, N) -> FieldElement:
        acc = ZETA.element((0,))
        for k, c in self.terms.items():
            acc = acc + c * Fraction(N) ** k
        return acc

    def coefficient(self, k: int) -> FieldElement:
        return self.terms.get(k, ZETA.element((0,)))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*N^{k}" if k else f"({c})" for k, c in sorted(self.terms.items()))


def _ring(N):
    """(one, N) in the coefficient ring: Q(zeta) for numeric N, Q(zeta)[N] for N=None."""
    if N is None:
        return NPoly.const(1), NPoly.var()
    return ZETA.element((1,)), Fraction(N)


def _series_mul(a, b, n):
    out = [a[0] * 0 for _ in range(n)]
    for i, ai in enumerate(a[:n]):
        for j in range(min(len(b), n - i)):
            out[i + j] = out[i + j] + ai * b[j]
    return out


def _shift(a, k, n):
    """Multiply a series by t^k, truncated to n terms."""
    zero = a[0] * 0
    return ([zero] * k + list(a))[:n]


@dataclass(frozen=True)
class PuiseuxBranch:
    """v1(u) = zeta*u + c0 + c1/u + c2/u^2 + ... (the real branch at infinity)."""

    N: Optional[int]
    coefficients: tuple  # c0, c1, ..., c_depth

    @property
    def leading(self) -> FieldElement:
        return ZETA.generator()

    @property
    def validity_radius(self) -> Optional[int]:
        return None if self.N is None else abs(self.N) + 1

    def coefficient(self, power: int):
        """Coefficient of u^power (power <= 1)."""
        if power == 1:
            return self.leading
        return self.coefficients[-power]

    def evaluate(self, u, ctx: PrecisionContext = DEFAULT_CONTEXT, terms: Optional[int] = None):
        if self.N is None:
            raise ContractViolation("specialize N before evaluating the branch")
        with ctx.activate():
            u = to_mpf(Fraction(u)) if not isinstance(u, mpmath.mpf) else u
            cs = self.coefficients if terms is None else self.coefficients[:terms]
            acc = self.leading.numeric(ctx) * u
            for k, c in enumerate(cs):
                acc += c.numeric(ctx) * u ** (-k)
            return acc


def puiseux_expand(N: Optional[int], depth: int = 12) -> PuiseuxBranch:
    """Coefficients of the real branch of g(u, v) = 0 at u = infinity.

    With v = zeta*u + w and t = 1/u, dividing g by u^2 gives
    3 zeta^2 w = -3 zeta t w^2 - t^2 w^3 + 4 (zeta + t w)^2 - 15 t - 3 zeta t
                 - 3 t^2 w - 15 (N^3 - N) t^2,
    which is solved by fixed-point iteration, one order in t per pass.
    ``N=None`` keeps N symbolic.
    """
    if depth < 2:
        raise ContractViolation("depth must be at least 2")
    one, n = _ring(N)
    zeta = one * ZETA.generator()
    n_terms = depth + 1
    zero = one * 0
    w = [zero] * n_terms
    inv = ZETA.generator() ** -2 * Fraction(1, 3)
    const_t2 = -15 * (n ** 3 - n)
    for _ in range(n_terms + 1):
        w2 = _series_mul(w, w, n_terms)
        w3 = _series_mul(w2, w, n_terms)
        zt = [zeta] + [zero] * (n_terms - 1)
        s = [zt[i] + (_shift(w, 1, n_terms)[i]) for i in range(n_terms)]  # zeta + t*w
        s2 = _series_mul(s, s, n_terms)
        rhs = [zero] * n_terms
        a = _shift(w2, 1, n_terms)
        b = _shift(w3, 2, n_terms)
        c = _shift(w, 2, n_terms)
        for i in range(n_terms):
            rhs[i] = -3 * zeta * a[i] - b[i] + 4 * s2[i] - 3 * c[i]
        rhs[1] = rhs[1] - 15 - 3 * zeta
        rhs[2] = rhs[2] + const_t2
        w = [r * inv for r in rhs]
    return PuiseuxBranch(N, tuple(w))


def _substituted_series(N, depth, terms, total_degree, scale=1):
    """sum c N^k u^i v^j * t^total_degree with u = 1/t, v = V/t, V = zeta + t w."""
    one, n = _ring(N)
    br = puiseux_expand(N, depth + 2)
    n_terms = depth + 1
    zero = one * 0
    V = [one * ZETA.generator()] + list(br.coefficients[:n_terms - 1])
    powers = [[one] + [zero] * (n_terms - 1)]
    for _ in range(3):
        powers.append(_series_mul(powers[-1], V, n_terms))
    out = [zero] * n_terms
    for c, k, i, j in terms:
        coef = one * c * n ** k * scale
        shifted = _shift(powers[j], total_degree - i - j, n_terms)
        for m in range(n_terms):
            out[m] = out[m] + coef * shifted[m]
    return out, one, n


def _inverse_power_series(n, one, power, n_terms):
    """Series of (1 - N t)^(-power)."""
    out = []
    for k in range(n_terms):
        out.append(one * math.comb(k + power - 1, k) * n ** k)
    return out


def x_series(N: Optional[int], depth: int = 6) -> list:
    """x(t) = X(1/t, v1(1/t)) as a power series in t, coefficients t^0..t^depth."""
    num, one, n = _substituted_series(N, depth, _X_NUM, 2)
    return _series_mul(num, _inverse_power_series(n, one, 2, depth + 1), depth + 1)


def y_series(N: Optional[int], depth: int = 6) -> list:
    """y(t) = Y(1/t, v1(1/t)); note (N - u)^3 t^3 = -(1 - N t)^3."""
    num, one, n = _substituted_series(N, depth, _Y_NUM, 3, -_Y_SCALE)
    return _series_mul(num, _inverse_power_series(n, one, 3, depth + 1), depth + 1)


# ---------------------------------------------------------------------------
# binomial variables

def _is_square(n: int):
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def recover_collision_vars(kind: str, u: int, v: int) -> list[tuple[int, int]]:
    """Natural-number (m, n) behind an integral point.

    cubic:   u = n - 1 and v = (m-2)(m-3)/2, for C(n,3) = C(m,6) + d;
    quartic: v = 210m - 105 and 2u = n^2 - 7n + 12, for C(m,2) = C(n,8) + 1.
    """
    u, v = int(u), int(v)
    out = []
    if kind == "cubic":
        n = u + 1
        disc = 1 + 8 * v
        r = _is_square(disc)
        if n >= 0 and r is not None:
            for m2 in {5 + r, 5 - r}:
                if m2 % 2 == 0 and m2 // 2 >= 0:
                    out.append((m2 // 2, n))
    elif kind == "quartic":
        if (v + 105) % 210 == 0 and (v + 105) // 210 >= 0:
            m = (v + 105) // 210
            r = _is_square(49 - 4 * (12 - 2 * u))
            if r is not None:
                for n2 in {7 + r, 7 - r}:
                    if n2 % 2 == 0 and n2 // 2 >= 0:
                        out.append((m, n2 // 2))
    else:
        raise ContractViolation(f"unknown case kind {kind!r}")
    return sorted(out)


def family_for(case_id: str):
    if case_id == "quartic":
        return QuarticModel()
    if case_id.startswith("N"):
        return CubicFamily(int(case_id[1:].replace("m", "-")))
    raise ContractViolation(f"unknown case {case_id!r}")
