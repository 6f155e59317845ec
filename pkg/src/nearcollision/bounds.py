"""Explicit constants and the inequalities that turn them into a bound on M."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath
from mpmath import mpf

from .errors import ContractViolation, DivergenceError
from .numerics import DEFAULT_CONTEXT, PrecisionContext, complex_root_moduli, real_roots, to_mpf


@dataclass(frozen=True)
class UniformConstants:
    N: int
    B0: int
    B2: int
    B3: int
    theta: int
    c9: Fraction
    c10: mpf
    c11: int

    @property
    def search_threshold(self) -> int:
        return max(self.B2, self.B3)


def uniform_constants(N: int) -> UniformConstants:
    if abs(N) < 2:
        raise ContractViolation("the uniform constants need |N| >= 2")
    a = abs(N)
    return UniformConstants(N, a + 1, 3 * a, a + 1, 1, Fraction(17, 100),
                            mpmath.log(200 * a ** 3), 2)


def _sextic(N: int) -> list[Fraction]:
    N = Fraction(N)
    a1 = -2 * N ** 3 + 2 * N + Fraction(8, 81)
    a0 = N ** 6 - 2 * N ** 4 - Fraction(8, 81) * N ** 3 + N ** 2 + Fraction(8, 81) * N - Fraction(4, 675)
    return [Fraction(1), Fraction(0), Fraction(-2), a1, Fraction(1), -a1, a0]


def resultant_root_bound_check(N: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> bool:
    """Every complex root of the discriminant sextic lies inside |u| < |N|+1."""
    if abs(N) < 2:
        raise ContractViolation("need |N| >= 2")
    return max(complex_root_moduli(_sextic(N), ctx)) < abs(N) + 1


def q_poly(N: int, u):
    N = Fraction(N)
    u = Fraction(u)
    k = -4050 * N ** 3 + 4050 * N + 200
    return (2025 * u ** 6 - 4050 * u ** 4 + k * u ** 3 + 2025 * u ** 2 - k * u - 12
            + 2025 * N ** 2 + 200 * N - 200 * N ** 3 - 4050 * N ** 4 + 2025 * N ** 6)


def verify_q_growth(N: int, samples) -> bool:
    """q(u) > 1800 u^6 at each sample, all of which must satisfy |u| > 3|N|."""
    out = True
    for u in samples:
        u = Fraction(u)
        if abs(u) <= 3 * abs(N):
            raise ContractViolation(f"sample u={u} violates |u| > 3|N|")
        out = out and q_poly(N, u) > 1800 * u ** 6
    return out


def verify_branch_bound(N: int, samples, ctx: PrecisionContext = DEFAULT_CONTEXT) -> bool:
    """Real v with g(u,v) = 0 obey |v| <= 2 * 15^(1/3) * |u| whenever |u| >= 3|N|."""
    d = Fraction(N ** 3 - N, 6)
    with ctx.activate():
        bound = 2 * mpmath.cbrt(15)
        for u in samples:
            u = Fraction(u)
            if abs(u) < 3 * abs(N):
                raise ContractViolation(f"sample u={u} violates |u| >= 3|N|")
            for v in real_roots([-1, 4, -3, 15 * u ** 3 - 15 * u - 90 * d], ctx):
                if abs(v) > bound * abs(to_mpf(u)):
                    return False
    return True


@dataclass(frozen=True)
class DavidConstants:
    """Lower-bound constants for the linear form, taken from configuration."""

    c12: mpf
    c13: mpf
    c14: mpf
    c15: mpf
    alpha: Fraction
    beta: Fraction
    gamma: mpf
    rank: int
    k: int
    c16: Optional[mpf] = None
    c17: Optional[mpf] = None
    c18: Optional[mpf] = None

    def __post_init__(self):
        for name in ("c12", "c13", "c14", "c15", "alpha", "beta", "gamma"):
            if not getattr(self, name) > 0:
                raise ContractViolation(f"{name} must be positive")

    @property
    def quartic_form(self) -> bool:
        return self.c16 is not None


def _bound_gap(david: DavidConstants, rho, extra, M):
    """Right-hand side minus rho*M^2; positive means the inequality still holds."""
    a = to_mpf(david.alpha) * M + to_mpf(david.beta)
    la = mpmath.log(a)
    if david.quartic_form:
        rhs = (david.c18 * david.c13 * (la + david.c14) * (mpmath.log(la) + david.c15) ** (david.k + 2)
               + david.gamma + david.c18 * mpmath.log(david.c16) + david.c17)
    else:
        rhs = (david.c13 * (la + david.c14) * (mpmath.log(la) + david.c15) ** (david.rank + 3)
               + david.gamma + extra)
    return rhs - rho * M * M


def cubic_additive_term(u: UniformConstants):
    """(c11/2 theta) log(c9/(1+theta)) + c10/2, and c11 c13/(2 theta) = c13 here."""
    return (mpf(u.c11) / (2 * u.theta) * mpmath.log(to_mpf(u.c9) / (1 + u.theta)) + u.c10 / 2)


def initial_bound(david: DavidConstants, rho, uniform: Optional[UniformConstants] = None,
                  ctx: PrecisionContext = DEFAULT_CONTEXT, max_decades: int = 2000) -> mpf:
    """max(c12, M*), M* the point beyond which the height inequality fails for good."""
    if not rho > 0:
        raise ContractViolation("rho must be positive")
    if not david.quartic_form:
        if uniform is None:
            raise ContractViolation("cubic bounds need the uniform constants")
        if uniform.c11 != 2 * uniform.theta:
            raise ContractViolation("only c11 = 2 theta is supported")
    with ctx.activate():
        rho = to_mpf(rho)
        extra = cubic_additive_term(uniform) if uniform is not None else mpf(0)
        gap = lambda M: _bound_gap(david, rho, extra, M)
        lo = mpf(david.c12)
        if gap(lo) <= 0 and gap(lo * 10) <= 0:
            # already failing at c12; walk down is unnecessary since the bound is max(c12, M*)
            return lo
        hi = lo
        for _ in range(max_decades):
            hi = hi * 10
            if gap(hi) < 0:
                break
        else:
            raise DivergenceError("the height inequality never fails; check the constants")
        lo = hi / 10
        for _ in range(80):
            mid = mpmath.sqrt(lo * hi)
            if gap(mid) > 0:
                lo = mid
            else:
                hi = mid
        return max(mpf(david.c12), hi)


@dataclass(frozen=True)
class LinearFormSpec:
    """lambda = n0 + sum n_i xi_i with |lambda| <= kappa1 exp(kappa2 - kappa3 N^2)."""

    omega1: mpf
    ell: tuple
    ell0: Optional[mpf]
    s_over_t: Fraction
    k1: mpf
    k2: mpf
    rho: mpf
    alpha: Fraction
    beta: Fraction
    xi: tuple = field(default=())
    kappa1: mpf = mpf(0)
    kappa2: mpf = mpf(0)
    kappa3: mpf = mpf(0)
    kappa4: mpf = mpf(0)

    @property
    def k(self) -> int:
        return len(self.xi)

    def threshold(self, M: int) -> mpf:
        """Envelope k1 exp(k2 - k4 M^2) for |L(P)|, with k4 = rho."""
        return self.k1 * mpmath.exp(self.k2 - self.rho * M * M)


def kappa3_for(alpha: Fraction, beta: Fraction, m_min: int = 15) -> mpf:
    """(alpha + beta/m_min)^-2, so that kappa3 N^2 <= M^2 once M >= m_min."""
    return 1 / (to_mpf(alpha) + to_mpf(beta) / m_min) ** 2


def envelope(omega1, ell, ell0, rho, alpha, beta, k1, k2, s_over_t=Fraction(0), torsion_lcm: int = 1,
             ctx: PrecisionContext = DEFAULT_CONTEXT) -> LinearFormSpec:
    """Assemble the xi's and kappa1..kappa4 of the reduced linear form."""
    s_over_t = Fraction(s_over_t)
    if not (-Fraction(1, 2) < s_over_t <= Fraction(1, 2)) or torsion_lcm % s_over_t.denominator:
        raise ContractViolation("s/t must lie in (-1/2, 1/2] with t | lcm of torsion orders")
    with ctx.activate():
        w1 = to_mpf(omega1)
        logs = list(ell) + ([ell0] if ell0 is not None else [])
        xi = tuple(to_mpf(l) / w1 for l in logs)
        k3 = kappa3_for(Fraction(alpha), Fraction(beta))
        return LinearFormSpec(w1, tuple(ell), ell0, s_over_t, to_mpf(k1), to_mpf(k2), to_mpf(rho),
                              Fraction(alpha), Fraction(beta), xi,
                              to_mpf(k1) / w1, to_mpf(k2), k3, k3 * to_mpf(rho))


def cubic_envelope_constants(N: int, gamma) -> tuple:
    """(k1, k2) for the cubic family from the uniform constants: c9/(1+theta), gamma + c10/2."""
    u = uniform_constants(N)
    return (to_mpf(u.c9) / (1 + u.theta), to_mpf(gamma) + u.c10 / 2)


def quartic_envelope_constants(gamma, c7: int = 13, a: int = 35) -> tuple:
    """(k1, k2) = (4 a^-1/2, log(3 c7)/2 + gamma)."""
    return (4 / mpmath.sqrt(a), mpmath.log(3 * c7) / 2 + to_mpf(gamma))


@dataclass(frozen=True)
class QuarticDomain:
    sigma: int
    sigma_bar: int
    u_star: int
    u_star_bar: int
    c7: int
    c7_bar: int

    @property
    def threshold(self) -> int:
        return max(self.u_star, self.u_star_bar)

    @property
    def c7_max(self) -> int:
        return max(self.c7, self.c7_bar)

    @staticmethod
    def x_of_u(u, ctx: PrecisionContext = DEFAULT_CONTEXT):
        """315(u^2 - 2u + 630 + 2 sqrt Q(u))/u^2."""
        with ctx.activate():
            u = to_mpf(u)
            Q = 35 * u ** 4 - 350 * u ** 3 + 945 * u ** 2 - 630 * u + 99225
            return 315 * (u * u - 2 * u + 630 + 2 * mpmath.sqrt(Q)) / (u * u)

    @staticmethod
    def x_bar_of_u(u, ctx: PrecisionContext = DEFAULT_CONTEXT):
        """315(u^2 + 2u + 630 + 2 sqrt Qbar(u))/u^2."""
        with ctx.activate():
            u = to_mpf(u)
            Q = 35 * u ** 4 + 350 * u ** 3 + 945 * u ** 2 + 630 * u + 99225
            return 315 * (u * u + 2 * u + 630 + 2 * mpmath.sqrt(Q)) / (u * u)


def quartic_domain_constants() -> QuarticDomain:
    return QuarticDomain(1, -1, 3, 80, 13, 13)
