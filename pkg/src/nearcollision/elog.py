"""Periods and the real elliptic logarithm of y^2 = x^3 + Ax + B.

Conventions: x = wp(z), y = wp'(z)/2, so z(P) is the integral of dx/(2y)
from x(P) to infinity, negated when y(P) > 0.  Values are reduced into
(-omega1/2, omega1/2].  Points on the bounded real component are first
translated by Q2 = (e2, 0), the translation done exactly in Q(e2).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import mpmath
from mpmath import mpc, mpf

from .curve import CurveQ, add as curve_add
from .errors import ContractViolation, PrecisionError
from .numerics import (DEFAULT_CONTEXT, AlgebraicConstant, FieldElement,
                       PrecisionContext, to_mpf)

E0 = "E0"
E1 = "E1"


@dataclass(frozen=True)
class PeriodPair:
    omega1: mpf
    omega2: mpc
    tau_normalized: mpc
    roots: tuple

    @property
    def three_real_roots(self) -> bool:
        return len(self.roots) == 3


@dataclass(frozen=True)
class RealPoint:
    x: mpf
    y: mpf
    component: str = E0


@dataclass(frozen=True)
class ElogValue:
    value: mpf
    source_point: RealPoint


def _agm3(a, b, c, tol):
    """AGM on (a, b) carrying the third sequence c of the logarithm recursion."""
    for _ in range(200):
        if abs(a - b) <= tol * abs(a):
            return a, c
        a, b, c = (a + b) / 2, mpmath.sqrt(a * b), (c + mpmath.sqrt(c * c + b * b - a * a)) / 2
    raise PrecisionError("AGM did not converge")


def reduce_tau(tau: mpc) -> mpc:
    """Move tau into the standard fundamental region of SL2(Z)."""
    if tau.imag < 0:
        tau = -tau
    for _ in range(1000):
        tau = tau - mpmath.nint(tau.real)
        if abs(tau) < 1:
            tau = -1 / tau
        else:
            return tau
    raise PrecisionError("tau reduction did not terminate")


def periods(curve: CurveQ, ctx: PrecisionContext = DEFAULT_CONTEXT) -> PeriodPair:
    roots = tuple(curve.roots(ctx))
    with ctx.activate():
        tol = mpf(10) ** (-ctx.working_digits)
        if len(roots) == 3:
            e1, e2, e3 = roots
            a = mpmath.sqrt(e1 - e3)
            w1 = mpmath.pi / _agm3(a, mpmath.sqrt(e1 - e2), mpf(1), tol)[0]
            w2 = mpc(0, 1) * mpmath.pi / _agm3(a, mpmath.sqrt(e2 - e3), mpf(1), tol)[0]
        else:
            e1 = roots[0]
            beta = mpmath.sqrt(3 * e1 * e1 + to_mpf(curve.A))
            s = 2 * mpmath.sqrt(beta)
            w1 = 2 * mpmath.pi / _agm3(s, mpmath.sqrt(2 * beta + 3 * e1), mpf(1), tol)[0]
            w2 = -w1 / 2 + mpc(0, 1) * mpmath.pi / _agm3(s, mpmath.sqrt(2 * beta - 3 * e1), mpf(1), tol)[0]
        return PeriodPair(w1, w2, reduce_tau(w2 / w1), roots)


def _component(per: PeriodPair, x) -> str:
    if per.three_real_roots and per.roots[2] <= x <= per.roots[1]:
        return E1
    return E0


def real_point(curve: CurveQ, P, ctx: PrecisionContext = DEFAULT_CONTEXT,
               per: PeriodPair | None = None) -> RealPoint:
    """Numeric RealPoint from rational, algebraic or already-numeric coordinates."""
    if isinstance(P, RealPoint):
        return P
    x, y = P
    with ctx.activate():
        xs = x.numeric(ctx) if isinstance(x, FieldElement) else to_mpf(x)
        ys = y.numeric(ctx) if isinstance(y, FieldElement) else to_mpf(y)
        resid = ys * ys - (xs ** 3 + to_mpf(curve.A) * xs + to_mpf(curve.B))
        scale = max(1, ys * ys, abs(xs) ** 3, abs(to_mpf(curve.A) * xs), abs(to_mpf(curve.B)))
        if abs(resid) > scale * mpf(10) ** (-ctx.decimal_digits + 5):
            raise ContractViolation("point is not on the curve")
        per = per or periods(curve, ctx)
        return RealPoint(xs, ys, _component(per, xs))


def _raw_elog(curve: CurveQ, per: PeriodPair, x, y, ctx: PrecisionContext):
    """Elliptic logarithm of a point on the unbounded component, unreduced."""
    tol = mpf(10) ** (-ctx.working_digits)
    if per.three_real_roots:
        e1, e2, e3 = per.roots
        if x == e1:
            z = per.omega1 / 2
        else:
            a, c = _agm3(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2), mpmath.sqrt(x - e3), tol)
            z = mpmath.asin(a / c) / a
    else:
        e1 = per.roots[0]
        if x == e1:
            z = per.omega1 / 2
        else:
            beta = mpmath.sqrt(3 * e1 * e1 + to_mpf(curve.A))
            a, c = _agm3(2 * mpmath.sqrt(beta), mpmath.sqrt(2 * beta + 3 * e1),
                         (x - e1 + beta) / mpmath.sqrt(x - e1), tol)
            z = mpmath.asin(a / c) / a
            if x - e1 < beta:
                z = per.omega1 / 2 - z
    return -z if y > 0 else z


def _center(z, w1):
    v = z - w1 * mpmath.floor(z / w1)
    if v > w1 / 2:
        v -= w1
    return v


def _egg_shift_exact(curve: CurveQ, P):
    """P + (e2, 0) computed exactly in Q(e2) (e2 = middle real root)."""
    field = AlgebraicConstant("e2", (1, 0, int(curve.A), int(curve.B)), 1)
    e2 = field.generator()
    x, y = (c if isinstance(c, FieldElement) else field.element((c,)) for c in P)
    lam = y / (x - e2)
    x3 = lam * lam - x - e2
    y3 = -(y + lam * (x3 - x))
    return x3, y3


def _exact_kind(P):
    """'rational', 'algebraic' or None (numeric coordinates)."""
    if isinstance(P, RealPoint):
        return None
    if all(isinstance(c, (int, Fraction)) for c in P):
        return "rational"
    if all(isinstance(c, (int, Fraction, FieldElement)) for c in P):
        return "algebraic"
    return None


def ell_log(curve: CurveQ, P, per: PeriodPair | None = None,
            ctx: PrecisionContext = DEFAULT_CONTEXT, max_escalations: int = 3) -> ElogValue:
    """The map l: E(R) -> R/Z*omega1, centred.

    ``P`` may be a rational pair, a pair of FieldElements or a RealPoint;
    ``None`` is the point at infinity.
    """
    if P is None:
        with ctx.activate():
            return ElogValue(mpf(0), RealPoint(mpmath.inf, mpmath.inf, E0))
    kind = _exact_kind(P)
    exact = kind is not None
    for attempt in range(max_escalations + 1):
        work = ctx.with_digits(ctx.decimal_digits * 2 ** attempt)
        per_w = per if (per is not None and attempt == 0) else periods(curve, work)
        pt = real_point(curve, P, work, per_w)
        with work.activate():
            near = min(abs(pt.x - e) for e in per_w.roots)
            if near < mpf(10) ** (-work.decimal_digits // 2) and exact and pt.y != 0:
                continue  # cancellation against a root: retry with more digits
            if pt.component == E1:
                if kind == "rational":
                    shifted = _egg_shift_exact(curve, (Fraction(P[0]), Fraction(P[1])))
                else:
                    # numeric coordinates, or an algebraic point in a different field
                    shifted = None
                if shifted is not None:
                    sx, sy = (c.numeric(work) for c in shifted)
                else:
                    e2 = per_w.roots[1]
                    lam = pt.y / (pt.x - e2)
                    sx = lam * lam - pt.x - e2
                    sy = -(pt.y + lam * (sx - pt.x))
                z = _raw_elog(curve, per_w, sx, sy, work)
            else:
                z = _raw_elog(curve, per_w, pt.x, pt.y, work)
            value = _center(z, per_w.omega1)
        with ctx.activate():
            return ElogValue(+value, real_point(curve, P, ctx, per) if attempt else pt)
    raise PrecisionError("point too close to a 2-torsion point for the available precision")


def ell_log_additivity_check(curve: CurveQ, P, Q, per: PeriodPair | None = None,
                             ctx: PrecisionContext = DEFAULT_CONTEXT) -> bool:
    per = per or periods(curve, ctx)
    R = curve_add(curve, P, Q)
    with ctx.activate():
        diff = (ell_log(curve, P, per, ctx).value + ell_log(curve, Q, per, ctx).value
                - ell_log(curve, R, per, ctx).value)
        diff = _center(diff, per.omega1)
        return abs(diff) <= mpf(10) ** (-ctx.decimal_digits + 10)
