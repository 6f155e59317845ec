"""Exact integral LLL and the de Weger loop that shrinks the bound on M."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional

import mpmath
from mpmath import mpf

from .errors import ContractViolation, PrecisionError, ReductionStall
from .numerics import DEFAULT_CONTEXT, PrecisionContext, to_mpf

DELTA = Fraction(3, 4)


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _transpose(M):
    return [list(r) for r in zip(*M)]


def lll_columns(vectors: list[list[int]], delta: Fraction = DELTA, track: bool = False):
    """LLL on a list of integer vectors using only integer arithmetic.

    Returns the reduced vectors and, if ``track``, the integer matrix T
    (one row per output vector) with output_i = sum_j T[i][j] * input_j.
    """
    b = [list(map(int, v)) for v in vectors]
    n = len(b)
    H = [[int(i == j) for j in range(n)] for i in range(n)] if track else None
    if n == 0:
        return b, H
    d = [0] * (n + 1)
    d[0] = 1
    lam = [[0] * n for _ in range(n)]
    d[1] = _dot(b[0], b[0])
    if d[1] == 0:
        raise ContractViolation("the vectors are linearly dependent")
    k, kmax = 1, 0
    p, q = delta.numerator, delta.denominator

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            r = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - r * y for x, y in zip(b[k], b[l])]
            if H is not None:
                H[k] = [x - r * y for x, y in zip(H[k], H[l])]
            lam[k][l] -= r * d[l + 1]
            for i in range(l):
                lam[k][i] -= r * lam[l][i]

    def swap(k):
        b[k], b[k - 1] = b[k - 1], b[k]
        if H is not None:
            H[k], H[k - 1] = H[k - 1], H[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        B = (d[k - 1] * d[k + 1] + lm * lm) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lm * t) // d[k]
            lam[i][k - 1] = (B * t + lm * lam[i][k]) // d[k + 1]
        d[k] = B

    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = _dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                elif u == 0:
                    raise ContractViolation("the vectors are linearly dependent")
                else:
                    d[k + 1] = u
        red(k, k - 1)
        if q * d[k + 1] * d[k - 1] < p * d[k] ** 2 - q * lam[k][k - 1] ** 2:
            swap(k)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b, H


def lll_reduce(basis: list[list[int]], delta: Fraction = DELTA) -> list[list[int]]:
    """LLL-reduce the lattice spanned by the columns of a square integer matrix."""
    cols, _ = lll_columns(_transpose(basis), delta)
    return _transpose(cols)


def is_lll_reduced(vectors, delta: Fraction = DELTA) -> bool:
    """Exact check of size reduction and the Lovasz condition."""
    n = len(vectors)
    gs, mu = [], [[Fraction(0)] * n for _ in range(n)]
    norms = []
    for i, v in enumerate(vectors):
        w = [Fraction(x) for x in v]
        for j in range(i):
            mu[i][j] = Fraction(_dot(v, gs[j])) / norms[j]
            w = [a - mu[i][j] * c for a, c in zip(w, gs[j])]
        gs.append(w)
        norms.append(_dot(w, w))
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    for i in range(1, n):
        if norms[i] < (delta - mu[i][i - 1] ** 2) * norms[i - 1]:
            return False
    return True


@dataclass(frozen=True)
class IntLattice:
    """Columns are the generators."""

    columns: tuple
    C: int

    @property
    def dimension(self) -> int:
        return len(self.columns)

    def matrix(self) -> list[list[int]]:
        return _transpose(self.columns)


def round_half_even(x: mpf, guard_digits: int = 10) -> int:
    """Nearest integer; refuses to decide when x is within 10^-guard of a half-integer."""
    fl = mpmath.floor(x)
    frac = x - fl
    if abs(frac - mpf(1) / 2) < mpf(10) ** (-guard_digits):
        raise PrecisionError("cannot decide the rounding at this precision")
    return int(fl) + (1 if frac > mpf(1) / 2 else 0)


def build_lattice(xi, C: int, digits: int) -> IntLattice:
    """Columns e_i + [C xi_i] e_k for each xi_i, then C e_k.

    ``digits`` is the precision at which the xi were computed; it must
    exceed the size of C by at least 30 digits.
    """
    need = len(str(C)) + 30
    if digits < need:
        raise PrecisionError(f"xi known to {digits} digits, {need} needed")
    k = len(xi)
    with mpmath.workdps(digits + 10):
        last = [round_half_even(to_mpf(C) * x) for x in xi]
    cols = []
    for i in range(k):
        col = [0] * (k + 1)
        col[i] = 1
        col[k] = last[i]
        cols.append(tuple(col))
    cols.append(tuple([0] * k + [C]))
    return IntLattice(tuple(cols), C)


@dataclass(frozen=True)
class ReductionState:
    current_bound: mpf
    C: int
    b0: tuple = ()
    passed_b0_test: bool = False
    next_bound: Optional[int] = None
    retries: int = 0

    @property
    def improved(self) -> bool:
        return self.passed_b0_test and self.next_bound is not None and self.next_bound < self.current_bound


def choose_C(k: int, B) -> int:
    """A power of ten a little above 2^(k(k+1)/2) (k+1/2)^(k+1) B^(k+1)."""
    with mpmath.workdps(30):
        lg = (mpmath.mpf(k * (k + 1)) / 2 * mpmath.log10(2) + (k + 1) * mpmath.log10(k + mpf(1) / 2)
              + (k + 1) * mpmath.log10(to_mpf(B)))
        return 10 ** (int(mpmath.ceil(lg)) + 3)


def b0_test(b0_norm_sq: int, k: int, B) -> bool:
    """|b0| > 2^(k/2) (k + 1/2) B."""
    with mpmath.workdps(60):
        return mpmath.sqrt(b0_norm_sq) > mpf(2) ** (mpf(k) / 2) * (k + mpf(1) / 2) * to_mpf(B)


def new_bound(spec, C: int, b0_norm_sq: int, B) -> int:
    """Largest N with kappa4 N^2 <= kappa2 + log(kappa1 C) - log(sqrt(2^-k|b0|^2 - k B^2) - k B)."""
    k = spec.k
    with mpmath.workdps(60):
        B = to_mpf(B)
        inner = mpmath.sqrt(mpf(b0_norm_sq) / mpf(2) ** k - k * B * B) - k * B
        rhs = spec.kappa2 + mpmath.log(spec.kappa1 * C) - mpmath.log(inner)
        if rhs <= 0:
            return 1
        return max(1, int(mpmath.floor(mpmath.sqrt(rhs / spec.kappa4))))


def reduce_bound(state: ReductionState, spec, digits: int, max_retries: int = 5) -> ReductionState:
    """One de Weger step at bound state.current_bound, starting from C = state.C."""
    k = spec.k
    B = state.current_bound
    C = state.C
    for attempt in range(max_retries + 1):
        lat = build_lattice(spec.xi, C, digits)
        reduced, _ = lll_columns([list(c) for c in lat.columns])
        b0 = reduced[0]
        nsq = _dot(b0, b0)
        if b0_test(nsq, k, B):
            nb = min(new_bound(spec, C, nsq, B), int(mpmath.floor(to_mpf(B))))
            return ReductionState(B, C, tuple(b0), True, nb, attempt)
        C *= 10 ** 2
    raise ReductionStall(f"b0 test failed {max_retries + 1} times at bound {B}")


def required_digits(k: int, B, max_retries: int = 5) -> int:
    return len(str(choose_C(k, B))) + 2 * max_retries + 30


def reduction_chain(spec, initial_bound, digits: Optional[int] = None,
                    refine: Optional[Callable[[int], object]] = None,
                    max_passes: int = 8) -> list[ReductionState]:
    """Repeat reduce_bound until the bound stops improving.

    ``refine(d)`` should return the same linear form with xi known to d
    digits; it is called whenever the current precision is insufficient.
    """
    states: list[ReductionState] = []
    B = to_mpf(initial_bound)
    have = digits if digits is not None else mpmath.mp.dps
    for _ in range(max_passes):
        need = required_digits(spec.k, B)
        if have < need:
            if refine is None:
                raise PrecisionError(f"need {need} digits for the xi, have {have}")
            spec = refine(need)
            have = need
        st = reduce_bound(ReductionState(B, choose_C(spec.k, B)), spec, have)
        states.append(st)
        if not st.improved:
            break
        B = mpf(st.next_bound)
    if not states or not states[0].improved:
        raise ReductionStall("the first reduction step does not improve the bound")
    return states


def final_bound(states: list[ReductionState]) -> int:
    return min(int(s.next_bound) for s in states if s.next_bound is not None)
