"""Final search: inequality-trick filtering, exact verification, direct
small-|u| scans and an independent brute-force oracle."""
from __future__ import annotations

import itertools
import logging
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .curve import MWBasis, _add, mul
from .errors import ContractViolation, ExceptionalPointError
from .models import CubicFamily, QuarticModel, recover_collision_vars

log = logging.getLogger(__name__)

SAFETY_MARGIN = 1e-5


@dataclass(frozen=True)
class SearchSpace:
    rank: int
    mmax: int
    torsion_choices: int = 1
    signs: tuple = (1, -1)

    def __post_init__(self):
        if self.mmax < 1:
            raise ContractViolation("mmax must be at least 1")

    @property
    def tuple_count(self) -> int:
        return (2 * self.mmax + 1) ** (self.rank + 1) * self.torsion_choices * len(self.signs)


@dataclass(frozen=True)
class SolutionRow:
    coeffs: tuple
    pointE: Optional[tuple]
    pointC: tuple
    collision_vars: tuple = ()

    def sort_key(self):
        return self.pointC


def _shell(r: int, M: int) -> Iterator[tuple]:
    """All integer r-tuples with max |m_i| exactly M."""
    rng = range(-M, M + 1)
    for t in itertools.product(rng, repeat=r):
        if M == 0 or max(abs(x) for x in t) == M:
            yield t


def _shell_blocks(r: int, M: int):
    """The shell max|m_i| = M in numpy blocks: outer coordinates looped, last two vectorised."""
    if r == 1:
        a = np.arange(-M, M + 1)
        yield (), a[np.abs(a) == M][:, None]
        return
    inner = np.array(list(itertools.product(range(-M, M + 1), repeat=min(r, 2))))
    outer_r = r - inner.shape[1]
    for head in itertools.product(range(-M, M + 1), repeat=outer_r):
        hmax = max((abs(x) for x in head), default=0)
        if hmax == M:
            block = inner
        else:
            block = inner[np.abs(inner).max(axis=1) == M]
        if len(block):
            yield head, block


def inequality_filter(space: SearchSpace, spec, checkpoint: Optional[str] = None,
                      checkpoint_every: int = 10 ** 7, shells: Optional[range] = None):
    """Yield (m0, m1..mr, sign) with |L| <= k1 exp(k2 - k4 M^2) + margin, M = max |m_i|, i >= 1.

    L = m0 omega1 + sum m_i l_i + sign * l0 (the sign term is dropped
    when the form has no l0).  Floating evaluation in double precision;
    the margin covers its rounding.
    """
    r = space.rank
    w1 = float(spec.omega1)
    ell = np.array([float(x) for x in spec.ell])
    signs = space.signs if spec.ell0 is not None else (0,)
    l0 = float(spec.ell0) if spec.ell0 is not None else 0.0
    m0 = np.arange(-space.mmax, space.mmax + 1)
    seen = 0
    done_shell, done_index = _read_checkpoint(checkpoint)
    survivors = 0
    for M in (shells or range(space.mmax + 1)):
        if M < done_shell:
            continue
        thr = float(spec.threshold(M)) + SAFETY_MARGIN
        idx = 0
        for head, block in _shell_blocks(r, M):
            idx += 1
            if M == done_shell and idx <= done_index:
                continue
            heads = np.zeros((len(block), len(head))) + np.array(head, dtype=float)
            coeffs = np.hstack([heads, block.astype(float)])
            base = coeffs @ ell
            for s in signs:
                L = base[:, None] + s * l0 + m0[None, :] * w1
                hits = np.argwhere(np.abs(L) <= thr)
                for i, j in hits:
                    survivors += 1
                    yield (int(m0[j]),) + tuple(head) + tuple(int(x) for x in block[i]) + (s,)
            seen += len(block) * len(m0) * len(signs)
            if checkpoint and seen >= checkpoint_every:
                _write_checkpoint(checkpoint, M, idx, survivors)
                seen = 0
        if checkpoint:
            _write_checkpoint(checkpoint, M + 1, 0, survivors)


def _read_checkpoint(path):
    if not path or not os.path.exists(path):
        return 0, 0
    with open(path) as fh:
        lines = [l for l in fh.read().splitlines() if l.strip()]
    if not lines:
        return 0, 0
    shell, index, _ = (int(x) for x in lines[-1].split(","))
    return shell, index


def _write_checkpoint(path, shell, index, survivors):
    with open(path, "a") as fh:
        fh.write(f"{shell},{index},{survivors}\n")


class PointCache:
    """Exact sums m1 P1 + ... + mr Pr, memoised on prefixes."""

    def __init__(self, curve, basis: MWBasis):
        self.curve = curve
        self.basis = basis
        self._mult = {}
        self._prefix = {(): None}

    def multiple(self, i: int, m: int):
        key = (i, m)
        if key not in self._mult:
            self._mult[key] = mul(self.curve, self.basis.generators[i], m) if m else None
        return self._mult[key]

    def point(self, coeffs: tuple):
        coeffs = tuple(coeffs)
        if coeffs in self._prefix:
            return self._prefix[coeffs]
        prev = self.point(coeffs[:-1])
        P = _add(self.curve, prev, self.multiple(len(coeffs) - 1, coeffs[-1]))
        if len(coeffs) < len(self.basis.generators):
            self._prefix[coeffs] = P
        return P


def _integral(q: Fraction) -> bool:
    return q.denominator == 1


def exact_verify(coeffs, family, basis: MWBasis, cache: Optional[PointCache] = None,
                 audit: Optional[list] = None) -> Optional[SolutionRow]:
    """The row for m1 P1 + ... + mr Pr if its image on the model is integral."""
    cache = cache or PointCache(family.curve, basis)
    P = cache.point(tuple(coeffs))
    try:
        u, v = family.map_EtoC(None) if P is None else family.map_EtoC(*P)
    except ExceptionalPointError as exc:
        if audit is not None:
            audit.append(f"{tuple(coeffs)}: {exc}")
        return None
    if not (_integral(u) and _integral(v)):
        return None
    u, v = int(u), int(v)
    if not family.on_model(u, v):
        raise ContractViolation(f"image ({u},{v}) is off the model")
    return SolutionRow(tuple(coeffs), P, (u, v), tuple(recover_collision_vars(family.kind, u, v)))


def small_u_scan(family, u_bound: int) -> list[tuple]:
    """Integral points with |u| <= u_bound: rational-root test (cubic) or isqrt (quartic)."""
    if u_bound < 0:
        raise ContractViolation("u_bound must be non-negative")
    out = []
    for u in range(-u_bound, u_bound + 1):
        out.extend((u, v) for v in family.integral_v(u))
    return sorted(out)


def brute_oracle(family, u_bound: int) -> list[tuple]:
    """Same set as small_u_scan, found by rounding floating roots and checking nearby integers."""
    out = set()
    for u in range(-u_bound, u_bound + 1):
        if isinstance(family, QuarticModel):
            val = family.Q(u)
            if val < 0:
                continue
            r = int(round(math.sqrt(val)))
            for c in range(r - 2, r + 3):
                if c >= 0 and c * c == val:
                    out.update({(u, c), (u, -c)})
        else:
            c0 = 15 * u ** 3 - 15 * u - 90 * family.d
            for root in np.roots([-1.0, 4.0, -3.0, float(c0)]):
                if abs(root.imag) > 1e-6 * max(1.0, abs(root.real)):
                    continue
                base = int(math.floor(root.real))
                for v in range(base - 2, base + 4):
                    if family.g(u, v) == 0:
                        out.add((u, v))
    return sorted(out)


def near_collisions(family, solutions) -> list[tuple]:
    """(m, n) pairs behind the solutions that meet the near-collision size constraints."""
    found = []
    for u, v in solutions:
        for m, n in recover_collision_vars(family.kind, u, v):
            if family.kind == "quartic":
                ok = m >= 4 and n >= 16 and math.comb(m, 2) >= 1
            else:
                big = math.comb(m, 6) if family.d < 0 else math.comb(n, 3)
                ok = n >= 6 and m >= 12 and big >= abs(family.d) ** 3
            if ok:
                found.append((m, n))
    return sorted(set(found))


@dataclass
class Resolution:
    rows: list
    scan_points: list
    solutions: list
    extra_points: list
    verdict: str
    near_collisions: list
    survivors: int
    audit: list = field(default_factory=list)
    complete: bool = False
    collision_pairs: list = field(default_factory=list)


def _shell_survivors(args) -> list:
    space, spec, M = args
    return sorted({t[1:-1] for t in inequality_filter(space, spec, shells=range(M, M + 1))})


def _read_rows(path) -> list:
    if not path or not os.path.exists(path):
        return []
    with open(path) as fh:
        return [tuple(int(x) for x in l.split(",")) for l in fh.read().splitlines() if l.strip()]


def full_resolution(family, basis: MWBasis, spec, mmax: int, u_bound: int,
                    reduced_bound: Optional[int] = None, checkpoint: Optional[str] = None,
                    workers: int = 1) -> Resolution:
    """Union of the direct scan below u_bound and the filtered enumeration up to mmax.

    With ``workers`` > 1 the shells max|m_i| = M are filtered in separate
    processes; the result does not depend on the worker count.  With a
    checkpoint, verified rows go to ``checkpoint + ".rows"`` so an
    interrupted run resumes without losing them.
    """
    space = SearchSpace(basis.rank, mmax)
    cache = PointCache(family.curve, basis)
    audit: list = []
    rows: dict = {}
    seen = set()
    rows_path = checkpoint + ".rows" if checkpoint else None

    def consider(coeffs):
        if coeffs in seen:
            return
        seen.add(coeffs)
        row = exact_verify(coeffs, family, basis, cache, audit)
        if row is not None:
            if row.pointC not in rows and rows_path:
                with open(rows_path, "a") as fh:
                    fh.write(",".join(map(str, coeffs)) + "\n")
            rows[row.pointC] = row

    for coeffs in _read_rows(rows_path):
        seen.discard(coeffs)
        consider(coeffs)
    if workers > 1 and checkpoint is None:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            jobs = [(space, spec, M) for M in range(mmax, -1, -1)]
            for found in pool.map(_shell_survivors, jobs):
                for coeffs in found:
                    consider(coeffs)
    else:
        for t in inequality_filter(space, spec, checkpoint=checkpoint):
            consider(t[1:-1])
    survivors = len(seen)
    scan = small_u_scan(family, u_bound)
    sols = sorted(set(rows) | set(scan))
    extra = [p for p in scan if p not in rows]
    nc = near_collisions(family, sols)
    pairs = sorted({mn for u, v in sols for mn in recover_collision_vars(family.kind, u, v)})
    return Resolution(sorted(rows.values(), key=SolutionRow.sort_key), scan, sols, extra,
                      "no-near-collision" if not nc else "found", nc, survivors, audit,
                      reduced_bound is not None and mmax >= reduced_bound, pairs)
