import functools
import random

import mpmath
import pytest

from conftest import case
from nearcollision.config import CASE_IDS
from nearcollision.curve import pairing_matrix
from nearcollision.models import CubicFamily, recover_collision_vars
from nearcollision.numerics import PrecisionContext
from nearcollision.pipeline import RunFlags, _Case
from nearcollision.search import (SearchSpace, brute_oracle, exact_verify, full_resolution,
                                  inequality_filter, near_collisions, small_u_scan)
from nearcollision.errors import ContractViolation

CTX = PrecisionContext(40)


@functools.lru_cache(maxsize=None)
def setup(cid):
    cfg = case(cid)
    c = _Case(cfg, RunFlags(precision=40))
    rho = pairing_matrix(c.curve, c.basis, CTX).rho
    return cfg, c, c.spec(CTX, rho)


def resolve(cid, mmax, **kw):
    cfg, c, spec = setup(cid)
    return full_resolution(c.model, c.basis, spec, mmax, c.u_bound, **kw)


def expected_solutions(cid):
    """Published solution set; for the cubic cases plus the line u = N, where g(N, v) = -v(v-1)(v-3)."""
    cfg = case(cid)
    if cid == "quartic":
        return {tuple(r[2]) for r in cfg.reference["rows"]}
    sols = {tuple(p) for p in cfg.reference["solutions"]}
    return sols | {(cfg.N, v) for v in (0, 1, 3)}


def quartic_coeffs(printed):
    # the published coefficient column uses -P4
    m = list(printed)
    m[3] = -m[3]
    return tuple(m)


@pytest.mark.parametrize("cid", CASE_IDS)
def test_oracle_equivalence(cid):
    fam = case(cid).model()
    assert small_u_scan(fam, 500) == brute_oracle(fam, 500)


def test_trivial_line_factorisation():
    for N in (-2, 2, 3, 4, 5):
        fam = CubicFamily(N)
        for v in range(-20, 21):
            assert fam.g(N, v) == -v * (v - 1) * (v - 3)


def test_small_u_scan_examples():
    dm1 = case("dm1").model()
    assert small_u_scan(dm1, 5) == [(-2, 0), (-2, 1), (-2, 3), (-1, 6), (0, 6), (1, 6)]
    qu = case("quartic").model()
    want = sorted((u, s * abs(v)) for _, _, (u, v) in case("quartic").reference["rows"] if abs(u) < 80
                  for s in (1, -1))
    assert small_u_scan(qu, 79) == sorted(set(want))
    for fam in (dm1, qu, CubicFamily(3)):
        assert all(u == 0 for u, _ in small_u_scan(fam, 0))
    with pytest.raises(ContractViolation):
        small_u_scan(dm1, -1)


def test_brute_oracle_examples():
    assert set(brute_oracle(case("dm1").model(), 200)) == expected_solutions("dm1")
    assert {(3, 3), (3, 1)} <= set(brute_oracle(CubicFamily(3), 50))
    assert set(brute_oracle(case("quartic").model(), 300)) == expected_solutions("quartic")


def test_exact_verify_examples():
    cfg, c, _ = setup("dm1")
    row = exact_verify((0, 0, -1, 0, -1), c.model, c.basis)
    assert row.pointC == (-138, -339) and row.pointE == (555, 12555)
    assert exact_verify((1, 1, 1, 1, 1), c.model, c.basis) is None
    qcfg, q, _ = setup("quartic")
    row = exact_verify(quartic_coeffs((0, 1, 0, 1, -1)), q.model, q.basis)
    assert row.pointC == (15, 945) and row.pointE == (-1491, 144648)
    assert row.collision_vars == ((5, 9),)
    zero = exact_verify((0,) * 5, q.model, q.basis)
    assert zero.pointE is None and zero.pointC == (0, -315)


def _survivors(cid, mmax):
    cfg, c, spec = setup(cid)
    return {t[1:-1] for t in inequality_filter(SearchSpace(cfg.rank, mmax), spec)}


def test_filter_keeps_published_rows():
    surv = _survivors("dm1", 1)
    for coeffs, _, _ in case("dm1").reference["rows"]:
        if coeffs is not None:
            assert tuple(coeffs) in surv
    assert (0, 0, -1, 0, -1) in surv and (0,) * 5 in surv
    qsurv = _survivors("quartic", 2)
    for coeffs, _, _ in case("quartic").reference["rows"]:
        assert quartic_coeffs(coeffs) in qsurv


def test_filter_rejects_generic_large_tuple():
    cfg, c, spec = setup("dm1")
    rng = random.Random(7)
    m = [rng.randint(-27, 27) for _ in range(5)]
    m[0] = 27
    with mpmath.workdps(40):
        base = sum(a * l for a, l in zip(m, spec.ell))
        thr = spec.threshold(27)
        best = min(abs(base + s * spec.ell0 + m0 * spec.omega1) for s in (1, -1) for m0 in range(-27, 28))
    assert thr < mpmath.mpf(10) ** -200 and best > 1e-4


def test_search_space_count():
    assert SearchSpace(5, 27).tuple_count == 55 ** 6 * 2
    with pytest.raises(ContractViolation):
        SearchSpace(5, 0)


def test_dm1_mmax2():
    res = resolve("dm1", 2)
    assert set(res.solutions) == expected_solutions("dm1")
    assert res.extra_points == [(-2, 0)]
    assert res.verdict == "no-near-collision" and res.near_collisions == []
    for r in res.rows:
        cfg, c, _ = setup("dm1")
        assert c.model.on_model(*r.pointC) and c.curve.contains(r.pointE)
        assert c.model.map_EtoC(*r.pointE) == r.pointC


def test_quartic_mmax2():
    res = resolve("quartic", 2)
    assert set(res.solutions) == expected_solutions("quartic") and len(res.solutions) == 26
    assert sorted(map(list, res.collision_pairs)) == sorted(case("quartic").reference["collision_pairs"])
    assert res.near_collisions == []


def test_N5_mmax2():
    assert {(5, 1), (5, 3)} <= set(resolve("N5", 2).solutions)


@pytest.mark.parametrize("cid", CASE_IDS)
def test_completeness_mmax3(cid):
    res = resolve(cid, 3)
    assert set(res.solutions) == expected_solutions(cid)
    cfg, c, _ = setup(cid)
    for u, v in res.solutions:
        assert c.model.on_model(u, v)
    assert res.verdict == "no-near-collision"


def test_near_collision_ranges():
    # constrained ranges are empty, while the unconstrained pairs exist
    assert near_collisions(case("dm1").model(), sorted(expected_solutions("dm1"))) == []
    assert near_collisions(case("quartic").model(), sorted(expected_solutions("quartic"))) == []
    assert (6, 2) in [mn for p in expected_solutions("dm1") for mn in recover_collision_vars("cubic", *p)]


def test_workers_agree():
    one = resolve("dm1", 2)
    two = resolve("dm1", 2, workers=2)
    assert one.solutions == two.solutions and one.survivors == two.survivors
    assert [r.coeffs for r in one.rows] == [r.coeffs for r in two.rows]


def test_checkpoint_resume(tmp_path):
    ck = str(tmp_path / "ck")
    full = resolve("dm1", 2, checkpoint=ck)
    lines = open(ck).read().split()
    assert lines[-1].startswith("3,0,")
    # rerun from a checkpoint claiming shells 0 and 1 done: rows found there come from the sidecar
    ck2 = str(tmp_path / "ck2")
    with open(ck2, "w") as fh:
        fh.write("2,0,0\n")
    with open(ck2 + ".rows", "w") as fh:
        fh.writelines(",".join(map(str, r.coeffs)) + "\n" for r in full.rows if max(map(abs, r.coeffs)) <= 1)
    resumed = resolve("dm1", 2, checkpoint=ck2)
    assert resumed.solutions == full.solutions
    assert [r.coeffs for r in resumed.rows] == [r.coeffs for r in full.rows]


LONG = {"N2": 14, "N3": 21, "N4": 26, "N5": 13}


@pytest.mark.slow
@pytest.mark.parametrize("cid", sorted(LONG))
def test_long_run_to_published_bound(cid):
    res = resolve(cid, LONG[cid], reduced_bound=LONG[cid])
    assert res.complete
    assert set(res.solutions) == expected_solutions(cid)
