import functools
from fractions import Fraction

import mpmath
import pytest
from hypothesis import HealthCheck, settings

from nearcollision.config import CASE_IDS, load_case
from nearcollision.elog import ell_log, periods
from nearcollision.numerics import PrecisionContext

settings.register_profile("repo", deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

CTX = PrecisionContext(60)


@functools.lru_cache(maxsize=None)
def case(case_id):
    return load_case(case_id)


@functools.lru_cache(maxsize=None)
def elog_data(case_id, digits=60):
    """(periods, [l_i], l_0) for a shipped case."""
    cfg = case(case_id)
    ctx = PrecisionContext(digits)
    model = cfg.model()
    per = periods(model.curve, ctx)
    ell = [ell_log(model.curve, P, per, ctx).value for P in cfg.basis().generators]
    ell0 = ell_log(model.curve, model.P0(), per, ctx).value
    return per, ell, ell0


def mpf(s):
    return mpmath.mpf(str(s))


def frac_pair(p):
    return (Fraction(str(p[0])), Fraction(str(p[1])))


@pytest.fixture(params=CASE_IDS)
def case_id(request):
    return request.param


ACCEPTANCE_LINES: dict = {}


def record_criterion(n, ok, detail):
    """One PASS/FAIL line per acceptance criterion, shown in the terminal summary."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
