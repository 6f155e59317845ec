"""Stage orchestration for one case and the report it produces."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import mpmath

from .bounds import (cubic_envelope_constants, envelope, initial_bound, quartic_domain_constants,
                     quartic_envelope_constants, uniform_constants)
from .config import CaseConfig, load_case
from .curve import pairing_matrix
from .elog import ell_log, periods
from .lattice import final_bound, reduction_chain, required_digits
from .numerics import PrecisionContext, to_mpf
from .search import full_resolution

log = logging.getLogger(__name__)

STAGES = ("periods", "heights", "bound", "reduce", "search", "pipeline")
_ORDER = STAGES[:-1]


@dataclass
class RunFlags:
    precision: int = 60
    mmax: int = 3
    workers: int = 1
    long_run: bool = False
    checkpoint: Optional[str] = None


@dataclass
class ResolutionReport:
    case_id: str
    stage: str
    precision: int
    omega1: Optional[object] = None
    omega2: Optional[object] = None
    roots: list = field(default_factory=list)
    ell: list = field(default_factory=list)
    ell0: Optional[object] = None
    heights: list = field(default_factory=list)
    rho: Optional[object] = None
    rho_unimproved: Optional[object] = None
    initial_bound: Optional[object] = None
    chain: list = field(default_factory=list)
    reduced_bound: Optional[int] = None
    mmax: Optional[int] = None
    rank: int = 0
    rows: list = field(default_factory=list)
    scan_points: list = field(default_factory=list)
    solutions: list = field(default_factory=list)
    extra_points: list = field(default_factory=list)
    verdict: Optional[str] = None
    near_collisions: list = field(default_factory=list)
    collision_pairs: list = field(default_factory=list)
    survivors: Optional[int] = None
    complete: bool = False

    def to_dict(self) -> dict:
        def num(x, digits=15):
            if x is None:
                return None
            if isinstance(x, mpmath.mpc):
                return [mpmath.nstr(x.real, digits), mpmath.nstr(x.imag, digits)]
            return mpmath.nstr(to_mpf(x), digits)
        return {
            "case": self.case_id,
            "stage": self.stage,
            "precision": self.precision,
            "omega1": num(self.omega1),
            "omega2": num(self.omega2),
            "roots": [num(e) for e in self.roots],
            "ell": [num(l) for l in self.ell],
            "ell0": num(self.ell0),
            "heights": [num(h) for h in self.heights],
            "rho": num(self.rho),
            "rho_unimproved": num(self.rho_unimproved),
            "initial_bound": num(self.initial_bound, 6),
            "chain": self.chain,
            "reduced_bound": self.reduced_bound,
            "mmax": self.mmax,
            "rows": [_row_dict(r) for r in self.rows],
            "extra_points": [list(p) for p in self.extra_points],
            "solutions": [list(p) for p in self.solutions],
            "verdict": self.verdict,
            "near_collisions": [list(p) for p in self.near_collisions],
            "collision_pairs": [list(p) for p in self.collision_pairs],
            "survivors": self.survivors,
            "complete": self.complete,
        }


def _fmt_point(P) -> str:
    if P is None:
        return "O"
    return f"({P[0]}, {P[1]})"


def _row_dict(r) -> dict:
    return {"coeffs": list(r.coeffs), "pointE": None if r.pointE is None else [str(c) for c in r.pointE],
            "pointC": list(r.pointC), "collision": [list(p) for p in r.collision_vars]}


def _table_cells(report: ResolutionReport):
    head = [f"m{i + 1}" for i in range(report.rank)] + ["P^E", "P^C", "(m,n)"]
    body = []
    for r in report.rows:
        mn = "; ".join(f"({m},{n})" for m, n in r.collision_vars)
        body.append([str(c) for c in r.coeffs] + [_fmt_point(r.pointE), _fmt_point(r.pointC), mn])
    return head, body


def emit_table(report: ResolutionReport, fmt: str = "text") -> str:
    """The solution rows as m1..mr | P^E | P^C | (m,n)."""
    head, body = _table_cells(report)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(head)
        w.writerows(body)
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown table format {fmt!r}")
    widths = [max(len(row[i]) for row in [head] + body) for i in range(len(head))]
    line = lambda cells: "| " + " | ".join(c.rjust(w) for c, w in zip(cells, widths)) + " |"
    rule = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    out = [rule, line(head), rule.replace("-", "=")]
    out += [line(b) for b in body]
    out.append(rule)
    return "\n".join(out) + "\n"


def render_text(report: ResolutionReport) -> str:
    d = report.to_dict()
    lines = [f"case {d['case']}  stage {d['stage']}  precision {d['precision']}"]
    for key in ("omega1", "omega2", "roots", "ell", "ell0", "heights", "rho", "rho_unimproved",
                "initial_bound", "reduced_bound", "mmax", "survivors"):
        if d[key] not in (None, []):
            lines.append(f"{key:15s} {d[key]}")
    for step in report.chain:
        lines.append(f"reduction      bound {step['bound']}  C=10^{step['log10_C']}  "
                     f"|b0|={step['b0']}  -> {step['next']}")
    if report.verdict is not None:
        lines.append(emit_table(report, "text").rstrip("\n"))
        if report.extra_points:
            lines.append(f"only from the direct scan: {d['extra_points']}")
        lines.append(f"solutions      {d['solutions']}")
        lines.append(f"(m,n) behind   {d['collision_pairs']}")
        lines.append(f"verdict        {report.verdict}"
                     + (f" {d['near_collisions']}" if report.near_collisions else ""))
        if not report.complete:
            lines.append("note           search below the reduced bound only up to mmax; "
                         "use --long-run for the full range")
    return "\n".join(lines) + "\n"


def render(report: ResolutionReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        return emit_table(report, "csv")
    return render_text(report)


class _Case:
    """Lazily computed quantities shared between stages."""

    def __init__(self, cfg: CaseConfig, flags: RunFlags):
        self.cfg = cfg
        self.flags = flags
        self.ctx = PrecisionContext(flags.precision)
        self.model = cfg.model()
        self.curve = self.model.curve
        self.basis = cfg.basis()

    def elogs(self, ctx: PrecisionContext):
        per = periods(self.curve, ctx)
        ell = [ell_log(self.curve, P, per, ctx).value for P in self.basis.generators]
        ell0 = ell_log(self.curve, self.model.P0(), per, ctx).value
        return per, ell, ell0

    def envelope_constants(self):
        cfg = self.cfg
        if cfg.family == "quartic":
            return quartic_envelope_constants(to_mpf(cfg.gamma), quartic_domain_constants().c7_max)
        if cfg.linear_form:
            return to_mpf(cfg.linear_form["k1"]), to_mpf(cfg.linear_form["k2"])
        return cubic_envelope_constants(cfg.N, to_mpf(cfg.gamma))

    def spec(self, ctx: PrecisionContext, rho):
        per, ell, ell0 = self.elogs(ctx)
        k1, k2 = self.envelope_constants()
        with ctx.activate():
            return envelope(per.omega1, ell, ell0, rho, self.cfg.alpha_q, self.cfg.beta_q, k1, k2, ctx=ctx)

    @property
    def u_bound(self) -> int:
        if self.cfg.family == "quartic":
            return quartic_domain_constants().threshold - 1
        return uniform_constants(self.cfg.N).search_threshold - 1


def _stages_for(stage: str) -> tuple:
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}; choose from {', '.join(STAGES)}")
    if stage == "pipeline":
        return _ORDER
    need = {"periods": ("periods",), "heights": ("heights",), "bound": ("heights", "bound"),
            "reduce": ("heights", "bound", "reduce"), "search": ("periods", "heights", "search")}
    return need[stage]


def run(case, stage: str = "pipeline", flags: Optional[RunFlags] = None) -> ResolutionReport:
    """Run ``stage`` (and what it depends on) for a case id, YAML path or CaseConfig."""
    flags = flags or RunFlags()
    cfg = case if isinstance(case, CaseConfig) else load_case(case)
    todo = _stages_for(stage)
    c = _Case(cfg, flags)
    rep = ResolutionReport(cfg.case_id, stage, flags.precision, rank=cfg.rank)
    ctx = c.ctx
    if "periods" in todo:
        per, ell, ell0 = c.elogs(ctx)
        rep.omega1, rep.omega2, rep.roots = per.omega1, per.omega2, list(per.roots)
        rep.ell, rep.ell0 = ell, ell0
    if "heights" in todo:
        hp = pairing_matrix(c.curve, c.basis, ctx)
        rep.heights, rep.rho = hp.heights, hp.rho
        unimp = cfg.unimproved_basis()
        if unimp is not None:
            rep.rho_unimproved = pairing_matrix(c.curve, unimp, ctx).rho
    if "bound" in todo:
        uni = None if cfg.family == "quartic" else uniform_constants(cfg.N)
        rep.initial_bound = initial_bound(cfg.david_constants(), rep.rho, uni, ctx)
    if "reduce" in todo:
        k = cfg.rank + 1
        digits = max(flags.precision, required_digits(k, rep.initial_bound))
        spec = c.spec(ctx.with_digits(digits), rep.rho)
        refine = lambda d: c.spec(ctx.with_digits(d), rep.rho)
        states = reduction_chain(spec, rep.initial_bound, digits=digits, refine=refine)
        for st in states:
            rep.chain.append({"bound": mpmath.nstr(to_mpf(st.current_bound), 4),
                              "log10_C": len(str(st.C)) - 1,
                              "b0": mpmath.nstr(mpmath.sqrt(sum(x * x for x in st.b0)), 4),
                              "next": st.next_bound, "retries": st.retries})
        rep.reduced_bound = final_bound(states)
    if "search" in todo:
        target = rep.reduced_bound or cfg.reduced_bound or cfg.reference.get("reduced_bound")
        if flags.long_run:
            if target is None:
                raise ValueError("--long-run needs a reduced bound: run the reduce stage or configure one")
            mmax = int(target)
        else:
            mmax = flags.mmax
        rep.mmax = mmax
        spec = c.spec(ctx, rep.rho)
        res = full_resolution(c.model, c.basis, spec, mmax, c.u_bound,
                              reduced_bound=None if target is None else int(target),
                              checkpoint=flags.checkpoint, workers=flags.workers)
        rep.rows, rep.scan_points, rep.solutions = res.rows, res.scan_points, res.solutions
        rep.extra_points, rep.verdict = res.extra_points, res.verdict
        rep.near_collisions, rep.survivors, rep.complete = res.near_collisions, res.survivors, res.complete
        rep.collision_pairs = res.collision_pairs
        for note in res.audit:
            log.info("exceptional point skipped: %s", note)
    return rep
