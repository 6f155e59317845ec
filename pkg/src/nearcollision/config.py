"""Per-case configuration: loading, validation and serialisation.

Rationals are written as "p/q" strings and reals as decimal strings so
that nothing passes through a binary float.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Optional

import mpmath
import yaml

from .bounds import DavidConstants
from .curve import MWBasis
from .errors import ConfigError
from .models import CubicFamily, QuarticModel

CASE_IDS = ("dm1", "N2", "N3", "N4", "N5", "quartic")
CONFIG_VERSION = "v1"

_DAVID_KEYS = ("c12", "c13", "c14", "c15")
_QUARTIC_KEYS = ("c16", "c17", "c18")


def _rational(s) -> Fraction:
    return Fraction(str(s))


def _real(s) -> mpmath.mpf:
    return mpmath.mpf(str(s))


@dataclass
class CaseConfig:
    case_id: str
    family: str
    N: Optional[int]
    generators: list
    torsion_order: int
    david: dict
    gamma: str
    h_P0_bound: str
    alpha: str
    beta: str
    unimproved_generators: list = field(default_factory=list)
    linear_form: dict = field(default_factory=dict)
    reduced_bound: Optional[int] = None
    reference: dict = field(default_factory=dict)

    # ----- derived objects
    def model(self):
        return QuarticModel() if self.family == "quartic" else CubicFamily(self.N)

    def basis(self) -> MWBasis:
        c = self.model().curve
        return MWBasis(tuple(c.point(x, y) for x, y in self.generators), self.torsion_order)

    def unimproved_basis(self) -> Optional[MWBasis]:
        if not self.unimproved_generators:
            return None
        c = self.model().curve
        return MWBasis(tuple(c.point(x, y) for x, y in self.unimproved_generators), self.torsion_order)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def alpha_q(self) -> Fraction:
        return _rational(self.alpha)

    @property
    def beta_q(self) -> Fraction:
        return _rational(self.beta)

    def david_constants(self) -> DavidConstants:
        d = self.david
        extra = {k: _real(d[k]) for k in _QUARTIC_KEYS if k in d}
        return DavidConstants(*(_real(d[k]) for k in _DAVID_KEYS), _rational(self.alpha),
                              _rational(self.beta), _real(self.gamma), self.rank, self.rank + 1, **extra)

    # ----- (de)serialisation
    def to_dict(self) -> dict:
        out = {
            "case": self.case_id,
            "family": self.family,
            "N": self.N,
            "generators": [[str(x), str(y)] for x, y in self.generators],
            "torsion_order": self.torsion_order,
            "david": dict(self.david),
            "gamma": self.gamma,
            "h_P0_bound": self.h_P0_bound,
            "alpha": self.alpha,
            "beta": self.beta,
        }
        if self.unimproved_generators:
            out["unimproved_generators"] = [[str(x), str(y)] for x, y in self.unimproved_generators]
        if self.linear_form:
            out["linear_form"] = dict(self.linear_form)
        if self.reduced_bound is not None:
            out["reduced_bound"] = self.reduced_bound
        if self.reference:
            out["reference"] = self.reference
        return out

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def _pairs(raw, key, problems):
    out = []
    for item in raw or []:
        try:
            x, y = item
            out.append((_rational(x), _rational(y)))
        except (TypeError, ValueError, ZeroDivisionError):
            problems.append(f"{key}: cannot read {item!r} as a rational pair")
    return out


def from_dict(data: dict) -> CaseConfig:
    problems: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["the configuration is not a mapping"])
    for key in ("case", "family", "generators", "david", "gamma", "alpha", "beta"):
        if key not in data:
            problems.append(f"missing key {key!r}")
    if problems:
        raise ConfigError(problems)
    family = data["family"]
    if family not in ("cubic", "quartic"):
        problems.append(f"family must be cubic or quartic, not {family!r}")
    N = data.get("N")
    if family == "cubic" and (not isinstance(N, int) or abs(N) < 2 or (N ** 3 - N) % 6):
        problems.append(f"N={N!r} is not an admissible family parameter")
    gens = _pairs(data["generators"], "generators", problems)
    unimp = _pairs(data.get("unimproved_generators"), "unimproved_generators", problems)
    david = {str(k): str(v) for k, v in dict(data["david"]).items()}
    need = _DAVID_KEYS + (_QUARTIC_KEYS if family == "quartic" else ())
    for k in need:
        if k not in david:
            problems.append(f"david.{k} is missing")
    for k, v in list(david.items()) + [("gamma", data["gamma"])] + [(k, data[k]) for k in ("alpha", "beta")]:
        try:
            val = _real(v) if k not in ("alpha", "beta") else _rational(v)
            if not val > 0:
                problems.append(f"{k} must be positive, got {v}")
        except (ValueError, TypeError, ZeroDivisionError):
            problems.append(f"{k}: cannot read {v!r}")
    torsion = data.get("torsion_order", 1)
    if not isinstance(torsion, int) or torsion < 1:
        problems.append("torsion_order must be a positive integer")
    cfg = CaseConfig(str(data["case"]), family, N, gens, torsion if isinstance(torsion, int) else 1,
                     david, str(data["gamma"]), str(data.get("h_P0_bound", "")),
                     str(data["alpha"]), str(data["beta"]), unimp,
                     {str(k): str(v) for k, v in dict(data.get("linear_form") or {}).items()},
                     data.get("reduced_bound"), data.get("reference") or {})
    if not problems:
        try:
            curve = cfg.model().curve
        except Exception as exc:  # model construction rejects bad N
            problems.append(str(exc))
        else:
            for name, pts in (("generators", gens), ("unimproved_generators", unimp)):
                for P in pts:
                    if not curve.contains(P):
                        problems.append(f"{name}: {P[0]}, {P[1]} is not on {curve}")
    if problems:
        raise ConfigError(problems)
    return cfg


def loads(text: str) -> CaseConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"unreadable YAML: {exc}"]) from exc
    return from_dict(data)


def load_path(path: str) -> CaseConfig:
    with open(path) as fh:
        return loads(fh.read())


def load_case(case_id: str) -> CaseConfig:
    """A shipped case by id (dm1, N2..N5, quartic) or a path to a YAML file."""
    if case_id not in CASE_IDS:
        return load_path(case_id)
    text = resources.files("nearcollision").joinpath("cases", CONFIG_VERSION, f"{case_id}.yaml").read_text()
    return loads(text)
