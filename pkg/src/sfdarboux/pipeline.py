"""End-to-end driver: S-function, triple, Darboux polynomials, balance, recovery,
integrating factor, integration and certification."""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .algebra import ONE, Poly, RatFn
from .darboux import (
    DEFAULT_N0_TRIALS,
    CofactorBalance,
    DarbouxPair,
    DpSearchStats,
    ExpPart,
    NoSolution,
    _constraint_rows,
    balance_at,
    balance_family,
    balance_cofactors,
    common_cofactors,
    complete_balance_candidates,
    find_common_dps,
    recover_dp,
    refine_pairs,
    solve_exp_part,
    triple_fields,
)
from .frontend import Ode2, format_expression, format_poly
from .integrate import (
    AnsatzExhausted,
    FirstIntegralForm,
    IdentityFails,
    IntegratingFactor,
    assemble_R,
    integrate_closed_form,
    verify_first_integral,
)
from .sfunction import DegenerateEquation, DegenerateTriple, STriple, build_triple, find_sfunction
from .solver import BudgetExceeded, Inconsistent

STAGES = (
    "sfunction",
    "triple",
    "darboux",
    "exp_part",
    "balance",
    "recover_dp",
    "assemble",
    "integrate",
    "verify",
)

_DEFAULT_BUDGETS = {
    "sfunction": 20000.0,
    "darboux": 15000.0,
    "balance": 20000.0,
    "recover_dp": 30000.0,
    "integrate": 30000.0,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    s_search_order: Tuple[int, ...] = (3, 1, 2)
    s_degree_ladder: Tuple[Tuple[int, int], ...] = ((1, 1), (2, 2))
    dp_degree_main: int = 2
    dp_degree_param: int = 2
    B_subset_cap: int = 6
    n0_trials: Tuple[Fraction, ...] = tuple(Fraction(t) for t in DEFAULT_N0_TRIALS)
    degq0: Optional[int] = None
    deg_p0_cap: int = 48
    degC_cap: Optional[int] = None
    degA: int = 2
    exponent_values: Tuple[int, ...] = (-1, 0, 1, -2, 2, -3, 3)
    max_exponent_candidates: int = 24
    time_budget_ms: Mapping[str, float] = field(default_factory=lambda: dict(_DEFAULT_BUDGETS))

    def __post_init__(self):
        if sorted(self.s_search_order) != [1, 2, 3]:
            raise ConfigError("s_search_order must be a permutation of (1, 2, 3)")
        ladder = [tuple(b) for b in self.s_degree_ladder]
        if not ladder or any(len(b) != 2 or min(b) < 0 for b in ladder):
            raise ConfigError("s_degree_ladder needs nonnegative (deg u, deg v) pairs")
        if any(not (a[0] <= b[0] and a[1] <= b[1] and a != b) for a, b in zip(ladder, ladder[1:])):
            raise ConfigError("s_degree_ladder must be monotone increasing")
        for name in ("dp_degree_main", "B_subset_cap", "deg_p0_cap", "max_exponent_candidates"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("dp_degree_param", "degA"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        for name in ("degq0", "degC_cap"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive when given")
        if not self.n0_trials or any(Fraction(t) == 0 for t in self.n0_trials):
            raise ConfigError("n0_trials must be nonempty and nonzero")
        for stage, ms in self.time_budget_ms.items():
            if stage not in STAGES:
                raise ConfigError(f"unknown stage {stage!r} in time_budget_ms")
            if ms <= 0:
                raise ConfigError("time budgets must be positive")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
        kw: Dict[str, Any] = dict(data)
        if "s_search_order" in kw:
            kw["s_search_order"] = tuple(kw["s_search_order"])
        if "s_degree_ladder" in kw:
            kw["s_degree_ladder"] = tuple(tuple(b) for b in kw["s_degree_ladder"])
        if "n0_trials" in kw:
            kw["n0_trials"] = tuple(Fraction(str(t)) for t in kw["n0_trials"])
        if "exponent_values" in kw:
            kw["exponent_values"] = tuple(int(v) for v in kw["exponent_values"])
        if "time_budget_ms" in kw:
            budgets = dict(_DEFAULT_BUDGETS)
            budgets.update({k: float(v) for k, v in kw["time_budget_ms"].items()})
            kw["time_budget_ms"] = budgets
        return cls(**kw)

    @classmethod
    def from_file(cls, path: str) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_mapping(json.load(fh))

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["n0_trials"] = [str(t) for t in self.n0_trials]
        d["time_budget_ms"] = dict(self.time_budget_ms)
        return d


@dataclass
class PipelineReport:
    ode: str
    s_functions: List[Dict[str, Any]] = field(default_factory=list)
    triple: Optional[Dict[str, str]] = None
    darboux: List[Dict[str, Any]] = field(default_factory=list)
    exp_part: Optional[Dict[str, str]] = None
    balance: Optional[Dict[str, str]] = None
    p0: Optional[str] = None
    n0: Optional[str] = None
    integrating_factor: Optional[str] = None
    first_integral: Optional[Dict[str, Optional[str]]] = None
    residual: Optional[str] = None
    timings: Dict[str, float] = field(default_factory=dict)
    status: str = "failure"
    failure_stage: Optional[str] = None
    failure_reason: Optional[str] = None
    discarded: List[Dict[str, str]] = field(default_factory=list)
    # objects behind the text fields, not serialized
    result: Optional[FirstIntegralForm] = field(default=None, repr=False)
    R: Optional[IntegratingFactor] = field(default=None, repr=False)
    triple_obj: Optional[STriple] = field(default=None, repr=False)

    @property
    def success(self) -> bool:
        return self.status == "success"

    def to_dict(self, timings: bool = True) -> Dict[str, Any]:
        out = {
            "ode": self.ode,
            "s_functions": self.s_functions,
            "triple": self.triple,
            "darboux": self.darboux,
            "exp_part": self.exp_part,
            "balance": self.balance,
            "p0": self.p0,
            "n0": self.n0,
            "integrating_factor": self.integrating_factor,
            "first_integral": self.first_integral,
            "residual": self.residual,
            "timings": {k: round(v, 3) for k, v in self.timings.items()} if timings else {},
            "status": self.status,
            "failure_stage": self.failure_stage,
            "failure_reason": self.failure_reason,
            "discarded": self.discarded,
        }
        return out

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), indent=2, sort_keys=False)

    def summary(self) -> str:
        lines = [f"ode: z' = {self.ode}", f"status: {self.status}"]
        for s in self.s_functions:
            lines.append(f"S{s['index']} = {s['value']}")
        if self.integrating_factor:
            lines.append(f"R = {self.integrating_factor}")
        if self.first_integral:
            lines.append(f"J = {self.first_integral['additive']}")
            if self.first_integral.get("exponential"):
                lines.append(f"I = {self.first_integral['exponential']}")
        if self.residual is not None:
            lines.append(f"residual: {self.residual}")
        if not self.success:
            lines.append(f"failed at {self.failure_stage}: {self.failure_reason}")
        total = sum(self.timings.values())
        lines.append(f"time: {total:.1f} ms")
        return "\n".join(lines)


class _StageFailure(Exception):
    def __init__(self, stage: str, reason: str):
        super().__init__(f"{stage}: {reason}")
        self.stage = stage
        self.reason = reason


class _Clock:
    def __init__(self, budgets: Mapping[str, float]):
        self.timings: Dict[str, float] = {}
        self.budgets = budgets

    def run(self, stage: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.timings[stage] = self.timings.get(stage, 0.0) + (time.perf_counter() - t0) * 1000.0

    def deadline(self, stage: str) -> Optional[float]:
        budget = self.budgets.get(stage)
        if budget is None:
            return None
        return time.monotonic() + max(0.0, budget - self.timings.get(stage, 0.0)) / 1000.0

    def exhausted(self, stage: str) -> bool:
        budget = self.budgets.get(stage)
        return budget is not None and self.timings.get(stage, 0.0) > budget


def _fmt(v) -> str:
    return format_expression(v)


def _fmt_num(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _sfunction_candidates(ode: Ode2, cfg: PipelineConfig, clock: _Clock, notes: List[str]) -> Iterator[Tuple[int, RatFn]]:
    seen = set()
    degenerate = set()
    for bounds in cfg.s_degree_ladder:
        for k in cfg.s_search_order:
            if k in degenerate:
                continue
            if clock.exhausted("sfunction"):
                notes.append("time budget for the S-function search exhausted")
                return
            try:
                found = clock.run("sfunction", find_sfunction, ode, k, tuple(bounds), deadline=clock.deadline("sfunction"))
            except DegenerateEquation as exc:
                notes.append(f"S{k}: {exc}")
                degenerate.add(k)
                continue
            except BudgetExceeded:
                notes.append(f"S{k}: branch caps reached at bounds {tuple(bounds)}")
                continue
            for S in found:
                if (k, S) not in seen:
                    seen.add((k, S))
                    yield k, S


def _b_candidates(dps: Sequence[DarbouxPair], cap: int) -> List[Poly]:
    out = [ONE]
    exps = [range(3)] * len(dps)
    combos = sorted(
        (e for e in itertools.product(*exps) if any(e)),
        key=lambda e: (sum(d.p.degree() * k for d, k in zip(dps, e)), sum(e), e),
    )
    for e in combos:
        if len(out) >= cap:
            break
        B = ONE
        for d, k in zip(dps, e):
            if k:
                B = B * d.p**k
        out.append(B)
    return out[:cap]


def _exponent_vectors(dps: Sequence[DarbouxPair], sol, values: Sequence[int], limit: int) -> List[Dict[int, Fraction]]:
    """Small integer exponent vectors inside the admissible family, in preference order."""
    k = len(dps)
    if k == 0:
        return [{}]
    rank = {v: i for i, v in enumerate(values)}
    rows = _constraint_rows(sol)
    out = []
    # enumerate at most a few thousand vectors; beyond four DPs fall back to a ragged prefix
    pool = itertools.islice(itertools.product(values, repeat=k), 20000)
    scored = sorted(pool, key=lambda v: (sum(rank[x] for x in v), tuple(rank[x] for x in v)))
    for vec in scored:
        values_map = {("n", j): Fraction(vec[j]) for j in range(k)}
        if all(sum(c * values_map[s] for s, c in coeffs.items()) + const == 0 for coeffs, const in rows):
            out.append({j: Fraction(vec[j]) for j in range(k)})
            if len(out) >= limit:
                break
    return out


def _report_dps(dps: Sequence[DarbouxPair], exponents: Mapping[int, Fraction]) -> List[Dict[str, Any]]:
    out = []
    for j, d in enumerate(dps):
        out.append(
            {
                "p": format_poly(d.p),
                "cofactors": {f"f{i}": format_poly(d.cofactors[i]) if i in d.cofactors else None for i in (1, 2, 3)},
                "exponent": _fmt_num(exponents.get(j, 0)),
            }
        )
    return out


@dataclass
class _Success:
    k: int
    S: RatFn
    triple: STriple
    dps: List[DarbouxPair]
    exp: ExpPart
    balance: CofactorBalance
    p0: Optional[Poly]
    n0: Optional[Fraction]
    R: IntegratingFactor
    J: FirstIntegralForm


def _finish(ode, triple, dps, exp, bal, p0, n0, cfg, clock):
    factors: List[Tuple[Poly, Fraction]] = [(d.p, bal.exponents.get(j, 0)) for j, d in enumerate(dps)]
    if p0 is not None:
        factors.append((p0, n0))
    try:
        R = clock.run("assemble", assemble_R, exp, factors, triple)
    except IdentityFails as exc:
        raise _StageFailure("assemble", str(exc)) from exc
    try:
        J = clock.run("integrate", integrate_closed_form, R, triple, None, cfg.degC_cap)
    except (AnsatzExhausted, Inconsistent, BudgetExceeded) as exc:
        raise _StageFailure("integrate", str(exc)) from exc
    res = clock.run("verify", verify_first_integral, ode, J)
    if not res.is_zero:
        raise _StageFailure("verify", f"nonzero residual {res}")
    return R, J


def _attempt(ode: Ode2, k: int, S: RatFn, cfg: PipelineConfig, clock: _Clock, failures: List[_StageFailure]) -> Optional[_Success]:
    try:
        triple = clock.run("triple", build_triple, ode, S, k)
    except DegenerateTriple as exc:
        failures.append(_StageFailure("triple", str(exc)))
        return None
    fields = triple_fields(triple)
    dps: List[DarbouxPair] = []
    tried: set = set()
    # escalate the Darboux-polynomial degree only when the cheaper level fails
    for level in range(1, cfg.dp_degree_main + 1):
        if clock.exhausted("darboux"):
            failures.append(_StageFailure("darboux", "time budget exhausted"))
            if level > 1:
                break
            new: List[DarbouxPair] = []
        else:
            stats = DpSearchStats()
            new = clock.run(
                "darboux",
                find_common_dps,
                triple,
                level,
                cfg.dp_degree_param,
                deadline=clock.deadline("darboux"),
                stats=stats,
                min_main=level,
            )
            if stats.budget_hits:
                failures.append(_StageFailure("darboux", f"search caps reached at degree {level}"))
        merged = refine_pairs(fields, [d.p for d in dps] + [d.p for d in new])
        if level > 1 and len(merged) == len(dps):
            continue  # nothing new to try
        dps = merged
        for d in dps:
            if common_cofactors(fields, d.p) is None:  # pragma: no cover - guarded by construction
                raise AssertionError("Darboux polynomial fails on some plane field")
        got = _routes(ode, k, S, triple, dps, cfg, clock, failures, tried, include_all_unknown=(level == 1))
        if got is not None:
            return got
    return None


def _routes(ode, k, S, triple, dps, cfg, clock, failures, tried, include_all_unknown) -> Optional[_Success]:
    def done(exp, bal, p0, n0, dps_used):
        R, J = _finish(ode, triple, dps_used, exp, bal, p0, n0, cfg, clock)
        return _Success(k, S, triple, list(dps_used), exp, bal, p0, n0, R, J)

    # 1. complete integrating factor from known polynomials and an exponential part
    for B in _b_candidates(dps, cfg.B_subset_cap):
        if clock.exhausted("balance"):
            failures.append(_StageFailure("balance", "time budget exhausted"))
            break
        try:
            cands = clock.run("balance", complete_balance_candidates, triple, dps, B, cfg.degA)
        except NoSolution:
            continue
        for exp, bal in cands:
            key = ("complete", tuple(format_poly(d.p) for d in dps), tuple(sorted(bal.exponents.items())), exp.A, exp.B)
            if key in tried:
                continue
            tried.add(key)
            try:
                return done(exp, bal, None, None, dps)
            except _StageFailure as exc:
                failures.append(exc)

    # 2. trivial-B exponential part, balance with one unknown block p0
    try:
        exp = clock.run("exp_part", solve_exp_part, triple, ONE, cfg.degA)
    except NoSolution as exc:
        failures.append(_StageFailure("exp_part", str(exc)))
        return None
    routes: List[Tuple[Sequence[DarbouxPair], Dict[int, Fraction]]] = []
    try:
        base, per_dp, sol = clock.run("balance", balance_family, triple, dps, exp, cfg.degq0)
        vectors = _exponent_vectors(dps, sol, cfg.exponent_values, cfg.max_exponent_candidates)
        sparse = clock.run("balance", balance_cofactors, triple, dps, exp, cfg.degq0)
        if dict(sparse.exponents) not in vectors:
            vectors.append(dict(sparse.exponents))
        routes.extend((dps, v) for v in vectors)
    except NoSolution as exc:
        failures.append(_StageFailure("balance", str(exc)))
    if dps and include_all_unknown:
        routes.append(([], {}))  # everything unknown in one block
    coprime = [d.p for d in dps]
    for dps_used, vec in routes:
        if clock.exhausted("recover_dp"):
            failures.append(_StageFailure("recover_dp", "time budget exhausted"))
            break
        bal = clock.run("balance", balance_at, triple, dps_used, exp, vec)
        key = ("p0", tuple(format_poly(d.p) for d in dps_used), tuple(sorted(bal.exponents.items())))
        if key in tried:
            continue
        tried.add(key)
        if bal.complete:
            try:
                return done(exp, bal, None, None, dps_used)
            except _StageFailure as exc:
                failures.append(exc)
            continue
        try:
            p0, n0 = clock.run(
                "recover_dp",
                recover_dp,
                triple,
                bal,
                cfg.deg_p0_cap,
                cfg.n0_trials,
                coprime_to=coprime if dps_used else (),
                deadline=clock.deadline("recover_dp"),
            )
        except NoSolution as exc:
            failures.append(_StageFailure("recover_dp", str(exc)))
            continue
        try:
            return done(exp, bal, p0, n0, dps_used)
        except _StageFailure as exc:
            failures.append(exc)
    return None


def run_pipeline(ode: Ode2, cfg: Optional[PipelineConfig] = None) -> PipelineReport:
    """Run every stage on ``ode``; failures are reported, never raised."""
    cfg = cfg or PipelineConfig()
    clock = _Clock(cfg.time_budget_ms)
    report = PipelineReport(ode=_fmt(ode.phi))
    notes: List[str] = []
    failures: List[_StageFailure] = []
    success: Optional[_Success] = None
    for k, S in _sfunction_candidates(ode, cfg, clock, notes):
        report.s_functions.append({"index": k, "value": _fmt(S)})
        before = len(failures)
        try:
            success = _attempt(ode, k, S, cfg, clock, failures)
        except BudgetExceeded as exc:
            failures.append(_StageFailure("darboux", f"caps reached: {exc}"))
        if success is not None:
            break
        reason = failures[-1].reason if len(failures) > before else "no route produced a certified integral"
        stage = failures[-1].stage if len(failures) > before else "integrate"
        report.discarded.append({"index": str(k), "value": _fmt(S), "stage": stage, "reason": reason})
    report.timings = dict(clock.timings)
    if success is None:
        report.status = "failure"
        if not report.s_functions:
            report.failure_stage = "sfunction"
            report.failure_reason = "; ".join(notes) or "no rational S-function within the degree ladder"
        else:
            deepest = max(failures, key=lambda f: STAGES.index(f.stage)) if failures else None
            report.failure_stage = deepest.stage if deepest else "integrate"
            report.failure_reason = deepest.reason if deepest else "no certified integral"
        return report
    _fill_success(report, ode, success)
    return report


def _fill_success(report: PipelineReport, ode: Ode2, s: _Success) -> None:
    t = s.triple
    report.triple = {"q": format_poly(t.Q), "p": format_poly(t.P), "n": format_poly(t.N)}
    report.triple_obj = t
    report.darboux = _report_dps(s.dps, s.balance.exponents)
    report.exp_part = {"a": format_poly(s.exp.A), "b": format_poly(s.exp.B)}
    report.balance = {f"f{i}": format_poly(q) for i, q in sorted(s.balance.n0q0.items())}
    report.p0 = format_poly(s.p0) if s.p0 is not None else None
    report.n0 = _fmt_num(s.n0) if s.n0 is not None else None
    report.integrating_factor = str(s.R)
    report.R = s.R
    report.result = s.J
    report.first_integral = {"additive": s.J.additive(), "exponential": s.J.exponential()}
    # independent re-check at report time
    res = verify_first_integral(ode, s.J)
    report.residual = str(res)
    if res.is_zero:
        report.status = "success"
        report.failure_stage = None
        report.failure_reason = None
    else:  # pragma: no cover - _finish already certified
        report.status = "failure"
        report.failure_stage = "verify"
        report.failure_reason = f"nonzero residual {res}"
