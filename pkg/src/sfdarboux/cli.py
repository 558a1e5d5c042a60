"""Command line interface: ``solve``, ``corpus``, ``oracle`` and ``check``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .algebra import RatFn
from .frontend import DegenerateOde, ParseError, parse_expression, parse_ode2
from .integrate import gradients_parallel, parse_first_integral, verify_first_integral
from .oracle import generate_random_integrable
from .pipeline import ConfigError, PipelineConfig, run_pipeline

CORPUS_SUFFIX = ".ode"
SIDECAR_SUFFIX = ".expected"


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` so that readers never observe a partial file."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(target.parent), prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_seed_range(text: str) -> range:
    """``"a..b"`` (both ends included) or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b or an integer, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError("empty seed range")
    return range(lo, hi + 1)


def read_corpus_file(path: Path) -> List[Tuple[int, str]]:
    """Non-empty, non-comment lines with their 1-based line numbers."""
    out = []
    for k, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((k, line))
    return out


def read_sidecar(path: Path) -> List[Optional[str]]:
    """Expected integrating factors, one per corpus entry; ``-`` means no expectation."""
    if not path.exists():
        return []
    out: List[Optional[str]] = []
    for _, line in read_corpus_file(path):
        out.append(None if line == "-" else line)
    return out


def matches_up_to_constant(found: RatFn, expected: RatFn) -> bool:
    if expected.is_zero():
        return found.is_zero()
    q = found / expected
    return q.den.is_constant() and q.num.is_constant() and not q.num.is_zero()


def _load_config(path: Optional[str]) -> PipelineConfig:
    return PipelineConfig.from_file(path) if path else PipelineConfig()


# --------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    cfg = _load_config(args.config)
    ode = parse_ode2(args.ode)
    report = run_pipeline(ode, cfg)
    print(report.summary())
    if args.json:
        write_atomic(args.json, report.to_json() + "\n")
    return 0 if report.success else 2


def _corpus_entry(job) -> Tuple[str, dict, Optional[bool]]:
    label, text, expected, cfg_dict = job
    cfg = PipelineConfig.from_mapping(cfg_dict)
    try:
        ode = parse_ode2(text)
    except (ParseError, DegenerateOde, ArithmeticError) as exc:
        return label, {"ode": text, "status": "failure", "failure_stage": "parse", "failure_reason": str(exc)}, None
    report = run_pipeline(ode, cfg)
    match = None
    if expected is not None and report.success and report.R is not None:
        alg = report.R.algebraic_part()
        match = alg is not None and matches_up_to_constant(alg, RatFn.coerce(parse_expression(expected)))
    return label, report.to_dict(), match


def cmd_corpus(args) -> int:
    cfg = _load_config(args.config)
    root = Path(args.dir)
    files = sorted(root.glob(f"*{CORPUS_SUFFIX}"))
    if not files:
        print(f"no *{CORPUS_SUFFIX} files in {root}", file=sys.stderr)
        return 1
    jobs = []
    for f in files:
        expected = read_sidecar(f.with_suffix(SIDECAR_SUFFIX))
        for idx, (lineno, text) in enumerate(read_corpus_file(f)):
            exp = expected[idx] if idx < len(expected) else None
            jobs.append((f"{f.stem}:{lineno}", text, exp, cfg.to_dict()))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_corpus_entry, jobs))
    else:
        results = [_corpus_entry(j) for j in jobs]
    failures = 0
    for label, rep, match in results:
        status = rep["status"]
        extra = ""
        if match is not None:
            extra = "  expected R: " + ("match" if match else "MISMATCH")
            failures += not match
        if status != "success":
            failures += 1
            extra += f"  [{rep.get('failure_stage')}: {rep.get('failure_reason')}]"
        ms = sum(rep.get("timings", {}).values())
        print(f"{label:<24} {status:<8} {ms:9.1f} ms  {rep['ode'][:60]}{extra}")
        if args.out:
            write_atomic(str(Path(args.out) / (label.replace(":", "_") + ".json")), json.dumps(rep, indent=2) + "\n")
    print(f"{len(results) - failures}/{len(results)} entries succeeded")
    return 0 if failures == 0 else 2


def cmd_oracle(args) -> int:
    cfg = _load_config(args.config)
    wrong = 0
    ok = 0
    t0 = time.perf_counter()
    for seed in args.seeds:
        inst = generate_random_integrable(seed)
        report = run_pipeline(inst.ode, cfg)
        if report.success:
            parallel = gradients_parallel(inst.truth, report.result)
            verdict = "ok" if parallel else "WRONG"
            wrong += not parallel
            ok += parallel
        else:
            verdict = f"bounded failure at {report.failure_stage}"
        ms = sum(report.timings.values())
        print(f"seed {seed:>4} {inst.shape:<12} {verdict:<32} {ms:9.1f} ms")
    total = len(args.seeds)
    print(f"{ok}/{total} certified and parallel to ground truth; {wrong} wrong; {time.perf_counter() - t0:.1f} s")
    return 1 if wrong else 0


def cmd_check(args) -> int:
    ode = parse_ode2(args.ode)
    J = parse_first_integral(args.integral)
    res = verify_first_integral(ode, J)
    print(f"residual: {res}")
    return 0 if res.is_zero else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sfdarboux", description="Liouvillian first integrals of rational 2ODEs z' = phi(x, y, z), z = y'.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run the pipeline on one equation")
    s.add_argument("--ode", required=True, help="right-hand side phi, e.g. \"-y\"")
    s.add_argument("--config", help="JSON pipeline configuration")
    s.add_argument("--json", help="write the JSON report here")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("corpus", help=f"run every *{CORPUS_SUFFIX} file in a directory")
    c.add_argument("--dir", required=True)
    c.add_argument("--config")
    c.add_argument("--out", help="directory for per-entry JSON reports")
    c.add_argument("--jobs", type=int, default=1)
    c.set_defaults(func=cmd_corpus)

    o = sub.add_parser("oracle", help="round-trip random integrable equations")
    o.add_argument("--seeds", required=True, type=parse_seed_range, help="inclusive range a..b")
    o.add_argument("--config")
    o.set_defaults(func=cmd_oracle)

    k = sub.add_parser("check", help="verify a first integral (no search)")
    k.add_argument("--ode", required=True)
    k.add_argument("--integral", required=True, help="rational part plus c*ln(poly) terms")
    k.set_defaults(func=cmd_check)
    return p


_VALUE_OPTIONS = ("--ode", "--integral")


def _glue_values(argv: Sequence[str]) -> List[str]:
    """Attach expression values to their option so that ``--ode -y`` is not read as a flag."""
    out: List[str] = []
    it = iter(argv)
    for a in it:
        if a in _VALUE_OPTIONS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_values(sys.argv[1:] if argv is None else argv))
    try:
        return args.func(args)
    except (ParseError, DegenerateOde, ConfigError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
