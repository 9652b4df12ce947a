"""Command-line front end.

Subcommands::

    optransport classify "x*y - 1"
    optransport check "x*y - 2" --lambda 1 --json
    optransport sweep --max-deg 3 --coeffs=-1,0,1,2 --lambdas 0,1
    optransport coextend "x*y - y*x" --entry 0:0,1,0 --fixtures 3
    optransport extend "x*y - 1" --word 1 --word 1.2 --fixtures 4

Exit codes: 0 consistent, 1 internal mismatch or disagreement, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Dict, List, Optional, Sequence

from .algebra import AlgElem, OmegaConstraint, make_divided_power, scalar, scalar_str
from .classify import (
    DEFAULT_FIXTURES,
    CounterexampleWitness,
    InternalMismatch,
    NoCounterexampleAtWeight,
    SweepRow,
    WeightMode,
    classify_omega,
    default_grid,
    find_counterexample,
    mode_for,
    nilpotent_derivation,
    sweep,
    verify_positive,
)
from .hurwitz import FiniteSupportSeries, coextend, unit_series
from .omega_syntax import OmegaParseError, format_omega, parse_omega
from .shuffle import ShuffleAlgebra, extend


class UsageError(ValueError):
    pass


# serialization ---------------------------------------------------------------


def omega_json(omega: OmegaConstraint) -> Dict[str, Any]:
    return {"phi": [scalar_str(c) for c in omega.phi], "psi": [scalar_str(c) for c in omega.psi],
            "text": format_omega(omega)}


def elem_json(x: AlgElem) -> Dict[str, Any]:
    return {"basis": list(x.algebra.labels), "coords": [scalar_str(c) for c in x.coords]}


def series_json(f: FiniteSupportSeries) -> Dict[str, Any]:
    return {str(n): [scalar_str(c) for c in coords] for n, coords in sorted(f.entries.items())}


def witness_json(w: CounterexampleWitness) -> Dict[str, Any]:
    return {"fixture_m": w.fixture_m, "lambda": scalar_str(w.lam), "f": series_json(w.f), "g": series_json(w.g),
            "n": w.n, "formula": w.closed_form, "variant": w.variant, "certified": w.certified,
            "orientation_sign": w.orientation_sign,
            "normalized_defect": elem_json(w.orientation_sign * w.defect)}


def row_json(row: SweepRow) -> Dict[str, Any]:
    out = {
        "omega": omega_json(row.omega),
        "lambda": scalar_str(row.lam),
        "class": str(row.omega_class),
        "symbolic": "admissible" if row.symbolic else "not-admissible",
        "verdict": "pass" if row.experimental else "fail",
        "agree": row.agree,
        "holds_at_weight": row.holds_at_weight,
        "components_checked": row.components_checked,
    }
    if row.case_id:
        out["case_id"] = row.case_id
    if row.defect is not None and isinstance(row.defect, AlgElem):
        out["defect"] = elem_json(row.defect)
    if row.refuted_at is not None:
        out["refuted_at"] = scalar_str(row.refuted_at)
    if row.note:
        out["note"] = row.note
    return out


# argument helpers -------------------------------------------------------------


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")


def _scalar_list(text: str) -> list:
    try:
        return [scalar(t.strip()) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"expected comma-separated rationals, got {text!r}")


def _config(args) -> Dict[str, Any]:
    try:
        lam = scalar(args.lam)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--lambda must be an integer or p/q, got {args.lam!r}")
    fixtures = _int_list(args.fixtures)
    if args.depth < 1:
        raise UsageError("--depth must be at least 1")
    if args.cap < 2:
        raise UsageError("--cap must be at least 2")
    if not fixtures or min(fixtures) < 1:
        raise UsageError("--fixtures must list positive depths")
    return {"lam": lam, "N": args.depth, "L": args.cap, "fixtures": fixtures, "seed": args.seed}


class _Output:
    def __init__(self, path: Optional[str]):
        self.stream = open(path, "w") if path else sys.stdout

    def line(self, text: str) -> None:
        self.stream.write(text + "\n")

    def close(self) -> None:
        if self.stream is not sys.stdout:
            self.stream.close()


# subcommands --------------------------------------------------------------------


def cmd_classify(omega: OmegaConstraint, cfg, args, out: _Output) -> int:
    lam = cfg["lam"]
    mode = mode_for(lam)
    cls = classify_omega(omega, mode)
    approved = cls.approved(mode)
    if args.json:
        out.line(json.dumps({"omega": omega_json(omega), "lambda": scalar_str(lam), "class": str(cls),
                             "mode": mode.value, "verdict": "admissible" if approved else "not-admissible"}))
    else:
        where = "at weight 0" if mode is WeightMode.ZERO else "at all weights"
        out.line(f"{format_omega(omega)}: {cls} ({'admissible' if approved else 'not admissible'} {where})")
    return 0


def cmd_check(omega: OmegaConstraint, cfg, args, out: _Output) -> int:
    lam = cfg["lam"]
    cls = classify_omega(omega)
    report: Dict[str, Any] = {"omega": omega_json(omega), "lambda": scalar_str(lam), "class": str(cls)}
    code = 0
    if cls.approved(mode_for(lam)):
        res = verify_positive(omega, lam, N=cfg["N"], fixtures=cfg["fixtures"], seed=cfg["seed"])
        report["verdict"] = "pass" if res.passed else "fail"
        report["components_checked"] = res.checked
        if not res.passed:
            code = 1
            report["defect"] = elem_json(res.defect)
            report["note"] = "admissible constraint failed the positive suite"
    else:
        try:
            wit = find_counterexample(omega, lam)
            report.update(verdict="counterexample", case_id=wit.case_id, witness=witness_json(wit),
                          defect=elem_json(wit.defect), components_checked=2)
        except NoCounterexampleAtWeight:
            res = verify_positive(omega, lam, N=cfg["N"], fixtures=cfg["fixtures"], seed=cfg["seed"])
            if res.passed:
                report.update(verdict="holds-at-this-weight", components_checked=res.checked)
                wit = find_counterexample(omega, 0)
                report.update(case_id=wit.case_id, witness=witness_json(wit), defect=elem_json(wit.defect),
                              note="not in the all-weights class; refuted at weight 0")
            else:
                report.update(verdict="counterexample", case_id="positive-suite", defect=elem_json(res.defect),
                              components_checked=res.checked)
        except InternalMismatch as exc:
            report.update(verdict="internal-mismatch", note=str(exc), components_checked=0)
            code = 1
    if args.json:
        out.line(json.dumps(report))
    else:
        out.line(f"{report['omega']['text']} at weight {report['lambda']}: {report['class']}, {report['verdict']}")
        if "case_id" in report:
            out.line(f"  case {report['case_id']}")
        if "witness" in report:
            w = report["witness"]
            out.line(f"  fixture I_{w['fixture_m']} at weight {w['lambda']}, f = {w['f']}, g = {w['g']}, n = {w['n']}")
            if w["formula"]:
                out.line(f"  closed form: {w['formula']}")
        if "defect" in report:
            d = report["defect"]
            out.line(f"  defect (operator side minus product side): {dict(zip(d['basis'], d['coords']))}")
        if "witness" in report and report["witness"]["orientation_sign"] == -1:
            d = report["witness"]["normalized_defect"]
            out.line(f"  same defect with the closed form's sign convention: {dict(zip(d['basis'], d['coords']))}")
        if "note" in report:
            out.line(f"  {report['note']}")
        out.line(f"  components checked: {report['components_checked']}")
    return code


def cmd_sweep(cfg, args, out: _Output) -> int:
    coeffs = _int_list(args.coeffs)
    lambdas = _scalar_list(args.lambdas)
    grid = default_grid(args.max_deg, coeffs)
    rows = sweep(grid, lambdas, N=cfg["N"], trials=args.trials, fixtures=cfg["fixtures"], seed=cfg["seed"])
    bad = 0
    for row in rows:
        bad += not row.agree
        if args.json:
            out.line(json.dumps(row_json(row)))
        else:
            flag = "ok" if row.agree else "DISAGREE"
            extra = f" {row.case_id}" if row.case_id else ""
            out.line(f"{flag:8} λ={scalar_str(row.lam):>4}  {format_omega(row.omega):40} "
                     f"{'pass' if row.experimental else 'fail'}{extra}")
    if not args.json:
        out.line(f"{len(rows)} rows, {bad} disagreements")
    return 1 if bad else 0


def _parse_entry(text: str, dim: int):
    try:
        index, coords = text.split(":", 1)
        values = [scalar(c) for c in coords.split(",")]
        n = int(index)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--entry expects INDEX:c0,c1,..., got {text!r}")
    if len(values) != dim:
        raise UsageError(f"--entry {text!r} needs {dim} coordinates")
    return n, values


def cmd_coextend(omega: OmegaConstraint, cfg, args, out: _Output) -> int:
    m = cfg["fixtures"][0]
    lam = cfg["lam"]
    alg, P, _ = make_divided_power(m, lam)
    if args.entry:
        f = FiniteSupportSeries(alg, lam, dict(_parse_entry(e, alg.dim) for e in args.entry))
    else:
        f = unit_series(alg, lam)
    image = coextend(P, omega, f)
    comps = [image[n] for n in range(cfg["N"] + 1)]
    if args.json:
        out.line(json.dumps({"omega": omega_json(omega), "lambda": scalar_str(lam), "fixture_m": m,
                             "components": [elem_json(c) for c in comps]}))
    else:
        for n, c in enumerate(comps):
            out.line(f"[{n}] {c!r}")
    return 0


def _parse_word(text: str, dim: int):
    try:
        word = tuple(int(t) for t in text.split("."))
    except ValueError:
        raise UsageError(f"--word expects dot-separated basis indices, got {text!r}")
    if not word or any(i < 0 or i >= dim for i in word):
        raise UsageError(f"--word {text!r} uses an index outside 0..{dim - 1}")
    return word


def cmd_extend(omega: OmegaConstraint, cfg, args, out: _Output) -> int:
    m = cfg["fixtures"][0]
    d = nilpotent_derivation(m)
    ctx = ShuffleAlgebra(d.domain, 0, cfg["L"])
    words = [_parse_word(w, d.domain.dim) for w in (args.word or ["1"])]
    results = []
    for w in words:
        image = extend(d, omega, ctx.word(*w))
        results.append((w, image))
    if args.json:
        out.line(json.dumps({"omega": omega_json(omega), "fixture": f"k[t]/(t^{m})", "cap": cfg["L"],
                             "images": [{"word": list(w), "terms": {".".join(map(str, k)): scalar_str(c)
                                                                    for k, c in sorted(img.terms.items())}}
                                        for w, img in results]}))
    else:
        for w, img in results:
            out.line(f"{'.'.join(map(str, w))} -> {img!r}")
    return 0


# parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", default="0", help="weight, integer or p/q (default 0)")
    common.add_argument("--depth", type=int, default=6, help="series components to check (N)")
    common.add_argument("--cap", type=int, default=5, help="tensor length cap (L)")
    common.add_argument("--fixtures", default=",".join(map(str, DEFAULT_FIXTURES)),
                        help="comma-separated fixture depths")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", help="write output to this file")

    parser = argparse.ArgumentParser(prog="optransport", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [("classify", "symbolic class of a constraint"),
                            ("check", "verify or refute a constraint at a weight")]:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("omega")
    p = sub.add_parser("sweep", parents=[common], help="confront classification and computation on a grid")
    p.add_argument("--max-deg", type=int, default=3, help="maximum degree of phi and psi (negative: empty grid)")
    p.add_argument("--coeffs", default="-1,0,1,2")
    p.add_argument("--lambdas", default="0,1")
    p.add_argument("--trials", type=int, default=20, help="random witness pairs per fixture")
    p = sub.add_parser("coextend", parents=[common], help="components of the coextension on I_m (first fixture)")
    p.add_argument("omega")
    p.add_argument("--entry", action="append", help="series entry INDEX:c0,c1,... (repeatable; default unit)")
    p = sub.add_parser("extend", parents=[common], help="extension of d(t)=t^2 on k[t]/(t^m) applied to words")
    p.add_argument("omega")
    p.add_argument("--word", action="append", help="basis word as dot-separated indices, e.g. 1.0.2")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    out = None
    try:
        cfg = _config(args)
        omega = parse_omega(args.omega) if hasattr(args, "omega") else None
        out = _Output(args.out)
        if args.command == "classify":
            return cmd_classify(omega, cfg, args, out)
        if args.command == "check":
            return cmd_check(omega, cfg, args, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, args, out)
        if args.command == "coextend":
            return cmd_coextend(omega, cfg, args, out)
        return cmd_extend(omega, cfg, args, out)
    except OmegaParseError as exc:
        print(f"parse error: {exc.pointer()}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except InternalMismatch as exc:
        print(f"internal mismatch: {exc}", file=sys.stderr)
        return 1
    finally:
        if out is not None:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
