"""``phaselab`` command line.

Exit codes: 0 success, 1 a check found a counterexample, 2 input or usage
error, 3 budget exceeded. Data goes to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .catalogue import CatalogueSpec, catalogue, enumerate_phases, raw_count
from .dsl import dumps_report, load_phase, render_phase
from .equivalence import morita_profile
from .errors import BudgetExceeded, PhaseError
from .filtration import analysis_report
from .morphism import enumerate_homs, find_isomorphism
from .quotient import boundary_congruence, collapse_congruence, completion, quotient_phase
from .twocat import OrderedPhase, check_two_category_laws
from .verifier import THEOREMS, rigidity_pair_sweep, run_check, search_counterexamples

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


def _emit(obj, out):
    out.write(dumps_report(obj) if not isinstance(obj, str) else obj)


def _write_phase(p, path: Optional[str], out):
    text = render_phase(p)
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        out.write(text)


def _quotient_report(p, c, q) -> dict:
    return {"source": p.digest, "partition": c.named_classes(p), "result": q.digest,
            "n": q.n, "defect": dict(zip(q.elements, q.defect))}


def cmd_validate(args, out):
    p = load_phase(args.file)
    _emit({"name": p.name, "digest": p.digest, "valid": True}, out)


def cmd_analyze(args, out):
    _emit(analysis_report(load_phase(args.file)), out)


def cmd_hom(args, out):
    p, q = load_phase(args.source), load_phase(args.target)
    homs = enumerate_homs(p, q, args.mode, budget=args.budget)
    if args.list:
        _emit([h.as_dict() for h in homs], out)
    else:
        out.write(f"{len(homs)}\n")


def cmd_iso(args, out):
    p, q = load_phase(args.source), load_phase(args.target)
    f = find_isomorphism(p, q)
    _emit({"isomorphic": f is not None, "map": f.as_dict() if f else None}, out)


def _quotient_cmd(p, c, name, args, out):
    q = quotient_phase(p, c, name=name)
    if args.output:
        _write_phase(q, args.output, out)
        _emit(_quotient_report(p, c, q), out)
    else:
        _write_phase(q, None, out)


def cmd_boundary(args, out):
    p = load_phase(args.file)
    _quotient_cmd(p, boundary_congruence(p), f"{p.name}_bd", args, out)


def cmd_collapse(args, out):
    p = load_phase(args.file)
    _quotient_cmd(p, collapse_congruence(p, args.depth), f"{p.name}_c{args.depth}", args, out)


def cmd_complete(args, out):
    res = completion(load_phase(args.file))
    if args.output:
        _write_phase(res.completed, args.output, out)
        _emit(res.to_json(), out)
    else:
        _write_phase(res.completed, None, out)


def cmd_profile(args, out):
    _emit(morita_profile(load_phase(args.file), args.max_size).to_json(), out)


def cmd_twocat(args, out):
    ordered = [OrderedPhase.of(load_phase(f)) for f in args.files]
    report = check_two_category_laws(ordered)
    _emit(report.to_json(), out)
    return EXIT_OK if report.ok else EXIT_COUNTEREXAMPLE


def cmd_enumerate(args, out):
    spec = CatalogueSpec(args.size, max_defect=args.max_defect)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for p in enumerate_phases(spec):
        (outdir / f"{p.name}.phase").write_text(render_phase(p), encoding="utf-8")
        entries.append({"file": f"{p.name}.phase", "digest": p.digest})
    manifest = {"size": args.size, "max_defect": args.max_defect, "count": len(entries),
                "raw_count": raw_count(spec), "phases": entries}
    (outdir / "manifest.json").write_text(dumps_report(manifest), encoding="utf-8")
    _emit({k: v for k, v in manifest.items() if k != "phases"}, out)


def cmd_check(args, out):
    phases = [load_phase(f) for f in args.files]
    t = THEOREMS.get(args.theorem.upper())
    if t is not None and t.arity == 1:
        groups = [[p] for p in phases]
    elif t is not None and t.arity == 2:
        groups = [[p, p] for p in phases] if len(phases) == 1 else [[p, q] for p in phases for q in phases if p is not q]
    else:
        groups = [phases]
    status = EXIT_OK
    for ps in groups:
        v = run_check(args.theorem, ps, args.gate)
        out.write(v.dumps())
        if v.outcome == "counterexample":
            status = EXIT_COUNTEREXAMPLE
    return status


def cmd_mine(args, out):
    seed = args.seed if args.seed is not None else args.global_seed
    if args.theorem.upper() == "RIGIDITY" and args.sample is None:
        report = rigidity_pair_sweep(catalogue(args.size), args.gate or "SEP")
    else:
        report = search_counterexamples(args.theorem, max_size=args.size, sample=args.sample or 30,
                                        seed=seed or 0, battery_max_size=args.battery,
                                        workers=args.workers, gate=args.gate)
    _emit(report.to_json(), out)
    return EXIT_COUNTEREXAMPLE if report.summary["counterexample"] else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaselab", description="Finite-model workbench for graded algebras.")
    parser.add_argument("--seed", dest="global_seed", type=int, default=None, help="seed for randomised steps")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="parse and validate a .phase file")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("analyze", help="stratification, control depths and invariants as JSON")
    s.add_argument("file")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("hom", help="count or list morphisms")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--mode", choices=("lax", "strict"), default="strict")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--count", action="store_true", help="print the number of morphisms (default)")
    g.add_argument("--list", action="store_true", help="print every morphism as JSON")
    s.add_argument("--budget", type=int, default=None, help="search node budget")
    s.set_defaults(func=cmd_hom)

    s = sub.add_parser("iso", help="find a strict isomorphism")
    s.add_argument("source")
    s.add_argument("target")
    s.set_defaults(func=cmd_iso)

    for name, func, helptext in (("boundary", cmd_boundary, "quotient by the rigid core"),
                                 ("complete", cmd_complete, "quotient by a maximal admissible congruence")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("file")
        s.add_argument("-o", "--output", help="write the resulting phase here and print a JSON report")
        s.set_defaults(func=func)

    s = sub.add_parser("collapse", help="quotient collapsing the stratum P^(i)")
    s.add_argument("file")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_collapse)

    s = sub.add_parser("profile", help="hom-count profile over the probe battery")
    s.add_argument("file")
    s.add_argument("--max-size", type=int, default=3)
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("twocat-check", help="2-category law check over ordered phases")
    s.add_argument("files", nargs="+")
    s.set_defaults(func=cmd_twocat)

    s = sub.add_parser("enumerate", help="write the catalogue of one carrier size")
    s.add_argument("--size", type=int, required=True)
    s.add_argument("--max-defect", type=int, default=2)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("check", help="run one theorem check")
    s.add_argument("--theorem", required=True, help=", ".join(THEOREMS))
    s.add_argument("--gate", choices=("SEP", "GEN", "NONE"), default=None)
    s.add_argument("files", nargs="+")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("mine", help="counterexample search over the catalogue")
    s.add_argument("--theorem", required=True)
    s.add_argument("--size", type=int, default=3)
    s.add_argument("--battery", type=int, default=3)
    s.add_argument("--sample", type=int, default=None, help="phases sampled at the top size for pairwise sweeps")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--gate", choices=("SEP", "GEN", "NONE"), default=None)
    s.set_defaults(func=cmd_mine)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INPUT
    try:
        status = args.func(args, out)
    except BudgetExceeded as exc:
        err.write(f"{exc}\n")
        return EXIT_BUDGET
    except PhaseError as exc:
        err.write(f"{exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        err.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_INPUT
    return status or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
