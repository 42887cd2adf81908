"""Command-line front end.

    ksineq list-corpus
    ksineq inspect yu-oh-13
    ksineq verify-ks cabello-18
    ksineq bounds kcbs-5 --expr "P1+P2+P3+P4+P5"
    ksineq derive yu-oh-13 --expr "P1+P2+P3+P4" --kind relaxed
    ksineq quantum kcbs-5 --expr "L*P1+L*P2+L*P3+L*P4+L*P5" --lambda 1

Exit codes: 0 success, 2 input error, 3 infeasible request.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass
from fractions import Fraction

from . import corpus
from .classical import (
    BoundEnvelope,
    Restriction,
    compute_bounds,
    is_ks_set,
    max_over_assignments,
)
from .conversion import Kind, NotAKSSetError, ProvenanceError, derive, select_lambda
from .expression import (
    ExpressionError,
    as_fraction,
    format_line,
    format_rational,
    fraction_to_json,
    parse_expression,
    serialize,
)
from .quantum import (
    NotHermitianError,
    QuantumReport,
    classify,
    eigen_bounds,
    expression_operator,
    verify_violation,
    violation_region,
)
from .rayset import RaySetError, VectorsRequiredError, load_rayset, rayset_summary

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3

class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    rayset_source: str | None = None
    expression_text: str | None = None
    lambdas: tuple[Fraction, ...] = ()
    kind: Kind = Kind.RELAXED
    output_format: str = "text"
    tolerance: float | None = None

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        lambdas: tuple[Fraction, ...] = ()
        if getattr(ns, "lam", None):
            try:
                lambdas = tuple(as_fraction(x) for x in ns.lam.split(",") if x.strip())
            except (ExpressionError, ValueError) as exc:
                raise InputError(f"bad --lambda value: {exc}") from None
            if any(x <= 0 for x in lambdas):
                raise InputError("lambda must be positive")
        cfg = cls(
            command=ns.command,
            rayset_source=getattr(ns, "rayset", None),
            expression_text=getattr(ns, "expr", None),
            lambdas=lambdas,
            kind=Kind(getattr(ns, "kind", "relaxed")),
            output_format="json" if getattr(ns, "json", False) else "text",
            tolerance=getattr(ns, "tolerance", None),
        )
        if cfg.command in ("bounds", "quantum") and not cfg.expression_text:
            raise InputError(f"{cfg.command} requires --expr")
        return cfg


def _q(x: Fraction | None):
    return fraction_to_json(x) if x is not None else "infeasible"


def _envelope_text(env) -> str:
    if not env.lines:
        return "infeasible"
    parts = [format_line(c) for c in env.lines]
    return parts[0] if len(parts) == 1 else "max{" + ", ".join(parts) + "}"


def _assignment_text(a) -> str:
    return "".join(str(x) for x in a) if a is not None else "-"


def _load(cfg: RunConfig):
    return load_rayset(cfg.rayset_source, tolerance=cfg.tolerance)


def cmd_list_corpus(cfg: RunConfig) -> dict:
    return {"corpus": [{"name": k, "description": corpus.DESCRIPTIONS[k]} for k in corpus.CORPUS]}


def _text_list_corpus(doc: dict) -> str:
    return "\n".join(f"{e['name']:<12} {e['description']}" for e in doc["corpus"])


def cmd_inspect(cfg: RunConfig) -> dict:
    rs = _load(cfg)
    graph, bases = rayset_summary(rs)
    return {
        "rayset": rs.source,
        "mu": rs.mu,
        "n": rs.dim,
        "edges": len(graph.edges),
        "edge_list": [[i + 1, j + 1] for i, j in graph.sorted_edges()],
        "L": bases.L,
        "bases": bases.one_based(),
        "has_vectors": rs.has_vectors,
    }


def _text_inspect(doc: dict) -> str:
    lines = [
        f"ray set: {doc['rayset']}",
        f"mu={doc['mu']}  n={doc['n']}  edges={doc['edges']}  L={doc['L']}",
    ]
    for alpha, b in enumerate(doc["bases"], start=1):
        lines.append(f"  S{alpha} = {{" + ",".join(f"P{k}" for k in b) + "}")
    if not doc["has_vectors"]:
        lines.append("graph-only ray set (no vectors)")
    return "\n".join(lines)


def cmd_verify_ks(cfg: RunConfig) -> dict:
    rs = _load(cfg)
    graph, bases = rayset_summary(rs)
    res = is_ks_set(graph, bases)
    return {"rayset": rs.source, "L": bases.L, **res.to_json()}


def _text_verify_ks(doc: dict) -> str:
    cert = doc["certificate"]
    if doc["is_ks"]:
        return (f"KS set: yes\nno assignment obeys the KS rules "
                f"(search exhausted after {cert['nodes']} nodes)")
    return ("KS set: no\nKS-obeying assignment: "
            + _assignment_text(cert["assignment"]))


def _parse_F(cfg: RunConfig, rs, graph):
    try:
        return parse_expression(cfg.expression_text, rs.mu, graph)
    except ExpressionError as exc:
        raise InputError(f"bad expression: {exc}") from None


def cmd_bounds(cfg: RunConfig) -> dict:
    rs = _load(cfg)
    graph, bases = rayset_summary(rs)
    F = _parse_F(cfg, rs, graph)
    lam = cfg.lambdas[0] if cfg.lambdas else Fraction(0)
    report = compute_bounds(F, graph, bases, lam)
    doc = {"rayset": rs.source, "expression": serialize(F), "lambda": fraction_to_json(lam),
           **report.to_json()}
    if F.is_lambda_free and (report.f is not None or report.f_prime is not None):
        doc["lambda_interval"] = select_lambda(report.f, report.f_prime).to_json()
    return doc


def _text_bounds(doc: dict) -> str:
    def q(v):
        return "infeasible" if v == "infeasible" else format_rational(Fraction(v["num"], v["den"]))

    lines = [
        f"F  = {doc['expression']}",
        f"f  = {q(doc['f'])}   (KS-obeying max, argmax {_assignment_text(doc['argmax_ks'])})",
        f"f' = {q(doc['f_prime'])}   (KS-violating max, argmax {_assignment_text(doc['argmax_exks'])})",
    ]
    if "lambda_interval" in doc:
        up = doc["lambda_interval"]["upper"]
        lines.append("lambda interval: (0, " + (q(up) + "]" if up else "inf)"))
    return "\n".join(lines)


def _quantum_doc(report: QuantumReport, lam: Fraction) -> dict:
    return {"lambda_exact": fraction_to_json(lam), **report.to_json()}


def cmd_derive(cfg: RunConfig) -> dict:
    rs = _load(cfg)
    graph, bases = rayset_summary(rs)
    F = _parse_F(cfg, rs, graph) if cfg.expression_text else None
    try:
        d = derive(rs, F, tight=cfg.kind is Kind.TIGHT)
    except NotAKSSetError as exc:
        raise InputError(str(exc)) from None
    target = d.tight if cfg.kind is Kind.TIGHT else d.relaxed
    interval = d.relaxed.lambda_interval
    lambdas = cfg.lambdas or (interval.default_choice,)
    doc = {
        "rayset": rs.source,
        "mu": rs.mu,
        "n": rs.dim,
        "L": bases.L,
        "is_ks_set": d.is_ks,
        "F": serialize(d.F),
        "F_tilde": serialize(d.f_tilde),
        "f": _q(d.bounds.f),
        "f_prime": _q(d.bounds.f_prime),
        "lambda_interval": interval.to_json(),
        "relaxed": d.relaxed.to_json(),
        "tight": d.tight.to_json() if d.tight else None,
        "bound_at_lambda": [
            {"lambda": fraction_to_json(lam), "bound": fraction_to_json(target.bound(lam))}
            for lam in lambdas
        ],
    }
    if rs.has_vectors:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            doc["quantum"] = [_quantum_doc(verify_violation(target, rs, lam), lam)
                              for lam in lambdas]
        doc["violation_region"] = [[lo, hi if math.isfinite(hi) else None]
                                   for lo, hi in violation_region(target, rs)]
    else:
        doc["quantum"] = None
        doc["notice"] = "graph-only ray set: quantum step skipped (vectors required)"
    return doc


def _text_quantum(q: dict) -> str:
    lam = format_rational(Fraction(q["lambda_exact"]["num"], q["lambda_exact"]["den"]))
    note = "" if q["lambda_in_interval"] else "  (outside guaranteed lambda interval)"
    return (f"quantum at λ={lam}: min={q['min_value']:.10g} max={q['max_value']:.10g} "
            f"bound={q['classical_bound']:.10g} -> {q['violation']}{note}")


def _text_derive(doc: dict) -> str:
    def q(v):
        return "infeasible" if v == "infeasible" else format_rational(Fraction(v["num"], v["den"]))

    up = doc["lambda_interval"]["upper"]
    lines = [
        f"ray set: {doc['rayset']}  mu={doc['mu']}  n={doc['n']}  L={doc['L']}  "
        f"KS set: {'yes' if doc['is_ks_set'] else 'no'}",
        f"F  = {doc['F']}",
        f"F~ = {doc['F_tilde']}",
        f"f  = {q(doc['f'])}",
        f"f' = {q(doc['f_prime'])}",
        "lambda interval: (0, " + (q(up) + "]" if up else "inf)")
        + f", default {q(doc['lambda_interval']['default'])}",
        "relaxed bound: <F~> <= " + _envelope_text(BoundEnvelope.from_json(doc["relaxed"]["bound"])),
    ]
    if doc["tight"]:
        lines.append("tight bound:   <F~> <= "
                     + _envelope_text(BoundEnvelope.from_json(doc["tight"]["bound"])))
    for b in doc["bound_at_lambda"]:
        lines.append(f"bound at λ={q(b['lambda'])}: {q(b['bound'])}")
    if doc["quantum"] is None:
        lines.append(doc["notice"])
    else:
        lines += [_text_quantum(x) for x in doc["quantum"]]
        region = ", ".join(f"({lo:.6g}, {'inf' if hi is None else f'{hi:.6g}'})"
                           for lo, hi in doc["violation_region"])
        lines.append("quantum violation for λ in: " + (region or "nowhere"))
    return "\n".join(lines)


def cmd_quantum(cfg: RunConfig) -> dict:
    rs = _load(cfg)
    graph, bases = rayset_summary(rs)
    expr = _parse_F(cfg, rs, graph)
    lambdas = cfg.lambdas or (Fraction(1),)
    reports = []
    for lam in lambdas:
        eb = eigen_bounds(expression_operator(expr, rs, lam))
        classical = compute_bounds(expr, graph, bases, lam)
        # the classical bound here is the maximum over all assignments
        best = max_over_assignments(expr, graph, bases, Restriction.ALL, lam).value
        report = QuantumReport(
            float(lam), eb.max, eb.min, tuple(complex(x) for x in eb.eigvec_max),
            float(best), classify(eb.min, eb.max, float(best)),
        )
        entry = _quantum_doc(report, lam)
        entry["f"] = _q(classical.f)
        entry["f_prime"] = _q(classical.f_prime)
        reports.append(entry)
    return {"rayset": rs.source, "expression": serialize(expr), "quantum": reports}


def _text_quantum_cmd(doc: dict) -> str:
    return "\n".join([f"expression: {doc['expression']}"] + [_text_quantum(q) for q in doc["quantum"]])


HANDLERS = {
    "list-corpus": (cmd_list_corpus, _text_list_corpus),
    "inspect": (cmd_inspect, _text_inspect),
    "verify-ks": (cmd_verify_ks, _text_verify_ks),
    "bounds": (cmd_bounds, _text_bounds),
    "derive": (cmd_derive, _text_derive),
    "quantum": (cmd_quantum, _text_quantum_cmd),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksineq",
        description="Derive noncontextuality inequalities from KS inequalities on ray sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, expr=False, lam=False, kind=False):
        p.add_argument("rayset", help="corpus key or path to a ray-set JSON file")
        p.add_argument("--json", action="store_true", help="emit one JSON document")
        p.add_argument("--tolerance", type=float, help="orthogonality tolerance override")
        if expr:
            p.add_argument("--expr", help='functional, e.g. "P1+P2+P3+P4"')
        if lam:
            p.add_argument("--lambda", dest="lam", help='lambda value(s), e.g. "1/3" or "1/10,1/3"')
        if kind:
            p.add_argument("--kind", choices=[k.value for k in Kind], default="relaxed")

    p = sub.add_parser("list-corpus", help="list bundled ray sets")
    p.add_argument("--json", action="store_true")
    common(sub.add_parser("inspect", help="orthogonality graph and bases"))
    common(sub.add_parser("verify-ks", help="decide whether the ray set is a KS set"))
    common(sub.add_parser("bounds", help="f and f' for a functional"), expr=True, lam=True)
    common(sub.add_parser("derive", help="full conversion pipeline"), expr=True, lam=True, kind=True)
    common(sub.add_parser("quantum", help="eigenvalue range of a functional"), expr=True, lam=True)
    return parser


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(ns)
        compute, render = HANDLERS[cfg.command]
        doc = compute(cfg)
    except VectorsRequiredError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, RaySetError, ExpressionError, NotAKSSetError, ProvenanceError,
            NotHermitianError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if cfg.output_format == "json":
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write(render(doc) + "\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
