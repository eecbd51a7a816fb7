"""Command-line front end. Every command prints one JSON report.

Exit codes: 0 for stable/ok, 1 when a violation is found, 2 for bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction
from typing import Optional, Sequence

from . import filtstab, gitcore, orthmod, weightcones
from .errors import TensorStabError
from .exactalg import format_rat
from .io import (
    SCHEMA_VERSION,
    InputError,
    delta_to_json,
    filtration_from_json,
    filtration_to_json,
    load_form,
    load_json,
    load_model,
    parse_delta,
    step_from_json,
)
from .tensor import TensorForm

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


def _rat_list(text: str, what: str) -> list[Fraction]:
    try:
        return [Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{what}: expected comma-separated rationals, got {text!r}") from None


def _int_list(text: str, what: str) -> list[int]:
    values = _rat_list(text, what)
    if any(v.denominator != 1 for v in values):
        raise InputError(f"{what}: expected integers, got {text!r}")
    return [int(v) for v in values]


def _model_and_form(args):
    model, form, _ = load_model(args.model)
    if getattr(args, "form", None):
        form = load_form(args.form)
    if form is None:
        raise InputError("no form: pass --form or embed 'form' in the model file")
    if form.dim != model.rank:
        raise InputError(f"form dimension {form.dim} differs from sheaf rank {model.rank}")
    return model, form


def _family(args, model) -> filtstab.Family:
    coordinate, max_steps, declared, extra = True, args.max_steps, [], []
    if getattr(args, "family", None):
        data = load_json(args.family)
        coordinate = bool(data.get("coordinate", True))
        max_steps = data.get("max_steps", max_steps)
        for chain in data.get("declared", []):
            declared.append(tuple(step_from_json(s, model.rank) for s in chain))
        for f in data.get("filtrations", []):
            extra.append(filtration_from_json(f, model.rank))
    if max_steps is not None and max_steps < 1:
        raise InputError("--max-steps must be at least 1")
    return filtstab.Family(coordinate, max_steps, tuple(declared), tuple(extra))


def _certificate(cert: Optional[filtstab.Certificate]) -> Optional[dict]:
    return cert.to_json() if cert is not None else None


def _verdict_report(v: filtstab.StabilityVerdict) -> dict:
    return {
        "status": v.status.value,
        "relative_to_family": v.relative_to_family,
        "family": v.family,
        "evaluated": v.checked,
        "certificate": _certificate(v.certificate),
    }


def cmd_check(args) -> tuple[dict, int]:
    model, form = _model_and_form(args)
    family = _family(args, model)
    if args.tau is not None and args.delta is not None:
        raise InputError("give either --delta or --tau, not both")
    if args.tau is not None:
        tau = _rat_list(args.tau, "--tau")
        if len(tau) != 1:
            raise InputError("--tau takes a single rational")
        v = filtstab.slope_verdict(model, form, tau[0], family)
        report = {"mode": "slope", "tau": format_rat(tau[0])}
    else:
        if args.delta is None:
            raise InputError("check needs --delta or --tau")
        delta = parse_delta(args.delta, model.n)
        v = filtstab.search_verdict(model, form, delta, family)
        report = {"mode": "delta", "delta": delta_to_json(delta)}
    report.update(_verdict_report(v))
    return report, EXIT_VIOLATION if v.status is filtstab.Status.UNSTABLE else EXIT_OK


def cmd_threshold(args) -> tuple[dict, int]:
    model, form = _model_and_form(args)
    family = _family(args, model)
    if args.filtration:
        only = filtration_from_json(load_json(args.filtration), model.rank)
        family = filtstab.Family(coordinate=False, extra=(only,))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", filtstab.NonConstantFirstTerm)
        analysis = filtstab.threshold_analysis(model, form, family)
    entries = [
        {
            "filtration": filtration_to_json(e.filtration),
            "label": e.filtration.label,
            "mu": format_rat(e.mu),
            "first_term": str(e.first),
            "threshold": format_rat(e.threshold) if e.threshold is not None else None,
            "note": e.note,
        }
        for e in analysis.entries
    ]
    report = {
        "threshold": format_rat(analysis.value),
        "witness": analysis.witness.filtration.label if analysis.witness else None,
        "family": family.describe(model),
        "filtrations": entries,
        "warnings": list(analysis.warnings),
    }
    return report, EXIT_OK


def cmd_mu(args) -> tuple[dict, int]:
    model, form = _model_and_form(args)
    if not args.filtration:
        raise InputError("mu needs --filtration")
    data = load_json(args.filtration)
    if "certificate" in data and data["certificate"]:
        data = data["certificate"]["filtration"]
    elif "filtration" in data:
        data = data["filtration"]
    filt = filtration_from_json(data, model.rank)
    res = filtstab.filtration_mu(model, form, filt)
    report = {"filtration": filtration_to_json(filt), "label": filt.label, "mu": res.to_json()}
    code = EXIT_OK
    if args.delta is not None and args.tau is not None:
        raise InputError("give either --delta or --tau, not both")
    if args.delta is not None:
        lhs = filtstab.delta_stability_lhs(model, filt, res.mu, parse_delta(args.delta, model.n))
        report.update({"mode": "delta", "lhs": lhs.to_json(), "lhs_text": str(lhs)})
        code = EXIT_VIOLATION if lhs.sign() > 0 else EXIT_OK
    if args.tau is not None:
        tau = _rat_list(args.tau, "--tau")
        if len(tau) != 1:
            raise InputError("--tau takes a single rational")
        lhs = filtstab.slope_stability_lhs(model, filt, res.mu, tau[0])
        report.update({"mode": "slope", "lhs": format_rat(lhs), "lhs_text": format_rat(lhs)})
        code = EXIT_VIOLATION if lhs > 0 else EXIT_OK
    return report, code


def cmd_cone(args) -> tuple[dict, int]:
    ranks = _int_list(args.ranks, "--ranks")
    if args.pattern:
        gens = [tuple(_int_list(g, "--pattern")) for g in args.pattern.split(";") if g.strip()]
        pattern = filtstab.VanishingPattern.upward_closure(len(ranks), args.s, gens)
        cells = weightcones.subdivide(args.r, ranks, args.s, pattern.nonzero)
        report = {
            "r": args.r,
            "ranks": ranks,
            "s": args.s,
            "cells": [{"index": list(c.index), "rays": [list(v) for v in c.rays]} for c in cells],
        }
        return report, EXIT_OK
    rs = weightcones.edges(args.r, ranks, args.s)
    report = {
        "r": args.r,
        "ranks": ranks,
        "s": args.s,
        "rays": [list(g) for g in rs.rays],
        "weights": [list(w) for w in rs.weights],
        "A1": rs.a1,
        "candidates": [list(w) for w in weightcones.weight_candidates(args.r, ranks, args.s)],
    }
    return report, EXIT_OK


def _subgroup(args, form: TensorForm) -> gitcore.OnePS:
    if args.gamma:
        return gitcore.OnePS(tuple(_int_list(args.gamma, "--gamma")))
    if args.dims:
        weights = _rat_list(args.weights, "--weights") if args.weights else [1] * len(_int_list(args.dims, "--dims"))
        return gitcore.OnePS.from_filtration(form.dim, _int_list(args.dims, "--dims"), weights)
    raise InputError("give --gamma or --dims (with optional --weights)")


def cmd_git(args) -> tuple[dict, int]:
    form = load_form(args.form) if args.form else None
    if form is None and args.model:
        _, form, _ = load_model(args.model)
    if form is None:
        raise InputError("git needs --form (or a model with an embedded form)")
    if args.action == "mu-point":
        lam = _subgroup(args, form)
        return {"gamma": list(lam.gamma), "mu": gitcore.mu_point(form, lam)}, EXIT_OK
    if args.action == "limit":
        lam = _subgroup(args, form)
        return {"gamma": list(lam.gamma), "limit": gitcore.limit_form(form, lam).to_json()}, EXIT_OK
    if args.action == "analyze":
        if not args.dims:
            raise InputError("analyze needs --dims")
        dims = _int_list(args.dims, "--dims")
        weights = _rat_list(args.weights, "--weights") if args.weights else [Fraction(1)] * len(dims)
        a = gitcore.analyze_zero_weight_limit(form, dims, weights)
        report = {
            "gamma": list(a.subgroup.gamma),
            "limit": a.limit.to_json(),
            "det": format_rat(a.det_original),
            "det_limit": format_rat(a.det_limit),
            "support": [list(b) for b in a.blocks["support"]],
            "facts": a.facts,
        }
        return report, EXIT_OK if a.all_hold else EXIT_VIOLATION
    raise InputError(f"unknown git action {args.action!r}")


def _orth_model(args) -> orthmod.OrthSheafModel:
    if args.action == "example" or not args.model:
        return orthmod.p2_example()
    return orthmod.from_document(load_json(args.model))


def cmd_orth(args) -> tuple[dict, int]:
    model = _orth_model(args)
    val = orthmod.validate(model)
    base = {
        "kind": model.kind.value,
        "det": format_rat(val.det) if val.det is not None else None,
        "valid": val.ok,
        "failures": [{"axiom": a, "reason": r} for a, r in val.failures],
    }
    if args.action == "perp":
        if not args.subspace:
            raise InputError("perp needs --subspace (1-based coordinates)")
        idx = _int_list(args.subspace, "--subspace")
        if any(i < 1 or i > model.rank for i in idx):
            raise InputError(f"--subspace indices must lie in 1..{model.rank}")
        F = orthmod.Coordinate(i - 1 for i in idx)
        basis = orthmod.perp(model.Q, F)
        span = orthmod.coordinate_span(basis)
        base.update(
            {
                "subspace": idx,
                "isotropic": orthmod.is_isotropic(model.Q, F),
                "perp": [[format_rat(x) for x in v] for v in basis],
                "perp_rank": len(basis),
                "perp_coordinate": sorted(i + 1 for i in span) if span is not None else None,
            }
        )
        return base, EXIT_OK
    if not val.ok:
        if val.failed() == ["OS4"] and not model.Q.is_zero():
            cert = orthmod.degeneracy_certificate(model, args.tau or 1)
            base["degeneracy_certificate"] = {
                "kernel": [[format_rat(x) for x in v] for v in cert.kernel],
                "filtration": filtration_to_json(cert.filtration),
                "mu": format_rat(cert.mu),
                "kernel_degree": format_rat(cert.kernel_degree),
                "slope_lhs": format_rat(cert.slope_lhs),
            }
        return base, EXIT_VIOLATION
    mode = orthmod.Mode.SLOPE if args.mode == "slope" else orthmod.Mode.GIESEKER
    family = orthmod.coordinate_isotropic_family(model)
    verdict = orthmod.orth_stability(model, mode, family)
    bridges = []
    for datum in family:
        b = orthmod.isotropic_bridge(model, datum)
        bridges.append(
            {
                "F": datum.F.label,
                "perp": datum.perp.label,
                "mu": format_rat(b.mu),
                "filtration_side": str(b.filtration_side),
                "isotropic_side": str(b.isotropic_side),
                "holds": b.holds,
            }
        )
    cert = verdict.certificate
    base.update(
        {
            "mode": mode.value,
            "status": verdict.status.value,
            "relative_to_family": verdict.relative_to_family,
            "isotropic_family": [d.F.label for d in family],
            "certificate": None
            if cert is None
            else {"F": cert.datum.F.label, "perp": cert.datum.perp.label, "value": str(cert.value)},
            "bridge": bridges,
        }
    )
    return base, EXIT_VIOLATION if verdict.status is filtstab.Status.UNSTABLE else EXIT_OK


def cmd_sequiv(args) -> tuple[dict, int]:
    model, form = _model_and_form(args)
    if args.delta is None:
        raise InputError("sequiv needs --delta")
    delta = parse_delta(args.delta, model.n)
    res = gitcore.s_equiv_representative(form, delta, model, _family(args, model))
    report = {
        "delta": delta_to_json(delta),
        "start_stabilizer": res.start_stabilizer,
        "steps": [
            {"filtration": s.filtration, "weights": [format_rat(w) for w in s.weights], "stabilizer": s.stabilizer}
            for s in res.steps
        ],
        "form": res.form.to_json(),
    }
    return report, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tensorstab", description="Exact stability checks for tensors on split sheaves over P1 and P2.")
    sub = parser.add_subparsers(dest="command", required=True)

    def sheaf_args(p, delta=True):
        p.add_argument("--model", required=True, help="model JSON file, or builtin:p2")
        p.add_argument("--form", help="form JSON file (overrides a form embedded in the model)")
        p.add_argument("--max-steps", type=int, dest="max_steps", help="longest coordinate chain to search")
        p.add_argument("--family", help="JSON file with declared chains and explicit filtrations")
        if delta:
            p.add_argument("--delta", help="delta coefficients, highest degree first, e.g. 0,3/2")
            p.add_argument("--tau", help="slope parameter (slope mode)")

    p = sub.add_parser("check", help="stability verdict over the filtration family")
    sheaf_args(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("threshold", help="delta_2 threshold on P2 with delta_1 = 0")
    sheaf_args(p, delta=False)
    p.add_argument("--filtration", help="restrict to this single filtration")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("mu", help="mu-weight (and LHS) of one weighted filtration")
    sheaf_args(p)
    p.add_argument("--filtration", help="filtration JSON, or a report holding a certificate")
    p.set_defaults(func=cmd_mu)

    p = sub.add_parser("cone", help="edge rays of the weight-cone subdivision")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--ranks", required=True, help="comma-separated ranks")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--pattern", help="generators of a vanishing pattern, e.g. '1,3;2,2'")
    p.set_defaults(func=cmd_cone)

    p = sub.add_parser("git", help="weights and limits of a form under a one-parameter subgroup")
    p.add_argument("action", choices=["mu-point", "limit", "analyze"])
    p.add_argument("--form")
    p.add_argument("--model")
    p.add_argument("--gamma", help="subgroup weights, nondecreasing, summing to 0")
    p.add_argument("--dims", help="filtration dimensions (leading coordinate spans)")
    p.add_argument("--weights", help="filtration weights")
    p.set_defaults(func=cmd_git)

    p = sub.add_parser("orth", help="orthogonal/symplectic sheaf checks")
    p.add_argument("action", choices=["check", "perp", "example"])
    p.add_argument("--model", help="model JSON with an embedded form")
    p.add_argument("--subspace", help="1-based coordinates of F for perp")
    p.add_argument("--mode", choices=["gieseker", "slope"], default="gieseker")
    p.add_argument("--tau", type=Fraction, help="tau for the degeneracy certificate")
    p.set_defaults(func=cmd_orth)

    p = sub.add_parser("sequiv", help="S-equivalence representative of a strictly semistable form")
    sheaf_args(p)
    p.set_defaults(func=cmd_sequiv)
    return parser


_NUMERIC_OPTIONS = {"--gamma", "--delta", "--tau", "--weights"}


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--gamma -1,1`` into ``--gamma=-1,1`` so argparse does not read the value as a flag."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if a in _NUMERIC_OPTIONS and nxt is not None and nxt[:1] == "-" and nxt[1:2].isdigit():
            out.append(f"{a}={nxt}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(argv if argv is not None else sys.argv[1:])
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_negative_values(argv))
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        report, code = args.func(args)
    except (TensorStabError, ValueError, ZeroDivisionError) as exc:
        err = {"schema": SCHEMA_VERSION, "command": args.command, "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err, indent=2), file=out)
        return EXIT_INPUT
    report = {"schema": SCHEMA_VERSION, "command": args.command, "argv": argv, **report}
    print(json.dumps(report, indent=2), file=out)
    return code


def main() -> None:
    sys.exit(run())
