"""Command-line front end.

All numbers are printed as exact ``p/q`` strings.  The exit code is 0 when the
command succeeds and every asserted check passes, 1 when a verification fails,
and 2 on invalid input (with a JSON error object on stdout).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Sequence

from .checks import delta_irr_probe, genus0_check, verify_genus1
from .pixton import PixtonInput, pixton_class
from .tautcore import FUNDAMENTAL, ClassRegistry, expand, frac_str, resolve
from .twistloci import (Signature, conjecture_gap, contribution_term, recursion_expand, star_graphs,
                        twisted_star_graphs, twists, weighted_class_H)

REGISTRY_ENV = "TAUTTWIST_REGISTRY"
_VECTOR_FLAGS = ("--mu", "--k-list", "--r-samples", "--guard")


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tauttwist", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, g=True, k=True, mu=True):
        if g:
            p.add_argument("--g", type=int, required=True, help="genus")
        if k:
            p.add_argument("--k", type=int, required=True, help="power of the canonical bundle")
        if mu:
            p.add_argument("--mu", type=_ints, required=True, help="signature, e.g. 3,1")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--registry", default=os.environ.get(REGISTRY_ENV),
                       help=f"class registry JSON (default: ${REGISTRY_ENV})")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for Pixton sums")

    common(sub.add_parser("stargraphs", help="star graphs with twists and coefficients"))
    common(sub.add_parser("twists", help="twist sets per star graph"))
    p = sub.add_parser("hclass", help="weighted fundamental class H")
    common(p)
    p.add_argument("--expand", action="store_true", help="apply built-ins and the registry")
    p = sub.add_parser("pixton", help="Pixton's class via interpolation in r")
    common(p)
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--r-samples", type=_ints, default=None, help="sample moduli")
    p.add_argument("--guard", type=_ints, default=None, help="guard moduli")
    p = sub.add_parser("verify-g1", help="genus-1 k-independence checks")
    common(p, g=False, k=False)
    p.add_argument("--k-list", type=_ints, required=True)
    common(sub.add_parser("verify-g0", help="genus-0 check"), g=False)
    p = sub.add_parser("conjecture-gap", help="2^-g P minus the conjectured locus side")
    common(p)
    p.add_argument("--mode", choices=("A", "Aprime", "auto"), default="auto")
    p = sub.add_parser("recursion", help="solve for the locus class assuming the conjecture")
    common(p)
    p.add_argument("--depth", type=int, default=1)
    p = sub.add_parser("registry-validate", help="check a registry file")
    p.add_argument("--registry", default=os.environ.get(REGISTRY_ENV))
    p.add_argument("--format", choices=("json", "text"), default="json")
    p = sub.add_parser("probe", help="delta_irr normalization probe on genus 1")
    common(p, g=False)
    return parser


def _fix_negative_vectors(argv: Sequence[str]) -> list[str]:
    # "--mu -1,-1" would otherwise be parsed as an option
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VECTOR_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and nxt[1:2].isdigit():
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def _registry(args) -> ClassRegistry | None:
    return ClassRegistry.load(args.registry) if getattr(args, "registry", None) else None


def _label_text(lab) -> str:
    if lab is None:
        return "1"
    if resolve(lab) == FUNDAMENTAL:
        return f"[M_{lab.g},{lab.n}]"
    return str(lab)


def _star_row(tw, sig: Signature) -> tuple[str, str, str]:
    star = tw.star
    g = star.graph
    c = star.center

    def vertex(v):
        ws = ",".join(str(sig.mu[i - 1]) for i in g.markings_at(v))
        return f"g{g.genera[v]}" + (f"({ws})" if ws else "")

    parts = [vertex(c)]
    for v in star.outlying:
        labels = ",".join(str(tw.twist[e]) for e in star.edges_at(v))
        parts.append(f"--{labels}-- {vertex(v)}")
    graph_txt = " ".join(parts[:2]) + "".join(f"; {p}" for p in parts[2:])
    twist_txt = "(" + ",".join(map(str, tw.twist)) + ")"
    term = contribution_term(tw, sig)
    inner = " . ".join(_label_text(term.labels[v]) for v in [c] + star.outlying)
    return graph_txt, twist_txt, f"{frac_str(tw.coefficient)} (xi_G)_*[ {inner} ]"


def _stargraphs(args, sig, registry):
    rows = twisted_star_graphs(sig)
    if args.format == "json":
        return [{"graph": tw.star.graph.to_json(), "center": tw.star.center,
                 "twists": list(tw.twist), "coefficient": frac_str(tw.coefficient),
                 "labels": ["fundamental" if lab is None else lab.to_json()
                            for lab in contribution_term(tw, sig).labels]}
                for tw in rows]
    table = [_star_row(tw, sig) for tw in rows if not tw.star.is_trivial]
    w0 = max([len("Graph")] + [len(r[0]) for r in table])
    w1 = max([len("Twist")] + [len(r[1]) for r in table])
    lines = [f"Star graphs for {sig} (center vertex first, edges labeled by twist)",
             f"{'Graph':<{w0}}  {'Twist':<{w1}}  Contribution"]
    lines += [f"{a:<{w0}}  {b:<{w1}}  {c}" for a, b, c in table]
    top = next((tw for tw in rows if tw.star.is_trivial), None)
    if top is not None:
        lab = contribution_term(top, sig).labels[0]
        found = registry.lookup(lab) if registry is not None else None
        note = " (registry: empty)" if found is not None and found.is_zero() else ""
        lines.append(f"trivial graph: 1/1 {lab}{note}")
    return "\n".join(lines)


def _twists(args, sig):
    out = []
    for star in star_graphs(sig):
        out.append({"graph": star.graph.to_json(), "center": star.center,
                    "twists": [list(t) for t in twists(star, sig)]})
    if args.format == "json":
        return out
    return "\n".join(f"{star.graph}  center v{star.center}  twists {twists(star, sig)}"
                     for star in star_graphs(sig))


def _emit(obj: Any, fmt: str) -> str:
    if fmt == "text" and isinstance(obj, str):
        return obj
    return json.dumps(obj, indent=2)


def run(argv: Sequence[str]) -> tuple[int, str]:
    args = build_parser().parse_args(_fix_negative_vectors(list(argv)))
    fmt = args.format
    try:
        registry = _registry(args)
        cmd = args.command
        if cmd == "registry-validate":
            if registry is None:
                raise ValueError("no registry given (use --registry or $TAUTTWIST_REGISTRY)")
            obj = {"status": "valid", "entries": len(registry)}
            return 0, _emit(obj if fmt == "json" else f"valid registry with {len(registry)} entries", fmt)
        if cmd == "verify-g1":
            rep = verify_genus1(args.mu, args.k_list, registry)
            text = rep.to_text() + f"\nk-independence: {'pass' if rep.passed else 'fail'}"
            return (0 if rep.passed else 1), _emit(rep.to_json() if fmt == "json" else text, fmt)
        if cmd == "verify-g0":
            rep = genus0_check(args.mu, args.k)
            return (0 if rep.passed else 1), _emit(rep.to_json() if fmt == "json" else rep.to_text(), fmt)
        if cmd == "probe":
            rep = delta_irr_probe(args.mu, args.k)
            if fmt == "json":
                return (0 if rep.passed else 1), _emit(rep.to_json(), fmt)
            text = rep.to_text() + "\n  trace:\n" + "\n".join("    " + s for s in rep.extra["trace"])
            return (0 if rep.passed else 1), text

        if cmd == "pixton":
            inp = PixtonInput(args.g, args.k, args.mu, args.degree)
            res = pixton_class(inp, args.r_samples, args.guard, jobs=args.jobs)
            if fmt == "json":
                return 0, _emit({"class": res.cls.to_json(), "interpolation": res.report_json()}, fmt)
            return 0, res.cls.to_text()

        sig = Signature(args.g, args.k, args.mu)
        if cmd == "stargraphs":
            return 0, _emit(_stargraphs(args, sig, registry), fmt)
        if cmd == "twists":
            return 0, _emit(_twists(args, sig), fmt)
        if cmd == "hclass":
            H = weighted_class_H(sig, registry)
            if args.expand:
                H = expand(H, registry)
            return 0, _emit(H.to_json() if fmt == "json" else H.to_text(), fmt)
        if cmd == "conjecture-gap":
            mode = sig.mode if args.mode == "auto" else args.mode
            res = conjecture_gap(sig, mode, registry, jobs=args.jobs)
            code = 1 if res.status == "nonzero" else 0
            if fmt == "json":
                return code, _emit(res.to_json(), fmt)
            lines = [f"conjecture {mode} gap for {sig}: {res.status}", res.gap.to_text()]
            return code, "\n".join(lines)
        if cmd == "recursion":
            res = recursion_expand(sig, registry, args.depth, jobs=args.jobs)
            return 0, _emit(res.to_json() if fmt == "json" else res.to_text(), fmt)
        raise ValueError(f"unknown command {cmd}")
    except (ValueError, OSError, AssertionError) as exc:
        return 2, json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}, indent=2)


def main(argv: Sequence[str] | None = None) -> int:
    code, out = run(sys.argv[1:] if argv is None else argv)
    print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
