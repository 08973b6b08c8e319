"""Acceptance gate: one test per criterion, each logging a single pass/fail line."""
import random
import time
from fractions import Fraction

from conftest import (DATA, brute_force_automorphisms, genus1_formula, lagrange_eval, random_relabel,
                      small_graphs)
from tauttwist.checks import delta_irr_probe, verify_genus1
from tauttwist.graphs import StableGraph, automorphism_count, canonical_key
from tauttwist.pixton import PixtonInput, enumerate_weightings, pixton_class, pixton_class_at_r
from tauttwist.relations import IRR, reduce_genus1
from tauttwist.tautcore import ClassRegistry, SymbolicClass, Term
from tauttwist.twistloci import (Signature, conjecture_gap, contribution_term, twisted_star_graphs,
                                 weighted_class_H)

BATTERY = [(1, -1), (0, 0), (2, -1, -1), (3, -1, -2)]
KS = [1, 2, 3]


def random_signature(rng, g, k, n):
    target = k * (2 * g - 2)
    head = [rng.randint(-2 * k, 2 * k + 2) for _ in range(n - 1)]
    return Signature(g, k, tuple(head) + (target - sum(head),))


def genus0_signatures():
    rng = random.Random(20240)
    return [random_signature(rng, 0, rng.randint(1, 4), rng.randint(3, 6)) for _ in range(10)]


def genus2_signatures():
    rng = random.Random(4242)
    return [random_signature(rng, 2, rng.randint(1, 3), rng.randint(1, 3)) for _ in range(20)]


def aprime_signatures():
    return [Signature(1, k, (0,) * n) for n in (1, 2, 3) for k in (2, 3)]


def test_criterion_1_genus1_anchor(criterion):
    def check():
        slowest = 0.0
        for mu in BATTERY:
            for k in KS:
                start = time.perf_counter()
                P = pixton_class(PixtonInput(1, k, mu)).cls
                slowest = max(slowest, time.perf_counter() - start)
                if P != genus1_formula(k, mu):
                    return False, f"mismatch at mu={mu} k={k}"
        return slowest < 30, f"{len(BATTERY) * len(KS)} cases, slowest {slowest:.2f}s"

    criterion(1, "genus-1 Pixton class equals the closed form exactly", check)


def test_criterion_2_interpolation(criterion):
    def check():
        fits = 0
        for mu in BATTERY:
            loop = Term.stratum(StableGraph((0,), (0,) * len(mu), ((0, 0),)))
            for k in KS:
                inp = PixtonInput(1, k, mu)
                res = pixton_class(inp)
                per_r = {r: pixton_class_at_r(inp, r) for r in res.samples + res.guard}
                for r, cls in per_r.items():
                    if cls.coefficient(loop) != Fraction(r * r - 1, 12):
                        return False, f"loop value at r={r}"
                for fit in res.fits:
                    fits += 1
                    if len(fit.polynomial) > 3:
                        return False, "degree above 2"
                    pts = [(r, per_r[r].coefficient(fit.term)) for r in res.samples]
                    if any(lagrange_eval(pts, r) != per_r[r].coefficient(fit.term) for r in res.guard):
                        return False, "guard modulus off the fit"
        return True, f"{fits} coefficient fits"

    criterion(2, "interpolation degree <= 2, guards on the fit, loop value (r^2-1)/12", check)


def test_criterion_3_genus1_verification(criterion):
    def check():
        for mu in BATTERY:
            rep = verify_genus1(mu, KS)
            if not rep.passed:
                return False, rep.to_text()
        return True, ""

    criterion(3, "genus-1 k-independence of 2^-1 P, H and D(k)", check)


def test_criterion_4_genus0(criterion):
    def check():
        sigs = genus0_signatures()
        bad = [str(s) for s in sigs if conjecture_gap(s, "A").status != "zero"]
        return not bad, ", ".join(bad) or f"{len(sigs)} signatures"

    criterion(4, "genus-0 gap vanishes", check)


def test_criterion_5_aprime_cancellation(criterion):
    def check():
        bad = [str(s) for s in aprime_signatures()
               if conjecture_gap(s, "Aprime").status not in ("zero", "reduces_to_zero")]
        return not bad, ", ".join(bad)

    criterion(5, "genus-1 A' gap reduces to zero", check)


def test_criterion_6_genus2_table(criterion):
    def check():
        sig = Signature(2, 2, (3, 1))
        rows = twisted_star_graphs(sig, nontrivial_only=True)
        shapes = [(tw.star.graph.genera[tw.star.center],
                   tuple(sorted(tw.star.graph.genera[v] for v in tw.star.outlying)), tw.star.graph.num_edges)
                  for tw in rows]
        if shapes != [(1, (1,), 1), (0, (2,), 1), (0, (1, 1), 2), (0, (1,), 2)]:
            return False, f"graphs {shapes}"
        if [tw.twist for tw in rows] != [(2,), (6,), (2, 2), (2, 2)]:
            return False, "twists"
        if [tw.coefficient for tw in rows] != [1, 3, Fraction(1, 2), 1]:
            return False, "coefficients"
        if any(len(contribution_term(tw, sig).labels) != tw.star.graph.num_vertices for tw in rows):
            return False, "labels"
        H = weighted_class_H(sig, ClassRegistry.load(DATA / "registry_genus2.json"))
        expected = SymbolicClass(2, 2, [(contribution_term(tw, sig), tw.coefficient) for tw in rows])
        return len(H) == 4 and H == expected, f"H has {len(H)} terms"

    criterion(6, "genus-2 (3,1) table: graphs, twists, coefficients, H", check)


def test_criterion_7_codimension(criterion):
    def check():
        sigs = [Signature(1, k, mu) for mu in BATTERY for k in KS]
        sigs += genus0_signatures() + aprime_signatures() + [Signature(2, 2, (3, 1))]
        sigs += genus2_signatures()
        exempt = 0
        for sig in sigs:
            for term, _ in weighted_class_H(sig):
                if term.codim == sig.g:
                    continue
                # the holomorphic k-divisible locus itself has codimension g-1
                if term.graph.is_trivial() and sig.mode == "Aprime" and term.codim == sig.g - 1:
                    exempt += 1
                    continue
                return False, f"{sig}: codim {term.codim}"
        return True, f"{len(sigs)} signatures, {exempt} trivial A' terms of codim g-1"

    criterion(7, "every term of H has codimension g", check)


def test_criterion_8_properties(criterion, tmp_path):
    def check():
        rng = random.Random(8)
        pool = small_graphs()
        for _ in range(1000):
            graph = rng.choice(pool)
            copy = random_relabel(graph, rng)
            if canonical_key(copy) != canonical_key(graph):
                return False, f"relabeling changed the key of {graph}"
        for graph in pool:
            if automorphism_count(graph) != brute_force_automorphisms(graph):
                return False, f"Aut mismatch on {graph}"
        weighted = 0
        for graph in pool:
            if not graph.n:
                continue
            mu = (1,) * (graph.n - 1) + (2 * (2 * graph.genus - 2) - (graph.n - 1),)
            inp = PixtonInput(graph.genus, 2, mu)
            for r in (2, 3, 5):
                weighted += 1
                if sum(1 for _ in enumerate_weightings(graph, inp, r)) != r ** graph.h1:
                    return False, f"weighting count on {graph}, r={r}"
        reg = ClassRegistry.load(DATA / "registry_genus2.json")
        reg.save(tmp_path / "copy.json")
        if ClassRegistry.load(tmp_path / "copy.json") != reg:
            return False, "registry round trip"
        return True, f"{len(pool)} graphs, {weighted} weighting counts"

    criterion(8, "canonical forms, automorphisms, weighting counts, registry round trip", check)


def test_criterion_9_delta_irr_probe(criterion):
    def check():
        rep = delta_irr_probe((2, -1, -1), 2)
        if not rep.passed or not rep.extra["trace"]:
            return False, rep.to_text()
        mu = (2, -1, -1)
        vec = reduce_genus1(pixton_class(PixtonInput(1, 2, mu)).cls)
        implied = sum(Fraction(m * m, 12) for m in mu) - vec[IRR]
        matches = [c for c, d in rep.extra["residual_per_candidate"].items() if not d]
        consistent = rep.extra["implied_constant"] == f"-{implied.numerator}/{implied.denominator}" == matches[0]
        return consistent, f"relations imply delta_irr constant {rep.extra['implied_constant']}"

    criterion(9, "delta_irr probe reproduces its own reduction", check)
