import itertools
import random
from pathlib import Path

import pytest

from tauttwist.graphs import StableGraph, enumerate_stable_graphs, relabel

DATA = Path(__file__).resolve().parents[1] / "data"

# (g, n, max_edges) families small enough for brute-force oracles
SMALL_FAMILIES = [(0, 4, 1), (0, 5, 2), (1, 1, 2), (1, 2, 2), (1, 3, 2), (2, 0, 3),
                  (2, 1, 2), (2, 2, 2), (3, 0, 3)]


def small_graphs(max_vertices=4, max_edges=4):
    out = []
    for fam in SMALL_FAMILIES:
        out += [g for g in enumerate_stable_graphs(*fam)
                if g.num_vertices <= max_vertices and g.num_edges <= max_edges]
    return out


def random_relabel(graph: StableGraph, rng: random.Random) -> StableGraph:
    vp = list(range(graph.num_vertices))
    ep = list(range(graph.num_edges))
    rng.shuffle(vp)
    rng.shuffle(ep)
    flips = [rng.random() < 0.5 for _ in ep]
    return relabel(graph, vp, ep, flips)


def brute_force_automorphisms(graph: StableGraph) -> int:
    """Count (vertex perm, edge perm, flips) triples fixing legs, genera and incidences."""
    nv, ne = graph.num_vertices, graph.num_edges
    count = 0
    for sigma in itertools.permutations(range(nv)):
        if any(graph.genera[sigma[v]] != graph.genera[v] for v in range(nv)):
            continue
        if any(sigma[v] != v for v in graph.legs):
            continue
        for pi in itertools.permutations(range(ne)):
            for flips in itertools.product((False, True), repeat=ne):
                ok = True
                for e, (a, b) in enumerate(graph.edges):
                    img = (sigma[a], sigma[b])
                    tgt = graph.edges[pi[e]]
                    if flips[e]:
                        tgt = tgt[::-1]
                    if img != tgt:
                        ok = False
                        break
                if ok:
                    count += 1
    return count


@pytest.fixture(scope="session")
def genus2_registry():
    from tauttwist.tautcore import ClassRegistry
    return ClassRegistry.load(DATA / "registry_genus2.json")


def genus1_formula(k, mu):
    """Closed-form genus-1 P built by hand from strata, independent of the weighting sums."""
    from fractions import Fraction

    from tauttwist.tautcore import Decoration, TautClass, Term

    n = len(mu)
    triv = StableGraph((1,), (0,) * n, ())
    terms = [(Term.stratum(triv, Decoration((1,), (0,) * n, ())), -k * k)]
    for i, m in enumerate(mu):
        psi = [0] * n
        psi[i] = 1
        terms.append((Term.stratum(triv, Decoration((0,), tuple(psi), ())), (m + k) ** 2))
    terms.append((Term.stratum(StableGraph((0,), (0,) * n, ((0, 0),))), Fraction(-1, 12)))
    for size in range(n - 1):
        for subset in itertools.combinations(range(n), size):
            legs = tuple(1 if i in subset else 0 for i in range(n))
            graph = StableGraph((0, 1), legs, ((0, 1),))
            terms.append((Term.stratum(graph), -(k - sum(mu[i] for i in subset)) ** 2))
    return TautClass(1, n, terms)


def lagrange_eval(points, x):
    """Value at x of the interpolating polynomial through points, in exact arithmetic."""
    from fractions import Fraction

    total = Fraction(0)
    for i, (xi, yi) in enumerate(points):
        term = Fraction(yi)
        for j, (xj, _) in enumerate(points):
            if j != i:
                term *= Fraction(x - xj, xi - xj)
        total += term
    return total


_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Run a criterion check, log one pass/fail line, and fail the test if it did not pass."""

    def run(number, title, check):
        try:
            ok, detail = check()
        except Exception as exc:  # a crash is a failing criterion, reported as such
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return run


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
