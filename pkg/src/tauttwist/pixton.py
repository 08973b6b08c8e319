"""Pixton's class P^{d,k}_g via mod-r weighting sums and interpolation in r.

For each modulus r the class

    sum_G sum_w r^{-h1(G)} / |Aut(G)| (xi_G)_*[ prod_v exp(-k^2 kappa_1(v))
        * prod_i exp(a_i^2 psi_i)
        * prod_{e=(h,h')} (1 - exp(-w(h) w(h') (psi_h + psi_h'))) / (psi_h + psi_h') ]

is assembled in degree d, where a_i = m_i + k and w runs over admissible
weightings mod r.  Each coefficient is a polynomial in r for r large; the
class P is its constant term.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterator, Sequence

import sympy

from .graphs import MAX_GENUS, StableGraph, automorphism_count, enumerate_stable_graphs
from .tautcore import Decoration, TautClass, Term, frac_str

MAX_DEGREE = 2

Weighting = tuple  # ((w(e,0), w(e,1)) for each edge e)


class PixtonError(ValueError):
    pass


class InterpolationError(PixtonError):
    pass


@dataclass(frozen=True)
class PixtonInput:
    g: int
    k: int
    mu: tuple[int, ...]
    d: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(int(m) for m in self.mu))
        if self.k < 1:
            raise PixtonError("k must be at least 1")
        if not 0 <= self.g <= MAX_GENUS:
            raise PixtonError(f"genus must lie in [0, {MAX_GENUS}]")
        if 2 * self.g - 2 + self.n <= 0:
            raise PixtonError(f"(g, n) = ({self.g}, {self.n}) is not stable")
        if sum(self.mu) != self.k * (2 * self.g - 2):
            raise PixtonError(f"signature {self.mu} does not sum to k(2g-2) = {self.k * (2 * self.g - 2)}")
        if not 0 <= self.degree <= MAX_DEGREE:
            raise PixtonError(f"degree must lie in [0, {MAX_DEGREE}]")

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def degree(self) -> int:
        return self.g if self.d is None else self.d

    @property
    def shifted(self) -> tuple[int, ...]:
        return tuple(m + self.k for m in self.mu)


def _vertex_target(graph: StableGraph, v: int, inp: PixtonInput) -> int:
    legs = sum(inp.shifted[i - 1] for i in graph.markings_at(v))
    return inp.k * (2 * graph.genera[v] - 2 + graph.valence(v)) - legs


def _spanning_tree(graph: StableGraph):
    """BFS order, parent edge per vertex, and the set of tree edges."""
    order = [0]
    parent: dict[int, tuple[int, int]] = {}
    tree = set()
    seen = {0}
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for e, (a, b) in enumerate(graph.edges):
            if a == b or e in tree:
                continue
            for x, y, side_y in ((a, b, 1), (b, a, 0)):
                if x == v and y not in seen:
                    seen.add(y)
                    order.append(y)
                    parent[y] = (e, side_y)
                    tree.add(e)
    return order, parent, tree


def enumerate_weightings(graph: StableGraph, inp: PixtonInput, r: int) -> Iterator[Weighting]:
    """Admissible weightings mod r: edge halves sum to 0, vertex sums hit their targets."""
    if r < 2:
        raise PixtonError("modulus must be at least 2")
    order, parent, tree = _spanning_tree(graph)
    free = [e for e in range(graph.num_edges) if e not in tree]
    targets = [_vertex_target(graph, v, inp) % r for v in range(graph.num_vertices)]
    for values in itertools.product(range(r), repeat=len(free)):
        w = [[None, None] for _ in graph.edges]
        for e, x in zip(free, values):
            w[e] = [x, (-x) % r]
        # leaves first: each non-root vertex fixes the half-edge of its parent edge
        for v in reversed(order[1:]):
            e, s = parent[v]
            total = 0
            for f, (a, b) in enumerate(graph.edges):
                if f == e:
                    continue
                if a == v:
                    total += w[f][0]
                if b == v:
                    total += w[f][1]
            w[e][s] = (targets[v] - total) % r
            w[e][1 - s] = (-w[e][s]) % r
        root_sum = sum(w[f][0] * (a == 0) + w[f][1] * (b == 0) for f, (a, b) in enumerate(graph.edges))
        if (root_sum - targets[0]) % r:
            return
        yield tuple((x, y) for x, y in w)


def _compositions_upto(total: int, parts: int):
    for t in range(total + 1):
        for c in itertools.product(range(t + 1), repeat=parts):
            if sum(c) == t:
                yield c


def _monomials(nvars: int, degree: int):
    for c in itertools.product(range(degree + 1), repeat=nvars):
        if sum(c) == degree:
            yield c


@lru_cache(maxsize=None)
def pixton_graphs(g: int, n: int, d: int) -> tuple[StableGraph, ...]:
    return tuple(enumerate_stable_graphs(g, n, d))


def _graph_contribution(graph: StableGraph, inp: PixtonInput, r: int) -> list[tuple[Term, Fraction]]:
    d = inp.degree
    ne = graph.num_edges
    budget = d - ne
    if budget < 0:
        return []
    aut = automorphism_count(graph)
    scale = Fraction(1, r ** graph.h1 * aut)
    js = list(_compositions_upto(budget, ne))
    sums = dict.fromkeys(js, 0)
    for w in enumerate_weightings(graph, inp, r):
        xs = [a * b for a, b in w]
        for j in js:
            p = 1
            for x, je in zip(xs, j):
                p *= x ** (je + 1)
            sums[j] += p

    nv, n = graph.num_vertices, graph.n
    a2 = [a * a for a in inp.shifted]
    kk = -inp.k * inp.k
    out = []
    for j, s in sums.items():
        if s == 0:
            continue
        edge_coeff = scale * s
        for je in j:
            edge_coeff *= Fraction((-1) ** je, factorial(je + 1))
        rest = budget - sum(j)
        # (psi_h + psi_h')^{j_e} split binomially per edge
        splits = [[(p, je - p, comb(je, p)) for p in range(je + 1)] for je in j]
        for mono in _monomials(nv + n, rest):
            vc = Fraction(1)
            for v in range(nv):
                vc *= Fraction(kk ** mono[v], factorial(mono[v]))
            for i in range(n):
                vc *= Fraction(a2[i] ** mono[nv + i], factorial(mono[nv + i]))
            if vc == 0:
                continue
            for choice in itertools.product(*splits):
                c = edge_coeff * vc
                for _, _, b in choice:
                    c *= b
                dec = Decoration(tuple(mono[:nv]), tuple(mono[nv:]),
                                 tuple((p, q) for p, q, _ in choice))
                out.append((Term.stratum(graph, dec), c))
    return out


def pixton_class_at_r(inp: PixtonInput, r: int) -> TautClass:
    """The degree-d class at modulus r (before taking the constant term)."""
    if r < 2:
        raise PixtonError("modulus must be at least 2")
    terms = []
    for graph in pixton_graphs(inp.g, inp.n, inp.degree):
        terms.extend(_graph_contribution(graph, inp, r))
    return TautClass(inp.g, inp.n, terms)


def default_moduli(inp: PixtonInput) -> tuple[list[int], list[int]]:
    d = inp.degree
    start = 2 * d * (max(abs(a) for a in inp.shifted) + inp.k) + 3
    samples = list(range(start, start + 2 * d + 2))
    guard = [samples[-1] + 1, samples[-1] + 2]
    return samples, guard


@dataclass
class CoefficientFit:
    term: Term
    samples: dict[int, Fraction]
    polynomial: list[Fraction]  # low degree first
    guard_residuals: dict[int, Fraction]

    @property
    def constant(self) -> Fraction:
        return self.polynomial[0] if self.polynomial else Fraction(0)

    def to_json(self):
        return {
            "term": self.term.to_json(),
            "samples": {str(r): frac_str(v) for r, v in self.samples.items()},
            "polynomial": [frac_str(c) for c in self.polynomial],
            "guard_residuals": {str(r): frac_str(v) for r, v in self.guard_residuals.items()},
            "constant_term": frac_str(self.constant),
        }


@dataclass
class PixtonResult:
    cls: TautClass
    samples: list[int]
    guard: list[int]
    degree_bound: int
    fits: list[CoefficientFit] = field(default_factory=list)

    def report_json(self):
        return {"r_samples": self.samples, "guard": self.guard, "degree_bound": self.degree_bound,
                "coefficients": [f.to_json() for f in self.fits]}


_R = sympy.Symbol("r")


def _fit(points: Sequence[tuple[int, Fraction]]) -> list[Fraction]:
    pts = [(sympy.Integer(x), sympy.Rational(y.numerator, y.denominator)) for x, y in points]
    poly = sympy.Poly(sympy.interpolate(pts, _R), _R)
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _evaluate(coeffs: Sequence[Fraction], x: int) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _at_r(args):
    inp, r = args
    return pixton_class_at_r(inp, r)


def pixton_class(inp: PixtonInput, r_samples: Sequence[int] | None = None,
                 guard: Sequence[int] | None = None, jobs: int = 1) -> PixtonResult:
    """Constant term in r of the per-r classes, with guard moduli checking the fit."""
    default_s, default_g = default_moduli(inp)
    samples = list(r_samples) if r_samples is not None else default_s
    guard = list(guard) if guard is not None else default_g
    bound = 2 * inp.degree
    if len(samples) < bound + 1:
        raise PixtonError(f"need at least {bound + 1} sample moduli, got {len(samples)}")
    if not guard:
        raise PixtonError("at least one guard modulus is required")
    if len(set(samples) | set(guard)) != len(samples) + len(guard):
        raise PixtonError("sample and guard moduli must be distinct")
    return _pixton_class(inp, tuple(samples), tuple(guard), jobs)


@lru_cache(maxsize=256)
def _pixton_class(inp: PixtonInput, samples: tuple, guard: tuple, jobs: int) -> PixtonResult:
    moduli = list(samples) + list(guard)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            classes = list(pool.map(_at_r, [(inp, r) for r in moduli]))
    else:
        classes = [pixton_class_at_r(inp, r) for r in moduli]
    per_r = dict(zip(moduli, classes))

    keys: dict[tuple, Term] = {}
    for c in classes:
        for key, term, _ in c.items():
            keys.setdefault(key, term)
    bound = 2 * inp.degree
    fits = []
    terms = []
    for key in sorted(keys, key=lambda k: (len(k[2]), k)):
        term = keys[key]
        values = {r: per_r[r].coefficient(term) for r in moduli}
        coeffs = _fit([(r, values[r]) for r in samples])
        if len(coeffs) - 1 > bound:
            raise InterpolationError(
                f"interpolation inconsistent: degree {len(coeffs) - 1} > {bound} for a coefficient")
        residuals = {r: values[r] - _evaluate(coeffs, r) for r in guard}
        if any(residuals.values()):
            raise InterpolationError(
                "interpolation inconsistent: guard modulus off the fitted polynomial "
                "(sample moduli below the polynomiality threshold?)")
        fit = CoefficientFit(term, {r: values[r] for r in samples}, coeffs, residuals)
        fits.append(fit)
        terms.append((term, fit.constant))
    return PixtonResult(TautClass(inp.g, inp.n, terms), list(samples), list(guard), bound, fits)


def pixton_P(g: int, k: int, mu: Sequence[int], d: int | None = None, jobs: int = 1) -> TautClass:
    """Shorthand for the constant-term class with default moduli."""
    return pixton_class(PixtonInput(g, k, tuple(mu), d), jobs=jobs).cls
