"""Star graphs, twists, and the weighted fundamental class of twisted k-differentials.

A star graph has one center vertex; every edge joins the center to an
outlying vertex of genus >= 1, and markings on outlying vertices carry
nonnegative weights divisible by k.  A twist assigns each edge a positive
multiple of k subject to one balancing equation per vertex.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any

from .graphs import StableGraph, automorphism_count, canonize, enumerate_stable_graphs
from .pixton import PixtonInput, pixton_class
from .tautcore import (ClassRegistry, OpaqueGen, SymbolicClass, TautClass, Term, expand,
                       frac_str, insert_term)


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    g: int
    k: int
    mu: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(int(m) for m in self.mu))
        if self.k < 1:
            raise SignatureError("k must be at least 1")
        if self.g < 0:
            raise SignatureError("genus must be nonnegative")
        if self.n < 1:
            raise SignatureError("at least one marking is required")
        if 2 * self.g - 2 + self.n <= 0:
            raise SignatureError(f"(g, n) = ({self.g}, {self.n}) is not stable")
        if sum(self.mu) != self.k * (2 * self.g - 2):
            raise SignatureError(
                f"entries of {self.mu} sum to {sum(self.mu)}, expected k(2g-2) = {self.k * (2 * self.g - 2)}")

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def is_holomorphic(self) -> bool:
        return all(m >= 0 for m in self.mu)

    @property
    def is_k_divisible(self) -> bool:
        return all(m % self.k == 0 for m in self.mu)

    @property
    def mode(self) -> str:
        """'Aprime' when mu = k * mu' with mu' nonnegative, else 'A'."""
        return "Aprime" if self.is_holomorphic and self.is_k_divisible else "A"

    @property
    def mu_prime(self) -> tuple[int, ...]:
        if self.mode != "Aprime":
            raise SignatureError(f"{self.mu} is not k times a nonnegative vector")
        return tuple(m // self.k for m in self.mu)

    def __str__(self):
        return f"g={self.g} k={self.k} mu=({','.join(map(str, self.mu))})"


@dataclass(frozen=True)
class StarGraph:
    graph: StableGraph
    center: int

    @property
    def outlying(self) -> list[int]:
        return [v for v in range(self.graph.num_vertices) if v != self.center]

    @property
    def is_trivial(self) -> bool:
        return self.graph.is_trivial()

    def edges_at(self, v: int) -> list[int]:
        return [e for e, (a, b) in enumerate(self.graph.edges) if v in (a, b)]

    def to_json(self) -> dict[str, Any]:
        return {"graph": self.graph.to_json(), "center": self.center}


@dataclass(frozen=True)
class TwistedStarGraph:
    star: StarGraph
    twist: tuple[int, ...]
    k: int

    @property
    def coefficient(self) -> Fraction:
        num = 1
        for x in self.twist:
            num *= x
        return Fraction(num, automorphism_count(self.star.graph) * self.k ** len(self.star.outlying))


def satisfies_star_conditions(star: StarGraph, sig: Signature) -> bool:
    """Conditions (a)-(c) plus genus >= 1 on outlying vertices."""
    g, c = star.graph, star.center
    for a, b in g.edges:
        if (a == c) == (b == c):  # self-loop anywhere, or an edge missing the center
            return False
    for v in star.outlying:
        if g.genera[v] < 1:
            return False
    for i, v in enumerate(g.legs):
        if v != c and (sig.mu[i] < 0 or sig.mu[i] % sig.k):
            return False
    return True


def _positive_compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _positive_compositions(total - first, parts - 1):
            yield (first,) + rest


def twists(star: StarGraph, sig: Signature) -> list[tuple[int, ...]]:
    """All twists, each as a tuple of I(e) over the edges of ``star.graph``."""
    g, k = star.graph, sig.k
    per_vertex = []
    for v in star.outlying:
        es = star.edges_at(v)
        m_v = sum(sig.mu[i - 1] for i in g.markings_at(v))
        # k(2g(v) - 2) + sum(k - I(e)) = m_v fixes the twist total at v
        total = k * (2 * g.genera[v] - 2) + k * len(es) - m_v
        if total <= 0 or total % k:
            return []
        per_vertex.append([(es, comp) for comp in _positive_compositions(total // k, len(es))])
    out = []
    for choice in itertools.product(*per_vertex):
        twist = [0] * g.num_edges
        for es, comp in choice:
            for e, q in zip(es, comp):
                twist[e] = k * q
        if _check_twist(star, sig, twist):
            out.append(tuple(twist))
    return sorted(out)


def _check_twist(star: StarGraph, sig: Signature, twist) -> bool:
    g, k = star.graph, sig.k
    for v in range(g.num_vertices):
        m_v = sum(sig.mu[i - 1] for i in g.markings_at(v))
        sign = 1 if v == star.center else -1
        lhs = k * (2 * g.genera[v] - 2) + sum(sign * twist[e] + k for e in star.edges_at(v))
        if lhs != m_v:
            return False
    return all(x > 0 and x % k == 0 for x in twist)


def _star_sort_key(star: StarGraph, key):
    g = star.graph
    return (g.num_edges, -g.genera[star.center], -g.num_vertices, key)


@lru_cache(maxsize=None)
def _star_graphs(sig: Signature) -> tuple[StarGraph, ...]:
    found = {}
    for graph in enumerate_stable_graphs(sig.g, sig.n, sig.g):
        for c in range(graph.num_vertices):
            star = StarGraph(graph, c)
            if not satisfies_star_conditions(star, sig) or not twists(star, sig):
                continue
            canon = canonize(graph, [int(v == c) for v in range(graph.num_vertices)])
            found.setdefault(canon.key, StarGraph(canon.graph, canon.vattr.index(1)))
    return tuple(found[key] for key in sorted(found, key=lambda k: _star_sort_key(found[k], k)))


def star_graphs(sig: Signature) -> list[StarGraph]:
    """Star graphs admitting at least one twist; the trivial graph comes first."""
    return list(_star_graphs(sig))


def center_label(star: StarGraph, twist, sig: Signature) -> OpaqueGen:
    g, c = star.graph, star.center
    entries = []
    for pt in g.local_points(c):
        entries.append(sig.mu[pt[1] - 1] if pt[0] == "leg" else -twist[pt[1]] - sig.k)
    return OpaqueGen("Hbar", g.genera[c], sig.k, tuple(entries))


def outlying_label(star: StarGraph, v: int, twist, sig: Signature) -> OpaqueGen:
    g, k = star.graph, sig.k
    entries = []
    for pt in g.local_points(v):
        x = sig.mu[pt[1] - 1] if pt[0] == "leg" else twist[pt[1]] - k
        if x % k:
            raise AssertionError(f"outlying entry {x} not divisible by k={k}")
        entries.append(x // k)
    return OpaqueGen("Hbar", g.genera[v], 1, tuple(entries))


def contribution_term(tw: TwistedStarGraph, sig: Signature) -> Term:
    """The labeled stratum of one (graph, twist) pair, in the star graph's own vertex order."""
    star = tw.star
    labels = [None] * star.graph.num_vertices
    labels[star.center] = center_label(star, tw.twist, sig)
    for v in star.outlying:
        labels[v] = outlying_label(star, v, tw.twist, sig)
    return Term.stratum(star.graph, None, labels)


def contribution(tw: TwistedStarGraph, sig: Signature) -> SymbolicClass:
    return SymbolicClass(sig.g, sig.n, [(contribution_term(tw, sig), tw.coefficient)])


def twisted_star_graphs(sig: Signature, nontrivial_only: bool = False) -> list[TwistedStarGraph]:
    out = []
    for star in star_graphs(sig):
        if nontrivial_only and star.is_trivial:
            continue
        out.extend(TwistedStarGraph(star, t, sig.k) for t in twists(star, sig))
    return out


def _check_codim(cls: SymbolicClass, g: int, allow_trivial: int | None = None):
    for term, _ in cls:
        target = allow_trivial if term.graph.is_trivial() and allow_trivial is not None else g
        if term.codim != target:
            raise AssertionError(f"term of codimension {term.codim}, expected {target}")


def nontrivial_contributions(sig: Signature) -> SymbolicClass:
    parts = [contribution(tw, sig) for tw in twisted_star_graphs(sig, nontrivial_only=True)]
    out = SymbolicClass(sig.g, sig.n)
    for p in parts:
        out = out + p
    _check_codim(out, sig.g)
    return out


def weighted_class_H(sig: Signature, registry: ClassRegistry | None = None) -> SymbolicClass:
    """The weighted sum over star graphs and twists, opaque labels left unexpanded.

    The trivial graph contributes its locus class with coefficient 1, unless the
    registry records that locus as empty.
    """
    top = OpaqueGen("Hbar", sig.g, sig.k, sig.mu)
    out = nontrivial_contributions(sig)
    empty = registry is not None and (found := registry.lookup(top)) is not None and found.is_zero()
    if not empty:
        trivial = StableGraph((sig.g,), (0,) * sig.n, ())
        out = out + SymbolicClass(sig.g, sig.n, [(Term.stratum(trivial, None, [top]), 1)])
    # the trivial term has the locus codimension: g, or g-1 when mu = k mu' holomorphic
    _check_codim(out, sig.g, allow_trivial=top.codim)
    return out


def half_pixton(sig: Signature, jobs: int = 1) -> TautClass:
    """2^{-g} P^{g,k}_{g,mu} with default interpolation moduli."""
    P = pixton_class(PixtonInput(sig.g, sig.k, sig.mu), jobs=jobs).cls
    return P * Fraction(1, 2 ** sig.g)


def virtual_class(g: int, mu_prime, jobs: int = 1) -> SymbolicClass:
    """Virtual class of the holomorphic k=1 locus: 2^{-g} P^{g,1} minus nontrivial contributions."""
    if g < 1:
        raise SignatureError("no nonnegative vector sums to 2g-2 < 0; the virtual class needs g >= 1")
    sig = Signature(g, 1, tuple(mu_prime))
    if not sig.is_holomorphic:
        raise SignatureError("virtual class needs a nonnegative signature")
    out = half_pixton(sig, jobs).to_symbolic() - nontrivial_contributions(sig)
    _check_codim(out, g)
    return out


@dataclass
class GapResult:
    signature: Signature
    mode: str
    gap: SymbolicClass
    p_side: TautClass
    h_side: SymbolicClass
    status: str  # zero | reduces_to_zero | nonzero | unresolved | symbolic
    difference: dict | None = None
    residual: SymbolicClass | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return self.status in ("zero", "reduces_to_zero")

    def to_json(self) -> dict[str, Any]:
        out = {
            "signature": {"g": self.signature.g, "k": self.signature.k, "mu": list(self.signature.mu)},
            "mode": self.mode,
            "status": self.status,
            "gap": self.gap.to_json(),
            "certificate": {"p_side": self.p_side.to_json(), "h_side": self.h_side.to_json()},
            "notes": self.notes,
        }
        if self.difference is not None:
            out["difference"] = {k: frac_str(v) for k, v in self.difference.items()}
        if self.residual is not None:
            out["residual_opaque"] = self.residual.to_json()
        return out


def conjecture_gap(sig: Signature, mode: str, registry: ClassRegistry | None = None,
                   jobs: int = 1) -> GapResult:
    """2^{-g}P minus the conjectured locus side, expanded through the registry."""
    from .relations import reduce_symbolic

    if mode not in ("A", "Aprime"):
        raise SignatureError(f"unknown mode {mode!r}")
    if mode != sig.mode:
        raise SignatureError(f"signature {sig} requires mode {sig.mode}, not {mode}")
    p_side = half_pixton(sig, jobs)
    if mode == "A":
        h_side = weighted_class_H(sig, registry)
    else:
        vir = virtual_class(sig.g, sig.mu_prime, jobs)
        prime = SymbolicClass(sig.g, sig.n, [(Term.stratum(
            StableGraph((sig.g,), (0,) * sig.n, ()), None,
            [OpaqueGen("HbarPrime", sig.g, sig.k, sig.mu)]), 1)])
        h_side = vir + prime + nontrivial_contributions(sig)
    h_side = expand(h_side, registry)
    gap = expand(p_side.to_symbolic() - h_side, registry)
    _check_codim(gap, sig.g)

    result = GapResult(sig, mode, gap, p_side, h_side, "nonzero")
    if gap.is_zero():
        result.status = "zero"
    elif sig.g == 1:
        vector, residual = reduce_symbolic(gap)
        result.difference = {name: c for name, c in vector.items() if c}
        result.residual = residual if not residual.is_zero() else None
        if result.residual is not None:
            # the locus class itself is unknown here, so nothing is refuted
            result.status = "unresolved"
        elif not result.difference:
            result.status = "reduces_to_zero"
    elif sig.g >= 2:
        result.status = "symbolic"
        result.notes.append("genus >= 2: no relation set implemented; both sides emitted as certificate")
    return result


def recursion_expand(sig: Signature, registry: ClassRegistry | None = None, depth: int = 1,
                     jobs: int = 1) -> SymbolicClass:
    """Solve H = 2^{-g}P for the trivial-graph locus class, assuming the conjecture.

    Inner center classes of lower genus are expanded recursively up to ``depth``
    levels; k=1 outlying classes come from the built-ins or the registry.
    """
    if sig.mode != "A":
        raise SignatureError(f"recursion needs a mode-A signature, got {sig}")
    if depth <= 0:
        trivial = StableGraph((sig.g,), (0,) * sig.n, ())
        top = OpaqueGen("Hbar", sig.g, sig.k, sig.mu)
        return SymbolicClass(sig.g, sig.n, [(Term.stratum(trivial, None, [top]), 1)])

    pieces = []
    for tw in twisted_star_graphs(sig, nontrivial_only=True):
        term = contribution_term(tw, sig)
        lab = term.labels[tw.star.center]
        if lab.g == 0:
            pieces.append((term, tw.coefficient))
            continue
        inner = recursion_expand(Signature(lab.g, lab.k, lab.signature), registry, depth - 1, jobs)
        for inner_term, c in inner:
            for t, m in insert_term(term, tw.star.center, inner_term):
                pieces.append((t, tw.coefficient * c * m))
    result = half_pixton(sig, jobs).to_symbolic() - SymbolicClass(sig.g, sig.n, pieces)
    return expand(result, registry)
