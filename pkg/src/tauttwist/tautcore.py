"""Exact-rational sums of decorated boundary strata.

A term is a stable graph ``G`` with a monomial decoration (kappa_1 powers on
vertices, psi powers on legs and half-edges) and a per-vertex label.  The
coefficient stored with a term multiplies ``(xi_G)_*[decoration]`` -- no
``1/|Aut(G)|`` is folded in; callers apply that convention themselves.

Labels are ``None`` (the vertex carries its fundamental class) or an
:class:`OpaqueGen`, an unexpanded locus class on the vertex moduli space whose
signature is listed in the vertex's local-point order (see ``graphs``).
"""
from __future__ import annotations

import json
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

from .graphs import StableGraph, canonize, splice, trivial_graph

KINDS = ("Hbar", "HbarPrime", "HbarVir")


class ClassError(ValueError):
    pass


class RegistryError(ClassError):
    pass


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str | int) -> Fraction:
    return Fraction(s)


# -- decorations and generators ---------------------------------------------


@dataclass(frozen=True)
class Decoration:
    kappa: tuple[int, ...]
    leg_psi: tuple[int, ...]
    halfedge_psi: tuple[tuple[int, int], ...]

    def __post_init__(self):
        flat = list(self.kappa) + list(self.leg_psi) + [x for h in self.halfedge_psi for x in h]
        if any(x < 0 for x in flat):
            raise ClassError("negative exponent in decoration")

    @classmethod
    def zero(cls, graph: StableGraph) -> "Decoration":
        return cls((0,) * graph.num_vertices, (0,) * graph.n, ((0, 0),) * graph.num_edges)

    @property
    def degree(self) -> int:
        return sum(self.kappa) + sum(self.leg_psi) + sum(a + b for a, b in self.halfedge_psi)

    def fits(self, graph: StableGraph) -> bool:
        return (len(self.kappa) == graph.num_vertices and len(self.leg_psi) == graph.n
                and len(self.halfedge_psi) == graph.num_edges)

    def to_json(self) -> dict[str, Any]:
        return {"kappa1": list(self.kappa), "leg_psi": list(self.leg_psi),
                "halfedge_psi": [list(h) for h in self.halfedge_psi]}

    @classmethod
    def from_json(cls, data) -> "Decoration":
        return cls(tuple(data["kappa1"]), tuple(data["leg_psi"]),
                   tuple(tuple(h) for h in data["halfedge_psi"]))


@dataclass(frozen=True)
class OpaqueGen:
    """Unexpanded class of a twisted-differential locus closure on M_{g, n}."""

    kind: str
    g: int
    k: int
    signature: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "signature", tuple(int(m) for m in self.signature))
        if self.kind not in KINDS:
            raise ClassError(f"unknown generator kind {self.kind!r}")
        if self.k < 1:
            raise ClassError("k must be positive")
        if sum(self.signature) != self.k * (2 * self.g - 2):
            raise ClassError(f"{self}: entries must sum to k(2g-2)")

    @property
    def n(self) -> int:
        return len(self.signature)

    @property
    def codim(self) -> int:
        # holomorphic k-divisible loci contain the codim g-1 locus of k-th powers
        if self.kind == "Hbar" and all(m >= 0 and m % self.k == 0 for m in self.signature):
            return self.g - 1
        return self.g

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "g": self.g, "k": self.k, "signature": list(self.signature)}

    @classmethod
    def from_json(cls, data) -> "OpaqueGen":
        return cls(data["kind"], data["g"], data["k"], tuple(data["signature"]))

    def __str__(self):
        tag = {"Hbar": "", "HbarPrime": "'", "HbarVir": "^vir"}[self.kind]
        return f"[Hbar^{self.k}_{self.g}({','.join(map(str, self.signature))}){tag}]"


Label = "OpaqueGen | None"


@dataclass(frozen=True)
class Term:
    graph: StableGraph
    decoration: Decoration
    labels: tuple

    def __post_init__(self):
        if not self.decoration.fits(self.graph):
            raise ClassError("decoration does not match graph")
        if len(self.labels) != self.graph.num_vertices:
            raise ClassError("one label per vertex required")
        for v, lab in enumerate(self.labels):
            if lab is not None and (lab.g != self.graph.genera[v]
                                    or lab.n != self.graph.valence(v)):
                raise ClassError(f"label {lab} does not live on vertex {v}")

    @classmethod
    def stratum(cls, graph: StableGraph, decoration: Decoration | None = None,
                labels: Sequence | None = None) -> "Term":
        return cls(graph, decoration or Decoration.zero(graph),
                   tuple(labels) if labels is not None else (None,) * graph.num_vertices)

    @property
    def codim(self) -> int:
        return (self.graph.num_edges + self.decoration.degree
                + sum(lab.codim for lab in self.labels if lab is not None))

    @property
    def opaque(self) -> bool:
        return any(lab is not None for lab in self.labels)

    def to_json(self) -> dict[str, Any]:
        return {"graph": self.graph.to_json(), "decoration": self.decoration.to_json(),
                "labels": ["fundamental" if lab is None else lab.to_json() for lab in self.labels]}

    @classmethod
    def from_json(cls, data) -> "Term":
        graph = StableGraph.from_json(data["graph"])
        dec = Decoration.from_json(data["decoration"]) if "decoration" in data else None
        labels = data.get("labels")
        if labels is not None:
            labels = [None if lab in (None, "fundamental") else OpaqueGen.from_json(lab)
                      for lab in labels]
        return cls.stratum(graph, dec, labels)


def _entries(term: Term):
    """Per-local-point label entries (0 where the vertex is unlabeled)."""
    g = term.graph
    leg_entry = [0] * g.n
    half_entry = [[0, 0] for _ in g.edges]
    for v, lab in enumerate(term.labels):
        if lab is None:
            continue
        for pt, m in zip(g.local_points(v), lab.signature):
            if pt[0] == "leg":
                leg_entry[pt[1] - 1] = m
            else:
                half_entry[pt[1]][pt[2]] = m
    return leg_entry, half_entry


@lru_cache(maxsize=None)
def canonical_term(term: Term) -> tuple[tuple, Term]:
    g = term.graph
    dec = term.decoration
    leg_entry, half_entry = _entries(term)
    vattr = [(dec.kappa[v], lab.kind, lab.k) if lab else (dec.kappa[v], "", 0)
             for v, lab in enumerate(term.labels)]
    legattr = [(dec.leg_psi[i], leg_entry[i]) for i in range(g.n)]
    hattr = [((dec.halfedge_psi[e][0], half_entry[e][0]), (dec.halfedge_psi[e][1], half_entry[e][1]))
             for e in range(g.num_edges)]
    c = canonize(g, vattr, legattr, hattr)
    new = c.graph
    new_dec = Decoration(tuple(a[0] for a in c.vattr), tuple(a[0] for a in c.legattr),
                         tuple((h0[0], h1[0]) for h0, h1 in c.hattr))
    labels = []
    for v, (_, kind, k) in enumerate(c.vattr):
        if not kind:
            labels.append(None)
            continue
        sig = []
        for pt in new.local_points(v):
            sig.append(c.legattr[pt[1] - 1][1] if pt[0] == "leg" else c.hattr[pt[1]][pt[2]][1])
        labels.append(OpaqueGen(kind, new.genera[v], k, tuple(sig)))
    return c.key, Term(new, new_dec, tuple(labels))


# -- linear combinations ----------------------------------------------------


class SymbolicClass:
    """Finite Q-linear combination of labeled decorated strata on M_{g, n}."""

    def __init__(self, g: int, n: int, terms: Iterable[tuple[Term, Any]] = ()):
        self.g = g
        self.n = n
        self._terms: dict[tuple, tuple[Term, Fraction]] = {}
        for term, coeff in terms:
            self._add(term, Fraction(coeff))

    def _accept(self, term: Term):
        if term.graph.genus != self.g or term.graph.n != self.n:
            raise ClassError(f"term on ({term.graph.genus},{term.graph.n}) added to class on ({self.g},{self.n})")

    def _add(self, term: Term, coeff: Fraction):
        if coeff == 0:
            return
        self._accept(term)
        key, canon = canonical_term(term)
        if key in self._terms:
            c = self._terms[key][1] + coeff
            if c == 0:
                del self._terms[key]
            else:
                self._terms[key] = (canon, c)
        else:
            self._terms[key] = (canon, coeff)

    # container protocol
    def __iter__(self) -> Iterator[tuple[Term, Fraction]]:
        for key in sorted(self._terms, key=lambda k: (len(k[2]), k)):
            yield self._terms[key]

    def __len__(self):
        return len(self._terms)

    def items(self) -> list[tuple[tuple, Term, Fraction]]:
        return [(k, *self._terms[k]) for k in sorted(self._terms, key=lambda k: (len(k[2]), k))]

    def coefficient(self, term: Term) -> Fraction:
        key, _ = canonical_term(term)
        entry = self._terms.get(key)
        return entry[1] if entry else Fraction(0)

    def is_zero(self) -> bool:
        return not self._terms

    def degrees(self) -> set[int]:
        return {t.codim for t, _ in self}

    def is_homogeneous(self, degree: int | None = None) -> bool:
        ds = self.degrees()
        return len(ds) <= 1 and (degree is None or not ds or ds == {degree})

    @property
    def opaque_generators(self) -> set[OpaqueGen]:
        return {lab for t, _ in self for lab in t.labels if lab is not None}

    # arithmetic
    def _result_type(self, other):
        if type(self) is TautClass and type(other) is TautClass:
            return TautClass
        return SymbolicClass

    def __add__(self, other):
        if not isinstance(other, SymbolicClass):
            return NotImplemented
        if (self.g, self.n) != (other.g, other.n):
            raise ClassError("ambient mismatch")
        cls = self._result_type(other)
        return cls(self.g, self.n, itertools.chain(self, other))

    def __neg__(self):
        return type(self)(self.g, self.n, ((t, -c) for t, c in self))

    def __sub__(self, other):
        if not isinstance(other, SymbolicClass):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        scalar = Fraction(scalar)
        return type(self)(self.g, self.n, ((t, c * scalar) for t, c in self))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SymbolicClass):
            return NotImplemented
        return (self.g, self.n) == (other.g, other.n) and self._terms == other._terms

    def __repr__(self):
        return f"{type(self).__name__}(g={self.g}, n={self.n}, terms={len(self)})"

    def to_taut(self) -> "TautClass":
        return TautClass(self.g, self.n, self)

    def to_symbolic(self) -> "SymbolicClass":
        return SymbolicClass(self.g, self.n, self)

    def relabel_markings(self, perm: Sequence[int]) -> "SymbolicClass":
        """Rename marking ``i + 1`` to ``perm[i] + 1``."""
        out = []
        for t, c in self:
            legs = [0] * self.n
            psi = [0] * self.n
            for i, v in enumerate(t.graph.legs):
                legs[perm[i]] = v
                psi[perm[i]] = t.decoration.leg_psi[i]
            g = StableGraph(t.graph.genera, tuple(legs), t.graph.edges)
            dec = Decoration(t.decoration.kappa, tuple(psi), t.decoration.halfedge_psi)
            # label signatures follow local points, which are re-sorted by marking
            labels = []
            for v, lab in enumerate(t.labels):
                if lab is None:
                    labels.append(None)
                    continue
                old_pts = t.graph.local_points(v)
                entry = {}
                for pt, m in zip(old_pts, lab.signature):
                    entry[("leg", perm[pt[1] - 1] + 1) if pt[0] == "leg" else pt] = m
                labels.append(OpaqueGen(lab.kind, lab.g, lab.k,
                                        tuple(entry[pt] for pt in g.local_points(v))))
            out.append((Term(g, dec, tuple(labels)), c))
        return type(self)(self.g, self.n, out)

    # serialization
    def to_json(self) -> dict[str, Any]:
        terms = []
        for t, c in self:
            d = t.to_json()
            terms.append({"coeff": frac_str(c), **d})
        return {"space": {"g": self.g, "n": self.n}, "terms": terms}

    @classmethod
    def from_json(cls, data) -> "SymbolicClass":
        g, n = data["space"]["g"], data["space"]["n"]
        return cls(g, n, ((Term.from_json(t), parse_frac(t["coeff"])) for t in data["terms"]))

    def to_text(self) -> str:
        if self.is_zero():
            return "0"
        return "\n".join(f"{frac_str(c):>10}  {describe_term(t)}" for t, c in self)


class TautClass(SymbolicClass):
    """A SymbolicClass whose vertices all carry fundamental classes."""

    def _accept(self, term: Term):
        super()._accept(term)
        if term.opaque:
            raise ClassError("TautClass terms cannot carry opaque labels")


def describe_term(t: Term) -> str:
    g = t.graph
    dec = t.decoration
    parts = []
    for v in range(g.num_vertices):
        bits = [f"g{g.genera[v]}"]
        ms = g.markings_at(v)
        if ms:
            bits.append("p" + ",".join(map(str, ms)))
        if dec.kappa[v]:
            bits.append(f"k1^{dec.kappa[v]}")
        if t.labels[v] is not None:
            bits.append(str(t.labels[v]))
        parts.append("v%d[%s]" % (v, " ".join(bits)))
    psis = [f"psi{i + 1}^{p}" for i, p in enumerate(dec.leg_psi) if p]
    for e, (a, b) in enumerate(dec.halfedge_psi):
        if a:
            psis.append(f"psi(e{e}.0)^{a}")
        if b:
            psis.append(f"psi(e{e}.1)^{b}")
    edges = ",".join(f"{a}-{b}" for a, b in g.edges)
    s = " ".join(parts)
    if edges:
        s += f" edges[{edges}]"
    if psis:
        s += " " + " ".join(psis)
    return s


def fundamental_class(g: int, n: int) -> TautClass:
    return TautClass(g, n, [(Term.stratum(trivial_graph(g, n)), 1)])


def stratum_class(graph: StableGraph, decoration: Decoration | None = None, coeff=1) -> TautClass:
    return TautClass(graph.genus, graph.n, [(Term.stratum(graph, decoration), coeff)])


def linear_combine(pairs: Sequence[tuple[Any, SymbolicClass]]) -> SymbolicClass:
    if not pairs:
        raise ClassError("empty combination has no ambient space")
    ambient = {(c.g, c.n) for _, c in pairs}
    if len(ambient) > 1:
        raise ClassError(f"ambient mismatch: {sorted(ambient)}")
    (g, n), = ambient
    cls = TautClass if all(type(c) is TautClass for _, c in pairs) else SymbolicClass
    return cls(g, n, ((t, Fraction(a) * c) for a, x in pairs for t, c in x))


# -- pushforward ------------------------------------------------------------


def _kappa_splits(a: int, parts: int):
    for comp in itertools.product(range(a + 1), repeat=parts):
        if sum(comp) == a:
            coeff = factorial(a)
            for c in comp:
                coeff //= factorial(c)
            yield comp, coeff


def insert_term(outer: Term, v: int, inner: Term,
                boundary_match: Sequence[int] | None = None) -> list[tuple[Term, int]]:
    """Glue ``inner`` (a term on the moduli space of vertex ``v``) into ``outer`` at ``v``.

    The label at ``v`` is discarded (``inner`` replaces it).  Decorations at
    ``v`` are pulled back: psi exponents add onto the matched legs of
    ``inner``, and kappa_1^a at ``v`` becomes (sum of inner kappa_1)^a.
    """
    sp = splice(outer.graph, v, inner.graph, boundary_match)
    od, idec = outer.decoration, inner.decoration
    pts = outer.graph.local_points(v)
    index = {pt: i for i, pt in enumerate(pts)}

    leg_psi = list(od.leg_psi)
    for i, u in enumerate(outer.graph.legs):
        if u == v:
            leg_psi[i] += idec.leg_psi[sp.point_leg[index[("leg", i + 1)]]]
    hpsi = [list(h) for h in od.halfedge_psi]
    for e, ends in enumerate(outer.graph.edges):
        for s in (0, 1):
            if ends[s] == v:
                hpsi[e][s] += idec.leg_psi[sp.point_leg[index[("half", e, s)]]]
    hpsi.extend(list(h) for h in idec.halfedge_psi)
    hpsi_t = tuple(tuple(h) for h in hpsi)

    labels = tuple(lab for u, lab in enumerate(outer.labels) if u != v) + inner.labels
    base_kappa = [k for u, k in enumerate(od.kappa) if u != v]
    out = []
    for split, mult in _kappa_splits(od.kappa[v], inner.graph.num_vertices):
        kappa = tuple(base_kappa) + tuple(a + b for a, b in zip(idec.kappa, split))
        out.append((Term(sp.graph, Decoration(kappa, tuple(leg_psi), hpsi_t), labels), mult))
    return out


def push_forward(graph: StableGraph, vertex_classes: Sequence[SymbolicClass | None],
                 decoration: Decoration | None = None) -> SymbolicClass:
    """(xi_graph)_* of the exterior product of per-vertex classes (None = fundamental)."""
    if len(vertex_classes) != graph.num_vertices:
        raise ClassError("one class per vertex required")
    for v, cls in enumerate(vertex_classes):
        if cls is not None and (cls.g, cls.n) != (graph.genera[v], graph.valence(v)):
            raise ClassError(
                f"class on ({cls.g},{cls.n}) cannot sit at vertex {v} of type "
                f"({graph.genera[v]},{graph.valence(v)})")
    result_cls = TautClass if all(c is None or type(c) is TautClass for c in vertex_classes) \
        else SymbolicClass
    current = [(Term.stratum(graph, decoration), Fraction(1))]
    # insert from the highest vertex down so lower vertex indices stay put
    for v in reversed(range(graph.num_vertices)):
        cls = vertex_classes[v]
        if cls is None:
            continue
        nxt = []
        for term, coeff in current:
            for inner, c in cls:
                for t, m in insert_term(term, v, inner):
                    nxt.append((t, coeff * c * m))
        current = nxt
    return result_cls(graph.genus, graph.n, current)


# -- registry and expansion -------------------------------------------------


@dataclass
class RegistryEntry:
    expansion: TautClass
    provenance: str


class ClassRegistry:
    """Opaque generator -> tautological expansion, with provenance notes."""

    def __init__(self, entries: dict[OpaqueGen, RegistryEntry] | None = None):
        self.entries: dict[OpaqueGen, RegistryEntry] = {}
        for gen, entry in (entries or {}).items():
            self.add(gen, entry.expansion, entry.provenance)

    def add(self, gen: OpaqueGen, expansion: SymbolicClass, provenance: str = "") -> None:
        if (expansion.g, expansion.n) != (gen.g, gen.n):
            raise RegistryError(f"{gen}: expansion lives on ({expansion.g},{expansion.n})")
        if not isinstance(expansion, TautClass):
            if expansion.opaque_generators:
                raise RegistryError(f"{gen}: expansion must be tautological")
            expansion = expansion.to_taut()
        degs = expansion.degrees()
        if degs and degs != {gen.codim}:
            raise RegistryError(f"{gen}: expansion degree {sorted(degs)} != codimension {gen.codim}")
        self.entries[gen] = RegistryEntry(expansion, provenance)

    def lookup(self, gen: OpaqueGen) -> TautClass | None:
        entry = self.entries.get(gen)
        if entry is not None:
            return entry.expansion
        for cand, entry in sorted(self.entries.items(), key=lambda kv: _gen_sort_key(kv[0])):
            if (cand.kind, cand.g, cand.k) != (gen.kind, gen.g, gen.k):
                continue
            if sorted(cand.signature) != sorted(gen.signature):
                continue
            # cand marking j+1 plays the role of gen marking perm[j]+1
            free = list(range(gen.n))
            perm = []
            for m in cand.signature:
                j = next(i for i in free if gen.signature[i] == m)
                free.remove(j)
                perm.append(j)
            return entry.expansion.relabel_markings(perm)
        return None

    def __contains__(self, gen):
        return self.lookup(gen) is not None

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, ClassRegistry):
            return NotImplemented
        return {g: (e.expansion, e.provenance) for g, e in self.entries.items()} == \
            {g: (e.expansion, e.provenance) for g, e in other.entries.items()}

    def to_json(self) -> dict[str, Any]:
        return {"entries": [
            {"key": gen.to_json(), "provenance": self.entries[gen].provenance,
             "expansion": self.entries[gen].expansion.to_json()}
            for gen in sorted(self.entries, key=_gen_sort_key)]}

    @classmethod
    def from_json(cls, data) -> "ClassRegistry":
        reg = cls()
        try:
            entries = data["entries"]
            for item in entries:
                gen = OpaqueGen.from_json(item["key"])
                expansion = TautClass.from_json(item["expansion"])
                reg.add(gen, expansion, str(item.get("provenance", "")))
        except (KeyError, TypeError) as exc:
            raise RegistryError(f"malformed registry: {exc!r}") from exc
        except ClassError as exc:
            raise RegistryError(str(exc)) from exc
        return reg

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ClassRegistry":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise RegistryError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_json(data)


def load_registry(path) -> ClassRegistry:
    return ClassRegistry.load(path)


def save_registry(registry: ClassRegistry, path) -> None:
    registry.save(path)


def _gen_sort_key(gen: OpaqueGen):
    return (gen.kind, gen.g, gen.k, gen.signature)


FUNDAMENTAL = "fundamental"
ZERO = "zero"


def resolve(gen: OpaqueGen, registry: ClassRegistry | None = None):
    """One expansion step: FUNDAMENTAL, ZERO, another OpaqueGen, a TautClass, or None."""
    if gen.kind == "Hbar" and gen.g == 0:
        return FUNDAMENTAL
    if gen.g == 1 and gen.kind == "Hbar":
        if gen.k != 1:
            # O(sum m_i p_i) = O is the same condition for every k
            return OpaqueGen("Hbar", 1, 1, gen.signature)
        if all(m == 0 for m in gen.signature):
            return FUNDAMENTAL
    if gen.g == 1 and gen.kind == "HbarPrime" and all(m == 0 for m in gen.signature):
        return ZERO
    if registry is not None:
        found = registry.lookup(gen)
        if found is not None:
            return found
    return None


def expand(cls: SymbolicClass, registry: ClassRegistry | None = None) -> SymbolicClass:
    """Replace every resolvable opaque label; unresolvable ones survive verbatim."""
    done: list[tuple[Term, Fraction]] = []
    work = list(cls)
    while work:
        term, coeff = work.pop()
        for v, lab in enumerate(term.labels):
            if lab is None:
                continue
            res = resolve(lab, registry)
            if res is None:
                continue
            if res == ZERO:
                break
            if res == FUNDAMENTAL or isinstance(res, OpaqueGen):
                labels = list(term.labels)
                labels[v] = None if res == FUNDAMENTAL else res
                work.append((Term(term.graph, term.decoration, tuple(labels)), coeff))
                break
            if res.degrees() and res.degrees() != {lab.codim}:
                raise RegistryError(f"{lab}: registry expansion has wrong codimension")
            for inner, c in res:
                for t, m in insert_term(term, v, inner):
                    work.append((t, coeff * c * m))
            break
        else:
            done.append((term, coeff))
    out = SymbolicClass(cls.g, cls.n, done)
    if not out.opaque_generators:
        return out.to_taut()
    return out
