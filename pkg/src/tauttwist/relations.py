"""Reduction of genus-1 divisor classes modulo two relation families.

On M_{1,n}, with delta_irr = 1/2 (xi)_*[M_{0,n+2}] and delta_I the separating
divisor whose genus-1 side carries the markings in I (|I| <= n-2):

    kappa_1 = sum_i psi_i - sum_I delta_I
    psi_i   = 1/12 delta_irr + sum_{I not containing i} delta_I

Reduction substitutes these into a degree-1 class and returns its coordinates
on {delta_irr} and {delta_I}.  Equality is only asserted modulo these relations.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

from .graphs import StableGraph
from .tautcore import ClassError, SymbolicClass, TautClass, Term

IRR = "delta_irr"


class ReductionError(ClassError):
    pass


def delta_name(subset) -> str:
    return "delta_{" + ",".join(map(str, sorted(subset))) + "}"


class Genus1Basis:
    """Reduction targets on M_{1,n}: delta_irr, then delta_I by |I| and lexicographically."""

    def __init__(self, n: int):
        if n < 1:
            raise ReductionError("genus 1 needs at least one marking")
        self.n = n
        self.subsets = [frozenset(c) for size in range(n - 1)
                        for c in itertools.combinations(range(1, n + 1), size)]
        self.labels = [IRR] + [delta_name(s) for s in self.subsets]

    def zero(self) -> dict[str, Fraction]:
        return dict.fromkeys(self.labels, Fraction(0))

    def delta_graph(self, subset) -> StableGraph:
        legs = tuple(1 if i in subset else 0 for i in range(1, self.n + 1))
        return StableGraph((0, 1), legs, ((0, 1),))

    def irr_graph(self) -> StableGraph:
        return StableGraph((0,), (0,) * self.n, ((0, 0),))


def psi_relation(basis: Genus1Basis, i: int) -> dict[str, Fraction]:
    out = basis.zero()
    out[IRR] = Fraction(1, 12)
    for s in basis.subsets:
        if i not in s:
            out[delta_name(s)] += 1
    return out


def kappa_relation(basis: Genus1Basis) -> tuple[dict[int, Fraction], dict[str, Fraction]]:
    """kappa_1 as (psi coefficients, delta coefficients) before psi is eliminated."""
    psis = {i: Fraction(1) for i in range(1, basis.n + 1)}
    deltas = basis.zero()
    for s in basis.subsets:
        deltas[delta_name(s)] -= 1
    return psis, deltas


def _classify(term: Term, basis: Genus1Basis):
    g, dec = term.graph, term.decoration
    if term.opaque:
        raise ReductionError("opaque label in reduction input")
    if g.is_trivial():
        if dec.degree != 1:
            raise ReductionError("only degree-1 classes reduce")
        if dec.kappa[0] == 1:
            return ("kappa",)
        return ("psi", dec.leg_psi.index(1) + 1)
    if g.num_edges == 1 and dec.degree == 0:
        if g.num_vertices == 1:
            return ("irr",)
        one = g.genera.index(1)
        return ("delta", frozenset(g.markings_at(one)))
    raise ReductionError(f"term outside the reducible span: {g}")


def psi_form(X: TautClass) -> tuple[dict[int, Fraction], dict[str, Fraction], list[str]]:
    """Eliminate kappa_1 only: (psi coefficients, delta coefficients, trace)."""
    if X.g != 1:
        raise ReductionError("reduction is implemented on genus 1 only")
    basis = Genus1Basis(X.n)
    psis = {i: Fraction(0) for i in range(1, X.n + 1)}
    vec = basis.zero()
    trace = []
    kpsi, kdelta = kappa_relation(basis)
    for term, c in X:
        kind = _classify(term, basis)
        if kind[0] == "kappa":
            trace.append(f"{c} kappa_1 -> {c} (sum psi_i - sum delta_I)")
            for i, a in kpsi.items():
                psis[i] += c * a
            for name, a in kdelta.items():
                vec[name] += c * a
        elif kind[0] == "psi":
            psis[kind[1]] += c
        elif kind[0] == "irr":
            # stored coefficient multiplies xi_*[M_{0,n+2}] = 2 delta_irr
            trace.append(f"{c} xi_*[M_0,n+2] -> {2 * c} delta_irr")
            vec[IRR] += 2 * c
        else:
            vec[delta_name(kind[1])] += c
    return psis, vec, trace


def reduce_genus1(X: TautClass, trace: list[str] | None = None) -> dict[str, Fraction]:
    """Coordinates of a degree-1 class on M_{1,n} over Genus1Basis."""
    psis, vec, steps = psi_form(X)
    basis = Genus1Basis(X.n)
    for i, c in psis.items():
        if c:
            steps.append(f"{c} psi_{i} -> {c} (1/12 delta_irr + sum_(I not containing {i}) delta_I)")
            for name, a in psi_relation(basis, i).items():
                vec[name] += c * a
    if trace is not None:
        trace.extend(steps)
    return vec


def reduce_symbolic(S: SymbolicClass) -> tuple[dict[str, Fraction], SymbolicClass]:
    """Reduce the tautological part; opaque terms come back as a residual class."""
    taut = TautClass(S.g, S.n, ((t, c) for t, c in S if not t.opaque))
    residual = SymbolicClass(S.g, S.n, ((t, c) for t, c in S if t.opaque))
    return reduce_genus1(taut), residual


def vector_is_zero(vec: dict[str, Fraction]) -> bool:
    return not any(vec.values())


def vector_difference(a: dict[str, Fraction], b: dict[str, Fraction]) -> dict[str, Fraction]:
    return {k: a.get(k, 0) - b.get(k, 0) for k in sorted(set(a) | set(b), key=_label_order)}


def _label_order(name: str):
    return (name != IRR, len(name), name)
