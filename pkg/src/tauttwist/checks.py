"""Genus 0 and genus 1 verification reports, and the delta_irr normalization probe."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .pixton import PixtonInput, pixton_class
from .relations import IRR, Genus1Basis, psi_relation, reduce_genus1, reduce_symbolic, vector_difference
from .tautcore import ClassRegistry, expand, frac_str, fundamental_class
from .twistloci import (Signature, SignatureError, conjecture_gap, half_pixton,
                        nontrivial_contributions, weighted_class_H)


@dataclass
class Claim:
    name: str
    passed: bool
    difference: dict[str, Fraction] = field(default_factory=dict)
    detail: str = ""

    def to_json(self) -> dict[str, Any]:
        out = {"name": self.name, "status": "pass" if self.passed else "fail",
               "difference": {k: frac_str(v) for k, v in self.difference.items() if v}}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class Report:
    title: str
    claims: list[Claim] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def to_json(self) -> dict[str, Any]:
        return {"title": self.title, "status": "pass" if self.passed else "fail",
                "claims": [c.to_json() for c in self.claims], **self.extra}

    def to_text(self) -> str:
        lines = [self.title]
        for c in self.claims:
            lines.append(f"  {c.name}: {'pass' if c.passed else 'fail'}")
            for k, v in c.difference.items():
                if v:
                    lines.append(f"      {k}: {frac_str(v)}")
            if c.detail:
                lines.append(f"      {c.detail}")
        return "\n".join(lines)


def _first_difference(vectors):
    base = vectors[0]
    for v in vectors[1:]:
        diff = vector_difference(v, base)
        if any(diff.values()):
            return diff
    return {}


def verify_genus1(mu: Sequence[int], k_list: Sequence[int],
                  registry: ClassRegistry | None = None) -> Report:
    """k-independence of reduced 2^{-1}P, of normalized H, and of the residual gap D(k)."""
    mu = tuple(mu)
    if not k_list:
        raise SignatureError("k_list must be nonempty")
    if sum(mu) != 0:
        raise SignatureError("genus-1 signatures sum to zero")
    sigs = [Signature(1, k, mu) for k in k_list]
    report = Report(f"genus-1 verification mu=({','.join(map(str, mu))}) k in {list(k_list)}")

    half_p = [reduce_genus1(half_pixton(s)) for s in sigs]
    diff = _first_difference(half_p)
    report.claims.append(Claim("k-independence of reduced 2^-1 P", not diff, diff))

    hs = [expand(weighted_class_H(s), registry) for s in sigs]
    same = all(h == hs[0] for h in hs[1:])
    report.claims.append(Claim("k-independence of normalized H", same,
                               detail="" if same else "normalized weighted classes differ"))

    ds = []
    for s in sigs:
        rest = expand(half_pixton(s).to_symbolic() - nontrivial_contributions(s), registry)
        vec, residual = reduce_symbolic(rest)
        if not residual.is_zero():
            raise AssertionError("nontrivial genus-1 contributions must expand fully")
        ds.append(vec)
    diff = _first_difference(ds)
    report.claims.append(Claim("k-independence of D(k)", not diff, diff))
    report.extra["reduced_half_P"] = {k: frac_str(v) for k, v in half_p[0].items()}
    report.extra["D"] = {k: frac_str(v) for k, v in ds[0].items()}
    return report


def genus0_check(mu: Sequence[int], k: int) -> Report:
    sig = Signature(0, k, tuple(mu))
    report = Report(f"genus-0 check mu=({','.join(map(str, sig.mu))}) k={k}")
    fund = fundamental_class(0, sig.n)
    P = pixton_class(PixtonInput(0, k, sig.mu, 0)).cls
    report.claims.append(Claim("P is the fundamental class", P == fund))
    H = expand(weighted_class_H(sig))
    report.claims.append(Claim("H is the fundamental class", H == fund))
    gap = conjecture_gap(sig, "A")
    report.claims.append(Claim("conjecture gap vanishes", gap.status == "zero"))
    return report


def delta_irr_probe(mu: Sequence[int] = (2, -1, -1), k: int = 2) -> Report:
    """Which delta_irr constant do the genus-1 relations imply for P?

    Compares the reduced P against two candidate closed forms
    sum m_i^2 psi_i - c delta_irr - sum (sum_I m_i)^2 delta_I for c in {1/12, 1/6},
    each reduced through the same relations, and records the substitution trace.
    """
    sig = Signature(1, k, tuple(mu))
    basis = Genus1Basis(sig.n)
    P = pixton_class(PixtonInput(1, k, sig.mu)).cls
    trace: list[str] = []
    reduced = reduce_genus1(P, trace)

    irr_stratum = P.coefficient(_irr_term(basis))
    report = Report(f"delta_irr probe mu=({','.join(map(str, sig.mu))}) k={k}")
    candidates = {}
    for c in (Fraction(1, 12), Fraction(1, 6)):
        vec = basis.zero()
        for i, m in enumerate(sig.mu, start=1):
            for name, a in psi_relation(basis, i).items():
                vec[name] += m * m * a
        vec[IRR] -= c
        for s in basis.subsets:
            vec["delta_{" + ",".join(map(str, sorted(s))) + "}"] -= sum(sig.mu[i - 1] for i in s) ** 2
        candidates[c] = vector_difference(reduced, vec)
    matches = [c for c, d in candidates.items() if not any(d.values())]
    implied = matches[0] if len(matches) == 1 else None
    report.claims.append(Claim(
        "exactly one closed form matches the reduced class", implied is not None,
        detail=f"implied delta_irr constant: -{implied}" if implied is not None else "no unique match"))
    report.claims.append(Claim(
        "loop-stratum coefficient of P is -1/12 on xi_*[M_0,n+2]", irr_stratum == Fraction(-1, 12)))
    report.extra.update({
        "implied_constant": f"-{frac_str(implied)}" if implied is not None else None,
        "loop_stratum_coefficient": frac_str(irr_stratum),
        # reading the loop stratum itself as delta_irr drops the factor 2
        "constant_if_unnormalized": frac_str(irr_stratum),
        "normalization": "delta_irr = 1/2 xi_*[M_0,n+2]",
        "trace": trace,
        "residual_per_candidate": {f"-{frac_str(c)}": {n: frac_str(v) for n, v in d.items() if v}
                                   for c, d in candidates.items()},
    })
    return report


def _irr_term(basis: Genus1Basis):
    from .tautcore import Term
    return Term.stratum(basis.irr_graph())
