"""Unconstrained 0/1 polynomial maximization with a level-(k-1) gap."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

from . import diagonalize
from .moments import moment_matrix
from .psd import FEASIBLE, INCONCLUSIVE, PSD, exact_inertia, verdict_json
from .subsets import (
    CapacityError,
    DomainError,
    PseudoDistribution,
    format_rational,
    from_elements,
    full_set,
    is_subset,
    popcount,
    zeta_transform,
)

DEFAULT_EPS_LADDER = tuple(Fraction(1, 2 ** e) for e in range(4, 41, 2))
INCONCLUSIVE_FOR_LADDER = "INCONCLUSIVE-FOR-LADDER"


@dataclass(frozen=True)
class MultilinearPolynomial:
    n: int
    coeffs: Mapping[int, Fraction]

    def evaluate(self, mask: int) -> Fraction:
        """Value at the 0/1 point whose ones are ``mask``."""
        return sum((c for mono, c in self.coeffs.items() if is_subset(mono, mask)), Fraction(0))

    @property
    def degree(self) -> int:
        return max((popcount(mono) for mono, c in self.coeffs.items() if c), default=0)


def build_objective(n: int, k: int) -> MultilinearPolynomial:
    """Coefficient C(n-|I|, k-|I|) (-1)^{|I|+1} on every monomial with 1 <= |I| <= k."""
    if not 1 <= k <= n:
        raise DomainError("need 1 <= k <= n")
    coeffs = {}
    for s in range(1, k + 1):
        c = Fraction(comb(n - s, k - s) * (-1) ** (s + 1))
        for items in itertools.combinations(range(n), s):
            coeffs[from_elements(items)] = c
    return MultilinearPolynomial(n, coeffs)


def hit_count(n: int, k: int, mask: int) -> int:
    """Number of k-subsets of [n] meeting ``mask``."""
    return comb(n, k) - comb(n - popcount(mask), k)


def integral_optimum(f: MultilinearPolynomial | tuple[int, int]) -> Fraction:
    """Brute-force maximum over {0,1}^n (n <= 20)."""
    if isinstance(f, tuple):
        f = build_objective(*f)
    if f.n > 20:
        raise CapacityError("brute force limited to n <= 20")
    return max(f.evaluate(mask) for mask in range(1 << f.n))


def make_certificate(n: int, k: int, eps) -> PseudoDistribution:
    """Weight alpha on every set of size >= n-k+1 and -eps on the empty set."""
    eps = Fraction(eps)
    if eps < 0:
        raise DomainError("eps must be non-negative")
    count = sum(comb(n, s) for s in range(n - k + 1, n + 1))
    alpha = (1 + eps) / count
    weights = {}
    for s in range(n - k + 1, n + 1):
        for items in itertools.combinations(range(n), s):
            weights[from_elements(items)] = alpha
    if eps:
        weights[0] = -eps
    return PseudoDistribution(n, weights, normalized=True)


def pseudo_objective(p: PseudoDistribution, f: MultilinearPolynomial) -> Fraction:
    return sum((f.evaluate(mask) * w for mask, w in p.weights.items() if w), Fraction(0))


@dataclass
class PolyoptReport:
    n: int
    k: int
    level: int
    status: str
    integral_optimum: Fraction
    eps: Fraction | None = None
    pseudo_value: Fraction | None = None
    rungs: list[dict] = field(default_factory=list)
    condition6: dict | None = None
    diagonalizer: dict | None = None

    @property
    def margin(self) -> Fraction | None:
        return None if self.eps is None else self.eps * comb(self.n, self.k)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "level": self.level,
            "status": self.status,
            "overall": self.status,
            "integral_optimum": format_rational(self.integral_optimum),
            "eps": None if self.eps is None else format_rational(self.eps),
            "pseudo_value": None if self.pseudo_value is None else format_rational(self.pseudo_value),
            "superoptimality_margin": None if self.margin is None else format_rational(self.margin),
            "rungs": self.rungs,
            "condition6": self.condition6,
            "diagonalizer": self.diagonalizer,
        }


def check_certificate(n: int, k: int, eps) -> tuple[dict, PseudoDistribution]:
    """Mass and order-(k-1) moment-matrix check for one eps."""
    p = make_certificate(n, k, eps)
    t = k - 1
    mat = moment_matrix(zeta_transform(p, t), t)
    res = exact_inertia(mat)
    entry = verdict_json(res, mat.labels, "exact")
    entry["mass"] = format_rational(p.total_mass())
    entry["eps"] = format_rational(Fraction(eps))
    entry["dim"] = mat.dim
    return entry, p


def diagonalizer_check(p: PseudoDistribution, k: int) -> dict:
    """Shift by the full set: D = alpha * I plus the single -eps remainder term."""
    res = diagonalize.partial_diagonalize(p, k - 1, full_set(p.n))
    bound = diagonalize.weyl_lower_bound(res)
    weyl_status = PSD if bound >= 0 else INCONCLUSIVE
    return {
        "diagonal": sorted({format_rational(x) for x in res.diagonal}),
        "remainder": [{"weight": format_rational(w), "norm2": sum(x * x for x in u)} for w, u in res.remainder],
        "weyl_bound": format_rational(bound),
        "weyl_status": weyl_status,
    }


def verify_polyopt(n: int, k: int, eps_ladder: Sequence = DEFAULT_EPS_LADDER) -> PolyoptReport:
    """Walk the eps ladder from the largest value down; stop at the first PSD rung."""
    f = build_objective(n, k)
    opt = integral_optimum(f)
    report = PolyoptReport(n, k, k - 1, INCONCLUSIVE_FOR_LADDER, opt)
    for eps in sorted((Fraction(e) for e in eps_ladder), reverse=True):
        entry, p = check_certificate(n, k, eps)
        report.rungs.append({"eps": entry["eps"], "status": entry["status"]})
        if entry["status"] == PSD and entry["mass"] == "1":
            report.status = FEASIBLE
            report.eps = eps
            report.pseudo_value = pseudo_objective(p, f)
            report.condition6 = entry
            report.diagonalizer = diagonalizer_check(p, k)
            break
    return report
