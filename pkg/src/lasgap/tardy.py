"""Min-number-of-tardy-jobs gap family: instances, LP, integral optimum, certificates."""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Sequence

from . import diagonalize
from .moments import LinearConstraint
from .psd import (
    FEASIBLE,
    INCONCLUSIVE,
    INFEASIBLE,
    NOT_PSD,
    VerificationReport,
    verify_conditions,
)
from .subsets import (
    DomainError,
    PseudoDistribution,
    count_subsets,
    format_rational,
    from_elements,
    to_labels,
)

DEFAULT_P_LADDER = (10**3, 10**6, 10**9, 10**12)
INCONCLUSIVE_FOR_LADDER = "INCONCLUSIVE-FOR-LADDER"


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class GapInstance:
    """``m`` blocks of ``m`` unit-cost jobs; block ``i`` has processing time ``P**i``."""

    m: int
    P: int

    def __post_init__(self):
        if self.m < 1:
            raise ParameterError("m must be at least 1")
        if self.P < 2:
            raise ParameterError("P must be an integer >= 2")

    @property
    def n(self) -> int:
        return self.m * self.m

    def var(self, i: int, j: int) -> int:
        """0-based variable of job (i, j), both 1-based."""
        return (i - 1) * self.m + j - 1

    def block_of(self, var: int) -> int:
        return var // self.m + 1

    def block(self, i: int) -> list[int]:
        return [self.var(i, j) for j in range(1, self.m + 1)]

    def processing(self, i: int) -> int:
        return self.P ** i

    def deadline(self, i: int) -> int:
        return self.m * sum(self.P ** j for j in range(1, i + 1)) - sum(self.P ** (j - 1) for j in range(1, i + 1))

    def demand(self, i: int) -> int:
        return sum(self.P ** (j - 1) for j in range(1, i + 1))

    def jobs(self) -> list[tuple[int, int]]:
        """(processing time, deadline) in variable order."""
        return [(self.processing(self.block_of(v)), self.deadline(self.block_of(v))) for v in range(self.n)]

    def demand_from_jobs(self, i: int) -> int:
        """Demand at ``d_i`` recomputed from the jobs: sum_{d_j <= d_i} p_j - d_i."""
        d_i = self.deadline(i)
        return sum(p for p, d in self.jobs() if d <= d_i) - d_i

    def to_json(self) -> dict:
        return {"m": self.m, "P": self.P}

    @classmethod
    def from_json(cls, data: dict) -> "GapInstance":
        return cls(int(data["m"]), int(data["P"]))

    def describe(self) -> dict:
        return {
            "m": self.m,
            "P": self.P,
            "n": self.n,
            "processing": [self.processing(self.block_of(v)) for v in range(self.n)],
            "deadlines": [self.deadline(i) for i in range(1, self.m + 1)],
            "demands": [self.demand(i) for i in range(1, self.m + 1)],
        }


def build_instance(m: int, P: int) -> GapInstance:
    return GapInstance(m, P)


def lp_constraints(inst: GapInstance, T) -> list[LinearConstraint]:
    """Cardinality constraint ``sum x <= T`` followed by the ``m`` demand constraints."""
    T = Fraction(T)
    if T < 0:
        raise ParameterError("T must be non-negative")
    out = [LinearConstraint.at_most({v: Fraction(1) for v in range(inst.n)}, T, "cardinality")]
    for ell in range(1, inst.m + 1):
        coeffs = {}
        for i in range(1, ell + 1):
            for v in inst.block(i):
                coeffs[v] = Fraction(inst.processing(i))
        out.append(LinearConstraint(coeffs, Fraction(inst.demand(ell)), f"demand[{ell}]"))
    return out


def point_value(c: LinearConstraint, x: dict[int, Fraction]) -> Fraction:
    return sum((Fraction(a) * x.get(i, 0) for i, a in c.coeffs.items()), Fraction(0)) - c.rhs


def point_is_feasible(constraints: Sequence[LinearConstraint], x: dict[int, Fraction]) -> bool:
    return all(point_value(c, x) >= 0 for c in constraints)


def fractional_point(inst: GapInstance) -> tuple[dict[int, Fraction], Fraction]:
    """``x_ij = 1/(sqrt(n) P)`` together with ``T = sqrt(n)/P``."""
    x = {v: Fraction(1, inst.m * inst.P) for v in range(inst.n)}
    return x, Fraction(inst.m, inst.P)


def moore_hodgson(jobs: Sequence[tuple[int, int]]) -> tuple[int, list[int]]:
    """Minimum number of tardy jobs (unit weights) and one optimal tardy set.

    Jobs are taken by (deadline, index).  Whenever the running schedule misses a
    deadline the longest scheduled job is dropped, ties going to the smallest index.
    """
    for p, d in jobs:
        if p <= 0 or d <= 0:
            raise DomainError("processing times and deadlines must be positive")
    order = sorted(range(len(jobs)), key=lambda k: (jobs[k][1], k))
    heap: list[tuple[int, int]] = []
    elapsed = 0
    tardy = []
    for k in order:
        p, d = jobs[k]
        heapq.heappush(heap, (-p, k))
        elapsed += p
        if elapsed > d:
            neg_p, drop = heapq.heappop(heap)
            elapsed += neg_p
            tardy.append(drop)
    return len(tardy), sorted(tardy)


def on_time_feasible(jobs: Sequence[tuple[int, int]], subset: Sequence[int]) -> bool:
    elapsed = 0
    for k in sorted(subset, key=lambda k: (jobs[k][1], k)):
        elapsed += jobs[k][0]
        if elapsed > jobs[k][1]:
            return False
    return True


def brute_force_min_tardy(jobs: Sequence[tuple[int, int]]) -> int:
    """Exhaustive search over on-time sets (EDD decides each set)."""
    n = len(jobs)
    if n > 20:
        raise DomainError("exhaustive search is limited to 20 jobs")
    for size in range(n, -1, -1):
        for subset in itertools.combinations(range(n), size):
            if on_time_feasible(jobs, subset):
                return n - size
    return n


def brute_force_integral_cover(inst: GapInstance) -> int:
    """Fewest variables set to one that satisfy every demand constraint."""
    if inst.n > 20:
        raise DomainError("exhaustive search is limited to n <= 20")
    demands = lp_constraints(inst, inst.n)[1:]
    for size in range(inst.n + 1):
        for subset in itertools.combinations(range(inst.n), size):
            mask = from_elements(subset)
            if all(c.value(mask) >= 0 for c in demands):
                return size
    raise AssertionError("all-ones point always covers")


@dataclass(frozen=True)
class CertificateSpec:
    theorem: int
    n: int
    k: int
    t: int
    threshold: int
    alpha: Fraction

    @property
    def m(self) -> int:
        return isqrt(self.n)

    @property
    def T(self) -> Fraction:
        return Fraction(self.m, self.k)

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "n": self.n,
            "k": self.k,
            "t": self.t,
            "threshold": self.threshold,
            "alpha": format_rational(self.alpha),
            "T": format_rational(self.T),
        }


def make_certificate(n: int, k: int, theorem: int) -> tuple[CertificateSpec, PseudoDistribution]:
    """Uniform weight on every subset up to the theorem's size threshold."""
    m = isqrt(n)
    if m * m != n:
        raise ParameterError(f"n = {n} is not a perfect square")
    if k < 1:
        raise ParameterError("k must be at least 1")
    if theorem == 1:
        # t = m/(2k) - 1/2
        if m < k or (m - k) % (2 * k):
            raise ParameterError(f"sqrt(n)/(2k) - 1/2 = {Fraction(m - k, 2 * k)} is not a natural number")
        t = (m - k) // (2 * k)
        threshold = 2 * t + 1
    elif theorem == 2:
        # t = m/k - 1
        if m % k or m < k:
            raise ParameterError(f"sqrt(n)/k - 1 = {Fraction(m, k) - 1} is not a natural number")
        t = m // k - 1
        threshold = t + 1
    else:
        raise ParameterError("theorem must be 1 or 2")
    alpha = Fraction(1, count_subsets(n, threshold))
    spec = CertificateSpec(theorem, n, k, t, threshold, alpha)
    dist = PseudoDistribution.from_profile(n, {s: alpha for s in range(threshold + 1)}, normalized=True)
    return spec, dist


def theorem1_shift(inst: GapInstance, ell: int, t: int) -> int:
    """First ``t + 1`` jobs of block ``ell``."""
    return from_elements(inst.var(ell, j) for j in range(1, t + 2))


@dataclass
class GapReport:
    certificate: CertificateSpec
    level: int
    status: str
    integral_optimum: int
    rungs: list[dict] = field(default_factory=list)
    passing_P: int | None = None
    report: VerificationReport | None = None
    extras: dict = field(default_factory=dict)

    @property
    def gap(self) -> Fraction:
        return Fraction(self.integral_optimum) / self.certificate.T

    def statement(self) -> str:
        if self.status == FEASIBLE:
            return f"gap {format_rational(self.gap)} at level {self.level}"
        return f"no gap certified at level {self.level} ({self.status})"

    def to_json(self) -> dict:
        return {
            "certificate": self.certificate.to_json(),
            "level": self.level,
            "status": self.status,
            "integral_optimum": self.integral_optimum,
            "T": format_rational(self.certificate.T),
            "gap": format_rational(self.gap),
            "statement": self.statement(),
            "passing_P": self.passing_P,
            "rungs": self.rungs,
            "report": self.report.to_json() if self.report is not None else None,
            **self.extras,
        }


def _weyl_summary(inst: GapInstance, dist: PseudoDistribution, cert: CertificateSpec,
                  constraints: Sequence[LinearConstraint], level: int) -> list[dict]:
    out = []
    for ell, c in enumerate(constraints[1:], start=1):
        shift = theorem1_shift(inst, ell, level) if cert.theorem == 1 and level + 1 <= inst.m else 0
        res = diagonalize.partial_diagonalize(dist, level, shift, weight=c)
        bound = diagonalize.weyl_lower_bound(res)
        out.append({
            "constraint": ell,
            "shift": to_labels(shift),
            "min_diagonal": format_rational(min(res.diagonal)),
            "remainder_terms": len(res.remainder),
            "max_remainder_norm2": diagonalize.max_remainder_norm(res),
            "norm_envelope": diagonalize.norm_envelope(res),
            "weyl_bound": format_rational(bound),
            "weyl_certifies_psd": bound >= 0,
        })
    return out


def verify_gap(n: int, k: int, theorem: int, level: int | None = None,
               p_ladder: Sequence[int] = DEFAULT_P_LADDER, mode: str = "auto",
               stop_on_pass: bool = True, weyl: bool = False) -> GapReport:
    """Verify the certificate for LP(sqrt(n)/k) at ``level`` for each P on the ladder.

    The ladder is walked in ascending order.  With ``stop_on_pass`` the walk ends
    at the first FEASIBLE rung.  If no rung passes at the certificate's own level
    the outcome is INCONCLUSIVE-FOR-LADDER; at any other level a ladder of
    INFEASIBLE rungs is reported INFEASIBLE.
    """
    cert, dist = make_certificate(n, k, theorem)
    if level is None:
        level = cert.t
    if level < 0:
        raise ParameterError("level must be non-negative")
    ladder = sorted(int(P) for P in p_ladder)
    if not ladder:
        raise ParameterError("empty P ladder")
    m = cert.m
    optimum, _ = moore_hodgson(build_instance(m, ladder[0]).jobs())

    out = GapReport(cert, level, INCONCLUSIVE, optimum)
    chosen = None
    chosen_inst = None
    chosen_cons = None
    for P in ladder:
        inst = build_instance(m, P)
        cons = lp_constraints(inst, cert.T)
        rep = verify_conditions(dist, cons, level, mode=mode)
        rung = {"P": P, "overall": rep.overall,
                "statuses": [rep.condition2["status"]] + [c["status"] for c in rep.condition3]}
        out.rungs.append(rung)
        chosen, chosen_inst, chosen_cons = rep, inst, cons
        if rep.overall == FEASIBLE:
            if out.passing_P is None:
                out.passing_P = P
                first = (rep, inst, cons)
            if stop_on_pass:
                break
    if out.passing_P is not None:
        out.status = FEASIBLE
        chosen, chosen_inst, chosen_cons = first
    elif all(r["overall"] == INFEASIBLE for r in out.rungs) and level != cert.t:
        out.status = INFEASIBLE
    elif level == cert.t:
        out.status = INCONCLUSIVE_FOR_LADDER
    else:
        out.status = INCONCLUSIVE
    out.report = chosen

    witnesses = []
    for idx, entry in enumerate(chosen.condition3):
        if entry["status"] != NOT_PSD:
            continue
        found = diagonalize.diagonal_witness(dist, chosen_cons[idx], level)
        if found is not None:
            mask, v, value = found
            witnesses.append({"constraint": idx, "name": chosen_cons[idx].name,
                              "set": to_labels(mask), "diagonal_value": format_rational(value)})
    if witnesses:
        out.extras["diagonal_witnesses"] = witnesses
    if weyl:
        out.extras["weyl"] = _weyl_summary(chosen_inst, dist, cert, chosen_cons, level)
    return out
