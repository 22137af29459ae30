"""Moment matrices of a pseudo-distribution, in moment form and zeta-sum form."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping

import numpy as np

from .subsets import (
    CapacityError,
    DomainError,
    MomentVector,
    PseudoDistribution,
    count_subsets,
    enumerate_subsets,
    format_rational,
    index_map,
    parse_rational,
    popcount,
    subsets_of,
    zeta_transform,
)

EXACT = "exact"
FLOAT = "float"


class ModeError(TypeError):
    pass


@dataclass(frozen=True)
class LinearConstraint:
    """``g(x) = sum_i coeffs[i] * x_i - rhs >= 0``; keys are 0-based variables."""

    coeffs: Mapping[int, Fraction]
    rhs: Fraction
    name: str = ""

    @classmethod
    def at_most(cls, coeffs: Mapping[int, Fraction], bound, name: str = "") -> "LinearConstraint":
        """``sum coeffs[i] x_i <= bound``, stored negated as a >= constraint."""
        return cls({i: -Fraction(c) for i, c in coeffs.items()}, -Fraction(bound), name)

    def value(self, mask: int) -> Fraction:
        return sum((Fraction(c) for i, c in self.coeffs.items() if mask >> i & 1), Fraction(0)) - self.rhs

    def scaled(self, factor: Fraction) -> "LinearConstraint":
        if factor <= 0:
            raise DomainError("constraints may only be scaled by a positive factor")
        return LinearConstraint({i: c * factor for i, c in self.coeffs.items()}, self.rhs * factor, self.name)

    def max_abs_coefficient(self) -> Fraction:
        return max([abs(Fraction(c)) for c in self.coeffs.values()] + [abs(self.rhs)], default=Fraction(1))

    def to_json(self) -> dict:
        return {
            "coeffs": [{"var": i + 1, "value": format_rational(c)} for i, c in sorted(self.coeffs.items())],
            "rhs": format_rational(self.rhs),
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "LinearConstraint":
        if isinstance(data, str):
            data = json.loads(data)
        coeffs: dict[int, Fraction] = {}
        for item in data["coeffs"]:
            var = int(item["var"])
            if var < 1:
                raise DomainError("variables are 1-based")
            coeffs[var - 1] = coeffs.get(var - 1, Fraction(0)) + parse_rational(item["value"])
        return cls(coeffs, parse_rational(data["rhs"]))


def constraint_value(c: LinearConstraint, mask: int) -> Fraction:
    return c.value(mask)


@dataclass(frozen=True)
class SymMatrix:
    """Symmetric matrix indexed by subsets, exact (object array) or float."""

    labels: tuple[int, ...]
    entries: np.ndarray
    mode: str = EXACT

    def __post_init__(self):
        if self.mode not in (EXACT, FLOAT):
            raise ModeError(f"unknown arithmetic mode {self.mode!r}")
        dim = len(self.labels)
        if self.entries.shape != (dim, dim):
            raise DomainError("entry array does not match labels")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def _same_mode(self, other: "SymMatrix") -> None:
        if not isinstance(other, SymMatrix):
            return
        if other.mode != self.mode:
            raise ModeError(f"cannot combine {self.mode} and {other.mode} matrices")
        if other.labels != self.labels:
            raise DomainError("index sets differ")

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        self._same_mode(other)
        return SymMatrix(self.labels, self.entries + other.entries, self.mode)

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        self._same_mode(other)
        return SymMatrix(self.labels, self.entries - other.entries, self.mode)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return (self.mode == other.mode and self.labels == other.labels
                and bool(np.array_equal(self.entries, other.entries)))

    __hash__ = None

    def to_float(self) -> "SymMatrix":
        if self.mode == FLOAT:
            return self
        return SymMatrix(self.labels, np.array(self.entries, dtype=float), FLOAT)

    def quadratic_form(self, v) -> Fraction | float:
        """``v^T M v``; exact vectors against exact matrices stay exact."""
        v = np.asarray(v, dtype=object if self.mode == EXACT else float)
        return v.dot(self.entries.dot(v))


def _blank(dim: int) -> np.ndarray:
    out = np.empty((dim, dim), dtype=object)
    out.fill(Fraction(0))
    return out


def _assemble(labels, entry) -> np.ndarray:
    dim = len(labels)
    out = _blank(dim)
    cache: dict[int, Fraction] = {}
    for a in range(dim):
        i = labels[a]
        for b in range(a, dim):
            u = i | labels[b]
            val = cache.get(u)
            if val is None:
                val = entry(u)
                cache[u] = val
            out[a, b] = val
            out[b, a] = val
    return out


def _finish(labels, entries, mode: str) -> SymMatrix:
    m = SymMatrix(tuple(labels), entries, EXACT)
    return m.to_float() if mode == FLOAT else m


def moment_matrix(m: MomentVector, d: int, mode: str = EXACT) -> SymMatrix:
    """``[M]_{I,J} = y_{I | J}`` over P_d(n)."""
    labels = enumerate_subsets(m.n, d)
    return _finish(labels, _assemble(labels, lambda u: m[u]), mode)


def variable_moment_matrix(m: MomentVector, t: int, mode: str = EXACT) -> SymMatrix:
    """The order-(t+1) moment matrix of the variables."""
    return moment_matrix(m, t + 1, mode)


def constraint_moment_vector(m: MomentVector, c: LinearConstraint, mask: int) -> Fraction:
    """``z_I = sum_i A_i y_{I | {i}} - b y_I``."""
    total = -c.rhs * m[mask]
    for i, a in c.coeffs.items():
        if a:
            total += a * m[mask | (1 << i)]
    return total


def constraint_moment_matrix(m: MomentVector, c: LinearConstraint, t: int, mode: str = EXACT) -> SymMatrix:
    labels = enumerate_subsets(m.n, t)
    if m.by_size is not None:
        # size-symmetric moments: z_U = y_{|U|+1} * sum_{i not in U} A_i + y_{|U|} * (sum_{i in U} A_i - b)
        seq = m.by_size
        total = sum(c.coeffs.values(), Fraction(0))

        def entry(u: int) -> Fraction:
            s = popcount(u)
            inside = sum((Fraction(a) for i, a in c.coeffs.items() if u >> i & 1), Fraction(0))
            if s == m.n:
                return seq[s] * (inside - c.rhs)
            if s + 1 > 2 * m.d:
                raise DomainError(f"constraint moments need order {s + 1} > {2 * m.d}")
            return seq[s + 1] * (total - inside) + seq[s] * (inside - c.rhs)
    else:
        def entry(u: int) -> Fraction:
            return constraint_moment_vector(m, c, u)
    return _finish(labels, _assemble(labels, entry), mode)


def pushforward(p: PseudoDistribution, c: LinearConstraint) -> PseudoDistribution:
    """Weights ``g(x_I) * y_I`` on the support of ``p``."""
    weights = {mask: c.value(mask) * w for mask, w in p.weights.items() if w != 0}
    return PseudoDistribution(p.n, {k: v for k, v in weights.items() if v != 0})


def zeta_sum_matrix(p: PseudoDistribution, d: int, weight: LinearConstraint | None = None,
                    mode: str = EXACT, max_terms: int = 200_000) -> SymMatrix:
    """``sum_I w_I Z_I Z_I^T`` over P_d(n), built term by term from the support."""
    support = p.support()
    if len(support) > max_terms:
        raise CapacityError(f"support of {len(support)} sets is too large to sum term by term")
    labels = enumerate_subsets(p.n, d)
    pos = index_map(p.n, d)
    out = _blank(len(labels))
    for h in support:
        w = p.weights[h]
        if weight is not None:
            w = w * weight.value(h)
        if w == 0:
            continue
        idx = [pos[s] for s in subsets_of(h, d)]
        out[np.ix_(idx, idx)] += w
    return _finish(labels, out, mode)


def symmetric_moments(n: int, smax: int, alpha, d: int | None = None) -> MomentVector:
    """Moments of weight ``alpha`` on every subset of size <= ``smax``.

    ``y_I = alpha * sum_{j=|I|}^{smax} C(n-|I|, j-|I|)`` depends on ``|I|`` only.
    ``d`` sets the truncation order (default: large enough for every size).
    """
    if not 0 <= smax <= n:
        raise DomainError("need 0 <= smax <= n")
    alpha = Fraction(alpha)
    if d is None:
        d = (n + 1) // 2
    order = min(2 * d, n)
    seq = tuple(alpha * sum(comb(n - s, j - s) for j in range(s, smax + 1)) for s in range(order + 1))
    return MomentVector(n, d, {}, seq)


def dense_moments(m: MomentVector) -> dict[int, Fraction]:
    """Every moment in range as an explicit map (for small ``n``)."""
    if count_subsets(m.n, m.order) > 500_000:
        raise CapacityError("too many moments to list")
    return {mask: m[mask] for mask in enumerate_subsets(m.n, m.order)}


def is_integral_point_feasible(mask: int, constraints) -> bool:
    return all(c.value(mask) >= 0 for c in constraints)


def random_constraint(n: int, rng, span: int = 5) -> LinearConstraint:
    coeffs = {i: Fraction(rng.randint(-span, span)) for i in range(n)}
    return LinearConstraint({i: c for i, c in coeffs.items() if c}, Fraction(rng.randint(-span, span), rng.randint(1, 3)))


def oracle_compare(p: PseudoDistribution, c: LinearConstraint, t: int) -> dict:
    """Compare both assembly routes and the constraint pushforward on one input."""
    m = zeta_transform(p, t + 1)
    z = zeta_transform(pushforward(p, c), t)
    pushforward_ok = all(z[mask] == constraint_moment_vector(m, c, mask)
                         for mask in enumerate_subsets(p.n, min(2 * t, p.n)))
    return {
        "variables": zeta_sum_matrix(p, t + 1) == variable_moment_matrix(m, t),
        "constraint": zeta_sum_matrix(p, t, weight=c) == constraint_moment_matrix(m, c, t),
        "pushforward": pushforward_ok,
    }
