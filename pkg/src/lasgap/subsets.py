"""Subsets of a ground set as bitmasks, canonical ordering, zeta/Moebius transforms.

A subset of ``[n] = {1, ..., n}`` is a Python ``int`` whose bit ``i - 1`` is set
when element ``i`` belongs to it.  Element labels are 1-based everywhere a set is
shown to a user (JSON, CSV, reports) and 0-based bit positions internally.

The canonical order is by cardinality first and colexicographic within a
cardinality.  Colex order on equal-size sets coincides with numeric order of the
bitmasks, so the sort key is simply ``(popcount, mask)``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping

MAX_GROUND_SET = 64


class CapacityError(ValueError):
    pass


class DomainError(ValueError):
    pass


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def elements(mask: int) -> list[int]:
    """0-based bit positions set in ``mask``."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def from_elements(items: Iterable[int]) -> int:
    mask = 0
    for i in items:
        mask |= 1 << i
    return mask


def from_labels(labels: Iterable[int]) -> int:
    """Bitmask from 1-based element labels."""
    mask = 0
    for lab in labels:
        if lab < 1:
            raise DomainError(f"element labels are 1-based, got {lab}")
        mask |= 1 << (lab - 1)
    return mask


def to_labels(mask: int) -> list[int]:
    return [i + 1 for i in elements(mask)]


def fmt(mask: int) -> str:
    """Human-readable form, e.g. ``{1,3}``; the empty set prints as ``{}``."""
    return "{" + ",".join(str(x) for x in to_labels(mask)) + "}"


def full_set(n: int) -> int:
    return (1 << n) - 1


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def sort_key(mask: int) -> tuple[int, int]:
    return popcount(mask), mask


def _check_capacity(n: int) -> None:
    if n > MAX_GROUND_SET:
        raise CapacityError(f"ground set of size {n} exceeds the {MAX_GROUND_SET}-element limit")
    if n < 0:
        raise DomainError("ground set size must be non-negative")


@lru_cache(maxsize=64)
def _enumerate(n: int, d: int) -> tuple[int, ...]:
    out: list[int] = []
    for s in range(d + 1):
        layer = [from_elements(c) for c in itertools.combinations(range(n), s)]
        layer.sort()
        out.extend(layer)
    return tuple(out)


def enumerate_subsets(n: int, d: int) -> tuple[int, ...]:
    """All subsets of ``[n]`` with at most ``d`` elements, in canonical order."""
    _check_capacity(n)
    if not 0 <= d:
        raise DomainError("d must be non-negative")
    return _enumerate(n, min(d, n))


@lru_cache(maxsize=64)
def _index_of(n: int, d: int) -> dict[int, int]:
    return {mask: i for i, mask in enumerate(_enumerate(n, d))}


def index_map(n: int, d: int) -> dict[int, int]:
    """Inverse of :func:`enumerate_subsets`: mask -> position."""
    _check_capacity(n)
    return _index_of(n, min(d, n))


def count_subsets(n: int, d: int) -> int:
    return sum(comb(n, s) for s in range(min(d, n) + 1))


def subsets_of(mask: int, max_size: int | None = None) -> Iterable[int]:
    """All subsets of ``mask`` (optionally only those of size <= ``max_size``)."""
    items = elements(mask)
    top = len(items) if max_size is None else min(max_size, len(items))
    for s in range(top + 1):
        for c in itertools.combinations(items, s):
            yield from_elements(c)


def parse_rational(value) -> Fraction:
    """Accept ints, Fractions and strings such as ``"1/137"`` or ``"-3"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not an exact rational: {value!r}") from exc
    raise DomainError(f"not an exact rational: {value!r}")


def format_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def alt_binomial_sum(m: int, r: int) -> int:
    """sum_{i=0}^{r} (-1)^i C(m, i); zero for ``r < 0``."""
    if m < 0:
        raise DomainError("m must be non-negative")
    if r < 0:
        return 0
    return sum((-1) ** i * comb(m, i) for i in range(min(r, m) + 1))


@dataclass(frozen=True)
class PseudoDistribution:
    """Signed weights over subsets of ``[n]``; missing subsets weigh zero.

    ``profile`` optionally records a size-symmetric solution (cardinality ->
    weight of every set of that cardinality).  When given, ``weights`` is its
    expansion; use :meth:`from_profile` to build one.
    """

    n: int
    weights: Mapping[int, Fraction]
    profile: Mapping[int, Fraction] | None = None
    normalized: bool = False

    def __post_init__(self):
        _check_capacity(self.n)
        top = full_set(self.n)
        for mask in self.weights:
            if mask & ~top:
                raise DomainError(f"subset {mask:#x} lies outside the ground set [{self.n}]")
        if self.normalized and self.total_mass() != 1:
            raise DomainError(f"flagged normalized but total mass is {self.total_mass()}")

    @classmethod
    def from_profile(cls, n: int, profile: Mapping[int, Fraction], normalized: bool = False,
                     max_support: int = 2_000_000) -> "PseudoDistribution":
        _check_capacity(n)
        size = sum(comb(n, s) for s, w in profile.items() if w != 0)
        if size > max_support:
            raise CapacityError(f"profile expands to {size} sets")
        weights: dict[int, Fraction] = {}
        for s in sorted(profile):
            w = Fraction(profile[s])
            if w == 0:
                continue
            for c in itertools.combinations(range(n), s):
                weights[from_elements(c)] = w
        return cls(n, weights, {s: Fraction(w) for s, w in profile.items()}, normalized)

    def weight(self, mask: int) -> Fraction:
        return self.weights.get(mask, Fraction(0))

    def support(self) -> list[int]:
        return sorted((m for m, w in self.weights.items() if w != 0), key=sort_key)

    def max_support_size(self) -> int:
        return max((popcount(m) for m, w in self.weights.items() if w != 0), default=0)

    def total_mass(self) -> Fraction:
        if self.profile is not None:
            return sum((comb(self.n, s) * Fraction(w) for s, w in self.profile.items()), Fraction(0))
        return sum(self.weights.values(), Fraction(0))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "weights": [
                {"set": to_labels(m), "value": format_rational(self.weights[m])}
                for m in self.support()
            ],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "PseudoDistribution":
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["n"])
        weights: dict[int, Fraction] = {}
        for item in data["weights"]:
            mask = from_labels(item["set"])
            if mask in weights:
                raise DomainError(f"duplicate set {item['set']}")
            weights[mask] = parse_rational(item["value"])
        return cls(n, weights)


@dataclass(frozen=True)
class MomentVector:
    """Moments ``y_I`` for ``|I| <= 2d``; subsets within range but absent are zero.

    ``by_size`` optionally holds a moment sequence that depends on ``|I|`` only.
    Requests beyond order ``2d`` raise :class:`DomainError`.
    """

    n: int
    d: int
    values: Mapping[int, Fraction] = field(default_factory=dict)
    by_size: tuple[Fraction, ...] | None = None

    @property
    def order(self) -> int:
        return min(2 * self.d, self.n)

    def __getitem__(self, mask: int) -> Fraction:
        s = popcount(mask)
        if s > 2 * self.d or mask >> self.n:
            raise DomainError(f"moment {fmt(mask)} is outside the order-{2 * self.d} range on [{self.n}]")
        if self.by_size is not None:
            return self.by_size[s]
        return self.values.get(mask, Fraction(0))

    def total_mass(self) -> Fraction:
        return self[0]


def zeta_transform(p: PseudoDistribution, d: int) -> MomentVector:
    """``y_I = sum_{H >= I} p_H`` for all ``|I| <= 2d``."""
    order = min(2 * d, p.n)
    if p.profile is not None:
        smax = max((s for s, w in p.profile.items() if w != 0), default=0)
        seq = []
        for s in range(order + 1):
            seq.append(sum((Fraction(p.profile.get(j, 0)) * comb(p.n - s, j - s)
                            for j in range(s, smax + 1)), Fraction(0)))
        return MomentVector(p.n, d, {}, tuple(seq))
    values: dict[int, Fraction] = {}
    for h, w in p.weights.items():
        if w == 0:
            continue
        for sub in subsets_of(h, order):
            values[sub] = values.get(sub, Fraction(0)) + w
    return MomentVector(p.n, d, {k: v for k, v in values.items() if v != 0})


def mobius_transform(m: MomentVector) -> PseudoDistribution:
    """Recover ``p`` from a moment vector covering the full power set."""
    n = m.n
    if 2 * m.d < n:
        raise DomainError(f"moments of order {2 * m.d} do not cover the power set of [{n}]")
    if n > 24:
        raise CapacityError("Moebius inversion enumerates 2^n sets")
    size = 1 << n
    arr = [m[mask] for mask in range(size)]
    # superset Moebius: p_H = sum_{J >= H} (-1)^{|J \ H|} y_J
    for i in range(n):
        bit = 1 << i
        for mask in range(size):
            if not mask & bit:
                arr[mask] -= arr[mask | bit]
    return PseudoDistribution(n, {mask: v for mask, v in enumerate(arr) if v != 0})


def random_pseudo_distribution(n: int, rng, terms: int | None = None, max_size: int | None = None,
                               signed: bool = True, denominator: int = 12) -> PseudoDistribution:
    """Sparse random weights with small rational values; ``rng`` is a ``random.Random``."""
    if terms is None:
        terms = rng.randint(1, min(12, 1 << n))
    top = n if max_size is None else min(max_size, n)
    weights: dict[int, Fraction] = {}
    for _ in range(terms):
        size = rng.randint(0, top)
        mask = from_elements(rng.sample(range(n), size))
        lo = -denominator if signed else 1
        num = rng.randint(lo, denominator)
        if num:
            weights[mask] = weights.get(mask, Fraction(0)) + Fraction(num, rng.randint(1, denominator))
    return PseudoDistribution(n, {k: v for k, v in weights.items() if v != 0})
