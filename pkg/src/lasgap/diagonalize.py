"""Partial diagonalization of weighted zeta sums over a shifted collection.

For a shift ``S`` the collection ``C = {J ^ S : |J| <= d}`` has an invertible
zeta matrix, so

    sum_I w_I Z_I Z_I^T  ~  D + sum_{I not in C} w_I u_I u_I^T,   u_I = Z_{d(S)}^{-1} Z_I

by congruence, with ``D = diag(w_{J ^ S})``.  Every ``u_I`` is an integer vector.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .moments import EXACT, LinearConstraint, SymMatrix
from .subsets import (
    DomainError,
    PseudoDistribution,
    enumerate_subsets,
    is_subset,
    popcount,
    subsets_of,
    index_map,
)
from .zeta import build_companion, zeta_inverse


@dataclass(frozen=True)
class DiagonalizationResult:
    n: int
    d: int
    shift: int
    labels: tuple[int, ...]
    collection: tuple[int, ...]
    diagonal: tuple[Fraction, ...]
    remainder: tuple[tuple[Fraction, tuple[int, ...]], ...]
    max_inverse_entry: int

    @property
    def dim(self) -> int:
        return len(self.labels)


def shifted_collection(n: int, d: int, shift: int) -> list[int]:
    return [j ^ shift for j in enumerate_subsets(n, d)]


def _weights(p: PseudoDistribution, weight: LinearConstraint | None) -> dict[int, Fraction]:
    out = {}
    for mask, y in p.weights.items():
        w = y if weight is None else y * weight.value(mask)
        if w != 0:
            out[mask] = w
    return out


def _inverse_factors(n: int, d: int, shift: int) -> tuple[np.ndarray, np.ndarray]:
    z_inv = np.array(zeta_inverse(n, d), dtype=np.int64)
    comp = np.array(build_companion(n, d, shift).entries, dtype=np.int64)
    return z_inv, comp


def partial_diagonalize(p: PseudoDistribution, d: int, shift: int = 0,
                        weight: LinearConstraint | None = None) -> DiagonalizationResult:
    n = p.n
    if shift >> n:
        raise DomainError("shift lies outside the ground set")
    labels = enumerate_subsets(n, d)
    collection = tuple(j ^ shift for j in labels)
    members = set(collection)
    w = _weights(p, weight)
    diagonal = tuple(w.get(c, Fraction(0)) for c in collection)

    outside = sorted((mask for mask in w if mask not in members), key=lambda m: (popcount(m), m))
    remainder: list[tuple[Fraction, tuple[int, ...]]] = []
    z_inv, comp = _inverse_factors(n, d, shift)
    max_entry = int(np.max(np.abs(z_inv @ comp))) if labels else 0
    if outside:
        pos = index_map(n, d)
        zeta = np.zeros((len(labels), len(outside)), dtype=np.int64)
        for col, mask in enumerate(outside):
            for sub in subsets_of(mask, d):
                zeta[pos[sub], col] = 1
        # Z_{d(S)}^{-1} = Z_d^{-1} A_{d(S)}, applied right to left
        vecs = z_inv @ (comp @ zeta)
        for col, mask in enumerate(outside):
            remainder.append((w[mask], tuple(int(x) for x in vecs[:, col])))
    return DiagonalizationResult(n, d, shift, labels, collection, diagonal, tuple(remainder), max_entry)


def reconstruct(res: DiagonalizationResult) -> SymMatrix:
    """``D + sum w u u^T`` as an exact matrix (terms grouped by weight)."""
    dim = res.dim
    grouped: dict[Fraction, np.ndarray] = {}
    for w, u in res.remainder:
        vec = np.array(u, dtype=object)
        acc = grouped.get(w)
        outer = np.outer(vec, vec)
        grouped[w] = outer if acc is None else acc + outer
    out = np.empty((dim, dim), dtype=object)
    out.fill(Fraction(0))
    for k, val in enumerate(res.diagonal):
        out[k, k] += val
    for w, acc in grouped.items():
        out = out + acc * w
    return SymMatrix(res.labels, out, EXACT)


def weyl_lower_bound(res: DiagonalizationResult) -> Fraction:
    """Lower bound on the smallest eigenvalue of the reconstruction.

    Positive-weight rank ones contribute at least 0; a negative-weight term
    ``w u u^T`` contributes its only nonzero eigenvalue ``w |u|^2``.
    """
    bound = min(res.diagonal) if res.diagonal else Fraction(0)
    for w, u in res.remainder:
        if w < 0:
            bound += w * sum(x * x for x in u)
    return bound


def norm_envelope(res: DiagonalizationResult) -> int:
    """Crude a-priori bound dim^3 * max|inverse entry|^2 on every |u_I|^2."""
    return res.dim ** 3 * res.max_inverse_entry ** 2


def max_remainder_norm(res: DiagonalizationResult) -> int:
    return max((sum(x * x for x in u) for _, u in res.remainder), default=0)


def rayleigh_form(v: Sequence, p: PseudoDistribution, c: LinearConstraint, t: int) -> Fraction:
    """Quadratic form of the constraint matrix at ``v`` when ``p`` lives on P_{t+1}(n).

    Uses the unshifted collection P_t(n): each (t+1)-set ``J`` contributes
    ``w_J (sum_{I < J} (-1)^{|I|} v_I)^2``.
    """
    labels = enumerate_subsets(p.n, t)
    if len(v) != len(labels):
        raise DomainError(f"vector has length {len(v)}, expected {len(labels)}")
    if p.max_support_size() > t + 1:
        raise DomainError(f"pseudo-distribution has support above size {t + 1}")
    pos = index_map(p.n, t)
    v = [Fraction(x) for x in v]
    total = Fraction(0)
    for mask, y in p.weights.items():
        if y == 0:
            continue
        w = y * c.value(mask)
        if popcount(mask) <= t:
            total += w * v[pos[mask]] ** 2
        else:
            s = sum(((-1) ** popcount(i) * v[pos[i]] for i in subsets_of(mask, t)), Fraction(0))
            total += w * s * s
    return total


def diagonal_witness(p: PseudoDistribution, c: LinearConstraint, d: int):
    """Negative diagonal direction when the whole support fits in P_d(n).

    Returns ``(I, v, value)`` with ``v`` the row of Z_d^{-1} at ``I`` and
    ``v^T M v = g(x_I) y_I < 0``, or ``None`` if no such ``I`` exists.
    """
    if p.max_support_size() > d:
        return None
    labels = enumerate_subsets(p.n, d)
    for i in labels:
        w = p.weight(i) * c.value(i)
        if w < 0:
            v = [(-1) ** popcount(j & ~i) if is_subset(i, j) else 0 for j in labels]
            return i, v, w
    return None
