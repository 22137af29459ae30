"""Zeta vectors, shifted zeta matrices and their structured inverses.

All matrices are indexed by ``enumerate_subsets(n, d)`` on both axes and stored
as numpy object arrays of Python ints, so products are exact.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from math import comb

import numpy as np

from .subsets import (
    alt_binomial_sum,
    enumerate_subsets,
    fmt,
    format_rational,
    is_subset,
    popcount,
)


@dataclass(frozen=True)
class LatticeMatrix:
    n: int
    d: int
    shift: int
    labels: tuple[int, ...]
    entries: np.ndarray

    def __getitem__(self, key):
        return self.entries[key]

    @property
    def dim(self) -> int:
        return len(self.labels)


class ZetaMatrix(LatticeMatrix):
    """Entry (I, J) is 1 iff I is a subset of J xor shift."""


class CompanionMatrix(LatticeMatrix):
    """Entry (I, K) is (-1)^{|K & S|} iff I \\ S <= K <= I."""


def _int_matrix(dim: int) -> np.ndarray:
    return np.zeros((dim, dim), dtype=object)


def zeta_vector(mask: int, n: int, d: int) -> np.ndarray:
    """0/1 vector over P_d(n): entry J is 1 iff J is a subset of ``mask``."""
    return np.array([1 if is_subset(j, mask) else 0 for j in enumerate_subsets(n, d)], dtype=object)


def build_shifted_zeta(n: int, d: int, shift: int = 0) -> ZetaMatrix:
    labels = enumerate_subsets(n, d)
    z = _int_matrix(len(labels))
    for b, j in enumerate(labels):
        col = j ^ shift
        for a, i in enumerate(labels):
            if is_subset(i, col):
                z[a, b] = 1
    return ZetaMatrix(n, d, shift, labels, z)


def build_companion(n: int, d: int, shift: int = 0) -> CompanionMatrix:
    labels = enumerate_subsets(n, d)
    a_mat = _int_matrix(len(labels))
    for a, i in enumerate(labels):
        low = i & ~shift
        for b, k in enumerate(labels):
            if is_subset(low, k) and is_subset(k, i):
                a_mat[a, b] = -1 if popcount(k & shift) % 2 else 1
    return CompanionMatrix(n, d, shift, labels, a_mat)


def zeta_inverse(n: int, d: int) -> np.ndarray:
    """Inverse of the unshifted zeta matrix: (-1)^{|J \\ I|} on I <= J."""
    labels = enumerate_subsets(n, d)
    inv = _int_matrix(len(labels))
    for a, i in enumerate(labels):
        for b, j in enumerate(labels):
            if is_subset(i, j):
                inv[a, b] = -1 if popcount(j & ~i) % 2 else 1
    return inv


def invert_shifted_zeta(n: int, d: int, shift: int = 0) -> np.ndarray:
    """Inverse of the shifted zeta matrix via the companion factorization."""
    if shift == 0:
        return zeta_inverse(n, d)
    return zeta_inverse(n, d).dot(build_companion(n, d, shift).entries)


def closed_form_inverse_entry(i: int, j: int, shift: int, d: int) -> int:
    """Entry (I, J) of the shifted-zeta inverse without forming any matrix."""
    if not is_subset(i & ~shift, j):
        return 0
    sign = -1 if (popcount(j & shift) + popcount(j & ~i)) % 2 else 1
    union = i | j
    return sign * alt_binomial_sum(popcount(shift & ~union), d - popcount(union))


def generalized_binomial(top: int, bottom: int) -> int:
    """C(top, bottom) for any integer top; zero for negative bottom."""
    if bottom < 0:
        return 0
    if top >= 0:
        return comb(top, bottom)
    num = 1
    for r in range(bottom):
        num *= top - r
    den = 1
    for r in range(2, bottom + 1):
        den *= r
    return num // den


def single_binomial_inverse_entry(i: int, j: int, shift: int, d: int) -> int:
    """The closed form with the binomial's lower index d - |I & J|.

    Kept for comparison only: it disagrees with the true inverse on small cases
    (see tests), while :func:`closed_form_inverse_entry` does not.
    """
    if not is_subset(i & ~shift, j):
        return 0
    sign = -1 if (popcount(j & shift) + popcount(j & ~i)) % 2 else 1
    union = i | j
    tail_sign = -1 if (d - popcount(union)) % 2 else 1
    return sign * tail_sign * generalized_binomial(popcount(shift & ~union) - 1, d - popcount(i & j))


def identity(dim: int) -> np.ndarray:
    eye = _int_matrix(dim)
    for k in range(dim):
        eye[k, k] = 1
    return eye


def check_shift(n: int, d: int, shift: int) -> dict:
    """Run every identity for one shift; returns booleans keyed by check name."""
    z = build_shifted_zeta(n, d, shift)
    a_mat = build_companion(n, d, shift)
    z_d = build_shifted_zeta(n, d, 0)
    inv = invert_shifted_zeta(n, d, shift)
    eye = identity(z.dim)
    closed = np.array([[closed_form_inverse_entry(i, j, shift, d) for j in z.labels] for i in z.labels],
                      dtype=object)
    return {
        "inverse_right": bool(np.array_equal(z.entries.dot(inv), eye)),
        "inverse_left": bool(np.array_equal(inv.dot(z.entries), eye)),
        "companion": bool(np.array_equal(a_mat.entries.dot(z.entries), z_d.entries)),
        "closed_form": bool(np.array_equal(closed, inv)),
    }


def dump_csv(matrix: LatticeMatrix | np.ndarray, path, labels=None) -> None:
    """Write (row label, column label, exact value) triples, nonzeros only."""
    if isinstance(matrix, LatticeMatrix):
        labels = matrix.labels
        matrix = matrix.entries
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "value"])
        for a, i in enumerate(labels):
            for b, j in enumerate(labels):
                if matrix[a, b] != 0:
                    writer.writerow([fmt(i), fmt(j), format_rational(matrix[a, b])])
