"""Positive semidefiniteness and inertia, exactly or in floating point.

The exact path is a symmetric LDL^T elimination over the rationals, pivoting on
the nonzero diagonal of smallest bit size.  A zero diagonal whose row is still
nonzero is eliminated as a 2x2 block ``[[0, a], [a, 0]]`` (one positive, one
negative eigenvalue).  Any negative pivot yields a witness ``v`` with
``v^T M v < 0`` by back-substitution through the stored multipliers.

The float path uses a symmetric eigensolver.  A negative float verdict is only
reported after the eigenvector has been re-evaluated exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
import numpy as np

from .moments import (
    EXACT,
    FLOAT,
    LinearConstraint,
    SymMatrix,
    constraint_moment_matrix,
    variable_moment_matrix,
)
from .subsets import (
    DomainError,
    MomentVector,
    PseudoDistribution,
    count_subsets,
    format_rational,
    to_labels,
    zeta_transform,
)

PSD = "PSD"
NOT_PSD = "NOT_PSD"
INCONCLUSIVE = "INCONCLUSIVE"

FEASIBLE = "FEASIBLE"
INFEASIBLE = "INFEASIBLE"

MAX_EXACT_DIM = 200
REL_MARGIN = 1e-8


@dataclass
class Inertia:
    status: str
    positive: int | None = None
    negative: int | None = None
    zero: int | None = None
    witness: list[Fraction] | None = None
    witness_value: Fraction | None = None
    lambda_min: float | None = None
    residual: float | None = None
    margin: float | None = None
    pivots: list[tuple] = field(default_factory=list)

    @property
    def counts(self) -> tuple[int, int, int]:
        return self.positive, self.negative, self.zero


def _to_mpq(x):
    if isinstance(x, Fraction):
        return gmpy2.mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        return gmpy2.mpq(Fraction(x).numerator, Fraction(x).denominator)
    return gmpy2.mpq(x)


def _to_fraction(x) -> Fraction:
    x = gmpy2.mpq(x)
    return Fraction(int(x.numerator), int(x.denominator))


def _check_symmetric(rows) -> None:
    dim = len(rows)
    for i in range(dim):
        for j in range(i + 1, dim):
            if rows[i][j] != rows[j][i]:
                raise DomainError(f"matrix is not symmetric at ({i}, {j})")


def _bits(x) -> int:
    return x.numerator.bit_length() + x.denominator.bit_length()


def exact_inertia(m: SymMatrix | np.ndarray | Sequence[Sequence]) -> Inertia:
    """Exact inertia of a rational symmetric matrix, with a witness if indefinite."""
    if isinstance(m, SymMatrix):
        if m.mode != EXACT:
            raise DomainError("exact_inertia needs an exact-mode matrix")
        raw = m.entries
    else:
        raw = np.asarray(m, dtype=object)
    dim = raw.shape[0]
    a = [[_to_mpq(raw[i, j]) for j in range(dim)] for i in range(dim)]
    _check_symmetric(a)

    active = list(range(dim))
    # each step: (pivot indices, block inverse or None, multipliers {row: coeffs})
    steps: list[tuple[tuple[int, ...], object, dict]] = []
    pos = neg = 0
    pivots: list[tuple] = []
    negative_step: int | None = None
    negative_u = None
    zero = gmpy2.mpq(0)

    while active:
        # smallest-bit-size nonzero pivot keeps entry growth in check
        best = None
        best_bits = 0
        for i in active:
            v = a[i][i]
            if v != 0:
                b = _bits(v)
                if best is None or b < best_bits:
                    best, best_bits = i, b
        if best is not None:
            p = best
            piv = a[p][p]
            active.remove(p)
            rest = [i for i in active if a[i][p] != 0]
            mult = {i: a[i][p] / piv for i in rest}
            for i in rest:
                li = mult[i]
                row_i = a[i]
                row_p = a[p]
                for j in rest:
                    if j >= i:
                        row_i[j] -= li * row_p[j]
                for j in rest:
                    if j > i:
                        a[j][i] = row_i[j]
            steps.append(((p,), None, mult))
            pivots.append(("1x1", p, piv))
            if piv > 0:
                pos += 1
            else:
                neg += 1
                if negative_step is None:
                    negative_step = len(steps) - 1
                    negative_u = (gmpy2.mpq(1),)
            continue
        pair = None
        for i in active:
            for j in active:
                if j > i and a[i][j] != 0:
                    pair = (i, j)
                    break
            if pair:
                break
        if pair is None:
            break
        p, q = pair
        off = a[p][q]
        active.remove(p)
        active.remove(q)
        # inverse of [[0, off], [off, 0]] is [[0, 1/off], [1/off, 0]]
        inv = 1 / off
        rest = [i for i in active if a[i][p] != 0 or a[i][q] != 0]
        mult = {i: (a[i][q] * inv, a[i][p] * inv) for i in rest}
        for i in rest:
            li_p, li_q = mult[i]
            for j in rest:
                if j >= i:
                    a[i][j] -= li_p * a[p][j] + li_q * a[q][j]
            for j in rest:
                if j > i:
                    a[j][i] = a[i][j]
        steps.append(((p, q), off, mult))
        pivots.append(("2x2", (p, q), off))
        pos += 1
        neg += 1
        if negative_step is None:
            negative_step = len(steps) - 1
            negative_u = (gmpy2.mpq(1), gmpy2.mpq(-1 if off > 0 else 1))

    zeros = dim - pos - neg
    result = Inertia(PSD if neg == 0 else NOT_PSD, pos, neg, zeros,
                     pivots=[(kind, idx, format_rational(_to_fraction(val))) for kind, idx, val in pivots])
    if negative_step is not None:
        v = [zero] * dim
        idx, _, _ = steps[negative_step]
        for k, u in zip(idx, negative_u):
            v[k] = u
        for s in range(negative_step - 1, -1, -1):
            sidx, block, mult = steps[s]
            if block is None:
                (p,) = sidx
                v[p] = -sum((mult[i] * v[i] for i in mult if v[i] != 0), zero)
            else:
                p, q = sidx
                v[p] = -sum((mult[i][0] * v[i] for i in mult if v[i] != 0), zero)
                v[q] = -sum((mult[i][1] * v[i] for i in mult if v[i] != 0), zero)
        witness = [_to_fraction(x) for x in v]
        result.witness = witness
        result.witness_value = quadratic_form_exact(raw, witness)
    return result


def quadratic_form_exact(raw, v: Sequence) -> Fraction:
    """``v^T M v`` in exact arithmetic; float entries are read as exact binary rationals."""
    raw = raw.entries if isinstance(raw, SymMatrix) else np.asarray(raw, dtype=object)
    vq = [_to_mpq(Fraction(x) if isinstance(x, float) else x) for x in v]
    nz = [i for i, x in enumerate(vq) if x != 0]
    total = gmpy2.mpq(0)
    for i in nz:
        row = raw[i]
        acc = gmpy2.mpq(0)
        for j in nz:
            acc += _to_mpq(row[j]) * vq[j]
        total += vq[i] * acc
    return _to_fraction(total)


def numeric_min_eigenvalue(m: SymMatrix, exact: SymMatrix | None = None) -> Inertia:
    """Float verdict with margin; negative verdicts are confirmed exactly."""
    arr = np.asarray(m.entries, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("matrix has non-finite entries")
    if not np.array_equal(arr, arr.T):
        raise DomainError("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(arr)
    lam = float(vals[0])
    vec = vecs[:, 0]
    residual = float(np.linalg.norm(arr @ vec - lam * vec))
    norm_inf = float(np.max(np.sum(np.abs(arr), axis=1))) if arr.size else 0.0
    margin = max(REL_MARGIN * norm_inf, residual)
    out = Inertia(INCONCLUSIVE, lambda_min=lam, residual=residual, margin=margin)
    if lam >= margin:
        out.status = PSD
        out.positive, out.negative, out.zero = arr.shape[0], 0, 0
    elif lam <= -margin:
        witness = [Fraction(float(x)) for x in vec]
        source = exact if exact is not None else m
        value = quadratic_form_exact(source.entries, witness)
        out.witness = witness
        out.witness_value = value
        if value < 0:
            out.status = NOT_PSD
    return out


def resolve_mode(mode: str, dim: int, max_exact_dim: int = MAX_EXACT_DIM) -> str:
    if mode == "auto":
        return EXACT if dim <= max_exact_dim else FLOAT
    if mode not in (EXACT, FLOAT):
        raise DomainError(f"unknown mode {mode!r}")
    return mode


def check_psd(m: SymMatrix, mode: str = "auto", max_exact_dim: int = MAX_EXACT_DIM) -> Inertia:
    """Dispatch on mode; ``m`` must be exact (the float path converts)."""
    resolved = resolve_mode(mode, m.dim, max_exact_dim)
    if resolved == EXACT:
        return exact_inertia(m)
    return numeric_min_eigenvalue(m.to_float(), exact=m if m.mode == EXACT else None)


def _witness_json(labels, witness) -> list[dict]:
    return [{"set": to_labels(lab), "value": format_rational(x)} for lab, x in zip(labels, witness) if x != 0]


def verdict_json(res: Inertia, labels=None, mode: str | None = None, fast_path: bool = False) -> dict:
    out = {"status": res.status, "fast_path": fast_path}
    if mode is not None:
        out["mode"] = mode
    if res.positive is not None:
        out["inertia"] = [res.positive, res.negative, res.zero]
    if res.lambda_min is not None:
        out["lambda_min"] = res.lambda_min
        out["margin"] = res.margin
        out["residual"] = res.residual
    else:
        out["lambda_min"] = None
    if res.witness is not None and labels is not None:
        out["witness"] = _witness_json(labels, res.witness)
        out["witness_value"] = format_rational(res.witness_value)
    return out


@dataclass
class VerificationReport:
    level: int
    n: int
    condition1: dict
    condition2: dict
    condition3: list[dict]
    overall: str
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "level": self.level,
            "n": self.n,
            "condition1": self.condition1,
            "condition2": self.condition2,
            "condition3": self.condition3,
            "overall": self.overall,
        }
        out.update(self.details)
        return out

    @property
    def statuses(self) -> list[str]:
        return [self.condition2["status"]] + [c["status"] for c in self.condition3]


def _termwise_nonnegative(p: PseudoDistribution, constraint: LinearConstraint | None) -> bool:
    for mask, w in p.weights.items():
        if w == 0:
            continue
        g = constraint.value(mask) if constraint is not None else 1
        if g * w < 0:
            return False
    return True


def verify_conditions(source: PseudoDistribution | MomentVector, constraints: Iterable[LinearConstraint],
                      t: int, mode: str = "auto", fast_path: bool = True,
                      max_exact_dim: int = MAX_EXACT_DIM) -> VerificationReport:
    """Check normalization, the order-(t+1) moment matrix and every constraint matrix.

    With ``fast_path`` a constraint whose weighted support is termwise
    nonnegative is accepted without factorization (a nonnegative sum of PSD rank
    ones).  The variable matrix takes this shortcut only above ``max_exact_dim``
    and never in explicit float mode.  Float-mode constraint matrices are rescaled by their
    largest coefficient first; positive scaling leaves the inertia unchanged.
    """
    constraints = list(constraints)
    if isinstance(source, PseudoDistribution):
        p = source
        moments = zeta_transform(p, t + 1)
        mass = p.total_mass()
    else:
        p = None
        moments = source
        mass = moments[0]
    n = moments.n
    for c in constraints:
        if any(i >= n for i in c.coeffs):
            raise DomainError("constraint refers to a variable outside the ground set")

    residual = mass - 1
    cond1 = {"mass": format_rational(mass), "residual": format_rational(residual),
             "status": "PASS" if residual == 0 else "FAIL"}

    dim2 = count_subsets(n, t + 1)
    mode2 = resolve_mode(mode, dim2, max_exact_dim)
    if (fast_path and p is not None and mode != FLOAT and dim2 > max_exact_dim
            and _termwise_nonnegative(p, None)):
        cond2 = {"status": PSD, "fast_path": True, "mode": mode2, "lambda_min": None, "dim": dim2}
    else:
        mat = variable_moment_matrix(moments, t)
        res = check_psd(mat, mode2, max_exact_dim)
        cond2 = verdict_json(res, mat.labels, mode2)
        cond2["dim"] = dim2

    cond3 = []
    dim3 = count_subsets(n, t)
    for idx, c in enumerate(constraints):
        mode3 = resolve_mode(mode, dim3, max_exact_dim)
        if fast_path and p is not None and _termwise_nonnegative(p, c):
            entry = {"status": PSD, "fast_path": True, "mode": mode3, "lambda_min": None}
        else:
            cc = c.scaled(1 / c.max_abs_coefficient()) if mode3 == FLOAT and c.max_abs_coefficient() else c
            mat = constraint_moment_matrix(moments, cc, t)
            res = check_psd(mat, mode3, max_exact_dim)
            entry = verdict_json(res, mat.labels, mode3)
        entry["constraint"] = idx
        entry["name"] = c.name
        entry["dim"] = dim3
        cond3.append(entry)

    statuses = [cond2["status"]] + [e["status"] for e in cond3]
    if cond1["status"] == "FAIL" or NOT_PSD in statuses:
        overall = INFEASIBLE
    elif INCONCLUSIVE in statuses:
        overall = INCONCLUSIVE
    else:
        overall = FEASIBLE
    return VerificationReport(t, n, cond1, cond2, cond3, overall)
