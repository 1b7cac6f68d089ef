"""Skew-symmetric matrices over the exact scalar ring, pfaffians by two
independent algorithms, pfaffian minors, the Minor(n) enumeration, and the
pfaffian summation identity.

Index conventions are 1-based throughout: a MinorIndex is a strictly
increasing, even-length tuple of row/column labels in [1, n], with the empty
tuple allowed and pf over the empty index set defined as 1.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

from .errors import (
    BadIndexError,
    DimMismatchError,
    OddDimensionError,
    OracleLimitError,
)
from .exactnum import Scalar, as_scalar, eval_at, is_zero

MinorIndex = Tuple[int, ...]

_PERM_ORACLE_CAP = 12


class SkewMatrix:
    """n x n skew-symmetric matrix storing only the strict upper triangle.

    Entries may be any ring elements supporting +, -, * (Fractions,
    AlphaPolys, RatioScalars); zeros are not stored.
    """

    __slots__ = ("n", "upper")

    def __init__(self, n: int, upper=None):
        if n < 1:
            raise ValueError("dimension must be at least 1")
        self.n = n
        store = {}
        for (i, j), v in (upper or {}).items():
            if not (1 <= i < j <= n):
                raise BadIndexError(f"upper entry ({i},{j}) out of range for n={n}")
            if isinstance(v, int):
                v = Fraction(v)
            if not _entry_is_zero(v):
                store[(i, j)] = v
        self.upper = store

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "SkewMatrix":
        n = len(rows)
        upper = {}
        for i in range(n):
            if len(rows[i]) != n:
                raise DimMismatchError("ragged rows")
            for j in range(i + 1, n):
                upper[(i + 1, j + 1)] = rows[i][j]
        m = cls(n, upper)
        for i in range(n):
            for j in range(n):
                if m.entry(i + 1, j + 1) != as_entry(rows[i][j]):
                    raise ValueError(f"rows are not skew-symmetric at ({i+1},{j+1})")
        return m

    @classmethod
    def zero(cls, n: int) -> "SkewMatrix":
        return cls(n, {})

    def entry(self, i: int, j: int):
        if not (1 <= i <= self.n and 1 <= j <= self.n):
            raise BadIndexError(f"entry ({i},{j}) out of range for n={self.n}")
        if i == j:
            return Fraction(0)
        if i < j:
            return self.upper.get((i, j), Fraction(0))
        return -self.upper.get((j, i), Fraction(0))

    def rows(self) -> List[List]:
        return [[self.entry(i, j) for j in range(1, self.n + 1)] for i in range(1, self.n + 1)]

    def map_entries(self, f) -> "SkewMatrix":
        return SkewMatrix(self.n, {ij: f(v) for ij, v in self.upper.items()})

    def add(self, other: "SkewMatrix") -> "SkewMatrix":
        if self.n != other.n:
            raise DimMismatchError("dimension mismatch in add")
        keys = set(self.upper) | set(other.upper)
        return SkewMatrix(
            self.n,
            {ij: self.entry(*ij) + other.entry(*ij) for ij in keys},
        )

    def scale(self, c) -> "SkewMatrix":
        return self.map_entries(lambda v: v * c)

    def submatrix(self, I: Sequence[int]) -> "SkewMatrix":
        """Principal submatrix on rows/columns I, relabelled to 1..len(I)."""
        I = tuple(I)
        check_index_range(I, self.n)
        if len(I) == 0:
            raise BadIndexError("empty submatrix is not representable")
        upper = {}
        for a in range(len(I)):
            for b in range(a + 1, len(I)):
                v = self.entry(I[a], I[b])
                upper[(a + 1, b + 1)] = v
        return SkewMatrix(len(I), upper)

    def evaluate_at_alpha(self, point: Fraction) -> "SkewMatrix":
        """Exact rational specialization alpha -> point of every entry."""
        return self.map_entries(lambda v: eval_at(v, point))

    def to_float(self) -> List[List[float]]:
        out = [[0.0] * self.n for _ in range(self.n)]
        for (i, j), v in self.upper.items():
            out[i - 1][j - 1] = float(v)
            out[j - 1][i - 1] = -float(v)
        return out

    def __eq__(self, other):
        if not isinstance(other, SkewMatrix):
            return NotImplemented
        return self.n == other.n and self.upper == other.upper

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.upper.items(), key=lambda kv: kv[0]))))

    def __repr__(self):
        return f"SkewMatrix(n={self.n}, upper={self.upper!r})"


def as_entry(v):
    return Fraction(v) if isinstance(v, int) else v


def _entry_is_zero(v) -> bool:
    if isinstance(v, Fraction):
        return v == 0
    probe = getattr(v, "is_zero", None)
    return probe() if callable(probe) else False


def check_index_range(I: Sequence[int], n: int) -> None:
    prev = 0
    for i in I:
        if not isinstance(i, int) or i <= prev or i > n:
            raise BadIndexError(f"index tuple {tuple(I)} invalid for n={n}")
        prev = i


def check_minor_index(I: Sequence[int], n: int) -> MinorIndex:
    I = tuple(I)
    check_index_range(I, n)
    if len(I) % 2:
        raise BadIndexError(f"minor index {I} has odd length")
    return I


def enumerate_minors(n: int) -> List[MinorIndex]:
    """All even-length strictly increasing tuples in [1, n], empty included,
    ordered by length then lexicographically.  Exactly 2**(n-1) of them."""
    if n < 1:
        raise ValueError("n must be at least 1")
    out: List[MinorIndex] = [()]
    for p in range(1, n // 2 + 1):
        out.extend(itertools.combinations(range(1, n + 1), 2 * p))
    return out


def complement(I: Sequence[int], n: int) -> MinorIndex:
    """The complementary index tuple of I inside (1, ..., n)."""
    s = set(I)
    return tuple(i for i in range(1, n + 1) if i not in s)


def index_sum(I: Sequence[int]) -> int:
    return sum(I)


# -- pfaffian ----------------------------------------------------------------


def _pf_recursive(A: SkewMatrix, idx: MinorIndex, memo: Dict[MinorIndex, object]):
    # Expansion along the last row/column of the submatrix on idx.
    if idx in memo:
        return memo[idx]
    if not idx:
        return Fraction(1)
    if len(idx) == 2:
        val = A.entry(idx[0], idx[1])
        memo[idx] = val
        return val
    last = idx[-1]
    acc = None
    for p in range(len(idx) - 1):
        a = A.entry(idx[p], last)
        if isinstance(a, Fraction) and a == 0:
            continue
        rest = idx[:p] + idx[p + 1 : -1]
        term = a * _pf_recursive(A, rest, memo)
        if p % 2 == 1:
            term = -term
        acc = term if acc is None else acc + term
    if acc is None:
        acc = Fraction(0)
    memo[idx] = acc
    return acc


def pfaffian(A: SkewMatrix, odd_zero: bool = False):
    """Exact pfaffian via recursive last-column expansion.

    Odd dimension is an error unless odd_zero explicitly selects the
    convention pf := 0.
    """
    if A.n % 2:
        if odd_zero:
            return Fraction(0)
        raise OddDimensionError(f"pfaffian of odd dimension n={A.n}")
    return _pf_recursive(A, tuple(range(1, A.n + 1)), {})


def pfaffian_minor(A: SkewMatrix, I: Sequence[int]):
    """pf of the principal submatrix on I; pf over the empty tuple is 1."""
    I = check_minor_index(I, A.n)
    return _pf_recursive(A, I, {})


def all_minor_pfaffians(A: SkewMatrix) -> Dict[MinorIndex, object]:
    """Pfaffians of every I in Minor(n), sharing one memo table."""
    memo: Dict[MinorIndex, object] = {}
    return {I: _pf_recursive(A, I, memo) for I in enumerate_minors(A.n)}


def _matchings(items: Tuple[int, ...]):
    if not items:
        yield ()
        return
    first = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1 :]
        for sub in _matchings(rest):
            yield ((first, items[k]),) + sub


def _perm_sign(seq: Sequence[int]) -> int:
    inv = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                inv += 1
    return -1 if inv % 2 else 1


def pfaffian_perm(A: SkewMatrix):
    """Brute-force pfaffian: signed sum over the restricted permutations
    (perfect matchings).  Serves as the oracle for :func:`pfaffian`."""
    if A.n % 2:
        raise OddDimensionError(f"pfaffian of odd dimension n={A.n}")
    if A.n > _PERM_ORACLE_CAP:
        raise OracleLimitError(f"permutation oracle capped at n={_PERM_ORACLE_CAP}")
    acc = None
    for matching in _matchings(tuple(range(1, A.n + 1))):
        flat = [x for pair in matching for x in pair]
        term = _perm_sign(flat)
        for i, j in matching:
            term = term * A.entry(i, j)
        acc = term if acc is None else acc + term
    return acc if acc is not None else Fraction(1)


def pfaffian_sum_sides(A: SkewMatrix, B: SkewMatrix):
    """Both sides of the pfaffian summation identity for pf(A+B).

    Returns (pf(A+B), sum over I of (-1)**(sigma(I) - |I|/2) pf(A_I)
    pf(B_{I complement})); the two Scalars must agree.
    """
    if A.n != B.n:
        raise DimMismatchError("summation identity needs equal dimensions")
    if A.n % 2:
        raise OddDimensionError("summation identity needs even dimension")
    n = A.n
    lhs = pfaffian(A.add(B))
    pfA = all_minor_pfaffians(A)
    pfB = all_minor_pfaffians(B)
    rhs = None
    for I in enumerate_minors(n):
        sign = -1 if (index_sum(I) - len(I) // 2) % 2 else 1
        term = pfA[I] * pfB[complement(I, n)] * sign
        rhs = term if rhs is None else rhs + term
    return lhs, rhs


def z_matrix(n: int) -> SkewMatrix:
    """The skew matrix with every entry above the diagonal equal to 1."""
    if n < 2:
        raise ValueError("z_matrix needs n >= 2")
    return SkewMatrix(
        n, {(i, j): Fraction(1) for i in range(1, n + 1) for j in range(i + 1, n + 1)}
    )


# -- exact determinant (cross-check for pf**2 == det) -------------------------


def determinant(A: SkewMatrix):
    """Exact determinant by fraction-free (Bareiss) elimination.

    Supports integer and Fraction entries; the pfaffian cross-checks only
    ever need those.
    """
    rows = A.rows()
    n = A.n
    for r in rows:
        for v in r:
            if not isinstance(v, Fraction):
                raise TypeError("determinant cross-check requires rational entries")
    m = [[Fraction(v) for v in r] for r in rows]
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


# -- JSON wire format ----------------------------------------------------------


def skew_to_json(A: SkewMatrix) -> dict:
    from .exactnum import format_scalar

    entries = [
        {"i": i, "j": j, "value": format_scalar(v)}
        for (i, j), v in sorted(A.upper.items())
    ]
    return {"n": A.n, "entries": entries}


def skew_from_json(obj: dict) -> SkewMatrix:
    from .exactnum import parse_scalar

    if not isinstance(obj, dict) or "n" not in obj:
        raise ValueError("skew matrix JSON must carry field 'n'")
    n = obj["n"]
    if not isinstance(n, int) or n < 1:
        raise ValueError("field 'n' must be a positive integer")
    upper = {}
    for k, ent in enumerate(obj.get("entries", [])):
        for field in ("i", "j", "value"):
            if field not in ent:
                raise ValueError(f"entries[{k}] missing field '{field}'")
        i, j = ent["i"], ent["j"]
        if not (isinstance(i, int) and isinstance(j, int) and 1 <= i < j <= n):
            raise ValueError(f"entries[{k}] must satisfy 1 <= i < j <= n")
        if (i, j) in upper:
            raise ValueError(f"entries[{k}] duplicates ({i},{j})")
        upper[(i, j)] = parse_scalar(ent["value"])
    return SkewMatrix(n, upper)
