"""K0 generator labels for the flip crossed product, phase bookkeeping for
the self-adjoint unitaries W_J, the inclusion-map expansion, exact-sequence
integer matrices with Smith-normal-form verification, and the isomorphism
decision and construction.

Basis conventions, fixed once for reproducibility: the class of the unit
comes first, then the labels (I, J) ordered by (|I|, lex I, |J|, lex J).
The literal string "1" stands for the unit class in basis lists.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import BadIsoMatrixError, DimMismatchError
from .exactnum import Scalar, as_scalar
from .irrational import is_totally_irrational
from .skewpf import (
    MinorIndex,
    SkewMatrix,
    all_minor_pfaffians,
    check_minor_index,
    complement,
    enumerate_minors,
    index_sum,
    pfaffian_minor,
)


@dataclass(frozen=True, order=True)
class GeneratorLabel:
    """Pair (I, J) labelling the projection class built from the minor I and
    the phase-corrected flip unitary indexed by J."""

    I: tuple
    J: tuple

    def sort_key(self):
        return (len(self.I), self.I, len(self.J), self.J)

    def to_json(self) -> dict:
        return {"I": list(self.I), "J": list(self.J)}


BasisElement = Union[str, GeneratorLabel]

UNIT: BasisElement = "1"


def i_complement(I: MinorIndex, n: int) -> Tuple[int, ...]:
    """The tail complement (i_last+1, ..., n); all of (1, ..., n) when I is
    empty."""
    if not I:
        return tuple(range(1, n + 1))
    return tuple(range(I[-1] + 1, n + 1))


def r_phase(J: Sequence[int], theta: SkewMatrix) -> Scalar:
    """Phase correction making e(r_J) U_J W self-adjoint:
    r_J = -(1/2) sum_{l<m} theta_{j_l j_m}."""
    J = tuple(J)
    acc: Scalar = Fraction(0)
    for a in range(len(J)):
        for b in range(a + 1, len(J)):
            acc = acc + theta.entry(J[a], J[b])
    return acc * Fraction(-1, 2)


def enumerate_generators(n: int) -> List[GeneratorLabel]:
    """All labels (I, J) with J a subsequence of the tail complement of I and
    |J| <= 2, in canonical order; exactly 3 * 2**(n-1) - 1 of them."""
    if n < 1:
        raise ValueError("n must be at least 1")
    out: List[GeneratorLabel] = []
    for I in enumerate_minors(n):
        comp = i_complement(I, n)
        out.append(GeneratorLabel(I, ()))
        for a in range(len(comp)):
            out.append(GeneratorLabel(I, (comp[a],)))
            for b in range(a + 1, len(comp)):
                out.append(GeneratorLabel(I, (comp[a], comp[b])))
    out.sort(key=GeneratorLabel.sort_key)
    return out


def crossed_basis(n: int) -> List[BasisElement]:
    """Ordered K0 basis of the crossed product: the unit class, then the
    generator labels."""
    return [UNIT] + list(enumerate_generators(n))


def crossed_basis_index(n: int) -> Dict[BasisElement, int]:
    return {b: k for k, b in enumerate(crossed_basis(n))}


@dataclass(frozen=True)
class K0Vector:
    """Integer coordinates over the ordered crossed-product basis."""

    n: int
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != 3 * 2 ** (self.n - 1):
            raise DimMismatchError("coordinate length must be 3*2^(n-1)")


def i2star_expand(I: Sequence[int], n: int) -> K0Vector:
    """Coordinates of the image of the minor class under the canonical
    inclusion into the crossed product: the empty minor maps to the unit
    class, and (i_1,..,i_{2p}) maps to

        2 (I, ()) - (I'', ()) + (I'', (i_{2p-1})) - (I'', (i_{2p}))
          + (I'', (i_{2p-1}, i_{2p}))

    with I'' = I minus its last two entries."""
    I = check_minor_index(I, n)
    index = crossed_basis_index(n)
    coords = [0] * (3 * 2 ** (n - 1))
    if not I:
        coords[index[UNIT]] = 1
        return K0Vector(n, tuple(coords))
    Ipp = I[:-2]
    a, b = I[-2], I[-1]
    coords[index[GeneratorLabel(I, ())]] += 2
    coords[index[GeneratorLabel(Ipp, ())]] -= 1
    coords[index[GeneratorLabel(Ipp, (a,))]] += 1
    coords[index[GeneratorLabel(Ipp, (b,))]] -= 1
    coords[index[GeneratorLabel(Ipp, (a, b))]] += 1
    return K0Vector(n, tuple(coords))


# -- integer matrices -----------------------------------------------------------


class IntMatrix:
    """Dense integer matrix with arbitrary-precision entries."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: Sequence[Sequence[int]]):
        self.data = tuple(tuple(int(v) for v in row) for row in data)
        self.rows = len(self.data)
        self.cols = len(self.data[0]) if self.data else 0
        if any(len(r) != self.cols for r in self.data):
            raise DimMismatchError("ragged integer matrix")

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, rows: int, cols: int) -> "IntMatrix":
        return cls([[0] * cols for _ in range(rows)])

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimMismatchError("matmul shape mismatch")
        return IntMatrix(
            [
                [
                    sum(self.data[i][t] * other.data[t][j] for t in range(self.cols))
                    for j in range(other.cols)
                ]
                for i in range(self.rows)
            ]
        )

    def __eq__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.data == other.data

    def __hash__(self):
        return hash(self.data)

    def transpose(self) -> "IntMatrix":
        return IntMatrix([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def column(self, j: int) -> Tuple[int, ...]:
        return tuple(self.data[i][j] for i in range(self.rows))

    def det(self) -> int:
        """Exact determinant by fraction-free elimination (square only)."""
        if self.rows != self.cols:
            raise DimMismatchError("determinant of non-square matrix")
        n = self.rows
        m = [list(r) for r in self.data]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if m[k][k] == 0:
                piv = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
                if piv is None:
                    return 0
                m[k], m[piv] = m[piv], m[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            prev = m[k][k]
        return sign * m[n - 1][n - 1]

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "data": [list(r) for r in self.data]}

    @classmethod
    def from_json(cls, obj: dict) -> "IntMatrix":
        for field in ("rows", "cols", "data"):
            if field not in obj:
                raise ValueError(f"integer matrix JSON missing field '{field}'")
        m = cls(obj["data"])
        if m.rows != obj["rows"] or m.cols != obj["cols"]:
            raise ValueError("field 'rows'/'cols' inconsistent with 'data'")
        return m

    def __repr__(self):
        return f"IntMatrix({self.rows}x{self.cols})"


def natsume_matrix(n: int) -> IntMatrix:
    """Integer matrix of the difference of the two crossed-product inclusions
    on K0, from the minor basis in dimension n-1 to the direct sum of the two
    crossed-product bases (the twisted copy stacked above the plain copy).

    Both blocks use the same expansion coefficients; the twisted block enters
    with +, the plain block with -.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    cols = enumerate_minors(n - 1)
    block = 3 * 2 ** (n - 2)
    data = [[0] * len(cols) for _ in range(2 * block)]
    for cidx, I in enumerate(cols):
        v = i2star_expand(I, n - 1).coords
        for r in range(block):
            data[r][cidx] = v[r]
            data[block + r][cidx] = -v[r]
    return IntMatrix(data)


# -- Smith and Hermite normal forms ------------------------------------------------


def smith_normal_form(M: IntMatrix) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """U, S, V with U M V = S diagonal, d_1 | d_2 | ..., and U, V unimodular
    (verified: |det| = 1)."""
    S = [list(r) for r in M.data]
    rows, cols = M.rows, M.cols
    U = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    V = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def swap_rows(a, b):
        S[a], S[b] = S[b], S[a]
        U[a], U[b] = U[b], U[a]

    def swap_cols(a, b):
        for r in S:
            r[a], r[b] = r[b], r[a]
        for r in V:
            r[a], r[b] = r[b], r[a]

    def add_row(dst, src, k):
        S[dst] = [x + k * y for x, y in zip(S[dst], S[src])]
        U[dst] = [x + k * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, k):
        for r in S:
            r[dst] += k * r[src]
        for r in V:
            r[dst] += k * r[src]

    def negate_row(a):
        S[a] = [-x for x in S[a]]
        U[a] = [-x for x in U[a]]

    t = 0
    while t < min(rows, cols):
        # locate a pivot
        piv = None
        for i in range(t, rows):
            for j in range(t, cols):
                if S[i][j] != 0:
                    if piv is None or abs(S[i][j]) < abs(S[piv[0]][piv[1]]):
                        piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            # clear column t
            dirty = False
            for i in range(t + 1, rows):
                if S[i][t] != 0:
                    q = S[i][t] // S[t][t]
                    add_row(i, t, -q)
                    if S[i][t] != 0:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if S[t][j] != 0:
                    q = S[t][j] // S[t][t]
                    add_col(j, t, -q)
                    if S[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
            if not dirty:
                break
        if S[t][t] < 0:
            negate_row(t)
        t += 1
    # enforce divisibility d_k | d_{k+1}
    k = min(rows, cols)
    changed = True
    while changed:
        changed = False
        for a in range(k - 1):
            da, db = S[a][a], S[a + 1][a + 1]
            if db != 0 and da != 0 and db % da != 0:
                # fold db into row a and rediagonalize the 2x2 corner
                add_col(a, a + 1, 1)
                while True:
                    if S[a + 1][a] != 0:
                        q = S[a + 1][a] // S[a][a] if S[a][a] != 0 else 0
                        add_row(a + 1, a, -q)
                        if S[a + 1][a] != 0:
                            swap_rows(a, a + 1)
                            continue
                    if S[a][a + 1] != 0:
                        q = S[a][a + 1] // S[a][a]
                        add_col(a + 1, a, -q)
                        if S[a][a + 1] != 0:
                            swap_cols(a, a + 1)
                            continue
                    break
                if S[a][a] < 0:
                    negate_row(a)
                if S[a + 1][a + 1] < 0:
                    negate_row(a + 1)
                changed = True
    Um, Sm, Vm = IntMatrix(U), IntMatrix(S), IntMatrix(V)
    if abs(Um.det()) != 1 or abs(Vm.det()) != 1:
        raise ArithmeticError("normal form transforms are not unimodular")
    if (Um @ M) @ Vm != Sm:
        raise ArithmeticError("normal form factorization check failed")
    return Um, Sm, Vm


def invariant_factors(M: IntMatrix) -> Tuple[int, ...]:
    _, S, _ = smith_normal_form(M)
    out = []
    for k in range(min(S.rows, S.cols)):
        if S.data[k][k] != 0:
            out.append(S.data[k][k])
    return tuple(out)


def hermite_normal_form(M: IntMatrix) -> IntMatrix:
    """Canonical row-style Hermite form of the row lattice of M: row echelon
    with positive pivots and entries above each pivot reduced into [0, pivot).
    Zero rows are dropped, so equal row lattices yield identical forms."""
    rows = [list(r) for r in M.data]
    nrow, ncol = len(rows), M.cols
    r = 0
    for col in range(ncol):
        # gcd-reduce all entries below/at r in this column into one pivot
        piv = None
        for i in range(r, nrow):
            if rows[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, nrow):
            while rows[i][col] != 0:
                q = rows[r][col] // rows[i][col]
                rows[r] = [a - q * b for a, b in zip(rows[r], rows[i])]
                rows[r], rows[i] = rows[i], rows[r]
        if rows[r][col] < 0:
            rows[r] = [-a for a in rows[r]]
        for i in range(r):
            q = rows[i][col] // rows[r][col]
            if q:
                rows[i] = [a - q * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return IntMatrix([row for row in rows[:r]])


# -- K-groups -----------------------------------------------------------------------


@dataclass(frozen=True)
class KGroups:
    rank_k0: int
    rank_k1: int
    basis: tuple
    invariant_factors_by_level: tuple


def k_groups(n: int) -> KGroups:
    """Ranks of K0 and K1 of the flip crossed product, computed by the
    inductive exact-sequence bookkeeping: at each level the inclusion matrix
    must be injective with unit invariant factors, the K0 rank is the free
    cokernel rank plus 2**(k-2), and K1 stays 0 from the base case."""
    if n < 2:
        raise ValueError("n must be at least 2")
    factors_by_level = []
    for k in range(2, n + 1):
        M = natsume_matrix(k)
        facs = invariant_factors(M)
        if len(facs) != 2 ** (k - 2):
            raise ArithmeticError(f"inclusion matrix not injective at level {k}")
        factors_by_level.append((k, facs))
    M = natsume_matrix(n)
    facs = factors_by_level[-1][1]
    coker_rank = M.rows - len(facs)
    rank_k0 = coker_rank + 2 ** (n - 2)
    rank_k1 = 0
    return KGroups(
        rank_k0=rank_k0,
        rank_k1=rank_k1,
        basis=tuple(crossed_basis(n)),
        invariant_factors_by_level=tuple(factors_by_level),
    )


# -- isomorphism machinery ------------------------------------------------------------


def translate_class_matrix(N: SkewMatrix) -> IntMatrix:
    """Basis-change matrix of an integer translate on the minor classes:
    column I holds the integer coordinates of the translated minor class of
    theta + N over the minor classes of theta, read off the pfaffian
    summation identity.  Unipotent with respect to the subset order, hence
    always unimodular."""
    n = N.n
    minors = enumerate_minors(n)
    pos = {I: k for k, I in enumerate(minors)}
    pfN = all_minor_pfaffians(N)
    data = [[0] * len(minors) for _ in range(len(minors))]
    for cidx, I in enumerate(minors):
        size = len(I)
        for K_pos in enumerate_minors(size) if size else [()]:
            picked = tuple(I[p - 1] for p in K_pos)
            co_pos = complement(K_pos, size)
            co = tuple(I[p - 1] for p in co_pos)
            sign = -1 if (index_sum(K_pos) - len(K_pos) // 2) % 2 else 1
            val = pfN[co]
            f = Fraction(val) if isinstance(val, int) else val
            if not isinstance(f, Fraction) or f.denominator != 1:
                raise ValueError("translate matrix needs integer skew N")
            data[pos[picked]][cidx] += sign * int(f)
    return IntMatrix(data)


def verify_trace_compatibility(
    C: IntMatrix, theta1: SkewMatrix, theta2: SkewMatrix
) -> bool:
    """Exact check that the candidate K0 matrix C intertwines the trace
    generators: sum_K C[K][I] pf(theta2_K) == pf(theta1_I) for every I."""
    minors = enumerate_minors(theta1.n)
    if C.rows != len(minors) or C.cols != len(minors):
        raise DimMismatchError("C has the wrong shape")
    pf1 = all_minor_pfaffians(theta1)
    pf2 = all_minor_pfaffians(theta2)
    for cidx, I in enumerate(minors):
        acc: Scalar = Fraction(0)
        for ridx, K in enumerate(minors):
            c = C.data[ridx][cidx]
            if c:
                acc = acc + as_scalar(pf2[K]) * c
        if acc != as_scalar(pf1[I]):
            return False
    return True


def crossed_iso_map(C: IntMatrix, n: int) -> IntMatrix:
    """Lift a K0 basis matrix C (minor classes, canonical order, fixing the
    unit column) to the crossed-product basis.

    The unit and the empty-minor labels are fixed; a label (I', J) with
    nonempty I' maps to the displayed combination of (I'', ()) classes, its
    own (I', J), and unit corrections weighted by the C column of I'.
    Unimodularity of the result is verified via the Smith form.
    """
    minors = enumerate_minors(n)
    mpos = {I: k for k, I in enumerate(minors)}
    if C.rows != len(minors) or C.cols != len(minors):
        raise DimMismatchError("C must be square over the minor basis")
    empty_col = C.column(mpos[()])
    if any(v != (1 if k == mpos[()] else 0) for k, v in enumerate(empty_col)):
        raise BadIsoMatrixError("C does not fix the class of the unit")
    basis = crossed_basis(n)
    bpos = crossed_basis_index(n)
    dim = len(basis)
    data = [[0] * dim for _ in range(dim)]

    def col_of(elem: BasisElement) -> int:
        return bpos[elem]

    for elem in basis:
        c = col_of(elem)
        if elem == UNIT:
            data[bpos[UNIT]][c] = 1
            continue
        assert isinstance(elem, GeneratorLabel)
        Ip, J = elem.I, elem.J
        if not Ip:
            data[bpos[elem]][c] = 1
            continue
        col = C.column(mpos[Ip])
        for ridx, Ipp in enumerate(minors):
            coeff = col[ridx]
            if coeff == 0 or Ipp == Ip or Ipp == ():
                continue
            data[bpos[GeneratorLabel(Ipp, ())]][c] += coeff
        data[bpos[GeneratorLabel(Ip, J)]][c] += 1
        data[bpos[GeneratorLabel(Ip, ())]][c] += col[mpos[Ip]] - 1
        c_empty = col[mpos[()]]
        data[bpos[UNIT]][c] += c_empty
        data[bpos[GeneratorLabel((), ())]][c] -= c_empty
    out = IntMatrix(data)
    facs = invariant_factors(out)
    if len(facs) != dim or any(f != 1 for f in facs):
        raise ArithmeticError("lifted map is not unimodular")
    return out


def crossed_trace_vector(theta: SkewMatrix) -> List[Scalar]:
    """Twice the canonical crossed-product trace of each basis element, as
    exact Scalars: 2 for the unit class, pf(theta_I) for a label (I, J)."""
    table = all_minor_pfaffians(theta)
    out: List[Scalar] = []
    for elem in crossed_basis(theta.n):
        if elem == UNIT:
            out.append(as_scalar(Fraction(2)))
        else:
            out.append(as_scalar(table[elem.I]))
    return out


def verify_crossed_trace_identity(
    F: IntMatrix, theta1: SkewMatrix, theta2: SkewMatrix
) -> bool:
    """Exact check that the lifted map intertwines the halved traces: for
    every basis column b, sum_r F[r][b] * tr2[r] == tr1[b] (computed with
    both sides doubled to stay division-free)."""
    tr1 = crossed_trace_vector(theta1)
    tr2 = crossed_trace_vector(theta2)
    dim = len(tr1)
    if F.rows != dim or F.cols != dim:
        raise DimMismatchError("lifted map has the wrong shape")
    for b in range(dim):
        acc: Scalar = Fraction(0)
        for r in range(dim):
            c = F.data[r][b]
            if c:
                acc = acc + tr2[r] * c
        if acc != tr1[b]:
            return False
    return True


class IsoVerdict(enum.Enum):
    EQUAL = "Equal"
    NOT_EQUAL = "NotEqual"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class IsoDecision:
    verdict: IsoVerdict
    reason: str
    hnf1: Optional[IntMatrix] = None
    hnf2: Optional[IntMatrix] = None


def _lattice_hnf(gen_sets: List[List[Scalar]]):
    """Common-denominator integer row matrices of several generator sets over
    the union monomial basis, followed by canonical row Hermite forms."""
    from .exactnum import AlphaPoly

    exps = set()
    denom = 1
    for gens in gen_sets:
        for g in gens:
            g = as_scalar(g)
            if isinstance(g, Fraction):
                exps.add(0)
                denom = denom * g.denominator // math.gcd(denom, g.denominator)
            else:
                for e, c in g.terms:
                    exps.add(e)
                    denom = denom * c.denominator // math.gcd(denom, c.denominator)
    cols = sorted(exps)
    cpos = {e: k for k, e in enumerate(cols)}
    out = []
    for gens in gen_sets:
        rows = []
        for g in gens:
            g = as_scalar(g)
            row = [0] * len(cols)
            if isinstance(g, Fraction):
                row[cpos[0]] = int(g * denom)
            else:
                for e, c in g.terms:
                    row[cpos[e]] = int(c * denom)
            rows.append(row)
        out.append(hermite_normal_form(IntMatrix(rows)))
    return out


def iso_decide(theta1: SkewMatrix, theta2: SkewMatrix) -> IsoDecision:
    """Decide isomorphism of the flip crossed products by comparing the
    trace-range lattices as subgroups of R.

    Requires at least one input to be totally irrational; otherwise the
    verdict is Inconclusive (the criterion is only two-sided under that
    hypothesis).
    """
    if theta1.n != theta2.n:
        raise DimMismatchError("matrices must have equal dimension")
    ti1 = is_totally_irrational(theta1)
    ti2 = is_totally_irrational(theta2)
    if not (ti1.totally_irrational or ti2.totally_irrational):
        return IsoDecision(
            verdict=IsoVerdict.INCONCLUSIVE,
            reason="neither matrix certified totally irrational",
        )
    gens1 = [as_scalar(v) for v in all_minor_pfaffians(theta1).values()]
    gens2 = [as_scalar(v) for v in all_minor_pfaffians(theta2).values()]
    h1, h2 = _lattice_hnf([gens1, gens2])
    if h1 == h2:
        return IsoDecision(
            verdict=IsoVerdict.EQUAL,
            reason="trace-range lattices coincide",
            hnf1=h1,
            hnf2=h2,
        )
    return IsoDecision(
        verdict=IsoVerdict.NOT_EQUAL,
        reason="trace-range lattices differ",
        hnf1=h1,
        hnf2=h2,
    )
