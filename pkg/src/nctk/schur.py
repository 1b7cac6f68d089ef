"""Pfaffian Schur-complement reduction, its closed-form iterates, the
pfaffian factorization checks, and the integer SO(n,n|Z) action generators.

Ratios of Scalars never collapse into a fraction field: a RatioScalar keeps
an explicit (numerator, denominator) pair of Scalars, denominators are
certified nonzero on construction, and every identity is verified after
cross-multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from .errors import (
    DimMismatchError,
    SingularBlockError,
    SingularLeadingMinorError,
    UndefinedActionError,
)
from .exactnum import AlphaPoly, Scalar, as_scalar, is_zero
from .skewpf import (
    MinorIndex,
    SkewMatrix,
    all_minor_pfaffians,
    enumerate_minors,
    pfaffian,
    pfaffian_minor,
)


class RatioScalar:
    """Exact ratio num/den of Scalars with den certified nonzero.

    Rational denominators are folded into the numerator immediately, so pure
    rational arithmetic never accumulates spurious denominators.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=Fraction(1)):
        num = _coerce(num)
        den = _coerce(den)
        if isinstance(den, Fraction):
            if den == 0:
                raise ZeroDivisionError("RatioScalar denominator is zero")
            num, den = num * (1 / den), Fraction(1)
        if isinstance(num, Fraction) and num == 0:
            den = Fraction(1)
        self.num = num
        self.den = den

    def is_zero(self) -> bool:
        return isinstance(self.num, Fraction) and self.num == 0

    def as_scalar(self) -> Scalar:
        """The underlying Scalar when the denominator is trivial."""
        if isinstance(self.den, Fraction):
            return self.num * (1 / self.den) if self.den != 1 else self.num
        raise ValueError("ratio has a non-rational denominator")

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = as_ratio(other)
        if self.den == other.den:
            return RatioScalar(self.num + other.num, self.den)
        return RatioScalar(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return RatioScalar(-self.num, self.den)

    def __sub__(self, other):
        return self + (-as_ratio(other))

    def __rsub__(self, other):
        return as_ratio(other) + (-self)

    def __mul__(self, other):
        other = as_ratio(other)
        return RatioScalar(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_ratio(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero RatioScalar")
        return RatioScalar(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return as_ratio(other) / self

    def __eq__(self, other):
        if isinstance(other, (RatioScalar, int, Fraction, AlphaPoly)):
            other = as_ratio(other)
            return self.num * other.den == other.num * self.den
        return NotImplemented

    def __hash__(self):
        if isinstance(self.den, Fraction):
            return hash(self.as_scalar())
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RatioScalar({self.num!r}, {self.den!r})"


def _coerce(v):
    if isinstance(v, RatioScalar):
        raise TypeError("nested RatioScalar; use as_ratio")
    if isinstance(v, int):
        return Fraction(v)
    return v


def as_ratio(v) -> RatioScalar:
    if isinstance(v, RatioScalar):
        return v
    return RatioScalar(v)


def ratio_matrix(A: SkewMatrix) -> SkewMatrix:
    """Coerce every entry of A to RatioScalar."""
    return A.map_entries(as_ratio)


# -- Schur complement ----------------------------------------------------------


def schur_f(theta: SkewMatrix) -> SkewMatrix:
    """One pfaffian Schur-complement step with respect to the leading 2x2
    block: the (n-2) x (n-2) matrix whose (j,k) entry is
    pf(theta on (1,2,j+2,k+2)) / theta_12."""
    if theta.n < 3:
        raise DimMismatchError("schur_f needs n >= 3")
    t12 = as_ratio(theta.entry(1, 2))
    if t12.is_zero():
        raise SingularBlockError("theta_12 = 0: leading 2x2 block is singular")
    m = theta.n - 2
    upper = {}
    for j in range(1, m + 1):
        for k in range(j + 1, m + 1):
            num = _ratio_pf_minor(theta, (1, 2, j + 2, k + 2))
            upper[(j, k)] = num / t12
    return SkewMatrix(m, upper)


def _ratio_pf_minor(A: SkewMatrix, I: Sequence[int]) -> RatioScalar:
    val = pfaffian_minor(ratio_matrix(A), I)
    return as_ratio(val)


def schur_complement_direct(theta: SkewMatrix) -> SkewMatrix:
    """Independent oracle for schur_f: the block formula
    theta_22 - theta_21 theta_11^{-1} theta_12 evaluated with explicit
    2x2-inverse fraction arithmetic."""
    if theta.n < 3:
        raise DimMismatchError("needs n >= 3")
    t12 = as_ratio(theta.entry(1, 2))
    if t12.is_zero():
        raise SingularBlockError("theta_12 = 0")
    m = theta.n - 2
    inv11 = [[as_ratio(0), RatioScalar(-1) / t12], [RatioScalar(1) / t12, as_ratio(0)]]
    upper = {}
    for j in range(1, m + 1):
        for k in range(j + 1, m + 1):
            # row j of theta_21 is (theta_{j+2,1}, theta_{j+2,2})
            acc = as_ratio(theta.entry(j + 2, k + 2))
            for a in range(2):
                for b in range(2):
                    acc = acc - (
                        as_ratio(theta.entry(j + 2, a + 1))
                        * inv11[a][b]
                        * as_ratio(theta.entry(b + 1, k + 2))
                    )
            upper[(j, k)] = acc
    return SkewMatrix(m, upper)


def f_power_closed(theta: SkewMatrix, m: int) -> SkewMatrix:
    """Closed-form m-fold Schur iterate: entry (j,k) is
    pf(theta on (1,..,2m,2m+j,2m+k)) / pf(theta on (1,..,2m)).

    Requires even n = 2l, 0 <= m <= l-1, and nonvanishing leading minors
    pf(theta on (1,..,2s)) for s = 1..m.
    """
    if theta.n % 2:
        raise DimMismatchError("closed-form iterate needs even dimension")
    l = theta.n // 2
    if m == 0:
        return ratio_matrix(theta)
    if not (1 <= m <= l - 1):
        raise ValueError(f"m must lie in [0, {l - 1}]")
    for s in range(1, m + 1):
        lead = pfaffian_minor(theta, tuple(range(1, 2 * s + 1)))
        if is_zero(as_scalar_maybe(lead)):
            raise SingularLeadingMinorError(s)
    sp = 2 * m
    den = _ratio_pf_minor(theta, tuple(range(1, sp + 1)))
    size = theta.n - sp
    upper = {}
    for j in range(1, size + 1):
        for k in range(j + 1, size + 1):
            num = _ratio_pf_minor(theta, tuple(range(1, sp + 1)) + (sp + j, sp + k))
            upper[(j, k)] = num / den
    return SkewMatrix(size, upper)


def as_scalar_maybe(v):
    if isinstance(v, RatioScalar):
        return v.num if isinstance(v.den, Fraction) else v
    return as_scalar(v)


def iterate_schur(theta: SkewMatrix, m: int) -> SkewMatrix:
    """m-fold application of schur_f via explicit fraction arithmetic."""
    out = ratio_matrix(theta)
    for _ in range(m):
        out = schur_f(out)
    return out


@dataclass(frozen=True)
class PfFactorization:
    pf_full: object
    pf_block: object
    pf_schur: RatioScalar
    minor_checks: int


def pf_factorization_check(theta: SkewMatrix) -> PfFactorization:
    """Verify pf(theta) = pf(theta_11) pf(F(theta)) and the analogous
    identity for every nonempty minor of the reduced matrix; raises
    ArithmeticError on any mismatch (which would indicate a bug, not bad
    input)."""
    if theta.n % 2:
        raise DimMismatchError("factorization needs even dimension")
    t12 = theta.entry(1, 2)
    pf_full = pfaffian(ratio_matrix(theta))
    if theta.n == 2:
        return PfFactorization(pf_full, t12, as_ratio(1), 0)
    F = schur_f(theta)
    pf_schur = as_ratio(pfaffian(F))
    lhs = as_ratio(pf_full)
    rhs = as_ratio(t12) * pf_schur
    if lhs != rhs:
        raise ArithmeticError("pfaffian factorization identity failed")
    checks = 0
    for Ip in enumerate_minors(F.n):
        if not Ip:
            continue
        big = (1, 2) + tuple(i + 2 for i in Ip)
        left = as_ratio(t12) * as_ratio(pfaffian_minor(F, Ip))
        right = _ratio_pf_minor(theta, big)
        if left != right:
            raise ArithmeticError(f"submatrix factorization failed at I'={Ip}")
        checks += 1
    return PfFactorization(pf_full, t12, pf_schur, checks)


# -- SO(n,n|Z) ------------------------------------------------------------------


def _int_rows(M: Sequence[Sequence[int]]) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(int(v) for v in row) for row in M)


def _mat_mul_int(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return tuple(
        tuple(sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m))
        for i in range(n)
    )


def _mat_t(A):
    return tuple(tuple(A[i][j] for i in range(len(A))) for j in range(len(A[0])))


def _is_zero_mat(A) -> bool:
    return all(v == 0 for row in A for v in row)


def _is_identity(A) -> bool:
    return all(v == (1 if i == j else 0) for i, row in enumerate(A) for j, v in enumerate(row))


@dataclass(frozen=True)
class SOElement:
    """Block matrix [[A,B],[C,D]] of n x n integer blocks satisfying the
    defining relations A^t C + C^t A = 0, B^t D + D^t B = 0,
    A^t D + C^t B = id."""

    A: tuple
    B: tuple
    C: tuple
    D: tuple

    def __post_init__(self):
        A, B, C, D = map(_int_rows, (self.A, self.B, self.C, self.D))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        n = len(A)
        for blk in (A, B, C, D):
            if len(blk) != n or any(len(r) != n for r in blk):
                raise DimMismatchError("blocks must be square of equal size")
        s1 = _mat_add(_mat_mul_int(_mat_t(A), C), _mat_mul_int(_mat_t(C), A))
        s2 = _mat_add(_mat_mul_int(_mat_t(B), D), _mat_mul_int(_mat_t(D), B))
        s3 = _mat_add(_mat_mul_int(_mat_t(A), D), _mat_mul_int(_mat_t(C), B))
        if not _is_zero_mat(s1) or not _is_zero_mat(s2) or not _is_identity(s3):
            raise ValueError("blocks do not satisfy the SO(n,n|Z) relations")

    @property
    def n(self) -> int:
        return len(self.A)

    def compose(self, other: "SOElement") -> "SOElement":
        A = _mat_add(_mat_mul_int(self.A, other.A), _mat_mul_int(self.B, other.C))
        B = _mat_add(_mat_mul_int(self.A, other.B), _mat_mul_int(self.B, other.D))
        C = _mat_add(_mat_mul_int(self.C, other.A), _mat_mul_int(self.D, other.C))
        D = _mat_add(_mat_mul_int(self.C, other.B), _mat_mul_int(self.D, other.D))
        return SOElement(A, B, C, D)


def _mat_add(A, B):
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def _ident(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def _zeros(n):
    return tuple(tuple(0 for _ in range(n)) for _ in range(n))


def rho(R: Sequence[Sequence[int]]) -> SOElement:
    """[[R, 0], [0, (R^-1)^t]] for unimodular integer R; acts by R theta R^t."""
    R = _int_rows(R)
    Rinv = _int_inverse(R)
    return SOElement(R, _zeros(len(R)), _zeros(len(R)), _mat_t(Rinv))


def mu(N: SkewMatrix) -> SOElement:
    """[[id, N], [0, id]] for integer skew N; acts by theta + N."""
    rows = N.rows()
    intN = []
    for r in rows:
        out = []
        for v in r:
            f = Fraction(v) if isinstance(v, int) else v
            if not isinstance(f, Fraction) or f.denominator != 1:
                raise ValueError("mu needs an integer skew matrix")
            out.append(int(f))
        intN.append(tuple(out))
    n = N.n
    return SOElement(_ident(n), tuple(intN), _zeros(n), _ident(n))


def sigma_2p(n: int, p: int) -> SOElement:
    """The block swap exchanging the leading 2p coordinates with their duals."""
    if not (1 <= 2 * p <= n):
        raise ValueError("need 1 <= 2p <= n")
    q = n - 2 * p
    A = tuple(
        tuple(1 if (i == j and i >= 2 * p) else 0 for j in range(n)) for i in range(n)
    )
    B = tuple(
        tuple(1 if (i == j and i < 2 * p) else 0 for j in range(n)) for i in range(n)
    )
    return SOElement(A, B, B, A)


def _int_inverse(R):
    n = len(R)
    m = [[Fraction(R[i][j]) for j in range(n)] + [Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ValueError("matrix not invertible")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            v = m[i][n + j]
            if v.denominator != 1:
                raise ValueError("matrix is not unimodular over Z")
            row.append(int(v))
        out.append(tuple(row))
    return tuple(out)


def _ratio_mat_inverse(M: List[List[RatioScalar]]) -> List[List[RatioScalar]]:
    n = len(M)
    aug = [[M[i][j] for j in range(n)] + [as_ratio(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not aug[r][col].is_zero()), None)
        if piv is None:
            raise UndefinedActionError("singular matrix in group action")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = as_ratio(1) / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def so_nn_act(g: SOElement, theta: SkewMatrix) -> SkewMatrix:
    """(A theta + B)(C theta + D)^{-1}, exact over ratio arithmetic."""
    n = theta.n
    if g.n != n:
        raise DimMismatchError("group element dimension mismatch")
    th = [[as_ratio(theta.entry(i + 1, j + 1)) for j in range(n)] for i in range(n)]

    def affine(P, Q):
        return [
            [
                sum((as_ratio(P[i][t]) * th[t][j] for t in range(n)), as_ratio(Q[i][j]))
                for j in range(n)
            ]
            for i in range(n)
        ]

    top = affine(g.A, g.B)
    bot = affine(g.C, g.D)
    bot_inv = _ratio_mat_inverse(bot)
    prod = [
        [sum((top[i][t] * bot_inv[t][j] for t in range(n)), as_ratio(0)) for j in range(n)]
        for i in range(n)
    ]
    upper = {}
    for i in range(n):
        for j in range(i + 1, n):
            if prod[i][j] != -prod[j][i]:
                raise ArithmeticError("action result is not skew-symmetric")
            upper[(i + 1, j + 1)] = prod[i][j]
    return SkewMatrix(n, upper)


def sigma_theta_blocks(theta: SkewMatrix, p: int) -> SkewMatrix:
    """Block-formula oracle for the sigma_2p action:
    [[theta_11^{-1}, -theta_11^{-1} theta_12],
     [theta_21 theta_11^{-1}, theta_22 - theta_21 theta_11^{-1} theta_12]]."""
    n = theta.n
    k = 2 * p
    blk = [[as_ratio(theta.entry(i + 1, j + 1)) for j in range(k)] for i in range(k)]
    inv11 = _ratio_mat_inverse(blk)
    out = [[as_ratio(0) for _ in range(n)] for _ in range(n)]
    for i in range(k):
        for j in range(k):
            out[i][j] = inv11[i][j]
    for i in range(k):
        for j in range(k, n):
            out[i][j] = -sum(
                (inv11[i][t] * as_ratio(theta.entry(t + 1, j + 1)) for t in range(k)),
                as_ratio(0),
            )
    for i in range(k, n):
        for j in range(k):
            out[i][j] = sum(
                (as_ratio(theta.entry(i + 1, t + 1)) * inv11[t][j] for t in range(k)),
                as_ratio(0),
            )
    for i in range(k, n):
        for j in range(k, n):
            acc = as_ratio(theta.entry(i + 1, j + 1))
            for a in range(k):
                for b in range(k):
                    acc = acc - (
                        as_ratio(theta.entry(i + 1, a + 1))
                        * inv11[a][b]
                        * as_ratio(theta.entry(b + 1, j + 1))
                    )
            out[i][j] = acc
    upper = {}
    for i in range(n):
        for j in range(i + 1, n):
            if out[i][j] != -out[j][i]:
                raise ArithmeticError("block formula produced a non-skew matrix")
            upper[(i + 1, j + 1)] = out[i][j]
    return SkewMatrix(n, upper)
