"""Super-increasing generator matrices, total/strong irrationality and
non-degeneracy certificates, and trace-range lattices.

The concrete generator family Theta(n) places the monomial alpha**s_{i,j} at
entry (i,j), where s is a super-increasing integer sequence read off column
by column.  For a transcendental alpha these matrices are totally irrational,
and for alpha close enough to 1 (alpha**(2 s[n]) > 1/2) the interval
certificates established here show they are strongly totally irrational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import PrecisionExhaustedError, SeqTooShortError
from .exactnum import (
    AlphaEnclosure,
    AlphaPoly,
    IndependenceCertificate,
    RatInterval,
    Scalar,
    alpha_power,
    as_scalar,
    eval_interval,
    rational_independent,
)
from .skewpf import (
    MinorIndex,
    SkewMatrix,
    all_minor_pfaffians,
    enumerate_minors,
    pfaffian_minor,
)

DEFAULT_PRECISION_CAP = 4096


@dataclass(frozen=True)
class SuperIncreasingSeq:
    """Positive integers with s_1 = 1 and each term exceeding the sum of all
    previous ones."""

    s: tuple

    def __post_init__(self):
        s = tuple(int(v) for v in self.s)
        object.__setattr__(self, "s", s)
        if not s or s[0] != 1:
            raise ValueError("sequence must start with 1")
        total = 0
        for i, v in enumerate(s):
            if i > 0 and v <= total:
                raise ValueError(f"term {v} at position {i + 1} is not super-increasing")
            total += v

    def __len__(self):
        return len(self.s)

    def __getitem__(self, k):
        return self.s[k]


def default_sequence(terms: int) -> SuperIncreasingSeq:
    """The powers-of-two sequence s_i = 2**(i-1)."""
    return SuperIncreasingSeq(tuple(2 ** i for i in range(terms)))


def seq_position(i: int, j: int) -> int:
    """1-based position in s of the exponent placed at entry (i, j), i < j."""
    return (j - 1) * (j - 2) // 2 + i


def theta_supergen(n: int, s: SuperIncreasingSeq) -> SkewMatrix:
    """The n x n generator matrix with entry (i,j) = alpha**s_{(i,j)}."""
    need = n * (n - 1) // 2
    if len(s) < need:
        raise SeqTooShortError(f"need {need} terms, got {len(s)}")
    upper = {}
    for j in range(2, n + 1):
        for i in range(1, j):
            upper[(i, j)] = alpha_power(s[seq_position(i, j) - 1])
    return SkewMatrix(n, upper)


def top_exponent(n: int, s: SuperIncreasingSeq) -> int:
    """s[n], the exponent at the (n-1, n) entry."""
    return s[seq_position(n - 1, n) - 1]


# -- expansion structure --------------------------------------------------------


def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


@dataclass(frozen=True)
class ExpansionReport:
    n: int
    terms: tuple  # (exponent, coefficient) in decreasing exponent order
    expected_count: int
    ok: bool
    failures: tuple

    @property
    def count(self) -> int:
        return len(self.terms)


def pf_expansion_check(theta: SkewMatrix) -> ExpansionReport:
    """Expand pf(theta) for a generator matrix and verify the structure:
    (n-1)!! monomials, unit coefficients of alternating sign starting with +,
    strictly decreasing exponents."""
    n = theta.n
    if n % 2:
        raise ValueError("expansion check needs even dimension")
    pf = as_scalar(pfaffian_minor(theta, tuple(range(1, n + 1))))
    if isinstance(pf, Fraction):
        terms = ((0, pf),)
    else:
        terms = tuple(sorted(pf.terms, reverse=True))
    expected = _double_factorial(n - 1)
    failures = []
    if len(terms) != expected:
        failures.append(f"expected {expected} monomials, found {len(terms)}")
    want = Fraction(1)
    for k, (e, c) in enumerate(terms):
        if c != want:
            failures.append(f"term {k} (alpha^{e}) has coefficient {c}, wanted {want}")
            break
        want = -want
    for (e1, _), (e2, _) in zip(terms, terms[1:]):
        if not e1 > e2:
            failures.append(f"exponents not strictly decreasing at pair ({e1},{e2})")
            break
    return ExpansionReport(
        n=n,
        terms=terms,
        expected_count=expected,
        ok=not failures,
        failures=tuple(failures),
    )


# -- total irrationality ---------------------------------------------------------


@dataclass(frozen=True)
class TotalIrrationalityResult:
    totally_irrational: bool
    certificate: IndependenceCertificate
    minors: tuple

    def __bool__(self):
        return self.totally_irrational


def is_totally_irrational(theta: SkewMatrix) -> TotalIrrationalityResult:
    """True iff the pfaffian minors {pf(theta_I)}, I in Minor(n), are
    linearly independent over Q (the set includes pf over the empty tuple,
    which is 1)."""
    minors = enumerate_minors(theta.n)
    table = all_minor_pfaffians(theta)
    cert = rational_independent([table[I] for I in minors])
    return TotalIrrationalityResult(cert.independent, cert, tuple(minors))


# -- non-degeneracy ---------------------------------------------------------------


@dataclass(frozen=True)
class NondegeneracyResult:
    nondegenerate: bool
    witness: Optional[tuple]

    def __bool__(self):
        return self.nondegenerate


def _entry_components(theta: SkewMatrix):
    """Split theta = theta_rat + sum_e alpha^e M_e into the rational part and
    the integer-exponent coefficient matrices."""
    n = theta.n
    rat = [[Fraction(0)] * n for _ in range(n)]
    comps: Dict[int, list] = {}
    for (i, j), v in theta.upper.items():
        v = as_scalar(v)
        if isinstance(v, Fraction):
            rat[i - 1][j - 1] = v
            rat[j - 1][i - 1] = -v
        else:
            for e, c in v.terms:
                if e == 0:
                    rat[i - 1][j - 1] += c
                    rat[j - 1][i - 1] -= c
                else:
                    M = comps.setdefault(e, [[Fraction(0)] * n for _ in range(n)])
                    M[i - 1][j - 1] += c
                    M[j - 1][i - 1] -= c
    return rat, comps


def _rational_kernel(rows: List[List[Fraction]], n: int) -> List[List[Fraction]]:
    """Basis of the right kernel of the stacked row list, over Q."""
    m = [list(r) for r in rows]
    pivots = {}
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots[col] = r
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for col, row in pivots.items():
            vec[col] = -m[row][fc]
        basis.append(vec)
    return basis


def _primitive_int_vector(vec: List[Fraction]) -> List[int]:
    lcm = 1
    for v in vec:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    ints = [int(v * lcm) for v in vec]
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    return [v // g for v in ints] if g > 1 else ints


def is_nondegenerate(theta: SkewMatrix) -> NondegeneracyResult:
    """Decide whether the only integer vector x with theta x integral is 0.

    Splitting theta into its rational part and alpha-monomial coefficient
    matrices, theta x is integral iff every coefficient matrix kills x and
    the rational part maps x into the integer lattice; any nonzero rational
    solution scales to an integer witness.
    """
    n = theta.n
    rat, comps = _entry_components(theta)
    stacked = [row for M in comps.values() for row in M]
    if stacked:
        kernel = _rational_kernel(stacked, n)
    else:
        kernel = [[Fraction(1 if i == k else 0) for i in range(n)] for k in range(n)]
    if not kernel:
        return NondegeneracyResult(True, None)
    v = _primitive_int_vector(kernel[0])
    image = [sum(rat[i][j] * v[j] for j in range(n)) for i in range(n)]
    q = 1
    for w in image:
        q = q * w.denominator // math.gcd(q, w.denominator)
    witness = tuple(q * x for x in v)
    return NondegeneracyResult(False, witness)


# -- strong total irrationality ----------------------------------------------------


@dataclass(frozen=True)
class StiCheck:
    I: MinorIndex
    j: int
    ratio: RatInterval
    denominator_positive: bool
    passed: bool


@dataclass(frozen=True)
class STICertificate:
    passed: bool
    checks: tuple
    independence: IndependenceCertificate
    precision_bits: int
    assumption: str = "alpha is formally transcendental (assumed, not verified)"

    def __bool__(self):
        return self.passed

    def to_json(self) -> list:
        from .exactnum import format_scalar

        return [
            {
                "I": list(c.I),
                "j": c.j,
                "ratio_interval": [str(c.ratio.lo), str(c.ratio.hi)],
                "pass": c.passed,
            }
            for c in self.checks
        ]


def _certify_ratio_in_half_one(
    num: Scalar,
    den: Scalar,
    alpha: AlphaEnclosure,
    cap_bits: int,
) -> Tuple[bool, RatInterval, int]:
    """Certify num/den in (1/2, 1), or certify the negation.

    Returns (verdict, ratio interval, bits used); raises
    PrecisionExhaustedError when undecided at the cap.  The denominator is
    certified nonzero (in fact of constant sign) as a side effect.
    """
    bits = 64
    last = None
    while True:
        ni = eval_interval(num, alpha, bits)
        di = eval_interval(den, alpha, bits)
        if di.lo > 0 or di.hi < 0:
            if di.hi < 0:
                ni = RatInterval(-ni.hi, -ni.lo)
                di = RatInterval(-di.hi, -di.lo)
            quots = (ni.lo / di.lo, ni.lo / di.hi, ni.hi / di.lo, ni.hi / di.hi)
            ratio = RatInterval(min(quots), max(quots))
            last = ratio
            inside = 2 * ni.lo > di.hi and ni.hi < di.lo
            outside = 2 * ni.hi <= di.lo or ni.lo >= di.hi
            if inside:
                return True, ratio, bits
            if outside:
                return False, ratio, bits
        if bits >= cap_bits:
            raise PrecisionExhaustedError(
                f"ratio membership undecided at {bits} bits", interval=last
            )
        bits = min(2 * bits, cap_bits)


def is_strongly_totally_irrational(
    theta: SkewMatrix,
    alpha: AlphaEnclosure,
    precision_cap: int = DEFAULT_PRECISION_CAP,
) -> STICertificate:
    """Certificate that theta is strongly totally irrational.

    Total irrationality is checked first.  Then for every I in Minor(n) with
    |I| = 2m >= 2 and every j in 0..m-1, the ratio of consecutive leading
    pfaffian minors of theta restricted to I is interval-certified to lie in
    (1/2, 1); membership failure yields a failed certificate, undecidability
    at the precision cap raises PrecisionExhaustedError.
    """
    ti = is_totally_irrational(theta)
    if not ti.totally_irrational:
        return STICertificate(
            passed=False, checks=(), independence=ti.certificate, precision_bits=0
        )
    table = all_minor_pfaffians(theta)
    checks: List[StiCheck] = []
    max_bits = 0
    all_ok = True
    for I in enumerate_minors(theta.n):
        m = len(I) // 2
        if m == 0:
            continue
        for j in range(m):
            num = table[I[: 2 * j + 2]]
            den = table[I[: 2 * j]]
            ok, ratio, bits = _certify_ratio_in_half_one(num, den, alpha, precision_cap)
            max_bits = max(max_bits, bits)
            checks.append(
                StiCheck(I=I, j=j, ratio=ratio, denominator_positive=True, passed=ok)
            )
            all_ok = all_ok and ok
    return STICertificate(
        passed=all_ok,
        checks=tuple(checks),
        independence=ti.certificate,
        precision_bits=max_bits,
    )


# -- trace range -------------------------------------------------------------------


@dataclass(frozen=True)
class TraceLattice:
    """Generators {pf(theta_I)} of the trace-range subgroup of R, in canonical
    minor order; the halved flag marks the crossed-product case where every
    generator is conceptually divided by 2."""

    generators: tuple
    minors: tuple
    halved: bool

    def __post_init__(self):
        if len(self.generators) != len(self.minors):
            raise ValueError("generator/minor length mismatch")


def trace_range(theta: SkewMatrix, crossed: bool = False) -> TraceLattice:
    minors = tuple(enumerate_minors(theta.n))
    table = all_minor_pfaffians(theta)
    return TraceLattice(
        generators=tuple(as_scalar(table[I]) for I in minors),
        minors=minors,
        halved=crossed,
    )


# -- interval chain for the generator family -----------------------------------------


@dataclass(frozen=True)
class ChainLink:
    lower: str
    upper: str
    certified: bool
    lower_interval: RatInterval
    upper_interval: RatInterval


def certify_pfaffian_chain(
    n: int,
    s: SuperIncreasingSeq,
    alpha: AlphaEnclosure,
    precision_cap: int = DEFAULT_PRECISION_CAP,
) -> List[ChainLink]:
    """Interval certificates for the strict chain
    1/2 < pf(Theta(n)) < pf(Theta(n-2)) < ... < pf(Theta(2)) < 1."""
    from .exactnum import certify_less

    values = [(f"pf(Theta({k}))", pfaffian_minor(theta_supergen(k, s), tuple(range(1, k + 1))))
              for k in range(n, 1, -2)]
    links: List[ChainLink] = []
    # 1/2 < pf(Theta(n)) < pf(Theta(n-2)) < ... < pf(Theta(2)) < 1
    seq = [("1/2", Fraction(1, 2))] + values + [("1", Fraction(1))]
    for (name_a, va), (name_b, vb) in zip(seq, seq[1:]):
        ok, (ia, ib) = certify_less(va, vb, alpha, max_bits=precision_cap)
        links.append(
            ChainLink(
                lower=name_a,
                upper=name_b,
                certified=ok,
                lower_interval=ia,
                upper_interval=ib,
            )
        )
    return links
