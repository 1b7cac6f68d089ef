"""Exact scalar tower.

A Scalar is either a ``fractions.Fraction`` or an :class:`AlphaPoly`, a sparse
polynomial with rational coefficients in a single formal transcendental
``alpha``.  Transcendence of alpha is an assumption recorded in certificates,
never verified: all algebraic decisions reduce to linear algebra over the
rationals on the coefficient vectors.

There is deliberately no division on Scalars.  Callers that need ratios keep
explicit (numerator, denominator) pairs; see :mod:`nctk.schur`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Rational = Fraction


def _fr(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not a rational value: {x!r}")


@dataclass(frozen=True)
class AlphaPoly:
    """Sparse polynomial sum(c_e * alpha**e) with Fraction coefficients.

    ``terms`` holds (exponent, coefficient) pairs with strictly increasing
    non-negative exponents and no zero coefficients.  A poly that would
    collapse to a constant must be represented as a plain Fraction instead;
    use :func:`alpha_poly` to build values with that normalization applied.
    """

    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise ValueError("empty AlphaPoly; use Fraction(0)")
        prev = -1
        for e, c in self.terms:
            if not isinstance(e, int) or e < 0:
                raise ValueError(f"bad exponent {e!r}")
            if e <= prev:
                raise ValueError("exponents must be strictly increasing")
            if not isinstance(c, Fraction) or c == 0:
                raise ValueError(f"bad coefficient {c!r}")
            prev = e
        if len(self.terms) == 1 and self.terms[0][0] == 0:
            raise ValueError("constant poly must be a Fraction")

    # -- ring operations ---------------------------------------------------

    def _as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other):
        if isinstance(other, AlphaPoly):
            acc = self._as_dict()
            for e, c in other.terms:
                acc[e] = acc.get(e, Fraction(0)) + c
            return alpha_poly(acc)
        if isinstance(other, (int, Fraction)):
            acc = self._as_dict()
            acc[0] = acc.get(0, Fraction(0)) + _fr(other)
            return alpha_poly(acc)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return AlphaPoly(tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other):
        if isinstance(other, (AlphaPoly, int, Fraction)):
            return self + (-other if isinstance(other, AlphaPoly) else -_fr(other))
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return (-self) + _fr(other)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, AlphaPoly):
            acc: dict = {}
            for e1, c1 in self.terms:
                for e2, c2 in other.terms:
                    e = e1 + e2
                    acc[e] = acc.get(e, Fraction(0)) + c1 * c2
            return alpha_poly(acc)
        if isinstance(other, (int, Fraction)):
            q = _fr(other)
            if q == 0:
                return Fraction(0)
            return AlphaPoly(tuple((e, c * q) for e, c in self.terms))
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, AlphaPoly):
            return self.terms == other.terms
        # Normalized polys are never constants.
        if isinstance(other, (int, Fraction)):
            return False
        return NotImplemented

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        return f"AlphaPoly({format_scalar(self)!r})"

    # -- queries -----------------------------------------------------------

    def coefficient(self, e: int) -> Fraction:
        for ee, c in self.terms:
            if ee == e:
                return c
        return Fraction(0)

    def exponents(self) -> tuple:
        return tuple(e for e, _ in self.terms)

    def max_exponent(self) -> int:
        return self.terms[-1][0]

    def evaluate(self, point: Fraction) -> Fraction:
        point = _fr(point)
        return sum((c * point**e for e, c in self.terms), Fraction(0))


Scalar = Union[Fraction, AlphaPoly]


def alpha_poly(coeffs: Mapping[int, Fraction]) -> Scalar:
    """Normalize an exponent->coefficient mapping into a Scalar."""
    items = sorted((int(e), _fr(c)) for e, c in coeffs.items() if c != 0)
    if not items:
        return Fraction(0)
    if len(items) == 1 and items[0][0] == 0:
        return items[0][1]
    return AlphaPoly(tuple(items))


def alpha_power(e: int, coeff=1) -> Scalar:
    """The monomial coeff * alpha**e."""
    return alpha_poly({e: _fr(coeff)})


ALPHA = alpha_power(1)


def as_scalar(x) -> Scalar:
    if isinstance(x, AlphaPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return _fr(x)
    raise TypeError(f"cannot interpret {x!r} as a Scalar")


def is_zero(s: Scalar) -> bool:
    return isinstance(s, Fraction) and s == 0


def scalar_arith(a: Scalar, b: Scalar, op: str) -> Scalar:
    """Exact add/sub/mul on Scalars.  Division is intentionally absent."""
    a, b = as_scalar(a), as_scalar(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unsupported op {op!r}")


def eval_at(s: Scalar, point: Fraction) -> Fraction:
    """Exact evaluation of a Scalar at a rational alpha."""
    s = as_scalar(s)
    if isinstance(s, Fraction):
        return s
    return s.evaluate(point)


# -- text format ------------------------------------------------------------

_RAT_RE = re.compile(r"^[+-]?\d+(?:/\d+)?$")
_TERM_RE = re.compile(r"^([+-]?\d+(?:/\d+)?)(?:\*a\^(\d+))?$")


def format_scalar(s: Scalar) -> str:
    """Render a Scalar in the text format "p/q" or "c*a^e+-...", e.g.
    "1*a^33-1*a^18+1*a^12"."""
    s = as_scalar(s)
    if isinstance(s, Fraction):
        return str(s)
    parts = []
    for e, c in sorted(s.terms, reverse=True):
        body = str(abs(c)) + (f"*a^{e}" if e > 0 else "")
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("-" if c < 0 else "+") + body)
    return "".join(parts)


def parse_scalar(text: str) -> Scalar:
    """Inverse of :func:`format_scalar`."""
    text = text.replace(" ", "")
    if not text:
        raise ValueError("empty scalar text")
    if _RAT_RE.match(text):
        return Fraction(text)
    # Split into signed terms.
    tokens = re.findall(r"[+-]?[^+-]+", text)
    acc: dict = {}
    for tok in tokens:
        m = _TERM_RE.match(tok)
        if not m:
            raise ValueError(f"bad scalar term {tok!r} in {text!r}")
        c = Fraction(m.group(1))
        e = int(m.group(2)) if m.group(2) is not None else 0
        acc[e] = acc.get(e, Fraction(0)) + c
    return alpha_poly(acc)


# -- certified interval evaluation -------------------------------------------


@dataclass(frozen=True)
class AlphaEnclosure:
    """Certified rational interval containing the chosen transcendental alpha."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", _fr(self.lo))
        object.__setattr__(self, "hi", _fr(self.hi))
        if not (0 < self.lo <= self.hi < 1):
            raise ValueError("enclosure must satisfy 0 < lo <= hi < 1")


@dataclass(frozen=True)
class RatInterval:
    """Closed interval with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("inverted interval")

    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "RatInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


def _round_down(x: Fraction, bits: int) -> Fraction:
    # Round onto the dyadic grid 2**-bits only when the denominator is
    # already coarser; exact small rationals pass through unchanged.
    if x.denominator.bit_length() <= bits:
        return x
    scale = 1 << bits
    return Fraction((x.numerator * scale) // x.denominator, scale)


def _round_up(x: Fraction, bits: int) -> Fraction:
    if x.denominator.bit_length() <= bits:
        return x
    scale = 1 << bits
    return Fraction(-((-x.numerator * scale) // x.denominator), scale)


def _iround(lo: Fraction, hi: Fraction, bits: int) -> RatInterval:
    return RatInterval(_round_down(lo, bits), _round_up(hi, bits))


def _iadd(a: RatInterval, b: RatInterval, bits: int) -> RatInterval:
    return _iround(a.lo + b.lo, a.hi + b.hi, bits)


def _imul(a: RatInterval, b: RatInterval, bits: int) -> RatInterval:
    prods = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return _iround(min(prods), max(prods), bits)


def _ipow_nonneg(a: RatInterval, e: int, bits: int) -> RatInterval:
    # Monotone power for intervals with non-negative lower endpoint, by
    # directed-rounded square-and-multiply on each endpoint.
    def pow_dir(x: Fraction, rounder) -> Fraction:
        result = Fraction(1)
        base = x
        k = e
        while k:
            if k & 1:
                result = rounder(result * base, bits)
            k >>= 1
            if k:
                base = rounder(base * base, bits)
        return result

    if e == 0:
        return RatInterval(Fraction(1), Fraction(1))
    return RatInterval(pow_dir(a.lo, _round_down), pow_dir(a.hi, _round_up))


def eval_interval(p: Scalar, alpha: AlphaEnclosure, precision_bits: int) -> RatInterval:
    """Certified enclosure of p(alpha) over the whole alpha interval.

    Sound by outward rounding at every step; the result interval shrinks
    (weakly) as precision_bits grows and the enclosure tightens.
    """
    if precision_bits < 32:
        raise ValueError("precision_bits must be at least 32")
    p = as_scalar(p)
    if isinstance(p, Fraction):
        return RatInterval(p, p)
    base = RatInterval(alpha.lo, alpha.hi)
    acc = RatInterval(Fraction(0), Fraction(0))
    for e, c in p.terms:
        mono = _ipow_nonneg(base, e, precision_bits)
        term = _imul(mono, RatInterval(c, c), precision_bits)
        acc = _iadd(acc, term, precision_bits)
    return acc


def certify_less(
    a: Scalar,
    b: Scalar,
    alpha: AlphaEnclosure,
    start_bits: int = 64,
    max_bits: int = 4096,
):
    """Try to certify a(alpha) < b(alpha) by adaptive-precision intervals.

    Returns (True, (ia, ib)) when certified, (False, (ia, ib)) when the
    reverse inequality is certified; raises PrecisionExhaustedError when the
    intervals still overlap at the precision cap.
    """
    from .errors import PrecisionExhaustedError

    bits = max(32, start_bits)
    while True:
        ia = eval_interval(a, alpha, bits)
        ib = eval_interval(b, alpha, bits)
        if ia.hi < ib.lo:
            return True, (ia, ib)
        if ib.hi < ia.lo:
            return False, (ia, ib)
        if bits >= max_bits:
            raise PrecisionExhaustedError(
                f"inequality undecided at {bits} bits", interval=(ia, ib)
            )
        bits = min(2 * bits, max_bits)


# -- rational independence ----------------------------------------------------


@dataclass(frozen=True)
class IndependenceCertificate:
    """Transcript of the coefficient-matrix rank computation.

    ``pivots`` records, for each input in elimination order, the exponent
    column used as its pivot; ``dependent_index`` names the first input whose
    row reduced to zero.  Valid under the recorded assumption that alpha is
    transcendental, so distinct monomials are independent over the rationals.
    """

    independent: bool
    rank: int
    count: int
    pivots: tuple
    dependent_index: int | None
    assumption: str = "alpha is formally transcendental (assumed, not verified)"

    def __bool__(self) -> bool:
        return self.independent


def rational_independent(ps: Sequence[Scalar]) -> IndependenceCertificate:
    """Decide linear independence over Q of the coefficient vectors of ps.

    The empty family is vacuously independent.
    """
    rows = []
    for p in ps:
        p = as_scalar(p)
        if isinstance(p, Fraction):
            rows.append({0: p} if p != 0 else {})
        else:
            rows.append({e: c for e, c in p.terms})
    pivots: dict = {}  # exponent -> reduced row
    transcript = []
    for idx, row in enumerate(rows):
        row = {e: c for e, c in row.items() if c != 0}
        # Each reduction eliminates the largest reducible column and only
        # introduces smaller ones (pivot rows are normalized on their lead),
        # so this loop terminates.
        while True:
            reducible = [e for e in row if e in pivots]
            if not reducible:
                break
            col = max(reducible)
            factor = row[col]
            for e, c in pivots[col].items():
                row[e] = row.get(e, Fraction(0)) - factor * c
            row = {e: c for e, c in row.items() if c != 0}
        if not row:
            return IndependenceCertificate(
                independent=False,
                rank=len(pivots),
                count=len(rows),
                pivots=tuple(transcript),
                dependent_index=idx,
            )
        lead = max(row)
        inv = 1 / row[lead]
        row = {e: c * inv for e, c in row.items()}
        pivots[lead] = row
        transcript.append((idx, lead))
    return IndependenceCertificate(
        independent=True,
        rank=len(pivots),
        count=len(rows),
        pivots=tuple(transcript),
        dependent_index=None,
    )
