"""Exact rational arithmetic bedrock: square classes, Hilbert symbols,
polynomial root isolation and resultant norms.

Everything here works over Q with `fractions.Fraction`; no floats enter any
computation (the only float in sight is the `INF` marker for the real place,
which is never used arithmetically).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Sequence, Tuple, Union

Rational = Union[int, Fraction]

#: marker for the real place of Q.  Sorts after every finite prime, which is
#: exactly the order we want in serialized place lists.
INF = float("inf")


class FactorizationBudgetError(ValueError):
    """Raised when the squarefree part of an input cannot be factored within
    the configured trial-division budget."""


# default trial-division bound; enough for every integer this library meets
# in practice while keeping worst-case behaviour predictable.
DEFAULT_FACTOR_BUDGET = 1_000_000

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n below 3.3e24 (and extremely
    reliable beyond; inputs that large do not survive the factor budget
    anyway)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int, budget: int = DEFAULT_FACTOR_BUDGET) -> dict:
    """Factor a positive integer by trial division up to `budget`, finishing
    off prime or prime-power cofactors with a primality test.

    Returns {prime: exponent}.  Raises FactorizationBudgetError when the
    leftover cofactor is composite with no factor below the budget.
    """
    if n <= 0:
        raise ValueError("factorize expects a positive integer")
    out: dict = {}
    for p in (2, 3):
        while n % p == 0:
            n //= p
            out[p] = out.get(p, 0) + 1
    f = 5
    while f * f <= n and f <= budget:
        for p in (f, f + 2):
            while n % p == 0:
                n //= p
                out[p] = out.get(p, 0) + 1
        f += 6
    if n == 1:
        return out
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return out
    # composite cofactor with all prime factors above the budget; a perfect
    # power is still recoverable exactly
    for k in range(2, n.bit_length()):
        r = round(n ** (1.0 / k))
        for cand in (r - 1, r, r + 1):
            if cand > 1 and cand ** k == n and is_prime(cand):
                out[cand] = out.get(cand, 0) + k
                return out
    raise FactorizationBudgetError(
        f"cofactor {n} is composite and resists trial division up to {budget}"
    )


@dataclass(frozen=True)
class SquareClass:
    """An element of Q^x / (Q^x)^2, stored as its unique squarefree signed
    integer representative."""

    n: int

    def __post_init__(self):
        assert self.n != 0

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        return squarefree_class(self.n * other.n)

    def __int__(self) -> int:
        return self.n

    def is_trivial(self) -> bool:
        return self.n == 1

    def sign(self) -> int:
        return 1 if self.n > 0 else -1

    def primes(self, budget: int = DEFAULT_FACTOR_BUDGET) -> tuple:
        """Odd part of the support: every prime dividing the representative."""
        return tuple(sorted(factorize(abs(self.n), budget)))

    def __repr__(self):
        return f"SquareClass({self.n})"


def squarefree_class(r: Rational, budget: int = DEFAULT_FACTOR_BUDGET) -> SquareClass:
    """Squarefree representative of the square class of a nonzero rational.

    >>> squarefree_class(18)
    SquareClass(2)
    >>> squarefree_class(Fraction(-1, 2))
    SquareClass(-2)
    >>> squarefree_class(Fraction(45, 7))
    SquareClass(35)
    """
    r = Fraction(r)
    if r == 0:
        raise ValueError("zero has no square class")
    # p/q and p*q differ by the square q^2
    n = r.numerator * r.denominator
    sign = 1 if n > 0 else -1
    n = abs(n)
    out = 1
    for p, e in factorize(n, budget).items():
        if e % 2:
            out *= p
    return SquareClass(sign * out)


def _val_unit(r: Fraction, p: int) -> Tuple[int, Fraction]:
    """p-adic valuation and unit part of a nonzero rational."""
    num, den = r.numerator, r.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v, Fraction(num, den)


def _unit_residue(u: Fraction, modulus: int) -> int:
    """Residue of a p-unit rational modulo `modulus` (coprime denominator)."""
    num = u.numerator % modulus
    den = u.denominator % modulus
    return num * pow(den, -1, modulus) % modulus


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for odd prime p, in {-1, 0, 1}."""
    a %= p
    if a == 0:
        return 0
    t = pow(a, (p - 1) // 2, p)
    return -1 if t == p - 1 else 1


def hilbert_symbol(a: Rational, b: Rational, place) -> int:
    """Hilbert symbol of (a, b) at a place of Q, written additively: 0 when
    z^2 = a x^2 + b y^2 has a nontrivial solution in the completion, 1 when
    it does not.

    The finite-place evaluation is the classical closed form in terms of
    valuations, Legendre symbols and the mod-8 characters at 2; the real
    place only looks at signs.

    >>> hilbert_symbol(5, -5, 2)
    0
    >>> hilbert_symbol(-1, -1, INF), hilbert_symbol(-1, -1, 2), hilbert_symbol(-1, -1, 7)
    (1, 1, 0)
    >>> hilbert_symbol(2, 7, 7)
    0
    """
    a = Fraction(a)
    b = Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero entries")
    if place == INF:
        return 1 if (a < 0 and b < 0) else 0
    p = place
    if not isinstance(p, int) or p < 2 or not is_prime(p):
        raise ValueError(f"not a place of Q: {place!r}")
    alpha, u = _val_unit(a, p)
    beta, v = _val_unit(b, p)
    if p == 2:
        ru = _unit_residue(u, 8)
        rv = _unit_residue(v, 8)
        eps_u = (ru - 1) // 2 % 2
        eps_v = (rv - 1) // 2 % 2
        om_u = (ru * ru - 1) // 8 % 2
        om_v = (rv * rv - 1) // 8 % 2
        return (eps_u * eps_v + alpha * om_v + beta * om_u) % 2
    chi_u = 0 if legendre(_unit_residue(u, p), p) == 1 else 1
    chi_v = 0 if legendre(_unit_residue(v, p), p) == 1 else 1
    eps_p = (p - 1) // 2 % 2
    return (alpha * beta * eps_p + beta * chi_u + alpha * chi_v) % 2


def hilbert_support(a: Rational, b: Rational,
                    budget: int = DEFAULT_FACTOR_BUDGET) -> frozenset:
    """The finite, even-cardinality set of places where (a, b) is nontrivial.

    Only places among {2, INF} and the primes of the two square classes can
    carry a nonzero symbol, so the scan is finite.
    """
    ca = squarefree_class(a, budget)
    cb = squarefree_class(b, budget)
    candidates = {2, INF}
    candidates.update(ca.primes(budget))
    candidates.update(cb.primes(budget))
    out = frozenset(v for v in candidates if hilbert_symbol(ca.n, cb.n, v) == 1)
    assert len(out) % 2 == 0, "Hilbert reciprocity violated (bug)"
    return out


def is_square_at(c: SquareClass, place) -> bool:
    """Is the square class a square in the completion at `place`?"""
    n = c.n
    if place == INF:
        return n > 0
    p = place
    if p == 2:
        return n % 2 != 0 and n % 8 == 1
    if n % p == 0:
        return False
    return legendre(n % p, p) == 1


# ---------------------------------------------------------------------------
# polynomials with exact rational coefficients


@dataclass(frozen=True)
class Poly:
    """Univariate polynomial over Q, coefficients stored low degree first.

    Construction normalizes away trailing zeros; the zero polynomial is
    coeffs == ().
    """

    coeffs: tuple

    @staticmethod
    def make(cs: Iterable[Rational]) -> "Poly":
        cs = [Fraction(c) for c in cs]
        while cs and cs[-1] == 0:
            cs.pop()
        return Poly(tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # zero polynomial gets -1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __call__(self, x: Rational) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [Fraction(0)] * (n - len(other.coeffs))
        return Poly.make(x + y for x, y in zip(a, b))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if self.is_zero() or other.is_zero():
            return Poly(())
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly.make(out)

    def scale(self, s: Rational) -> "Poly":
        s = Fraction(s)
        return Poly.make(c * s for c in self.coeffs)

    def deriv(self) -> "Poly":
        return Poly.make(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def rem(self, other: "Poly") -> "Poly":
        if other.is_zero():
            raise ZeroDivisionError("polynomial remainder by zero")
        r = list(self.coeffs)
        d = other.degree
        lcb = other.lc
        while r and r[-1] == 0:
            r.pop()
        while len(r) - 1 >= d:
            q = r[-1] / lcb
            shift = len(r) - 1 - d
            for i, c in enumerate(other.coeffs):
                r[shift + i] -= q * c
            r.pop()
            while r and r[-1] == 0:
                r.pop()
        return Poly.make(r)

    def normalized(self) -> "Poly":
        """Content cleared by a positive rational: primitive integer
        coefficients, sign pattern untouched (Sturm chains rely on that)."""
        if self.is_zero():
            return self
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // gcd(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for c in ints:
            g = gcd(g, abs(c))
        return Poly.make(Fraction(c, g) for c in ints)


def poly_gcd(f: Poly, g: Poly) -> Poly:
    while not g.is_zero():
        f, g = g, f.rem(g)
    if f.is_zero():
        return f
    return f.scale(1 / f.lc)


def squarefree_part(f: Poly) -> Poly:
    """f divided by gcd(f, f'), normalized monic; same set of roots, all
    simple."""
    if f.is_zero() or f.degree < 1:
        raise ValueError("need a nonconstant polynomial")
    g = poly_gcd(f, f.deriv())
    if g.degree < 1:
        return f.scale(1 / f.lc)
    # exact division f / g via repeated remainder-free deflation
    out = _poly_div_exact(f, g)
    return out.scale(1 / out.lc)


def _poly_div_exact(f: Poly, g: Poly) -> Poly:
    q = [Fraction(0)] * (f.degree - g.degree + 1)
    r = list(f.coeffs)
    d = g.degree
    while len(r) - 1 >= d:
        if r[-1] == 0:
            r.pop()
            continue
        c = r[-1] / g.lc
        q[len(r) - 1 - d] = c
        shift = len(r) - 1 - d
        for i, gc in enumerate(g.coeffs):
            r[shift + i] -= c * gc
        r.pop()
    assert all(c == 0 for c in r), "inexact polynomial division"
    return Poly.make(q)


def sturm_chain(f: Poly) -> list:
    """Sturm sequence of a squarefree polynomial (normalized to integer
    coefficients at every step to keep arithmetic cheap)."""
    chain = [f.normalized(), f.deriv().normalized()]
    while not chain[-1].is_zero() and chain[-1].degree >= 1:
        nxt = (-chain[-2].rem(chain[-1])).normalized()
        if nxt.is_zero():
            break
        chain.append(nxt)
    return [p for p in chain if not p.is_zero()]


def _variations(chain: Sequence[Poly], x: Rational) -> int:
    signs = []
    for p in chain:
        v = p(x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _count_roots(chain, lo, hi) -> int:
    """Number of roots in the half-open interval (lo, hi]."""
    return _variations(chain, lo) - _variations(chain, hi)


def root_bound(f: Poly) -> int:
    """Integer Cauchy bound: every real root lies strictly inside (-B, B)."""
    lc = abs(f.lc)
    m = max(abs(c) for c in f.coeffs[:-1]) if f.degree >= 1 else Fraction(0)
    b = 1 + m / lc
    return int(b) + 1


_OFFSETS = [Fraction(1, 2), Fraction(1, 3), Fraction(2, 5), Fraction(3, 7),
            Fraction(4, 9), Fraction(5, 11), Fraction(6, 13)]


def _split_point(f: Poly, lo: Fraction, hi: Fraction) -> Fraction:
    """A point strictly inside (lo, hi) where f does not vanish."""
    width = hi - lo
    k = 1
    while True:
        for off in _OFFSETS:
            m = lo + width * off
            if f(m) != 0:
                return m
        # astronomically unlikely to loop, but stay total
        width_k = width / (2 ** k)
        m = lo + width_k
        if f(m) != 0:
            return m
        k += 1


def isolate_real_roots(f: Poly) -> list:
    """Disjoint half-open intervals (lo, hi] with rational endpoints, each
    containing exactly one real root of f, ordered left to right.

    The polynomial is replaced by its squarefree part first, so multiple
    roots are isolated once.
    """
    g = squarefree_part(f)
    if g.degree == 0:
        return []
    chain = sturm_chain(g)
    b = root_bound(g)
    lo, hi = Fraction(-b), Fraction(b)
    assert g(lo) != 0 and g(hi) != 0
    out = []

    def rec(a, b2):
        n = _count_roots(chain, a, b2)
        if n == 0:
            return
        if n == 1:
            out.append((a, b2))
            return
        m = _split_point(g, a, b2)
        rec(a, m)
        rec(m, b2)

    rec(lo, hi)
    out.sort()
    return out


def refine_to_sign(f: Poly, interval, g: Poly):
    """Shrink an isolating interval of f until g is root-free on it, then
    report (interval, sign of g at the enclosed root of f).

    Assumes g does not vanish at the enclosed root.
    """
    lo, hi = interval
    fchain = sturm_chain(squarefree_part(f))
    gsq = squarefree_part(g) if g.degree >= 1 else g
    gchain = sturm_chain(gsq) if g.degree >= 1 else []
    for _ in range(10_000):
        ok_ends = g(lo) != 0 and g(hi) != 0
        if ok_ends and (g.degree < 1 or _count_roots(gchain, lo, hi) == 0):
            val = g(hi)
            return (lo, hi), (1 if val > 0 else -1)
        m = _split_point(f, lo, hi)
        if g(m) == 0:
            # split elsewhere; g's roots are finite so this terminates
            m = _split_point(g * f, lo, hi)
        if _count_roots(fchain, lo, m) == 1:
            lo, hi = lo, m
        else:
            lo, hi = m, hi
    raise RuntimeError("interval refinement did not converge")


def signs_at_real_roots(f: Poly, g: Poly) -> tuple:
    """Sign of g at every real root of f, in increasing root order.

    Rejects inputs with a shared root, where the sign would be 0.
    """
    if g.is_zero():
        raise ValueError("g is identically zero")
    fs = squarefree_part(f)
    if g.degree >= 1 and poly_gcd(fs, g).degree >= 1:
        raise ValueError("f and g share a root")
    signs = []
    for iv in isolate_real_roots(fs):
        _, s = refine_to_sign(fs, iv, g)
        signs.append(s)
    return tuple(signs)


def norm_via_resultant(f: Poly, g: Poly) -> Fraction:
    """Res(f, g) for monic f, i.e. the product of g over the roots of f.

    With f the minimal polynomial of a field generator, this evaluates the
    field norm of g(theta) without ever leaving Q.
    """
    if not f.is_monic():
        raise ValueError("norm computation requires a monic minimal polynomial")
    if f.degree < 1:
        raise ValueError("constant minimal polynomial")
    return _resultant(f, g)


def _resultant(f: Poly, g: Poly) -> Fraction:
    if g.is_zero():
        return Fraction(0)
    if g.degree == 0:
        return g.coeffs[0] ** f.degree
    if f.degree == 0:
        return f.coeffs[0] ** g.degree
    r = f.rem(g)
    sign = -1 if (f.degree * g.degree) % 2 else 1
    if r.is_zero():
        return Fraction(0)
    return sign * g.lc ** (f.degree - r.degree) * _resultant(g, r)


def count_real_roots(f: Poly) -> int:
    return len(isolate_real_roots(f))
