"""Number field descriptors and the handful of field-level predicates the
transfer layer needs: discriminant square classes, the split-prime set of a
CM field, quadratic norm tests and totally-positive-norm certificates.

Fields never appear as element arithmetic here; every question is pushed down
to exact rational data (square classes, Hilbert symbols, resultants, Sturm
sign counts).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

from .exact import (
    DEFAULT_FACTOR_BUDGET,
    Poly,
    SquareClass,
    count_real_roots,
    factorize,
    hilbert_support,
    is_prime,
    is_square_at,
    norm_via_resultant,
    signs_at_real_roots,
    squarefree_class,
)


class DescriptorError(ValueError):
    """Malformed or inconsistent field descriptor."""


@dataclass(frozen=True)
class RealQuadratic:
    """Q(sqrt(d)) for squarefree d >= 2."""
    d: int

    def label(self) -> str:
        return f"Q(sqrt({self.d}))"


@dataclass(frozen=True)
class ImagQuadratic:
    """Q(sqrt(-D)) for squarefree D >= 1.  D=1 is the Gaussian field."""
    D: int

    def label(self) -> str:
        return "Q(i)" if self.D == 1 else f"Q(sqrt(-{self.D}))"


@dataclass(frozen=True)
class Cyclotomic:
    """Q(zeta_n).  n = 2 mod 4 is silently replaced by n/2, which generates
    the same field; callers therefore always see a canonical n."""
    n: int

    def __post_init__(self):
        n = self.n
        if n % 4 == 2:
            object.__setattr__(self, "n", n // 2)

    def label(self) -> str:
        return f"Q(zeta_{self.n})"


@dataclass(frozen=True)
class GeneralTotallyReal:
    """Totally real field given by a monic irreducible minimal polynomial
    (irreducibility is the caller's contract; total realness is verified).
    Coefficients run from the constant term up."""
    minpoly: tuple
    supplied_disc: Optional[int] = None

    def poly(self) -> Poly:
        return Poly.make(self.minpoly)

    def label(self) -> str:
        return "Q[x]/(" + _poly_label(self.minpoly) + ")"


@dataclass(frozen=True)
class GeneralCM:
    """CM field described through its maximal totally real subfield plus the
    data this library cannot derive on its own: the discriminant square class
    and any known split-prime memberships."""
    real_minpoly: tuple
    disc_class: int
    se_assertions: tuple = ()   # ((p, bool), ...)

    def poly(self) -> Poly:
        return Poly.make(self.real_minpoly)

    def label(self) -> str:
        return "CM/Q[x]/(" + _poly_label(self.real_minpoly) + ")"


NumberFieldDesc = (RealQuadratic, ImagQuadratic, Cyclotomic,
                   GeneralTotallyReal, GeneralCM)


def _poly_label(coeffs) -> str:
    terms = []
    for i, c in enumerate(coeffs):
        c = Fraction(c)
        if c == 0:
            continue
        if i == 0:
            terms.append(str(c))
        elif i == 1:
            terms.append(f"{c}*x" if c != 1 else "x")
        else:
            terms.append(f"{c}*x^{i}" if c != 1 else f"x^{i}")
    return "+".join(reversed(terms)).replace("+-", "-")


@dataclass(frozen=True)
class FieldInvariants:
    degree: int
    disc_class: SquareClass
    is_cm: bool
    half_degree: Optional[int]  # degree of the real subfield for CM fields


def _check_squarefree(n: int, what: str, budget: int) -> None:
    if n < 1:
        raise DescriptorError(f"{what} must be positive")
    for p, e in factorize(n, budget).items():
        if e > 1:
            raise DescriptorError(f"{what} must be squarefree, got {n}")


def euler_phi(n: int) -> int:
    out = n
    for p in factorize(n).items():
        out = out // p[0] * (p[0] - 1)
    return out


def cyclotomic_disc_class(n: int) -> SquareClass:
    """Square class of the cyclotomic discriminant via the conductor-product
    formula: sign (-1)^(phi/2), and prime q | n enters with exponent
    phi * v_q(n) - phi/(q-1)."""
    phi = euler_phi(n)
    fac = factorize(n)
    out = 1
    for q, v in fac.items():
        exp = phi * v - phi // (q - 1)
        if exp % 2:
            out *= q
    if (phi // 2) % 2:
        out = -out
    return SquareClass(out)


def poly_disc_class(f: Poly) -> SquareClass:
    """Square class of disc(f) for monic f; equals the field discriminant's
    class because the index enters squared."""
    d = f.degree
    res = norm_via_resultant(f, f.deriv())
    disc = res if (d * (d - 1) // 2) % 2 == 0 else -res
    if disc == 0:
        raise DescriptorError("polynomial has a repeated root")
    return squarefree_class(disc)


def field_invariants(E, budget: int = DEFAULT_FACTOR_BUDGET) -> FieldInvariants:
    """Degree, discriminant square class, CM flag.

    >>> field_invariants(RealQuadratic(5)).disc_class
    SquareClass(5)
    >>> field_invariants(Cyclotomic(44)).disc_class
    SquareClass(1)
    """
    if isinstance(E, RealQuadratic):
        if E.d < 2:
            raise DescriptorError("real quadratic needs d >= 2")
        _check_squarefree(E.d, "d", budget)
        return FieldInvariants(2, SquareClass(E.d), False, None)
    if isinstance(E, ImagQuadratic):
        _check_squarefree(E.D, "D", budget)
        return FieldInvariants(2, squarefree_class(-E.D), True, 1)
    if isinstance(E, Cyclotomic):
        if E.n < 3:
            raise DescriptorError("cyclotomic needs n >= 3")
        phi = euler_phi(E.n)
        return FieldInvariants(phi, cyclotomic_disc_class(E.n), True, phi // 2)
    if isinstance(E, GeneralTotallyReal):
        f = E.poly()
        _require_totally_real(f)
        disc = poly_disc_class(f)
        if E.supplied_disc is not None:
            if squarefree_class(E.supplied_disc) != disc:
                raise DescriptorError(
                    f"supplied discriminant class {E.supplied_disc} "
                    f"contradicts the computed class {disc.n}")
        return FieldInvariants(f.degree, disc, False, None)
    if isinstance(E, GeneralCM):
        f = E.poly()
        _require_totally_real(f)
        return FieldInvariants(2 * f.degree, squarefree_class(E.disc_class),
                               True, f.degree)
    raise DescriptorError(f"unknown field descriptor {E!r}")


def _require_totally_real(f: Poly) -> None:
    if not f.is_monic() or f.degree < 1:
        raise DescriptorError("minimal polynomial must be monic nonconstant")
    if count_real_roots(f) != f.degree:
        raise DescriptorError("minimal polynomial is not totally real")


# ---------------------------------------------------------------------------
# split primes of a CM field

IN, OUT, UNKNOWN = "in", "out", "unknown"


def in_SE(E, p: int) -> str:
    """Membership of a finite prime in the split set of a CM field: the
    primes where the field degenerates to two copies of its real subfield
    after completion.

    Imaginary quadratic and cyclotomic fields are fully decidable: membership
    is whether complex conjugation avoids the decomposition group at p.  For
    p prime to n that group is generated by p in (Z/n)*; for p | n it is the
    full inertia factor times the same Frobenius data modulo the prime-to-p
    part.  General CM descriptors answer from their assertion table only.
    """
    if not (isinstance(p, int) and is_prime(p)):
        raise ValueError(f"not a finite prime: {p!r}")
    if isinstance(E, ImagQuadratic):
        return IN if is_square_at(squarefree_class(-E.D), p) else OUT
    if isinstance(E, Cyclotomic):
        n = E.n
        while n % p == 0:
            n //= p
        if n <= 2:
            # pure prime-power level (or twice one): conjugation sits inside
            # inertia itself, so the completion never splits
            return OUT
        seen = set()
        x = p % n
        while x not in seen:
            seen.add(x)
            x = x * p % n
        return OUT if (n - 1) in seen else IN
    if isinstance(E, GeneralCM):
        for q, flag in E.se_assertions:
            if q == p:
                return IN if flag else OUT
        return UNKNOWN
    raise ValueError("split-prime sets only make sense for CM fields")


# ---------------------------------------------------------------------------
# norms and totally positive norms from quadratic fields


def is_norm_quadratic(d: int, a) -> bool:
    """Is the rational a a norm from Q(sqrt(d))?  Purely local: the symbol
    (a, d) must vanish everywhere, and only finitely many places can carry
    it.

    >>> is_norm_quadratic(5, -1)
    True
    >>> is_norm_quadratic(3, 3)
    False
    """
    if d in (0, 1):
        raise ValueError("need a nonsquare d")
    _check_squarefree(abs(d), "d", DEFAULT_FACTOR_BUDGET)
    a = Fraction(a)
    if a == 0:
        raise ValueError("norm test needs a nonzero rational")
    return len(hilbert_support(a, d)) == 0


def lambda_plus_quadratic(d: int, a) -> bool:
    """Is the class of a the norm class of a totally positive element of
    Q(sqrt(d))?  For real quadratic fields this is exactly "positive and a
    norm": a norm of positive rational value is the norm of a totally
    positive or totally negative element, and the latter negates into the
    former without changing the norm.
    """
    if d < 2:
        raise ValueError("need a real quadratic field")
    a = Fraction(a)
    if a <= 0:
        return False
    return is_norm_quadratic(d, a)


def verify_lambda_plus_witness(E, m: int, target: SquareClass, alpha: Poly,
                               budget: int = DEFAULT_FACTOR_BUDGET) -> bool:
    """Certificate check for det(U) lying in Lambda+ * disc^m over a totally
    real field: alpha (a polynomial in the field generator) must be totally
    positive, and N(alpha) * disc^m must land in the target square class.

    Exact throughout: positivity via Sturm sign refinement at every real
    root, the norm via a resultant.
    """
    if isinstance(E, RealQuadratic):
        f = Poly.make([-E.d, 0, 1])
        disc = SquareClass(E.d)
    elif isinstance(E, GeneralTotallyReal):
        f = E.poly()
        _require_totally_real(f)
        disc = poly_disc_class(f)
    else:
        raise ValueError("witness verification is for totally real fields")
    red = alpha.rem(f)
    if red.is_zero():
        raise ValueError("witness is zero in the field")
    signs = signs_at_real_roots(f, red)
    if any(s < 0 for s in signs):
        return False
    n = norm_via_resultant(f, red)
    if n == 0:
        raise ValueError("witness is a zero divisor (minpoly not irreducible?)")
    got = squarefree_class(n, budget) * SquareClass(1 if m % 2 == 0 else disc.n)
    return got == target


# ---------------------------------------------------------------------------
# JSON descriptors


def desc_to_json(E) -> dict:
    if isinstance(E, RealQuadratic):
        return {"kind": "real_quadratic", "d": E.d}
    if isinstance(E, ImagQuadratic):
        return {"kind": "imag_quadratic", "D": E.D}
    if isinstance(E, Cyclotomic):
        return {"kind": "cyclotomic", "n": E.n}
    if isinstance(E, GeneralTotallyReal):
        out = {"kind": "general_tr",
               "minpoly": [_rat_str(c) for c in E.minpoly]}
        if E.supplied_disc is not None:
            out["disc"] = E.supplied_disc
        return out
    if isinstance(E, GeneralCM):
        return {"kind": "general_cm",
                "minpoly": [_rat_str(c) for c in E.real_minpoly],
                "disc": E.disc_class,
                "se": [[p, flag] for p, flag in E.se_assertions]}
    raise DescriptorError(f"unknown descriptor {E!r}")


def desc_from_json(obj) -> object:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise DescriptorError("field descriptor must be an object with 'kind'")
    kind = obj["kind"]
    try:
        if kind == "real_quadratic":
            return RealQuadratic(int(obj["d"]))
        if kind == "imag_quadratic":
            return ImagQuadratic(int(obj["D"]))
        if kind == "cyclotomic":
            return Cyclotomic(int(obj["n"]))
        if kind == "general_tr":
            return GeneralTotallyReal(
                tuple(Fraction(c) for c in obj["minpoly"]),
                int(obj["disc"]) if "disc" in obj else None)
        if kind == "general_cm":
            return GeneralCM(
                tuple(Fraction(c) for c in obj["minpoly"]),
                int(obj["disc"]),
                tuple((int(p), bool(f)) for p, f in obj.get("se", ())))
    except (KeyError, TypeError) as err:
        raise DescriptorError(f"malformed {kind} descriptor: {err}") from err
    raise DescriptorError(f"unknown field kind {kind!r}")


def _rat_str(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
