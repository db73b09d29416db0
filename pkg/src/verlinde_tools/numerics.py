"""Arbitrary-precision complex arithmetic.

Scalars are ``gmpy2.mpc`` values created under a working precision set with
:func:`working_precision`.  Logarithms and powers follow one fixed branch:
``log z = log|z| + i arg z`` with ``0 <= arg z < 2*pi`` and ``z**r = exp(r log z)``.
Determinants and eigenvalues are delegated to mpmath at slightly higher
precision; inverses use elimination directly on the gmpy2 values.
"""

from __future__ import annotations

import math
import os
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from fractions import Fraction

import gmpy2
import mpmath
from gmpy2 import mpc, mpfr

PComplex = mpc
Rational = Fraction
Matrix = tuple[tuple[mpc, ...], ...]

DEFAULT_PRECISION_BITS = 256
MIN_PRECISION_BITS = 64
DEFAULT_INTEGER_TOL = 1e-20
PRECISION_ENV_VAR = "VERLINDE_PRECISION_BITS"
RESIDUAL_DIGITS = 30


class NonIntegerResidual(ArithmeticError):
    """A value that should be an integer is farther than ``tol`` from every integer."""

    def __init__(self, value: mpc, nearest: int, residual: mpfr):
        self.value = value
        self.nearest = nearest
        self.residual = residual
        super().__init__(
            f"non-integer residual: |z - {nearest}| = {format_real(residual, 6)}"
        )


class SingularMatrixError(ArithmeticError):
    pass


def resolve_precision(bits: int | None = None) -> int:
    """Pick the working precision: explicit value, then environment, then default."""
    if bits is None:
        env = os.environ.get(PRECISION_ENV_VAR)
        bits = int(env) if env else DEFAULT_PRECISION_BITS
    if bits < MIN_PRECISION_BITS:
        raise ValueError(f"precision must be at least {MIN_PRECISION_BITS} bits, got {bits}")
    return bits


@contextmanager
def working_precision(bits: int) -> Iterator[None]:
    if bits < MIN_PRECISION_BITS:
        raise ValueError(f"precision must be at least {MIN_PRECISION_BITS} bits, got {bits}")
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        yield


def current_precision() -> int:
    return gmpy2.get_context().precision


def real(x) -> mpfr:
    if isinstance(x, Fraction):
        return mpfr(x.numerator) / x.denominator
    return mpfr(x)


def cplx(re=0, im=0) -> mpc:
    return mpc(real(re), real(im))


def pi() -> mpfr:
    return gmpy2.const_pi()


def principal_log(z: mpc) -> mpc:
    """Logarithm with the argument taken in ``[0, 2*pi)``.

    The result carries 32 guard bits beyond the working precision so that
    ``exp(principal_log(z))`` recovers ``z`` to within a few ulp even when
    ``log|z|`` is large.
    """
    z = as_complex(z)
    if z == 0:
        raise ValueError("principal_log: logarithm of zero is undefined")
    with working_precision(current_precision() + 32):
        arg = gmpy2.phase(z)
        if arg < 0:
            two_pi = 2 * pi()
            arg += two_pi
            if arg >= two_pi:
                # a tiny negative angle whose shift rounds up to 2π
                arg = gmpy2.next_below(two_pi)
        return mpc(gmpy2.log(abs(z)), arg)


def power(z: mpc, r) -> mpc:
    """``z**r`` defined as ``exp(r * principal_log(z))``."""
    return gmpy2.exp(cplx(r) * principal_log(z))


# quarter turns, returned exactly
_EXACT_PHASES = {Fraction(0): (1, 0), Fraction(1, 4): (0, 1), Fraction(1, 2): (-1, 0), Fraction(3, 4): (0, -1)}


def phase(q) -> mpc:
    """Return ``exp(2*pi*i*q)`` for a rational (or integer) ``q``.

    The argument is reduced mod 1 first, so large numerators cost nothing and
    quarter-turns come out exact.
    """
    q = Fraction(q) % 1
    if q in _EXACT_PHASES:
        return cplx(*_EXACT_PHASES[q])
    if q > Fraction(1, 2):
        q -= 1
    angle = 2 * pi() * q.numerator / q.denominator
    return mpc(gmpy2.cos(angle), gmpy2.sin(angle))


def round_to_integer(z, tol) -> int:
    z = as_complex(z)
    nearest = int(gmpy2.rint(z.real))
    residual = abs(z - nearest)
    if residual > tol:
        raise NonIntegerResidual(z, nearest, residual)
    return nearest


def approx_eq(z, w, tol) -> bool:
    return abs(as_complex(z) - as_complex(w)) <= tol


# ---------------------------------------------------------------- decimal I/O


def decimal_digits(bits: int) -> int:
    """Significant decimal digits needed to represent ``bits`` of binary precision."""
    return math.ceil(bits * 0.302) + 2


def format_real(x, digits: int) -> str:
    """Fixed scientific notation with exactly ``digits`` significant digits."""
    x = as_real(x)
    if gmpy2.is_nan(x) or gmpy2.is_infinite(x):
        raise ValueError(f"cannot format non-finite value {x}")
    if x == 0:
        return "0." + "0" * (digits - 1) + "e+0"
    mantissa, exponent, _ = x.digits(10, digits)
    sign = ""
    if mantissa.startswith("-"):
        sign, mantissa = "-", mantissa[1:]
    return f"{sign}{mantissa[0]}.{mantissa[1:]}e{exponent - 1:+d}"


def format_complex(z, digits: int) -> dict[str, str]:
    z = as_complex(z)
    return {"re": format_real(z.real, digits), "im": format_real(z.imag, digits)}


def parse_complex(value: dict) -> mpc:
    return mpc(mpfr(value["re"]), mpfr(value["im"]))


def significant_digits(text: str) -> int:
    mantissa = text.strip().lstrip("+-").lower().split("e")[0]
    digits = mantissa.replace(".", "").lstrip("0")
    return len(digits)


def parse_rational(text: str) -> tuple[Fraction, bool]:
    """Parse ``"p/q"`` (or an integer); also report whether it was already reduced."""
    text = str(text).strip()
    if "/" in text:
        num_text, den_text = text.split("/", 1)
        num, den = int(num_text), int(den_text)
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        if den < 0:
            num, den = -num, -den
        value = Fraction(num, den)
        return value, (value.numerator, value.denominator) == (num, den)
    return Fraction(int(text)), True


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


# -------------------------------------------------------------- linear algebra


def as_real(x) -> mpfr:
    """Convert to ``mpfr``; values that already are ``mpfr`` keep their own precision."""
    return x if isinstance(x, mpfr) else mpfr(x)


def as_complex(x) -> mpc:
    """Convert to ``mpc``; values that already are ``mpc`` keep their own precision."""
    return x if isinstance(x, mpc) else mpc(x)


def as_matrix(rows) -> Matrix:
    return tuple(tuple(as_complex(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    one, zero = cplx(1), cplx(0)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def matmul(a: Sequence[Sequence[mpc]], b: Sequence[Sequence[mpc]]) -> Matrix:
    columns = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in columns) for row in a)


def max_abs(values) -> mpfr:
    worst = mpfr(0)
    for v in values:
        worst = max(worst, abs(v))
    return worst


def _mp_context() -> mpmath.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = current_precision() + 32
    return ctx


def _to_mp(ctx: mpmath.MPContext, x: mpfr):
    man, exp = mpfr(x).as_mantissa_exp()
    return ctx.ldexp(ctx.mpf(int(man)), int(exp))


def _from_mp(x) -> mpfr:
    sign, man, exp, _ = x._mpf_
    if not man:
        return mpfr(0)
    return gmpy2.mul_2exp(mpfr(-int(man) if sign else int(man)), int(exp))


def _mp_matrix(ctx, rows):
    return ctx.matrix([[ctx.mpc(_to_mp(ctx, z.real), _to_mp(ctx, z.imag)) for z in row] for row in rows])


def _from_mp_complex(x) -> mpc:
    return mpc(_from_mp(x.real), _from_mp(x.imag))


def determinant(a: Sequence[Sequence[mpc]]) -> mpc:
    ctx = _mp_context()
    return _from_mp_complex(ctx.mpc(ctx.det(_mp_matrix(ctx, a))))


def inverse(a: Sequence[Sequence[mpc]], tol=None) -> Matrix:
    """Matrix inverse by Gauss-Jordan elimination with partial pivoting.

    Raises :class:`SingularMatrixError` when a pivot vanishes or, if ``tol`` is
    given, when ``|det| <= tol``.
    """
    n = len(a)
    rows = [[mpc(x) for x in row] + [mpc(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    det = mpc(1)
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(rows[r][col]))
        if rows[pivot][col] == 0:
            raise SingularMatrixError("matrix is numerically singular")
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        p = rows[col][col]
        det *= p
        rows[col] = [x / p for x in rows[col]]
        for r in range(n):
            factor = rows[r][col]
            if r != col and factor != 0:
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
    if tol is not None and abs(det) <= tol:
        raise SingularMatrixError("matrix is numerically singular")
    return tuple(tuple(row[n:]) for row in rows)


def eigenvalues(a: Sequence[Sequence[mpc]]) -> list[mpc]:
    if len(a) == 1:
        # mpmath returns a (values, left, right) tuple for 1x1 input
        return [mpc(a[0][0])]
    ctx = _mp_context()
    values = ctx.eig(_mp_matrix(ctx, a), left=False, right=False)
    return [_from_mp_complex(ctx.mpc(v)) for v in values]
