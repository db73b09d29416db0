"""Modular data of a rational theory and the structural theorems about its S-matrix."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpc, mpfr

from . import numerics
from .numerics import Matrix
from .report import Check, Residual, VerificationReport

DEFAULT_TOL = 1e-20
S_INVERSE_TOL = 1e-18
VACUUM_ROW_TOL = 1e-10


class InputError(ValueError):
    """Malformed input data (unknown labels, missing entries, bad shapes)."""


class ChargeConjugationError(ArithmeticError):
    NOT_PERMUTATION = "S² not a permutation"
    WRONG_PERMUTATION = "permutation ≠ dual map"

    def __init__(self, kind: str, residual, witness: tuple[str, ...] | None = None):
        self.kind = kind
        self.residual = residual
        self.witness = witness
        super().__init__(f"{kind} (worst residual {numerics.format_real(residual, 6)})")


class SInverseError(ArithmeticError):
    def __init__(self, message: str, residual=None, witness=None):
        self.residual = residual
        self.witness = witness
        super().__init__(message)


@dataclass(frozen=True)
class ModularData:
    """Labels, vacuum, duality, weights, central charge and S-matrix of one theory.

    ``S[i][j]`` is the entry with lower index ``labels[i]`` and upper index
    ``labels[j]``; label order is the declaration order and is used everywhere.
    """

    name: str
    labels: tuple[str, ...]
    vacuum: str
    dual: Mapping[str, str]
    h: Mapping[str, Fraction]
    c: Fraction
    S: Matrix
    precision_bits: int = numerics.DEFAULT_PRECISION_BITS
    source: str | None = None
    notes: str | None = None
    _index: dict[str, int] = field(default=None, init=False, repr=False, compare=False)
    _inverse: Matrix | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels or any(not a for a in labels):
            raise InputError("labels must be a nonempty list of nonempty strings")
        if len(set(labels)) != len(labels):
            raise InputError("duplicate label")
        known = set(labels)
        if self.vacuum not in known:
            raise InputError(f"unknown label {self.vacuum!r} (vacuum)")
        for mapping, what in ((self.dual, "dual"), (self.h, "h")):
            for key in mapping:
                if key not in known:
                    raise InputError(f"unknown label {key!r} in {what}")
            for a in labels:
                if a not in mapping:
                    raise InputError(f"label {a!r} missing from {what}")
        for key, value in self.dual.items():
            if value not in known:
                raise InputError(f"unknown label {value!r} in dual[{key!r}]")
        n = len(labels)
        if len(self.S) != n or any(len(row) != n for row in self.S):
            raise InputError(f"S must be a {n}x{n} matrix")
        object.__setattr__(self, "dual", dict(self.dual))
        object.__setattr__(self, "h", {a: Fraction(v) for a, v in self.h.items()})
        object.__setattr__(self, "c", Fraction(self.c))
        with numerics.working_precision(self.precision_bits):
            object.__setattr__(self, "S", numerics.as_matrix(self.S))
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(labels)})

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise InputError(f"unknown label {label!r}") from None

    def s(self, a1: str, a2: str) -> mpc:
        return self.S[self.index(a1)][self.index(a2)]

    def dual_index(self, i: int) -> int:
        return self._index[self.dual[self.labels[i]]]

    def numeric_inverse(self) -> Matrix:
        """S⁻¹ by elimination at this theory's precision (computed once)."""
        if self._inverse is None:
            with numerics.working_precision(self.precision_bits):
                inv = numerics.inverse(self.S, tol=DEFAULT_TOL)
            object.__setattr__(self, "_inverse", inv)
        return self._inverse

    def with_s_entry(self, a1: str, a2: str, value) -> ModularData:
        """Copy with one S entry replaced (used to build corrupted fixtures)."""
        i, j = self.index(a1), self.index(a2)
        rows = [list(r) for r in self.S]
        with numerics.working_precision(self.precision_bits):
            rows[i][j] = numerics.as_complex(value)
        return ModularData(
            self.name, self.labels, self.vacuum, self.dual, self.h, self.c,
            numerics.as_matrix(rows), self.precision_bits, self.source, self.notes,
        )


def validate_structure(md: ModularData, tol=DEFAULT_TOL) -> VerificationReport:
    checks = []
    involution_breaks = [a for a in md.labels if md.dual[md.dual[a]] != a]
    if involution_breaks:
        a = involution_breaks[0]
        checks.append(Check.failed("dual is an involution", f"({a}')' = {md.dual[md.dual[a]]}", witness=(a,)))
    else:
        checks.append(Check.passed("dual is an involution"))

    if md.dual[md.vacuum] != md.vacuum:
        checks.append(Check.failed("dual fixes the vacuum", f"e' = {md.dual[md.vacuum]}", witness=(md.vacuum,)))
    else:
        checks.append(Check.passed("dual fixes the vacuum"))

    if md.h[md.vacuum] != 0:
        checks.append(Check.failed("vacuum weight is zero", f"h_e = {md.h[md.vacuum]}", witness=(md.vacuum,)))
    else:
        checks.append(Check.passed("vacuum weight is zero"))

    with numerics.working_precision(md.precision_bits):
        det = abs(numerics.determinant(md.S))
    if det > tol:
        checks.append(Check.passed("S is invertible", det))
    else:
        checks.append(Check.failed("S is invertible", "determinant below tolerance", residual=det))

    warnings = tuple(f"negative conformal weight h_{a} = {md.h[a]}" for a in md.labels if md.h[a] < 0)
    return VerificationReport(theory=md.name, checks=tuple(checks), precision_bits=md.precision_bits, warnings=warnings)


def check_symmetric(md: ModularData) -> Residual:
    worst = Residual(mpfr(0))
    with numerics.working_precision(md.precision_bits):
        for i in range(md.size):
            for j in range(i + 1, md.size):
                d = abs(md.S[i][j] - md.S[j][i])
                if d > worst.value:
                    worst = Residual(d, (md.labels[i], md.labels[j]))
    return worst


def s_squared(md: ModularData) -> Matrix:
    with numerics.working_precision(md.precision_bits):
        return numerics.matmul(md.S, md.S)


def charge_conjugation(md: ModularData, tol=DEFAULT_TOL) -> tuple[tuple[int, ...], ...]:
    """Round S² to a 0/1 matrix, check that it is the permutation a -> a', return it."""
    sq = s_squared(md)
    n = md.size
    rounded = [[0] * n for _ in range(n)]
    worst = Residual(mpfr(0))
    for i in range(n):
        for j in range(n):
            z = sq[i][j]
            target = 1 if abs(z - 1) < abs(z) else 0
            d = abs(z - target)
            if d > worst.value:
                worst = Residual(d, (md.labels[i], md.labels[j]))
            rounded[i][j] = target
    if worst.value > tol:
        raise ChargeConjugationError(ChargeConjugationError.NOT_PERMUTATION, worst.value, worst.witness)
    for i in range(n):
        if sum(rounded[i]) != 1 or sum(rounded[k][i] for k in range(n)) != 1:
            raise ChargeConjugationError(ChargeConjugationError.NOT_PERMUTATION, mpfr(1), (md.labels[i],))
    for i in range(n):
        j = rounded[i].index(1)
        if j != md.dual_index(i):
            a = md.labels[i]
            raise ChargeConjugationError(
                ChargeConjugationError.WRONG_PERMUTATION, mpfr(1), (a, md.labels[j], md.dual[a])
            )
    return tuple(tuple(row) for row in rounded)


def s_squared_residual(md: ModularData) -> Residual:
    """max |S² - C| where C is the permutation matrix of the dual map."""
    sq = s_squared(md)
    worst = Residual(mpfr(0))
    for i in range(md.size):
        d_i = md.dual_index(i)
        for j in range(md.size):
            d = abs(sq[i][j] - (1 if j == d_i else 0))
            if d > worst.value:
                worst = Residual(d, (md.labels[i], md.labels[j]))
    return worst


def s_inverse_residual(md: ModularData, inv: Matrix) -> Residual:
    """max over entries of |(S⁻¹)_a^b - S_a^{b'}| and |(S⁻¹)_a^b - S_{a'}^b|."""
    worst = Residual(mpfr(0))
    for i in range(md.size):
        for j in range(md.size):
            d = max(abs(inv[i][j] - md.S[i][md.dual_index(j)]), abs(inv[i][j] - md.S[md.dual_index(i)][j]))
            if d > worst.value:
                worst = Residual(d, (md.labels[i], md.labels[j]))
    return worst


def s_inverse(md: ModularData, tol=S_INVERSE_TOL) -> Matrix:
    """S⁻¹ by linear solve, asserted equal to S composed with the dual map."""
    try:
        inv = md.numeric_inverse()
    except numerics.SingularMatrixError as exc:
        raise SInverseError("S is numerically singular") from exc
    with numerics.working_precision(md.precision_bits):
        residual = s_inverse_residual(md, inv)
    if residual.value > tol:
        raise SInverseError("S⁻¹ differs from S with dualized index", residual.value, residual.witness)
    return inv


def check_vacuum_row_nonzero(md: ModularData) -> Residual:
    """Smallest |S_e^a|, with the label where it occurs."""
    e = md.index(md.vacuum)
    with numerics.working_precision(md.precision_bits):
        moduli = [(abs(md.S[e][j]), a) for j, a in enumerate(md.labels)]
    value, label = min(moduli, key=lambda t: t[0])
    return Residual(value, (label,))
