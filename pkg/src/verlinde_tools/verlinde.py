"""Fusion rules from the S-matrix: eigenvalues, Verlinde sums, fusion matrices, ring axioms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpc, mpfr

from . import numerics
from .modular_data import ModularData
from .numerics import Matrix, NonIntegerResidual
from .report import Check, Residual, VerificationReport

INTEGER_TOL = numerics.DEFAULT_INTEGER_TOL
DIAGONALIZATION_TOL = 1e-18


class FusionError(ArithmeticError):
    def __init__(self, message: str, triple: tuple[str, str, str], residual=None):
        self.triple = triple
        self.residual = residual
        super().__init__(f"{message} at {triple}")


class VerlindeViolation(FusionError):
    """The Verlinde sum rounded to a negative integer."""


class NonIntegerFusion(FusionError):
    """The Verlinde sum is not within tolerance of an integer."""


class DiagonalizationError(ArithmeticError):
    def __init__(self, residual: Residual):
        self.residual = residual
        super().__init__(f"diagonal of S⁻¹𝒩(a)S differs from S_a^b/S_e^b at {residual.witness}")


@dataclass(frozen=True)
class FusionTable:
    """Integer fusion tensor ``N[i][j][k] = N_{a_i a_j}^{a_k}`` over ``base.labels``."""

    base: ModularData
    N: tuple[tuple[tuple[int, ...], ...], ...]
    max_residual: mpfr = field(default_factory=lambda: mpfr(0), compare=False)

    def n(self, a1: str, a2: str, a3: str) -> int:
        md = self.base
        return self.N[md.index(a1)][md.index(a2)][md.index(a3)]

    def matrix(self, a: str) -> tuple[tuple[int, ...], ...]:
        """𝒩(a), with rows a1 and columns a2 holding N_{a a1}^{a2}."""
        return self.N[self.base.index(a)]

    @property
    def matrices(self) -> dict[str, tuple[tuple[int, ...], ...]]:
        return {a: self.matrix(a) for a in self.base.labels}

    def array(self) -> np.ndarray:
        return np.array(self.N, dtype=np.int64).reshape((self.base.size,) * 3)

    def nonzero(self):
        """Nonzero entries as ``(a1, a2, a3, n)`` in canonical label order."""
        labels = self.base.labels
        for i, a1 in enumerate(labels):
            for j, a2 in enumerate(labels):
                for k, a3 in enumerate(labels):
                    if self.N[i][j][k]:
                        yield a1, a2, a3, self.N[i][j][k]

    def with_entry(self, a1: str, a2: str, a3: str, value: int) -> FusionTable:
        md = self.base
        arr = [[list(row) for row in plane] for plane in self.N]
        arr[md.index(a1)][md.index(a2)][md.index(a3)] = value
        return FusionTable(md, _freeze(arr), self.max_residual)

    @classmethod
    def from_entries(cls, md: ModularData, entries) -> FusionTable:
        """Build from ``(a1, a2, a3, n)`` tuples; absent triples are zero."""
        n = md.size
        arr = [[[0] * n for _ in range(n)] for _ in range(n)]
        for a1, a2, a3, value in entries:
            arr[md.index(a1)][md.index(a2)][md.index(a3)] = int(value)
        return cls(md, _freeze(arr))


def _freeze(arr) -> tuple:
    return tuple(tuple(tuple(row) for row in plane) for plane in arr)


def fusion_eigenvalues(md: ModularData, a2: str) -> tuple[mpc, ...]:
    """λ_{a2}^{a4} = S_{a2}^{a4} / S_e^{a4} for every a4, in label order."""
    i, e = md.index(a2), md.index(md.vacuum)
    with numerics.working_precision(md.precision_bits):
        out = []
        for j, a4 in enumerate(md.labels):
            if md.S[e][j] == 0:
                raise ZeroDivisionError(f"S_e^{a4} vanishes; fusion eigenvalues undefined")
            out.append(md.S[i][j] / md.S[e][j])
    return tuple(out)


def verlinde_sum(md: ModularData, a1: str, a2: str, a3: str) -> mpc:
    """Σ_{a4} S_{a1}^{a4} S_{a2}^{a4} S_{a4}^{a3'} / S_e^{a4}, before any rounding."""
    i, j, e = md.index(a1), md.index(a2), md.index(md.vacuum)
    k = md.index(md.dual[a3])
    S = md.S
    with numerics.working_precision(md.precision_bits):
        return sum(S[i][m] * S[j][m] * S[m][k] / S[e][m] for m in range(md.size))


def verlinde_sums(md: ModularData) -> tuple[tuple[tuple[mpc, ...], ...], ...]:
    """All Verlinde sums at once; same formula as :func:`verlinde_sum`.

    Entries are gmpy2 values held in numpy object arrays, so ``dot`` only saves
    interpreter overhead and the arithmetic stays at full precision.
    """
    n = md.size
    S = np.array(md.S, dtype=object)
    e = md.index(md.vacuum)
    dual_cols = S[:, [md.dual_index(k) for k in range(n)]]
    with numerics.working_precision(md.precision_bits):
        vac = np.array([1 / x for x in S[e]], dtype=object)
        out = []
        for i in range(n):
            weights = (S[i] * vac)[None, :] * S
            out.append(tuple(tuple(row) for row in weights.dot(dual_cols)))
    return tuple(out)


def _round_fusion(value: mpc, triple, tol) -> tuple[int, mpfr]:
    try:
        n = numerics.round_to_integer(value, tol)
    except NonIntegerResidual as exc:
        raise NonIntegerFusion("non-integer residual", triple, exc.residual) from exc
    if n < 0:
        raise VerlindeViolation(f"Verlinde violation: sum rounds to {n}", triple, abs(value - n))
    return n, abs(value - n)


def fusion_coefficient(md: ModularData, a1: str, a2: str, a3: str, tol=INTEGER_TOL) -> int:
    value = verlinde_sum(md, a1, a2, a3)
    with numerics.working_precision(md.precision_bits):
        return _round_fusion(value, (a1, a2, a3), tol)[0]


def fusion_table(md: ModularData, tol=INTEGER_TOL, *, check_ring: bool = True) -> FusionTable:
    """Round every Verlinde sum; with ``check_ring`` the result must also satisfy the ring axioms."""
    sums = verlinde_sums(md)
    labels = md.labels
    worst = mpfr(0)
    arr = []
    with numerics.working_precision(md.precision_bits):
        for i, plane in enumerate(sums):
            rows = []
            for j, row in enumerate(plane):
                out = []
                for k, value in enumerate(row):
                    n, d = _round_fusion(value, (labels[i], labels[j], labels[k]), tol)
                    worst = max(worst, d)
                    out.append(n)
                rows.append(out)
            arr.append(rows)
    table = FusionTable(md, _freeze(arr), worst)
    if check_ring:
        _assert_table_invariants(table)
    return table


def _assert_table_invariants(ft: FusionTable) -> None:
    failures = verify_ring_axioms(ft).failures()
    if failures:
        first = failures[0]
        raise FusionError(f"fusion table violates {first.name}", first.witness or ())


def verlinde_residual(md: ModularData) -> Residual:
    """Worst distance of a Verlinde sum from the nearest integer (imaginary part included)."""
    worst = Residual(mpfr(0))
    sums = verlinde_sums(md)
    labels = md.labels
    with numerics.working_precision(md.precision_bits):
        for i, plane in enumerate(sums):
            for j, row in enumerate(plane):
                for k, value in enumerate(row):
                    d = abs(value - int(round(value.real)))
                    if d > worst.value:
                        worst = Residual(d, (labels[i], labels[j], labels[k]))
    return worst


def diagonalization_residuals(md: ModularData, ft: FusionTable) -> tuple[Residual, Residual]:
    """Off-diagonal size and eigenvalue mismatch of D = S⁻¹ 𝒩(a2) S over all a2.

    ``D_{a4}^{a5} = Σ (S⁻¹)_{a4}^{a1} N_{a1 a2}^{a3} S_{a3}^{a5}``; the diagonal is
    compared index by index with λ_{a2}^{a4}.
    """
    n, S = md.size, md.S
    labels = md.labels
    off = Residual(mpfr(0))
    eig = Residual(mpfr(0))
    s_inv = np.array(md.numeric_inverse(), dtype=object)
    S_arr = np.array(S, dtype=object)
    with numerics.working_precision(md.precision_bits):
        for b, a2 in enumerate(labels):
            lam = fusion_eigenvalues(md, a2)
            # 𝒩(a2)S from the sparse integer rows, then one full product with S⁻¹
            ns = np.empty((n, n), dtype=object)
            for a1 in range(n):
                row = ft.N[a1][b]
                ns[a1] = sum((row[a3] * S_arr[a3] for a3 in range(n) if row[a3]), np.zeros(n, dtype=object))
            d = s_inv.dot(ns)
            for a4 in range(n):
                for a5 in range(n):
                    if a4 == a5:
                        r = abs(d[a4][a4] - lam[a4])
                        if r > eig.value:
                            eig = Residual(r, (a2, labels[a4]))
                    else:
                        r = abs(d[a4][a5])
                        if r > off.value:
                            off = Residual(r, (a2, labels[a4], labels[a5]))
    return off, eig


def verify_diagonalization(md: ModularData, ft: FusionTable, tol=DIAGONALIZATION_TOL) -> Residual:
    """Max off-diagonal modulus of S⁻¹𝒩(a)S; raises if the diagonal is not λ_a."""
    off, eig = diagonalization_residuals(md, ft)
    if eig.value > tol:
        raise DiagonalizationError(eig)
    return off


def verify_ring_axioms(ft: FusionTable) -> VerificationReport:
    """Unit, dual, commutativity and associativity laws in exact integer arithmetic."""
    md = ft.base
    labels = md.labels
    N = ft.array()
    n = md.size
    e = md.index(md.vacuum)
    ident = np.eye(n, dtype=np.int64)
    dual_perm = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        dual_perm[i, md.dual_index(i)] = 1

    def first(mask) -> tuple[int, ...] | None:
        hits = np.argwhere(mask)
        return tuple(int(x) for x in hits[0]) if len(hits) else None

    def named(idx) -> tuple[str, ...]:
        return tuple(labels[i] for i in idx)

    checks = []
    bad = first(N < 0)
    checks.append(
        Check.failed("nonnegativity", "negative fusion rule", witness=named(bad))
        if bad else Check.passed("nonnegativity")
    )

    bad = first(N[e] != ident)
    if bad is None:
        bad_right = first(N[:, e, :] != ident)
        bad = None if bad_right is None else (bad_right[0], e, bad_right[1])
    else:
        bad = (e, *bad)
    checks.append(
        Check.failed("unit law", "N_{ea}^b != δ_a^b", witness=named(bad))
        if bad else Check.passed("unit law")
    )

    bad = first(N[:, :, e] != dual_perm)
    checks.append(
        Check.failed("dual law", "N_{ab}^e != δ_a^{b'}", witness=named((*bad, e)))
        if bad else Check.passed("dual law")
    )

    bad = first(N != N.transpose(1, 0, 2))
    checks.append(
        Check.failed("commutativity", "N_{ab}^c != N_{ba}^c", witness=named(bad))
        if bad else Check.passed("commutativity")
    )

    # (a1 a2) a3 versus a1 (a2 a3), both contracted to c
    left = np.einsum("ijb,bkc->ijkc", N, N)
    right = np.einsum("jkb,ibc->ijkc", N, N)
    bad = first(left != right)
    checks.append(
        Check.failed("associativity", "Σ_b N_{a1a2}^b N_{ba3}^c differs from Σ_b N_{a2a3}^b N_{a1b}^c", witness=named(bad))
        if bad else Check.passed("associativity")
    )
    return VerificationReport(theory=md.name, checks=tuple(checks), precision_bits=md.precision_bits)
