"""Genus-zero fusing and braiding identities for multiplicity-free theories.

Every intertwiner space here is at most one-dimensional, so a basis vector is
just a label triple ``(a1, a2; a3)`` standing for ``Y_{a1 a2}^{a3}``, and the
S_3 action permutes triples up to the scalars stored in the fixture:

    sigma12 Y_{a1 a2}^{a3} = s12(a1, a2; a3) Y_{a2 a1}^{a3}
    sigma23 Y_{a1 a2}^{a3} = s23(a1, a2; a3) Y_{a1 a3'}^{a2'}

with ``sigma123 = sigma12 sigma23`` and ``sigma132 = sigma23 sigma12`` (rightmost
acts first).  ``F[(a1, a2, a3, a4, a5, a6)]`` is the entry
``F(Y_{a1 a5}^{a4} (x) Y_{a2 a3}^{a5}; Y_{a6 a3}^{a4} (x) Y_{a1 a2}^{a6})`` between the
chosen bases; rescaled vertices scale it by ``c1 c2 / (c3 c4)``.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import NamedTuple

from gmpy2 import mpc, mpfr

from . import numerics
from .modular_data import InputError, ModularData
from .report import Check, Residual
from .verlinde import FusionTable, fusion_table

FB_TOL = 1e-12
ROTATIONS = (-1, 0, 1)

Triple = tuple[str, str, str]
FKey = tuple[str, str, str, str, str, str]
ChannelMatrix = dict[tuple[str, str], mpc]


class MissingEntryError(LookupError):
    """An admissible F entry or σ scalar is absent from the fixture."""


class FusingMatrixSingular(ArithmeticError):
    def __init__(self, outer: tuple[str, str, str, str]):
        self.outer = outer
        super().__init__(f"fusing matrix singular at {outer}")


class VacuumFusingVanishes(ArithmeticError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"vacuum fusing entry vanishes for a2 = {label}")


class Vertex(NamedTuple):
    """``coeff * Y_{a1 a2}^{a3}`` for ``labels = (a1, a2, a3)``."""

    labels: Triple
    coeff: mpc


@dataclass(frozen=True)
class FTensor:
    base: ModularData
    F: Mapping[FKey, mpc]
    sigma12: Mapping[Triple, mpc]
    sigma23: Mapping[Triple, mpc]
    fusion: FusionTable | None = field(default=None, compare=False)

    def __post_init__(self):
        md = self.base
        for key in itertools.chain(self.F, self.sigma12, self.sigma23):
            for a in key:
                md.index(a)
        if self.fusion is None:
            object.__setattr__(self, "fusion", fusion_table(md))
        worst = max(n for plane in self.fusion.N for row in plane for n in row)
        if worst > 1:
            raise InputError("fusion rules with multiplicity above 1 are not supported")
        with numerics.working_precision(md.precision_bits):
            for name in ("F", "sigma12", "sigma23"):
                object.__setattr__(self, name, {k: numerics.as_complex(v) for k, v in getattr(self, name).items()})

    @property
    def labels(self) -> tuple[str, ...]:
        return self.base.labels

    @property
    def vacuum(self) -> str:
        return self.base.vacuum

    def dual(self, a: str) -> str:
        return self.base.dual[a]

    def n(self, a1: str, a2: str, a3: str) -> int:
        return self.fusion.n(a1, a2, a3)

    def admissible(self, key: FKey) -> bool:
        a1, a2, a3, a4, a5, a6 = key
        return bool(self.n(a1, a5, a4) and self.n(a2, a3, a5) and self.n(a6, a3, a4) and self.n(a1, a2, a6))

    def triples(self) -> list[Triple]:
        return [t for t in itertools.product(self.labels, repeat=3) if self.n(*t)]

    def channels(self, a1, a2, a3, a4) -> tuple[list[str], list[str]]:
        """Admissible a5 (source) and a6 (target) channels for the outer labels."""
        c5 = [x for x in self.labels if self.n(a2, a3, x) and self.n(a1, x, a4)]
        c6 = [x for x in self.labels if self.n(a1, a2, x) and self.n(x, a3, a4)]
        return c5, c6

    def f(self, key: FKey) -> mpc:
        if not self.admissible(key):
            return mpc(0)
        try:
            return self.F[key]
        except KeyError:
            raise MissingEntryError(f"missing F entry {key}") from None

    def scalar(self, which: str, t: Triple) -> mpc:
        table = self.sigma12 if which == "12" else self.sigma23
        try:
            return table[t]
        except KeyError:
            raise MissingEntryError(f"missing sigma{which} scalar {t}") from None

    def with_sigma(self, which: str, t: Triple, value) -> FTensor:
        """Copy with one σ scalar replaced (used to build corrupted fixtures)."""
        tables = {"12": dict(self.sigma12), "23": dict(self.sigma23)}
        tables[which][t] = value
        return FTensor(self.base, self.F, tables["12"], tables["23"], self.fusion)


# ---------------------------------------------------------------- σ action


def vertex(a1: str, a2: str, a3: str) -> Vertex:
    return Vertex((a1, a2, a3), mpc(1))


def sigma12(ft: FTensor, v: Vertex) -> Vertex:
    a1, a2, a3 = v.labels
    return Vertex((a2, a1, a3), v.coeff * ft.scalar("12", v.labels))


def sigma23(ft: FTensor, v: Vertex) -> Vertex:
    a1, a2, a3 = v.labels
    return Vertex((a1, ft.dual(a3), ft.dual(a2)), v.coeff * ft.scalar("23", v.labels))


def sigma123(ft: FTensor, v: Vertex) -> Vertex:
    return sigma12(ft, sigma23(ft, v))


def sigma132(ft: FTensor, v: Vertex) -> Vertex:
    return sigma23(ft, sigma12(ft, v))


def f_entry(ft: FTensor, y1: Vertex, y2: Vertex, y3: Vertex, y4: Vertex) -> mpc:
    """F(y1 (x) y2; y3 (x) y4) for rescaled basis vertices."""
    a1, a5, a4 = y1.labels
    a2, a3, a5b = y2.labels
    a6, a3b, a4b = y3.labels
    a1b, a2b, a6b = y4.labels
    if (a5, a3, a4, a1, a2, a6) != (a5b, a3b, a4b, a1b, a2b, a6b):
        raise ValueError(f"vertices do not form a fusing entry: {y1.labels} {y2.labels} {y3.labels} {y4.labels}")
    return y1.coeff * y2.coeff / (y3.coeff * y4.coeff) * ft.f((a1, a2, a3, a4, a5, a6))


# ---------------------------------------------------- fusing and braiding


def f_matrix(ft: FTensor, a1, a2, a3, a4) -> ChannelMatrix:
    c5, c6 = ft.channels(a1, a2, a3, a4)
    return {(x, y): ft.f((a1, a2, a3, a4, x, y)) for x in c5 for y in c6}


def f_inverse(ft: FTensor, a1, a2, a3, a4) -> ChannelMatrix:
    """Inverse fusing matrix, keyed ``(a6, a5)``."""
    c5, c6 = ft.channels(a1, a2, a3, a4)
    if len(c5) != len(c6):
        raise FusingMatrixSingular((a1, a2, a3, a4))
    if not c5:
        return {}
    with numerics.working_precision(ft.base.precision_bits):
        m = [[ft.f((a1, a2, a3, a4, x, y)) for y in c6] for x in c5]
        try:
            inv = numerics.inverse(m, tol=FB_TOL)
        except numerics.SingularMatrixError:
            raise FusingMatrixSingular((a1, a2, a3, a4)) from None
    return {(y, x): inv[j][i] for i, x in enumerate(c5) for j, y in enumerate(c6)}


def braiding_square(ft: FTensor, r: int, a1, a2, a3, a4) -> ChannelMatrix:
    """(B^(r))² in the product basis, keyed by source and target a5 channels."""
    h = ft.base.h
    c5, c6 = ft.channels(a1, a2, a3, a4)
    inv = f_inverse(ft, a1, a2, a3, a4)
    with numerics.working_precision(ft.base.precision_bits):
        phases = {y: numerics.phase((2 * r + 1) * (h[y] - h[a1] - h[a2])) for y in c6}
        return {
            (x, z): sum(ft.f((a1, a2, a3, a4, x, y)) * phases[y] * inv[(y, z)] for y in c6)
            for x in c5
            for z in c5
        }


def vacuum_fusing(ft: FTensor, a2: str) -> mpc:
    """F(Y_{a2 e}^{a2} (x) Y_{a2' a2}^e; Y_{e a2}^{a2} (x) Y_{a2 a2'}^e)."""
    e, d2 = ft.vacuum, ft.dual(a2)
    return f_entry(ft, vertex(a2, e, a2), vertex(d2, a2, e), vertex(e, a2, a2), vertex(a2, d2, e))


def _worst(items: Iterable[tuple[mpfr, tuple[str, ...]]]) -> Residual:
    worst = Residual(mpfr(0))
    for value, witness in items:
        if value > worst.value:
            worst = Residual(value, witness)
    return worst


# ---------------------------------------------------------------- checks


def check_sigma_involutions(ft: FTensor) -> Residual:
    def residuals():
        for t in ft.triples():
            v = vertex(*t)
            yield abs(sigma12(ft, sigma12(ft, v)).coeff - 1), ("sigma12",) + t
            yield abs(sigma23(ft, sigma23(ft, v)).coeff - 1), ("sigma23",) + t

    with numerics.working_precision(ft.base.precision_bits):
        return _worst(residuals())


def check_sigma_braid(ft: FTensor) -> Residual:
    """σ12 σ23 σ12 σ23 = σ23 σ12 on every basis vertex."""

    def residuals():
        for t in ft.triples():
            v = vertex(*t)
            left = sigma12(ft, sigma23(ft, sigma12(ft, sigma23(ft, v))))
            right = sigma132(ft, v)
            if left.labels != right.labels:
                raise ValueError(f"braid relation relabels {t} inconsistently")
            yield abs(left.coeff - right.coeff), t

    with numerics.working_precision(ft.base.precision_bits):
        return _worst(residuals())


def check_vacuum_normalization(ft: FTensor) -> Residual:
    """The two vacuum-insertion entries that the first Moore-Seiberg formula relies on equal 1.

    For every basis vertex ``Y = Y_{a2 a3'}^{a1'}``:

        F(Y_{a3' a3}^e (x) σ123 Y; Y_{a2' a2}^e (x) σ123² Y) = 1
        F(Y_{a2 a2'}^e (x) σ123² Y; Y_{a1' a1}^e (x) Y) = 1
    """
    e = ft.vacuum

    def residuals():
        for a2, d3, d1 in ft.triples():
            a1, a3 = ft.dual(d1), ft.dual(d3)
            y = vertex(a2, d3, d1)
            once = sigma123(ft, y)
            twice = sigma123(ft, once)
            first = f_entry(ft, vertex(d3, a3, e), once, vertex(ft.dual(a2), a2, e), twice)
            second = f_entry(ft, vertex(a2, ft.dual(a2), e), twice, vertex(d1, a1, e), y)
            yield abs(first - 1), (a1, a2, a3)
            yield abs(second - 1), (a1, a2, a3)

    with numerics.working_precision(ft.base.precision_bits):
        return _worst(residuals())


def check_fusing_inverse_symmetry(ft: FTensor) -> Residual:
    """F⁻¹(Y_{a6a3}^{a4} (x) Y_{a1a2}^{a6}; Y_{a1a5}^{a4} (x) Y_{a2a3}^{a5}) against the σ12-twisted F."""

    def residuals():
        for a1, a2, a3, a4 in itertools.product(ft.labels, repeat=4):
            c5, c6 = ft.channels(a1, a2, a3, a4)
            if not c5:
                continue
            inv = f_inverse(ft, a1, a2, a3, a4)
            for a5, a6 in itertools.product(c5, c6):
                twisted = f_entry(
                    ft,
                    sigma12(ft, vertex(a6, a3, a4)),
                    sigma12(ft, vertex(a1, a2, a6)),
                    sigma12(ft, vertex(a1, a5, a4)),
                    sigma12(ft, vertex(a2, a3, a5)),
                )
                yield abs(inv[(a6, a5)] - twisted), (a1, a2, a3, a4, a5, a6)

    with numerics.working_precision(ft.base.precision_bits):
        return _worst(residuals())


def check_fusing_symmetry(ft: FTensor) -> Residual:
    """F(Y1 (x) Y2; Y3 (x) Y4) = F(σ132 Y2 (x) σ123 Y1; σ123 Y4 (x) σ132 Y3)."""

    def residuals():
        for key in ft.F:
            if not ft.admissible(key):
                continue
            a1, a2, a3, a4, a5, a6 = key
            twisted = f_entry(
                ft,
                sigma132(ft, vertex(a2, a3, a5)),
                sigma123(ft, vertex(a1, a5, a4)),
                sigma123(ft, vertex(a1, a2, a6)),
                sigma132(ft, vertex(a6, a3, a4)),
            )
            yield abs(ft.f(key) - twisted), key

    with numerics.working_precision(ft.base.precision_bits):
        return _worst(residuals())


def _formula1_lhs(ft: FTensor, a1, a2, a3) -> mpc:
    if not ft.n(a1, a2, a3):
        return mpc(0)
    e = ft.vacuum
    d1, d3 = ft.dual(a1), ft.dual(a3)
    y = vertex(a2, d3, d1)
    first = f_entry(ft, vertex(a2, e, a2), vertex(d3, a3, e), vertex(d1, a3, a2), y)
    second = f_entry(ft, vertex(d1, a3, a2), sigma123(ft, y), vertex(e, a2, a2), vertex(d1, a1, e))
    return first * second


def ms_formula1(ft: FTensor) -> Residual:
    def residuals():
        for a1, a2, a3 in itertools.product(ft.labels, repeat=3):
            rhs = ft.n(a1, a2, a3) * vacuum_fusing(ft, a2)
            yield abs(_formula1_lhs(ft, a1, a2, a3) - rhs), (a1, a2, a3)

    with numerics.working_precision(ft.base.precision_bits):
        return _worst(residuals())


def _vacuum_braiding(ft: FTensor, a4: str, a2: str) -> mpc:
    """(B^(-1))²(Y_{a4 e}^{a4} (x) Y_{a2' a2}^e; same)."""
    e = ft.vacuum
    return braiding_square(ft, -1, a4, ft.dual(a2), a2, a4)[(e, e)]


def ms_formula2(ft: FTensor, md: ModularData | None = None) -> Residual:
    md = md or ft.base
    labels = md.labels
    inv = md.numeric_inverse()

    def residuals():
        braid = {(a4, a2): _vacuum_braiding(ft, a4, a2) for a4 in labels for a2 in labels}
        for (i1, a1), a2, (i3, a3) in itertools.product(enumerate(labels), labels, enumerate(labels)):
            lhs = sum(md.S[i1][i4] * braid[(a4, a2)] * inv[i4][i3] for i4, a4 in enumerate(labels))
            yield abs(lhs - _formula1_lhs(ft, a1, a2, a3)), (a1, a2, a3)

    with numerics.working_precision(md.precision_bits):
        return _worst(residuals())


def verify_lambda_consistency(ft: FTensor, md: ModularData | None = None) -> Residual:
    """(B^(-1))² at the vacuum channel over the vacuum fusing entry equals S_{a2}^{a4} / S_e^{a4}."""
    md = md or ft.base
    labels = md.labels
    e = md.index(md.vacuum)

    def residuals():
        for i2, a2 in enumerate(labels):
            denominator = vacuum_fusing(ft, a2)
            if abs(denominator) <= FB_TOL:
                raise VacuumFusingVanishes(a2)
            for i4, a4 in enumerate(labels):
                ratio = _vacuum_braiding(ft, a4, a2) / denominator
                yield abs(ratio - md.S[i2][i4] / md.S[e][i4]), (a2, a4)

    with numerics.working_precision(md.precision_bits):
        return _worst(residuals())


def _match_multisets(found: list[mpc], expected: list[mpc]) -> mpfr:
    """Greedy nearest matching; the spectra here have at most a handful of values."""
    remaining = list(found)
    worst = mpfr(0)
    for z in expected:
        best = min(range(len(remaining)), key=lambda i: abs(remaining[i] - z))
        worst = max(worst, abs(remaining.pop(best) - z))
    return worst


def check_monodromy_spectrum(ft: FTensor, rotations: Iterable[int] = ROTATIONS) -> Residual:
    """Eigenvalues of (B^(r))² against exp(2(2r+1)πi(h_{a7} - h_{a1} - h_{a2})) over the a7 channels."""
    h = ft.base.h

    def residuals():
        for a1, a2, a3, a4 in itertools.product(ft.labels, repeat=4):
            c5, c6 = ft.channels(a1, a2, a3, a4)
            if not c5:
                continue
            for r in rotations:
                b2 = braiding_square(ft, r, a1, a2, a3, a4)
                found = numerics.eigenvalues([[b2[(x, z)] for z in c5] for x in c5])
                expected = [numerics.phase((2 * r + 1) * (h[y] - h[a1] - h[a2])) for y in c6]
                yield _match_multisets(found, expected), (a1, a2, a3, a4, str(r))

    with numerics.working_precision(ft.base.precision_bits):
        return _worst(residuals())


def check_braiding_at_vacuum(ft: FTensor, rotations: Iterable[int] = ROTATIONS) -> Residual:
    """(B^(r))² with a vacuum first label is the identity."""
    e = ft.vacuum

    def residuals():
        for a2, a3, a4 in itertools.product(ft.labels, repeat=3):
            c5, _ = ft.channels(e, a2, a3, a4)
            if not c5:
                continue
            for r in rotations:
                b2 = braiding_square(ft, r, e, a2, a3, a4)
                for x, z in itertools.product(c5, repeat=2):
                    yield abs(b2[(x, z)] - (1 if x == z else 0)), (e, a2, a3, a4, str(r))

    with numerics.working_precision(ft.base.precision_bits):
        return _worst(residuals())


# ------------------------------------------------------------- the suite

FB_CHECKS = (
    ("sigma involutions", check_sigma_involutions),
    ("sigma braid relation", check_sigma_braid),
    ("vacuum normalization", check_vacuum_normalization),
    ("fusing inverse symmetry", check_fusing_inverse_symmetry),
    ("fusing symmetry", check_fusing_symmetry),
    ("monodromy spectrum", check_monodromy_spectrum),
    ("braiding square at vacuum", check_braiding_at_vacuum),
    ("first Moore-Seiberg formula", ms_formula1),
    ("second Moore-Seiberg formula", ms_formula2),
    ("lambda consistency", verify_lambda_consistency),
)
FB_CHECK_NAMES = tuple(name for name, _ in FB_CHECKS)


def fb_checks(ft: FTensor, tol=FB_TOL) -> list[Check]:
    """Run every identity; lookup and singularity errors become failed checks."""
    out = []
    for name, fn in FB_CHECKS:
        try:
            out.append(Check.measured(name, fn(ft), tol))
        except (MissingEntryError, FusingMatrixSingular, VacuumFusingVanishes, ValueError) as exc:
            out.append(Check.failed(name, str(exc)))
    return out
