"""Generators of modular data for standard rational theories, with combinatorial fusion oracles.

The closed-form S-matrices here are textbook formulas (discrete Fourier
transform, Kac-Peterson, minimal-model sine formula, Ising, Fibonacci).  The
oracles never touch S: they are pure integer rules, so they can serve as
ground truth for the Verlinde engine.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd

import gmpy2

from . import numerics
from .modular_data import ModularData

SOURCE = "external-standard"

FusionRules = dict[tuple[str, str, str], int]


def _finish(name, labels, vacuum, dual, h, c, S, bits, notes=None) -> ModularData:
    return ModularData(
        name=name,
        labels=tuple(labels),
        vacuum=vacuum,
        dual=dual,
        h=h,
        c=Fraction(c),
        S=S,
        precision_bits=bits,
        source=SOURCE,
        notes=notes,
    )


def _full_table(labels, rule: Callable[[str, str, str], int]) -> FusionRules:
    return {(a, b, c): rule(a, b, c) for a, b, c in product(labels, repeat=3)}


# --------------------------------------------------------------------- trivial


def gen_trivial(precision_bits: int | None = None) -> ModularData:
    bits = numerics.resolve_precision(precision_bits)
    with numerics.working_precision(bits):
        S = [[numerics.cplx(1)]]
    return _finish("trivial", ["e"], "e", {"e": "e"}, {"e": Fraction(0)}, 0, S, bits)


def oracle_trivial() -> FusionRules:
    return {("e", "e", "e"): 1}


# --------------------------------------------------------------------- abelian

ABELIAN_H_NOTE = "h_a = a(n-a)/(2n); the weights are stored for completeness and do not enter any Z_n check"


def gen_abelian(n: int, precision_bits: int | None = None) -> ModularData:
    if n < 1:
        raise ValueError(f"Z_n needs n >= 1, got {n}")
    bits = numerics.resolve_precision(precision_bits)
    labels = [str(a) for a in range(n)]
    with numerics.working_precision(bits):
        norm = gmpy2.sqrt(numerics.real(n))
        S = [[numerics.phase(Fraction(a * b, n)) / norm for b in range(n)] for a in range(n)]
    dual = {str(a): str((-a) % n) for a in range(n)}
    h = {str(a): Fraction(a * (n - a), 2 * n) for a in range(n)}
    return _finish(f"Z{n}", labels, "0", dual, h, 1 if n > 1 else 0, S, bits, ABELIAN_H_NOTE)


def oracle_abelian(n: int) -> FusionRules:
    labels = [str(a) for a in range(n)]
    return _full_table(labels, lambda a, b, c: int((int(a) + int(b) - int(c)) % n == 0))


# ---------------------------------------------------------------------- SU(2)_k


def su2_label(twice_j: int) -> str:
    return str(twice_j // 2) if twice_j % 2 == 0 else f"{twice_j}/2"


def _twice_j(label: str) -> int:
    return int(Fraction(label) * 2)


def gen_su2(k: int, precision_bits: int | None = None) -> ModularData:
    if k < 1:
        raise ValueError(f"SU(2)_k needs k >= 1, got {k}")
    bits = numerics.resolve_precision(precision_bits)
    labels = [su2_label(t) for t in range(k + 1)]
    with numerics.working_precision(bits):
        norm = gmpy2.sqrt(numerics.real(Fraction(2, k + 2)))
        pi = numerics.pi()
        S = [
            [numerics.cplx(norm * gmpy2.sin(pi * (a + 1) * (b + 1) / (k + 2))) for b in range(k + 1)]
            for a in range(k + 1)
        ]
    h = {su2_label(t): Fraction(t * (t + 2), 4 * (k + 2)) for t in range(k + 1)}
    return _finish(f"SU2_{k}", labels, "0", {a: a for a in labels}, h, Fraction(3 * k, k + 2), S, bits)


def _su2_rule(k: int, t1: int, t2: int, t3: int) -> int:
    """Truncated Clebsch-Gordan rule on doubled spins."""
    if (t1 + t2 + t3) % 2:
        return 0
    return int(abs(t1 - t2) <= t3 <= min(t1 + t2, 2 * k - t1 - t2))


def oracle_su2(k: int) -> FusionRules:
    labels = [su2_label(t) for t in range(k + 1)]
    return _full_table(labels, lambda a, b, c: _su2_rule(k, _twice_j(a), _twice_j(b), _twice_j(c)))


# ------------------------------------------------------------- minimal models


def _check_minimal(p: int, q: int) -> None:
    if not (2 <= p < q) or gcd(p, q) != 1:
        raise ValueError(f"minimal model needs coprime 2 <= p < q, got ({p}, {q})")


def minimal_labels(p: int, q: int) -> list[tuple[int, int]]:
    """Kac-table representatives, ordered by r*q + s; the smaller of each pair is kept."""
    _check_minimal(p, q)
    reps = {
        min((r, s), (p - r, q - s), key=lambda rs: rs[0] * q + rs[1])
        for r in range(1, p)
        for s in range(1, q)
    }
    return sorted(reps, key=lambda rs: rs[0] * q + rs[1])


def _kac_name(rs: tuple[int, int]) -> str:
    return f"({rs[0]},{rs[1]})"


def gen_minimal(p: int, q: int, precision_bits: int | None = None) -> ModularData:
    reps = minimal_labels(p, q)
    bits = numerics.resolve_precision(precision_bits)
    labels = [_kac_name(rs) for rs in reps]
    with numerics.working_precision(bits):
        pi = numerics.pi()
        norm = 2 * gmpy2.sqrt(numerics.real(Fraction(2, p * q)))
        S = []
        for r, s in reps:
            row = []
            for rho, sig in reps:
                sign = -1 if (1 + s * rho + r * sig) % 2 else 1
                value = sign * norm * gmpy2.sin(pi * q * r * rho / p) * gmpy2.sin(pi * p * s * sig / q)
                row.append(numerics.cplx(value))
            S.append(row)
    h = {_kac_name((r, s)): Fraction((r * q - s * p) ** 2 - (q - p) ** 2, 4 * p * q) for r, s in reps}
    c = 1 - Fraction(6 * (p - q) ** 2, p * q)
    return _finish(f"M{p}_{q}", labels, _kac_name((1, 1)), {a: a for a in labels}, h, c, S, bits)


def oracle_minimal(p: int, q: int) -> FusionRules:
    """BPZ rule: product of two truncated SU(2) rules, summed over both Kac representatives."""
    reps = minimal_labels(p, q)

    def rule(a, b, c):
        (r1, s1), (r2, s2), (r3, s3) = (reps[names.index(x)] for x in (a, b, c))
        direct = _su2_rule(p - 2, r1 - 1, r2 - 1, r3 - 1) * _su2_rule(q - 2, s1 - 1, s2 - 1, s3 - 1)
        mirror = _su2_rule(p - 2, r1 - 1, r2 - 1, p - r3 - 1) * _su2_rule(q - 2, s1 - 1, s2 - 1, q - s3 - 1)
        return direct + mirror

    names = [_kac_name(rs) for rs in reps]
    return _full_table(names, rule)


# ------------------------------------------------------------ Ising, Fibonacci

ISING_LABELS = ("1", "epsilon", "sigma")
FIBONACCI_LABELS = ("1", "tau")


def gen_ising(precision_bits: int | None = None) -> ModularData:
    bits = numerics.resolve_precision(precision_bits)
    with numerics.working_precision(bits):
        r2 = gmpy2.sqrt(numerics.real(2))
        half = numerics.real(Fraction(1, 2))
        S = [[half * x for x in row] for row in ([1, 1, r2], [1, 1, -r2], [r2, -r2, 0])]
        S = [[numerics.cplx(x) for x in row] for row in S]
    h = {"1": Fraction(0), "epsilon": Fraction(1, 2), "sigma": Fraction(1, 16)}
    return _finish("Ising", ISING_LABELS, "1", {a: a for a in ISING_LABELS}, h, Fraction(1, 2), S, bits)


def oracle_ising() -> FusionRules:
    products = {
        ("epsilon", "epsilon"): {"1"},
        ("epsilon", "sigma"): {"sigma"},
        ("sigma", "epsilon"): {"sigma"},
        ("sigma", "sigma"): {"1", "epsilon"},
    }

    def rule(a, b, c):
        if a == "1":
            return int(b == c)
        if b == "1":
            return int(a == c)
        return int(c in products[(a, b)])

    return _full_table(ISING_LABELS, rule)


def gen_fibonacci(precision_bits: int | None = None) -> ModularData:
    bits = numerics.resolve_precision(precision_bits)
    with numerics.working_precision(bits):
        phi = (1 + gmpy2.sqrt(numerics.real(5))) / 2
        norm = gmpy2.sqrt(2 + phi)
        S = [[numerics.cplx(x / norm) for x in row] for row in ([1, phi], [phi, -1])]
    h = {"1": Fraction(0), "tau": Fraction(2, 5)}
    return _finish("Fibonacci", FIBONACCI_LABELS, "1", {a: a for a in FIBONACCI_LABELS}, h, Fraction(14, 5), S, bits)


def oracle_fibonacci() -> FusionRules:
    def rule(a, b, c):
        if a == "1":
            return int(b == c)
        if b == "1":
            return int(a == c)
        return 1
    return _full_table(FIBONACCI_LABELS, rule)


# ---------------------------------------------------------------------- index


@dataclass(frozen=True)
class CatalogEntry:
    family: str
    parameters: dict = field(default_factory=dict)

    def generate(self, precision_bits: int | None = None) -> ModularData:
        return _GENERATORS[self.family](**self.parameters, precision_bits=precision_bits)

    def oracle(self) -> FusionRules:
        return _ORACLES[self.family](**self.parameters)

    @property
    def title(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.parameters.items())
        return f"{self.family}({args})"


_GENERATORS = {
    "trivial": gen_trivial,
    "abelian": gen_abelian,
    "su2": gen_su2,
    "minimal": gen_minimal,
    "ising": gen_ising,
    "fibonacci": gen_fibonacci,
}
_ORACLES = {
    "trivial": oracle_trivial,
    "abelian": oracle_abelian,
    "su2": oracle_su2,
    "minimal": oracle_minimal,
    "ising": oracle_ising,
    "fibonacci": oracle_fibonacci,
}

FAMILY_PARAMETERS = {
    "trivial": (),
    "abelian": ("n",),
    "su2": ("k",),
    "minimal": ("p", "q"),
    "ising": (),
    "fibonacci": (),
}


def reference_models() -> list[CatalogEntry]:
    """The model list swept by the acceptance suite."""
    entries = [CatalogEntry("trivial")]
    entries += [CatalogEntry("su2", {"k": k}) for k in range(1, 17)]
    entries += [CatalogEntry("abelian", {"n": n}) for n in range(1, 25)]
    entries += [CatalogEntry("ising"), CatalogEntry("fibonacci")]
    entries += [CatalogEntry("minimal", {"p": 2, "q": 5}), CatalogEntry("minimal", {"p": 3, "q": 4})]
    return entries
