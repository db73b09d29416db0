"""Structured verification results shared by every checking module."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cache
from importlib import resources
from typing import NamedTuple

from gmpy2 import mpfr

from .numerics import RESIDUAL_DIGITS, format_real

PASS, FAIL, SKIP = "pass", "fail", "skip"


class Residual(NamedTuple):
    """Worst-case deviation found by a check, and the label tuple where it occurred."""

    value: mpfr
    witness: tuple[str, ...] | None = None


@cache
def anchors() -> dict[str, str]:
    text = resources.files("verlinde_tools").joinpath("schemas/anchors.json").read_text("utf-8")
    return json.loads(text)


def anchor_for(name: str) -> str:
    return anchors().get(name, "")


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    residual: str = ""
    witness: tuple[str, ...] | None = None
    paper_anchor: str = ""
    message: str | None = None

    @classmethod
    def measured(cls, name: str, residual: Residual, tol, *, message: str | None = None) -> Check:
        """A check that passes iff ``residual.value <= tol``."""
        ok = residual.value <= tol
        return cls(
            name=name,
            status=PASS if ok else FAIL,
            residual=format_real(residual.value, RESIDUAL_DIGITS),
            witness=None if ok else residual.witness,
            paper_anchor=anchor_for(name),
            message=None if ok else message,
        )

    @classmethod
    def failed(cls, name: str, message: str, *, residual=None, witness=None) -> Check:
        return cls(
            name=name,
            status=FAIL,
            residual="" if residual is None else format_real(residual, RESIDUAL_DIGITS),
            witness=tuple(witness) if witness is not None else None,
            paper_anchor=anchor_for(name),
            message=message,
        )

    @classmethod
    def passed(cls, name: str, residual=0) -> Check:
        return cls(
            name=name,
            status=PASS,
            residual=format_real(residual, RESIDUAL_DIGITS),
            paper_anchor=anchor_for(name),
        )

    @classmethod
    def skipped(cls, name: str, message: str) -> Check:
        return cls(name=name, status=SKIP, paper_anchor=anchor_for(name), message=message)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "residual": self.residual,
            "witness": list(self.witness) if self.witness is not None else None,
            "paper_anchor": self.paper_anchor,
            "message": self.message,
        }


@dataclass(frozen=True)
class VerificationReport:
    theory: str
    checks: tuple[Check, ...] = ()
    tool_version: str = ""
    precision_bits: int = 0
    warnings: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == FAIL]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "theory": self.theory,
            "tool_version": self.tool_version,
            "precision_bits": self.precision_bits,
            "checks": [c.to_dict() for c in self.checks],
            "warnings": list(self.warnings),
        }
