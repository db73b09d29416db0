"""File formats, the verification pipeline and the ``verlinde`` command line."""

from __future__ import annotations

import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, replace
from functools import cache
from importlib import resources
from pathlib import Path

import click
import jsonschema
from . import __version__, catalog, numerics
from .fb_calculus import FB_CHECK_NAMES, FB_TOL, FTensor, fb_checks
from .modular_data import (
    S_INVERSE_TOL,
    VACUUM_ROW_TOL,
    ChargeConjugationError,
    InputError,
    ModularData,
    charge_conjugation,
    check_symmetric,
    check_vacuum_row_nonzero,
    s_inverse_residual,
    s_squared_residual,
    validate_structure,
)
from .report import FAIL, Check, VerificationReport
from .verlinde import (
    DIAGONALIZATION_TOL,
    INTEGER_TOL,
    FusionError,
    FusionTable,
    diagonalization_residuals,
    fusion_eigenvalues,
    fusion_table,
    verify_ring_axioms,
    verlinde_residual,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputWarning(UserWarning):
    """Recoverable problems in input files (non-reduced rationals, short decimals)."""


# ------------------------------------------------------------------ schemas


@cache
def schema(name: str) -> dict:
    text = resources.files("verlinde_tools").joinpath(f"schemas/{name}.schema.json").read_text("utf-8")
    return json.loads(text)


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def validate_document(doc, name: str) -> None:
    validator = jsonschema.Draft202012Validator(schema(name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise InputError(f"{name}.json schema violation at {_pointer(err.absolute_path)}: {err.message}")


def _read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc


def _write_json(doc, path) -> None:
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# ------------------------------------------------------------- modular.json


def _rational(text: str, where: str):
    try:
        value, reduced = numerics.parse_rational(text)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from exc
    if not reduced:
        warnings.warn(f"{where} = {text!r} normalized to {numerics.format_rational(value)!r}", InputWarning, stacklevel=3)
    return value


class _DigitAudit:
    """Counts decimal strings that are too short for the requested precision."""

    def __init__(self, bits: int):
        self.needed = math.ceil(bits * 0.302)
        self.short = 0

    def complex(self, value: dict):
        for part in (value["re"], value["im"]):
            digits = numerics.significant_digits(part)
            if 0 < digits < self.needed:
                self.short += 1
        return numerics.parse_complex(value)

    def report(self, path) -> None:
        if self.short:
            warnings.warn(
                f"{path}: {self.short} decimal strings carry fewer than {self.needed} significant digits",
                InputWarning,
                stacklevel=3,
            )


def modular_from_dict(doc: dict, precision_bits: int | None = None, path="modular.json") -> ModularData:
    validate_document(doc, "modular")
    bits = _working_bits(precision_bits, doc["precision_bits"])
    audit = _DigitAudit(bits)
    with numerics.working_precision(bits):
        S = [[audit.complex(z) for z in row] for row in doc["S"]]
    audit.report(path)
    h = {a: _rational(v, f"h[{a!r}]") for a, v in doc["h"].items()}
    c = _rational(doc["central_charge"], "central_charge")
    return ModularData(
        name=doc["name"],
        labels=tuple(doc["labels"]),
        vacuum=doc["vacuum"],
        dual=doc["dual"],
        h=h,
        c=c,
        S=S,
        precision_bits=bits,
        source=doc.get("source"),
        notes=doc.get("notes"),
    )


def _working_bits(requested: int | None, declared: int) -> int:
    """Command-line value, then environment variable, then the file's own precision."""
    if requested is None and not os.environ.get(numerics.PRECISION_ENV_VAR):
        return declared
    return numerics.resolve_precision(requested)


def load_modular(path, precision_bits: int | None = None) -> ModularData:
    """Read and validate ``modular.json``.

    Working precision comes from ``precision_bits`` when given, else from the
    environment variable, else from the file's own ``precision_bits``.
    """
    return modular_from_dict(_read_json(path), precision_bits, path)


def modular_to_dict(md: ModularData) -> dict:
    digits = numerics.decimal_digits(md.precision_bits)
    doc = {
        "name": md.name,
        "precision_bits": md.precision_bits,
        "labels": list(md.labels),
        "vacuum": md.vacuum,
        "dual": {a: md.dual[a] for a in md.labels},
        "h": {a: numerics.format_rational(md.h[a]) for a in md.labels},
        "central_charge": numerics.format_rational(md.c),
        "S": [[numerics.format_complex(z, digits) for z in row] for row in md.S],
    }
    if md.source is not None:
        doc["source"] = md.source
    if md.notes is not None:
        doc["notes"] = md.notes
    return doc


def save_modular(md: ModularData, path) -> None:
    _write_json(modular_to_dict(md), path)


# --------------------------------------------------------------- fdata.json


def fdata_from_dict(doc: dict, md: ModularData, path="fdata.json", fusion: FusionTable | None = None) -> FTensor:
    validate_document(doc, "fdata")
    if doc["theory"] != md.name:
        raise InputError(f"{path}: theory {doc['theory']!r} does not match modular data {md.name!r}")
    for section in ("F", "sigma12", "sigma23"):
        for entry in doc[section]:
            for key, label in entry.items():
                if key != "value" and label not in md.labels:
                    raise InputError(f"{path}: unknown label {label!r} in {section}")
    audit = _DigitAudit(md.precision_bits)
    with numerics.working_precision(md.precision_bits):
        F = {tuple(e[k] for k in ("a1", "a2", "a3", "a4", "a5", "a6")): audit.complex(e["value"]) for e in doc["F"]}
        s12 = {(e["a1"], e["a2"], e["a3"]): audit.complex(e["value"]) for e in doc["sigma12"]}
        s23 = {(e["a1"], e["a2"], e["a3"]): audit.complex(e["value"]) for e in doc["sigma23"]}
    audit.report(path)
    return FTensor(md, F, s12, s23, fusion)


def load_fdata(path, md: ModularData, fusion: FusionTable | None = None) -> FTensor:
    return fdata_from_dict(_read_json(path), md, path, fusion)


# -------------------------------------------------------------- fusion.json


def fusion_to_dict(ft: FusionTable) -> dict:
    md = ft.base
    digits = numerics.decimal_digits(md.precision_bits)
    return {
        "theory": md.name,
        "N": [{"a1": a1, "a2": a2, "a3": a3, "n": n} for a1, a2, a3, n in ft.nonzero()],
        "eigenvalues": {
            a: [numerics.format_complex(z, digits) for z in fusion_eigenvalues(md, a)] for a in md.labels
        },
    }


def load_fusion(path, md: ModularData) -> FusionTable:
    doc = _read_json(path)
    validate_document(doc, "fusion")
    if doc["theory"] != md.name:
        raise InputError(f"{path}: theory {doc['theory']!r} does not match modular data {md.name!r}")
    return FusionTable.from_entries(md, ((e["a1"], e["a2"], e["a3"], e["n"]) for e in doc["N"]))


# ----------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class Tolerances:
    integer: float = INTEGER_TOL
    s_theorems: float = 1e-20
    s_inverse: float = S_INVERSE_TOL
    diagonalization: float = DIAGONALIZATION_TOL
    fb: float = FB_TOL
    vacuum_row: float = VACUUM_ROW_TOL

    def override(self, tol: float | None) -> Tolerances:
        """Replace every identity tolerance; the vacuum-row threshold is a lower bound and stays."""
        if tol is None:
            return self
        return replace(self, integer=tol, s_theorems=tol, s_inverse=tol, diagonalization=tol, fb=tol)


S_CHECKS = ("S symmetric", "S² = dual permutation", "S inverse = S with dual index", "vacuum row nonzero")
VERLINDE_CHECKS = ("Verlinde integrality", "fusion table matches Verlinde", "diagonalization", "eigenvalue ratio")
RING_CHECKS = ("nonnegativity", "unit law", "dual law", "commutativity", "associativity")


def _s_checks(md: ModularData, tol: Tolerances, invertible: bool) -> list[Check]:
    checks = [Check.measured("S symmetric", check_symmetric(md), tol.s_theorems)]
    try:
        with numerics.working_precision(md.precision_bits):
            charge_conjugation(md, tol.s_theorems)
            checks.append(Check.measured("S² = dual permutation", s_squared_residual(md), tol.s_theorems))
    except ChargeConjugationError as exc:
        checks.append(Check.failed("S² = dual permutation", exc.kind, residual=exc.residual, witness=exc.witness))
    if invertible:
        with numerics.working_precision(md.precision_bits):
            residual = s_inverse_residual(md, md.numeric_inverse())
        checks.append(
            Check.measured("S inverse = S with dual index", residual, tol.s_inverse, message="S⁻¹ differs from S with dualized index")
        )
    else:
        checks.append(Check.skipped("S inverse = S with dual index", "S is not invertible"))
    smallest = check_vacuum_row_nonzero(md)
    if smallest.value > tol.vacuum_row:
        checks.append(Check.passed("vacuum row nonzero", smallest.value))
    else:
        checks.append(Check.failed("vacuum row nonzero", "S_e^a vanishes", residual=smallest.value, witness=smallest.witness))
    return checks


def _verlinde_checks(md, tol, supplied: FusionTable | None) -> tuple[list[Check], FusionTable | None]:
    checks = []
    residual = verlinde_residual(md)
    computed = None
    if residual.value > tol.integer:
        checks.append(Check.measured("Verlinde integrality", residual, tol.integer, message="non-integer residual"))
    else:
        try:
            computed = fusion_table(md, tol.integer, check_ring=False)
        except FusionError as exc:
            checks.append(Check.failed("Verlinde integrality", str(exc), residual=exc.residual, witness=exc.triple))
        else:
            checks.append(Check.measured("Verlinde integrality", residual, tol.integer))

    if supplied is None:
        checks.append(Check.skipped("fusion table matches Verlinde", "no fusion table supplied"))
    elif computed is None:
        checks.append(Check.skipped("fusion table matches Verlinde", "Verlinde sums are not integral"))
    else:
        mismatch = next(
            ((a1, a2, a3) for a1 in md.labels for a2 in md.labels for a3 in md.labels
             if supplied.n(a1, a2, a3) != computed.n(a1, a2, a3)),
            None,
        )
        if mismatch is None:
            checks.append(Check.passed("fusion table matches Verlinde"))
        else:
            got, want = supplied.n(*mismatch), computed.n(*mismatch)
            checks.append(
                Check.failed(
                    "fusion table matches Verlinde",
                    f"supplied N = {got}, Verlinde gives {want}",
                    residual=abs(got - want),
                    witness=mismatch,
                )
            )

    table = supplied if supplied is not None else computed
    if table is None:
        checks += [Check.skipped(name, "no integral fusion table") for name in ("diagonalization", "eigenvalue ratio")]
    else:
        off, eig = diagonalization_residuals(md, table)
        checks.append(Check.measured("diagonalization", off, tol.diagonalization, message="S⁻¹𝒩(a)S is not diagonal"))
        checks.append(Check.measured("eigenvalue ratio", eig, tol.diagonalization, message="diagonal differs from S_a^b/S_e^b"))
    return checks, table


def run_verify(
    md: ModularData,
    ft: FTensor | None = None,
    fusion: FusionTable | None = None,
    tol: float | None = None,
    tolerances: Tolerances | None = None,
    warnings: tuple[str, ...] = (),
) -> VerificationReport:
    """Run every check in the fixed order structure, S theorems, Verlinde, ring axioms, F/B identities."""
    tols = (tolerances or Tolerances()).override(tol)
    structure = validate_structure(md, tols.s_theorems)
    checks = list(structure.checks)
    structure_ok = structure.ok

    if structure_ok:
        checks += _s_checks(md, tols, invertible=True)
    else:
        invertible = structure.check("S is invertible").status != FAIL
        checks += _s_checks(md, tols, invertible) if invertible else [
            Check.skipped(name, "structure checks failed") for name in S_CHECKS
        ]
    s_ok = all(c.status != FAIL for c in checks)
    vacuum_ok = not any(c.name == "vacuum row nonzero" and c.status == FAIL for c in checks)

    if structure_ok and vacuum_ok:
        verlinde, table = _verlinde_checks(md, tols, fusion)
    else:
        verlinde, table = [Check.skipped(name, "S-matrix prerequisites failed") for name in VERLINDE_CHECKS], fusion
    checks += verlinde

    if table is None:
        checks += [Check.skipped(name, "no integral fusion table") for name in RING_CHECKS]
    else:
        checks += list(verify_ring_axioms(table).checks)

    if ft is None:
        checks += [Check.skipped(name, "no F-tensor data supplied") for name in FB_CHECK_NAMES]
    elif not s_ok:
        checks += [Check.skipped(name, "S theorems failed") for name in FB_CHECK_NAMES]
    else:
        checks += fb_checks(ft, tols.fb)

    return VerificationReport(
        theory=md.name,
        checks=tuple(checks),
        tool_version=__version__,
        precision_bits=md.precision_bits,
        warnings=tuple(warnings) + structure.warnings,
    )


# ------------------------------------------------------------------ reports


def report_markdown(report: VerificationReport) -> str:
    counts = {status: sum(c.status == status for c in report.checks) for status in ("pass", "fail", "skip")}
    lines = [
        f"# Verification report: {report.theory}",
        "",
        f"- tool version: {report.tool_version}",
        f"- precision: {report.precision_bits} bits",
        f"- result: {'PASS' if report.ok else 'FAIL'} ({counts['pass']} passed, {counts['fail']} failed, {counts['skip']} skipped)",
        "",
        "## Checks",
        "",
    ]
    for c in report.checks:
        title = f"{c.name} ({c.paper_anchor})" if c.paper_anchor else c.name
        line = f"- [{c.status}] {title}"
        if c.residual:
            line += f": residual {c.residual}"
        if c.witness:
            line += f"; witness ({', '.join(c.witness)})"
        if c.message:
            line += f"; {c.message}"
        lines.append(line)
    if report.warnings:
        lines += ["", "## Warnings", ""] + [f"- {w}" for w in report.warnings]
    return "\n".join(lines) + "\n"


def report_json(report: VerificationReport) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def emit_report(report: VerificationReport, fmt: str = "md", path=None) -> None:
    text = report_markdown(report) if fmt == "md" else report_json(report)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------- CLI


def _input_error(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_INPUT)


def _loading():
    """Collect InputWarning messages raised while loading files."""
    return warnings.catch_warnings(record=True)


@click.group()
@click.version_option(__version__, prog_name="verlinde")
def main():
    """Fusion rules from modular S-matrices, and checks of the identities they satisfy."""


@main.command()
@click.argument("family", type=click.Choice(sorted(catalog.FAMILY_PARAMETERS)))
@click.option("--level", "-k", "level", type=int, help="SU(2) level k.")
@click.option("--n", "n", type=int, help="Order of the cyclic group for the abelian family.")
@click.option("--p", "p", type=int, help="Minimal model p.")
@click.option("--q", "q", type=int, help="Minimal model q.")
@click.option("--precision-bits", type=int, help="Working precision in bits.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Output file (default: stdout).")
def gen(family, level, n, p, q, precision_bits, output):
    """Write modular data for a catalog theory."""
    given = {"k": level, "n": n, "p": p, "q": q}
    needed = catalog.FAMILY_PARAMETERS[family]
    missing = [name for name in needed if given[name] is None]
    if missing:
        _input_error(f"{family} needs {', '.join('--level' if m == 'k' else '--' + m for m in missing)}")
    try:
        bits = numerics.resolve_precision(precision_bits)
        md = catalog.CatalogEntry(family, {name: given[name] for name in needed}).generate(bits)
    except ValueError as exc:
        _input_error(str(exc))
    save_modular(md, output)


@main.command()
@click.argument("modular_file", type=click.Path(dir_okay=False))
@click.option("--precision-bits", type=int, help="Working precision in bits.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Output file (default: stdout).")
def fuse(modular_file, precision_bits, output):
    """Compute the fusion table of MODULAR_FILE with the Verlinde formula."""
    try:
        with _loading():
            md = load_modular(modular_file, precision_bits)
    except (InputError, ValueError) as exc:
        _input_error(str(exc))
    try:
        table = fusion_table(md)
    except (FusionError, ZeroDivisionError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FAIL)
    _write_json(fusion_to_dict(table), output)


@main.command()
@click.argument("modular_file", type=click.Path(dir_okay=False))
@click.option("--fdata", type=click.Path(dir_okay=False), help="F-tensor and sigma-scalar fixture.")
@click.option("--fusion", "fusion_file", type=click.Path(dir_okay=False), help="Fusion table to check against Verlinde.")
@click.option("--tol", type=float, help="Override every identity tolerance.")
@click.option("--precision-bits", type=int, help="Working precision in bits.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="Report file (default: stdout).")
@click.option("--format", "fmt", type=click.Choice(["md", "json"]), default="md", show_default=True)
def verify(modular_file, fdata, fusion_file, tol, precision_bits, report_path, fmt):
    """Run every check on MODULAR_FILE and write a report; exit 1 if any check fails."""
    try:
        with _loading() as caught:
            warnings.simplefilter("always", InputWarning)
            md = load_modular(modular_file, precision_bits)
            table = load_fusion(fusion_file, md) if fusion_file else None
            ft = None
            if fdata:
                try:
                    verlinde_table = fusion_table(md, check_ring=False)
                except (FusionError, ZeroDivisionError):
                    verlinde_table = None
                if verlinde_table is not None:
                    ft = load_fdata(fdata, md, verlinde_table)
    except (InputError, ValueError) as exc:
        _input_error(str(exc))
    notes = tuple(str(w.message) for w in caught if issubclass(w.category, InputWarning))
    if fdata and ft is None:
        notes += ("F-tensor data not loaded: the Verlinde fusion table is not integral",)
    report = run_verify(md, ft, table, tol=tol, warnings=notes)
    try:
        emit_report(report, fmt, report_path)
    except OSError as exc:
        _input_error(f"cannot write report: {exc.strerror}")
    sys.exit(EXIT_OK if report.ok else EXIT_FAIL)


@main.group(name="catalog")
def catalog_group():
    """Catalog of built-in theories."""


@catalog_group.command(name="list")
def catalog_list():
    """List the theory families and their parameters."""
    flags = {"k": "--level K", "n": "--n N", "p": "--p P", "q": "--q Q"}
    for family, params in catalog.FAMILY_PARAMETERS.items():
        click.echo(f"{family:<10} {' '.join(flags[p] for p in params)}".rstrip())
    click.echo("")
    click.echo("reference models: " + ", ".join(e.title for e in catalog.reference_models()))


if __name__ == "__main__":
    main()
