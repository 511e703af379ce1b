"""Command-line interface: reports, activation and reproduction runs."""

import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated

import cappa
import msgspec
import numpy as np
from rich.console import Console

from ncycle_entropic.core.box import Box, decode_box, encode_box
from ncycle_entropic.core.errors import NCycleError, SizeGuardError
from ncycle_entropic.core.gamma import GammaVector
from ncycle_entropic.core.types import (
    EXIT_DATA,
    EXIT_LOCAL,
    EXIT_NOT_ACTIVATED,
    EXIT_OK,
    EXIT_USAGE,
    OutputFormat,
    PresetName,
)
from ncycle_entropic.engine.activation import activation_search, bc_of_mixture, expansion_eq9
from ncycle_entropic.engine.inequalities import full_report
from ncycle_entropic.engine.logging import RunContext, configure_logging
from ncycle_entropic.engine.oracle import MAX_DETERMINISTIC_POINTS, decompose_local, facet_check
from ncycle_entropic.simulation.acceptance import AcceptanceScale, run_acceptance
from ncycle_entropic.simulation.config import RunConfig
from ncycle_entropic.simulation.experiments import (
    appendix_experiment,
    check_appendix_size,
    oracle_agreement,
    threshold_sweep,
)
from ncycle_entropic.simulation.export import atomic_write, decomposition_rows, emit, emit_sections
from ncycle_entropic.simulation.hashing import short_fingerprint
from ncycle_entropic.simulation.presets import build_preset

logger = logging.getLogger("ncycle_entropic").getChild("cli")

# Exact LP certificates are attempted in `report` up to this many deterministic points.
REPORT_LP_LIMIT = 2**14


class UsageError(Exception):
    """Flags that parse but do not make sense together."""


# --- records ------------------------------------------------------------------


class MembershipRecord(msgspec.Struct, kw_only=True):
    method: str
    is_local: bool
    verdict: str
    excess: float | None
    gamma: str | None
    detail: str = ""


class ActivationRecord(msgspec.Struct, kw_only=True):
    box: str
    found: bool
    v_star: float | None
    log_v_star: float | None
    k_star: int | None
    bc_at_v: float | None
    normalized_violation: float | None
    stage: str | None
    companion: str
    depolarized: bool
    operation: str
    diagnostic: str | None
    mixture: str | None
    certificate_representable: bool
    fingerprint: str


class CurveRecord(msgspec.Struct, kw_only=True):
    v: float
    k: int
    bc_value_exact: float
    bc_value_eq9: float


# --- shared options -----------------------------------------------------------


@dataclass
class Common:
    config: Annotated[Path | None, cappa.Arg(long=True, help="TOML run configuration")] = None
    n: Annotated[int | None, cappa.Arg(long="--n")] = None
    d: Annotated[int | None, cappa.Arg(long="--d")] = None
    epsilon: Annotated[float | None, cappa.Arg(long=True)] = None
    tol: Annotated[float | None, cappa.Arg(long=True, help="Violation tolerance")] = None
    seed: Annotated[int | None, cappa.Arg(long=True)] = None
    fmt: Annotated[OutputFormat | None, cappa.Arg(long="--format")] = None
    out: Annotated[Path | None, cappa.Arg(long=True, help="Write output here instead of stdout")] = None
    verbose: Annotated[bool, cappa.Arg(long=True, short="-v")] = False

    def run_config(self, **extra: object) -> RunConfig:
        base = RunConfig.from_toml(self.config) if self.config is not None else RunConfig()
        flags: dict[str, object] = {
            "n": self.n,
            "d": self.d,
            "epsilon": self.epsilon,
            "violation_tol": self.tol,
            "seed": self.seed,
            "output_format": self.fmt,
        }
        try:
            return base.with_overrides(**(flags | extra))
        except msgspec.ValidationError as exc:
            raise UsageError(str(exc)) from exc

    def start(self, command: str) -> None:
        configure_logging(logging.INFO if self.verbose else logging.WARNING, RunContext(command=command))


@dataclass
class BoxInput(Common):
    box_file: Annotated[Path | None, cappa.Arg(help="JSON box document")] = None
    preset: Annotated[PresetName | None, cappa.Arg(long=True)] = None

    def load_box(self, config: RunConfig) -> Box:
        if self.box_file is not None and self.preset is not None:
            msg = "Give either a box file or --preset, not both"
            raise UsageError(msg)
        if self.box_file is not None:
            return decode_box(self.box_file.read_bytes(), tol=config.data_tol)
        if self.preset is not None:
            try:
                return build_preset(self.preset, config.n, config.epsilon, config.d)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
        msg = "A box file or --preset is required"
        raise UsageError(msg)


# --- commands -----------------------------------------------------------------


@cappa.command(name="report", help="Evaluate every inequality and decide membership")
@dataclass
class Report(BoxInput):
    def __call__(self) -> int:
        self.start("report")
        config = self.run_config()
        box = self.load_box(config)
        report = full_report(box, config.violation_tol, config.disturbance_tol)
        verdicts: list[MembershipRecord] = []
        if box.d == 2:
            verdict = facet_check(box, config.violation_tol)
            verdicts.append(
                MembershipRecord(
                    method=verdict.method,
                    is_local=verdict.is_local,
                    verdict=verdict.label,
                    excess=verdict.excess,
                    gamma=verdict.gamma.label if verdict.gamma is not None else None,
                ),
            )
        if box.d**box.n <= min(REPORT_LP_LIMIT, MAX_DETERMINISTIC_POINTS):
            lp = decompose_local(box, config.data_tol)
            if lp.decomposition is not None:
                detail = f"{len(lp.decomposition)} vertices"
            elif lp.gamma is None:
                detail = lp.note or "Farkas certificate"
            else:
                detail = ""
            verdicts.append(
                MembershipRecord(
                    method=lp.method,
                    is_local=lp.is_local,
                    verdict=lp.label,
                    excess=lp.excess,
                    gamma=lp.gamma.label if lp.gamma is not None else None,
                    detail=detail,
                ),
            )
        emit_sections(
            {"inequalities": report.rows(), "membership": verdicts},
            config.output_format,
            out=self.out,
            title=box.label or "box",
        )
        return EXIT_OK


@cappa.command(name="activate", help="Mix with the classical companion until a BC inequality is violated")
@dataclass
class Activate(BoxInput):
    no_depolarize: Annotated[bool, cappa.Arg(long="--no-depolarize")] = False
    certificate: Annotated[Path | None, cappa.Arg(long=True, help="Write the violating mixture as a box file")] = None
    decomposition: Annotated[Path | None, cappa.Arg(long=True, help="Write the LP certificate of a local box as CSV")] = None

    def __call__(self) -> int:
        self.start("activate")
        config = self.run_config(depolarize=False if self.no_depolarize else None)
        box = self.load_box(config)
        result = activation_search(
            box,
            config.violation_tol,
            config.grid(),
            depolarize_first=config.depolarize,
            disturbance_tol=config.disturbance_tol,
        )
        record = ActivationRecord(
            box=box.label or "box",
            found=result.found,
            v_star=result.v_star,
            log_v_star=result.log_v_star,
            k_star=None if result.k_star is None else result.k_star + 1,
            bc_at_v=result.bc_at_v,
            normalized_violation=result.normalized_violation,
            stage=result.stage,
            companion=result.companion.label,
            depolarized=result.used_depolarization,
            operation=result.operation.render(),
            diagnostic=result.diagnostic,
            mixture=result.describe_mixture(),
            certificate_representable=result.certificate_representable,
            fingerprint=short_fingerprint(config),
        )
        emit([record], config.output_format, out=self.out, title="activation")

        if result.found and self.certificate is not None:
            if result.certificate_representable:
                atomic_write(self.certificate, encode_box(result.certificate_mixture()).decode() + "\n")
            else:
                logger.warning("No certificate written: the violation at ln v=%.4g does not survive double precision", result.log_v_star)
        if result.locally_explained:
            if self.decomposition is not None:
                verdict = decompose_local(box, config.data_tol)
                if verdict.decomposition is not None:
                    emit(decomposition_rows(verdict.decomposition), "csv", out=self.decomposition)
            return EXIT_LOCAL
        return EXIT_OK if result.found else EXIT_NOT_ACTIVATED


@cappa.command(name="verify-paper", help="Run every reproduction check and print a pass/fail table")
@dataclass
class VerifyPaper(Common):
    quick: Annotated[bool, cappa.Arg(long=True, help="Reduced trial counts")] = False
    workers: Annotated[int | None, cappa.Arg(long=True)] = None

    def __call__(self) -> int:
        self.start("verify-paper")
        config = self.run_config(workers=self.workers)
        scale = AcceptanceScale.quick() if self.quick else AcceptanceScale.full()
        rows = run_acceptance(config, scale)
        emit(rows, config.output_format, out=self.out, title=f"reproduction checks ({short_fingerprint(config)})")
        return EXIT_OK if all(r.passed for r in rows) else EXIT_NOT_ACTIVATED


@cappa.command(name="emit-curve", help="BC of the isotropic mixture against v, exact and expanded")
@dataclass
class EmitCurve(Common):
    points: Annotated[int, cappa.Arg(long=True)] = 29
    v_max: Annotated[float, cappa.Arg(long="--v-max")] = 1e-1
    v_min: Annotated[float, cappa.Arg(long="--v-min")] = 1e-8

    def __call__(self) -> int:
        self.start("emit-curve")
        config = self.run_config(output_format=self.fmt or "csv")
        if not 0.0 < self.v_min < self.v_max < 1.0 or self.points < 2:
            msg = "emit-curve needs 0 < v-min < v-max < 1 and at least two points"
            raise UsageError(msg)
        n, eps = config.n, config.epsilon
        box = build_preset("iso", n, eps)
        companion = GammaVector.all_plus(n)
        records = [
            CurveRecord(
                v=float(v),
                k=n,
                bc_value_exact=bc_of_mixture(box, companion, float(v), n - 1),
                bc_value_eq9=expansion_eq9(n, eps, float(v)),
            )
            for v in np.logspace(math.log10(self.v_max), math.log10(self.v_min), self.points)
        ]
        emit(records, config.output_format, out=self.out, title=f"isotropic n={n} ε={eps:g}")
        return EXIT_OK


@cappa.command(name="sweep", help="Activation of isotropic boxes across ε")
@dataclass
class Sweep(Common):
    def __call__(self) -> int:
        self.start("sweep")
        config = self.run_config()
        rows = threshold_sweep(config.n, tol=config.violation_tol, grid=config.grid())
        emit(rows, config.output_format, out=self.out, title=f"threshold sweep n={config.n}")
        return EXIT_OK


@cappa.command(name="agree", help="Compare the facet check with the LP decomposition on random boxes")
@dataclass
class Agree(Common):
    trials: Annotated[int | None, cappa.Arg(long=True)] = None
    min_nonlocal: Annotated[int | None, cappa.Arg(long="--min-nonlocal", help="Top up with sampled nonlocal boxes until this many were compared")] = None

    def __call__(self) -> int:
        self.start("agree")
        config = self.run_config(trials=self.trials, min_nonlocal=self.min_nonlocal)
        summary = oracle_agreement(
            config.n,
            config.trials,
            config.seed,
            min_nonlocal=config.min_nonlocal,
            tol=config.data_tol,
            progress=self.verbose,
        )
        emit([summary], config.output_format, out=self.out, title=f"oracle agreement ({short_fingerprint(config)})")
        return EXIT_OK if summary.disagreements == 0 else EXIT_NOT_ACTIVATED


@cappa.command(name="appendix", help="Activate random nonsignalling boxes without the twirl")
@dataclass
class Appendix(Common):
    trials: Annotated[int | None, cappa.Arg(long=True)] = None
    workers: Annotated[int | None, cappa.Arg(long=True)] = None
    conjecture: Annotated[bool, cappa.Arg(long=True, help="Lift the n <= 7 guard")] = False
    min_nonlocal: Annotated[int | None, cappa.Arg(long="--min-nonlocal", help="Top up with sampled nonlocal boxes until this many were tested")] = None

    def __call__(self) -> int:
        self.start("appendix")
        config = self.run_config(
            trials=self.trials,
            workers=self.workers,
            conjecture=self.conjecture or None,
            min_nonlocal=self.min_nonlocal,
        )
        try:
            check_appendix_size(config.n, config.conjecture)
        except SizeGuardError as exc:
            raise UsageError(str(exc)) from exc
        summary = appendix_experiment(
            config.n,
            config.trials,
            config.seed,
            min_nonlocal=config.min_nonlocal,
            conjecture=config.conjecture,
            tol=config.violation_tol,
            grid=config.grid(),
            workers=config.workers,
            progress=self.verbose,
        )
        emit([summary], config.output_format, out=self.out, title=f"appendix n={config.n} ({short_fingerprint(config)})")
        return EXIT_OK if summary.all_activated else EXIT_NOT_ACTIVATED


@cappa.command(name="ncycle")
@dataclass
class Ncycle:
    """Entropic activation of nonlocal boxes in the n-cycle scenario."""

    command: cappa.Subcommands[Report | Activate | VerifyPaper | EmitCurve | Sweep | Agree | Appendix]


def run(argv: list[str] | None = None) -> int:
    """Parse, dispatch and translate failures into exit codes."""
    try:
        parsed = cappa.parse(Ncycle, argv=argv, completion=False, version=None)
    except cappa.Exit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    err = Console(stderr=True)
    try:
        return parsed.command()
    except UsageError as exc:
        err.print(f"[bold red]usage:[/bold red] {exc}")
        return EXIT_USAGE
    except (NCycleError, msgspec.MsgspecError, OSError, ValueError) as exc:
        err.print(f"[bold red]error:[/bold red] {exc}")
        return EXIT_DATA


def main() -> None:
    """Entry point for CLI."""
    sys.exit(run())


if __name__ == "__main__":
    main()
