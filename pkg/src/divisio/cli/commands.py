"""
The divisio command line.

Sweeps print CSV (or JSON with ``--format json``) to stdout unless ``--out``
names a file; logs always go to stderr. ``query`` exits 0 when the pair is
divisible at the tolerance and 1 when it is not. Bad input or a failed solve
exits 2.
"""

from __future__ import annotations

import logging
import sys
from enum import StrEnum
from pathlib import Path  # noqa: TC003
from typing import Annotated, Any

import structlog
import typer
from typer import Option

from divisio.channels import ChoiFormatError
from divisio.cli.base import CLI, CLIOptions, callback
from divisio.divisibility import (
    DivisibilityError,
    DivisibilityKind,
    UnsupportedDimension,
    report_json,
)
from divisio.experiments import (
    RUNNERS,
    Experiment,
    ExperimentConfigError,
    NonCptpInput,
    OutputFormat,
    experiment_config,
    run_query,
)
from divisio.matlin import DimensionMismatch
from divisio.sdp import SdpError
from divisio.settings import SettingsError

logger = structlog.get_logger()

NON_DIVISIBLE_EXIT_CODE = 1


class QueryMode(StrEnum):
    cp = "cp"
    p = "p"

    @property
    def kind(self) -> DivisibilityKind:
        return DivisibilityKind.CP if self is QueryMode.cp else DivisibilityKind.P_qubit


def configure_logging(*, verbose: bool = False) -> None:
    """Send structlog output to the current stderr."""
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.DEBUG if verbose else logging.INFO
        ),
        logger_factory=_stderr_logger,
        cache_logger_on_first_use=False,
    )


def _stderr_logger(*_: Any) -> structlog.PrintLogger:
    # looked up per call so a swapped sys.stderr is honoured
    return structlog.PrintLogger(sys.stderr)


Steps = Annotated[int | None, Option(help="Grid points per axis.")]
Out = Annotated[Path | None, Option(help="Write output here instead of stdout.")]
Format = Annotated[OutputFormat, Option("--format", help="Output format.")]
Tolerance = Annotated[
    float | None,
    Option("--tol", help="Distance at or below which a pair counts as divisible."),
]
Seed = Annotated[int, Option(help="Run seed; per-sample seeds derive from it.")]


class DivisioCLI(CLI[CLIOptions]):
    """Quantify how far two-step quantum dynamics are from being divisible."""

    failures = (
        ChoiFormatError,
        DimensionMismatch,
        DivisibilityError,
        ExperimentConfigError,
        NonCptpInput,
        OSError,
        SdpError,
        SettingsError,
        UnsupportedDimension,
    )

    @callback()
    def main(
        self,
        verbose: Annotated[bool, Option("--verbose", "-v", help="Log solver detail.")] = False,
    ):
        configure_logging(verbose=verbose)

    def _sweep(self, experiment: Experiment, **values: Any) -> None:
        cfg = experiment_config(
            experiment=experiment,
            **{name: value for name, value in values.items() if value is not None},
        )
        text = RUNNERS[experiment](cfg).write()
        if cfg.output_path is None:
            typer.echo(text, nl=False)

    def collisional(
        self,
        steps: Steps = None,
        p_min: float = 0.0,
        p_max: float = 1.0,
        out: Out = None,
        output_format: Format = OutputFormat.csv,
        tol: Tolerance = None,
    ):
        """CP and P divisibility distances of the collisional qubit model over p."""
        self._sweep(
            Experiment.collisional,
            steps=steps,
            p_min=p_min,
            p_max=p_max,
            output_path=out,
            format=output_format,
            tolerance=tol,
        )

    def dephasing(
        self,
        steps: Steps = None,
        t_min: float = 0.0,
        t_max: Annotated[float | None, Option(help="Defaults to 2π.")] = None,
        out: Out = None,
        output_format: Format = OutputFormat.csv,
        tol: Tolerance = None,
    ):
        """CP divisibility of qubit dephasing over the t1 ≤ t2 triangle."""
        self._sweep(
            Experiment.dephasing,
            steps=steps,
            t_min=t_min,
            t_max=t_max,
            output_path=out,
            format=output_format,
            tolerance=tol,
        )

    def dephasing_hd(
        self,
        dim: Annotated[int, Option(help="Dimension of the dephased system.")] = 5,
        steps: Steps = None,
        p_min: float = 0.0,
        p_max: float = 1.0,
        out: Out = None,
        output_format: Format = OutputFormat.csv,
        tol: Tolerance = None,
    ):
        """CP divisibility of d-level dephasing between projection probabilities p and q."""
        self._sweep(
            Experiment.dephasing_hd,
            dim=dim,
            steps=steps,
            p_min=p_min,
            p_max=p_max,
            output_path=out,
            format=output_format,
            tolerance=tol,
        )

    def unitary_mix(
        self,
        dim: Annotated[
            list[int] | None, Option(help="Dimension to time; repeat for several.")
        ] = None,
        n: Annotated[
            list[int] | None, Option(help="Mixture size to time; repeat for several.")
        ] = None,
        samples: Annotated[int, Option(help="Samples per (dim, n).")] = 20,
        seed: Seed = 0,
        out: Out = None,
        output_format: Format = OutputFormat.csv,
        tol: Tolerance = None,
    ):
        """Time the CP distance solve after a random mixture of n unitaries."""
        self._sweep(
            Experiment.unitary_mix,
            dims=tuple(dim) if dim else None,
            mixture_sizes=tuple(n) if n else None,
            samples=samples,
            seed=seed,
            output_path=out,
            format=output_format,
            tolerance=tol,
        )

    def query(
        self,
        choi_a: Annotated[Path, Option(help="Choi file of the first step.")],
        choi_b: Annotated[Path, Option(help="Choi file of the full two-step map.")],
        mode: Annotated[QueryMode, Option(help="Divisibility notion.")] = QueryMode.cp,
        out: Out = None,
        tol: Tolerance = None,
        allow_noncptp: Annotated[
            bool, Option("--allow-noncptp", help="Skip the CPTP check on the inputs.")
        ] = False,
    ):
        """Quantify divisibility of one pair; exits 1 when it is not divisible."""
        values = {"tolerance": tol} if tol is not None else {}
        cfg = experiment_config(
            experiment=Experiment.query,
            choi_a=choi_a,
            choi_b=choi_b,
            mode=mode.kind,
            output_path=out,
            format=OutputFormat.json,
            allow_noncptp=allow_noncptp,
            **values,
        )
        report, divisible = run_query(cfg)
        text = report_json(report)
        if out is None:
            typer.echo(text)
        else:
            out.write_text(text)
        if not divisible:
            raise typer.Exit(NON_DIVISIBLE_EXIT_CODE)


def load() -> DivisioCLI:
    """Instantiate the divisio CLI."""
    return DivisioCLI(CLIOptions(name="divisio"))
