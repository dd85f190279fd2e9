"""The divisibility studies as seeded parameter sweeps.

Grid cells are independent and run on a thread pool capped by
``DIVISIO_THREADS``. The timing study runs its solves one after another on
the calling thread so that measurements do not contend.
"""

from __future__ import annotations

import time
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from itertools import product
from typing import TYPE_CHECKING, Any

import numpy as np
import structlog

from divisio.channels import (
    collisional_pair,
    dephasing_hd,
    dephasing_probability,
    dephasing_t,
    identity_channel,
    is_cptp,
    read_choi,
    unitary_mixture,
)
from divisio.diamond import diamond_norm
from divisio.divisibility import (
    AbsoluteFlag,
    DivisibilityKind,
    classify_absolute,
    cp_distance,
    p_distance_qubit,
)
from divisio.experiments.config import Experiment, ExperimentConfig
from divisio.experiments.output import (
    COLLISIONAL_COLUMNS,
    DEPHASING_COLUMNS,
    DEPHASING_HD_COLUMNS,
    UNITARY_MIX_COLUMNS,
    ExperimentResult,
)
from divisio.settings import load_settings

if TYPE_CHECKING:
    from pathlib import Path

    from divisio.channels import Channel
    from divisio.divisibility import DivisibilityReport

logger = structlog.get_logger()


class NonCptpInput(ValueError):
    """A queried Choi file does not describe a CPTP map."""


@dataclass(frozen=True)
class TimingRecord:
    """One timed solve of the unitary-mixture study."""

    d: int
    n: int
    sample: int
    seed: int
    solve_seconds: float
    distance: float

    def __post_init__(self):
        if self.solve_seconds <= 0:
            raise ValueError(f"solve time must be positive, got {self.solve_seconds}")


def _sweep[T](cells: Iterable[T], cell: Callable[[T], dict[str, Any]]) -> list[dict[str, Any]]:
    """Evaluate ``cell`` on every grid point, keeping grid order."""

    def guarded(point: T) -> dict[str, Any]:
        try:
            return cell(point)
        except Exception:
            logger.exception("experiment cell failed", cell=point)
            raise

    with ThreadPoolExecutor(max_workers=load_settings().worker_count()) as pool:
        return list(pool.map(guarded, cells))


def _started(cfg: ExperimentConfig, cells: int) -> float:
    logger.info(
        "experiment started",
        experiment=cfg.experiment,
        seed=cfg.seed,
        cells=cells,
        tolerance=cfg.divisible_tolerance,
    )
    return time.perf_counter()


def _finished(result: ExperimentResult, start: float) -> ExperimentResult:
    _log_finished(result.config, len(result.rows), start)
    return result


def _log_finished(cfg: ExperimentConfig, rows: int, start: float) -> None:
    logger.info(
        "experiment finished",
        experiment=cfg.experiment,
        seed=cfg.seed,
        rows=rows,
        seconds=time.perf_counter() - start,
    )


def run_collisional(cfg: ExperimentConfig) -> ExperimentResult:
    """CP- and P-divisibility distances of the collisional model over ``p``."""
    grid = cfg.p_grid()
    start = _started(cfg, len(grid))

    def cell(p: float) -> dict[str, Any]:
        first, target = collisional_pair(p)
        report = classify_absolute(
            cp_distance(target, first), target, first, tolerance=cfg.divisible_tolerance
        )
        return {
            "p": p,
            "cp_distance": report.distance,
            "p_distance": p_distance_qubit(target, first).distance,
            "absolute_flag": report.absolute_flag,
            "trivial_bounds": report.trivial_bounds,
        }

    return _finished(ExperimentResult(cfg, COLLISIONAL_COLUMNS, _sweep(grid, cell)), start)


def run_dephasing(cfg: ExperimentConfig) -> ExperimentResult:
    """CP-divisibility distance of the qubit dephasing model on the ``t1 ≤ t2`` triangle."""
    times = cfg.t_grid()
    cells = [(t1, t2) for i, t1 in enumerate(times) for t2 in times[i:]]
    start = _started(cfg, len(cells))

    def cell(point: tuple[float, float]) -> dict[str, Any]:
        t1, t2 = point
        return {
            "t1": t1,
            "t2": t2,
            "distance": cp_distance(dephasing_t(t2), dephasing_t(t1)).distance,
            "p1": dephasing_probability(t1),
            "p2": dephasing_probability(t2),
        }

    return _finished(ExperimentResult(cfg, DEPHASING_COLUMNS, _sweep(cells, cell)), start)


def run_dephasing_hd(cfg: ExperimentConfig) -> ExperimentResult:
    """CP-divisibility of ``d``-level dephasing from projection probability ``p`` to ``q``.

    The summary fits the backward cells (``q < p``) to a line in ``p − q``;
    the slope should match ``C_d = ‖I − Σ_k Π_k(·)Π_k‖_⋄``.
    """
    d = cfg.dim
    grid = cfg.p_grid()
    cells = list(product(grid, grid))
    start = _started(cfg, len(cells))

    def cell(point: tuple[float, float]) -> dict[str, Any]:
        p, q = point
        target, first = dephasing_hd(d, q), dephasing_hd(d, p)
        report = classify_absolute(
            cp_distance(target, first), target, first, tolerance=cfg.divisible_tolerance
        )
        return {
            "p": p,
            "q": q,
            "distance": report.distance,
            "identity_flag": report.absolute_flag is AbsoluteFlag.identity_optimal,
        }

    rows = _sweep(cells, cell)
    constant = diamond_norm(identity_channel(d) - dephasing_hd(d, 1.0)).value
    summary: dict[str, Any] = {"d": d, "full_dephasing_norm": constant}
    backward = [row for row in rows if row["q"] < row["p"]]
    if len(backward) >= 2:  # noqa: PLR2004
        gaps = np.array([row["p"] - row["q"] for row in backward])
        distances = np.array([row["distance"] for row in backward])
        slope, intercept = np.polyfit(gaps, distances, 1)
        summary |= {
            "slope": float(slope),
            "intercept": float(intercept),
            "fit_residual": float(np.max(np.abs(slope * gaps + intercept - distances))),
        }
    result = ExperimentResult(cfg, DEPHASING_HD_COLUMNS, rows, summary)
    return _finished(result, start)


def sample_seed(seed: int, d: int, n: int, sample: int) -> int:
    """Seed of one sample, derived from the run seed so samples reproduce independently."""
    state = np.random.SeedSequence([seed, d, n, sample]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def timing_summary(records: Iterable[TimingRecord]) -> dict[str, Any]:
    """Mean and standard deviation of solve time per ``(d, n)``, plus a log–log degree fit in ``d``."""
    records = list(records)
    groups: dict[tuple[int, int], list[float]] = {}
    for record in records:
        groups.setdefault((record.d, record.n), []).append(record.solve_seconds)
    per_group = [
        {
            "d": d,
            "n": n,
            "mean_seconds": float(np.mean(times)),
            "std_seconds": float(np.std(times, ddof=1)) if len(times) > 1 else 0.0,
            "samples": len(times),
        }
        for (d, n), times in sorted(groups.items())
    ]
    dims = sorted({record.d for record in records})
    exponent = None
    if len(dims) >= 2:  # noqa: PLR2004
        means = [
            np.mean([record.solve_seconds for record in records if record.d == d]) for d in dims
        ]
        exponent = float(np.polyfit(np.log(dims), np.log(means), 1)[0])
    return {"groups": per_group, "scaling_exponent": exponent}


def run_unitary_mix(cfg: ExperimentConfig) -> ExperimentResult:
    """Time the CP-distance solve for ``Λ_{2|0} = I`` after a random unitary mixture."""
    cells = list(product(cfg.dims, cfg.mixture_sizes, range(cfg.samples)))
    start = _started(cfg, len(cells))
    records = []
    for d, n, sample in cells:
        seed = sample_seed(cfg.seed, d, n, sample)
        first = unitary_mixture(d, n, np.random.default_rng(seed))
        report = cp_distance(identity_channel(d), first)
        records.append(
            TimingRecord(d, n, sample, seed, report.solve_seconds, report.distance)
        )
    result = ExperimentResult(
        cfg,
        UNITARY_MIX_COLUMNS,
        [asdict(record) for record in records],
        timing_summary(records),
    )
    return _finished(result, start)


def _read_cptp(path: Path, allow_noncptp: bool) -> Channel:
    channel = read_choi(path)
    if not allow_noncptp:
        report = is_cptp(channel)
        if not report:
            raise NonCptpInput(
                f"{path} is not CPTP ({report.verdict}, min eigenvalue "
                f"{report.min_eigenvalue:.2e}, trace deviation {report.trace_deviation:.2e})"
            )
    return channel


def run_query(cfg: ExperimentConfig) -> tuple[DivisibilityReport, bool]:
    """Quantify divisibility of the pair in ``choi_a`` (first step) and ``choi_b`` (target).

    Returns the report and whether it is divisible at the configured tolerance.

    Raises:
        ChoiFormatError: a file is malformed.
        NonCptpInput: a file is not CPTP and ``allow_noncptp`` is unset.
    """
    first = _read_cptp(cfg.choi_a, cfg.allow_noncptp)
    target = _read_cptp(cfg.choi_b, cfg.allow_noncptp)
    start = _started(cfg, 1)
    if cfg.mode is DivisibilityKind.P_qubit:
        report = p_distance_qubit(target, first)
    else:
        report = cp_distance(target, first, witness=True)
    report = classify_absolute(report, target, first, tolerance=cfg.divisible_tolerance)
    divisible = report.is_divisible(cfg.divisible_tolerance)
    logger.info(
        "query verdict",
        mode=cfg.mode,
        distance=report.distance,
        divisible=divisible,
        flag=report.absolute_flag,
    )
    _log_finished(cfg, 1, start)
    return report, divisible


RUNNERS: dict[Experiment, Callable[[ExperimentConfig], ExperimentResult]] = {
    Experiment.collisional: run_collisional,
    Experiment.dephasing: run_dephasing,
    Experiment.dephasing_hd: run_dephasing_hd,
    Experiment.unitary_mix: run_unitary_mix,
}
