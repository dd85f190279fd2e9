from __future__ import annotations

import csv
import io
import json
import math
from typing import TYPE_CHECKING

import numpy as np
import pytest

from divisio.channels import (
    Channel,
    collisional_pair,
    dephasing_hd,
    identity_channel,
    write_choi,
)
from divisio.diamond import diamond_distance, probe_lower_bound
from divisio.divisibility import AbsoluteFlag, DivisibilityKind, cp_distance
from divisio.experiments import (
    NonCptpInput,
    TimingRecord,
    experiment_config,
    run_collisional,
    run_dephasing,
    run_dephasing_hd,
    run_query,
    run_unitary_mix,
    timing_summary,
)
from divisio.matlin import HermitianOperator

if TYPE_CHECKING:
    from pathlib import Path

    from pytest_subtests import SubTests

ZERO = 1e-6
POSITIVE = 1e-4


def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def test_collisional_regimes(subtests: SubTests):
    cfg = experiment_config(experiment="collisional", steps=5)
    result = run_collisional(cfg)
    rows = {row["p"]: row for row in result.rows}
    with subtests.test("zeros"):
        for p in (0.0, 0.5):
            assert rows[p]["cp_distance"] <= ZERO
            assert rows[p]["p_distance"] <= ZERO
    with subtests.test("positive-but-not-cp"):
        assert rows[0.25]["cp_distance"] > POSITIVE
        assert rows[0.25]["p_distance"] <= ZERO
    with subtests.test("not-p-divisible"):
        assert rows[0.75]["p_distance"] > POSITIVE
    with subtests.test("trivial-bounds"):
        for row in result.rows:
            assert row["cp_distance"] <= min(row["trivial_bounds"]) + ZERO
    with subtests.test("csv"):
        parsed = read_csv(result.to_csv())
        assert list(parsed[0]) == ["p", "cp_distance", "p_distance"]
        assert [float(row["p"]) for row in parsed] == [0, 0.25, 0.5, 0.75, 1]
    with subtests.test("json"):
        document = json.loads(result.to_json())
        assert document["config"]["seed"] == 0
        assert document["rows"][3]["absolute_flag"] in set(AbsoluteFlag)
        assert len(document["rows"][3]["trivial_bounds"]) == 2


def test_dephasing_examples():
    cfg = experiment_config(
        experiment="dephasing", steps=3, t_min=math.pi / 2, t_max=3 * math.pi / 2
    )
    result = run_dephasing(cfg)
    distances = {(round(row["t1"], 6), round(row["t2"], 6)): row["distance"] for row in result.rows}
    half, full, three_halves = (round(t, 6) for t in (math.pi / 2, math.pi, 3 * math.pi / 2))
    assert len(result.rows) == 6
    assert distances[half, full] <= ZERO
    assert distances[full, three_halves] > POSITIVE
    for t in (half, full, three_halves):
        assert distances[t, t] <= ZERO
    assert list(read_csv(result.to_csv())[0]) == ["t1", "t2", "distance"]


def check_dephasing_boundary(rows: list[dict]) -> None:
    for row in rows:
        if row["p2"] >= row["p1"] - 1e-12:
            assert row["distance"] <= ZERO, row
        elif row["p1"] - row["p2"] > 0.05:
            assert row["distance"] > POSITIVE, row


@pytest.mark.slow
def test_dephasing_divisibility_boundary():
    result = run_dephasing(experiment_config(experiment="dephasing", steps=20))
    assert len(result.rows) == 210
    check_dephasing_boundary(result.rows)


def test_dephasing_hd_law(subtests: SubTests):
    cfg = experiment_config(experiment="dephasing_hd", dim=3, steps=4)
    result = run_dephasing_hd(cfg)
    constant = result.summary["full_dephasing_norm"]
    with subtests.test("full-dephasing-norm"):
        assert constant == pytest.approx(4 / 3, abs=1e-6)
        bound = probe_lower_bound(
            identity_channel(3) - dephasing_hd(3, 1.0), 200, np.random.default_rng(0)
        )
        assert bound <= constant + 1e-7
        assert constant - bound <= 1e-3
    with subtests.test("cells"):
        for row in result.rows:
            p, q = row["p"], row["q"]
            if q >= p:
                assert row["distance"] <= ZERO
            else:
                assert row["distance"] == pytest.approx((p - q) * constant, abs=1e-4)
            assert row["identity_flag"] == (q < p)
    with subtests.test("fit"):
        assert result.summary["slope"] == pytest.approx(constant, abs=1e-4)
        assert result.summary["fit_residual"] <= 1e-4
    with subtests.test("csv"):
        assert list(read_csv(result.to_csv())[0]) == ["p", "q", "distance", "identity_flag"]


def test_dephasing_hd_intermediate():
    report = cp_distance(dephasing_hd(3, 0.75), dephasing_hd(3, 0.5))
    assert report.distance <= ZERO
    assert diamond_distance(report.intermediate, dephasing_hd(3, 0.5)) <= 1e-5


@pytest.mark.slow
def test_dephasing_hd_acceptance_grid():
    cfg = experiment_config(experiment="dephasing_hd", dim=3, steps=7)
    result = run_dephasing_hd(cfg)
    forward = [row for row in result.rows if row["q"] >= row["p"]]
    assert len(forward) >= 25
    constant = result.summary["full_dephasing_norm"]
    for row in result.rows:
        if row["q"] >= row["p"]:
            assert row["distance"] <= ZERO
        else:
            assert row["distance"] == pytest.approx((row["p"] - row["q"]) * constant, abs=1e-4)


def test_unitary_mix(subtests: SubTests):
    cfg = experiment_config(
        experiment="unitary_mix", dims=(2,), mixture_sizes=(1, 2), samples=2, seed=7
    )
    result = run_unitary_mix(cfg)
    with subtests.test("rows"):
        assert len(result.rows) == 4
        for row in result.rows:
            assert row["solve_seconds"] > 0
            if row["n"] == 1:
                assert row["distance"] <= ZERO
    with subtests.test("deterministic"):
        again = run_unitary_mix(cfg)
        assert again.column("distance") == result.column("distance")
        assert again.column("seed") == result.column("seed")
    with subtests.test("summary-recomputable"):
        for group in result.summary["groups"]:
            times = [
                row["solve_seconds"]
                for row in result.rows
                if (row["d"], row["n"]) == (group["d"], group["n"])
            ]
            assert group["mean_seconds"] == pytest.approx(np.mean(times))
            assert group["std_seconds"] == pytest.approx(np.std(times, ddof=1))
        assert result.summary["scaling_exponent"] is None
    with subtests.test("csv"):
        parsed = read_csv(result.to_csv())
        assert list(parsed[0]) == ["d", "n", "sample", "seed", "solve_seconds", "distance"]


def test_timing_summary_fit():
    records = [
        TimingRecord(d, 5, sample, 0, 0.01 * d**3 * (1 + 0.01 * sample), 0.0)
        for d in (2, 3, 4)
        for sample in range(3)
    ]
    assert timing_summary(records)["scaling_exponent"] == pytest.approx(3, abs=1e-6)
    with pytest.raises(ValueError, match="positive"):
        TimingRecord(2, 1, 0, 0, 0.0, 0.0)


@pytest.mark.slow
def test_scaling_experiment(tmp_path: Path):
    path = tmp_path / "timing.csv"
    cfg = experiment_config(
        experiment="unitary_mix", dims=(2, 3, 4), mixture_sizes=(5,), samples=10, output_path=path
    )
    result = run_unitary_mix(cfg)
    result.write()
    parsed = read_csv(path.read_text())
    assert len(parsed) == 30
    exponent = result.summary["scaling_exponent"]
    assert math.isfinite(exponent)
    assert exponent > 0
    assert run_unitary_mix(cfg).column("distance") == result.column("distance")


def export_pair(tmp_path: Path, first: Channel, target: Channel) -> dict[str, Path]:
    paths = {"choi_a": tmp_path / "a.json", "choi_b": tmp_path / "b.json"}
    write_choi(first, paths["choi_a"])
    write_choi(target, paths["choi_b"])
    return paths


def test_query(tmp_path: Path, subtests: SubTests):
    with subtests.test("identical"):
        first, _ = collisional_pair(0.3)
        paths = export_pair(tmp_path, first, first)
        report, divisible = run_query(experiment_config(experiment="query", **paths))
        assert divisible
        assert report.distance <= ZERO
        assert report.witness is not None
    with subtests.test("collisional"):
        paths = export_pair(tmp_path, *collisional_pair(0.75))
        report, divisible = run_query(experiment_config(experiment="query", **paths))
        assert not divisible
        assert report.trivial_bounds is not None
    with subtests.test("positive-maps"):
        paths = export_pair(tmp_path, *collisional_pair(0.3))
        report, divisible = run_query(
            experiment_config(experiment="query", mode=DivisibilityKind.P_qubit, **paths)
        )
        assert divisible
        assert report.kind is DivisibilityKind.P_qubit
    with subtests.test("non-cptp"):
        scaled = Channel(2, 2, HermitianOperator(2 * identity_channel(2).choi.matrix))
        paths = export_pair(tmp_path, scaled, identity_channel(2))
        with pytest.raises(NonCptpInput):
            run_query(experiment_config(experiment="query", **paths))
        report, _ = run_query(experiment_config(experiment="query", allow_noncptp=True, **paths))
        assert math.isfinite(report.distance)
