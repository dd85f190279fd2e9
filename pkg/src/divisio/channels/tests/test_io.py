from __future__ import annotations

import json
from typing import TYPE_CHECKING

import numpy as np
import pytest

from divisio.channels import (
    ChoiFormatError,
    collisional_pair,
    random_channel,
    read_choi,
    write_choi,
)

if TYPE_CHECKING:
    from pathlib import Path

    from pytest_subtests import SubTests


def test_written_file_follows_schema(tmp_path: Path):
    first, _ = collisional_pair(0.75)
    path = tmp_path / "first.json"
    write_choi(first, path)
    document = json.loads(path.read_text())
    assert document["dim_in"] == 2
    assert document["dim_out"] == 2
    assert len(document["choi"]) == 4
    assert document["choi"][0][0] == pytest.approx([first.choi.matrix[0, 0].real, 0])
    assert np.array_equal(read_choi(path).choi.matrix, first.choi.matrix)


def test_non_square_channel_is_read_back(tmp_path: Path):
    channel = random_channel(2, 3, np.random.default_rng(0))
    path = tmp_path / "channel.json"
    write_choi(channel, path)
    loaded = read_choi(path)
    assert (loaded.dim_in, loaded.dim_out) == (2, 3)
    assert np.allclose(loaded.choi.matrix, channel.choi.matrix, atol=1e-15)


def test_malformed_files(tmp_path: Path, subtests: SubTests):
    path = tmp_path / "broken.json"
    with subtests.test("truncated"):
        path.write_text('{"dim_in": 2, "dim_out": 2, "choi": [[[1, 0]')
        with pytest.raises(ChoiFormatError):
            read_choi(path)
    with subtests.test("wrong-size"):
        path.write_text(json.dumps({"dim_in": 2, "dim_out": 2, "choi": [[[1, 0]]]}))
        with pytest.raises(ChoiFormatError):
            read_choi(path)
    with subtests.test("not-hermitian"):
        choi = [[[0, 0]] * 4 for _ in range(4)]
        choi[0] = [[0, 0], [1, 0], [0, 0], [0, 0]]
        path.write_text(json.dumps({"dim_in": 2, "dim_out": 2, "choi": choi}))
        with pytest.raises(ChoiFormatError):
            read_choi(path)
