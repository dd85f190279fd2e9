"""Test helper driving a divisio CLI in-process."""

from __future__ import annotations

from functools import partial
from typing import TYPE_CHECKING

from typer.testing import CliRunner

if TYPE_CHECKING:
    from collections.abc import Mapping

    from divisio.cli.base import CLI


class DivisioCLIRunner:
    """Wrapper around typer's CliRunner bound to one CLI, colours off."""

    def __init__(
        self,
        cli: CLI,
        *,
        env: Mapping[str, str] | None = None,
        catch_exceptions: bool = False,
    ):
        self._runner = CliRunner(env=env or {"NO_COLOR": "1"}, catch_exceptions=catch_exceptions)
        self.invoke = partial(self._runner.invoke, cli.typer)
