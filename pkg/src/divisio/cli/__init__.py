"""
Command line for the divisibility studies and one-shot queries.

```
divisio collisional --steps 51 --out collisional.csv
divisio dephasing-hd --dim 5 --format json
divisio unitary-mix --dim 2 --dim 3 --n 5 --samples 20 --seed 1
divisio query --choi-a first.json --choi-b target.json --mode cp
```

Commands are generated from the public methods of a [CLI][divisio.cli.CLI]
subclass, so the same class can be embedded in another typer application.
"""

from divisio.cli.base import CLI as CLI
from divisio.cli.base import CLIOptions as CLIOptions
from divisio.cli.base import ConflictingCommandError as ConflictingCommandError
from divisio.cli.base import callback as callback
from divisio.cli.commands import DivisioCLI as DivisioCLI
from divisio.cli.commands import QueryMode as QueryMode
from divisio.cli.commands import configure_logging as configure_logging
from divisio.cli.commands import load as load

__all__ = [
    "CLI",
    "CLIOptions",
    "ConflictingCommandError",
    "DivisioCLI",
    "QueryMode",
    "callback",
    "configure_logging",
    "load",
]
