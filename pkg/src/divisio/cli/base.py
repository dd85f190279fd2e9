"""Class-based command-line generator on top of typer.

Public methods of a [CLI][divisio.cli.CLI] subclass become commands named in
dash-case; their parameters become ``--options``. Exceptions raised by a
command are reported on one stderr line and exit with status 2.
"""

from __future__ import annotations

import inspect
import string
from collections.abc import Callable
from functools import wraps
from typing import (
    TYPE_CHECKING,
    Annotated,
    Any,
    ClassVar,
    NamedTuple,
    Protocol,
    get_type_hints,
)

import typer
from pydantic.alias_generators import to_snake
from typer import Option, Typer
from typer.models import ArgumentInfo, OptionInfo

FAILURE_EXIT_CODE = 2
# typer control flow, not failures
_PASSTHROUGH = (typer.Exit, typer.Abort, typer.BadParameter)


def _to_dash_case(value: str):
    return to_snake(value).replace("_", "-")


class ConflictingCommandError(ValueError):
    """Two methods map onto the same command name."""


def _report(error: Exception, prefix: str = "error") -> None:
    message = " ".join(str(error).split())
    typer.echo(f"{prefix}: {type(error).__name__}: {message}", err=True)


type Revisable = Callable[..., Any]

_CALLBACK_KEY = "_callback"


def _callback(*args: Any, **kwargs: Any):
    """Mark a method as the typer callback, run before any command."""

    def _inner[T: Callable[..., Any]](func: T) -> T:
        setattr(func, _CALLBACK_KEY, {"args": args, "kwargs": kwargs})
        return func

    return _inner


if TYPE_CHECKING:
    callback = Typer().callback
else:
    callback = _callback


def _is_callback(func: Any) -> bool:
    return hasattr(func, _CALLBACK_KEY)


def _revise_annotation(func: Revisable, param: inspect.Parameter) -> Any:
    """Annotate a plain parameter as a typer Option, keeping explicit typer metadata."""
    type_hint = get_type_hints(func, include_extras=True).get(param.name)
    if type_hint is None:
        return None
    metadata = getattr(type_hint, "__metadata__", ())
    if any(isinstance(item, OptionInfo | ArgumentInfo) for item in metadata):
        return type_hint
    if param.kind in (param.POSITIONAL_ONLY, param.VAR_POSITIONAL):
        raise TypeError("Cannot support positional-only arguments.")
    return Annotated[type_hint, *metadata, Option()]


def _revise_annotations(func: Revisable):
    func.__annotations__ = {
        name: _revise_annotation(func, param)
        for name, param in inspect.signature(func, eval_str=True).parameters.items()
    }


class CLIBaseOptions(Protocol):
    @property
    def name(self) -> str: ...


class CLIOptions(NamedTuple):
    """Minimal configuration options for a CLI."""

    name: str


class CLI[OptionsT: CLIBaseOptions]:
    """A class-based command-line generator based on typer."""

    failures: ClassVar[tuple[type[Exception], ...]] = ()

    def __init__(self, options: OptionsT, /, *, help: str | None = None):
        self.options = options
        self._typer = Typer(
            name=self.options.name,
            no_args_is_help=True,
            add_completion=False,
            help=help or (self.__doc__ if self.__doc__ != CLI.__doc__ else None),
        )
        self._setup_typer()

    @property
    def name(self) -> str:
        return self.options.name

    @property
    def command_names(self) -> tuple[str | None, ...]:
        return tuple(command.name for command in self.typer.registered_commands)

    @property
    def typer(self) -> Typer:
        """The typer application built from this instance's methods."""
        return self._typer

    def __call__(self, *args: Any, **kwargs: Any) -> Any:
        return self.typer(*args, **kwargs)

    def _guarded(self, command: Callable[..., Any]) -> Callable[..., Any]:
        """Report failures of ``command`` on one stderr line and exit with status 2.

        Declared ``failures`` are expected bad input or solves. Anything else is
        reported as an internal error with the same status, so exit status 1
        stays reserved for a command's own verdict.
        """

        @wraps(command)
        def run(*args: Any, **kwargs: Any) -> Any:
            try:
                return command(*args, **kwargs)
            except _PASSTHROUGH:
                raise
            except self.failures as error:
                _report(error)
                raise typer.Exit(FAILURE_EXIT_CODE) from error
            except Exception as error:
                _report(error, prefix="internal error")
                raise typer.Exit(FAILURE_EXIT_CODE) from error

        run.__annotations__ = dict(command.__annotations__)
        return run

    def _setup_typer(self):
        for attr in dir(self):
            if attr[0] not in string.ascii_letters:
                continue
            try:
                obj = getattr(self, attr)
            except Exception:  # noqa: S112
                # properties that fail on access are not commands
                continue
            if not callable(obj) or getattr(obj, "__self__", None) is not self:
                continue
            _revise_annotations(obj.__func__)
            if _is_callback(obj):
                call_params = getattr(obj, _CALLBACK_KEY)
                self.typer.callback(*call_params["args"], **call_params["kwargs"])(obj)
                continue
            command_name = _to_dash_case(obj.__name__)
            if command_name in self.command_names:
                raise ConflictingCommandError(
                    f"cannot add CLI command with conflicting {command_name=}."
                )
            self.typer.command(command_name)(self._guarded(obj))
