"""Command-line interface."""

import click

from src.cli.commands import cli
from src.exceptions import FairGenError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_USAGE = 64


def _error_line(code: str, message: str) -> None:
    click.echo(f"fairgen-error:{code}: {' '.join(message.split())}", err=True)


def run(argv: list[str] | None = None) -> int:
    """Run one subcommand and map failures to exit codes."""
    try:
        result = cli.main(args=argv, prog_name="fairgen", standalone_mode=False)
    except click.BadParameter as e:
        _error_line("parameter", e.format_message())
        return EXIT_INVALID
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except FairGenError as e:
        _error_line(e.code, str(e))
        return EXIT_INVALID
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return result if isinstance(result, int) else EXIT_OK


__all__ = ["EXIT_INVALID", "EXIT_OK", "EXIT_USAGE", "cli", "run"]
