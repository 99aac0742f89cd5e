"""Command-line entry point."""
import logging
import sys

import click
import structlog

from cnetkat.commands.check import check_command
from cnetkat.commands.eval import eval_command
from cnetkat.commands.examples import examples_command
from cnetkat.commands.guarded import guarded_command
from cnetkat.commands.normalize import normalize_command
from cnetkat.settings import settings


def configure_logging(level: str | None = None, fmt: str | None = None) -> None:
    """Structured logging on stderr; stdout carries only reports."""
    fmt = fmt or settings.log_format or ("console" if settings.app_env == "dev" else "json")
    threshold = logging.getLevelName((level or settings.log_level).upper())
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.dev.ConsoleRenderer() if fmt == "console" else structlog.processors.JSONRenderer(),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(threshold),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


@click.group()
@click.version_option(package_name="cnetkat")
@click.option("--log-level", default=None, help="Override CNETKAT_LOG_LEVEL.")
@click.option("--log-format", type=click.Choice(["console", "json"]), default=None, help="Log renderer.")
def cli(log_level: str | None, log_format: str | None) -> None:
    """Evaluate, analyse and compare Concurrent NetKAT programs."""
    configure_logging(log_level, log_format)


cli.add_command(eval_command)
cli.add_command(guarded_command)
cli.add_command(normalize_command)
cli.add_command(check_command)
cli.add_command(examples_command)


if __name__ == "__main__":
    cli()
