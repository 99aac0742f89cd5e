"""Command wrappers: context binding, error logging and exit-code mapping."""
import functools
import time
from collections.abc import Callable

import click
import structlog
from pydantic import ValidationError

from cnetkat.domain.errors import (
    ClassificationError,
    CNetKATException,
    ContractError,
    DomainError,
    ParseError,
    ResourceBudgetError,
)

logger = structlog.get_logger(__name__)

EXIT_INPUT = 1
EXIT_BUDGET = 2
EXIT_CONTRACT = 3


def exit_code_for(error: Exception) -> int | None:
    """Exit code of a known failure, None for anything else."""
    if isinstance(error, (ParseError, DomainError)):
        return EXIT_INPUT
    if isinstance(error, ResourceBudgetError):
        return EXIT_BUDGET
    if isinstance(error, (ContractError, ClassificationError, ValidationError)):
        return EXIT_CONTRACT
    return None


def _message(error: Exception) -> str:
    if isinstance(error, ValidationError):
        return "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in error.errors())
    if isinstance(error, CNetKATException):
        return str(error)
    return repr(error)


def handle_errors(command: str) -> Callable:
    """Run a command body with ``command`` bound in the log context; known errors become exit codes."""

    def decorate(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            structlog.contextvars.clear_contextvars()
            structlog.contextvars.bind_contextvars(command=command)
            start_time = time.time()
            logger.info("command_started")
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                code = exit_code_for(e)
                if code is None:
                    logger.exception("command_crashed", error=str(e))
                    raise
                logger.warning("command_failed", error=_message(e), error_type=type(e).__name__, exit_code=code)
                click.echo(f"error: {_message(e)}", err=True)
                raise SystemExit(code) from e
            logger.info("command_completed", duration_ms=round((time.time() - start_time) * 1000, 2))
            return result

        return wrapper

    return decorate
