"""Subcommands and the options they share."""
import click

from cnetkat.domain.enums import OutputFormat


def program_argument(func):
    return click.argument("program")(func)


def input_options(func):
    func = click.option(
        "--input-file",
        default=None,
        type=click.Path(exists=True, dir_okay=False),
        help="File holding the input packet-set literal.",
    )(func)
    return click.option(
        "--input", "input_text", default=None, help="Input packet set, e.g. '{[sw=1,type=heart]}'."
    )(func)


def bound_options(func):
    func = click.option("--node-budget", type=int, default=None, help="Largest pomset allowed.")(func)
    func = click.option("--pad", type=int, default=None, help="State padding per side (P); env CNETKAT_PAD.")(func)
    return click.option("--star", type=int, default=None, help="Unrollings per star (K); env CNETKAT_STAR.")(func)


def format_option(func):
    return click.option(
        "--format",
        "output_format",
        type=click.Choice([f.value for f in OutputFormat]),
        default=OutputFormat.TEXT.value,
        show_default=True,
        help="Report format.",
    )(func)
