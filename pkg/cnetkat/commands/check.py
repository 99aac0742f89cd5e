"""``cnetkat check``: inclusion or equivalence of two programs."""
import click
import structlog

from cnetkat.commands import bound_options, format_option, input_options
from cnetkat.deps import build_config, load_module, resolve_input
from cnetkat.domain.dto import BoundsDTO, CheckReport, CheckResultDTO, TraceDTO, packets_text
from cnetkat.domain.enums import CheckMode, OutputFormat
from cnetkat.domain.errors import ContractError, ParseError
from cnetkat.middleware import handle_errors
from cnetkat.services.semantics import check_equiv, check_inclusion

logger = structlog.get_logger(__name__)


@click.command("check")
@click.argument("left")
@click.argument("right")
@click.option(
    "--mode",
    type=click.Choice([m.value for m in CheckMode]),
    default=CheckMode.EQUIVALENCE.value,
    show_default=True,
    help="incl: LEFT is included in RIGHT; equiv: both ways.",
)
@click.option("--all-inputs", is_flag=True, help="Compare on every packet set of the universe.")
@input_options
@bound_options
@format_option
@handle_errors("check")
def check_command(
    left: str,
    right: str,
    mode: str,
    all_inputs: bool,
    input_text: str | None,
    input_file: str | None,
    star: int | None,
    pad: int | None,
    node_budget: int | None,
    output_format: str,
) -> None:
    """Compare the closed semantics of LEFT and RIGHT."""
    cfg = build_config(star, pad, node_budget)
    lhs = load_module(left)
    rhs = load_module(right, lhs.universe)
    if rhs.universe != lhs.universe:
        raise ParseError(f"'{right}' declares a different universe than '{left}'")
    universe = lhs.universe
    inputs = list(universe.packet_sets) if all_inputs else [resolve_input(input_text, input_file, universe)]

    check = check_inclusion if CheckMode(mode) is CheckMode.INCLUSION else check_equiv
    results = check(lhs.program, rhs.program, inputs, cfg, universe)
    report = CheckReport(
        left=left,
        right=right,
        mode=CheckMode(mode),
        bounds=BoundsDTO.of(cfg),
        holds=all(r.holds for r in results),
        results=[
            CheckResultDTO(
                input=packets_text(r.input),
                verdict=r.verdict,
                bounded=r.bounded,
                direction=r.direction,
                counterexample=TraceDTO.of(r.counterexample) if r.counterexample else None,
            )
            for r in results
        ],
    )
    logger.info("check_reported", mode=mode, inputs=len(results), holds=report.holds)
    if output_format == OutputFormat.JSON.value:
        click.echo(report.model_dump_json(indent=2))
    elif output_format == OutputFormat.DOT.value:
        raise ContractError("comparisons have no DOT rendering")
    else:
        for r in results:
            click.echo(f"{r.input}: {r.describe(cfg)}")
            if r.counterexample is not None:
                click.echo(f"  counterexample: {r.counterexample}")
