"""``cnetkat normalize``: the normal form of a program on one input."""
import click
import structlog

from cnetkat.commands import bound_options, format_option, input_options, program_argument
from cnetkat.deps import build_config, load_module, resolve_input
from cnetkat.domain.ast import Pi, Seq
from cnetkat.domain.dto import NormalizeReport, SummandDTO, packets_text
from cnetkat.domain.enums import OutputFormat
from cnetkat.domain.errors import ContractError
from cnetkat.domain.models import PiExpr
from cnetkat.middleware import handle_errors
from cnetkat.services.rewrite import denote, merge_summands, normalize, print_normal_form
from cnetkat.services.semantics import check_equiv
from cnetkat.services.syntax import print_program

logger = structlog.get_logger(__name__)


@click.command("normalize")
@program_argument
@input_options
@bound_options
@click.option("--no-merge", is_flag=True, help="Keep summands that share an output apart.")
@click.option("--verify", is_flag=True, help="Compare the normal form with the program at the given bounds.")
@format_option
@handle_errors("normalize")
def normalize_command(
    program: str,
    input_text: str | None,
    input_file: str | None,
    star: int | None,
    pad: int | None,
    node_budget: int | None,
    no_merge: bool,
    verify: bool,
    output_format: str,
) -> None:
    """Rewrite PROGRAM, run on the input, into a sum of store programs each followed by its output."""
    cfg = build_config(star, pad, node_budget)
    module = load_module(program)
    a = resolve_input(input_text, input_file, module.universe)
    nf = normalize(a, module.program, cfg)
    if not no_merge:
        nf = merge_summands(nf)

    if verify:
        original = Seq(Pi(PiExpr.of_set(a)), module.program)
        [result] = check_equiv(original, denote(nf), [a], cfg, module.universe)
        logger.info("normal_form_verified", verdict=result.verdict.value, bounded=result.bounded)
        if not result.holds:
            raise ContractError(f"normal form disagrees with the program: {result.describe(cfg)}")

    report = NormalizeReport(
        program=program,
        input=packets_text(a),
        merged=nf.is_merged,
        summands=[
            SummandDTO(state_program=print_program(s.state_program), output=packets_text(s.output_pi.packet_set))
            for s in nf.summands
        ],
        text=print_normal_form(nf),
    )
    if output_format == OutputFormat.JSON.value:
        click.echo(report.model_dump_json(indent=2))
    elif output_format == OutputFormat.DOT.value:
        raise ContractError("normal forms have no DOT rendering")
    else:
        click.echo(report.text)
        if verify:
            click.echo(f"verified: {result.describe(cfg)}")
