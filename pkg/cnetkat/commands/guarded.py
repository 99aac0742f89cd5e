"""``cnetkat guarded``: the traces a program can produce when run in isolation."""
import click
import structlog

from cnetkat.commands import bound_options, format_option, input_options, program_argument
from cnetkat.deps import build_config, load_module, resolve_input
from cnetkat.domain.dto import BoundsDTO, GuardedReport, GuardedTraceDTO, TraceDTO, packets_text
from cnetkat.domain.enums import OutputFormat
from cnetkat.domain.errors import ContractError
from cnetkat.middleware import handle_errors
from cnetkat.services import pomset as pom
from cnetkat.services.case_studies import guarded_traces
from cnetkat.services.guard import has_property_p, verify_order
from cnetkat.services.semantics import evaluate

logger = structlog.get_logger(__name__)


@click.command("guarded")
@program_argument
@input_options
@bound_options
@click.option("--order", is_flag=True, help="Check the running example's ordering claim on every guarded trace.")
@format_option
@handle_errors("guarded")
def guarded_command(
    program: str,
    input_text: str | None,
    input_file: str | None,
    star: int | None,
    pad: int | None,
    node_budget: int | None,
    order: bool,
    output_format: str,
) -> None:
    """Keep the guarded members of the closed semantics of PROGRAM."""
    cfg = build_config(star, pad, node_budget)
    module = load_module(program)
    a = resolve_input(input_text, input_file, module.universe)
    traces = evaluate(module.program, a, cfg, module.universe)
    found = guarded_traces(traces, cfg.closure_budget)

    qualifying = violations = 0
    if order:
        for g in found:
            if has_property_p(g.trace.pomset) is None:
                continue
            qualifying += 1
            violations += not verify_order(g.trace.pomset)

    report = GuardedReport(
        program=program,
        input=packets_text(a),
        bounds=BoundsDTO.of(cfg),
        traces=len(traces),
        instances=len({g.source for g in found}),
        guarded=[
            GuardedTraceDTO(
                source=TraceDTO.of(g.source), trace=TraceDTO.of(g.trace), rule=g.witness.rule, depth=g.witness.depth()
            )
            for g in found
        ],
        order_qualifying=qualifying,
        order_violations=violations,
    )
    logger.info("guarded_reported", traces=len(traces), guarded=len(found), violations=violations)
    if output_format == OutputFormat.JSON.value:
        click.echo(report.model_dump_json(indent=2))
    elif output_format == OutputFormat.DOT.value:
        click.echo("\n".join(pom.to_dot(g.trace.pomset, name=f"guarded{i}") for i, g in enumerate(found)))
    else:
        click.echo(f"{len(found)} guarded traces from {len(traces)} traces")
        for g in found:
            click.echo(f"  {g.trace}")
        if order:
            click.echo(f"ordering claim: {qualifying} qualifying, {violations} violations")
    if violations:
        raise ContractError(f"{violations} guarded traces break the ordering claim")
