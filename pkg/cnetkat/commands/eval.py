"""``cnetkat eval``: trace set of a program on one input."""
import click
import structlog

from cnetkat.commands import bound_options, format_option, input_options, program_argument
from cnetkat.deps import build_config, load_module, resolve_input
from cnetkat.domain.dto import BoundsDTO, EvalReport, TraceDTO, packets_text
from cnetkat.domain.enums import OutputFormat
from cnetkat.middleware import handle_errors
from cnetkat.services import pomset as pom
from cnetkat.services.semantics import ClosedTraceSet, EvalConfig, TraceSet, evaluate

logger = structlog.get_logger(__name__)


def render_text(report: EvalReport, traces: TraceSet, cfg: EvalConfig) -> str:
    kind = "generating traces" if report.closed and not report.materialized else "traces"
    summary = f"{len(traces)} {kind}"
    if report.bounded:
        summary += f" ({cfg.bounds_label})"
    summary += f"; bounds hit: {report.bounds_hit}, saturated: {report.saturated}"
    lines = ["input {" + ",".join(report.input) + "}", summary]
    for output in traces.outputs():
        lines.append(f"output {output if output is not None else '-'}:")
        lines.extend(f"  {u}" for u in traces.pomsets_for(output))
    return "\n".join(lines)


def render_dot(traces: TraceSet) -> str:
    return "\n".join(pom.to_dot(t.pomset, name=f"trace{i}") for i, t in enumerate(traces))


@click.command("eval")
@program_argument
@input_options
@bound_options
@click.option("--closed", is_flag=True, help="Report the closed semantics.")
@click.option("--materialize", is_flag=True, help="Expand choice and padding nodes into concrete traces.")
@format_option
@handle_errors("eval")
def eval_command(
    program: str,
    input_text: str | None,
    input_file: str | None,
    star: int | None,
    pad: int | None,
    node_budget: int | None,
    closed: bool,
    materialize: bool,
    output_format: str,
) -> None:
    """Evaluate PROGRAM on the input packet set."""
    cfg = build_config(star, pad, node_budget)
    module = load_module(program)
    a = resolve_input(input_text, input_file, module.universe)
    traces = evaluate(module.program, a, cfg, module.universe)
    if closed and materialize:
        traces = ClosedTraceSet(traces).materialize(cfg)
    elif materialize:
        traces = traces.materialize(cfg.trace_budget)
    report = EvalReport(
        program=program,
        input=packets_text(a),
        bounds=BoundsDTO.of(cfg),
        closed=closed,
        materialized=materialize,
        bounds_hit=traces.bounds_hit,
        saturated=traces.saturated,
        bounded=traces.bounded,
        outputs=[packets_text(b) for b in traces.outputs()],
        traces=[TraceDTO.of(t) for t in traces],
    )
    logger.info("eval_reported", traces=len(traces), closed=closed)
    if output_format == OutputFormat.JSON.value:
        click.echo(report.model_dump_json(indent=2))
    elif output_format == OutputFormat.DOT.value:
        click.echo(render_dot(traces))
    else:
        click.echo(render_text(report, traces, cfg))
