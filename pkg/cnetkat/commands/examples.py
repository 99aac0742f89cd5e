"""``cnetkat examples``: rerun the bundled case studies and check their findings."""
import click
import structlog

from cnetkat.commands import format_option
from cnetkat.deps import build_config
from cnetkat.domain.dto import ComponentDTO, ExamplesReport, PomsetDTO, RaceDTO, RunningExampleDTO, packets_text
from cnetkat.domain.enums import OutputFormat
from cnetkat.domain.errors import ContractError
from cnetkat.middleware import handle_errors
from cnetkat.services.case_studies import (
    RaceReport,
    RunningExampleReport,
    cache_race,
    firewall_overview,
    load_balancer_race,
    running_example_report,
)

logger = structlog.get_logger(__name__)


def _running_dto(r: RunningExampleReport) -> RunningExampleDTO:
    return RunningExampleDTO(
        star=r.star_bound,
        pad=r.pad_bound,
        iterations=[[packets_text(b) for b in layer] for layer in r.iterations],
        outputs=[packets_text(b) for b in r.outputs],
        bounds_hit=r.bounds_hit,
        saturated=r.saturated,
        contains_overview=r.contains_overview,
        q_included=r.q_included,
        order_traces=r.order.traces,
        order_qualifying=r.order.qualifying,
        order_guarded_members=r.order.guarded_members,
        order_violations=len(r.order.violations),
        passed=r.passed,
    )


def _race_dto(r: RaceReport) -> RaceDTO:
    return RaceDTO(
        name=r.name,
        input=packets_text(r.input),
        output=packets_text(r.output),
        traces=r.traces,
        found=r.found,
        trace=PomsetDTO.of(r.trace) if r.trace is not None else None,
        guarded=PomsetDTO.of(r.guarded) if r.guarded is not None else None,
    )


def render_text(report: ExamplesReport) -> str:
    running = report.running
    lines = [f"running example (K={running.star}, P={running.pad})"]
    for k, layer in enumerate(running.iterations):
        lines.append(f"  after {k} unrollings: " + " | ".join("{" + ",".join(b) + "}" for b in layer))
    lines.append("  final outputs: " + " | ".join("{" + ",".join(b) + "}" for b in running.outputs))
    lines.append(f"  bounds hit: {running.bounds_hit}, saturated: {running.saturated}")
    lines.append(f"  overview run present: {running.contains_overview}")
    lines.append(f"  q included: {running.q_included}")
    lines.append(
        f"  ordering claim: {running.order_qualifying} qualifying of {running.order_traces} traces, "
        f"{running.order_guarded_members} guarded members, {running.order_violations} violations"
    )
    for race in report.races:
        status = "guarded run found" if race.found else "no guarded run"
        lines.append(f"{race.name} race: {status} ending in {{{','.join(race.output)}}}")
    lines.append("components:")
    for c in report.components:
        outputs = " | ".join("{" + ",".join(b) + "}" for b in c.outputs)
        lines.append(f"  {c.program} on {{{','.join(c.input)}}}: {c.traces} traces -> {outputs}")
    lines.append("all findings reproduced" if report.passed else "findings NOT reproduced")
    return "\n".join(lines)


@click.command("examples")
@click.option("--star", type=int, default=None, help="Unrollings per star for the running example (K).")
@click.option("--pad", type=int, default=None, help="State padding per side (P).")
@format_option
@handle_errors("examples")
def examples_command(star: int | None, pad: int | None, output_format: str) -> None:
    """Run the running example, the race analyses and the component overview."""
    cfg = build_config(star, pad)
    running = running_example_report(cfg.star_bound, cfg.pad_bound)
    races = [load_balancer_race(), cache_race()]
    components = firewall_overview()
    report = ExamplesReport(
        running=_running_dto(running),
        races=[_race_dto(r) for r in races],
        components=[
            ComponentDTO(
                program=c.program,
                input=packets_text(c.input),
                traces=c.traces,
                outputs=[packets_text(b) for b in c.outputs],
            )
            for c in components
        ],
        passed=running.passed and all(r.found for r in races),
    )
    if output_format == OutputFormat.JSON.value:
        click.echo(report.model_dump_json(indent=2))
    elif output_format == OutputFormat.DOT.value:
        raise ContractError("case studies have no DOT rendering")
    else:
        click.echo(render_text(report))
    if not report.passed:
        raise ContractError("a case study finding was not reproduced")
