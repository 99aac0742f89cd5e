"""Resolution of command inputs: configuration, program files and packet sets."""
from pathlib import Path

import structlog

from cnetkat.domain.ast import PacketLiteral
from cnetkat.domain.errors import DomainError
from cnetkat.domain.models import PacketSet, Universe
from cnetkat.services.case_studies import PROGRAMS_DIR
from cnetkat.services.semantics import EvalConfig
from cnetkat.services.syntax import Module, parse, parse_module
from cnetkat.settings import Settings, settings

logger = structlog.get_logger(__name__)


def build_config(
    star: int | None = None,
    pad: int | None = None,
    node_budget: int | None = None,
    source: Settings | None = None,
) -> EvalConfig:
    """Bounds from flags, falling back to the environment and then the defaults.

    Raises:
        pydantic.ValidationError: A bound is negative.
    """
    source = source or settings
    return EvalConfig(
        star_bound=source.star if star is None else star,
        pad_bound=source.pad if pad is None else pad,
        node_budget=source.node_budget if node_budget is None else node_budget,
        closure_budget=source.closure_budget,
        trace_budget=source.trace_budget,
        q_budget=source.q_budget,
    )


def resolve_program_path(name: str) -> Path:
    """A path on disk, or the bundled program of that name."""
    path = Path(name)
    if path.is_file():
        return path
    bundled = PROGRAMS_DIR / path.name
    if bundled.is_file():
        return bundled
    raise DomainError(f"no program file '{name}'")


def load_module(name: str, universe: Universe | None = None, source: Settings | None = None) -> Module:
    source = source or settings
    path = resolve_program_path(name)
    module = parse_module(path.read_text(encoding="utf-8"), universe)
    module.universe.check_caps(source.max_vars, source.max_values)
    logger.debug("program_loaded", path=str(path))
    return module


def parse_packet_set(text: str, universe: Universe) -> PacketSet:
    """Read a packet-set literal such as ``{[sw=1,type=heart]}``."""
    literal = parse(text, universe)
    if not isinstance(literal, PacketLiteral):
        raise DomainError(f"not a packet set: {text!r}")
    return literal.packets


def resolve_input(inline: str | None, input_file: str | None, universe: Universe) -> PacketSet:
    if inline is not None and input_file is not None:
        raise DomainError("give the input inline or as a file, not both")
    if input_file is not None:
        return parse_packet_set(Path(input_file).read_text(encoding="utf-8"), universe)
    if inline is not None:
        return parse_packet_set(inline, universe)
    raise DomainError("an input packet set is required (--input or --input-file)")
