"""Chart parsing for the most probable derivation, plus a brute-force oracle."""
from .cky import (Derivation, Grammar, ParseResult, Parser, ParserConfig, Step, parse_mpd,
                  tag_lattice)
from .items import ChartItem, NodeState, OpenLeaf, apply_dep, apply_head

__all__ = [
    "ChartItem", "Derivation", "Grammar", "NodeState", "OpenLeaf", "ParseResult", "Parser",
    "ParserConfig", "Step", "apply_dep", "apply_head", "parse_mpd", "tag_lattice",
]
