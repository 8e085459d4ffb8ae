"""Finite toolkit for bars over the binary tree and the forcing and Kripke
models that tell fan-theorem variants apart.

Submodules: bars, conditions, formula, terms, kripke, heyting, starforce, cli.
"""

from . import bars, conditions, formula, heyting, kripke, starforce, terms
from .conditions import IN, INF, OUT, Condition, FullLabeling, Label
from .formula import format_formula, parse_formula
from .kripke import Frame, build_preset, evaluate
from .starforce import ForcingContext, lemma_suite, star_force

__all__ = [
    "bars", "conditions", "formula", "heyting", "kripke", "starforce", "terms",
    "IN", "INF", "OUT", "Condition", "FullLabeling", "Label",
    "format_formula", "parse_formula", "Frame", "build_preset", "evaluate",
    "ForcingContext", "lemma_suite", "star_force",
]
