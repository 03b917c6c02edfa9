"""Failure mode reasoning for function block programs."""

from .catalog import Catalog, fmb_lookup, forward_modes, inverse_modes
from .engine import AnalysisOptions, backward_analyze
from .formula import Literal, Scenario, ScenarioFormula, expand, simplify
from .modes import FailureState, Mode, ModeSet, SignalType, classify
from .program import ProgramGraph, load_program, parse_program
from .quantify import FailureData, aggregate, scenario_probability

__version__ = "0.1.0"

__all__ = [
    "AnalysisOptions", "Catalog", "FailureData", "FailureState", "Literal", "Mode", "ModeSet",
    "ProgramGraph", "Scenario", "ScenarioFormula", "SignalType", "aggregate", "backward_analyze",
    "classify", "expand", "fmb_lookup", "forward_modes", "inverse_modes", "load_program",
    "parse_program", "scenario_probability", "simplify",
]
