"""Microgrid battery dispatch, plant simulation, and SoC-spoofing attacks."""

from ._core import (
    Scenario,
    costs_and_diffs,
    evaluate_agent,
    exact_attack,
    greedy_attack,
    load_scenario,
    save_scenario,
    simulate,
    solve_dispatch,
    synth_scenario,
    train_agent,
)

try:
    from ._core import __version__
except ImportError:  # pragma: no cover
    __version__ = "unknown"

__all__ = [
    "Scenario",
    "costs_and_diffs",
    "evaluate_agent",
    "exact_attack",
    "greedy_attack",
    "load_scenario",
    "save_scenario",
    "simulate",
    "solve_dispatch",
    "synth_scenario",
    "train_agent",
    "__version__",
]
