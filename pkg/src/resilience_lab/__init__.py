"""Deterministic round-based simulator for checking the safety and liveness
resilience of consensus protocols and their client-side gadgets."""

from .adversary import ATTACKS, AttackError, FuzzStrategy, get_attack, list_attacks
from .core import (
    GENESIS,
    ClientInteractivity,
    ClientSleepiness,
    Log,
    ModelSelector,
    PartyId,
    Trace,
    ValidatorModel,
    Verdict,
    check,
    check_liveness,
    check_safety,
)
from .harness import (
    ConfigError,
    ScenarioConfig,
    SweepResult,
    execute,
    hierarchy_check,
    load_config,
    parse_config,
    read_trace,
    run,
    save_trace,
    sweep,
)

__all__ = [
    "ATTACKS", "AttackError", "FuzzStrategy", "get_attack", "list_attacks",
    "GENESIS", "ClientInteractivity", "ClientSleepiness", "Log", "ModelSelector", "PartyId",
    "Trace", "ValidatorModel", "Verdict", "check", "check_liveness", "check_safety",
    "ConfigError", "ScenarioConfig", "SweepResult", "execute", "hierarchy_check", "load_config",
    "parse_config", "read_trace", "run", "save_trace", "sweep",
]
