"""curia: an event-sourced engine for open peer review and self-journal curation.

All state derives from an append-only, validated event log. The package
splits into the protocol rules (`model`), the log itself (`ledger`),
article-level metrics and network views (`metrics`), collusion detection
(`anomaly`), an agent-based test bench (`sim`), and a batch CLI (`cli`).
"""

from .anomaly import AnomalyReport, DetectorParams, InvalidThreshold
from .ledger import (
    EngineState,
    Event,
    LogParseError,
    ReplayError,
    StateDigest,
    append,
    digest,
    load_log,
    replay,
    save_log,
)
from .model import MIN_ISSUE_SIZE, RuleViolation, VoteChoice
from .sim import InvalidConfig, ScenarioConfig, run_scenario, scenario_from_dict

__version__ = "0.1.0"

__all__ = [
    "AnomalyReport",
    "DetectorParams",
    "EngineState",
    "Event",
    "InvalidConfig",
    "InvalidThreshold",
    "LogParseError",
    "MIN_ISSUE_SIZE",
    "ReplayError",
    "RuleViolation",
    "ScenarioConfig",
    "StateDigest",
    "VoteChoice",
    "append",
    "digest",
    "load_log",
    "replay",
    "run_scenario",
    "save_log",
    "scenario_from_dict",
    "__version__",
]
