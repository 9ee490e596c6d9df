from .layers import initial_states, propagate, run_layers
from .matching import PoolTooSmallError, match_reviewers
from .stages import (
    AggMode,
    NoAgentsError,
    NoCitationsError,
    NoReviewersError,
    SimulationOutput,
    StageConfig,
    StageError,
    Trace,
    TraceEntry,
    round_half_up,
    run_simulation,
    select_agents,
    select_cited,
    stage_paper_reading,
    stage_paper_writing,
    stage_review_writing,
)

__all__ = [
    "AggMode",
    "NoAgentsError",
    "NoCitationsError",
    "NoReviewersError",
    "PoolTooSmallError",
    "SimulationOutput",
    "StageConfig",
    "StageError",
    "Trace",
    "TraceEntry",
    "initial_states",
    "match_reviewers",
    "propagate",
    "round_half_up",
    "run_layers",
    "run_simulation",
    "select_agents",
    "select_cited",
    "stage_paper_reading",
    "stage_paper_writing",
    "stage_review_writing",
]
