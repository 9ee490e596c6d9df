from .functions import (
    JUDGE_FIELDS,
    PreconditionError,
    aggregate_proposals,
    judge_proposals,
    metareview_strength,
    metareview_weakness,
    review_score,
    review_strength,
    review_weakness,
    transform_reference_paper,
    transform_reference_review,
    write_profile,
    write_proposal,
    write_proposal_message,
)
from .parsing import (
    QUESTIONS,
    FieldOutOfRangeError,
    NoScoreError,
    Paper5Q,
    ParseError,
    ReviewRecord,
    ScoreOutOfRangeError,
    format_5q,
    format_bullets,
    parse_5q,
    parse_bullets,
    parse_judge,
    parse_score,
)
from .prompts import TEMPLATE_VERSION, render

__all__ = [
    "FieldOutOfRangeError",
    "JUDGE_FIELDS",
    "NoScoreError",
    "Paper5Q",
    "ParseError",
    "PreconditionError",
    "QUESTIONS",
    "ReviewRecord",
    "ScoreOutOfRangeError",
    "TEMPLATE_VERSION",
    "aggregate_proposals",
    "format_5q",
    "format_bullets",
    "judge_proposals",
    "metareview_strength",
    "metareview_weakness",
    "parse_5q",
    "parse_bullets",
    "parse_judge",
    "parse_score",
    "render",
    "review_score",
    "review_strength",
    "review_weakness",
    "transform_reference_paper",
    "transform_reference_review",
    "write_profile",
    "write_proposal",
    "write_proposal_message",
]
