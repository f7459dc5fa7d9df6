"""motionlab: grounds natural-language motion instructions into keyframed
skeleton animations by driving chat LLMs through two-stage hierarchical
planning over a discrete body-part pose vocabulary, with automatic and
human-in-the-loop evaluation."""

from .clip import AnimationClip, Keyframe, compile_plan, compile_raw
from .gateway import ChatSession, HttpChatClient, LlmConfig, ReplayClient, make_replay_client
from .highlevel import (
    HighLevelPlan,
    HighLevelStep,
    MotionInstruction,
    load_instructions,
    plan_in_one_go,
    plan_piece_by_piece,
    validate_plan,
)
from .lowlevel import (
    AnimationPlan,
    ReflectionEvent,
    StepPoseAssignment,
    build_animation_plan,
)
from .metrics import (
    BppaReport,
    OracleAnnotation,
    RatingRecord,
    ReflectionStats,
    aggregate_bpq,
    average_pairwise_agreement,
    bppa,
    classify_agreement,
    motion_complexity,
    reflection_stats,
    weighted_kappa,
)
from .prompts import PromptLibrary
from .skeleton import Pose, RuleTable, Skeleton, load_rules, load_skeleton
from .taxonomy import BodyPart, PoseTaxonomy, load_taxonomy, validate_taxonomy

__version__ = "0.1.0"

__all__ = [
    "AnimationClip",
    "AnimationPlan",
    "BodyPart",
    "BppaReport",
    "ChatSession",
    "HighLevelPlan",
    "HighLevelStep",
    "HttpChatClient",
    "Keyframe",
    "LlmConfig",
    "MotionInstruction",
    "OracleAnnotation",
    "Pose",
    "PoseTaxonomy",
    "PromptLibrary",
    "RatingRecord",
    "ReflectionEvent",
    "ReflectionStats",
    "ReplayClient",
    "RuleTable",
    "Skeleton",
    "StepPoseAssignment",
    "aggregate_bpq",
    "average_pairwise_agreement",
    "bppa",
    "build_animation_plan",
    "classify_agreement",
    "compile_plan",
    "compile_raw",
    "load_instructions",
    "load_rules",
    "load_skeleton",
    "load_taxonomy",
    "make_replay_client",
    "motion_complexity",
    "plan_in_one_go",
    "plan_piece_by_piece",
    "reflection_stats",
    "validate_plan",
    "validate_taxonomy",
    "weighted_kappa",
]
