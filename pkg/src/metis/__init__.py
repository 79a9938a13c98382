"""Deterministic 2D building-evacuation simulator with raycast perception,
curriculum PPO training, growing fire hazards, and a steering service."""

__version__ = "0.1.0"

from .engine import EndCondition, SimResults, Simulation, run
from .hazards import ActionPair, AgentState, FireField
from .perception import OBS_DIM, SENSOR_A, SENSOR_B, SENSOR_C, observe
from .rewards import CurriculumState, RewardConfig
from .trainer import (
    Policy,
    TrainerConfig,
    load_checkpoint,
    policy_from_checkpoint,
    random_policy,
    save_checkpoint,
    train,
)
from .world import (
    Scenario,
    load_sample,
    load_scenario,
    sample_names,
    save_scenario,
    validate,
)

__all__ = [
    "ActionPair", "AgentState", "CurriculumState", "EndCondition", "FireField",
    "OBS_DIM", "Policy", "RewardConfig", "Scenario", "SENSOR_A", "SENSOR_B",
    "SENSOR_C", "SimResults", "Simulation", "TrainerConfig", "load_checkpoint",
    "load_sample", "load_scenario", "observe", "policy_from_checkpoint",
    "random_policy", "run", "sample_names", "save_checkpoint", "save_scenario",
    "train", "validate", "__version__",
]
