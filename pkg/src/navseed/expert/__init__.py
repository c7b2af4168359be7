from .astar import NoPathError, PlannedPath, astar_plan, grid_astar, inflated_free
from .collect import CollectConfig, ExpertPlanner, build_dataset, generate_episode, run_expert_episode, sample_goal
from .dataset import (
    BadMagicError,
    DatasetFormatError,
    DimensionMismatchError,
    ExpertDataset,
    TransitionRecord,
    TruncatedFileError,
    VersionMismatchError,
    read_dataset,
    write_dataset,
)
from .dwa import ClearanceField, DWAConfig, dwa_control
