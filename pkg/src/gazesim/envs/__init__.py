"""Episode mechanics: datasets, synthetic generation, search and replay envs."""

from .base import EnvStepResult, EpisodeSchedule, Observation
from .dataset import (CHAIN_NAME, DatasetError, DemoDataset, DemoEpisode,
                      load_dataset, load_episode)
from .replay import ReplayEnv, sample_start
from .scene_eval import (SceneSearchMetrics, grid_cell_angles,
                         run_scene_search_eval, s_pattern)
from .search import ObjectSearchEnv, SceneSearchEnv, SearchConfig
from .synthetic import (SynthSpec, generate_synthetic_dataset, synthesize_panorama,
                        synthetic_chain)

__all__ = [
    "CHAIN_NAME", "DatasetError", "DemoDataset", "DemoEpisode", "EnvStepResult",
    "EpisodeSchedule", "Observation", "ObjectSearchEnv", "ReplayEnv",
    "SceneSearchEnv", "SceneSearchMetrics", "SearchConfig", "SynthSpec",
    "generate_synthetic_dataset", "grid_cell_angles", "load_dataset",
    "load_episode", "run_scene_search_eval", "s_pattern", "sample_start",
    "synthesize_panorama", "synthetic_chain",
]
