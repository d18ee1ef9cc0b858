"""Trajectory collection, training samples and dataset storage."""

from seqfold.data.actions import (
    RandomActionSampler,
    random_action,
    random_spec,
)
from seqfold.data.demos import (
    TASK_SCRIPTS,
    TaskScript,
    collect_demo,
    get_task_script,
    scripted_demo,
)
from seqfold.data.generate import (
    generate_demo_dataset,
    generate_random_dataset,
)
from seqfold.data.storage import (
    Dataset,
    load_dataset,
    save_dataset,
    save_trajectory,
)
from seqfold.data.trajectory import (
    Sample,
    Trajectory,
    collect_trajectory,
    demo_samples,
    gt_heatmap,
    split_samples,
)

__all__ = [
    "Dataset",
    "RandomActionSampler",
    "Sample",
    "TASK_SCRIPTS",
    "TaskScript",
    "Trajectory",
    "collect_demo",
    "collect_trajectory",
    "demo_samples",
    "generate_demo_dataset",
    "generate_random_dataset",
    "get_task_script",
    "gt_heatmap",
    "load_dataset",
    "random_action",
    "random_spec",
    "save_dataset",
    "save_trajectory",
    "scripted_demo",
    "split_samples",
]
