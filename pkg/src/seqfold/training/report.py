"""Evaluation report files: episode CSV, JSON summary and PNG frames."""

import csv
import json
import logging
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
from PIL import Image

from seqfold.models.report import EPISODE_COLUMNS, EvalReport
from seqfold.utils.exceptions import ReportError

logger = logging.getLogger(__name__)

FRAME_HEIGHT_RANGE = 0.03  # meters above the table mapped to white


def depth_to_image(
    depth: np.ndarray, camera_height: float = 1.0
) -> Image.Image:
    """8-bit grayscale view of a depth frame, higher cloth brighter."""
    height = (camera_height - depth) / FRAME_HEIGHT_RANGE
    pixels = np.clip(np.rint(height * 255.0), 0, 255).astype(np.uint8)
    return Image.fromarray(pixels)


def write_report(
    report: EvalReport,
    out_dir: Union[str, Path],
    camera_height: float = 1.0,
    write_frames: bool = True,
) -> Dict[str, Path]:
    """Write ``episodes.csv``, ``summary.json`` and rollout frames.

    Frames go to ``frames/<task>_<episode>/step_XX.png``, one per
    executed step.

    Returns:
        Dict[str, Path]: Paths of the written files and directories

    Raises:
        ReportError: If the output directory cannot be written
    """
    out_dir = Path(out_dir)
    csv_path = out_dir / "episodes.csv"
    summary_path = out_dir / "summary.json"
    frames_dir = out_dir / "frames"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(csv_path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(EPISODE_COLUMNS)
            for row in report.rows:
                writer.writerow(row.as_csv_row())

        summary = {
            "label": report.label,
            "grid": report.grid,
            "runtime_s": report.runtime_s,
            "tasks": [s.model_dump() for s in report.summaries()],
        }
        summary_path.write_text(json.dumps(summary, indent=2))

        written: List[Path] = []
        if write_frames:
            for key, frames in report.frames.items():
                episode_dir = frames_dir / key
                episode_dir.mkdir(parents=True, exist_ok=True)
                for step, frame in enumerate(frames):
                    path = episode_dir / f"step_{step:02d}.png"
                    depth_to_image(frame, camera_height).save(path)
                    written.append(path)
    except OSError as e:
        raise ReportError(
            f"Failed to write report to {out_dir}", detail=str(e)
        )
    logger.info(
        f"Wrote {len(report.rows)} episodes and {len(written)} frames "
        f"to {out_dir}"
    )
    return {"csv": csv_path, "summary": summary_path, "frames": frames_dir}


def read_episodes(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Rows of an ``episodes.csv`` as dictionaries keyed by header."""
    with open(path, newline="") as f:
        return list(csv.DictReader(f))
