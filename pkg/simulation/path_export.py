#!/usr/bin/env python3
"""
Path Export
Writes sampled paths and their crossover chains to CSV with pandas
"""

import os
from typing import Iterable, List, Optional

import numpy as np
import pandas as pd

from simulation.paste_engine import GlobalPathRecord


PATH_COLUMNS = ["path_id", "t", "edge_id", "x", "vertex", "alive"]
CROSSOVER_COLUMNS = ["path_id", "n", "S_n", "K_n"]


def paths_frame(records: Iterable[GlobalPathRecord], grid: Optional[np.ndarray] = None) -> pd.DataFrame:
    """One row per sample; skeleton samples unless a real-time grid is given"""
    frames: List[pd.DataFrame] = []
    for record in records:
        samples = record.samples() if grid is None else record.resample(grid)
        frames.append(pd.DataFrame({
            "path_id": record.path_id,
            "t": samples.times,
            "edge_id": samples.edge_ids,
            "x": samples.xs,
            "vertex": samples.vertices,
            "alive": samples.alive,
        }))
    if not frames:
        return pd.DataFrame(columns=PATH_COLUMNS)
    return pd.concat(frames, ignore_index=True)[PATH_COLUMNS]


def crossovers_frame(records: Iterable[GlobalPathRecord]) -> pd.DataFrame:
    rows = []
    for record in records:
        for n, (s, k) in enumerate(zip(record.crossovers.times, record.crossovers.vertices), start=1):
            rows.append({"path_id": record.path_id, "n": n, "S_n": s, "K_n": k})
    return pd.DataFrame(rows, columns=CROSSOVER_COLUMNS)


def export_paths(records: List[GlobalPathRecord], output_dir: str,
                 grid: Optional[np.ndarray] = None) -> List[str]:
    """Write paths.csv and crossovers.csv; returns the written file paths"""
    os.makedirs(output_dir, exist_ok=True)
    paths_file = os.path.join(output_dir, "paths.csv")
    crossovers_file = os.path.join(output_dir, "crossovers.csv")
    paths_frame(records, grid).to_csv(paths_file, index=False, float_format="%.10g")
    crossovers_frame(records).to_csv(crossovers_file, index=False, float_format="%.10g")
    return [paths_file, crossovers_file]
