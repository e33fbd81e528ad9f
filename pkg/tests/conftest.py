"""Shared fixtures: in-memory dataset builders and kernel warmup."""

from __future__ import annotations

import numpy as np
import pytest

from sliceminer import _kernels
from sliceminer.dataset import Dataset, IngestConfig, load_table


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger numba compilation once so timed tests measure compute."""
    _kernels.hypergeom_lower_tail(10, 5, 4, 1)
    _kernels.min_width_window(np.array([0.0, 1.0, 2.0]), 2)
    _kernels.best_split_scan(np.array([1.0, 2.0, 3.0, 4.0]),
                             np.array([1, 1, 0, 0], dtype=np.uint8), 1)


def write_csv(path, header, rows, delimiter=","):
    lines = [delimiter.join(header)]
    lines += [delimiter.join(str(cell) for cell in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def dataset_from_columns(tmp_path, columns: dict[str, list], correct: list[bool],
                         config_kwargs: dict | None = None) -> Dataset:
    """Build a Dataset through the real CSV ingestion path.

    ``columns`` maps feature name -> cell values; correctness is encoded via
    a label/pred pair appended to the table.
    """
    names = list(columns)
    n = len(correct)
    rows = []
    for i in range(n):
        row = [columns[name][i] for name in names]
        row.append(1)
        row.append(1 if correct[i] else 0)
        rows.append(row)
    path = write_csv(tmp_path / "table.csv", names + ["label", "pred"], rows)
    kwargs = dict(ground_truth="label", prediction="pred")
    kwargs.update(config_kwargs or {})
    return load_table(path, IngestConfig(**kwargs))
