"""
CSV persistence of experiment records and regression datasets. Floats are
written with 17 significant digits so a write/read cycle is bit-exact.
"""

import csv
from pathlib import Path
from typing import Iterable

from src.app.montecarlo.models.experiment import (
    ExperimentConfig,
    ExperimentRecord,
    Metric,
    MetricSummary,
    RegressionDataset,
    RegressionRow,
)
from src.app.shared.domain.constants import (
    DATASET_HEADER,
    DATASET_SCHEMA,
    FLOAT_FORMAT,
    RECORDS_HEADER,
    RECORDS_SCHEMA,
)
from src.app.shared.domain.exceptions import SchemaError
from src.app.utils.logger import logger as utils_logger

logger = utils_logger(__name__)

SUMMARY_COLUMNS = ("metric", "mean", "stderr")


def format_float(value: float) -> str:
    return format(value, FLOAT_FORMAT)


def write_rows(path: str | Path, header: Iterable[str], rows: Iterable[list]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_float(v) if isinstance(v, float) else v for v in row]
            )
    logger.info("written path=%s", path)
    return path


def save_records(records: Iterable[ExperimentRecord], path: str | Path) -> Path:
    """
    One row per (cell, metric). The seed column is the cell seed, derived from
    the master seed of the run (kept in manifest.json) and the cell index.
    """
    rows = []
    for record in records:
        config = record.config
        for metric, summary in record.summaries.items():
            rows.append(
                [
                    RECORDS_SCHEMA,
                    config.n,
                    float(config.q),
                    float(record.effective_q),
                    float(config.p),
                    float(config.qstar),
                    config.replicates,
                    config.seed,
                    metric.value,
                    float(summary.mean),
                    float(summary.stderr),
                    float(record.walltime_s),
                ]
            )
    return write_rows(path, RECORDS_HEADER, rows)


def save_dataset(dataset: RegressionDataset, path: str | Path) -> Path:
    rows = [
        [
            DATASET_SCHEMA,
            float(row.q),
            float(row.qstar),
            float(row.r_finite),
            float(row.r_asymptotic),
            float(row.target_kl_norm),
            float(row.stderr),
        ]
        for row in dataset.rows
    ]
    return write_rows(path, DATASET_HEADER, rows)


def persist(
    obj: RegressionDataset | Iterable[ExperimentRecord], path: str | Path
) -> Path:
    if isinstance(obj, RegressionDataset):
        return save_dataset(obj, path)
    return save_records(obj, path)


def _read(path: str | Path) -> tuple[list[str], list[dict[str, str]]]:
    with Path(path).open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        header = list(reader.fieldnames or [])
        return header, list(reader)


def _check_schema(row: dict[str, str], schema: str, line: int) -> None:
    if row.get("schema") != schema:
        raise SchemaError(
            f"line {line}: schema {row.get('schema')!r}, expected {schema!r}"
        )


def _records_from_rows(rows: list[dict[str, str]]) -> list[ExperimentRecord]:
    records: list[ExperimentRecord] = []
    group_key = None
    group: list[dict[str, str]] = []

    def close_group():
        if not group:
            return
        first = group[0]
        config = ExperimentConfig(
            n=int(first["n"]),
            q=float(first["q"]),
            p=float(first["p"]),
            replicates=int(first["replicates"]),
            seed=int(first["seed"]),
            metrics=tuple(Metric(row["metric"]) for row in group),
        )
        records.append(
            ExperimentRecord(
                config=config,
                effective_q=float(first["effective_q"]),
                summaries={
                    Metric(row["metric"]): MetricSummary(
                        mean=float(row["mean"]),
                        stderr=float(row["stderr"]),
                        count=config.replicates,
                    )
                    for row in group
                },
                walltime_s=float(first["walltime_s"]),
            )
        )

    for line, row in enumerate(rows, start=2):
        _check_schema(row, RECORDS_SCHEMA, line)
        key = tuple(row[name] for name in RECORDS_HEADER if name not in SUMMARY_COLUMNS)
        seen = {r["metric"] for r in group}
        if key != group_key or row["metric"] in seen:
            close_group()
            group = []
            group_key = key
        group.append(row)
    close_group()
    return records


def _dataset_from_rows(rows: list[dict[str, str]]) -> RegressionDataset:
    dataset_rows = []
    for line, row in enumerate(rows, start=2):
        _check_schema(row, DATASET_SCHEMA, line)
        dataset_rows.append(
            RegressionRow(**{name: float(row[name]) for name in DATASET_HEADER[1:]})
        )
    return RegressionDataset(rows=dataset_rows)


def load(path: str | Path) -> list[ExperimentRecord] | RegressionDataset:
    """Reads a records or dataset CSV, recognised by its exact header."""
    header, rows = _read(path)
    try:
        if tuple(header) == RECORDS_HEADER:
            return _records_from_rows(rows)
        if tuple(header) == DATASET_HEADER:
            return _dataset_from_rows(rows)
    except (KeyError, ValueError, TypeError) as e:
        raise SchemaError(f"malformed row in {path}: {e}")
    raise SchemaError(f"unknown header {header} in {path}")


def load_records(path: str | Path) -> list[ExperimentRecord]:
    loaded = load(path)
    if not isinstance(loaded, list):
        raise SchemaError(f"{path} holds a regression dataset, not records")
    return loaded


def load_dataset(path: str | Path) -> RegressionDataset:
    loaded = load(path)
    if not isinstance(loaded, RegressionDataset):
        raise SchemaError(f"{path} holds experiment records, not a dataset")
    return loaded
