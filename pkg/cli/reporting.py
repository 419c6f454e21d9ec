"""
File emission for scenario results.

Ensembles and decompositions go to CSV (`path,t_0,...,t_{2^n}`, with a
`component` column for decompositions) next to a JSON sidecar; reports go to
JSON plus a plot-ready CSV `level,quantity,value,stderr`. Floats are written
with 17 significant digits and JSON keys sorted, so equal results give
byte-identical files.
"""

import json
import logging
import math
import os
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from grid_paths import PathEnsemble, StoppingTimeVector, make_grid, model_from_dict
from integrands import ElementaryIntegrand
from limits import PipelineReport, ProbeResult, RiemannReport
from variation import MeanVariationReport, RaoDecomposition, martingale_certificate, submartingale_certificates

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
REPORT_COLUMNS = ["level", "quantity", "value", "stderr"]


def prepare_directory(directory) -> Path:
    """Create the output directory; raise PermissionError when it cannot be written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if not os.access(directory, os.W_OK | os.X_OK):
        raise PermissionError(f"output directory {directory} is not writable")
    return directory


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def write_json(payload, path: Path) -> Path:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, default=_plain)
        handle.write("\n")
    return path


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def value_columns(count: int) -> List[str]:
    return [f"t_{i}" for i in range(count)]


def ensemble_frame(ensemble: PathEnsemble, matrix: Optional[np.ndarray] = None) -> pd.DataFrame:
    matrix = ensemble.values if matrix is None else matrix
    frame = pd.DataFrame(matrix, columns=value_columns(ensemble.grid.n_points))
    frame.insert(0, "path", np.arange(ensemble.n_paths))
    return frame


def history_path(csv_path: Path) -> Path:
    return csv_path.with_name(f"{csv_path.stem}_history.csv")


def write_ensemble(ensemble: PathEnsemble, directory: Path, stem: str = "ensemble", fmt: str = "csv") -> List[Path]:
    """
    CSV plus the JSON sidecar {model, seed, grid_level, n_paths, synthesis_method},
    or one JSON file. Models whose filtration comes from another path (W for
    W^2, the inner path for a truncation) also get `<stem>_history.csv`, or a
    "history" key in the JSON layout.
    """
    metadata = ensemble.metadata()
    separate = ensemble.model.separate_history
    if fmt == "json":
        payload = {**metadata, "values": ensemble.values}
        if separate:
            payload["history"] = ensemble.history
        return [write_json(payload, directory / f"{stem}.json")]
    paths = [
        write_frame(ensemble_frame(ensemble), directory / f"{stem}.csv"),
        write_json(metadata, directory / f"{stem}.json"),
    ]
    if separate:
        paths.append(write_frame(ensemble_frame(ensemble, ensemble.history), history_path(paths[0])))
    return paths


def _read_matrix(csv_path: Path, n_points: int) -> np.ndarray:
    frame = pd.read_csv(csv_path, float_precision="round_trip")
    return frame[value_columns(n_points)].to_numpy(dtype=np.float64)


def read_ensemble(csv_path) -> PathEnsemble:
    """Inverse of write_ensemble for the CSV layout; the sidecars must sit next to the CSV."""
    csv_path = Path(csv_path)
    with open(csv_path.with_suffix(".json"), "r", encoding="utf-8") as handle:
        metadata = json.load(handle)
    grid = make_grid(metadata["grid_level"])
    model = model_from_dict(metadata["model"])
    history = None
    if model.separate_history:
        source = history_path(csv_path)
        if not source.exists():
            raise FileNotFoundError(f"{model.kind.value} ensembles need their filtration in {source}")
        history = _read_matrix(source, grid.n_points)
    return PathEnsemble(
        grid=grid,
        values=_read_matrix(csv_path, grid.n_points),
        model=model,
        seed=metadata["seed"],
        synthesis_method=metadata["synthesis_method"],
        history=history,
    )


def write_integrand(
    integrand: ElementaryIntegrand, directory: Path, stem: str, fmt: str = "csv"
) -> List[Path]:
    """Coefficients K^i, one column per step of D_n, plus the tag {kind, lag, bound}."""
    tag = {**integrand.tag(), "level": integrand.level}
    if fmt == "json":
        return [write_json({**tag, "coefficients": integrand.coefficients}, directory / f"{stem}.json")]
    frame = pd.DataFrame(integrand.coefficients, columns=value_columns(integrand.coefficients.shape[1]))
    frame.insert(0, "path", np.arange(integrand.n_paths))
    return [write_frame(frame, directory / f"{stem}.csv"), write_json(tag, directory / f"{stem}.json")]


def write_decomposition(rao: RaoDecomposition, directory: Path, fmt: str = "csv") -> List[Path]:
    """M, A, Y, Z stacked with a `component` column, and a sidecar with the certificates."""
    doob = rao.doob
    upper, lower = submartingale_certificates(rao)
    summary = {
        **doob.source.metadata(),
        "oracle": doob.oracle.kind.value,
        "level": doob.coarse.level,
        "doob_reconstruction_error": doob.reconstruction_error(),
        "rao_reconstruction_error": rao.reconstruction_error(),
        "martingale_certificate": float(np.max(martingale_certificate(doob))),
        "upper_submartingale_certificate": float(np.min(upper)),
        "lower_submartingale_certificate": float(np.min(lower)),
    }
    components = [doob.martingale, doob.compensator, rao.upper, rao.lower]
    if fmt == "json":
        summary["components"] = {part.label: part.values for part in components}
        return [write_json(summary, directory / "decomposition.json")]
    frames = []
    for part in components:
        frame = ensemble_frame(part)
        frame.insert(0, "component", part.label)
        frames.append(frame)
    return [
        write_frame(pd.concat(frames, ignore_index=True), directory / "decomposition.csv"),
        write_json(summary, directory / "decomposition.json"),
    ]


def write_mean_variation(report: MeanVariationReport, directory: Path, fmt: str = "csv") -> List[Path]:
    paths = [write_json(report.to_dict(), directory / "mean_variation.json")]
    if fmt == "json":
        return paths
    frame = pd.DataFrame(
        [[e.level, e.estimate, e.stderr, e.oracle, e.stopped] for e in report.entries],
        columns=["level", "estimate", "stderr", "oracle", "stopped"],
    )
    return paths + [write_frame(frame, directory / "mean_variation.csv")]


def report_row(level, quantity: str, value, stderr=None) -> list:
    return [level, quantity, value, math.nan if stderr is None else stderr]


def probe_rows(probe: ProbeResult) -> List[list]:
    rows = []
    for entry in probe.levels:
        rows.append(report_row(entry.level, "C", entry.constant, entry.stderr))
        for name, value in sorted(entry.members.items()):
            rows.append(report_row(entry.level, f"member:{name}", value))
        if entry.target is not None:
            rows.append(report_row(entry.level, "target", entry.target))
    return rows


def riemann_rows(report: RiemannReport) -> List[list]:
    rows = []
    for name, cauchy in report.reports.items():
        for level, distance in zip(cauchy.levels[1:], cauchy.consecutive()):
            rows.append(report_row(level, f"step_distance:{name}", distance))
    for name, witness in report.witnesses.items():
        for level, median in zip(report.levels, witness["medians"]):
            rows.append(report_row(level, f"median_abs_sum:{name}", median))
    return rows


def pipeline_rows(report: PipelineReport) -> List[list]:
    rows = probe_rows(report.probe)
    for entry in report.levels:
        rows.append(report_row(entry.level, "fraction_unstopped", entry.fraction_unstopped))
        rows.append(report_row(entry.level, "stopped_variation", entry.stopped_variation, entry.stopped_variation_stderr))
        rows.append(report_row(entry.level, "accumulated_variation", entry.accumulated_variation, entry.accumulated_stderr))
        rows.append(report_row(entry.level, "accumulated_upper_bound", entry.accumulated_upper_bound))
    return rows


def write_report(payload: Dict, rows: Sequence[list], directory: Path, stem: str, fmt: str = "csv") -> List[Path]:
    """JSON payload always; the plot-ready CSV too unless fmt is json."""
    paths = [write_json(payload, directory / f"{stem}.json")]
    if fmt == "csv":
        paths.append(write_frame(pd.DataFrame(list(rows), columns=REPORT_COLUMNS), directory / f"{stem}.csv"))
    return paths


def write_stopping_times(
    times: Dict[str, StoppingTimeVector], directory: Path, stem: str = "stopping_times"
) -> Path:
    """One column per stopping time, fine-grid indices with "inf" for never."""
    frame = pd.DataFrame({name: rho.to_list() for name, rho in times.items()})
    frame.insert(0, "path", np.arange(len(frame)))
    return write_frame(frame, directory / f"{stem}.csv")


def write_failures(command: str, failures: Iterable[dict], directory: Path) -> Path:
    return write_json({"command": command, "failures": list(failures)}, directory / "failures.json")


def write_config(flat: Dict, directory: Path) -> Path:
    return write_json(flat, directory / "config.json")


def clear_failures(directory: Path) -> None:
    path = directory / "failures.json"
    if path.exists():
        path.unlink()
        logger.debug(f"removed stale {path}")
