"""CSV and JSON emission for experiment batches."""

import csv
import io
import json
import math
from pathlib import Path

from .experiment import TrialBatch

CSV_HEADER = ["n", "d", "sigma", "snr", "gamma", "estimator", "trials", "successes", "freq", "stderr"]
DISTORTION_COLUMNS = ["D", "error_freq", "converse_satisfied"]


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def batch_to_csv(batch: TrialBatch) -> str:
    """One row per grid point; distortion batches carry three extra columns."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    distortion = batch.is_distortion
    writer.writerow(CSV_HEADER + (DISTORTION_COLUMNS if distortion else []))
    for agg in batch.aggregates:
        row = [agg.n, agg.d, _fmt(agg.sigma), _fmt(agg.snr), _fmt(agg.gamma), agg.estimator,
               agg.trials, agg.successes, _fmt(agg.freq), _fmt(agg.stderr)]
        if distortion:
            converse = "" if agg.converse is None else str(agg.converse["satisfied"]).lower()
            row += [agg.distortion_D, _fmt(1 - agg.freq), converse]
        writer.writerow(row)
    return buf.getvalue()


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def emit_csv(batch: TrialBatch, path: Path) -> Path:
    path = Path(path)
    _write_text(path, batch_to_csv(batch))
    return path


def _finite_or_marker(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _finite_or_marker(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_or_marker(v) for v in value]
    return value


def to_json_text(doc) -> str:
    """Strict JSON; non-finite floats (the noiseless snr) become the strings "inf", "-inf", "nan"."""
    return json.dumps(_finite_or_marker(doc), indent=2, allow_nan=False)


def json_sidecar_path(path: Path) -> Path:
    """Where the batch JSON goes next to a CSV; never the CSV path itself."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return path.with_name(f"{path.stem}.batch.json")
    return path.with_suffix(".json")


def emit_batch_json(batch: TrialBatch, path: Path) -> Path:
    """Full batch (config, records, aggregates) as JSON."""
    path = Path(path)
    _write_text(path, to_json_text(batch.to_dict()))
    return path
