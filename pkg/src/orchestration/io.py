"""Reading sample sets and task specifications from disk."""

import hashlib
import json
import re
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import ValidationError

from quadrature.errors import InputFormatError
from quadrature.models import SampleSet
from simulation.models import TaskSpec

VALUE_COLUMN = "f"
LOCATION_COLUMN_PATTERN = re.compile(r"^x(\d+)$")
PANDAS_LINE_PATTERN = re.compile(r"line (\d+)")
SUPPORTED_FORMATS = ("csv", "json")


def file_sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def detect_format(path: Path, explicit: str | None = None) -> str:
    """Pick the input format from an explicit choice or the file extension (default csv)."""
    fmt = (explicit or Path(path).suffix.lstrip(".") or "csv").lower()
    if fmt not in SUPPORTED_FORMATS:
        raise InputFormatError(f"Unsupported input format '{fmt}'; expected one of {', '.join(SUPPORTED_FORMATS)}")
    return fmt


def load_samples(path: str | Path, fmt: str | None = None) -> SampleSet:
    """
    Load locations and integrand values.

    CSV files have location columns x1..xd and a value column f. JSON files hold
    {"x": [[...], ...], "f": [...]}.

    Raises:
        FileNotFoundError: If the file does not exist
        InputFormatError: If the file cannot be parsed; line and column are reported when known
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Input file does not exist: {path}")
    if detect_format(path, fmt) == "json":
        return _samples_from_json(path)
    return _samples_from_csv(path)


def _samples_from_csv(path: Path) -> SampleSet:
    # The header is read as a data row so rows wider than it fail instead of becoming an index
    try:
        raw = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise InputFormatError("Input file is empty", line=1)
    except pd.errors.ParserError as e:
        match = PANDAS_LINE_PATTERN.search(str(e))
        raise InputFormatError(f"Malformed CSV row: {e}", line=int(match.group(1)) if match else None)

    header = [str(name).strip() for name in raw.iloc[0]]
    frame = raw.iloc[1:].reset_index(drop=True)
    frame.columns = header
    location_columns = _location_columns(header)
    columns = [*location_columns, VALUE_COLUMN]
    numeric = {}
    for name in columns:
        converted = pd.to_numeric(frame[name].str.strip(), errors="coerce")
        bad = ~np.isfinite(converted.to_numpy(dtype=float))
        if bad.any():
            row = int(np.argmax(bad))
            raise InputFormatError(
                f"Non-numeric value {frame[name].iloc[row]!r} in column '{name}'",
                line=row + 2,
                column=list(frame.columns).index(name) + 1,
            )
        numeric[name] = converted.to_numpy(dtype=float)

    if len(frame) == 0:
        raise InputFormatError("Input file has a header but no rows", line=2)
    locations = np.column_stack([numeric[name] for name in location_columns])
    return SampleSet(locations=locations, values=numeric[VALUE_COLUMN])


def _location_columns(columns: list[str]) -> list[str]:
    """Return x1..xd in dimension order, rejecting gaps and unknown columns."""
    indexed: dict[int, str] = {}
    for position, name in enumerate(columns, start=1):
        if name in columns[: position - 1]:
            raise InputFormatError(f"Duplicate column '{name}'", line=1, column=position)
        match = LOCATION_COLUMN_PATTERN.match(name)
        if match:
            indexed[int(match.group(1))] = name
        elif name != VALUE_COLUMN:
            raise InputFormatError(f"Unexpected column '{name}'", line=1, column=position)
    if VALUE_COLUMN not in columns:
        raise InputFormatError(f"Missing value column '{VALUE_COLUMN}'", line=1)
    if not indexed or sorted(indexed) != list(range(1, len(indexed) + 1)):
        raise InputFormatError("Location columns must be named x1..xd without gaps", line=1)
    return [indexed[k] for k in sorted(indexed)]


def _read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise InputFormatError(f"Invalid JSON: {e.msg}", line=e.lineno, column=e.colno)


def _samples_from_json(path: Path) -> SampleSet:
    document = _read_json(path)
    if not isinstance(document, dict) or "x" not in document or VALUE_COLUMN not in document:
        raise InputFormatError('JSON input must be an object with keys "x" and "f"')
    try:
        return SampleSet(locations=document["x"], values=document[VALUE_COLUMN])
    except (ValueError, TypeError) as e:
        raise InputFormatError(f"Invalid sample data: {e}")


def load_task(path: str | Path) -> TaskSpec:
    """Load a task specification (integrand polynomial plus Gaussian-mixture distribution).

    Raises:
        FileNotFoundError: If the file does not exist
        InputFormatError: If the JSON is malformed or does not match the task schema
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Task file does not exist: {path}")
    try:
        return TaskSpec.model_validate(_read_json(path))
    except ValidationError as e:
        raise InputFormatError(f"Invalid task specification: {e}")


def samples_to_csv(samples: SampleSet) -> str:
    """Render a sample set in the CSV input format."""
    frame = pd.DataFrame(samples.locations, columns=[f"x{k + 1}" for k in range(samples.d)])
    frame[VALUE_COLUMN] = samples.values
    return frame.to_csv(index=False)
