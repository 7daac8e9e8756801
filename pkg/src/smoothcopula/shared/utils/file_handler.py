import json
import sys
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel, ValidationError

from smoothcopula.estimation.ranks import ObservationMatrix
from smoothcopula.schemas import SweepConfig
from smoothcopula.shared.errors import ConfigurationError, DataIOError, SmoothCopulaError
from smoothcopula.shared.utils.logger import SmoothCopulaLogger

PathLike = Union[str, Path]

PRESET_PACKAGE = "smoothcopula.data.configs"
CSV_FLOAT_FORMAT = "%.17g"


def _looks_numeric(labels: List[Any]) -> bool:
    try:
        [float(label) for label in labels]
    except (TypeError, ValueError):
        return False
    return True


def load_observations(path: PathLike, logger: Optional[SmoothCopulaLogger] = None) -> ObservationMatrix:
    """
    Load a sample from a CSV file with one row per observation.

    A header row is optional: a first row made only of numbers is data.
    """
    logger = logger or SmoothCopulaLogger("file_handler")
    try:
        frame = pd.read_csv(path, header=None, float_precision="round_trip")
        if not _looks_numeric(frame.iloc[0].tolist()):
            frame = frame.iloc[1:]
    except FileNotFoundError as e:
        logger.error(f"❌ File not found: {path}")
        raise DataIOError(f"file not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        logger.error(f"❌ Cannot parse CSV file: {path}")
        raise DataIOError(f"cannot parse CSV file {path}: {e}") from e

    try:
        values = frame.to_numpy(dtype=float)
    except (TypeError, ValueError) as e:
        raise DataIOError(f"non-numeric entries in {path}") from e
    if values.shape[0] == 0:
        raise DataIOError(f"no observations in {path}")

    sample = ObservationMatrix(values)
    logger.info(f"📄 Sample loaded: {path} (n={sample.n}, d={sample.d})")
    return sample


def list_presets() -> List[str]:
    """Names of the bundled benchmark configurations."""
    folder = resources.files(PRESET_PACKAGE)
    return sorted(Path(entry.name).stem for entry in folder.iterdir() if entry.name.endswith(".json"))


def _parse_document(text: str, suffix: str, origin: str) -> Dict[str, Any]:
    try:
        document = yaml.safe_load(text) if suffix in (".yaml", ".yml") else json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigurationError(f"cannot parse config {origin}: {e}") from e
    if not isinstance(document, dict):
        raise ConfigurationError(f"config {origin} must hold a mapping")
    return document


def load_config(source: PathLike, logger: Optional[SmoothCopulaLogger] = None) -> Dict[str, Any]:
    """
    Load a JSON or YAML benchmark config from a path or a bundled preset name.

    Raises:
        DataIOError: neither a readable file nor a preset
        ConfigurationError: the file does not parse into a mapping
    """
    logger = logger or SmoothCopulaLogger("file_handler")
    path = Path(source)
    if path.is_file():
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise DataIOError(f"cannot read {path}: {e}") from e
        logger.info(f"📄 Config loaded: {path}")
        return _parse_document(text, path.suffix.lower(), str(path))

    name = path.stem if path.suffix.lower() == ".json" else str(source)
    if name in list_presets():
        text = resources.files(PRESET_PACKAGE).joinpath(f"{name}.json").read_text(encoding="utf-8")
        logger.info(f"📄 Preset config loaded: {name}")
        return _parse_document(text, ".json", name)

    logger.error(f"❌ Config not found: {source}")
    raise DataIOError(f"config not found: {source} (presets: {', '.join(list_presets())})")


def load_sweep_config(source: PathLike, overrides: Optional[Dict[str, Any]] = None,
                      logger: Optional[SmoothCopulaLogger] = None) -> SweepConfig:
    """
    Load and validate a benchmark config; ``overrides`` replace experiment fields.

    Errors raised while parsing model or estimator strings keep their own
    type; other schema violations become ConfigurationError.
    """
    document = load_config(source, logger=logger)
    if overrides:
        target = document["base"] if isinstance(document.get("base"), dict) else document
        target.update({key: value for key, value in overrides.items() if value is not None})
    return parse_sweep_document(document, origin=str(source))


def parse_sweep_document(document: Dict[str, Any], origin: str = "<inline>") -> SweepConfig:
    """Validate a config mapping into a SweepConfig."""
    try:
        return SweepConfig.model_validate(document)
    except ValidationError as e:
        for error in e.errors():
            cause = (error.get("ctx") or {}).get("error")
            if isinstance(cause, SmoothCopulaError):
                raise cause from e
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ConfigurationError(f"invalid config {origin}: {location}: {first['msg']}") from e


def save_csv(frame: pd.DataFrame, output_path: Optional[PathLike] = None,
             logger: Optional[SmoothCopulaLogger] = None) -> None:
    """Write a CSV with a header, '.' decimals, LF line endings and 17 significant digits; None writes to stdout."""
    logger = logger or SmoothCopulaLogger("file_handler")
    if output_path is None:
        frame.to_csv(sys.stdout, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return
    path = Path(output_path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            frame.to_csv(f, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        logger.error(f"❌ Error saving CSV: {e}")
        raise DataIOError(f"cannot write {path}: {e}") from e
    logger.info(f"✅ CSV saved: {path} ({len(frame)} rows)")


def save_json(data: Any, output_path: PathLike, logger: Optional[SmoothCopulaLogger] = None) -> None:
    """Save data (pydantic models and numpy values included) to a JSON file."""
    logger = logger or SmoothCopulaLogger("file_handler")
    path = Path(output_path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(data, f, cls=CustomEncoder, ensure_ascii=False, indent=4)
    except OSError as e:
        logger.error(f"❌ Error saving JSON: {e}")
        raise DataIOError(f"cannot write {path}: {e}") from e
    logger.info(f"✅ JSON saved: {path}")


class CustomEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, BaseModel):
            return obj.model_dump(mode="json")
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, Enum):
            return obj.value
        try:
            return super().default(obj)
        except TypeError:
            return str(obj)
