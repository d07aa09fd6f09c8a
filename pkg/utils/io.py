"""
Artefact writers. JSON goes out with sorted keys and infinities as the
string "inf"; every output gets a ``<name>.manifest.json`` sidecar.
"""
import json
import logging
import math
from pathlib import Path

import numpy as np

from middleware.errors import DataFileError
from utils.manifest import manifest_path

logger = logging.getLogger(__name__)


def json_ready(value):
    """Plain JSON types; non-finite floats become "inf", "-inf" or "nan"."""
    if isinstance(value, dict):
        return {str(k): json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(v) for v in value]
    if isinstance(value, np.ndarray):
        return [json_ready(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, Path):
        return str(value)
    return value


def parse_float(value):
    """Inverse of json_ready for a single number ("inf" included)."""
    return float(value)


def _ensure_parent(path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)


def write_manifest(manifest, output_path):
    if manifest is None:
        return None
    manifest.add_output(output_path)
    side = manifest_path(output_path)
    with open(side, "w") as f:
        json.dump(json_ready(manifest.to_dict()), f, indent=2, sort_keys=True)
        f.write("\n")
    return side


def write_json(path, data, manifest=None):
    _ensure_parent(path)
    payload = dict(data)
    if manifest is not None:
        manifest.add_output(path)
        payload["manifest"] = manifest.to_dict()
    with open(path, "w") as f:
        json.dump(json_ready(payload), f, indent=2, sort_keys=True)
        f.write("\n")
    write_manifest(manifest, path)
    logger.info(f"Wrote {path}")
    return path


def write_csv(path, frame, manifest=None):
    _ensure_parent(path)
    frame.to_csv(path, index=False)
    write_manifest(manifest, path)
    logger.info(f"Wrote {path}")
    return path


def read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DataFileError(f"invalid JSON: {e}", path=path, row=e.lineno) from e
