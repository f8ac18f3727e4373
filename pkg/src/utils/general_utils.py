import json
import os
import sys

import numpy as np
import pandas as pd
from dotenv import dotenv_values, load_dotenv
from dotenv.parser import parse_stream

here = os.path.dirname(os.path.realpath(__file__))
sys.path.append(os.path.join(here, "../.."))
import config

load_dotenv()
THIMBLE_CONFIG = os.getenv("THIMBLE_CONFIG")


def report(message, verbose=True):
    """Print a progress banner to stderr."""
    if verbose:
        print(f"\n{message}", file=sys.stderr)


def normalize_key(key):
    return key.strip().lstrip("-").replace("-", "_")


def read_config_file(path):
    """Parse a flat `key = value` file with python-dotenv. `#` starts a comment.

    Returns:
        dict of normalized key -> raw string value.
    """
    with open(path) as config_file:
        for binding in parse_stream(config_file):
            if binding.error or (binding.key is not None and binding.value is None):
                line = binding.original.string.strip()
                raise ValueError(
                    f"{path}:{binding.original.line}: expected `key = value`, got: {line}"
                )
    values = dotenv_values(path, interpolate=False)
    return {normalize_key(key): value.strip() for key, value in values.items()}


def merge_settings(defaults, file_values, flag_values):
    """Flags > config file > defaults. None flags count as unset."""
    merged = dict(defaults)
    merged.update(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    return merged


def split_complex(row):
    """Replace complex entries `x` by `re_x` and `im_x` columns."""
    flat = {}
    for key, value in row.items():
        if isinstance(value, (complex, np.complexfloating)):
            flat[f"re_{key}"] = float(np.real(value))
            flat[f"im_{key}"] = float(np.imag(value))
        elif isinstance(value, np.floating):
            flat[key] = float(value)
        elif isinstance(value, np.integer):
            flat[key] = int(value)
        else:
            flat[key] = value
    return flat


def rows_to_frame(rows, columns=None):
    frame = pd.DataFrame([split_complex(row) for row in rows])
    if columns is not None:
        frame = frame.reindex(columns=columns)
    return frame


def _json_value(value):
    if value is None:
        return None
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    try:
        if pd.isna(value):
            return None
    except (TypeError, ValueError):
        pass
    return value


def render_json(frame, meta):
    rows = [
        {key: _json_value(value) for key, value in record.items()}
        for record in frame.to_dict(orient="records")
    ]
    document = {"meta": meta, "rows": rows}
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_csv(frame):
    return frame.to_csv(index=False, float_format=config.OUTPUT_SETTINGS["csv_float_format"])


def write_output(frame, meta, output_format, out):
    """Write a result frame as JSON or CSV to `out` ("-" for stdout)."""
    if output_format == "json":
        text = render_json(frame, meta)
    elif output_format == "csv":
        text = render_csv(frame)
    else:
        raise ValueError(f"Unknown output format: {output_format}")
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as output_file:
            output_file.write(text)
    return text
