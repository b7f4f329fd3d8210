"""CSV and JSON writers with a fixed float format so identical runs are byte-identical."""
import csv
import json
import math
from typing import Any, Iterable, Sequence, TextIO

SWEEP_COLUMNS = ["x", "y", "gamma", "lambda", "mu", "pred_m", "pred_n", "det_m", "det_n", "agree"]
ORACLE_COLUMNS = ["oracle_m", "oracle_n"]
PHASE_COLUMNS = ["branch", "x", "y"]
CLASSIFY_COLUMNS = ["gamma", "lambda", "mu",
                    "alpha_minus", "beta_minus", "zeta_minus",
                    "alpha_plus", "beta_plus", "zeta_plus",
                    "m", "n", "on_boundary", "source"]
SPECTRUM_COLUMNS = ["source", "sector", "side", "value"]
VERIFY_COLUMNS = ["name", "passed", "margin"]


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def write_csv(rows: Iterable[Sequence[Any]], columns: Sequence[str], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])


def _clean(obj: Any) -> Any:
    if isinstance(obj, float):
        return None if math.isnan(obj) else float(format_value(obj))
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(payload: dict, stream: TextIO) -> None:
    """Report with top-level fields inputs, per_sector, totals and checks."""
    report = {"inputs": {}, "per_sector": [], "totals": {}, "checks": []}
    report.update(payload)
    stream.write(json.dumps(_clean(report), indent=2, sort_keys=True))
    stream.write("\n")
