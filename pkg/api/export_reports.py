import os
from typing import Iterable, List, Optional

import pandas as pd

from common.errors import ConfigError
from common.utils import now_iso, save_json, validate_against_schema

CSV_COLUMNS = ["name", "lhs", "rhs", "tol", "passed", "seconds"]


def build_payload(reports: Iterable, generated_at: Optional[str] = None) -> dict:
    """Report payload; wall-clock data is isolated under 'timing' so the rest is reproducible."""
    reports = list(reports)
    rows = [r.to_dict() for r in reports]
    passed = sum(1 for r in reports if r.passed)
    payload = {
        "units": "bits",
        "summary": {"total": len(reports), "passed": passed, "failed": len(reports) - passed},
        "reports": rows,
        "timing": {
            "generated_at": generated_at or now_iso(),
            "seconds": [round(float(r.wall_time), 6) for r in reports],
        },
    }
    validate_against_schema(payload, "report.schema.json", ConfigError)
    return payload


def reports_frame(reports: Iterable) -> pd.DataFrame:
    rows = [{
        "name": r.check_name,
        "lhs": r.computed_lhs,
        "rhs": r.computed_rhs,
        "tol": r.tolerance,
        "passed": bool(r.passed),
        "seconds": round(float(r.wall_time), 6),
    } for r in reports]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def write_json(reports, path: str) -> None:
    save_json(path, build_payload(reports))


def write_csv(reports, path: str) -> None:
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    reports_frame(reports).to_csv(path, index=False)


def write_reports(reports, out: str, fmt: Optional[str] = None) -> List[str]:
    """Write <out>.json and <out>.csv, or only the requested format. Returns written paths."""
    reports = list(reports)
    base, ext = os.path.splitext(out)
    if ext.lower() in (".json", ".csv"):
        fmt = fmt or ext.lower()[1:]
    else:
        base = out
    written = []
    if fmt in (None, "json"):
        write_json(reports, base + ".json")
        written.append(base + ".json")
    if fmt in (None, "csv"):
        write_csv(reports, base + ".csv")
        written.append(base + ".csv")
    return written


def quantity_payload(quantity: str, result, inputs: List[str], emit_witness: bool = False) -> dict:
    return {"units": "bits", "quantity": quantity, "inputs": list(inputs),
            **result.to_dict(emit_witness=emit_witness)}
