import os, json, time
from typing import Any, Optional

from rich.console import Console

from common.errors import ConfigError

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
SCHEMA_DIR = os.path.join(ROOT, "schemas")

CONSOLE = Console(stderr=True, highlight=False, soft_wrap=True)

def log(msg: str, level: str = "info") -> None:
    if level == "info" and os.environ.get("SUMCAP_QUIET"):
        return
    CONSOLE.print(f"[{level}] {msg}", markup=False)

def now_iso() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())

def worker_count(requested: Optional[int] = None) -> int:
    """Restart-level parallelism: explicit request, then SUMCAP_THREADS, then all cores."""
    if requested:
        return max(1, int(requested))
    raw = os.environ.get("SUMCAP_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log(f"ignoring non-integer SUMCAP_THREADS={raw!r}", "warn")
    return os.cpu_count() or 1

def load_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)

def save_json(path: str, obj: Any) -> None:
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, indent=2)
        f.write("\n")

def load_schema(name: str) -> dict:
    return load_json(os.path.join(SCHEMA_DIR, name))

def validate_against_schema(obj: Any, schema_name: str, error_cls=ConfigError) -> None:
    """Validate obj, raising error_cls with the first offending path on failure."""
    from jsonschema import Draft202012Validator

    validator = Draft202012Validator(load_schema(schema_name))
    errors = sorted(validator.iter_errors(obj), key=lambda e: [str(p) for p in e.path])
    if not errors:
        return
    err = errors[0]
    where = "/".join(str(p) for p in err.path) or "<root>"
    raise error_cls(f"schema {schema_name}: at {where}: {err.message}")
