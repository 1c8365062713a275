"""
Report envelopes and schema validation.
Every JSON document the CLI writes looks like
    {"kind", "version", "seed", "tolerances", "anchor", "payload"}
and is validated (envelope and payload) against schemas/ before it is written.
"""

import json
import subprocess
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Union

import jsonschema
import numpy as np

from src import __version__
from src.errors import InvalidInputError, NumericFailure
from src.log_utils import get_logger

logger = get_logger(__name__)

REPO_ROOT = Path(__file__).resolve().parent.parent
SCHEMA_DIR = REPO_ROOT / "schemas"


@lru_cache(maxsize=None)
def load_schema(kind: str) -> Dict[str, Any]:
    path = SCHEMA_DIR / f"{kind}.schema.json"
    if not path.is_file():
        raise InvalidInputError(f"no published schema for {kind!r}")
    with path.open(encoding="utf-8") as handle:
        return json.load(handle)


def validate_document(document: Any, kind: str) -> None:
    """
    Validate against schemas/<kind>.schema.json

    Raises:
        InvalidInputError: the document does not match
    """
    try:
        jsonschema.validate(instance=document, schema=load_schema(kind))
    except jsonschema.ValidationError as e:
        where = "/".join(str(part) for part in e.absolute_path) or "<root>"
        raise InvalidInputError(f"{kind} does not match its schema at {where}: {e.message}")


@lru_cache(maxsize=1)
def git_version() -> str:
    """git describe of the working tree, or the package version outside a checkout"""
    try:
        result = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=REPO_ROOT, capture_output=True, text=True, timeout=5, check=True,
        )
        described = result.stdout.strip()
        return described or __version__
    except (OSError, subprocess.SubprocessError):
        return __version__


def _plain(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def envelope(kind: str, payload: Any, seed: Optional[int], tolerances: Dict[str, float],
             anchor: Union[str, Dict[str, str]]) -> Dict[str, Any]:
    return {
        "kind": kind,
        "version": git_version(),
        "seed": seed,
        "tolerances": dict(tolerances),
        "anchor": anchor,
        "payload": _plain(payload),
    }


def to_json(document: Any) -> str:
    """
    Serialise with shortest round-trip floats

    Raises:
        NumericFailure: the document holds NaN or infinity
    """
    try:
        return json.dumps(_plain(document), indent=2, allow_nan=False)
    except ValueError as e:
        logger.error(f"❌ Non-finite value in report: {e}")
        raise NumericFailure(f"report contains a non-finite value: {e}")


def render_report(kind: str, payload: Any, seed: Optional[int], tolerances: Dict[str, float],
                  anchor: Union[str, Dict[str, str]]) -> str:
    """
    Wrap, validate and serialise one report

    Raises:
        NumericFailure: the document holds a non-finite value or does not match its own schema
    """
    document = envelope(kind, payload, seed, tolerances, anchor)
    text = to_json(document)
    try:
        validate_document(document, "envelope")
        validate_document(document["payload"], kind)
    except InvalidInputError as e:
        logger.error(f"❌ Report failed output validation: {e}")
        raise NumericFailure(f"internal error, {e}")
    return text


def write_report(text: str, out: Optional[Union[str, Path]] = None) -> None:
    """Print to stdout, or write to out"""
    if out is None:
        print(text)
        return
    Path(out).write_text(text + "\n", encoding="utf-8")
    logger.info(f"✅ Wrote report to {out}")
