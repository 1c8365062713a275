"""
Operator and function files.

Operator file:  {"weights": [w0, ...], "matrix": [[[re, im], ...], ...]}
Function file:  {"space": [w0, ...] (optional), "values": [[re, im], ...]}
                or {"space": [...], "functions": [[[re, im], ...], ...]} for several

Numbers may be JSON numbers or decimal strings; entries may also be plain reals. Both formats are checked against the
published schemas before they are interpreted.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from src.errors import InvalidInputError, ParseError
from src.log_utils import get_logger
from src.operators import KernelOperator
from src.reports import validate_document
from src.space import CFunction, FiniteMeasureSpace, make_space

logger = get_logger(__name__)


def _load_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"❌ Cannot read {path}: {e}")
        raise InvalidInputError(f"cannot read {path}: {e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        logger.error(f"❌ Malformed JSON in {path} at line {e.lineno} column {e.colno}")
        raise ParseError(f"malformed JSON in {path}: {e.msg} (line {e.lineno}, column {e.colno})", e.pos, text)


def _real(x: Any) -> float:
    try:
        return float(x)
    except (TypeError, ValueError):
        raise InvalidInputError(f"not a number: {x!r}")


def _complex(entry: Any) -> complex:
    if isinstance(entry, (int, float, str)):
        return complex(_real(entry))
    return complex(_real(entry[0]), _real(entry[1]))


def complex_pairs(values: Sequence[complex]) -> List[List[float]]:
    return [[float(c.real), float(c.imag)] for c in np.asarray(values, dtype=complex).reshape(-1)]


def operator_from_dict(data: Dict[str, Any]) -> KernelOperator:
    validate_document(data, "operator_file")
    space = make_space([_real(w) for w in data["weights"]])
    rows = data["matrix"]
    if len(rows) != space.n or any(len(row) != space.n for row in rows):
        raise InvalidInputError(f"matrix must be {space.n} x {space.n} to match the weights")
    return KernelOperator(space, np.array([[_complex(e) for e in row] for row in rows], dtype=complex))


def load_operator(path: Union[str, Path]) -> KernelOperator:
    """
    Read an operator file

    Raises:
        ParseError: malformed JSON (with the character position)
        InvalidInputError: schema violation, bad weights or a matrix of the wrong shape
    """
    T = operator_from_dict(_load_json(path))
    logger.debug(f"loaded operator n={T.n} from {path}")
    return T


def operator_to_dict(T: KernelOperator) -> Dict[str, Any]:
    return {
        "weights": [float(w) for w in T.space.weights],
        "matrix": [complex_pairs(row) for row in T.entries],
    }


def dump_operator(T: KernelOperator, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(operator_to_dict(T), indent=2, allow_nan=False) + "\n", encoding="utf-8")


def load_functions(path: Union[str, Path], space: Optional[FiniteMeasureSpace] = None) -> List[CFunction]:
    """
    Read a function file; the functions live on space, or on the file's own weights

    Raises:
        InvalidInputError: no space available, or weights that disagree with space
    """
    data = _load_json(path)
    validate_document(data, "function_file")
    if "space" in data:
        own = make_space([_real(w) for w in data["space"]])
        if space is not None and not own.matches(space):
            raise InvalidInputError("function file weights differ from the operator's weights")
        space = space or own
    if space is None:
        raise InvalidInputError("function file has no weights and no operator was given")
    rows = data["functions"] if "functions" in data else [data["values"]]
    return [CFunction(space, [_complex(e) for e in values]) for values in rows]


def functions_to_dict(fs: Sequence[CFunction]) -> Dict[str, Any]:
    return {
        "space": [float(w) for w in fs[0].space.weights],
        "functions": [complex_pairs(f.values) for f in fs],
    }
