"""
Parser utilities for rtctimes
Handles exact parsing of rationals, weight vectors and task-set files.
"""

import json
import re
import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

from utils.errors import TaskFileError
from utils.task_model import DEADLINE_MODELS, Task, TaskSet

logger = logging.getLogger("rtctimes")

RationalLike = Union[int, str, Fraction]

# Accepted rational spellings
_RATIO_PATTERN = re.compile(r'^\s*([+-]?\d+)\s*/\s*(\d+)\s*$')             # p/q
_DECIMAL_PATTERN = re.compile(r'^\s*([+-]?)(\d*)(?:\.(\d*))?\s*$')          # 12, 1.5, .25


def parse_rational(value: Any) -> Fraction:
    """
    Parse an integer, a decimal string or a "p/q" string into an exact Fraction.

    Decimals are read as scaled integers, so "0.1" is exactly 1/10.
    """
    if isinstance(value, bool):
        raise TaskFileError(f"Not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise TaskFileError(f"Not a rational: {value!r}")

    match = _RATIO_PATTERN.match(value)
    if match:
        numerator, denominator = int(match.group(1)), int(match.group(2))
        if denominator == 0:
            raise TaskFileError(f"Zero denominator in {value!r}")
        return Fraction(numerator, denominator)

    match = _DECIMAL_PATTERN.match(value)
    if match and (match.group(2) or match.group(3)):
        sign = -1 if match.group(1) == '-' else 1
        whole = match.group(2) or "0"
        fraction_digits = match.group(3) or ""
        scaled = int(whole + fraction_digits)
        return sign * Fraction(scaled, 10 ** len(fraction_digits))

    raise TaskFileError(f"Not a rational: {value!r}")


def render_rational(value: Fraction) -> str:
    """Render as "p" when integral, "p/q" otherwise."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_weights(text: str) -> List[Fraction]:
    """Parse a comma-separated weight vector such as "0,1" or "1/2, 3"."""
    if not text or not text.strip():
        raise TaskFileError("Empty weight vector")
    return [parse_rational(part) for part in text.split(',')]


def _parse_json_number(text: str) -> Fraction:
    # json hands decimals over as text; keep them exact
    return parse_rational(text)


def task_set_from_dict(data: Dict[str, Any], deadline_model: Optional[str] = None) -> TaskSet:
    """Build a TaskSet from the decoded task-file document."""
    if not isinstance(data, dict):
        raise TaskFileError("Task file must contain a JSON object")

    model = deadline_model or data.get("deadline_model", "constrained")
    if model not in DEADLINE_MODELS:
        raise TaskFileError(f"Unknown deadline model {model!r}")

    raw_tasks = data.get("tasks")
    if not isinstance(raw_tasks, list) or not raw_tasks:
        raise TaskFileError("Task file needs a non-empty 'tasks' list")

    tasks = []
    for position, raw in enumerate(raw_tasks, start=1):
        if not isinstance(raw, dict):
            raise TaskFileError(f"Task {position} is not an object")
        try:
            period = parse_rational(raw["T"])
            deadline = parse_rational(raw["D"])
        except KeyError as e:
            raise TaskFileError(f"Task {position} is missing field {e.args[0]}")
        wcet_raw = raw.get("C")
        wcet = None if wcet_raw is None else parse_rational(wcet_raw)
        tasks.append(Task(period=period, deadline=deadline, wcet=wcet))

    logger.debug(f"Parsed {len(tasks)} tasks under the {model} deadline model")
    return TaskSet(tasks=tuple(tasks), deadline_model=model)


def load_task_file(path: str, deadline_model: Optional[str] = None) -> TaskSet:
    """
    Load a task-set JSON file.

    Args:
        path: file path
        deadline_model: overrides the file's own "deadline_model" when given

    Returns:
        the parsed TaskSet (not yet validated)
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f, parse_float=_parse_json_number)
    except OSError as e:
        raise TaskFileError(f"Cannot read task file {path}: {e}")
    except json.JSONDecodeError as e:
        raise TaskFileError(f"Malformed JSON in {path}: {e}")
    return task_set_from_dict(data, deadline_model)


def task_set_to_dict(ts: TaskSet) -> Dict[str, Any]:
    """Inverse of task_set_from_dict, rationals rendered as strings."""
    return {
        "deadline_model": ts.deadline_model,
        "tasks": [
            {
                "T": render_rational(task.period),
                "D": render_rational(task.deadline),
                "C": None if task.wcet is None else render_rational(task.wcet),
            }
            for task in ts.tasks
        ],
    }
