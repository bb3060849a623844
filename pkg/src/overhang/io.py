"""Stack and profile documents.

A stack document is JSON::

    {
      "name": "harmonic-3",
      "blocks": [{"x": -0.25, "level": 0}, ...],
      "point_weights": [{"block": 2, "position": 0.5, "magnitude": 1.5}]
    }

Numbers are JSON numbers or strings.  A string holds an exact rational,
either as a decimal (``"0.125"``) or as ``"p/q"``; :class:`Fraction` values
are written that way.  Floats are written with Python's shortest repr, so a
decimal input is read back bit-exactly.  With ``exact=True`` every number is
read as a :class:`Fraction`.

A profile document describes a brick-wall profile::

    {"symmetric": true, "rows": [{"width": 1, "left": "-1/2"}, ...]}
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .model import Block, InvalidGeometryError, PointWeight, Stack, check_supported

FORMAT_VERSION = 1


class DocumentError(ValueError):
    """A document that cannot be parsed; the message names the location."""


def _is_terminating(q: Fraction) -> bool:
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def format_number(v) -> Any:
    """JSON value for a coordinate or magnitude."""
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return v.numerator
        if _is_terminating(v):
            digits = 0
            d = v.denominator
            while d > 1:
                d //= 2 if d % 2 == 0 else 5
                digits += 1
            scaled = abs(v) * 10**digits
            text = str(scaled.numerator).rjust(digits + 1, "0")
            sign = "-" if v < 0 else ""
            out = f"{sign}{text[:-digits]}.{text[-digits:]}".rstrip("0").rstrip(".")
            return out
        return f"{v.numerator}/{v.denominator}"
    v = float(v)
    if v != v or v in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite number {v}")
    return v


def _number(value, where: str, exact: bool):
    if isinstance(value, bool):
        raise DocumentError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise DocumentError(f"{where}: {value!r} is not a number") from None
    if isinstance(value, int):
        return Fraction(value) if exact else value
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise DocumentError(f"{where}: non-finite number")
        return Fraction(repr(value)) if exact else value
    raise DocumentError(f"{where}: expected a number, got {type(value).__name__}")


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise DocumentError(f"{where}: expected an integer, got {value!r}")
    return value


def stack_to_dict(stack: Stack) -> dict:
    doc = {"format": FORMAT_VERSION}
    if stack.name:
        doc["name"] = stack.name
    doc["blocks"] = [{"x": format_number(b.x), "level": int(b.level)} for b in stack.blocks]
    doc["point_weights"] = [
        {
            "block": int(w.block),
            "position": format_number(w.position),
            "magnitude": format_number(w.magnitude),
        }
        for w in stack.weights
    ]
    return doc


def _compact(doc: dict) -> str:
    """JSON with one list item per line."""
    lines = ["{"]
    items = list(doc.items())
    for n, (key, value) in enumerate(items):
        tail = "," if n + 1 < len(items) else ""
        if isinstance(value, list) and value:
            lines.append(f" {json.dumps(key)}: [")
            for m, item in enumerate(value):
                sep = "," if m + 1 < len(value) else ""
                lines.append(f"  {json.dumps(item)}{sep}")
            lines.append(f" ]{tail}")
        else:
            lines.append(f" {json.dumps(key)}: {json.dumps(value)}{tail}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps(stack: Stack) -> str:
    """Serialise ``stack``; the output is deterministic."""
    return _compact(stack_to_dict(stack))


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def stack_from_dict(doc, exact: bool = False, check: bool = True) -> Stack:
    if not isinstance(doc, dict):
        raise DocumentError("top level: expected an object")
    blocks_doc = doc.get("blocks")
    if not isinstance(blocks_doc, list):
        raise DocumentError("blocks: missing or not a list")
    blocks = []
    for i, b in enumerate(blocks_doc):
        where = f"blocks[{i}]"
        if not isinstance(b, dict) or "x" not in b or "level" not in b:
            raise DocumentError(f"{where}: expected an object with x and level")
        level = _integer(b["level"], where + ".level")
        if level < 0:
            raise DocumentError(f"{where}.level: negative level")
        blocks.append(Block(_number(b["x"], where + ".x", exact), level))
    weights = []
    for i, w in enumerate(doc.get("point_weights", []) or []):
        where = f"point_weights[{i}]"
        if not isinstance(w, dict) or not {"block", "position", "magnitude"} <= set(w):
            raise DocumentError(f"{where}: expected an object with block, position and magnitude")
        host = _integer(w["block"], where + ".block")
        if not 0 <= host < len(blocks):
            raise DocumentError(f"{where}.block: no block {host}")
        pos = _number(w["position"], where + ".position", exact)
        mag = _number(w["magnitude"], where + ".magnitude", exact)
        if not mag > 0:
            raise DocumentError(f"{where}.magnitude: must be positive")
        if not blocks[host].x <= pos <= blocks[host].x + 1:
            raise DocumentError(f"{where}.position: not on block {host}")
        weights.append(PointWeight(host, pos, mag))
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise DocumentError("name: expected a string")
    stack = Stack(blocks, weights, name)
    if check:
        try:
            check_supported(stack)
        except InvalidGeometryError as exc:
            raise DocumentError(f"geometry: {exc}") from None
    return stack


def loads(text: str, exact: bool = False, check: bool = True) -> Stack:
    """Parse a stack document.  Raises :class:`DocumentError`."""
    return stack_from_dict(_load_json(text), exact=exact, check=check)


def read_stack(path, exact: bool = False, check: bool = True) -> Stack:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), exact=exact, check=check)


def write_stack(stack: Stack, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(stack))


# -- brick-wall profiles ---------------------------------------------------------------


def profile_dumps(profile) -> str:
    doc = {
        "format": FORMAT_VERSION,
        "symmetric": bool(profile.symmetric),
        "rows": [
            {"width": int(w), "left": format_number(Fraction(a))}
            for a, w in zip(profile.lefts, profile.widths)
        ],
    }
    return _compact(doc)


def profile_loads(text: str):
    from .search.brickwall import BrickWallProfile, ProfileError

    doc = _load_json(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("rows"), list):
        raise DocumentError("rows: missing or not a list")
    lefts, widths = [], []
    for i, row in enumerate(doc["rows"]):
        where = f"rows[{i}]"
        if not isinstance(row, dict) or not {"width", "left"} <= set(row):
            raise DocumentError(f"{where}: expected an object with width and left")
        widths.append(_integer(row["width"], where + ".width"))
        lefts.append(Fraction(_number(row["left"], where + ".left", True)))
    try:
        return BrickWallProfile(tuple(lefts), tuple(widths), bool(doc.get("symmetric", False)))
    except ProfileError as exc:
        raise DocumentError(f"profile: {exc}") from None


def is_profile_document(text: str) -> bool:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        return False
    return isinstance(doc, dict) and "rows" in doc
