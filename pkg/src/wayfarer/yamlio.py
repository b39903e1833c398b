"""Strict, line-tracked YAML loading for fixture and scenario documents.

PyYAML's plain safe_load drops source positions, which makes "unknown field
'rank_' at campus.yaml:12" impossible. This module composes the YAML node
graph instead, keeps each node's line, and layers a consume-and-check schema
reader on top: every field must be claimed or the document is rejected.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .errors import ParseError


class Node:
    """A parsed YAML value plus where it came from."""

    __slots__ = ("value", "line", "path")

    def __init__(self, value, line: int, path: str):
        self.value = value
        self.line = line
        self.path = path

    def error(self, message: str) -> ParseError:
        return ParseError(self.path, self.line, message)


def _convert_scalar(node: yaml.ScalarNode, path: str):
    tag = node.tag.rsplit(":", 1)[-1]
    text = node.value
    try:
        if tag == "int":
            return int(text.replace("_", ""), 0) if text.lower().startswith(("0x", "0o", "0b", "-0x")) else int(text)
        if tag == "float":
            lowered = text.lower().replace("_", "")
            if lowered.endswith(".inf"):
                return float("-inf") if lowered.startswith("-") else float("inf")
            if lowered.endswith(".nan"):
                return float("nan")
            return float(lowered)
        if tag == "bool":
            return text.lower() in ("true", "yes", "on")
        if tag == "null":
            return None
    except ValueError as exc:
        raise ParseError(path, node.start_mark.line + 1, f"bad scalar {text!r}: {exc}") from exc
    return text


def _convert(node: yaml.Node, path: str) -> Node:
    line = node.start_mark.line + 1
    if isinstance(node, yaml.ScalarNode):
        return Node(_convert_scalar(node, path), line, path)
    if isinstance(node, yaml.SequenceNode):
        return Node([_convert(item, path) for item in node.value], line, path)
    if isinstance(node, yaml.MappingNode):
        mapping: dict[str, Node] = {}
        for key_node, value_node in node.value:
            if not isinstance(key_node, yaml.ScalarNode):
                raise ParseError(path, key_node.start_mark.line + 1, "mapping keys must be plain strings")
            key = key_node.value
            if key in mapping:
                raise ParseError(path, key_node.start_mark.line + 1, f"duplicate field {key!r}")
            mapping[key] = _convert(value_node, path)
        return Node(mapping, line, path)
    raise ParseError(path, line, f"unsupported YAML node {node.tag}")


def load_file(path: str | Path) -> Node:
    """Parse one YAML document from `path` into a line-tracked Node tree."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(path), None, f"cannot read file: {exc.strerror or exc}") from exc
    try:
        raw = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ParseError(str(path), line, f"invalid YAML: {getattr(exc, 'problem', exc)}") from exc
    if raw is None:
        raise ParseError(str(path), None, "document is empty")
    return _convert(raw, str(path))


def as_map(node: Node, what: str) -> dict[str, Node]:
    if not isinstance(node.value, dict):
        raise node.error(f"{what} must be a mapping")
    return node.value


def as_list(node: Node, what: str) -> list[Node]:
    if not isinstance(node.value, list):
        raise node.error(f"{what} must be a list")
    return node.value


def as_str(node: Node, what: str) -> str:
    if not isinstance(node.value, str):
        raise node.error(f"{what} must be a string, got {type(node.value).__name__}")
    return node.value


def as_float(node: Node, what: str) -> float:
    if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
        raise node.error(f"{what} must be a number, got {type(node.value).__name__}")
    return float(node.value)


def as_int(node: Node, what: str) -> int:
    if isinstance(node.value, bool) or not isinstance(node.value, int):
        raise node.error(f"{what} must be an integer, got {type(node.value).__name__}")
    return node.value


def as_bool(node: Node, what: str) -> bool:
    if not isinstance(node.value, bool):
        raise node.error(f"{what} must be true/false, got {type(node.value).__name__}")
    return node.value


def as_xy(node: Node, what: str) -> tuple[float, float]:
    items = as_list(node, what)
    if len(items) != 2:
        raise node.error(f"{what} must be a [x, y] pair")
    return (as_float(items[0], f"{what} x"), as_float(items[1], f"{what} y"))


class Fields:
    """Consume-and-check reader over a mapping node.

    Every field must be taken via require/optional; finish() rejects whatever
    is left, naming the first unknown field and its line.
    """

    def __init__(self, node: Node, what: str):
        self.node = node
        self.what = what
        self._pending = dict(as_map(node, what))

    def require(self, key: str) -> Node:
        try:
            return self._pending.pop(key)
        except KeyError:
            raise self.node.error(f"missing required field {key!r} in {self.what}") from None

    def optional(self, key: str) -> Node | None:
        return self._pending.pop(key, None)

    def finish(self) -> None:
        if self._pending:
            key, node = next(iter(self._pending.items()))
            raise node.error(f"unknown field {key!r} in {self.what}")
