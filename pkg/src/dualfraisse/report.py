"""Machine-parsable ``key: value`` reports and ordered parallel mapping."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Mapping, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def format_block(fields: Mapping[str, object]) -> str:
    lines = []
    for key in sorted(fields):
        value = fields[key]
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def format_blocks(blocks: Iterable[Mapping[str, object]]) -> str:
    return "\n".join(format_block(b) for b in blocks)


def parse_block(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(": ")
        out[key] = value
    return out


def pmap(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> list[R]:
    """``map`` with results in input order; ``jobs > 1`` uses worker processes."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=chunk))
