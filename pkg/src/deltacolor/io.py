"""File formats: edge-list text files, palette JSON, report JSON helpers.

Edge-list format: one ``u v`` pair per line, 0-based decimal IDs, ``#``
starts a comment, and an optional leading header ``n <count>`` declares
the vertex count (needed for isolated vertices).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .graph import Graph, build_graph


def read_edge_list(path: str | Path) -> Graph:
    declared_n: int | None = None
    pairs: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "n":
                if declared_n is not None or pairs:
                    raise ValidationError(f"{path}:{lineno}: header must come first")
                if len(parts) != 2:
                    raise ValidationError(f"{path}:{lineno}: malformed header {line!r}")
                declared_n = int(parts[1])
                continue
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: non-integer vertex ID in {line!r}") from exc
            pairs.append((u, v))
    if declared_n is None and not pairs:
        raise ValidationError(f"{path}: empty edge list without an 'n <count>' header")
    return build_graph(pairs, n=declared_n)


def write_edge_list(graph: Graph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n {graph.n}\n")
        for u, v in graph.edges():
            fh.write(f"{u} {v}\n")


def canonical_palettes(graph: Graph) -> list[range]:
    """Every vertex gets the palette {1, ..., max_degree + 1}."""
    return [range(1, graph.max_degree + 2)] * graph.n


def read_palettes(path: str | Path, n: int) -> list[list[int]]:
    """Read a JSON object mapping vertex ID -> list of colors."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: palette file must be a JSON object")
    out: list[list[int]] = [[] for _ in range(n)]
    seen = [False] * n
    for key, colors in data.items():
        try:
            v = int(key)
        except ValueError as exc:
            raise ValidationError(f"{path}: non-integer vertex key {key!r}") from exc
        if not 0 <= v < n:
            raise ValidationError(f"{path}: vertex {v} out of range 0..{n - 1}")
        if not isinstance(colors, list):
            raise ValidationError(f"{path}: palette of vertex {v} must be a list")
        out[v] = [int(c) for c in colors]
        seen[v] = True
    missing = [i for i, s in enumerate(seen) if not s]
    if missing:
        raise ValidationError(f"{path}: no palette for vertices {missing[:5]}{'...' if len(missing) > 5 else ''}")
    return out


def load_palettes(spec: str, graph: Graph) -> Sequence[Sequence[int]]:
    """Resolve a palette flag: the literal 'canonical' or a JSON path."""
    if spec == "canonical":
        return canonical_palettes(graph)
    return read_palettes(spec, graph.n)


def json_ready(obj):
    """Recursively convert numpy scalars/arrays so json.dumps accepts them."""
    if isinstance(obj, dict):
        return {k: json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dump_json(obj, path: str | Path) -> None:
    """Write deterministic, byte-stable JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(json_ready(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
