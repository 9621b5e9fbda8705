"""
Graph file formats
==================
Matrix format:
    n
    a_11, a_12, ..., a_1n
    ...
    a_n1, ..., a_nn

Edge-list format (0-based indices; n optional, otherwise max index + 1):
    edges [n]
    i j w
    ...

Blank lines and text after '#' are ignored. Format is picked from the
`edges` header or the `.edges` extension unless forced.
"""

from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from nlconsensus.core.exceptions import GraphParseError
from nlconsensus.core.logger import logger
from nlconsensus.models.graph_models import WeightedDigraph

GRAPH_FORMATS = ("auto", "matrix", "edges")


def _content_lines(text: str) -> List[Tuple[int, str]]:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            lines.append((lineno, line))
    return lines


def _parse_number(token: str, lineno: int, column: int, source: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise GraphParseError(f"not a number: {token.strip()!r}", lineno, column, source)
    if not np.isfinite(value):
        raise GraphParseError(f"non-finite value: {token.strip()!r}", lineno, column, source)
    return value


def _split_with_columns(line: str, sep: Optional[str]) -> List[Tuple[str, int]]:
    """Tokens with their 1-based starting column."""
    tokens = []
    if sep is None:
        pos = 0
        for token in line.split():
            pos = line.index(token, pos)
            tokens.append((token, pos + 1))
            pos += len(token)
        return tokens
    pos = 0
    for token in line.split(sep):
        stripped = token.lstrip()
        tokens.append((token, pos + 1 + len(token) - len(stripped)))
        pos += len(token) + 1
    return tokens


class GraphReader:

    def parse(self, text: str, fmt: str = "auto", source: str = "<graph>") -> WeightedDigraph:
        if fmt not in GRAPH_FORMATS:
            raise ValueError(f"unknown graph format {fmt!r}")
        lines = _content_lines(text)
        if not lines:
            raise GraphParseError("empty graph file", 1, 1, source)
        if fmt == "auto":
            fmt = "edges" if lines[0][1].split()[0].lower() == "edges" else "matrix"
        parser = self._parse_edges if fmt == "edges" else self._parse_matrix
        rows = parser(lines, source)
        try:
            g = WeightedDigraph(weights=rows)
        except ValidationError as e:
            raise GraphParseError(f"invalid graph: {e.errors()[0]['msg']}", lines[0][0], 1, source) from e
        logger.info(f"Loaded graph from {source}: n={g.n}, edges={g.edge_count()}")
        return g

    def read(self, path: str, fmt: str = "auto") -> WeightedDigraph:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as e:
            raise GraphParseError(f"cannot read graph file: {e.strerror}", 0, 0, str(path)) from e
        if fmt == "auto" and p.suffix.lower() == ".edges":
            fmt = "edges"
        return self.parse(text, fmt=fmt, source=str(path))

    def _parse_matrix(self, lines, source) -> np.ndarray:
        first_no, first = lines[0]
        header = first.strip()
        try:
            n = int(header)
        except ValueError:
            raise GraphParseError(f"expected agent count, got {header!r}", first_no, 1, source)
        if n < 1:
            raise GraphParseError("agent count must be positive", first_no, 1, source)
        body = lines[1:]
        if len(body) != n:
            lineno = body[-1][0] + 1 if body else first_no + 1
            raise GraphParseError(f"expected {n} matrix rows, found {len(body)}", lineno, 1, source)
        rows = []
        for lineno, line in body:
            tokens = _split_with_columns(line, ",")
            if len(tokens) != n:
                raise GraphParseError(f"expected {n} comma-separated entries, found {len(tokens)}", lineno, 1, source)
            values = [_parse_number(tok, lineno, col, source) for tok, col in tokens]
            for k, (value, (_, col)) in enumerate(zip(values, tokens)):
                if value < 0:
                    raise GraphParseError(f"negative weight {value:g}", lineno, col, source)
                if k == len(rows) and value != 0:
                    raise GraphParseError(f"self-loop weight {value:g} on the diagonal", lineno, col, source)
            rows.append(values)
        return np.array(rows)

    def _parse_edges(self, lines, source) -> np.ndarray:
        header_no, header = lines[0]
        parts = header.split()
        declared_n = None
        if len(parts) > 2:
            raise GraphParseError("edges header takes at most one argument", header_no, 1, source)
        if len(parts) == 2:
            try:
                declared_n = int(parts[1])
            except ValueError:
                raise GraphParseError(f"bad agent count {parts[1]!r}", header_no, header.index(parts[1]) + 1, source)
            if declared_n < 1:
                raise GraphParseError("agent count must be positive", header_no, header.index(parts[1]) + 1, source)
        edges = []
        for lineno, line in lines[1:]:
            tokens = _split_with_columns(line, None)
            if len(tokens) != 3:
                raise GraphParseError(f"expected 'i j w', found {len(tokens)} fields", lineno, 1, source)
            (ti, ci), (tj, cj), (tw, cw) = tokens
            idx = []
            for tok, col in ((ti, ci), (tj, cj)):
                if not (tok.isascii() and tok.isdigit()):
                    raise GraphParseError(f"node index must be a nonnegative integer, got {tok!r}", lineno, col, source)
                idx.append(int(tok))
            edges.append((idx[0], idx[1], _parse_number(tw, lineno, cw, source), lineno))

        n = declared_n if declared_n is not None else 1 + max((max(i, j) for i, j, _, _ in edges), default=0)
        a = np.zeros((n, n))
        for i, j, w, lineno in edges:
            if i >= n or j >= n:
                raise GraphParseError(f"node index out of range for n={n}", lineno, 1, source)
            if i == j:
                raise GraphParseError(f"self-loop on node {i}", lineno, 1, source)
            a[i, j] += w
        return a


class GraphWriter:

    def format(self, g: WeightedDigraph) -> str:
        """Canonical matrix format; repr floats so parsing gives the same matrix back."""
        lines = [str(g.n)]
        for row in g.weights:
            lines.append(", ".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, g: WeightedDigraph, path: str) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(self.format(g), encoding="utf-8")
        logger.info(f"Graph written to {path}")


graph_reader = GraphReader()
graph_writer = GraphWriter()
