"""
Pattern file format
YAML documents describing a pattern graph, parsed through the YAML node tree so
every diagnostic points at a source line:

    vertices: v1 v2 v3 v4
    edges:
      - e1 v1 v2 pi/3
    targets:
      - v1 2pi/3
    faces:            # optional, cyclic edge-id lists
      - e1 e2 e3
    radii:            # optional, one radius per vertex
      - v1 1.2309594173407747

Angles, targets and radii are finite decimals or exact multiples of pi written
`[p]pi[/q]`.
"""

import re
import math
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from src.core.errors import PatternFileError
from src.core.pattern_graph import HALF_PI, Edge, PatternGraph, validate

logger = logging.getLogger(__name__)

SECTIONS = ("vertices", "edges", "targets", "faces", "radii")
REQUIRED_SECTIONS = ("vertices", "edges", "targets")
PI_LITERAL = re.compile(r"^(?P<p>[1-9][0-9]*)?pi(?:/(?P<q>[1-9][0-9]*))?$")
MAX_LITERAL_DENOMINATOR = 12


@dataclass(frozen=True)
class PatternDocument:
    """A parsed pattern file: the graph plus the optional initial radii"""
    graph: PatternGraph
    radii: Optional[np.ndarray] = None
    path: Optional[str] = None


def pi_multiple(p: int, q: int = 1) -> float:
    """p * pi / q, evaluated the same way for parsing and emission"""
    return p * math.pi / q


def parse_number(text: str) -> float:
    """Finite decimal or `[p]pi[/q]` literal"""
    token = text.strip()
    match = PI_LITERAL.match(token)
    if match:
        return pi_multiple(int(match.group("p") or 1), int(match.group("q") or 1))
    try:
        value = float(token)
    except ValueError:
        raise ValueError(f"not a number or pi literal: {token!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {token!r}")
    return value


def format_number(value: float) -> str:
    """Inverse of parse_number: pi literal when exact, repr otherwise"""
    value = float(value)
    if math.isfinite(value) and value > 0:
        for q in range(1, MAX_LITERAL_DENOMINATOR + 1):
            p = round(value * q / math.pi)
            if p >= 1 and pi_multiple(p, q) == value:
                prefix = "" if p == 1 else str(p)
                suffix = "" if q == 1 else f"/{q}"
                return f"{prefix}pi{suffix}"
    return repr(value)


def _line(node: yaml.Node) -> int:
    return node.start_mark.line + 1


class _Parser:
    """Walks one composed YAML document, raising PatternFileError on the first problem"""

    def __init__(self, path: Optional[str]):
        self.path = path

    def fail(self, message: str, node: Optional[yaml.Node] = None) -> PatternFileError:
        return PatternFileError(message, line=_line(node) if node is not None else None, path=self.path)

    def number(self, token: str, node: yaml.Node, what: str) -> float:
        try:
            return parse_number(token)
        except ValueError as e:
            raise self.fail(f"{what}: {e}", node) from None

    def lines(self, key: yaml.Node, value: yaml.Node) -> List[Tuple[List[str], yaml.Node]]:
        """Items of a sequence section as (tokens, node)"""
        if not isinstance(value, yaml.SequenceNode):
            raise self.fail(f"section '{key.value}' must be a list of lines", value)
        items = []
        for item in value.value:
            if not isinstance(item, yaml.ScalarNode):
                raise self.fail(f"section '{key.value}': expected a plain text line", item)
            tokens = item.value.split()
            if not tokens:
                raise self.fail(f"section '{key.value}': empty line", item)
            items.append((tokens, item))
        return items

    def sections(self, root: Optional[yaml.Node]) -> Dict[str, Tuple[yaml.Node, yaml.Node]]:
        if root is None:
            raise self.fail("empty pattern file")
        if not isinstance(root, yaml.MappingNode):
            raise self.fail("pattern file must be a mapping of sections", root)
        found: Dict[str, Tuple[yaml.Node, yaml.Node]] = {}
        for key, value in root.value:
            name = key.value if isinstance(key, yaml.ScalarNode) else None
            if name not in SECTIONS:
                raise self.fail(f"unknown section {name!r}; expected one of {', '.join(SECTIONS)}", key)
            if name in found:
                raise self.fail(f"duplicate section '{name}'", key)
            found[name] = (key, value)
        for name in REQUIRED_SECTIONS:
            if name not in found:
                raise self.fail(f"missing required section '{name}'", root)
        return found

    def vertices(self, key: yaml.Node, value: yaml.Node) -> List[str]:
        if not isinstance(value, yaml.ScalarNode) or not value.value.split():
            raise self.fail("'vertices' must be one line of whitespace-separated ids", value)
        ids = value.value.split()
        seen = set()
        for v in ids:
            if v in seen:
                raise self.fail(f"duplicate vertex id {v!r}", value)
            seen.add(v)
        return ids

    def edges(self, key: yaml.Node, value: yaml.Node, known: set) -> List[Edge]:
        edges: List[Edge] = []
        seen = set()
        for tokens, node in self.lines(key, value):
            if len(tokens) != 4:
                raise self.fail(f"edge line must read 'id u w theta', got {node.value!r}", node)
            eid, u, w, raw = tokens
            if eid in seen:
                raise self.fail(f"duplicate edge id {eid!r}", node)
            seen.add(eid)
            for endpoint in (u, w):
                if endpoint not in known:
                    raise self.fail(f"edge {eid!r}: unknown endpoint {endpoint!r}", node)
            if u == w:
                raise self.fail(f"edge {eid!r}: self-loop at {u!r} is not supported", node)
            theta = self.number(raw, node, f"edge {eid!r} theta")
            if not 0.0 < theta <= HALF_PI:
                raise self.fail(f"edge {eid!r}: theta out of (0, pi/2]: {raw}", node)
            edges.append(Edge(eid, u, w, theta))
        return edges

    def per_vertex(self, key: yaml.Node, value: yaml.Node, vertices: Sequence[str],
                   what: str) -> Tuple[Dict[str, float], Dict[str, yaml.Node]]:
        values: Dict[str, float] = {}
        nodes: Dict[str, yaml.Node] = {}
        for tokens, node in self.lines(key, value):
            if len(tokens) != 2:
                raise self.fail(f"{what} line must read 'vertex value', got {node.value!r}", node)
            v, raw = tokens
            if v not in vertices:
                raise self.fail(f"{what} for unknown vertex {v!r}", node)
            if v in values:
                raise self.fail(f"duplicate {what} for vertex {v!r}", node)
            values[v] = self.number(raw, node, f"{what} of {v!r}")
            nodes[v] = node
        missing = [v for v in vertices if v not in values]
        if missing:
            raise self.fail(f"'{key.value}' has no entry for {', '.join(missing)}", key)
        return values, nodes

    def faces(self, key: yaml.Node, value: yaml.Node, edge_ids: set) -> List[List[str]]:
        cycles = []
        for tokens, node in self.lines(key, value):
            for eid in tokens:
                if eid not in edge_ids:
                    raise self.fail(f"face uses unknown edge {eid!r}", node)
            cycles.append(tokens)
        return cycles

    def parse(self, text: str) -> PatternDocument:
        try:
            root = yaml.compose(text, Loader=yaml.SafeLoader)
        except yaml.MarkedYAMLError as e:
            line = e.problem_mark.line + 1 if e.problem_mark is not None else None
            raise PatternFileError(f"YAML syntax error: {e.problem}", line=line, path=self.path) from None
        except yaml.YAMLError as e:
            raise PatternFileError(f"YAML syntax error: {e}", path=self.path) from None

        found = self.sections(root)
        vertices = self.vertices(*found["vertices"])
        known = set(vertices)
        edges = self.edges(*found["edges"], known)

        target_key, _ = found["targets"]
        targets, target_nodes = self.per_vertex(*found["targets"], vertices, "target")
        for v, t in targets.items():
            if t <= 0.0:
                raise self.fail(f"target of {v!r} must be positive, got {t!r}", target_nodes[v])

        faces = None
        if "faces" in found:
            faces = self.faces(*found["faces"], {e.id for e in edges})

        radii = None
        if "radii" in found:
            values, radius_nodes = self.per_vertex(*found["radii"], vertices, "radius")
            for v, r in values.items():
                if not 0.0 < r < HALF_PI:
                    raise self.fail(f"radius of {v!r} must lie strictly inside (0, pi/2), got {r!r}",
                                    radius_nodes[v])
            radii = np.array([values[v] for v in vertices], dtype=float)

        graph = PatternGraph.build(vertices, edges, targets, faces)
        report = validate(graph)
        if not report.ok:
            raise self.fail("invalid pattern: " + "; ".join(report.violations), target_key)
        for warning in report.warnings:
            logger.warning(f"{self.path or '<pattern>'}: {warning}")
        return PatternDocument(graph=graph, radii=radii, path=self.path)


def parse_pattern(text: str, path: Optional[str] = None) -> PatternDocument:
    """Parse pattern file text into a validated graph (and radii, when present)"""
    return _Parser(path).parse(text)


def load_pattern(path: Union[str, Path]) -> PatternDocument:
    name = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise PatternFileError(f"cannot read pattern file: {e.strerror or e}", path=name) from None
    document = parse_pattern(text, path=name)
    logger.debug(f"Loaded {name}: N={document.graph.n}, M={document.graph.m}")
    return document


def emit_pattern(graph: PatternGraph, radii: Optional[Sequence[float]] = None,
                 comment: Optional[str] = None) -> str:
    """
    Pattern file text for a graph

    Face ids are positional (f1, f2, ...) and are not written.
    """
    document = {
        "vertices": " ".join(graph.vertices),
        "edges": [f"{e.id} {e.u} {e.w} {format_number(e.theta)}" for e in graph.edges],
        "targets": [f"{v} {format_number(t)}" for v, t in zip(graph.vertices, graph.targets)],
    }
    if graph.faces is not None:
        document["faces"] = [" ".join(cycle) for cycle in graph.faces]
    if radii is not None:
        document["radii"] = [f"{v} {format_number(r)}" for v, r in zip(graph.vertices, radii)]
    text = yaml.safe_dump(document, sort_keys=False, default_flow_style=False, width=4096)
    if comment:
        text = "".join(f"# {line}\n" for line in comment.splitlines()) + text
    return text


def write_pattern(path: Union[str, Path], graph: PatternGraph,
                  radii: Optional[Sequence[float]] = None, comment: Optional[str] = None) -> None:
    Path(path).write_text(emit_pattern(graph, radii, comment), encoding="utf-8")
    logger.info(f"Wrote pattern file {path}")
