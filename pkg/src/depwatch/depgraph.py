"""Dependency snapshots and the directed dependency graph.

Edges point dependent -> dependency ("A depends on B" is A -> B). The
propagation code decides separately in which direction scores flow.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass
from typing import Iterator

from .activity import RepoRef
from .errors import (
    FormatVersionError,
    SnapshotParseError,
    SnapshotWarning,
    UnknownNodeError,
    ValidationError,
)

SNAPSHOT_FORMAT_VERSION = 1

_ECOSYSTEM_RE = re.compile(r"^[a-z][a-z0-9_-]*$")
_DEFAULT_ECOSYSTEMS = frozenset(
    {"npm", "pypi", "maven", "cargo", "go", "rubygems", "nuget", "composer", "synth"}
)
_registered_ecosystems: set[str] = set(_DEFAULT_ECOSYSTEMS)


def register_ecosystem(tag: str) -> None:
    """Add a package-manager tag to the set LibraryId accepts."""
    if not _ECOSYSTEM_RE.match(tag):
        raise ValidationError(f"invalid ecosystem tag {tag!r}")
    _registered_ecosystems.add(tag)


def registered_ecosystems() -> frozenset[str]:
    return frozenset(_registered_ecosystems)


@dataclass(frozen=True)
class LibraryId:
    """A library coordinate: ``ecosystem:name[@version]``.

    Names may start with "@" (npm scopes); any later "@" would break the
    round-trip through the string form and is rejected.
    """

    ecosystem: str
    name: str
    version: str | None = None

    def __post_init__(self):
        if self.ecosystem not in _registered_ecosystems:
            raise ValidationError(f"unregistered ecosystem tag {self.ecosystem!r}")
        if not self.name:
            raise ValidationError("library name must be nonempty")
        if "@" in self.name[1:]:
            raise ValidationError(f"library name {self.name!r} contains '@' past position 0")
        if self.version is not None and (not self.version or "@" in self.version):
            raise ValidationError(f"invalid version {self.version!r}")

    def __str__(self) -> str:
        if self.version is None:
            return f"{self.ecosystem}:{self.name}"
        return f"{self.ecosystem}:{self.name}@{self.version}"

    @property
    def sort_key(self) -> tuple[str, str, str]:
        return (self.ecosystem, self.name, self.version or "")

    @classmethod
    def parse(cls, text: str) -> "LibraryId":
        """Inverse of ``str()``; raises ValidationError on malformed ids."""
        ecosystem, sep, rest = text.partition(":")
        if not sep or not rest:
            raise ValidationError(f"malformed library id {text!r} (expected ecosystem:name[@version])")
        at = rest.find("@", 1)  # "@" at position 0 is an npm scope, not a separator
        if at == -1:
            return cls(ecosystem, rest)
        return cls(ecosystem, rest[:at], rest[at + 1 :])


@dataclass(frozen=True)
class LibraryRecord:
    """One declared library in a snapshot."""

    id: LibraryId
    repo: RepoRef | None
    direct_deps: tuple[LibraryId, ...]


@dataclass(frozen=True)
class DependencySnapshot:
    """Validated snapshot of an application's libraries and dependency links."""

    format_version: int
    ecosystem: str
    libraries: tuple[LibraryRecord, ...]
    roots: tuple[LibraryId, ...]

    def record(self, node: LibraryId) -> LibraryRecord:
        for rec in self.libraries:
            if rec.id == node:
                return rec
        raise UnknownNodeError(f"{node} not declared in snapshot")


class DependencyGraph:
    """Directed graph over LibraryIds; immutable after construction."""

    def __init__(self, nodes: Iterator[LibraryId] | list[LibraryId], edges: list[tuple[LibraryId, LibraryId]]):
        self._nodes = tuple(sorted(set(nodes), key=lambda n: n.sort_key))
        node_set = set(self._nodes)
        succ: dict[LibraryId, set[LibraryId]] = {n: set() for n in self._nodes}
        pred: dict[LibraryId, set[LibraryId]] = {n: set() for n in self._nodes}
        for a, b in edges:
            if a not in node_set or b not in node_set:
                raise ValidationError(f"edge endpoint not a node: {a} -> {b}")
            if a == b:
                raise ValidationError(f"self-loop edge {a} -> {b} is not allowed")
            succ[a].add(b)
            pred[b].add(a)
        self._succ = {n: tuple(sorted(succ[n], key=lambda m: m.sort_key)) for n in self._nodes}
        self._pred = {n: tuple(sorted(pred[n], key=lambda m: m.sort_key)) for n in self._nodes}

    @property
    def nodes(self) -> tuple[LibraryId, ...]:
        return self._nodes

    def __contains__(self, node: LibraryId) -> bool:
        return node in self._succ

    def __len__(self) -> int:
        return len(self._nodes)

    def successors(self, node: LibraryId) -> tuple[LibraryId, ...]:
        self._require(node)
        return self._succ[node]

    def predecessors(self, node: LibraryId) -> tuple[LibraryId, ...]:
        self._require(node)
        return self._pred[node]

    def edges(self) -> list[tuple[LibraryId, LibraryId]]:
        return [(a, b) for a in self._nodes for b in self._succ[a]]

    def n_edges(self) -> int:
        return sum(len(s) for s in self._succ.values())

    def reversed(self) -> "DependencyGraph":
        return DependencyGraph(list(self._nodes), [(b, a) for a, b in self.edges()])

    def subgraph(self, keep: set[LibraryId]) -> "DependencyGraph":
        nodes = [n for n in self._nodes if n in keep]
        edges = [(a, b) for a, b in self.edges() if a in keep and b in keep]
        return DependencyGraph(nodes, edges)

    def _require(self, node: LibraryId) -> None:
        if node not in self._succ:
            raise UnknownNodeError(f"{node} is not a node of this graph")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DependencyGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._succ == other._succ


def parse_snapshot(data: bytes) -> DependencySnapshot:
    """Parse and validate snapshot file content (UTF-8 JSON, format version 1).

    Unknown keys are ignored with a SnapshotWarning. Structural problems
    raise SnapshotParseError (with position), reference problems raise
    ValidationError, and an unsupported version raises FormatVersionError.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SnapshotParseError(f"snapshot is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SnapshotParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    if not isinstance(doc, dict):
        raise SnapshotParseError("snapshot top level must be an object")

    known = {"format_version", "ecosystem", "libraries", "roots"}
    for key in sorted(set(doc) - known):
        warnings.warn(f"ignoring unknown snapshot key {key!r}", SnapshotWarning, stacklevel=2)

    version = doc.get("format_version")
    if not isinstance(version, int) or isinstance(version, bool):
        raise SnapshotParseError("format_version must be an integer")
    if version != SNAPSHOT_FORMAT_VERSION:
        raise FormatVersionError(
            f"unsupported snapshot format_version {version} (supported: {SNAPSHOT_FORMAT_VERSION})"
        )
    ecosystem = doc.get("ecosystem")
    if not isinstance(ecosystem, str) or not ecosystem:
        raise SnapshotParseError("ecosystem must be a nonempty string")

    raw_libraries = doc.get("libraries")
    if not isinstance(raw_libraries, list):
        raise SnapshotParseError("libraries must be an array")
    records = []
    for i, entry in enumerate(raw_libraries):
        if not isinstance(entry, dict):
            raise SnapshotParseError(f"libraries[{i}] must be an object")
        known_lib = {"id", "repo", "deps"}
        for key in sorted(set(entry) - known_lib):
            warnings.warn(
                f"ignoring unknown key {key!r} in libraries[{i}]", SnapshotWarning, stacklevel=2
            )
        if "id" not in entry or not isinstance(entry["id"], str):
            raise SnapshotParseError(f"libraries[{i}] needs a string 'id'")
        lib_id = LibraryId.parse(entry["id"])
        repo = None
        if entry.get("repo") is not None:
            raw_repo = entry["repo"]
            if not isinstance(raw_repo, dict) or set(raw_repo) - {"host", "owner", "name"}:
                raise SnapshotParseError(f"libraries[{i}].repo must be an object with host/owner/name")
            try:
                repo = RepoRef(**raw_repo)
            except (TypeError, ValidationError) as exc:
                raise SnapshotParseError(f"libraries[{i}].repo invalid: {exc}") from exc
        raw_deps = entry.get("deps", [])
        if not isinstance(raw_deps, list) or not all(isinstance(d, str) for d in raw_deps):
            raise SnapshotParseError(f"libraries[{i}].deps must be an array of id strings")
        deps = tuple(LibraryId.parse(d) for d in raw_deps)
        records.append(LibraryRecord(id=lib_id, repo=repo, direct_deps=deps))

    raw_roots = doc.get("roots")
    if not isinstance(raw_roots, list) or not all(isinstance(r, str) for r in raw_roots):
        raise SnapshotParseError("roots must be an array of id strings")
    roots = tuple(LibraryId.parse(r) for r in raw_roots)

    declared = {rec.id for rec in records}
    if len(declared) != len(records):
        seen: set[LibraryId] = set()
        for rec in records:
            if rec.id in seen:
                raise ValidationError(f"duplicate library id {rec.id}")
            seen.add(rec.id)
    for rec in records:
        for dep in rec.direct_deps:
            if dep not in declared:
                raise ValidationError(f"{rec.id} depends on undeclared library {dep}")
    for root in roots:
        if root not in declared:
            raise ValidationError(f"root {root} is not a declared library")

    return DependencySnapshot(
        format_version=version,
        ecosystem=ecosystem,
        libraries=tuple(records),
        roots=roots,
    )


def serialize_snapshot(snapshot: DependencySnapshot) -> bytes:
    """Write a snapshot back to the file format (parse . serialize = identity)."""
    doc = {
        "format_version": snapshot.format_version,
        "ecosystem": snapshot.ecosystem,
        "libraries": [
            {
                "id": str(rec.id),
                **(
                    {"repo": {"host": rec.repo.host, "owner": rec.repo.owner, "name": rec.repo.name}}
                    if rec.repo
                    else {}
                ),
                "deps": [str(d) for d in rec.direct_deps],
            }
            for rec in snapshot.libraries
        ],
        "roots": [str(r) for r in snapshot.roots],
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def build_graph(snapshot: DependencySnapshot) -> tuple[DependencyGraph, list[str]]:
    """Graph with one node per library and deduplicated dependent->dependency edges.

    Self-dependencies carry no maintenance signal; they are dropped, and each
    drop is reported in the returned warning list.
    """
    warnings_out: list[str] = []
    edges: set[tuple[LibraryId, LibraryId]] = set()
    for rec in snapshot.libraries:
        for dep in rec.direct_deps:
            if dep == rec.id:
                warnings_out.append(f"dropped self-dependency of {rec.id}")
                continue
            edges.add((rec.id, dep))
    graph = DependencyGraph([rec.id for rec in snapshot.libraries], sorted(edges, key=lambda e: (e[0].sort_key, e[1].sort_key)))
    return graph, warnings_out


def transitive_dependencies(graph: DependencyGraph, node: LibraryId) -> set[LibraryId]:
    """Every library reachable from ``node`` via one or more dependency links.

    ``node`` itself appears only when it sits on a dependency cycle.
    """
    if node not in graph:
        raise UnknownNodeError(f"{node} is not a node of this graph")
    seen: set[LibraryId] = set()
    stack = list(graph.successors(node))
    while stack:
        cur = stack.pop()
        if cur in seen:
            continue
        seen.add(cur)
        stack.extend(m for m in graph.successors(cur) if m not in seen)
    return seen


def strongly_connected_components(graph: DependencyGraph) -> list[frozenset[LibraryId]]:
    """Tarjan SCCs, iteratively, ordered by each component's smallest member."""
    index: dict[LibraryId, int] = {}
    lowlink: dict[LibraryId, int] = {}
    on_stack: set[LibraryId] = set()
    stack: list[LibraryId] = []
    components: list[frozenset[LibraryId]] = []
    counter = 0

    for start in graph.nodes:
        if start in index:
            continue
        # explicit DFS stack of (node, iterator position into successors)
        work: list[tuple[LibraryId, int]] = [(start, 0)]
        while work:
            node, pos = work[-1]
            if pos == 0:
                index[node] = lowlink[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            succ = graph.successors(node)
            advanced = False
            while pos < len(succ):
                nxt = succ[pos]
                pos += 1
                if nxt not in index:
                    work[-1] = (node, pos)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if nxt in on_stack:
                    lowlink[node] = min(lowlink[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if lowlink[node] == index[node]:
                comp = set()
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.add(member)
                    if member == node:
                        break
                components.append(frozenset(comp))
            if work:
                parent, _ = work[-1]
                lowlink[parent] = min(lowlink[parent], lowlink[node])

    components.sort(key=lambda comp: min(m.sort_key for m in comp))
    return components
