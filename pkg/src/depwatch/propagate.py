"""Transitive-impact propagation over the dependency graph.

PageRank runs by power iteration with L1 stopping. Mass leaving a dangling
node (no outgoing edges) follows the teleport distribution, which is uniform
for plain PageRank and proportional to the supplied weights for personalized
runs; that keeps total mass at exactly 1 every iteration in both variants.

Risk scoring couples maintenance labels to personalized PageRank: teleport
weight is w(label) per node, edges are reversed so that a poorly maintained
dependency pushes mass toward the applications that (transitively) depend on
it. The score ranks libraries; it never decides the binary verdict, which is
the all-or-nothing transitive rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .depgraph import DependencyGraph, LibraryId, transitive_dependencies
from .errors import ValidationError
from .features import MaintenanceLabel


@dataclass(frozen=True)
class PropagationConfig:
    damping: float = 0.85
    tolerance: float = 1e-9
    max_iterations: int = 200
    direction: str = "as-is"  # or "reversed"

    def __post_init__(self):
        if not (0.0 < self.damping < 1.0):
            raise ValidationError("damping must lie strictly between 0 and 1")
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be positive")
        if self.direction not in ("as-is", "reversed"):
            raise ValidationError(f"unknown direction {self.direction!r}")


DEFAULT_PROPAGATION = PropagationConfig()

# Per-label teleport weight for risk scoring; Active carries no risk mass.
DEFAULT_RISK_WEIGHTS: dict[MaintenanceLabel, float] = {
    MaintenanceLabel.ACTIVE: 0.0,
    MaintenanceLabel.FEATURE_COMPLETE: 0.25,
    MaintenanceLabel.DORMANT: 0.6,
    MaintenanceLabel.INACTIVE: 1.0,
}


@dataclass(frozen=True)
class PropagationResult:
    scores: dict[LibraryId, float]
    converged: bool
    iterations: int
    history: tuple[np.ndarray, ...] = ()

    def __getitem__(self, node: LibraryId) -> float:
        return self.scores[node]


def _edge_arrays(graph: DependencyGraph, reversed_: bool):
    nodes = graph.nodes
    index = {n: i for i, n in enumerate(nodes)}
    src, dst = [], []
    for a, b in graph.edges():
        if reversed_:
            a, b = b, a
        src.append(index[a])
        dst.append(index[b])
    out_deg = np.zeros(len(nodes), dtype=float)
    for s in src:
        out_deg[s] += 1
    return nodes, np.array(src, dtype=int), np.array(dst, dtype=int), out_deg


def _power_iteration(
    graph: DependencyGraph,
    config: PropagationConfig,
    teleport: np.ndarray,
    collect_history: bool,
) -> PropagationResult:
    nodes, src, dst, out_deg = _edge_arrays(graph, reversed_=config.direction == "reversed")
    n = len(nodes)
    d = config.damping
    p = np.full(n, 1.0 / n)
    dangling = out_deg == 0
    history: list[np.ndarray] = [p.copy()] if collect_history else []
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        nxt = ((1.0 - d) + d * p[dangling].sum()) * teleport
        if len(src):
            np.add.at(nxt, dst, d * p[src] / out_deg[src])
        delta = np.abs(nxt - p).sum()
        p = nxt
        if collect_history:
            history.append(p.copy())
        if delta <= config.tolerance:
            converged = True
            break
    return PropagationResult(
        scores={node: float(p[i]) for i, node in enumerate(nodes)},
        converged=converged,
        iterations=iterations,
        history=tuple(history),
    )


def pagerank(
    graph: DependencyGraph,
    config: PropagationConfig = DEFAULT_PROPAGATION,
    *,
    collect_history: bool = False,
) -> PropagationResult:
    """Uniform-teleport PageRank; scores are positive and sum to 1.

    A non-converged result (max_iterations hit) is still returned, flagged via
    ``converged=False``.
    """
    if len(graph) == 0:
        raise ValidationError("pagerank needs a nonempty graph")
    teleport = np.full(len(graph), 1.0 / len(graph))
    return _power_iteration(graph, config, teleport, collect_history)


def personalized_pagerank(
    graph: DependencyGraph,
    config: PropagationConfig,
    weights: dict[LibraryId, float],
    *,
    collect_history: bool = False,
) -> PropagationResult:
    """PageRank with teleport proportional to per-node weights (>= 0, not all 0)."""
    if len(graph) == 0:
        raise ValidationError("pagerank needs a nonempty graph")
    w = np.array([float(weights.get(node, 0.0)) for node in graph.nodes])
    if np.any(w < 0):
        raise ValidationError("teleport weights must be nonnegative")
    total = w.sum()
    if total == 0:
        raise ValidationError("teleport weights must not all be zero")
    return _power_iteration(graph, config, w / total, collect_history)


class CentralityKind(Enum):
    DEGREE = "degree"
    IN_DEGREE = "in_degree"
    OUT_DEGREE = "out_degree"
    EIGENVECTOR = "eigenvector"


def centrality(
    graph: DependencyGraph,
    kind: CentralityKind | str,
    config: PropagationConfig = DEFAULT_PROPAGATION,
) -> PropagationResult:
    """Degree-family centralities normalized by n-1; eigenvector via A^T iteration.

    Degree counts in+out links together (documented convention); the in/out
    variants exist separately. Eigenvector centrality measures incoming
    influence: power iteration on the transposed adjacency with L2
    normalization, nonnegative entries, unit L2 norm. Graphs whose iteration
    dies (no edges) or cycles without settling come back converged=False.
    """
    kind = CentralityKind(kind)
    if len(graph) == 0:
        raise ValidationError("centrality needs a nonempty graph")
    nodes = graph.nodes
    n = len(nodes)
    if kind is not CentralityKind.EIGENVECTOR:
        denom = float(n - 1) if n > 1 else 1.0
        def raw(node: LibraryId) -> float:
            out_d = len(graph.successors(node))
            in_d = len(graph.predecessors(node))
            if kind is CentralityKind.DEGREE:
                return in_d + out_d
            if kind is CentralityKind.IN_DEGREE:
                return in_d
            return out_d
        scores = {node: (raw(node) / denom if n > 1 else 0.0) for node in nodes}
        return PropagationResult(scores=scores, converged=True, iterations=0)

    index = {node: i for i, node in enumerate(nodes)}
    at = np.zeros((n, n))
    for a, b in graph.edges():
        at[index[b], index[a]] = 1.0  # transpose: score flows along incoming edges
    x = np.full(n, 1.0 / np.sqrt(n))
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        nxt = at @ x
        norm = np.linalg.norm(nxt)
        if norm == 0:
            return PropagationResult(
                scores={node: 0.0 for node in nodes}, converged=False, iterations=iterations
            )
        nxt = nxt / norm
        if np.abs(nxt - x).sum() <= config.tolerance:
            x = nxt
            converged = True
            break
        x = nxt
    x = np.abs(x)  # dominant eigenvector of a nonnegative matrix is nonnegative
    x = x / np.linalg.norm(x)
    return PropagationResult(
        scores={node: float(x[index[node]]) for node in nodes},
        converged=converged,
        iterations=iterations,
    )


class Verdict(Enum):
    SUSPICIOUS = "Suspicious"
    UNSUSPICIOUS = "Unsuspicious"


@dataclass(frozen=True)
class SuspicionVerdict:
    node: LibraryId
    self_label: MaintenanceLabel
    verdict: Verdict
    culprits: tuple[tuple[LibraryId, MaintenanceLabel], ...]
    risk_score: float


def risk_scores(
    graph: DependencyGraph,
    labels: dict[LibraryId, MaintenanceLabel],
    config: PropagationConfig = DEFAULT_PROPAGATION,
    weights: dict[MaintenanceLabel, float] = DEFAULT_RISK_WEIGHTS,
) -> dict[LibraryId, float]:
    """Activity-weighted personalized PageRank on reversed edges.

    An all-Active graph carries no risk mass anywhere; every score is 0.
    """
    node_weights = {node: weights[labels[node]] for node in graph.nodes}
    if all(w == 0.0 for w in node_weights.values()):
        return {node: 0.0 for node in graph.nodes}
    reversed_config = PropagationConfig(
        damping=config.damping,
        tolerance=config.tolerance,
        max_iterations=config.max_iterations,
        direction="reversed",
    )
    return personalized_pagerank(graph, reversed_config, node_weights).scores


def aggregate_verdicts(
    graph: DependencyGraph,
    labels: dict[LibraryId, MaintenanceLabel],
    risk: dict[LibraryId, float],
    *,
    feature_complete_is_negative: bool = True,
) -> dict[LibraryId, SuspicionVerdict]:
    """The all-or-nothing rule: a node is Unsuspicious only when it is Active
    and every transitive dependency is Active too.

    Culprits list the negatively-labeled transitive dependencies, highest risk
    first (ties by id), each tagged with its own label so reporting can treat
    FeatureComplete more softly. ``feature_complete_is_negative=False`` stops
    FeatureComplete dependencies from counting as culprits at all.
    """
    missing = [str(n) for n in graph.nodes if n not in labels]
    if missing:
        raise ValidationError(f"nodes lack labels: {', '.join(sorted(missing))}")
    negative = {MaintenanceLabel.DORMANT, MaintenanceLabel.INACTIVE}
    if feature_complete_is_negative:
        negative.add(MaintenanceLabel.FEATURE_COMPLETE)

    verdicts: dict[LibraryId, SuspicionVerdict] = {}
    for node in graph.nodes:
        reachable = transitive_dependencies(graph, node)
        culprits = sorted(
            ((m, labels[m]) for m in reachable if labels[m] in negative),
            key=lambda pair: (-risk.get(pair[0], 0.0), pair[0].sort_key),
        )
        suspicious = labels[node] is not MaintenanceLabel.ACTIVE or bool(culprits)
        verdicts[node] = SuspicionVerdict(
            node=node,
            self_label=labels[node],
            verdict=Verdict.SUSPICIOUS if suspicious else Verdict.UNSUSPICIOUS,
            culprits=tuple(culprits),
            risk_score=float(risk.get(node, 0.0)),
        )
    return verdicts
