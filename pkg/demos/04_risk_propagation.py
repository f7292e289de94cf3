"""Transitive risk: PageRank, centralities, and the all-or-nothing verdict.

A library is unsuspicious only when it and everything it can reach are
Active. The separate risk score (activity-weighted personalized PageRank on
reversed edges) ranks how exposed each library is; it never changes the
binary verdict.
"""

from depwatch.depgraph import DependencyGraph, LibraryId
from depwatch.features import MaintenanceLabel
from depwatch.propagate import (
    PropagationConfig,
    aggregate_verdicts,
    centrality,
    pagerank,
    personalized_pagerank,
    risk_scores,
)

app, web, auth, json_, tls, legacy = (
    LibraryId("npm", n) for n in ("app", "web", "auth", "jsonlib", "tls", "legacy")
)
graph = DependencyGraph(
    [app, web, auth, json_, tls, legacy],
    [
        (app, web), (app, auth),
        (web, json_), (auth, json_), (auth, tls),
        (web, legacy),
    ],
)
labels = {
    app: MaintenanceLabel.ACTIVE,
    web: MaintenanceLabel.ACTIVE,
    auth: MaintenanceLabel.ACTIVE,
    json_: MaintenanceLabel.FEATURE_COMPLETE,
    tls: MaintenanceLabel.ACTIVE,
    legacy: MaintenanceLabel.DORMANT,
}

plain = pagerank(graph)
print("plain PageRank (who the graph leans on):")
for node, score in sorted(plain.scores.items(), key=lambda kv: -kv[1]):
    print(f"  {score:.4f}  {node}")

print("\ncentrality views:")
for kind in ("degree", "in_degree", "out_degree", "eigenvector"):
    scores = centrality(graph, kind).scores
    top = max(scores, key=scores.get)
    print(f"  {kind:12} peaks at {top} ({scores[top]:.3f})")

risk = risk_scores(graph, labels)
print("\nactivity-weighted risk (reversed edges, teleport on poorly maintained nodes):")
for node, score in sorted(risk.items(), key=lambda kv: -kv[1]):
    print(f"  {score:.4f}  {node}  [{labels[node].value}]")

verdicts = aggregate_verdicts(graph, labels, risk)
print("\nverdicts:")
for node in graph.nodes:
    v = verdicts[node]
    culprits = ", ".join(f"{c}({lab.value})" for c, lab in v.culprits) or "-"
    print(f"  {str(node):14} {v.verdict.value:13} culprits: {culprits}")

# the same teleport machinery answers "what does this one bad node endanger?"
focus = personalized_pagerank(
    graph, PropagationConfig(direction="reversed"), {legacy: 1.0}
)
exposed = sorted(focus.scores.items(), key=lambda kv: -kv[1])
print("\nexposure to the dormant 'legacy' library alone:")
for node, score in exposed:
    print(f"  {score:.4f}  {node}")
