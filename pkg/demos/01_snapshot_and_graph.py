"""Parse a dependency snapshot and query the graph.

Snapshots are the canonical input: a JSON description of every library, its
repository, and its direct dependencies. Everything downstream (risk
propagation, reports) works off the graph built here.
"""

from pathlib import Path

from depwatch import (
    LibraryId,
    build_graph,
    parse_snapshot,
    strongly_connected_components,
    transitive_dependencies,
)
from depwatch.depgraph import DependencyGraph

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

snapshot = parse_snapshot((FIXTURES / "chain5.snapshot.json").read_bytes())
print(f"parsed snapshot: ecosystem={snapshot.ecosystem}, {len(snapshot.libraries)} libraries")
print(f"application roots: {[str(r) for r in snapshot.roots]}")

graph, warnings = build_graph(snapshot)
print(f"\ngraph: {len(graph)} nodes, {graph.n_edges()} edges, warnings={warnings}")
for a, b in graph.edges():
    print(f"  {a}  ->  {b}")

root = snapshot.roots[0]
reachable = transitive_dependencies(graph, root)
print(f"\n{root} transitively depends on {len(reachable)} libraries:")
for dep in sorted(reachable, key=lambda d: d.sort_key):
    print(f"  {dep}")

# cycles happen in real ecosystems; strongly connected components find them
a, b, c = (LibraryId("npm", n) for n in ("alpha", "beta", "gamma"))
cyclic = DependencyGraph([a, b, c], [(a, b), (b, a), (b, c)])
print("\nSCCs of alpha<->beta->gamma:")
for comp in strongly_connected_components(cyclic):
    print(" ", sorted(str(m) for m in comp))
