"""End-to-end scan of a committed 20-library ecosystem, as CI would run it.

Equivalent command line:

    depwatch scan --snapshot tests/fixtures/eco20/snapshot.json \
                  --store tests/fixtures/eco20/store \
                  --as-of 2024-01-01 --rules-only --format markdown

Exit codes in CI: 0 = clean, 1 = suspicious libraries found, 2 = error.
"""

from datetime import date
from pathlib import Path

from depwatch.report import render_report
from depwatch.scan import LibraryContext, ScanConfig, evaluate, run_scan

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"
ECO = FIXTURES / "eco20"

config = ScanConfig(
    snapshot_path=ECO / "snapshot.json",
    store_path=ECO / "store",
    as_of=date(2024, 1, 1),
    context={
        # human-supplied Figure-style context for a few known libraries
        "synth:lib000@3.9.4": LibraryContext(security_relevant=False, alternatives_exist=False),
        "synth:lib002@0.6.6": LibraryContext(security_relevant=True, alternatives_exist=True),
    },
    cost_per_review_hours=1.5,
)
report = run_scan(config)

print(render_report(report, "markdown").decode("utf-8"))
exit_code = 1 if report.suspicious_count else 0
print(f"CI exit code would be: {exit_code}")

# because the fixture ships ground truth, the scan can also be scored
result = evaluate(ECO)
print(
    f"against ground truth: accuracy {result.accuracy:.2f}, "
    f"effort reduction {result.effort.effort_reduction:.0%}, "
    f"recall {result.effort.recall:.2f}"
)
