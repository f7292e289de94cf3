"""depwatch: maintenance-activity monitoring for OSS dependency graphs."""

__version__ = "0.1.0"

from .activity import ActivityTimeSeries, RepoRef, WeekBucket  # noqa: E402,F401
from .depgraph import (  # noqa: F401
    DependencyGraph,
    DependencySnapshot,
    LibraryId,
    build_graph,
    parse_snapshot,
    serialize_snapshot,
    strongly_connected_components,
    transitive_dependencies,
)
from .features import (  # noqa: F401
    FeatureVector,
    LabelDistribution,
    LabeledDataset,
    MaintenanceLabel,
    RuleBasedClassifier,
    apply_labeling_strategy,
    compute_features,
    label_dataset,
)
from .forest import (  # noqa: F401
    ForestHyperparams,
    RandomForestModel,
    classify,
    feature_importance,
    train_classifier,
)
from .cluster import ClusteringConfig, kmeans, pca  # noqa: F401
from .propagate import (  # noqa: F401
    PropagationConfig,
    SuspicionVerdict,
    Verdict,
    aggregate_verdicts,
    centrality,
    pagerank,
    personalized_pagerank,
    risk_scores,
)
from .forecast import Forecaster, Horizon, backtest, fit, forecast_labels, predict  # noqa: F401
from .providers import DateRange, ForgeApiClient, OfflineStore, fetch_activity, fetch_many  # noqa: F401
from .report import Action, EffortMetrics, Report, effort_metrics, recommend_action, render_report  # noqa: F401
from .scan import LibraryContext, ScanConfig, evaluate, run_scan, scan_single  # noqa: F401
from .synth import generate_synthetic_ecosystem  # noqa: F401
