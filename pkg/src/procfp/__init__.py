"""Trace fingerprints from resource-consumption metrics, and family
classification with a feature-selected RBF C-SVM.

The pipeline turns multi-metric time series into fingerprints (one DFA
exponent per metric plus all pairwise Pearson correlations), ranks the
features by mutual information with the family label, reduces candidate
subsets with PCA, and trains a one-vs-one soft-margin SVM by SMO.
"""

from .collector import (
    CollectError,
    ProcRule,
    ProcSampler,
    ProcSourceSpec,
    SamplerConfig,
    collect,
    default_rules,
    default_schema,
    load_rules,
    rules_from_json,
    rules_to_json,
)
from .dfa import DfaConfig, DfaResult, box_sizes, dfa_exponent
from .evaluation import (
    BoxStats,
    ConfusionMatrix,
    ExperimentReport,
    LabeledSample,
    SweepPoint,
    accuracy,
    box_stats,
    confusion,
    dfa_length_sweep,
    dfa_stability_report,
    group_runs,
    length_sweep_csv,
    normalize_rows,
    precision,
    recall,
    repeated_holdout,
    stability_box_csv,
    stratified_sample_split,
    tukey_quartiles,
    write_experiment_report,
)
from .features import (
    CorrelationResult,
    FeatureVector,
    PearsonResult,
    correlation_matrix,
    feature_names,
    fingerprint,
    fingerprint_csv,
    parse_fingerprint_csv,
    pearson,
    stack_fingerprints,
)
from .model_selection import GridSearchResult, cross_validate, grid_search, stratified_folds
from .modelfile import ModelFile, load_model, model_from_dict, model_to_dict, save_model
from .pipeline import (
    DEFAULT_C_GRID,
    DEFAULT_Q_GRID,
    FamilyClassifier,
    auto_gamma_grid,
)
from .selection import (
    MiRanking,
    PrincipalComponents,
    Standardizer,
    mutual_information,
    q_subset,
    quantile_bins,
    rank_features,
)
from .svm import BinarySvc, MulticlassSvc, rbf_kernel, rbf_kernel_matrix
from .synth import (
    FamilySpec,
    family_spec_from_json,
    family_spec_to_json,
    generate_synthetic_trace,
    load_family_spec,
)
from .trace import (
    LabeledTrace,
    MetricSchema,
    TimeSeries,
    Trace,
    TraceParseError,
    parse_trace,
    write_trace,
)

__version__ = "0.1.0"
