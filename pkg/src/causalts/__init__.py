"""Causal natural structures inside univariate time series.

The pipeline mines representative snippets, clusters them into shape
factors, discovers a constrained causal graph over the factors (plus
the class label), scores the surviving candidate DAGs, and attaches
matched-effect strengths to the selected edges.  On top of that sit
classification, dataset pruning, and the causal information ratio.
"""

from .apps import (
    CausalStructure,
    FactorSummary,
    Representation,
    ScoredCandidate,
    SweepCell,
    accuracy,
    build_structure,
    cir,
    classify_knn,
    macro_f1,
    prune_dataset,
    represent,
    sweep_parameters,
)
from .config import RunConfig
from .encode import (
    FactorMatrix,
    PrecedenceRelation,
    assign_factor,
    encode_dataset,
    temporal_precedence,
)
from .graph import (
    Candidate,
    CandidateSet,
    CausalDag,
    Pag,
    apply_constraints,
    bic_score,
    ci_test,
    discover_pag,
    resolve_candidates,
    score_candidates,
    select_graph,
)
from .io import (
    export_dot,
    export_strengths,
    export_structure,
    format_ucr,
    import_structure,
    load_ucr,
)
from .kshape import ShapeCluster, kshape_cluster, sbd, shape_extract
from .series import (
    Dataset,
    Subsequence,
    TimeSeries,
    dominant_period,
    subsequences,
    unified_length,
    znormalize,
)
from .snippets import (
    DistanceProfile,
    Snippet,
    discover_snippets,
    subseq_distance_profile,
)
from .strength import (
    MatchResult,
    StrengthMap,
    TimestepStrengths,
    ate,
    edge_strengths,
    match_pairs,
    propensity_scores,
    timestep_strengths,
)

__version__ = "0.1.0"
