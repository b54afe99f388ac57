"""Compositions of integers whose parts come from a tail of a growing sequence.

For a sequence H (Fibonacci numbers, a positive linear recurrence, or a
polynomial) and a cut index m, the parts are {H_i : i >= m}.  The package
finds the certified root of sum_{i>=m} x^{H_i} = 1, counts compositions
exactly, and classifies how counts for two part sets compare.
"""

__version__ = "0.1.0"

from .compare import (
    RatioClassification,
    TableRow,
    Verdict,
    build_table_fibonacci,
    build_table_polynomial,
    classify_plrs_vs_fibonacci,
    classify_ratio,
    classify_ratio_adaptive,
)
from .counting import (
    CompositionStats,
    CountTable,
    asymptotic_residual,
    brute_force_count,
    build_count_table,
    dump_count_table,
    load_count_table,
    stats_at,
)
from .errors import CompositionsError
from .sequences import (
    Kind,
    SequenceSpec,
    certified_fibonacci_threshold,
    fibonacci,
    generate_terms,
    outpacing_index,
    parse_spec,
)
from .series import (
    CertifiedValue,
    RestrictedSeries,
    RootAnalysis,
    evaluate_series,
    evaluate_series_derivative,
    find_root,
    root_sequence,
)
