"""phonoscript: compose phonetically balanced, phonetically rich recording scripts.

The library selects a fixed number of sentence sets from an annotated
candidate pool so that the selection's unit (tonal-syllable) distribution
tracks a reference corpus while covering as many distinct units as possible.
"""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConfigError,
    DataError,
    PhonoscriptError,
    ValidationError,
)
from .filters import (
    FilterConfig,
    FilterReport,
    PosCriteria,
    general_filter,
    intelligibility_score,
    levenshtein,
    perplexity_filter,
    pos_filter,
    run_pipeline,
    sensitive_filter,
)
from .fitness import (
    FitnessBreakdown,
    IncrementalFitness,
    cosine_similarity,
    fitness,
    fitness_delta,
    script_syllable_coverage,
    script_syllable_distribution,
    set_syllable_distribution,
)
from .ga import (
    GaConfig,
    GaTrace,
    Population,
    crossover_pair,
    evolve,
    init_population,
    truncation_select,
)
from .ingest import (
    CandidateRecord,
    RealDistribution,
    RejectedLine,
    compute_real_distribution,
    load_distribution,
    load_pool,
    save_distribution,
    write_pool,
)
from .model import (
    DistributionVector,
    FitnessWeights,
    Script,
    Sentence,
    SentencePool,
    UnitInventory,
    base_label,
    unit_histogram,
    validate_script,
)
from .postprocess import (
    ComparisonRow,
    ReplacementRequest,
    Strategy,
    compare_strategies,
    ga_replace,
    greedy_replace,
)
from .report import (
    ScriptComparison,
    ScriptStats,
    compare_scripts,
    export_distribution,
    script_stats,
)
