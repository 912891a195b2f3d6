"""Trace analysis and cache simulation for XRootD-style server logs.

The package mines daily server logs for read/open/close/transfer activity,
models file lifetimes, fits their power-law distribution, replays traces
through an LRU cache simulator, and generates calibrated synthetic corpora
for testing all of the above deterministically.
"""

__version__ = "0.1.0"

from .events import (  # noqa: F401
    Close,
    Open,
    Read,
    ReadV,
    SessionKey,
    TraceEvent,
    Transfer,
    validate_event,
)
from .logparse import (  # noqa: F401
    MalformedLine,
    ParseReport,
    classify_line,
    parse_logs,
    resolve_readv,
    select_log_files,
    stream_logs,
)
from .synth import (  # noqa: F401
    InvalidProfile,
    WorkloadProfile,
    default_profile,
    generate,
)
from .stats import (  # noqa: F401
    Histogram,
    LifetimeRecord,
    PowerLawFit,
    ReadStats,
    build_histogram,
    count_reads_per_file,
    fit_power_law,
    lifetime_quantile_report,
    read_size_stats,
    segment_lifetimes,
    threshold_sweep,
    transfer_totals,
)
from .cache import (  # noqa: F401
    CacheState,
    ContentModelParams,
    SimResult,
    apply_event,
    content_model,
    fill_time,
    hit_rate_sweep,
    oracle_lru,
    simulate_lru,
)
