"""rowsim: trace-driven DRAM row-locality simulation for GNN neighbor aggregation.

The package models the memory side of graph aggregation: a CSR graph drives a
feature-read trace through an LRU feature cache, bursts are expanded under a
configurable DRAM address mapping, and two locality mechanisms act on the
stream before a deterministic open-page DRAM model counts bursts, row
activations, sessions, and cycles:

* dropout filters that discard bursts or whole row-queues at a configured
  droprate while preserving row integrity, and
* a row-equivalence-class merger that reorders reads so same-row features are
  issued back to back.
"""

from .analytic import AccessEstimate, ModelParams, expected_actual_bursts, inefficiency_ratio, row_skip_probability
from .dram import (
    AddressMapping,
    AddressVector,
    BurstRequest,
    DramConfig,
    DramCounters,
    DramTiming,
    decompose,
    preset,
    recompose,
    service,
)
from .dropout import (
    BurstFilter,
    LocalityGroupTable,
    RowDropoutState,
    Trigger,
    emit_mask,
    group_bursts,
    ordering_output,
    select_extreme,
)
from .experiment import (
    ExperimentReport,
    ExperimentSpec,
    VariantConfig,
    compare,
    reference_spec,
    run,
    run_cell,
    sweep_alphas,
    variant,
)
from .graph import Graph, GraphStats, load_edge_list, save_edge_list, stats, synth_graph
from .merge import RecHasher, RecTable, eviction_policy, merge_stream, reference_hasher, row_hash, write_rowclass_fixture
from .trace import (
    FeatureLayout,
    FeatureReadRequest,
    LruCache,
    Trace,
    bursts_for_range,
    cache_filter,
    feature_range,
    gen_trace,
)

__version__ = "0.1.0"
