"""gcnmask: does hardware-granularity feature dropout hurt GCN accuracy?

Trains a small two-layer GCN on a citation-style benchmark with dropout masks
applied to aggregated neighbor features at element, burst-segment, or
row-class granularity, and reports mean test accuracy per droprate.  The
row-class grouping is read from the fixture file the memory simulator emits,
so the two components agree on what "one row" means.
"""

from .data import Dataset, citation_style
from .gcn import TwoLayerGCN, train_once
from .harness import TrialSummary, run_table, train_eval, write_table_csv
from .masks import MaskSpec, dropped_fraction, load_rowclass_fixture, row_class_of, sample_mask

__version__ = "0.1.0"
