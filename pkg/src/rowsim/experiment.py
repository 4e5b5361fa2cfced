"""Experiment matrix: variant ladder, droprate sweeps, DRAM standards, reports.

The ladder runs five configurations of increasing mechanism strength:

====== ============= ============ ========== ======== =====
name   trigger       burst filter row filter table    merge
====== ============= ============ ========== ======== =====
LG-A   none          element-mask no         none     no
LG-B   none          per-burst    no         none     no
LG-R   per feature   off          yes        16 x 16  no
LG-S   occupancy     off          yes        64 x 32  no
LG-T   occupancy     off          yes        64 x 32  yes
====== ============= ============ ========== ======== =====

Every cell is normalized against the no-dropout, no-merge baseline of the same
graph and standard.  The simulator is memory-bound by construction, so the
speedup proxy is the baseline-to-variant cycle ratio.  At droprate zero all
mechanisms are disabled and every ladder cell reproduces the baseline exactly;
merge-only behavior is its own pseudo-variant so the merger can be studied
with dropout off.
"""

import configparser
import json
import os
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._util import write_csv
from .dram import preset, service_array
from .dropout import (
    BurstFilter,
    GroupResult,
    LocalityGroupTable,
    RowDropoutState,
    Trigger,
    group_bursts,
)
from .graph import Graph, load_edge_list, synth_graph
from .merge import RecHasher, RecTable, merge_stream
from .trace import (
    FeatureLayout,
    LruCache,
    access_breakdown,
    cache_filter,
    expand_misses,
    gen_trace,
)

VARIANT_NAMES = ("LG-A", "LG-B", "LG-R", "LG-S", "LG-T")


@dataclass(frozen=True)
class VariantConfig:
    name: str
    trigger_policy: str | None = None
    trigger_n: int = 1
    burst_filter_mode: str | None = None
    theta: float = 0.5
    row_filter: bool = False
    lgt_entries: int = 0
    lgt_depth: int = 0
    merge: bool = False
    criteria: str = "longest-queue"
    output_batch: int | None = None  # None drains the whole table per firing

    def validate(self) -> None:
        table4 = {
            "LG-A": (None, "element-mask", False, 0, 0, False),
            "LG-B": (None, "burst", False, 0, 0, False),
            "LG-R": ("per-feature", None, True, 16, 16, False),
            "LG-S": ("occupancy", None, True, 64, 32, False),
            "LG-T": ("occupancy", None, True, 64, 32, True),
        }
        if self.name in table4:
            expect = table4[self.name]
            actual = (self.trigger_policy, self.burst_filter_mode, self.row_filter,
                      self.lgt_entries, self.lgt_depth, self.merge)
            if actual != expect:
                raise ValueError(f"{self.name} must use {expect}, got {actual}")


def variant(name: str, custom: dict | None = None) -> VariantConfig:
    """Ladder entry by name; ``merge-only`` enables the merger with no dropout.

    ``custom`` (from a config file's [filter] section) builds an ad-hoc
    variant named ``custom`` with any filter/trigger/table parameters.
    """
    if name == "custom":
        if not custom:
            raise ValueError("variant 'custom' needs a [filter] section")
        return VariantConfig(name="custom", **custom)
    presets = {
        "LG-A": VariantConfig("LG-A", burst_filter_mode="element-mask"),
        "LG-B": VariantConfig("LG-B", burst_filter_mode="burst"),
        "LG-R": VariantConfig("LG-R", trigger_policy="per-feature", row_filter=True,
                              lgt_entries=16, lgt_depth=16),
        "LG-S": VariantConfig("LG-S", trigger_policy="occupancy", row_filter=True,
                              lgt_entries=64, lgt_depth=32),
        "LG-T": VariantConfig("LG-T", trigger_policy="occupancy", row_filter=True,
                              lgt_entries=64, lgt_depth=32, merge=True),
        "merge-only": VariantConfig("merge-only", merge=True),
    }
    if name not in presets:
        raise ValueError(f"unknown variant {name!r}; supported: {', '.join(presets)}, custom")
    cfg = presets[name]
    cfg.validate()
    return cfg


@dataclass(frozen=True)
class ExperimentSpec:
    """One declarative description of an experiment; serializable as manifest."""

    graph_kind: str = "rmat"
    num_vertices: int = 2**14
    num_edges: int = 2**17
    rmat_a: float = 0.57
    rmat_b: float = 0.19
    rmat_c: float = 0.19
    graph_path: str = ""
    graph_format: str = "text"
    flen: int = 256            # feature length in elements
    alignment_kb: int = 4
    base_address: int = 0
    standards: tuple = ("HBM",)
    channels: int = 1
    banks: int = 8
    capacity: int = 1024       # cache features; 0 disables the cache
    access: int = 2            # concurrent feature reads interleaved on the bus
    rec_entries: int = 64
    rec_range: int = 32        # merger depth threshold (schedule range)
    variants: tuple = VARIANT_NAMES
    alphas: tuple = (0.5,)
    seed: int = 7
    # timing overrides (cycles); burst_cycles 0 derives burst_length / 2
    t_rcd: int = 14
    t_rp: int = 14
    t_cl: int = 14
    burst_cycles: int = 0
    # custom geometry; zeros fall back to the named standard's preset values
    columns_per_row: int = 0
    column_size_bits: int = 0
    burst_length: int = 0
    custom_variant: dict | None = None  # [filter] section for variant "custom"

    def layout(self) -> FeatureLayout:
        return FeatureLayout(base_address=self.base_address,
                             alignment_kb=self.alignment_kb,
                             feature_length=self.flen)


def reference_spec(**overrides) -> ExperimentSpec:
    """The reference synthetic workload all trend checks run on."""
    return replace(ExperimentSpec(), **overrides)


def build_graph(spec: ExperimentSpec) -> Graph:
    if spec.graph_kind == "file":
        return load_edge_list(spec.graph_path, fmt=spec.graph_format)
    return synth_graph(spec.graph_kind, spec.num_vertices, spec.num_edges,
                       seed=spec.seed, a=spec.rmat_a, b=spec.rmat_b, c=spec.rmat_c)


def dram_for(spec: ExperimentSpec, standard: str):
    """Config plus mapping for a standard, honoring spec-level overrides."""
    from .dram import AddressMapping, DramConfig, DramTiming

    cfg, mapping = preset(standard, channels=spec.channels,
                          banks_per_channel=spec.banks)
    columns = spec.columns_per_row or cfg.columns_per_row
    colbits = spec.column_size_bits or cfg.column_size_bits
    burst = spec.burst_length or cfg.burst_length
    timing = DramTiming(t_rcd=spec.t_rcd, t_rp=spec.t_rp, t_cl=spec.t_cl,
                        burst_cycles=spec.burst_cycles or max(1, burst // 2))
    cfg = DramConfig(standard=cfg.standard, channels=cfg.channels,
                     banks_per_channel=cfg.banks_per_channel,
                     columns_per_row=columns, column_size_bits=colbits,
                     burst_length=burst, clock_mhz=cfg.clock_mhz, timing=timing)
    return cfg, AddressMapping.default(cfg)


@dataclass
class CellResult:
    variant: str
    alpha: float
    standard: str
    cycles: int
    desired_bytes: int
    actual_bursts: int
    row_activations: int
    cache_hits: int
    hit_bursts: int
    new_bursts: int
    merge_bursts: int
    dropped_bursts: int
    forced_outputs: int
    criteria_misses: int
    session_sizes: dict = field(default_factory=dict)
    kept_total: int = 0
    dropped_total: int = 0
    delta_history: list = field(default_factory=list)
    norm_cycles: float = 1.0
    norm_bursts: float = 1.0
    norm_activations: float = 1.0
    speedup: float = 1.0


def _cell_rng(spec: ExperimentSpec, vname: str, alpha: float, standard: str):
    # string hashes are process-randomized; derive stable entropy from bytes
    entropy = [spec.seed, sum(vname.encode()), int(round(alpha * 100)),
               sum(standard.encode())]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def run_cell(
    g: Graph,
    spec: ExperimentSpec,
    vcfg: VariantConfig,
    alpha: float,
    standard: str,
) -> CellResult:
    """Simulate one (variant, droprate, standard) cell end to end."""
    layout = spec.layout()
    cfg, mapping = dram_for(spec, standard)
    tr = gen_trace(g, layout)
    cache = LruCache(spec.capacity) if spec.capacity else None
    cres = cache_filter(tr.src, cache)
    miss_pos = np.flatnonzero(cres.miss_mask)
    msrc = tr.src[miss_pos]

    merge_active = vcfg.merge and (alpha > 0.0 or vcfg.name == "merge-only")
    mechanisms_on = alpha > 0.0 and vcfg.name != "merge-only"

    if merge_active:
        hasher = RecHasher(layout=layout, mapping=mapping)
        mres = merge_stream(msrc, tr.dst[miss_pos], hasher,
                            RecTable(spec.rec_entries, spec.rec_range))
        order_pos = miss_pos[mres.positions]
        order_src = mres.src
    else:
        order_pos, order_src = miss_pos, msrc

    stream = expand_misses(tr, order_pos, order_src, cfg, access_window=spec.access)
    total_bursts = len(stream.addresses)
    forced = criteria_misses = 0
    kept_total = dropped_total = 0
    delta_history: list = []

    if not mechanisms_on:
        kept_idx = np.arange(total_bursts, dtype=np.int64)
        dropped_count = 0
    elif alpha >= 1.0 and (vcfg.row_filter or vcfg.burst_filter_mode):
        kept_idx = np.zeros(0, dtype=np.int64)  # degenerate limit: drop everything
        dropped_count = total_bursts
    else:
        rng = _cell_rng(spec, vcfg.name, alpha, standard)
        bfilter = None
        if vcfg.burst_filter_mode:
            bfilter = BurstFilter(droprate=alpha,
                                  elements_per_burst=cfg.bytes_per_burst // layout.element_size,
                                  mode=vcfg.burst_filter_mode, theta=vcfg.theta,
                                  seed=spec.seed)
        if vcfg.row_filter:
            table = LocalityGroupTable(vcfg.lgt_entries, vcfg.lgt_depth)
            state = RowDropoutState(alpha=alpha, criteria=vcfg.criteria)
            trig = Trigger(policy=vcfg.trigger_policy, n=vcfg.trigger_n,
                           entry_threshold=vcfg.lgt_entries,
                           depth_threshold=vcfg.lgt_depth)
            res: GroupResult = group_bursts(stream, bfilter, trig, table, state,
                                            mapping, cfg, rng=rng,
                                            output_batch=vcfg.output_batch)
            kept_idx = res.kept_stream
            dropped_count = len(res.dropped) + len(res.filter_dropped)
            forced, criteria_misses = res.forced_outputs, res.criteria_misses
            kept_total, dropped_total = res.kept_total, res.dropped_total
            delta_history = res.delta_history
        else:
            res = group_bursts(stream, bfilter, None, None, None, mapping, cfg)
            kept_idx = res.kept
            dropped_count = len(res.filter_dropped)

    counters, _ = service_array(stream.addresses[kept_idx], cfg, mapping)
    breakdown = access_breakdown(cres.hits, stream.bursts_per_feature,
                                 counters.bursts_served, counters.row_activations)
    desired = int(round((1.0 - alpha) * cres.misses * layout.feature_bytes)) \
        if mechanisms_on else cres.misses * layout.feature_bytes
    return CellResult(
        variant=vcfg.name,
        alpha=alpha,
        standard=standard,
        cycles=counters.cycles,
        desired_bytes=desired,
        actual_bursts=counters.bursts_served,
        row_activations=counters.row_activations,
        cache_hits=cres.hits,
        hit_bursts=breakdown["hit"],
        new_bursts=breakdown["new"],
        merge_bursts=breakdown["merge"],
        dropped_bursts=dropped_count,
        forced_outputs=forced,
        criteria_misses=criteria_misses,
        session_sizes=dict(sorted(counters.session_sizes.items())),
        kept_total=kept_total,
        dropped_total=dropped_total,
        delta_history=delta_history,
    )


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    cells: list
    baselines: dict  # standard -> CellResult

    def cell(self, variant: str, alpha: float, standard: str) -> CellResult:
        for c in self.cells:
            if c.variant == variant and abs(c.alpha - alpha) < 1e-9 and c.standard == standard:
                return c
        raise KeyError((variant, alpha, standard))


def run(spec: ExperimentSpec, out_dir: str | None = None,
        extra_variants: tuple = ()) -> ExperimentReport:
    """Run the whole matrix; optionally write CSVs plus a rerunnable manifest."""
    g = build_graph(spec)
    baselines: dict[str, CellResult] = {}
    cells: list[CellResult] = []
    names = tuple(spec.variants) + tuple(extra_variants)
    for standard in spec.standards:
        base = run_cell(g, spec, variant("LG-A"), 0.0, standard)
        base.variant = "baseline"
        baselines[standard] = base
        for vname in names:
            vcfg = variant(vname, custom=spec.custom_variant)
            for alpha in spec.alphas:
                cell = run_cell(g, spec, vcfg, alpha, standard)
                _normalize(cell, base)
                cells.append(cell)
    report = ExperimentReport(spec=spec, cells=cells, baselines=baselines)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def _normalize(cell: CellResult, base: CellResult) -> None:
    cell.norm_cycles = cell.cycles / base.cycles if base.cycles else 0.0
    cell.norm_bursts = cell.actual_bursts / base.actual_bursts if base.actual_bursts else 0.0
    cell.norm_activations = (cell.row_activations / base.row_activations
                             if base.row_activations else 0.0)
    cell.speedup = base.cycles / cell.cycles if cell.cycles else float("inf")


_METRIC_FIELDS = (
    "variant", "alpha", "standard", "cycles", "desired_bytes", "actual_bursts",
    "row_activations", "cache_hits", "hit_bursts", "new_bursts", "merge_bursts",
    "dropped_bursts", "forced_outputs", "criteria_misses",
    "norm_cycles", "norm_bursts", "norm_activations", "speedup",
)


def write_report(report: ExperimentReport, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    session_rows = []
    for c in list(report.baselines.values()) + report.cells:
        rows.append(tuple(getattr(c, f) for f in _METRIC_FIELDS))
        for size, count in sorted(c.session_sizes.items()):
            session_rows.append((c.variant, c.alpha, c.standard, size, count))
    write_csv(os.path.join(out_dir, "metrics.csv"), _METRIC_FIELDS, rows)
    write_csv(os.path.join(out_dir, "sessions.csv"),
              ("variant", "alpha", "standard", "session_size", "count"), session_rows)
    write_csv(os.path.join(out_dir, "model.csv"),
              ("standard", "alpha", "model_actual_fraction", "model_desired_fraction",
               "row_skip_bound"),
              _model_rows(report.spec))
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(asdict(report.spec), fh, indent=1, sort_keys=True)
        fh.write("\n")


def _model_rows(spec: ExperimentSpec):
    """Closed-form element-dropout curves, for overlaying on the measured CSVs."""
    from .analytic import ModelParams, expected_actual_bursts, row_skip_probability

    layout = spec.layout()
    for standard in spec.standards:
        cfg, _ = dram_for(spec, standard)
        params_for = lambda a: ModelParams(
            requests=1,
            columns_per_request=layout.feature_bytes // (cfg.column_size_bits // 8),
            columns_per_row=cfg.columns_per_row,
            columns_per_burst=cfg.burst_length,
            elements_per_burst=cfg.bytes_per_burst // layout.element_size,
            droprate=a,
        )
        for alpha in spec.alphas:
            est = expected_actual_bursts(params_for(alpha))
            qc = params_for(alpha).columns_per_request
            yield (standard, alpha, est.actual / qc, est.desired / qc,
                   row_skip_probability(params_for(alpha)))


def load_spec(path: str) -> ExperimentSpec:
    """Load a spec from an INI config or a JSON manifest."""
    if path.endswith(".json"):
        with open(path) as fh:
            raw = json.load(fh)
        raw["standards"] = tuple(raw["standards"])
        raw["variants"] = tuple(raw["variants"])
        raw["alphas"] = tuple(raw["alphas"])
        return ExperimentSpec(**raw)
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    kw: dict = {}
    get = lambda sec, opt, cast=str: cast(parser.get(sec, opt)) if parser.has_option(sec, opt) else None

    def put(name, sec, opt, cast=str):
        val = get(sec, opt, cast)
        if val is not None:
            kw[name] = val

    put("graph_kind", "graph", "kind")
    put("num_vertices", "graph", "vertices", int)
    put("num_edges", "graph", "edges", int)
    put("rmat_a", "graph", "a", float)
    put("rmat_b", "graph", "b", float)
    put("rmat_c", "graph", "c", float)
    put("graph_path", "graph", "path")
    put("graph_format", "graph", "format")
    put("flen", "layout", "flen", int)
    put("alignment_kb", "layout", "alignment_kb", int)
    put("base_address", "layout", "base_address", int)
    put("channels", "dram", "channels", int)
    put("banks", "dram", "banks", int)
    put("columns_per_row", "dram", "columns_per_row", int)
    put("column_size_bits", "dram", "column_size_bits", int)
    put("burst_length", "dram", "burst_length", int)
    put("t_rcd", "dram", "t_rcd", int)
    put("t_rp", "dram", "t_rp", int)
    put("t_cl", "dram", "t_cl", int)
    put("burst_cycles", "dram", "burst_cycles", int)
    put("capacity", "cache", "capacity", int)
    put("access", "pipeline", "access", int)
    put("rec_entries", "merge", "entries", int)
    put("rec_range", "merge", "range", int)
    put("seed", "experiment", "seed", int)
    if parser.has_section("filter"):
        kw["custom_variant"] = _parse_filter_section(parser)
    if parser.has_option("dram", "standards"):
        kw["standards"] = tuple(parser.get("dram", "standards").split())
    if parser.has_option("experiment", "variants"):
        kw["variants"] = tuple(parser.get("experiment", "variants").split())
    if parser.has_option("experiment", "alphas"):
        raw = parser.get("experiment", "alphas")
        kw["alphas"] = sweep_alphas() if raw.strip() == "sweep" else tuple(
            float(a) for a in raw.split())
    return ExperimentSpec(**kw)


def _parse_filter_section(parser) -> dict:
    """[filter] keys for the ad-hoc ``custom`` variant."""
    out: dict = {}
    text = {"trigger": "trigger_policy", "burst_filter": "burst_filter_mode",
            "criteria": "criteria"}
    ints = {"n": "trigger_n", "entries": "lgt_entries", "depth": "lgt_depth",
            "output_batch": "output_batch"}
    for opt, field_name in text.items():
        if parser.has_option("filter", opt):
            val = parser.get("filter", opt)
            out[field_name] = None if val == "none" else val
    for opt, field_name in ints.items():
        if parser.has_option("filter", opt):
            out[field_name] = parser.getint("filter", opt)
    if parser.has_option("filter", "theta"):
        out["theta"] = parser.getfloat("filter", "theta")
    if parser.has_option("filter", "row_filter"):
        out["row_filter"] = parser.getboolean("filter", "row_filter")
    if parser.has_option("filter", "merge"):
        out["merge"] = parser.getboolean("filter", "merge")
    return out


def sweep_alphas() -> tuple:
    """Droprates 0.0 through 1.0 in steps of 0.1."""
    return tuple(round(i / 10, 1) for i in range(11))


@dataclass
class DeltaRow:
    variant: str
    alpha: float
    standard: str
    speedup: float
    access_reduction: float
    activation_reduction: float


def compare(report_a: ExperimentReport | list, report_b: ExperimentReport | list) -> list:
    """Ratio table of A against B, matched by (variant, alpha, standard).

    When variant sets differ (for example one single-variant report against a
    baseline-style report), cells are matched on (alpha, standard) alone.
    """
    cells_a = report_a.cells if isinstance(report_a, ExperimentReport) else report_a
    cells_b = report_b.cells if isinstance(report_b, ExperimentReport) else report_b
    variants_match = {c.variant for c in cells_a} == {c.variant for c in cells_b}

    def key(c):
        return (c.variant, round(c.alpha, 6), c.standard) if variants_match \
            else (round(c.alpha, 6), c.standard)

    index_b = {key(c): c for c in cells_b}
    rows = []
    for a in cells_a:
        b = index_b.get(key(a))
        if b is None:
            raise ValueError(f"no matching cell for {key(a)} (axes mismatch)")
        rows.append(DeltaRow(
            variant=f"{a.variant}/{b.variant}",
            alpha=a.alpha,
            standard=a.standard,
            speedup=b.cycles / a.cycles if a.cycles else float("inf"),
            access_reduction=1.0 - (a.actual_bursts / b.actual_bursts if b.actual_bursts else 0.0),
            activation_reduction=1.0 - (a.row_activations / b.row_activations
                                        if b.row_activations else 0.0),
        ))
    return rows


def cells_from_csv(path: str) -> list:
    """Reload metric rows (for the compare CLI); session data is not needed."""
    cells = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            vals = dict(zip(header, line.strip().split(",")))
            cells.append(CellResult(
                variant=vals["variant"], alpha=float(vals["alpha"]),
                standard=vals["standard"], cycles=int(vals["cycles"]),
                desired_bytes=int(vals["desired_bytes"]),
                actual_bursts=int(vals["actual_bursts"]),
                row_activations=int(vals["row_activations"]),
                cache_hits=int(vals["cache_hits"]), hit_bursts=int(vals["hit_bursts"]),
                new_bursts=int(vals["new_bursts"]), merge_bursts=int(vals["merge_bursts"]),
                dropped_bursts=int(vals["dropped_bursts"]),
                forced_outputs=int(vals["forced_outputs"]),
                criteria_misses=int(vals["criteria_misses"]),
                norm_cycles=float(vals["norm_cycles"]),
                norm_bursts=float(vals["norm_bursts"]),
                norm_activations=float(vals["norm_activations"]),
                speedup=float(vals["speedup"]),
            ))
    return cells
