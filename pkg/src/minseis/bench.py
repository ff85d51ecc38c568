"""Comparative experiment campaigns.

A campaign is the cross product instances x k-fractions x methods x
samples. Every cell is seeded from ``(master_seed, cell key)`` alone, so
cells can run in any order or in parallel and still reproduce. All methods
share the initial infected set of an ``(instance, sample)`` pair.

Files written under the output directory::

    results.csv        instance,method,pop_size,k_fraction,k,sample,best_value,wall_ms
    traces/<cell>.csv  iteration,best_so_far
    summary.csv        instance,method,k_fraction,mean,stderr
    scalability.csv    instance,num_nodes,num_edges,method,k_fraction,prop_infections
"""

from __future__ import annotations

import csv
import logging
import math
import statistics
import time
import zlib
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .base import SearchResult, seed_nodes
from .classic import monte_carlo_search
from .evolve import GAConfig, run_ga
from .netio import Graph, instance_manifest, instance_paths, load_instance_files
from .seis import EpidemicParams
from .validation import (check_fraction, check_positive_int, check_probability, round_half_up,
                         substream)

logger = logging.getLogger(__name__)

RESULTS_HEADER = ["instance", "method", "pop_size", "k_fraction", "k", "sample", "best_value", "wall_ms"]
TRACE_HEADER = ["iteration", "best_so_far"]
SUMMARY_HEADER = ["instance", "method", "k_fraction", "mean", "stderr"]
SCALABILITY_HEADER = ["instance", "num_nodes", "num_edges", "method", "k_fraction", "prop_infections"]

METHODS = ("classic", "ga-int", "ga-bin")
DEFAULT_METHODS = (("classic", 0), ("ga-int", 10), ("ga-int", 100), ("ga-bin", 10), ("ga-bin", 100))


@dataclass(frozen=True)
class InstanceSpec:
    name: str
    graph_path: str
    community_path: str

    @classmethod
    def parse(cls, text: str) -> "InstanceSpec":
        """``name`` for a bundled instance or ``name:graph_path:community_path``."""
        parts = text.strip().split(":")
        if len(parts) == 1:
            g, c = instance_paths(parts[0])
            return cls(parts[0].lower(), str(g), str(c))
        if len(parts) == 3:
            return cls(*parts)
        raise ValueError(f"instance must be 'name' or 'name:graph:communities', got {text!r}")

    def __str__(self):
        return f"{self.name}:{self.graph_path}:{self.community_path}"


def method_label(method: str, pop_size: int) -> str:
    return method if method == "classic" else f"{method}-{pop_size}"


def parse_methods(text: str) -> tuple[tuple[str, int], ...]:
    """``classic,ga-int:10,ga-bin:100`` -> ``(("classic", 0), ("ga-int", 10), ...)``."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, _, pop = item.partition(":")
        if name not in METHODS:
            raise ValueError(f"unknown method {name!r}; expected one of {METHODS}")
        if name == "classic":
            out.append((name, 0))
        else:
            out.append((name, check_positive_int(f"{name} population", int(pop or 100), minimum=2)))
    if not out:
        raise ValueError("no methods given")
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    instances: tuple[InstanceSpec, ...] = ()
    k_fractions: tuple[float, ...] = (0.1, 0.3, 0.5)
    methods: tuple[tuple[str, int], ...] = DEFAULT_METHODS
    samples: int = 10
    iterations: int = 300
    replications: int = 20
    horizon: int = 100
    initial_fraction: float = 0.1
    chi: float = 0.15
    phi: float = 0.05
    epsilon: int = 2
    lam: int = 4
    crossover_rate: float = 0.7
    exchange_probability: float = 0.5
    mutation_rate: float = 0.1
    tournament_p: float = 0.7
    master_seed: int = 0

    def __post_init__(self):
        for f in self.k_fractions:
            check_fraction("k fraction", f)
        check_fraction("initial_fraction", self.initial_fraction)
        for name in ("samples", "iterations", "replications", "horizon", "epsilon", "lam"):
            check_positive_int(name, getattr(self, name))
        for name in ("chi", "phi", "crossover_rate", "exchange_probability", "mutation_rate",
                     "tournament_p"):
            check_probability(name, getattr(self, name))
        check_positive_int("master_seed", self.master_seed, minimum=0)

    @classmethod
    def benchmark_protocol(cls, **overrides) -> "ExperimentConfig":
        """Defaults over every bundled instance (all ten must be resolvable)."""
        specs = tuple(InstanceSpec.parse(n) for n in instance_manifest())
        return cls(instances=specs, **overrides)


@dataclass(frozen=True)
class RunRecord:
    instance: str
    method: str
    pop_size: int
    k_fraction: float
    k: int
    sample: int
    best_value: int
    trace: tuple[int, ...] = field(default=(), repr=False)
    wall_ms: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.trace and self.trace[-1] != self.best_value:
            raise ValueError("best_value must equal the final trace entry")

    @property
    def key(self) -> tuple:
        return (self.instance, self.method, self.pop_size, self.k_fraction, self.sample)

    @property
    def label(self) -> str:
        return method_label(self.method, self.pop_size)


@dataclass(frozen=True)
class SummaryRow:
    instance: str
    method: str
    k_fraction: float
    mean: float
    stderr: float
    n: int


def _tag(*parts) -> int:
    return zlib.crc32("|".join(str(p) for p in parts).encode())


def derive_problem(graph: Graph, config: ExperimentConfig, sample_index: int,
                   instance: str = "") -> tuple[EpidemicParams, dict[float, int]]:
    """Epidemic parameters and ``k`` per fraction for one ``(instance, sample)``.

    ``k = round_half_up(fraction * |E|)``; the seed set holds
    ``ceil(initial_fraction * |V|)`` nodes drawn from a stream keyed by the
    master seed, the instance name and the sample index only.
    """
    ks = {}
    for f in config.k_fractions:
        ks[f] = round_half_up(check_fraction("k fraction", f), graph.num_edges)
    rng = substream(config.master_seed, _tag("seeds", instance), sample_index)
    seeds = seed_nodes(graph.num_nodes, config.initial_fraction, rng)
    params = EpidemicParams(seeds, config.chi, config.phi, config.epsilon, config.lam,
                            config.horizon, config.replications)
    return params, ks


@dataclass(frozen=True)
class Cell:
    instance: InstanceSpec
    method: str
    pop_size: int
    k_fraction: float
    sample: int

    @property
    def key(self) -> tuple:
        return (self.instance.name, self.method, self.pop_size, self.k_fraction, self.sample)

    @property
    def slug(self) -> str:
        return (f"{self.instance.name}__{method_label(self.method, self.pop_size)}"
                f"__k{self.k_fraction:g}__s{self.sample}")


def cells(config: ExperimentConfig) -> list[Cell]:
    return [Cell(inst, m, pop, f, s)
            for inst in config.instances
            for f in config.k_fractions
            for m, pop in config.methods
            for s in range(config.samples)]


@lru_cache(maxsize=32)
def _graph(graph_path: str, community_path: str) -> Graph:
    return load_instance_files(graph_path, community_path)


def search(graph: Graph, params: EpidemicParams, k: int, method: str, pop_size: int,
           config: ExperimentConfig, rng) -> SearchResult:
    if method == "classic":
        return monte_carlo_search(graph, params, k, config.iterations, rng)
    ga = GAConfig(k, method.split("-")[1], pop_size, config.iterations, config.crossover_rate,
                  config.exchange_probability, config.mutation_rate, config.tournament_p)
    return run_ga(graph, params, ga, rng)


def search_stream(config: ExperimentConfig, instance: str, method: str, pop_size: int,
                  k_key, sample: int):
    """Search stream of one cell; ``k_key`` is the k fraction (or any stable k label)."""
    return substream(config.master_seed, _tag("search", instance, method, pop_size, k_key), sample)


def run_cell(cell: Cell, config: ExperimentConfig) -> RunRecord:
    graph = _graph(cell.instance.graph_path, cell.instance.community_path)
    params, ks = derive_problem(graph, config, cell.sample, cell.instance.name)
    k = ks[cell.k_fraction]
    rng = search_stream(config, cell.instance.name, cell.method, cell.pop_size, cell.k_fraction,
                        cell.sample)
    start = time.perf_counter()
    result = search(graph, params, k, cell.method, cell.pop_size, config, rng)
    wall = (time.perf_counter() - start) * 1e3
    return RunRecord(cell.instance.name, cell.method, cell.pop_size, cell.k_fraction, k,
                     cell.sample, result.best_value, result.trace, wall)


# ---------------------------------------------------------------- files

def _fmt_fraction(f: float) -> str:
    return f"{f:g}"


def _record_row(rec: RunRecord, timing: bool) -> list[str]:
    wall = f"{rec.wall_ms:.1f}" if timing and rec.wall_ms is not None else ""
    return [rec.instance, rec.method, str(rec.pop_size), _fmt_fraction(rec.k_fraction), str(rec.k),
            str(rec.sample), str(rec.best_value), wall]


def write_trace(path: Path, trace: Sequence[int]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        w.writerows((i, v) for i, v in enumerate(trace, start=1))


def read_trace(path: Path) -> tuple[int, ...]:
    with open(path, newline="", encoding="utf-8") as fh:
        return tuple(int(r["best_so_far"]) for r in csv.DictReader(fh))


def read_results(path: Path, trace_dir: Path | None = None) -> list[RunRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            rec = RunRecord(r["instance"], r["method"], int(r["pop_size"]), float(r["k_fraction"]),
                            int(r["k"]), int(r["sample"]), int(r["best_value"]),
                            wall_ms=float(r["wall_ms"]) if r["wall_ms"] else None)
            if trace_dir is not None:
                tp = trace_dir / f"{_slug(rec)}.csv"
                if tp.exists():
                    rec = replace(rec, trace=read_trace(tp))
            out.append(rec)
    return out


def _slug(rec: RunRecord) -> str:
    return f"{rec.instance}__{rec.label}__k{rec.k_fraction:g}__s{rec.sample}"


def write_results(path: Path, records: Iterable[RunRecord], timing: bool) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        w.writerows(_record_row(r, timing) for r in records)


def _ordered(pending: list[Cell], config: ExperimentConfig, jobs: int) -> Iterator[RunRecord]:
    if jobs <= 1 or len(pending) <= 1:
        for cell in pending:
            yield run_cell(cell, config)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map() yields in submission order, which keeps the single writer deterministic
        yield from pool.map(run_cell, pending, [config] * len(pending))


def run_experiment(config: ExperimentConfig, out_dir=None, *, jobs: int = 1, timing: bool = False,
                   progress: Callable[[RunRecord], None] | None = None) -> list[RunRecord]:
    """Run every missing cell and return all records in canonical cell order.

    With ``out_dir`` set, each record is appended to ``results.csv`` (and its
    trace written) as soon as it and every earlier cell are done; cells
    already present are loaded instead of recomputed. ``wall_ms`` is only
    written when ``timing`` is true so repeated runs stay byte-identical.
    """
    todo = cells(config)
    order = {c.key: i for i, c in enumerate(todo)}
    done: dict[tuple, RunRecord] = {}
    results_path = trace_dir = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        trace_dir = out_dir / "traces"
        trace_dir.mkdir(parents=True, exist_ok=True)
        results_path = out_dir / "results.csv"
        if results_path.exists():
            for rec in read_results(results_path, trace_dir):
                if rec.key in order and rec.trace:
                    done[rec.key] = rec
        else:
            write_results(results_path, [], timing)

    pending = [c for c in todo if c.key not in done]
    if done:
        logger.info("resuming: %d of %d cells already present", len(done), len(todo))
    for cell, rec in zip(pending, _ordered(pending, config, jobs)):
        try:
            if trace_dir is not None:
                write_trace(trace_dir / f"{cell.slug}.csv", rec.trace)
                with open(results_path, "a", newline="", encoding="utf-8") as fh:
                    csv.writer(fh, lineterminator="\n").writerow(_record_row(rec, timing))
        except OSError as exc:
            raise OSError(f"writing cell {cell.key}: {exc}") from exc
        done[rec.key] = rec
        if progress is not None:
            progress(rec)

    records = sorted(done.values(), key=lambda r: order[r.key])
    if results_path is not None:
        write_results(results_path, records, timing)
    return records


# ---------------------------------------------------------------- statistics

def summarize(records: Iterable[RunRecord]) -> list[SummaryRow]:
    """Mean and standard error (n-1 deviation over sqrt n) per instance/method/k."""
    groups: dict[tuple, list[int]] = defaultdict(list)
    for r in records:
        groups[(r.instance, r.label, r.k_fraction)].append(r.best_value)
    rows = []
    for (inst, label, frac), values in sorted(groups.items()):
        if len(values) < 2:
            raise ValueError(f"{inst}/{label}/k={frac:g}: need at least 2 samples for a standard error")
        mean = statistics.fmean(values)
        se = statistics.stdev(values) / math.sqrt(len(values))
        rows.append(SummaryRow(inst, label, frac, mean, se, len(values)))
    return rows


def scalability_metric(records: Iterable[RunRecord], num_nodes: Mapping[str, int] | int,
                       iterations: int) -> dict[tuple[str, str, float], float]:
    """Sum of the best-so-far trace over ``|V| * iterations``, averaged over samples."""
    per: dict[tuple, list[float]] = defaultdict(list)
    for r in records:
        if len(r.trace) != iterations:
            raise ValueError(f"{r.key}: trace has {len(r.trace)} entries, expected {iterations}")
        n = num_nodes if isinstance(num_nodes, int) else num_nodes[r.instance]
        per[(r.instance, r.label, r.k_fraction)].append(sum(r.trace) / (n * iterations))
    return {key: statistics.fmean(v) for key, v in sorted(per.items())}


def write_summary(path, rows: Iterable[SummaryRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for r in rows:
            w.writerow([r.instance, r.method, _fmt_fraction(r.k_fraction), f"{r.mean:.4f}", f"{r.stderr:.4f}"])


def write_scalability(path, metric: Mapping[tuple, float], sizes: Mapping[str, tuple[int, int]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCALABILITY_HEADER)
        for (inst, label, frac), value in metric.items():
            n, m = sizes[inst]
            w.writerow([inst, n, m, label, _fmt_fraction(frac), f"{value:.6f}"])


def write_reports(config: ExperimentConfig, records: list[RunRecord], out_dir) -> None:
    out_dir = Path(out_dir)
    if config.samples >= 2:
        write_summary(out_dir / "summary.csv", summarize(records))
    else:
        logger.warning("single sample per cell: summary.csv skipped (standard error undefined)")
    sizes = {}
    for spec in config.instances:
        g = _graph(spec.graph_path, spec.community_path)
        sizes[spec.name] = (g.num_nodes, g.num_edges)
    metric = scalability_metric(records, {k: v[0] for k, v in sizes.items()}, config.iterations)
    write_scalability(out_dir / "scalability.csv", metric, sizes)


# ---------------------------------------------------------------- rendering

def export_solution_dot(graph: Graph, solution: Iterable[int], initial_infected: Iterable[int] = (),
                        name: str = "G") -> str:
    """Graphviz text with removed edges and seed nodes drawn in red."""
    removed = set(solution)
    seeds = set(initial_infected)
    lines = [f"graph {name} {{"]
    for v in range(1, graph.num_nodes + 1):
        if v in seeds:
            lines.append(f'  {v} [color="red", style="filled", fillcolor="red"];')
        else:
            lines.append(f"  {v};")
    for eid, (u, v) in enumerate(graph.edges, start=1):
        if eid in removed:
            lines.append(f'  {u} -- {v} [color="red", penwidth=2, id="e{eid}"];')
        else:
            lines.append(f'  {u} -- {v} [id="e{eid}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- config files

def read_keyvalue(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` comments; keys normalised to snake_case."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def config_fields() -> list[str]:
    return [f.name for f in fields(ExperimentConfig)]
