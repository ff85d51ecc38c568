"""Command-line front end.

Subcommands: ``simulate``, ``classic``, ``ga``, ``experiment`` and
``export-dot``. Any option may also come from a ``key=value`` file given
with ``--config``; explicit flags win over the file, the file over the
built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import bench
from .bench import ExperimentConfig, InstanceSpec, derive_problem, parse_methods
from .evolve import GAConfig
from .netio import instance_manifest, load_communities, load_graph, load_instance_files
from .seis import check_solution, replication_seeds, simulate
from .validation import check_positive_int, resolve_k, substream

log = logging.getLogger("minseis")

DEFAULTS = {
    "k_fraction": 0.1,
    "k_fractions": "0.1,0.3,0.5",
    "replications": 20,
    "t": 100,
    "initial_fraction": 0.1,
    "chi": 0.15,
    "phi": 0.05,
    "epsilon": 2,
    "lambda": 4,
    "attempts": 300,
    "generations": 300,
    "pop": 100,
    "encoding": "bin",
    "crossover_rate": 0.7,
    "exchange_prob": 0.5,
    "mutation_rate": 0.1,
    "tournament_p": 0.7,
    "samples": 10,
    "methods": "classic,ga-int:10,ga-int:100,ga-bin:10,ga-bin:100",
    "instances": ",".join(instance_manifest()),
    "seed": 0,
    "out_dir": ".",
    "jobs": 1,
}

ALIASES = {
    "horizon": "t", "lam": "lambda", "exchange_probability": "exchange_prob",
    "population_size": "pop", "master_seed": "seed", "iterations": "attempts",
    "initial_infected_fraction": "initial_fraction",
}

TYPES = {
    "k_fraction": float, "k": int, "replications": int, "t": int, "initial_fraction": float,
    "chi": float, "phi": float, "epsilon": int, "lambda": int, "attempts": int,
    "generations": int, "pop": int, "encoding": str, "crossover_rate": float,
    "exchange_prob": float, "mutation_rate": float, "tournament_p": float, "samples": int,
    "methods": str, "instances": str, "k_fractions": str, "seed": int, "out_dir": str,
    "jobs": int, "graph": str, "communities": str,
}


class CliError(Exception):
    pass


def _help(name: str, text: str) -> str:
    return f"{text} (default: {DEFAULTS[name]})" if name in DEFAULTS else text


def _add_model_flags(p: argparse.ArgumentParser, k: bool = True) -> None:
    p.add_argument("--graph", help="Pajek-style graph file")
    p.add_argument("--communities", help="community file, one '<node> <community>' per line")
    if k:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--k-fraction", type=float, help=_help("k_fraction", "edges to remove as a fraction of |E|"))
        g.add_argument("--k", type=int, help="absolute number of edges to remove")
    p.add_argument("--replications", type=int, help=_help("replications", "simulations per evaluated solution"))
    p.add_argument("--t", type=int, help=_help("t", "time steps per simulation"))
    p.add_argument("--initial-fraction", type=float, help=_help("initial_fraction", "fraction of nodes initially infected"))
    p.add_argument("--chi", type=float, help=_help("chi", "infection chance inside a community"))
    p.add_argument("--phi", type=float, help=_help("phi", "infection chance across communities"))
    p.add_argument("--epsilon", type=int, help=_help("epsilon", "exposure duration in steps"))
    p.add_argument("--lambda", dest="lambda_", type=int, help=_help("lambda", "infectious duration in steps"))
    p.add_argument("--seed", type=int, help=_help("seed", "master random seed"))
    p.add_argument("--out-dir", help=_help("out_dir", "directory for output files"))
    p.add_argument("--config", help="key=value file supplying any of these options")


def _add_ga_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--encoding", choices=("int", "bin"), help=_help("encoding", "chromosome encoding"))
    p.add_argument("--pop", type=int, help=_help("pop", "population size"))
    p.add_argument("--generations", type=int, help=_help("generations", "generations"))
    p.add_argument("--crossover-rate", type=float, help=_help("crossover_rate", "probability of crossing a parent pair"))
    p.add_argument("--exchange-prob", type=float, help=_help("exchange_prob", "per-locus swap probability in uniform crossover"))
    p.add_argument("--mutation-rate", type=float, help=_help("mutation_rate", "per-gene mutation probability"))
    p.add_argument("--tournament-p", type=float, help=_help("tournament_p", "probability the fitter contestant wins"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minseis", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="print per-step compartment counts for one replication")
    _add_model_flags(p, k=False)
    p.add_argument("--solution", help="solution file; its edges are removed before simulating")

    p = sub.add_parser("classic", help="Monte Carlo random search")
    _add_model_flags(p)
    p.add_argument("--attempts", type=int, help=_help("attempts", "random solutions to evaluate"))

    p = sub.add_parser("ga", help="genetic algorithm search")
    _add_model_flags(p)
    _add_ga_flags(p)

    p = sub.add_parser("experiment", help="run a comparison campaign")
    _add_model_flags(p, k=False)
    _add_ga_flags(p)
    p.add_argument("--attempts", type=int, help=_help("attempts", "attempts / generations per search"))
    p.add_argument("--instances", help=_help("instances", "comma list of bundled names or name:graph:communities"))
    p.add_argument("--k-fractions", help=_help("k_fractions", "comma list of k fractions"))
    p.add_argument("--methods", help=_help("methods", "comma list of classic, ga-int:<pop>, ga-bin:<pop>"))
    p.add_argument("--samples", type=int, help=_help("samples", "independent samples per cell"))
    p.add_argument("--jobs", type=int, help=_help("jobs", "cells run concurrently"))
    p.add_argument("--timing", action="store_true", help="record wall_ms (makes results.csv run-dependent)")

    p = sub.add_parser("export-dot", help="write a Graphviz rendering of a solution")
    p.add_argument("--graph", required=True)
    p.add_argument("--communities")
    p.add_argument("--solution", required=True, help="solution file written by classic/ga")
    p.add_argument("--seeds", help="initially infected nodes, one per line")
    p.add_argument("--out", help="output file (default: stdout)")
    return parser


class Options:
    """Flag > config file > default lookup."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file: dict[str, str] = {}
        if getattr(args, "config", None):
            path = Path(args.config)
            if not path.is_file():
                raise CliError(f"--config: no such file {args.config}")
            raw = bench.read_keyvalue(path)
            for key, value in raw.items():
                key = ALIASES.get(key, key)
                if key not in TYPES:
                    raise CliError(f"--config {args.config}: unknown key {key!r}")
                self.file[key] = value

    def get(self, name: str):
        attr = "lambda_" if name == "lambda" else name
        value = getattr(self.args, attr, None)
        if value is not None:
            return value
        if name in self.file:
            try:
                return TYPES[name](self.file[name])
            except ValueError:
                raise CliError(f"config key {name!r}: bad value {self.file[name]!r}") from None
        return DEFAULTS.get(name)

    def given(self, name: str) -> bool:
        return getattr(self.args, name, None) is not None or name in self.file


def _need_file(opts: Options, name: str) -> str:
    path = opts.get(name)
    if not path:
        raise CliError(f"--{name} is required")
    if not Path(path).is_file():
        raise CliError(f"--{name}: no such file {path}")
    return path


def _experiment_config(opts: Options, **extra) -> ExperimentConfig:
    flag = "generations" if opts.given("generations") and not opts.given("attempts") else "attempts"
    iterations = opts.get(flag)
    if isinstance(iterations, int) and iterations < 1:
        raise CliError(f"--{flag} must be >= 1, got {iterations}")
    try:
        return ExperimentConfig(
            iterations=iterations,
            replications=opts.get("replications"),
            horizon=opts.get("t"),
            initial_fraction=opts.get("initial_fraction"),
            chi=opts.get("chi"),
            phi=opts.get("phi"),
            epsilon=opts.get("epsilon"),
            lam=opts.get("lambda"),
            crossover_rate=opts.get("crossover_rate"),
            exchange_probability=opts.get("exchange_prob"),
            mutation_rate=opts.get("mutation_rate"),
            tournament_p=opts.get("tournament_p"),
            master_seed=opts.get("seed"),
            **extra,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _load(opts: Options):
    graph_path = _need_file(opts, "graph")
    comm = opts.get("communities")
    if comm:
        if not Path(comm).is_file():
            raise CliError(f"--communities: no such file {comm}")
        return graph_path, comm, load_instance_files(graph_path, comm)
    return graph_path, None, load_graph(graph_path)


def read_solution(path) -> list[int]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                out.append(int(line.split()[0]))
    return out


def _out_dir(opts: Options) -> Path:
    d = Path(opts.get("out_dir"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_simulate(opts: Options) -> int:
    graph_path, _, graph = _load(opts)
    exp = _experiment_config(opts, k_fractions=())
    name = Path(graph_path).stem
    params, _ = derive_problem(graph, exp, 0, name)
    removed = []
    if opts.args.solution:
        removed = check_solution(graph, read_solution(opts.args.solution))
    rep_seed = int(replication_seeds(substream(exp.master_seed, bench._tag("simulate", name), 0), 1)[0])
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["t", "susceptible", "exposed", "infected"])
    w.writerows(simulate(graph, removed, params, rep_seed))
    return 0


def _single_search(opts: Options, method: str, pop: int, iterations: int) -> int:
    graph_path, _, graph = _load(opts)
    name = Path(graph_path).stem
    k_abs = opts.get("k")
    frac = None if k_abs is not None else opts.get("k_fraction")
    exp = _experiment_config(opts, k_fractions=(frac,) if frac is not None else ())
    try:
        flag = "--attempts" if method == "classic" else "--generations"
        exp = replace(exp, iterations=check_positive_int(flag, iterations))
        params, ks = derive_problem(graph, exp, 0, name)
        k = ks[frac] if k_abs is None else resolve_k(k_abs, graph.num_edges)
        if method != "classic":
            GAConfig(k, method.split("-")[1], pop, exp.iterations, exp.crossover_rate,
                     exp.exchange_probability, exp.mutation_rate, exp.tournament_p)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = _out_dir(opts)

    # same stream as sample 0 of an experiment cell, so both report identical values
    rng = bench.search_stream(exp, name, method, pop, frac if k_abs is None else f"k={k}", 0)
    result = bench.search(graph, params, k, method, pop, exp, rng)

    with open(out / "solution.txt", "w", encoding="utf-8") as fh:
        fh.write("# edge_id u v\n")
        for eid in sorted(result.best_solution):
            u, v = graph.edges[eid - 1]
            fh.write(f"{eid} {u} {v}\n")
    with open(out / "seeds.txt", "w", encoding="utf-8") as fh:
        fh.writelines(f"{v}\n" for v in sorted(params.initial_infected))
    bench.write_trace(out / "trace.csv", result.trace)
    print(f"best_value {result.best_value}")
    return 0


def cmd_classic(opts: Options) -> int:
    return _single_search(opts, "classic", 0, opts.get("attempts"))


def cmd_ga(opts: Options) -> int:
    return _single_search(opts, f"ga-{opts.get('encoding')}", opts.get("pop"), opts.get("generations"))


def cmd_experiment(opts: Options) -> int:
    try:
        instances = tuple(InstanceSpec.parse(s) for s in opts.get("instances").split(",") if s.strip())
        fractions = tuple(float(s) for s in opts.get("k_fractions").split(",") if s.strip())
        methods = parse_methods(opts.get("methods"))
    except (ValueError, KeyError) as exc:
        raise CliError(str(exc)) from None
    except FileNotFoundError as exc:
        raise CliError(str(exc)) from None
    exp = _experiment_config(opts, instances=instances, k_fractions=fractions, methods=methods,
                             samples=opts.get("samples"))
    jobs = opts.get("jobs")
    if jobs < 1:
        raise CliError("--jobs must be >= 1")
    for spec in instances:
        for p in (spec.graph_path, spec.community_path):
            if not Path(p).is_file():
                raise CliError(f"instance {spec.name}: no such file {p}")
    out = _out_dir(opts)
    total = len(bench.cells(exp))

    def progress(rec):
        log.info("%s %s k=%d sample %d -> %d", rec.instance, rec.label, rec.k, rec.sample, rec.best_value)

    log.info("%d cells -> %s", total, out)
    records = bench.run_experiment(exp, out, jobs=jobs, timing=opts.args.timing, progress=progress)
    bench.write_reports(exp, records, out)
    if exp.samples >= 2:
        sys.stdout.write((out / "summary.csv").read_text(encoding="utf-8"))
    return 0


def cmd_export_dot(opts: Options) -> int:
    args = opts.args
    for flag in ("graph", "solution", "seeds", "communities"):
        path = getattr(args, flag)
        if path and not Path(path).is_file():
            raise CliError(f"--{flag}: no such file {path}")
    graph = load_graph(args.graph)
    if args.communities:
        graph = graph.with_communities(load_communities(args.communities, graph))
    solution = check_solution(graph, read_solution(args.solution))
    seeds = read_solution(args.seeds) if args.seeds else []
    bad = [v for v in seeds if not 1 <= v <= graph.num_nodes]
    if bad:
        raise CliError(f"--seeds: nodes {bad} not in graph")
    text = bench.export_solution_dot(graph, solution, seeds, name=Path(args.graph).stem.replace("-", "_"))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "classic": cmd_classic,
    "ga": cmd_ga,
    "experiment": cmd_experiment,
    "export-dot": cmd_export_dot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        opts = Options(args)
        return COMMANDS[args.command](opts)
    except CliError as exc:
        print(f"minseis {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"minseis {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
