import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_graph
from minseis import bench
from minseis.bench import (ExperimentConfig, InstanceSpec, RunRecord, cells, derive_problem,
                           export_solution_dot, parse_methods, read_keyvalue, read_results,
                           run_experiment, scalability_metric, summarize)
from minseis.netio import write_graph
from minseis.validation import ceil_fraction, resolve_k, round_half_up


@pytest.fixture
def instance(tmp_path, small_graph):
    g = tmp_path / "tri.net"
    c = tmp_path / "tri.com"
    write_graph(small_graph, g)
    c.write_text("".join(f"{v} {k}\n" for v, k in enumerate(small_graph.community, 1)))
    return InstanceSpec("tri", str(g), str(c))


def quick(instance, **kw):
    base = dict(instances=(instance,), k_fractions=(0.3,), methods=(("classic", 0),), samples=2,
                iterations=3, replications=2, horizon=15)
    base.update(kw)
    return ExperimentConfig(**base)


# --------------------------------------------------------------- arithmetic

def test_strike_sized_problem():
    # same node and edge counts as the strike network; only the arithmetic matters here
    g = make_graph(24, [(u, v) for u in range(1, 25) for v in range(u + 1, 25)][:38])
    params, ks = derive_problem(g, ExperimentConfig(), 0, "strike")
    assert len(params.initial_infected) == 3
    assert ks == {0.1: 4, 0.3: 11, 0.5: 19}


def test_zero_fraction_gives_empty_solutions(small_graph):
    _, ks = derive_problem(small_graph, ExperimentConfig(k_fractions=(0.0,)), 0)
    assert ks == {0.0: 0}


@pytest.mark.parametrize("f, total, half_up, ceil", [
    (0.1, 38, 4, 4), (0.3, 38, 11, 12), (0.5, 38, 19, 19), (0.5, 5, 3, 3),
    (0.25, 10, 3, 3), (0.1, 24, 2, 3), (0.0, 10, 0, 0), (1.0, 7, 7, 7),
])
def test_rounding_rules(f, total, half_up, ceil):
    assert round_half_up(f, total) == half_up
    assert ceil_fraction(f, total) == ceil


def test_resolve_k():
    assert resolve_k(3, 10) == 3
    assert resolve_k(0.25, 10) == 3
    for bad in (11, -1, 1.5, True, "3"):
        with pytest.raises(ValueError):
            resolve_k(bad, 10)


def test_seed_sets_shared_across_methods(small_graph):
    cfg = ExperimentConfig()
    a, _ = derive_problem(small_graph, cfg, 4, "x")
    b, _ = derive_problem(small_graph, cfg, 4, "x")
    assert a.initial_infected == b.initial_infected
    draws = {derive_problem(small_graph, cfg, s, "x")[0].initial_infected for s in range(20)}
    assert len(draws) > 1


def test_full_protocol_cell_count():
    specs = tuple(InstanceSpec(f"net{i}", "g", "c") for i in range(10))
    cfg = ExperimentConfig(instances=specs)
    grid = cells(cfg)
    assert len(grid) == 10 * 3 * 5 * 10 == 1500
    assert len({c.key for c in grid}) == 1500


@pytest.mark.parametrize("bad", [
    dict(k_fractions=(1.5,)), dict(samples=0), dict(iterations=0), dict(chi=2.0),
    dict(initial_fraction=-0.1), dict(master_seed=-1),
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        ExperimentConfig(**bad)


def test_parse_methods():
    assert parse_methods("classic,ga-int:10,ga-bin") == (("classic", 0), ("ga-int", 10), ("ga-bin", 100))
    for bad in ("", "hill", "ga-int:1", "ga-bin:x"):
        with pytest.raises(ValueError):
            parse_methods(bad)


def test_instance_spec_parse(instance):
    assert InstanceSpec.parse(str(instance)) == instance
    assert InstanceSpec.parse("karate").name == "karate"
    with pytest.raises(ValueError):
        InstanceSpec.parse("a:b")


# --------------------------------------------------------------- campaigns

def test_two_samples(instance):
    recs = run_experiment(quick(instance))
    assert [r.sample for r in recs] == [0, 1]
    assert all(len(r.trace) == 3 and r.k == 2 for r in recs)


def test_resume_computes_only_missing(instance, tmp_path):
    out = tmp_path / "run"
    first = run_experiment(quick(instance, samples=1), out)
    seen = []
    both = run_experiment(quick(instance), out, progress=seen.append)
    assert [r.sample for r in seen] == [1]
    assert both[0] == first[0]
    fresh = run_experiment(quick(instance), tmp_path / "fresh")
    assert [(r.key, r.best_value, r.trace) for r in both] == [(r.key, r.best_value, r.trace) for r in fresh]
    assert (out / "results.csv").read_bytes() == (tmp_path / "fresh" / "results.csv").read_bytes()


def test_results_round_trip(instance, tmp_path):
    recs = run_experiment(quick(instance, methods=(("classic", 0), ("ga-int", 4))), tmp_path)
    back = read_results(tmp_path / "results.csv", tmp_path / "traces")
    assert [(r.key, r.k, r.best_value, r.trace) for r in back] == \
           [(r.key, r.k, r.best_value, r.trace) for r in recs]
    header = (tmp_path / "results.csv").read_text().splitlines()[0]
    assert header == "instance,method,pop_size,k_fraction,k,sample,best_value,wall_ms"


def test_parallel_matches_serial(instance, tmp_path):
    cfg = quick(instance, methods=(("classic", 0), ("ga-bin", 4)), k_fractions=(0.1, 0.3))
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b", jobs=2)
    for name in ("results.csv", "traces/tri__ga-bin-4__k0.1__s1.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_reports(instance, tmp_path):
    cfg = quick(instance)
    recs = run_experiment(cfg, tmp_path)
    bench.write_reports(cfg, recs, tmp_path)
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[0] == "instance,method,k_fraction,mean,stderr"
    assert summary[1].startswith("tri,classic,0.3,")
    scal = (tmp_path / "scalability.csv").read_text().splitlines()
    assert scal[1].startswith("tri,6,7,classic,0.3,")


# --------------------------------------------------------------- statistics

def rec(value, sample=0, method="classic", pop=0, trace=None, instance="x"):
    return RunRecord(instance, method, pop, 0.1, 1, sample, value, tuple(trace or (value,)))


def test_summary_examples():
    row, = summarize([rec(1, 0), rec(2, 1), rec(3, 2)])
    assert row.mean == 2
    assert row.stderr == pytest.approx(1 / math.sqrt(3))
    assert row.stderr == pytest.approx(0.5774, abs=1e-4)
    row, = summarize([rec(5, s) for s in range(4)])
    assert (row.mean, row.stderr) == (5, 0)
    with pytest.raises(ValueError):
        summarize([rec(1)])


def test_summary_groups_by_method_label():
    rows = summarize([rec(1, 0), rec(3, 1), rec(2, 0, "ga-bin", 10), rec(2, 1, "ga-bin", 10),
                      rec(9, 0, "ga-bin", 100), rec(7, 1, "ga-bin", 100)])
    assert [r.method for r in rows] == ["classic", "ga-bin-10", "ga-bin-100"]


@given(st.lists(st.integers(0, 500), min_size=2, max_size=12), st.randoms())
def test_summary_permutation_invariant(values, rnd):
    records = [rec(v, i) for i, v in enumerate(values)]
    shuffled = records[:]
    rnd.shuffle(shuffled)
    a, = summarize(records)
    b, = summarize(shuffled)
    assert a.mean == pytest.approx(b.mean)
    assert a.stderr == pytest.approx(b.stderr)


def test_scalability_examples():
    key = ("x", "classic", 0.1)
    m = scalability_metric([rec(24, trace=[24] * 300)], 24, 300)
    assert m[key] == pytest.approx(1.0)
    assert scalability_metric([rec(0, trace=[0] * 300)], 24, 300)[key] == 0
    # averaged over samples
    m = scalability_metric([rec(2, 0, trace=[2, 2]), rec(4, 1, trace=[4, 4])], {"x": 2}, 2)
    assert m[key] == pytest.approx(1.5)
    with pytest.raises(ValueError):
        scalability_metric([rec(1, trace=[1] * 5)], 24, 300)


# --------------------------------------------------------------- rendering

def test_dot_plain(small_graph):
    text = export_solution_dot(small_graph, (), ())
    assert text.startswith("graph G {")
    assert "red" not in text
    assert text.count(" -- ") == small_graph.num_edges


def test_dot_all_removed(small_graph):
    text = export_solution_dot(small_graph, range(1, 8))
    edge_lines = [l for l in text.splitlines() if " -- " in l]
    assert len(edge_lines) == 7 and all('color="red"' in l for l in edge_lines)


def test_dot_one_edge_one_node():
    g = make_graph(3, [(1, 2), (2, 3)])
    text = export_solution_dot(g, {1}, {1})
    marked = [l for l in text.splitlines() if "red" in l]
    assert len(marked) == 2
    assert any(l.strip().startswith("1 -- 2") for l in marked)
    assert any(l.strip().startswith("1 [") for l in marked)


def test_read_keyvalue(tmp_path):
    p = tmp_path / "cfg.txt"
    p.write_text("# comment\nk-fraction = 0.3\n\nseed=4  # trailing\n")
    assert read_keyvalue(p) == {"k_fraction": "0.3", "seed": "4"}
    p.write_text("oops\n")
    with pytest.raises(ValueError, match=":1:"):
        read_keyvalue(p)


def test_benchmark_protocol_defaults(tmp_path, monkeypatch):
    from minseis.netio import instance_manifest

    for name in instance_manifest():
        (tmp_path / f"{name}.net").write_text("*Vertices 2\n*Edges\n1 2\n")
        (tmp_path / f"{name}.com").write_text("1 1\n2 1\n")
    monkeypatch.setenv("MINSEIS_DATA", str(tmp_path))
    cfg = ExperimentConfig.benchmark_protocol()
    assert len(cfg.instances) == 10
    assert (cfg.k_fractions, cfg.samples, cfg.iterations, cfg.replications, cfg.horizon) == \
           ((0.1, 0.3, 0.5), 10, 300, 20, 100)
    assert (cfg.chi, cfg.phi, cfg.epsilon, cfg.lam, cfg.initial_fraction) == (0.15, 0.05, 2, 4, 0.1)
    assert len(cells(cfg)) == 1500
