"""Topological metric distributions and distribution distances.

Seventeen metric families are collected as empirical sample lists: four per
snapshot, contact duration per node pair, eight per wall-clock hour, and
four on the full aggregated projection. Reports from two graphs are compared
with KS, Jensen-Shannon, Kullback-Leibler and earth-mover distances.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import networkx as nx
import numpy as np

from .tempgraph import AggregatedGraph, TemporalGraph, aggregate, hour_slices

SNAPSHOT_METRICS = ("density", "interacting_individuals", "new_conversations",
                    "connected_components")
HOUR_METRICS = ("s_metric", "clustering", "assortativity", "avg_shortest_path",
                "modularity", "hour_betweenness_w", "hour_betweenness_u",
                "hour_closeness")
AGG_METRICS = ("agg_betweenness_w", "agg_betweenness_u", "agg_closeness",
               "edge_strength")

METRIC_KINDS: dict[str, str] = {
    "density": "per-snapshot",
    "interacting_individuals": "per-snapshot",
    "new_conversations": "per-snapshot",
    "connected_components": "per-snapshot",
    "contact_duration": "per-edge",
    "s_metric": "per-hour",
    "clustering": "per-hour",
    "assortativity": "per-hour",
    "avg_shortest_path": "per-hour",
    "modularity": "per-hour",
    "hour_betweenness_w": "per-hour",
    "hour_betweenness_u": "per-hour",
    "hour_closeness": "per-hour",
    "agg_betweenness_w": "per-node",
    "agg_betweenness_u": "per-node",
    "agg_closeness": "per-node",
    "edge_strength": "per-edge",
}

DISTANCE_NAMES = ("ks", "js", "kl", "emd")


@dataclass
class MetricReport:
    """Empirical sample lists per metric, plus convention metadata."""

    samples: dict[str, list[float]]
    metadata: dict[str, str] = field(default_factory=lambda: {
        "density_denominator": "all-nodes",
        "connected_components": "isolated-nodes-excluded",
    })


@dataclass
class DistanceReport:
    """One value per (metric, distance kind); NaN when a sample list is empty."""

    values: dict[tuple[str, str], float]
    distances: tuple[str, ...] = DISTANCE_NAMES

    @property
    def metrics(self) -> tuple[str, ...]:
        return tuple(METRIC_KINDS)


def _components(adjacency: dict[int, tuple[int, ...]]) -> int:
    """Connected components among nodes that have at least one edge."""
    seen: set[int] = set()
    count = 0
    for start in adjacency:
        if start in seen:
            continue
        count += 1
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            for v in adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
    return count


def snapshot_metrics(g: TemporalGraph) -> dict[str, list[float]]:
    """Per-layer density, active node count, new edges, component count.

    Density uses all N nodes in the denominator; new_conversations compares
    each layer with its predecessor, so it has m-1 samples.
    """
    if g.n_snapshots < 1:
        raise ValueError("need at least one snapshot")
    n = g.node_count
    possible = n * (n - 1) / 2
    out: dict[str, list[float]] = {name: [] for name in SNAPSHOT_METRICS}
    prev: frozenset = frozenset()
    for t, snap in enumerate(g.snapshots):
        out["density"].append(snap.n_edges / possible if possible else 0.0)
        out["interacting_individuals"].append(float(len(snap.active_nodes)))
        out["connected_components"].append(float(_components(snap.adjacency)))
        if t >= 1:
            out["new_conversations"].append(float(len(snap.edges - prev)))
        prev = snap.edges
    return out


def contact_durations(g: TemporalGraph) -> list[float]:
    """Mean length of maximal consecutive-presence runs, one value per pair."""
    runs: dict[tuple[int, int], list[int]] = {}
    open_runs: dict[tuple[int, int], int] = {}
    for snap in g.snapshots:
        ended = [e for e in open_runs if e not in snap.edges]
        for e in ended:
            runs.setdefault(e, []).append(open_runs.pop(e))
        for e in snap.edges:
            open_runs[e] = open_runs.get(e, 0) + 1
    for e, length in open_runs.items():
        runs.setdefault(e, []).append(length)
    return [sum(r) / len(r) for _, r in sorted(runs.items())]


def _hour_nx(agg: AggregatedGraph) -> nx.Graph:
    graph = nx.Graph()
    for (i, j), w in agg.weights.items():
        graph.add_edge(i, j, weight=w, distance=1.0 / w)
    return graph


def _degree_variance_zero(graph: nx.Graph) -> bool:
    degrees = {d for _, d in graph.degree()}
    return len(degrees) <= 1


def hour_metrics(g: TemporalGraph, louvain_seed: int = 0) -> dict[str, list[float]]:
    """One value per nonempty hour slice, computed on its aggregated graph.

    Assortativity is skipped (not zero-filled) for hours with zero degree
    variance; centralities are averaged over the hour's active nodes, with
    weighted betweenness using edge distance 1/weight.
    """
    out: dict[str, list[float]] = {name: [] for name in HOUR_METRICS}
    for agg in hour_slices(g):
        if agg.n_edges == 0:
            continue
        graph = _hour_nx(agg)
        degrees = dict(graph.degree())
        out["s_metric"].append(float(sum(degrees[i] * degrees[j]
                                         for i, j in graph.edges())))
        out["clustering"].append(float(nx.transitivity(graph)))
        if not _degree_variance_zero(graph):
            r = nx.degree_assortativity_coefficient(graph)
            if not math.isnan(r):
                out["assortativity"].append(float(r))
        largest = max(nx.connected_components(graph), key=len)
        out["avg_shortest_path"].append(
            float(nx.average_shortest_path_length(graph.subgraph(largest))))
        communities = nx.community.louvain_communities(
            graph, weight="weight", seed=louvain_seed)
        out["modularity"].append(
            float(nx.community.modularity(graph, communities, weight="weight")))
        bw = nx.betweenness_centrality(graph, weight="distance", normalized=True)
        out["hour_betweenness_w"].append(float(sum(bw.values()) / len(bw)))
        bu = nx.betweenness_centrality(graph, normalized=True)
        out["hour_betweenness_u"].append(float(sum(bu.values()) / len(bu)))
        cl = nx.closeness_centrality(graph)
        out["hour_closeness"].append(float(sum(cl.values()) / len(cl)))
    return out


def aggregated_metrics(g: TemporalGraph) -> dict[str, list[float]]:
    """Per-node centralities and per-edge strength on the full projection."""
    agg = aggregate(g)
    out: dict[str, list[float]] = {name: [] for name in AGG_METRICS}
    if agg.n_edges == 0:
        return out
    graph = _hour_nx(agg)
    bw = nx.betweenness_centrality(graph, weight="distance", normalized=True)
    bu = nx.betweenness_centrality(graph, normalized=True)
    cl = nx.closeness_centrality(graph)
    nodes = sorted(graph.nodes())
    out["agg_betweenness_w"] = [float(bw[u]) for u in nodes]
    out["agg_betweenness_u"] = [float(bu[u]) for u in nodes]
    out["agg_closeness"] = [float(cl[u]) for u in nodes]
    out["edge_strength"] = [float(w) for _, w in sorted(agg.weights.items())]
    return out


def compute_report(g: TemporalGraph, louvain_seed: int = 0) -> MetricReport:
    """All seventeen metric distributions for one graph."""
    samples: dict[str, list[float]] = {}
    samples.update(snapshot_metrics(g))
    samples["contact_duration"] = contact_durations(g)
    samples.update(hour_metrics(g, louvain_seed=louvain_seed))
    samples.update(aggregated_metrics(g))
    return MetricReport(samples={name: samples[name] for name in METRIC_KINDS})


def ks_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b|."""
    if not len(a) or not len(b):
        raise ValueError("ks_distance requires nonempty samples")
    xa, xb = sorted(a), sorted(b)
    na, nb = len(xa), len(xb)
    best = 0.0
    for x in set(xa).union(xb):
        diff = abs(bisect_right(xa, x) / na - bisect_right(xb, x) / nb)
        if diff > best:
            best = diff
    return best


_N_BINS = 100
_EPS = 1e-10


def _smoothed_histograms(a: Sequence[float],
                         b: Sequence[float]) -> tuple[np.ndarray, np.ndarray] | None:
    """Shared-support histograms with additive smoothing; None when the
    joint range is a single point (distributions then coincide)."""
    if not len(a) or not len(b):
        raise ValueError("divergence requires nonempty samples")
    lo = min(min(a), min(b))
    hi = max(max(a), max(b))
    if lo == hi:
        return None
    edges = np.linspace(lo, hi, _N_BINS + 1)
    ca, _ = np.histogram(a, bins=edges)
    cb, _ = np.histogram(b, bins=edges)
    p = (ca + _EPS) / (ca.sum() + _N_BINS * _EPS)
    q = (cb + _EPS) / (cb.sum() + _N_BINS * _EPS)
    return p, q


def kl_divergence(a: Sequence[float], b: Sequence[float]) -> float:
    """KL(p_a || p_b) on smoothed shared-support histograms, natural log."""
    hists = _smoothed_histograms(a, b)
    if hists is None:
        return 0.0
    p, q = hists
    return float(np.sum(p * np.log(p / q)))


def js_divergence(a: Sequence[float], b: Sequence[float]) -> float:
    """Jensen-Shannon divergence (natural log, in [0, ln 2])."""
    hists = _smoothed_histograms(a, b)
    if hists is None:
        return 0.0
    p, q = hists
    m = (p + q) / 2.0
    return float(0.5 * np.sum(p * np.log(p / m)) + 0.5 * np.sum(q * np.log(q / m)))


def emd(a: Sequence[float], b: Sequence[float]) -> float:
    """1-D earth-mover distance: integral of |F_a - F_b| between sorted samples."""
    if not len(a) or not len(b):
        raise ValueError("emd requires nonempty samples")
    xa = np.sort(np.asarray(a, dtype=float))
    xb = np.sort(np.asarray(b, dtype=float))
    pooled = np.sort(np.concatenate([xa, xb]))
    deltas = np.diff(pooled)
    if not deltas.size:
        return 0.0
    fa = np.searchsorted(xa, pooled[:-1], side="right") / len(xa)
    fb = np.searchsorted(xb, pooled[:-1], side="right") / len(xb)
    return float(np.sum(np.abs(fa - fb) * deltas))


DISTANCE_FUNCS = {
    "ks": ks_distance,
    "js": js_divergence,
    "kl": kl_divergence,
    "emd": emd,
}


def compare(g_orig: TemporalGraph, g_gen: TemporalGraph,
            distances: Iterable[str] = DISTANCE_NAMES,
            louvain_seed: int = 0) -> DistanceReport:
    """All requested distances for all seventeen metrics, original first
    (KL reads as information lost approximating the original by the
    surrogate). Empty sample lists yield NaN entries, keeping the report
    shape fixed."""
    distances = tuple(distances)
    for name in distances:
        if name not in DISTANCE_FUNCS:
            raise ValueError(f"unknown distance {name!r}")
    ra = compute_report(g_orig, louvain_seed=louvain_seed)
    rb = compute_report(g_gen, louvain_seed=louvain_seed)
    values: dict[tuple[str, str], float] = {}
    for metric in METRIC_KINDS:
        sa = ra.samples[metric]
        sb = rb.samples[metric]
        for name in distances:
            if not sa or not sb:
                values[(metric, name)] = math.nan
            else:
                values[(metric, name)] = DISTANCE_FUNCS[name](sa, sb)
    return DistanceReport(values=values, distances=distances)


def write_distances_csv(report: DistanceReport, sink: IO[str]) -> None:
    writer = csv.writer(sink)
    writer.writerow(["metric", "kind", *report.distances])
    for metric in METRIC_KINDS:
        row = [metric, METRIC_KINDS[metric]]
        for name in report.distances:
            value = report.values.get((metric, name), math.nan)
            row.append("" if math.isnan(value) else f"{value:.10g}")
        writer.writerow(row)


def write_samples_csv(report: MetricReport, sink: IO[str]) -> None:
    writer = csv.writer(sink)
    writer.writerow(["metric", "index", "value"])
    for metric, values in report.samples.items():
        for idx, value in enumerate(values):
            writer.writerow([metric, idx, f"{value:.10g}"])
