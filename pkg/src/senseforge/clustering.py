"""Adaptive sense clustering: k-means with small-cluster merging, a bounded
Chinese-restaurant-style sequential pass, and random-walk assignment over the
sense graph.

All three methods are deterministic: initialization comes from sense
definition or example vectors, never from random points, and ties always
break toward the lowest index.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

log = logging.getLogger(__name__)


def cosine_similarity(a, b):
    """Cosine of the angle between a and b; 0.0 when either is a zero vector."""
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def cosine_distance(a, b):
    return 1.0 - cosine_similarity(a, b)


@dataclass
class Cluster:
    label: str
    centroid: np.ndarray
    count: int


@dataclass
class ClusterModel:
    key: str
    init_mode: str
    dim: int
    clusters: list
    # Training-time artifacts, not persisted.
    assignments: list = field(default=None, compare=False, repr=False)
    objective_history: list = field(default=None, compare=False, repr=False)

    @property
    def labels(self):
        return [c.label for c in self.clusters]

    def to_dict(self):
        return {
            "key": self.key,
            "init_mode": self.init_mode,
            "dim": self.dim,
            "clusters": [
                {"label": c.label, "count": c.count, "centroid": [float(x) for x in c.centroid]}
                for c in self.clusters
            ],
        }

    @classmethod
    def from_dict(cls, raw):
        clusters = [
            Cluster(c["label"], np.array(c["centroid"], dtype=float), int(c["count"]))
            for c in raw["clusters"]
        ]
        return cls(raw["key"], raw["init_mode"], int(raw["dim"]), clusters)


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return ClusterModel.from_dict(json.load(fh))


class Assignment(NamedTuple):
    label: str
    fallback: bool = False


def _as_matrix(vectors, what):
    mat = np.asarray(vectors, dtype=float)
    if mat.ndim != 2:
        raise ValueError("%s must be a list of equal-length vectors" % what)
    return mat


def kmeans_adaptive(contexts, init_centroids, labels, min_cluster_size=10,
                    max_iters=50, key="", init_mode="definitions"):
    """Lloyd k-means seeded at the given centroids, then small-cluster merging.

    Assignment minimizes squared Euclidean distance and the update step takes
    the cluster mean; iteration stops when assignments stabilize or after
    ``max_iters``.  The within-cluster sum of squares is checked every
    iteration and must never increase.  Clusters that end up with fewer than
    ``min_cluster_size`` tokens are then dissolved via
    :func:`reduce_small_clusters`.
    """
    if len(contexts) == 0:
        raise ValueError("contexts must be non-empty")
    X = _as_matrix(contexts, "contexts")
    C = _as_matrix(init_centroids, "init_centroids").copy()
    if C.shape[0] != len(labels) or C.shape[0] < 1:
        raise ValueError("need one label per initial centroid, at least one")
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate cluster labels")
    if C.shape[1] != X.shape[1]:
        raise ValueError(
            "dimension mismatch: contexts are %d-d, centroids %d-d" % (X.shape[1], C.shape[1]))
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")

    n, k = X.shape[0], C.shape[0]
    x_sq = (X * X).sum(axis=1)
    prev_assign = None
    history = []
    assign = np.zeros(n, dtype=int)
    for _ in range(max_iters):
        d2 = x_sq[:, None] - 2.0 * (X @ C.T) + (C * C).sum(axis=1)[None, :]
        np.maximum(d2, 0.0, out=d2)
        assign = d2.argmin(axis=1)
        objective = float(d2[np.arange(n), assign].sum())
        if history and objective > history[-1] + 1e-9 * max(1.0, history[-1]):
            raise RuntimeError(
                "k-means objective increased: %.17g -> %.17g" % (history[-1], objective))
        history.append(objective)
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            break
        prev_assign = assign
        for i in range(k):
            members = X[assign == i]
            if len(members):  # empty clusters keep their previous centroid
                C[i] = members.mean(axis=0)

    counts = np.bincount(assign, minlength=k)
    clusters = [Cluster(labels[i], C[i].copy(), int(counts[i])) for i in range(k)]
    model = ClusterModel(key, init_mode, X.shape[1], clusters,
                         assignments=[labels[a] for a in assign],
                         objective_history=history)
    return reduce_small_clusters(model, min_cluster_size, X, list(assign))


def reduce_small_clusters(model, min_cluster_size, contexts, assignments):
    """Dissolve clusters below ``min_cluster_size``, smallest first.

    Orphaned tokens move to the surviving cluster whose centroid is nearest in
    cosine distance; surviving centroids are left as they are.  When every
    cluster is under the threshold the largest one absorbs everything.
    """
    X = _as_matrix(contexts, "contexts")
    counts = np.bincount(assignments, minlength=len(model.clusters))
    for i, cluster in enumerate(model.clusters):
        if cluster.count != counts[i]:
            raise ValueError(
                "cluster %r count %d inconsistent with assignments (%d)"
                % (cluster.label, cluster.count, counts[i]))

    survivors = [i for i, c in enumerate(model.clusters) if c.count >= min_cluster_size]
    assign = list(assignments)

    if not survivors:
        winner = max(range(len(model.clusters)), key=lambda i: (model.clusters[i].count, -i))
        total = int(counts.sum())
        merged = Cluster(model.clusters[winner].label,
                         model.clusters[winner].centroid.copy(), total)
        return ClusterModel(model.key, model.init_mode, model.dim, [merged],
                            assignments=[merged.label] * len(assign),
                            objective_history=model.objective_history)

    if len(survivors) == len(model.clusters):
        return model

    new_counts = {i: model.clusters[i].count for i in survivors}
    doomed = sorted((i for i in range(len(model.clusters)) if i not in new_counts),
                    key=lambda i: (model.clusters[i].count, i))
    for dead in doomed:
        for t in range(len(assign)):
            if assign[t] != dead:
                continue
            best = min(survivors,
                       key=lambda s: (cosine_distance(X[t], model.clusters[s].centroid), s))
            assign[t] = best
            new_counts[best] += 1

    clusters = [Cluster(model.clusters[i].label, model.clusters[i].centroid.copy(),
                        new_counts[i]) for i in survivors]
    label_of = {i: model.clusters[i].label for i in survivors}
    return ClusterModel(model.key, model.init_mode, model.dim, clusters,
                        assignments=[label_of[a] for a in assign],
                        objective_history=model.objective_history)


def kmeans_assign(model, context):
    """Label of the cosine-nearest centroid; ties break to the lowest index.

    A zero context vector cannot be compared, so it falls back to the first
    cluster with the ``fallback`` flag set.
    """
    context = np.asarray(context, dtype=float)
    if context.shape != (model.dim,):
        raise ValueError("context has shape %s, model is %d-d" % (context.shape, model.dim))
    if np.linalg.norm(context) == 0.0:
        return Assignment(model.clusters[0].label, fallback=True)
    best = min(range(len(model.clusters)),
               key=lambda i: (cosine_distance(context, model.clusters[i].centroid), i))
    return Assignment(model.clusters[best].label, fallback=False)


@dataclass(frozen=True)
class CrpParams:
    lambda1: float = 0.5
    lambda2: float = 0.5
    gamma: float = 1.0

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0 or self.gamma < 0:
            raise ValueError("CRP hyper-parameters must be non-negative")
        if self.lambda1 == self.lambda2 == self.gamma == 0:
            raise ValueError("CRP hyper-parameters cannot all be zero")


def crp_cluster(contexts, def_vectors, labels, params, key="", init_mode="definitions"):
    """One sequential pass assigning each context to its best-scoring sense.

    A sense already holding N_j tokens scores
    ``N_j * (lambda1 * s(u, d_j) + lambda2 * s(u, mu_j))`` where ``s`` is
    cosine similarity, ``d_j`` the sense vector and ``mu_j`` the running mean
    of its members; an empty sense scores ``gamma * s(u, d_j)``.  The number
    of clusters is bounded by the number of senses, so no merge step follows.
    """
    if len(contexts) == 0:
        raise ValueError("contexts must be non-empty")
    X = _as_matrix(contexts, "contexts")
    D = _as_matrix(def_vectors, "def_vectors")
    if D.shape[0] != len(labels) or D.shape[0] < 1:
        raise ValueError("need one label per sense vector, at least one")
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate sense labels")
    if D.shape[1] != X.shape[1]:
        raise ValueError(
            "dimension mismatch: contexts are %d-d, sense vectors %d-d" % (X.shape[1], D.shape[1]))

    k = D.shape[0]
    n_members = [0] * k
    sums = np.zeros_like(D)
    assign = []
    for u in X:
        best, best_score = 0, -np.inf
        for j in range(k):
            if n_members[j] > 0:
                mu = sums[j] / n_members[j]
                score = n_members[j] * (params.lambda1 * cosine_similarity(u, D[j])
                                        + params.lambda2 * cosine_similarity(u, mu))
            else:
                score = params.gamma * cosine_similarity(u, D[j])
            if score > best_score:
                best, best_score = j, score
        assign.append(best)
        n_members[best] += 1
        sums[best] += u

    clusters = [Cluster(labels[j], sums[j] / n_members[j], n_members[j])
                for j in range(k) if n_members[j] > 0]
    label_of = {j: labels[j] for j in range(k)}
    return ClusterModel(key, init_mode, X.shape[1], clusters,
                        assignments=[label_of[a] for a in assign])


@dataclass
class SenseGraph:
    """Weighted undirected graph over global sense ids."""

    nodes: list
    damping: float = 0.85
    tolerance: float = 1e-8
    max_iterations: int = 200
    _index: dict = field(default_factory=dict, repr=False)
    _src: np.ndarray = field(default=None, repr=False)
    _dst: np.ndarray = field(default=None, repr=False)
    _weight: np.ndarray = field(default=None, repr=False)
    _out_sum: np.ndarray = field(default=None, repr=False)

    @classmethod
    def from_edges(cls, nodes, edges, damping=0.85, tolerance=1e-8, max_iterations=200):
        """Build from an iterable of (u, v, weight) undirected edges."""
        if not 0.0 < damping < 1.0:
            raise ValueError("damping must lie in (0, 1)")
        if tolerance <= 0:
            raise ValueError("tolerance must be positive")
        graph = cls(list(nodes), damping, tolerance, max_iterations)
        graph._index = {node: i for i, node in enumerate(graph.nodes)}
        if len(graph._index) != len(graph.nodes):
            raise ValueError("duplicate node ids")
        src, dst, weight = [], [], []
        for u, v, w in edges:
            if u not in graph._index or v not in graph._index:
                raise ValueError("edge (%r, %r) references an unknown node" % (u, v))
            if w <= 0:
                raise ValueError("edge (%r, %r) has non-positive weight %r" % (u, v, w))
            iu, iv = graph._index[u], graph._index[v]
            src.append(iu)
            dst.append(iv)
            weight.append(float(w))
            if iu != iv:
                src.append(iv)
                dst.append(iu)
                weight.append(float(w))
        n = len(graph.nodes)
        graph._src = np.array(src, dtype=int)
        graph._dst = np.array(dst, dtype=int)
        graph._weight = np.array(weight, dtype=float)
        graph._out_sum = np.zeros(n)
        np.add.at(graph._out_sum, graph._src, graph._weight)
        return graph

    def __len__(self):
        return len(self.nodes)


def sense_graph_from_inventory(inv, weighted_edges=None, damping=0.85,
                               tolerance=1e-8, max_iterations=200):
    """Sense graph over all inventory senses.

    Edges come from the inventory neighbor lists at weight 1.0, or from an
    explicit (src, dst, weight) iterable, e.g. :func:`load_edge_weights`.
    """
    nodes = list(inv.global_index)
    if weighted_edges is None:
        seen = set()
        edges = []
        for wt in inv.entries.values():
            for sense in wt.senses:
                for nid in sense.neighbors:
                    pair = (sense.id, nid) if sense.id <= nid else (nid, sense.id)
                    if pair not in seen:
                        seen.add(pair)
                        edges.append((pair[0], pair[1], 1.0))
    else:
        edges = list(weighted_edges)
    return SenseGraph.from_edges(nodes, edges, damping, tolerance, max_iterations)


def load_edge_weights(path):
    """Parse a TSV of ``src<TAB>dst<TAB>weight`` undirected edges."""
    edges = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError("edge file line %d: expected 3 tab-separated fields" % lineno)
            src, dst, raw_w = parts
            try:
                w = float(raw_w)
            except ValueError as exc:
                raise ValueError("edge file line %d: bad weight %r" % (lineno, raw_w)) from exc
            pair = (src, dst) if src <= dst else (dst, src)
            if pair in seen:
                raise ValueError("edge file line %d: duplicate edge %r-%r" % (lineno, src, dst))
            seen.add(pair)
            edges.append((src, dst, w))
    return edges


def personalized_pagerank(graph, teleport):
    """Stationary distribution of a random walk with personalized teleporting.

    Power iteration of ``p <- (1 - d) * t + d * M^T p`` where M is the
    row-stochastic transition matrix (dangling nodes redistribute to the
    teleport vector).  Stops when the L1 change drops below the graph
    tolerance or after ``max_iterations``.
    """
    n = len(graph.nodes)
    if n == 0:
        raise ValueError("graph has no nodes")
    t = np.zeros(n)
    positive = False
    for node, w in teleport.items():
        if node not in graph._index:
            raise ValueError("teleport references unknown node %r" % (node,))
        if w < 0:
            raise ValueError("teleport weight for %r is negative" % (node,))
        if w > 0:
            positive = True
        t[graph._index[node]] = w
    if not positive:
        raise ValueError("teleport needs at least one positive weight")
    t /= t.sum()

    dangling = graph._out_sum == 0.0
    has_edges = graph._src.size > 0
    if has_edges:
        w_norm = graph._weight / graph._out_sum[graph._src]
    p = t.copy()
    d = graph.damping
    for _ in range(graph.max_iterations):
        flow = np.zeros(n)
        if has_edges:
            np.add.at(flow, graph._dst, p[graph._src] * w_norm)
        flow += p[dangling].sum() * t
        p_next = (1.0 - d) * t + d * flow
        if np.abs(p_next - p).sum() < graph.tolerance:
            p = p_next
            break
        p = p_next
    return {node: float(p[i]) for node, i in graph._index.items()}


def random_walk_disambiguate(graph, inv, sentence_content_lemmas, target_index):
    """Pick the target's most probable sense under a personalized random walk.

    Teleport mass is spread uniformly over the senses of the other content
    lemmas in the sentence (none of the target's own); with no usable context
    the teleport is uniform over the whole graph.  Ties resolve to inventory
    order.
    """
    if not 0 <= target_index < len(sentence_content_lemmas):
        raise ValueError("target_index %d out of range" % target_index)
    lemma, pos = sentence_content_lemmas[target_index]
    wt = inv.word_type(lemma, pos)
    if wt is None:
        raise ValueError("target (%s, %s) not in inventory" % (lemma, pos))
    if len(wt.senses) == 1:
        return wt.senses[0].id

    own = {s.id for s in wt.senses}
    context_senses = set()
    for i, (clemma, cpos) in enumerate(sentence_content_lemmas):
        if i == target_index:
            continue
        cwt = inv.word_type(clemma, cpos)
        if cwt is None:
            continue
        context_senses.update(s.id for s in cwt.senses if s.id not in own)
    context_senses &= set(graph.nodes)

    if context_senses:
        teleport = {sid: 1.0 for sid in context_senses}
    else:
        teleport = {node: 1.0 for node in graph.nodes}
    probs = personalized_pagerank(graph, teleport)

    best_id, best_p = wt.senses[0].id, -np.inf
    for sense in wt.senses:
        p = probs.get(sense.id, 0.0)
        if p > best_p:
            best_id, best_p = sense.id, p
    return best_id
