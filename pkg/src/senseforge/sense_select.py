"""Numeric sense-selection layer: token/sense concatenation, hard selection,
distance-weighted averaging, attention-weighted averaging, and the k-means
initialized embedding tables, with a finite-difference gradient check in
place of end-to-end training.
"""

import json
from dataclasses import dataclass

import numpy as np

NULL_LABEL = "<null>"

VARIANT_TANH = "tanh"
VARIANT_BILINEAR = "bilinear"


class SenseEmbeddingTable:
    """Ordered sense vectors per word-type key, at most ``max_senses`` each.

    Monosemous words get a single fallback entry labeled with the word
    itself (or a shared null label when ``use_null_label`` is set).
    """

    def __init__(self, max_senses=5):
        if max_senses < 1:
            raise ValueError("max_senses must be >= 1")
        self.max_senses = max_senses
        self._entries = {}

    def add(self, key, labels, vectors):
        if len(labels) != len(vectors) or not labels:
            raise ValueError("need one vector per label, at least one")
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate sense labels for %r" % key)
        labels = list(labels[:self.max_senses])
        vectors = [np.asarray(v, dtype=float) for v in vectors[:self.max_senses]]
        dims = {v.shape for v in vectors}
        if len(dims) != 1 or vectors[0].ndim != 1:
            raise ValueError("sense vectors for %r have inconsistent shapes" % key)
        self._entries[key] = (labels, vectors)

    def add_monosemous(self, word, vector, use_null_label=False):
        label = NULL_LABEL if use_null_label else word
        self.add(word, [label], [vector])

    def __contains__(self, key):
        return key in self._entries

    def __len__(self):
        return len(self._entries)

    def keys(self):
        return self._entries.keys()

    def labels(self, key):
        return list(self._entries[key][0])

    def vectors(self, key):
        return list(self._entries[key][1])

    def save(self, path):
        payload = {
            key: {"labels": labels, "vectors": [[float(x) for x in v] for v in vectors]}
            for key, (labels, vectors) in self._entries.items()
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path, max_senses=5):
        table = cls(max_senses)
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        for key, entry in payload.items():
            table.add(key, entry["labels"], [np.array(v, dtype=float) for v in entry["vectors"]])
        return table

    @classmethod
    def from_cluster_models(cls, models, max_senses=5):
        """Sense table keyed like the models, vectors = cluster centroids."""
        table = cls(max_senses)
        for key in sorted(models):
            model = models[key]
            table.add(key, model.labels, [c.centroid for c in model.clusters])
        return table


def top_sense(table, key, label):
    """The stored vector for ``label`` under ``key``, unmodified."""
    if key not in table:
        raise KeyError("no sense entry for key %r" % key)
    labels = table.labels(key)
    try:
        j = labels.index(label)
    except ValueError:
        raise KeyError("unknown sense label %r for key %r" % (label, key)) from None
    return table.vectors(key)[j]


def concat_token(word_vec, sense_vec):
    """Concatenate a token's word vector with its sense vector, word part first."""
    word_vec = np.asarray(word_vec, dtype=float)
    sense_vec = np.asarray(sense_vec, dtype=float)
    if not (np.isfinite(word_vec).all() and np.isfinite(sense_vec).all()):
        raise ValueError("non-finite input vector")
    return np.concatenate([word_vec, sense_vec])


@dataclass
class SenseWeights:
    weights: np.ndarray
    mode: str

    def __len__(self):
        return len(self.weights)


def avg_weights(distances, mode, renormalize=False):
    """Turn per-sense distances into weights by linear or logistic normalization.

    Linear: ``(1 - d_j) / sum(d_l)``, which need not sum to one and can go
    negative for d_j > 1; ``renormalize`` clamps at zero and rescales.
    Logistic: ``exp(-d_j^2) / sum(exp(-d_l^2))``.
    """
    d = np.asarray(distances, dtype=float)
    if d.ndim != 1 or d.size < 1:
        raise ValueError("distances must be a non-empty vector")
    if mode == "linear":
        denom = d.sum()
        if denom == 0.0:
            raise ValueError("linear normalization undefined: distances sum to zero")
        w = (1.0 - d) / denom
        if renormalize:
            w = np.maximum(w, 0.0)
            total = w.sum()
            w = w / total if total > 0 else np.full(d.size, 1.0 / d.size)
        return SenseWeights(w, "avg_linear")
    if mode == "logistic":
        e = np.exp(-d * d)
        return SenseWeights(e / e.sum(), "avg_logistic")
    raise ValueError("mode must be 'linear' or 'logistic', got %r" % (mode,))


def weighted_sense(weights, senses):
    """Weighted sum of sense vectors."""
    w = np.asarray(weights.weights if isinstance(weights, SenseWeights) else weights, dtype=float)
    S = np.asarray(senses, dtype=float)
    if S.ndim != 2 or len(w) != S.shape[0]:
        raise ValueError("need exactly one weight per sense vector")
    return w @ S


def att_context(sentence_embeddings, i):
    """Mean of all sentence embeddings except position ``i``."""
    E = np.asarray(sentence_embeddings, dtype=float)
    if E.ndim != 2 or E.shape[0] < 2:
        raise ValueError("need at least two embeddings to exclude one")
    if not 0 <= i < E.shape[0]:
        raise ValueError("position %d out of range" % i)
    return (E.sum(axis=0) - E[i]) / (E.shape[0] - 1)


@dataclass
class AttentionParams:
    """Scoring parameters; tanh variant uses W, U, v, bilinear only W."""

    variant: str
    W: np.ndarray
    U: np.ndarray = None
    v: np.ndarray = None

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=float)
        if self.variant == VARIANT_TANH:
            if self.U is None or self.v is None:
                raise ValueError("tanh variant requires U and v")
            self.U = np.asarray(self.U, dtype=float)
            self.v = np.asarray(self.v, dtype=float)
            if self.W.ndim != 2 or self.U.ndim != 2 or self.v.ndim != 1:
                raise ValueError("bad parameter ranks for tanh variant")
            if not (self.W.shape[0] == self.U.shape[0] == self.v.shape[0]):
                raise ValueError("attention width mismatch between W, U, v")
            finite = np.isfinite(self.W).all() and np.isfinite(self.U).all() \
                and np.isfinite(self.v).all()
        elif self.variant == VARIANT_BILINEAR:
            if self.U is not None or self.v is not None:
                raise ValueError("bilinear variant takes only W")
            if self.W.ndim != 2:
                raise ValueError("bilinear W must be a matrix")
            finite = np.isfinite(self.W).all()
        else:
            raise ValueError("variant must be 'tanh' or 'bilinear', got %r" % (self.variant,))
        if not finite:
            raise ValueError("attention parameters contain non-finite entries")

    @classmethod
    def random(cls, variant, d_c, d_s, width=100, seed=0, scale=0.1):
        """Deterministic uniform init in [-scale, scale]."""
        rng = np.random.default_rng(seed)
        if variant == VARIANT_TANH:
            return cls(variant,
                       W=rng.uniform(-scale, scale, (width, d_c)),
                       U=rng.uniform(-scale, scale, (width, d_s)),
                       v=rng.uniform(-scale, scale, width))
        return cls(variant, W=rng.uniform(-scale, scale, (d_c, d_s)))

    def to_dict(self):
        out = {"variant": self.variant, "W": [[float(x) for x in row] for row in self.W]}
        if self.variant == VARIANT_TANH:
            out["U"] = [[float(x) for x in row] for row in self.U]
            out["v"] = [float(x) for x in self.v]
        return out

    @classmethod
    def from_dict(cls, raw):
        if raw["variant"] == VARIANT_TANH:
            return cls(VARIANT_TANH, np.array(raw["W"], dtype=float),
                       np.array(raw["U"], dtype=float), np.array(raw["v"], dtype=float))
        return cls(VARIANT_BILINEAR, np.array(raw["W"], dtype=float))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def att_scores(u, senses, params):
    """Relatedness score of the context vector to each sense vector.

    tanh variant: ``v^T tanh(W u + U mu_j)``; bilinear: ``u^T W mu_j``.
    """
    u = np.asarray(u, dtype=float)
    S = np.asarray(senses, dtype=float)
    if S.ndim != 2:
        raise ValueError("senses must be a list of vectors")
    if params.variant == VARIANT_TANH:
        if params.W.shape[1] != u.shape[0] or params.U.shape[1] != S.shape[1]:
            raise ValueError("shape mismatch between inputs and tanh parameters")
        z = params.W @ u + S @ params.U.T  # (k, a) after broadcast
        return np.tanh(z) @ params.v
    if params.W.shape[0] != u.shape[0] or params.W.shape[1] != S.shape[1]:
        raise ValueError("shape mismatch between inputs and bilinear W")
    return S @ (params.W.T @ u)


def att_weights(scores):
    """Numerically stable softmax over sense scores."""
    s = np.asarray(scores, dtype=float)
    if s.ndim != 1 or s.size < 1:
        raise ValueError("scores must be a non-empty vector")
    if not np.isfinite(s).all():
        raise ValueError("scores contain non-finite entries")
    e = np.exp(s - s.max())
    return SenseWeights(e / e.sum(), "att_softmax")


def init_att_ini(word_vecs, kmeans_models, target_word_dim=500, pad_range=0.1,
                 seed=0, vocab=None, extra_sense_labels=None, max_senses=5):
    """Build word and sense embedding tables for attention-layer initialization.

    Word entries are the given vectors padded with uniform noise in
    [-pad_range, pad_range] up to ``target_word_dim``; sense entries are the
    k-means centroids padded the same way.  Words (from ``vocab``) and sense
    labels (from ``extra_sense_labels``, keyed like the models) without a
    source vector get full-range uniform vectors.  Deterministic per seed.
    """
    rng = np.random.default_rng(seed)

    def padded(vec):
        vec = np.asarray(vec, dtype=float)
        if vec.shape[0] > target_word_dim:
            raise ValueError(
                "source vector dim %d exceeds target %d" % (vec.shape[0], target_word_dim))
        if vec.shape[0] == target_word_dim:
            return vec.copy()
        pad = rng.uniform(-pad_range, pad_range, target_word_dim - vec.shape[0])
        return np.concatenate([vec, pad])

    word_table = {}
    for word in sorted(set(word_vecs) | set(vocab or ())):
        if word in word_vecs:
            word_table[word] = padded(word_vecs[word])
        else:
            word_table[word] = rng.uniform(-pad_range, pad_range, target_word_dim)

    extra_sense_labels = extra_sense_labels or {}
    sense_table = SenseEmbeddingTable(max_senses)
    for key in sorted(set(kmeans_models) | set(extra_sense_labels)):
        labels, vectors = [], []
        if key in kmeans_models:
            model = kmeans_models[key]
            for cluster in model.clusters:
                labels.append(cluster.label)
                vectors.append(padded(cluster.centroid))
        for label in extra_sense_labels.get(key, ()):
            if label not in labels:
                labels.append(label)
                vectors.append(rng.uniform(-pad_range, pad_range, target_word_dim))
        sense_table.add(key, labels, vectors)
    return word_table, sense_table


def _default_loss(m):
    return float(m @ m)


def _default_loss_grad(m):
    return 2.0 * m


def grad_check(params, u, senses, loss_fn=None, loss_grad=None, step=1e-5):
    """Compare analytic gradients of the selection layer against central
    finite differences.

    The checked composition is att_scores -> att_weights -> weighted_sense
    -> loss; gradients are taken with respect to W, U, v (tanh), u, and every
    sense vector.  Returns the maximum over all parameter entries of
    ``|analytic - numeric| / max(1, |numeric|)``.
    """
    if loss_fn is None:
        loss_fn, loss_grad = _default_loss, _default_loss_grad
    if loss_grad is None:
        raise ValueError("a custom loss_fn needs a matching loss_grad")

    u = np.asarray(u, dtype=float)
    S = np.asarray(senses, dtype=float)
    k = S.shape[0]

    def forward(W, U, v, u_, S_):
        if params.variant == VARIANT_TANH:
            p = AttentionParams(VARIANT_TANH, W, U, v)
        else:
            p = AttentionParams(VARIANT_BILINEAR, W)
        w = att_weights(att_scores(u_, S_, p))
        return loss_fn(weighted_sense(w, S_))

    # Analytic pass.
    scores = att_scores(u, S, params)
    omega = att_weights(scores).weights
    m = weighted_sense(SenseWeights(omega, "att_softmax"), S)
    g = np.asarray(loss_grad(m), dtype=float)
    q = S @ g                                     # dloss/d omega_j
    r = omega * (q - float(omega @ q))            # dloss/d score_j via softmax

    grads = {}
    if params.variant == VARIANT_TANH:
        Z = params.W @ u + S @ params.U.T         # (k, a)
        T = np.tanh(Z)
        Sj = (1.0 - T * T) * params.v             # (k, a): v * tanh'
        grads["v"] = r @ T
        grads["W"] = np.einsum("j,ja,c->ac", r, Sj, u)
        grads["U"] = np.einsum("j,ja,js->as", r, Sj, S)
        grads["u"] = params.W.T @ (r @ Sj)
        grads["senses"] = (Sj * r[:, None]) @ params.U + omega[:, None] * g[None, :]
    else:
        grads["W"] = np.einsum("j,c,js->cs", r, u, S)
        grads["u"] = params.W @ (r @ S)
        grads["senses"] = np.outer(r, params.W.T @ u) + omega[:, None] * g[None, :]

    for name, grad in grads.items():
        if not np.isfinite(np.asarray(grad)).all():
            raise ValueError("non-finite analytic gradient for %s" % name)

    # Numeric pass.
    W0 = params.W.copy()
    U0 = params.U.copy() if params.variant == VARIANT_TANH else None
    v0 = params.v.copy() if params.variant == VARIANT_TANH else None

    def numeric(array, setter):
        num = np.zeros_like(array)
        flat = array.reshape(-1)
        out = num.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + step
            hi = setter()
            flat[idx] = orig - step
            lo = setter()
            flat[idx] = orig
            out[idx] = (hi - lo) / (2.0 * step)
        return num

    max_err = 0.0

    def track(analytic, numeric_grad):
        nonlocal max_err
        a = np.asarray(analytic).reshape(-1)
        nmr = np.asarray(numeric_grad).reshape(-1)
        err = np.abs(a - nmr) / np.maximum(1.0, np.abs(nmr))
        max_err = max(max_err, float(err.max()) if err.size else 0.0)

    Wn = W0.copy()
    track(grads["W"], numeric(Wn, lambda: forward(Wn, U0, v0, u, S)))
    if params.variant == VARIANT_TANH:
        Un = U0.copy()
        track(grads["U"], numeric(Un, lambda: forward(W0, Un, v0, u, S)))
        vn = v0.copy()
        track(grads["v"], numeric(vn, lambda: forward(W0, U0, vn, u, S)))
    un = u.copy()
    track(grads["u"], numeric(un, lambda: forward(W0, U0, v0, un, S)))
    Sn = S.copy()
    track(grads["senses"], numeric(Sn, lambda: forward(W0, U0, v0, u, Sn)))
    return max_err
