"""Clustering and lexical-choice evaluation.

Intrinsic side: V-score (harmonic mean of homogeneity and completeness,
natural-log entropies), the unsupervised paired F-score over instance pairs,
their per-category averages, and the mean cluster count.  Extrinsic side:
the net lexical improvement coefficient rho and the 2x2 system-vs-baseline
confusion matrix, both over word-aligned token triples.
"""

import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple


@dataclass
class LabeledInstances:
    ids: list
    predicted: list
    gold: list

    def __post_init__(self):
        if not (len(self.ids) == len(self.predicted) == len(self.gold)):
            raise ValueError("ids, predicted, and gold must have equal lengths")
        if any(not lab for lab in self.predicted) or any(not lab for lab in self.gold):
            raise ValueError("labels must be non-empty")

    def __len__(self):
        return len(self.ids)


class VScore(NamedTuple):
    homogeneity: float
    completeness: float
    v: float


class PairedF1(NamedTuple):
    precision: float
    recall: float
    f1: float


def _entropy(counts, n):
    return -sum(c / n * math.log(c / n) for c in counts if c)


def v_score(data):
    """Homogeneity, completeness, and their harmonic mean.

    Homogeneity is 1 - H(gold|pred)/H(gold) (1.0 when the gold labeling has
    zero entropy), completeness the converse, and v is 0 when both are 0.
    """
    n = len(data)
    if n < 1:
        raise ValueError("need at least one instance")
    gold_counts = Counter(data.gold)
    pred_counts = Counter(data.predicted)
    joint = Counter(zip(data.predicted, data.gold))

    h_gold = _entropy(gold_counts.values(), n)
    h_pred = _entropy(pred_counts.values(), n)
    h_gold_given_pred = -sum(
        c / n * math.log(c / pred_counts[p]) for (p, _), c in joint.items() if c)
    h_pred_given_gold = -sum(
        c / n * math.log(c / gold_counts[g]) for (_, g), c in joint.items() if c)

    homogeneity = 1.0 if h_gold == 0.0 else 1.0 - h_gold_given_pred / h_gold
    completeness = 1.0 if h_pred == 0.0 else 1.0 - h_pred_given_gold / h_pred
    if homogeneity + completeness == 0.0:
        v = 0.0
    else:
        v = 2.0 * homogeneity * completeness / (homogeneity + completeness)
    return VScore(homogeneity, completeness, v)


def _pairs(counts):
    return sum(c * (c - 1) // 2 for c in counts)


def paired_f1(data):
    """Precision, recall, and F1 over co-clustered instance pairs.

    A pair counts as true positive when it shares both the predicted and the
    gold label.  Empty denominators yield 0 by convention.
    """
    if len(data) < 1:
        raise ValueError("need at least one instance")
    same_pred = _pairs(Counter(data.predicted).values())
    same_gold = _pairs(Counter(data.gold).values())
    both = _pairs(Counter(zip(data.predicted, data.gold)).values())

    precision = both / same_pred if same_pred else 0.0
    recall = both / same_gold if same_gold else 0.0
    if precision + recall == 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return PairedF1(precision, recall, f1)


@dataclass
class CategoryScores:
    v: float
    f1: float
    average: float
    instances: int


@dataclass
class WsiReport:
    all: CategoryScores
    nouns: CategoryScores
    verbs: CategoryScores
    mean_clusters: float

    def to_dict(self):
        def cat(c):
            return {"v_score": c.v, "f1": c.f1, "average": c.average, "instances": c.instances}
        return {
            "all": cat(self.all),
            "nouns": cat(self.nouns),
            "verbs": cat(self.verbs),
            "mean_clusters": self.mean_clusters,
        }


def _category(word_keys, instances_by_word):
    """Instance-weighted mean of the per-word V and F1 scores."""
    total = sum(len(instances_by_word[k]) for k in word_keys)
    if total == 0:
        return CategoryScores(0.0, 0.0, 0.0, 0)
    v_sum = 0.0
    f1_sum = 0.0
    for k in word_keys:
        data = instances_by_word[k]
        v_sum += len(data) * v_score(data).v
        f1_sum += len(data) * paired_f1(data).f1
    v = v_sum / total
    f1 = f1_sum / total
    return CategoryScores(v, f1, (v + f1) / 2.0, total)


def wsi_report(instances_by_word, pos_by_word, cluster_counts):
    """Per-category WSI scores plus the mean adapted cluster count.

    ``instances_by_word`` maps a word key to its LabeledInstances,
    ``pos_by_word`` tags each key noun or verb, and ``cluster_counts`` gives
    the number of induced clusters per word type (averaged unweighted).
    """
    for key in instances_by_word:
        if pos_by_word.get(key) not in ("noun", "verb"):
            raise ValueError("word %r is not tagged noun or verb" % (key,))
    keys = sorted(instances_by_word)
    noun_keys = [k for k in keys if pos_by_word[k] == "noun"]
    verb_keys = [k for k in keys if pos_by_word[k] == "verb"]
    mean_clusters = (sum(cluster_counts.values()) / len(cluster_counts)
                     if cluster_counts else 0.0)
    return WsiReport(
        all=_category(keys, instances_by_word),
        nouns=_category(noun_keys, instances_by_word),
        verbs=_category(verb_keys, instances_by_word),
        mean_clusters=mean_clusters,
    )


class AlignedTriple(NamedTuple):
    """Aligned target tokens for one source token: None marks no alignment."""

    system: str
    baseline: str
    reference: str


class RhoResult(NamedTuple):
    n_improved: int
    n_degraded: int
    t: int
    rho: float


def rho(triples):
    """Net lexical improvement (improved minus degraded, over all tokens).

    A token counts as improved when the system output matches the reference
    and the baseline does not, degraded in the converse case.  Tokens with no
    reference alignment stay in the denominator but in neither count.
    """
    t = len(triples)
    if t < 1:
        raise ValueError("need at least one aligned triple")
    n_improved = 0
    n_degraded = 0
    for tr in triples:
        if tr.reference is None:
            continue
        sys_ok = tr.system == tr.reference
        base_ok = tr.baseline == tr.reference
        if sys_ok and not base_ok:
            n_improved += 1
        elif base_ok and not sys_ok:
            n_degraded += 1
    return RhoResult(n_improved, n_degraded, t, (n_improved - n_degraded) / t)


class Confusion(NamedTuple):
    """2x2 counts; first letter = system, second = baseline (C/I = correct
    or incorrect with respect to the reference)."""

    cc: int
    ci: int
    ic: int
    ii: int


def confusion_matrix(triples):
    """System-vs-baseline confusion counts over reference-aligned triples."""
    cc = ci = ic = ii = 0
    for tr in triples:
        if tr.reference is None:
            continue
        sys_ok = tr.system == tr.reference
        base_ok = tr.baseline == tr.reference
        if sys_ok and base_ok:
            cc += 1
        elif sys_ok:
            ci += 1
        elif base_ok:
            ic += 1
        else:
            ii += 1
    return Confusion(cc, ci, ic, ii)


def read_labels_tsv(path):
    """Parse an ``instance_id<TAB>label`` file into an ordered dict."""
    labels = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ValueError("labels line %d: expected 'id<TAB>label'" % lineno)
            if parts[0] in labels:
                raise ValueError("labels line %d: duplicate instance id %r" % (lineno, parts[0]))
            labels[parts[0]] = parts[1]
    return labels


def parse_alignments(path):
    """Parse Pharaoh-format alignments, one sentence pair per line.

    Each line holds space-separated ``i-j`` pairs (0-based source-target
    indices).  Returns, per sentence, a map from source index to the sorted
    list of aligned target indices.
    """
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            pairs = {}
            for chunk in line.split():
                src, sep, dst = chunk.partition("-")
                if not sep or not src.isdigit() or not dst.isdigit():
                    raise ValueError(
                        "alignment line %d: bad pair %r (expected i-j)" % (lineno, chunk))
                pairs.setdefault(int(src), []).append(int(dst))
            for targets in pairs.values():
                targets.sort()
            sentences.append(pairs)
    return sentences
