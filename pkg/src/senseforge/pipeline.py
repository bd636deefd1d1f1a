"""End-to-end orchestration: corpus ingestion, configuration, and the
build / label / eval-wsi / eval-rho / demo-select workflows.

Corpora arrive pre-tagged and pre-lemmatized, one sentence per line with
pipe-delimited ``surface|lemma|POS`` tokens (Penn Treebank tags; pipes in
fields escaped as ``\\|``).  Labeling appends a fourth field.
"""

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, fields
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .clustering import (CrpParams, cosine_distance, crp_cluster, kmeans_adaptive,
                         kmeans_assign, load_model, random_walk_disambiguate,
                         save_model, sense_graph_from_inventory)
from .embeddings import (ContextSpec, context_vector, default_stopwords,
                         definition_vector, example_vector, load_embeddings,
                         load_stopwords)
from .lexicon import load_inventory, senses_with_definition, senses_with_example
from .metrics import (AlignedTriple, LabeledInstances, confusion_matrix,
                      parse_alignments, read_labels_tsv, rho, wsi_report)
from .report import write_lexical_choice, write_wsi_report
from .sense_select import AttentionParams, att_scores, att_weights, avg_weights

log = logging.getLogger(__name__)

PTB_WORD_TAGS = frozenset("""
    CC CD DT EX FW IN JJ JJR JJS LS MD NN NNS NNP NNPS PDT POS PRP PRP$
    RB RBR RBS RP SYM TO UH VB VBD VBG VBN VBP VBZ WDT WP WP$ WRB
""".split())
PTB_PUNCT_TAGS = frozenset([".", ",", ":", "``", "''", "-LRB-", "-RRB-", "$", "#"])
PTB_TAGS = PTB_WORD_TAGS | PTB_PUNCT_TAGS

NOUN_TAGS = frozenset(["NN", "NNS"])
VERB_TAGS = frozenset(["VB", "VBD", "VBG", "VBN", "VBP", "VBZ"])
PROPER_TAGS = frozenset(["NNP", "NNPS"])

METHODS = ("kmeans", "crp", "graph")
INIT_MODES = ("definitions", "examples")
SELECTION_MODES = ("top", "avg_linear", "avg_logistic", "att_tanh", "att_bilinear")

AVG_SENSE_CAP = 5

MANIFEST_NAME = "manifest.json"


def wordnet_pos(tag):
    """Map a PTB tag to the inventory POS, or None for other classes."""
    if tag in NOUN_TAGS:
        return "noun"
    if tag in VERB_TAGS:
        return "verb"
    return None


class Token(NamedTuple):
    surface: str
    lemma: str
    pos: str


class LabeledToken(NamedTuple):
    surface: str
    lemma: str
    pos: str
    label: str


@dataclass
class TaggedCorpus:
    sentences: list

    def __len__(self):
        return len(self.sentences)


def _split_token(raw):
    fields_out = []
    current = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "\\" and i + 1 < len(raw) and raw[i + 1] == "|":
            current.append("|")
            i += 2
        elif ch == "|":
            fields_out.append("".join(current))
            current = []
            i += 1
        else:
            current.append(ch)
            i += 1
    fields_out.append("".join(current))
    return fields_out


def _escape(field):
    return field.replace("|", "\\|")


def _parse_sentence(line, lineno, n_fields):
    tokens = []
    for col, raw in enumerate(line.split(), 1):
        parts = _split_token(raw)
        if len(parts) != n_fields:
            raise ValueError(
                "corpus line %d, token %d: expected %d pipe-delimited fields, got %d"
                % (lineno, col, n_fields, len(parts)))
        if not parts[0] or not parts[1]:
            raise ValueError("corpus line %d, token %d: empty surface or lemma" % (lineno, col))
        tag = parts[2]
        if tag not in PTB_TAGS:
            raise ValueError("corpus line %d, token %d: unknown POS tag %r" % (lineno, col, tag))
        if tag in PROPER_TAGS:
            continue
        if n_fields == 3:
            tokens.append(Token(parts[0], parts[1].lower(), tag))
        else:
            if not parts[3]:
                raise ValueError("corpus line %d, token %d: empty label" % (lineno, col))
            tokens.append(LabeledToken(parts[0], parts[1].lower(), tag, parts[3]))
    return tokens


def load_corpus(path):
    """Parse a tagged corpus; proper-noun records (NNP/NNPS) are dropped."""
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            sentences.append(_parse_sentence(line.rstrip("\n"), lineno, 3))
    return TaggedCorpus(sentences)


def load_labeled_corpus(path):
    """Parse a labeled corpus (four fields per token)."""
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            sentences.append(_parse_sentence(line.rstrip("\n"), lineno, 4))
    return TaggedCorpus(sentences)


def load_plain_corpus(path):
    """Whitespace-tokenized target-side text, one sentence per line."""
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh]


@dataclass
class PipelineConfig:
    inventory: str = None
    embeddings: str = None
    stopwords: str = None
    corpus: str = None
    models: str = None
    method: str = "kmeans"
    init_mode: str = "definitions"
    window: int = 8
    min_cluster_size: int = 10
    kmeans_max_iters: int = 50
    crp_lambda1: float = 0.5
    crp_lambda2: float = 0.5
    crp_gamma: float = 1.0
    damping: float = 0.85
    tolerance: float = 1e-8
    max_iterations: int = 200
    selection: str = "top"
    attention_width: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError("method must be one of %s, got %r" % (METHODS, self.method))
        if self.init_mode not in INIT_MODES:
            raise ValueError("init_mode must be one of %s, got %r" % (INIT_MODES, self.init_mode))
        if self.selection not in SELECTION_MODES:
            raise ValueError(
                "selection must be one of %s, got %r" % (SELECTION_MODES, self.selection))
        ContextSpec(self.window)  # validates evenness

    @property
    def system_name(self):
        return "%s+%s" % (self.method, self.init_mode)

    def crp_params(self):
        return CrpParams(self.crp_lambda1, self.crp_lambda2, self.crp_gamma)


_CONFIG_FIELDS = None


def _config_fields():
    global _CONFIG_FIELDS
    if _CONFIG_FIELDS is None:
        _CONFIG_FIELDS = {f.name: f.type for f in fields(PipelineConfig)}
    return _CONFIG_FIELDS


def _strip_comment(line):
    out = []
    quote = None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            break
        out.append(ch)
    return "".join(out)


def _parse_value(raw, lineno):
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        return raw[1:-1]
    if raw == "true":
        return True
    if raw == "false":
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def parse_config_file(path):
    """Flat TOML-style ``key = value`` file; '#' comments allowed."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = _strip_comment(line).strip()
            if not line:
                continue
            key, sep, raw = line.partition("=")
            if not sep:
                raise ValueError("config line %d: expected 'key = value'" % lineno)
            values[key.strip()] = _parse_value(raw.strip(), lineno)
    return values


def load_config(path=None, overrides=None):
    """Config from an optional file plus overriding key/value pairs."""
    values = parse_config_file(path) if path else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    known = _config_fields()
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ValueError("unknown config keys: %s" % ", ".join(unknown))
    for key in values:
        if known[key] is float and isinstance(values[key], int):
            values[key] = float(values[key])
    return PipelineConfig(**values)


def _require(cfg, *names):
    for name in names:
        if getattr(cfg, name) is None:
            raise ValueError("config value %r is required for this command" % name)


def _load_store(cfg):
    stop = load_stopwords(cfg.stopwords) if cfg.stopwords else default_stopwords()
    return load_embeddings(cfg.embeddings, stop)


def _init_vectors(wt, init_mode, spec, store):
    """Per-sense seed vectors for clustering, skipping unusable senses."""
    if init_mode == "definitions":
        candidates = [(s, definition_vector(s, store)) for s in senses_with_definition(wt)]
    else:
        candidates = [(s, example_vector(s, wt.lemma, spec, store))
                      for s in senses_with_example(wt)]
    return [(s, v) for s, v in candidates if v is not None]


def _is_ambiguous(inv, lemma, pos):
    wt = inv.word_type(lemma, pos)
    return wt if wt is not None and len(wt.senses) >= 2 else None


def cmd_build(cfg):
    """Cluster every ambiguous word type observed in the corpus and persist
    one model per type plus a manifest.  Returns the manifest dict."""
    _require(cfg, "inventory", "embeddings", "corpus", "models")
    inv = load_inventory(cfg.inventory)
    store = _load_store(cfg)
    corpus = load_corpus(cfg.corpus)
    spec = ContextSpec(cfg.window)

    occurrences = Counter()
    contexts = defaultdict(list)
    for si, sentence in enumerate(corpus.sentences):
        lemmas = [t.lemma for t in sentence]
        for ti, tok in enumerate(sentence):
            pos = wordnet_pos(tok.pos)
            if pos is None:
                continue
            wt = _is_ambiguous(inv, tok.lemma, pos)
            if wt is None:
                continue
            occurrences[wt.key] += 1
            vec = context_vector(lemmas, ti, spec, store)
            if vec is None:
                log.info("build: token (%d, %d) %r has no usable context", si, ti, tok.lemma)
                continue
            contexts[wt.key].append(vec)

    models_dir = Path(cfg.models)
    models_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "method": cfg.method,
        "init_mode": cfg.init_mode,
        "window": cfg.window,
        "min_cluster_size": cfg.min_cluster_size,
        "seed": cfg.seed,
        "dim": store.dim,
        "models": {},
        "skipped": {},
    }
    word_types = {wt.key: wt for wt in inv.entries.values()}
    if cfg.method != "graph":
        for key in sorted(occurrences):
            if key not in contexts:
                manifest["skipped"][key] = "no usable contexts"
                log.warning("build: %s skipped, no usable contexts", key)
                continue
            wt = word_types[key]
            inits = _init_vectors(wt, cfg.init_mode, spec, store)
            if not inits:
                manifest["skipped"][key] = "no initializable senses"
                log.warning("build: %s skipped, no initializable senses", key)
                continue
            labels = ["%s.%d" % (key, i) for i in range(len(inits))]
            vectors = [v for _, v in inits]
            if cfg.method == "kmeans":
                model = kmeans_adaptive(contexts[key], vectors, labels,
                                        cfg.min_cluster_size, cfg.kmeans_max_iters,
                                        key=key, init_mode=cfg.init_mode)
            else:
                model = crp_cluster(contexts[key], vectors, labels, cfg.crp_params(),
                                    key=key, init_mode=cfg.init_mode)
            filename = key + ".json"
            save_model(model, models_dir / filename)
            manifest["models"][key] = filename

    with open(models_dir / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return manifest


def _load_manifest(cfg):
    path = Path(cfg.models) / MANIFEST_NAME
    if not path.exists():
        raise ValueError("no manifest at %s; run build first" % path)
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest["method"] != cfg.method:
        raise ValueError(
            "models were built with method %r, config says %r"
            % (manifest["method"], cfg.method))
    return manifest


def _load_models(cfg, manifest):
    models_dir = Path(cfg.models)
    return {key: load_model(models_dir / fname)
            for key, fname in manifest["models"].items()}


def cmd_label(cfg, output_path):
    """Write the 4-field labeled corpus.  Ambiguous noun/verb tokens get a
    sense label from the configured method; every other token is labeled
    with its own surface form."""
    _require(cfg, "inventory", "corpus")
    inv = load_inventory(cfg.inventory)
    corpus = load_corpus(cfg.corpus)
    stats = Counter()

    if cfg.method == "graph":
        graph = sense_graph_from_inventory(
            inv, damping=cfg.damping, tolerance=cfg.tolerance,
            max_iterations=cfg.max_iterations)
        models = None
        store = spec = None
    else:
        _require(cfg, "embeddings", "models")
        manifest = _load_manifest(cfg)
        models = _load_models(cfg, manifest)
        store = _load_store(cfg)
        spec = ContextSpec(cfg.window)
        graph = None

    with open(output_path, "w", encoding="utf-8") as out:
        for si, sentence in enumerate(corpus.sentences):
            lemmas = [t.lemma for t in sentence]
            if cfg.method == "graph":
                content = [(ti, (t.lemma, wordnet_pos(t.pos))) for ti, t in enumerate(sentence)
                           if wordnet_pos(t.pos)
                           and inv.word_type(t.lemma, wordnet_pos(t.pos)) is not None]
                content_index = {ti: j for j, (ti, _) in enumerate(content)}
                content_lemmas = [pair for _, pair in content]
            labeled = []
            for ti, tok in enumerate(sentence):
                pos = wordnet_pos(tok.pos)
                wt = _is_ambiguous(inv, tok.lemma, pos) if pos else None
                if wt is None:
                    label = tok.surface
                    stats["passthrough"] += 1
                elif cfg.method == "graph":
                    label = random_walk_disambiguate(
                        graph, inv, content_lemmas, content_index[ti])
                    stats["labeled"] += 1
                else:
                    model = models.get(wt.key)
                    if model is None:
                        label = wt.senses[0].id
                        stats["fallback_missing_model"] += 1
                        log.warning("label: token (%d, %d) %r has no model; "
                                    "using first inventory sense", si, ti, tok.lemma)
                    else:
                        vec = context_vector(lemmas, ti, spec, store)
                        if vec is None:
                            label = model.clusters[0].label
                            stats["fallback_no_context"] += 1
                            log.info("label: token (%d, %d) %r has no usable context; "
                                     "using first cluster", si, ti, tok.lemma)
                        else:
                            assigned = kmeans_assign(model, vec)
                            label = assigned.label
                            if assigned.fallback:
                                stats["fallback_zero_vector"] += 1
                                log.info("label: token (%d, %d) %r has a zero context "
                                         "vector; using first cluster", si, ti, tok.lemma)
                            else:
                                stats["labeled"] += 1
                labeled.append("%s|%s|%s|%s" % (_escape(tok.surface), _escape(tok.lemma),
                                                _escape(tok.pos), _escape(label)))
            out.write(" ".join(labeled))
            out.write("\n")
    return dict(stats)


def instance_id(sentence_index, token_index):
    return "%d.%d" % (sentence_index, token_index)


def _resolve_instance(labeled, iid):
    parts = iid.split(".")
    if len(parts) == 2 and parts[0].isdigit() and parts[1].isdigit():
        si, ti = int(parts[0]), int(parts[1])
        if si < len(labeled.sentences) and ti < len(labeled.sentences[si]):
            return labeled.sentences[si][ti]
    raise ValueError(
        "gold instance id %r does not match any labeled token "
        "(expected '<sentence>.<token>')" % iid)


def cmd_eval_wsi(cfg, labeled_path, gold_path, out_dir):
    """Score a labeled corpus against gold labels and emit the report files."""
    labeled = load_labeled_corpus(labeled_path)
    gold = read_labels_tsv(gold_path)

    rows = defaultdict(lambda: ([], [], []))
    pos_by_word = {}
    for iid, gold_label in gold.items():
        tok = _resolve_instance(labeled, iid)
        pos = wordnet_pos(tok.pos)
        if pos is None:
            raise ValueError("gold instance id %r points at a non-noun/verb token" % iid)
        key = "%s.%s" % (tok.lemma, pos)
        ids, preds, golds = rows[key]
        ids.append(iid)
        preds.append(tok.label)
        golds.append(gold_label)
        pos_by_word[key] = pos

    instances_by_word = {key: LabeledInstances(*rows[key]) for key in rows}

    cluster_counts = {}
    if cfg.method != "graph" and cfg.models:
        manifest = _load_manifest(cfg)
        models = _load_models(cfg, manifest)
        for key in instances_by_word:
            if key in models:
                cluster_counts[key] = len(models[key].clusters)
    for key in instances_by_word:
        if key not in cluster_counts:
            cluster_counts[key] = len(set(instances_by_word[key].predicted))
            log.info("eval-wsi: %s has no model; counting distinct predicted labels", key)

    report = wsi_report(instances_by_word, pos_by_word, cluster_counts)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_wsi_report(report, out_dir, cfg.system_name)
    return report


def _aligned_token(target_sentences, alignments, si, ti, what):
    targets = alignments[si].get(ti)
    if not targets:
        return None
    j = targets[0]
    if j >= len(target_sentences[si]):
        raise ValueError(
            "%s alignment line %d maps token %d to out-of-range target index %d"
            % (what, si + 1, ti, j))
    return target_sentences[si][j]


def cmd_eval_rho(cfg, source_path, system_path, baseline_path, reference_path,
                 system_align_path, baseline_align_path, reference_align_path, out_dir):
    """Lexical-choice evaluation over the ambiguous source tokens."""
    _require(cfg, "inventory")
    inv = load_inventory(cfg.inventory)
    source = load_corpus(source_path)
    sides = {
        "system": (load_plain_corpus(system_path), parse_alignments(system_align_path)),
        "baseline": (load_plain_corpus(baseline_path), parse_alignments(baseline_align_path)),
        "reference": (load_plain_corpus(reference_path), parse_alignments(reference_align_path)),
    }
    n = len(source.sentences)
    for name, (sents, aligns) in sides.items():
        if len(sents) != n:
            raise ValueError("%s corpus has %d sentences, source has %d"
                             % (name, len(sents), n))
        if len(aligns) != n:
            raise ValueError("%s alignment has %d lines, source has %d sentences"
                             % (name, len(aligns), n))

    triples = []
    for si, sentence in enumerate(source.sentences):
        for ti, tok in enumerate(sentence):
            pos = wordnet_pos(tok.pos)
            if pos is None or _is_ambiguous(inv, tok.lemma, pos) is None:
                continue
            triples.append(AlignedTriple(
                system=_aligned_token(*sides["system"], si, ti, "system"),
                baseline=_aligned_token(*sides["baseline"], si, ti, "baseline"),
                reference=_aligned_token(*sides["reference"], si, ti, "reference"),
            ))
    if not triples:
        raise ValueError("no ambiguous noun/verb tokens found in the source corpus")

    rho_result = rho(triples)
    confusion = confusion_matrix(triples)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_lexical_choice(rho_result, confusion, out_dir, cfg.system_name)
    return rho_result, confusion


def _one_hot(size, index):
    w = np.zeros(size)
    w[index] = 1.0
    return w


def cmd_demo_select(cfg, output_path):
    """Trace per-token sense weights under the configured selection mode.

    Emits one TSV row per ambiguous token with the candidate labels, the
    cosine distances of the token context to the centroids (when defined),
    and the weight vector the selection mode produces.
    """
    _require(cfg, "inventory", "embeddings", "corpus", "models")
    if cfg.method == "graph":
        raise ValueError("demo-select needs centroid models; method 'graph' has none")
    inv = load_inventory(cfg.inventory)
    manifest = _load_manifest(cfg)
    models = _load_models(cfg, manifest)
    store = _load_store(cfg)
    spec = ContextSpec(cfg.window)
    corpus = load_corpus(cfg.corpus)

    mode = cfg.selection
    params = None
    if mode.startswith("att_"):
        variant = mode.split("_", 1)[1]
        params = AttentionParams.random(variant, store.dim, store.dim,
                                        width=cfg.attention_width, seed=cfg.seed)

    def fmt(values):
        return ",".join("%.6f" % v for v in values)

    rows = 0
    with open(output_path, "w", encoding="utf-8") as out:
        out.write("sentence\tposition\tsurface\tlemma\tpos\tmode\tlabels"
                  "\tdistances\tweights\tchosen\tfallback\n")
        for si, sentence in enumerate(corpus.sentences):
            lemmas = [t.lemma for t in sentence]
            token_vecs = [store.get(lemma) for lemma in lemmas]
            for ti, tok in enumerate(sentence):
                pos = wordnet_pos(tok.pos)
                wt = _is_ambiguous(inv, tok.lemma, pos) if pos else None
                if wt is None or wt.key not in models:
                    continue
                model = models[wt.key]
                labels = model.labels
                centroids = [c.centroid for c in model.clusters]
                if mode in ("avg_linear", "avg_logistic"):
                    labels = labels[:AVG_SENSE_CAP]
                    centroids = centroids[:AVG_SENSE_CAP]
                vec = context_vector(lemmas, ti, spec, store)
                distances = None
                if vec is not None and np.linalg.norm(vec) > 0.0:
                    distances = [cosine_distance(vec, c) for c in centroids]

                fallback = False
                if mode == "top":
                    if vec is None:
                        weights = _one_hot(len(labels), 0)
                        fallback = True
                    else:
                        assigned = kmeans_assign(model, vec)
                        weights = _one_hot(len(labels), labels.index(assigned.label))
                        fallback = assigned.fallback
                elif mode in ("avg_linear", "avg_logistic"):
                    if distances is None:
                        weights = _one_hot(len(labels), 0)
                        fallback = True
                    else:
                        try:
                            weights = avg_weights(
                                distances, mode.split("_", 1)[1]).weights
                        except ValueError:
                            weights = _one_hot(len(labels), 0)
                            fallback = True
                else:
                    others = [v for i, v in enumerate(token_vecs) if i != ti and v is not None]
                    context = np.mean(others, axis=0) if others else np.zeros(store.dim)
                    weights = att_weights(att_scores(context, centroids, params)).weights
                if fallback:
                    log.info("demo-select: token (%d, %d) %r fell back to the first sense",
                             si, ti, tok.lemma)
                chosen = labels[int(np.argmax(weights))]
                out.write("%d\t%d\t%s\t%s\t%s\t%s\t%s\t%s\t%s\t%s\t%s\n" % (
                    si, ti, tok.surface, tok.lemma, tok.pos, mode, ",".join(labels),
                    fmt(distances) if distances is not None else "",
                    fmt(weights), chosen, "yes" if fallback else "no"))
                rows += 1
    return rows
