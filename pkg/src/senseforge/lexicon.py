"""Sense inventory: word types, their senses, and the sense graph neighbors.

The inventory is a UTF-8 JSON Lines file, one word type per line:

    {"lemma": "rock", "pos": "noun",
     "senses": [{"id": "rock.n.01",
                 "definition": ["a", "lump", "of", "stone"],
                 "examples": [["he", "threw", "a", "rock"]],
                 "neighbors": ["stone.n.01"]}]}

Senses are listed most-frequent first; ``definition``, ``examples`` and
``neighbors`` may be empty.  Only noun and verb entries are accepted.
"""

import json
from dataclasses import dataclass, field

POS_VALUES = ("noun", "verb")


@dataclass(frozen=True)
class Sense:
    id: str
    definition: tuple = ()
    examples: tuple = ()
    neighbors: tuple = ()

    def has_definition(self):
        return len(self.definition) > 0

    def has_example(self):
        return len(self.examples) > 0


@dataclass(frozen=True)
class WordType:
    lemma: str
    pos: str
    senses: tuple

    @property
    def key(self):
        """Stable string key, e.g. ``rock.noun``."""
        return "%s.%s" % (self.lemma, self.pos)


@dataclass
class SenseInventory:
    entries: dict
    global_index: dict = field(default_factory=dict, compare=False, repr=False)

    def word_type(self, lemma, pos):
        return self.entries.get((lemma, pos))

    def __len__(self):
        return len(self.entries)


def _token_list(raw, what, lineno):
    if not isinstance(raw, list):
        raise ValueError("inventory line %d: %s must be a list" % (lineno, what))
    for tok in raw:
        if not isinstance(tok, str) or not tok:
            raise ValueError(
                "inventory line %d: %s contains a non-string or empty token" % (lineno, what))
    return tuple(raw)


def _parse_sense(raw, lineno, seen_ids):
    if not isinstance(raw, dict):
        raise ValueError("inventory line %d: sense must be an object" % lineno)
    sid = raw.get("id")
    if not isinstance(sid, str) or not sid:
        raise ValueError("inventory line %d: sense id missing or empty" % lineno)
    if sid in seen_ids:
        raise ValueError("inventory line %d: duplicate sense id %r" % (lineno, sid))
    seen_ids.add(sid)
    definition = _token_list(raw.get("definition", []), "definition", lineno)
    raw_examples = raw.get("examples", [])
    if not isinstance(raw_examples, list):
        raise ValueError("inventory line %d: examples must be a list" % lineno)
    examples = tuple(_token_list(ex, "example", lineno) for ex in raw_examples)
    neighbors = _token_list(raw.get("neighbors", []), "neighbors", lineno)
    if sid in neighbors:
        raise ValueError("inventory line %d: sense %r lists itself as neighbor" % (lineno, sid))
    return Sense(sid, definition, examples, neighbors)


def load_inventory(path):
    """Parse a JSON Lines inventory file and index it.

    Raises ValueError naming the offending line on malformed records,
    duplicate (lemma, pos) entries, duplicate sense ids, or neighbor ids
    that do not resolve anywhere in the file.
    """
    entries = {}
    global_index = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError("inventory line %d: invalid JSON (%s)" % (lineno, exc)) from exc
            if not isinstance(raw, dict):
                raise ValueError("inventory line %d: record must be an object" % lineno)
            lemma = raw.get("lemma")
            pos = raw.get("pos")
            if not isinstance(lemma, str) or not lemma:
                raise ValueError("inventory line %d: lemma missing or empty" % lineno)
            if pos not in POS_VALUES:
                raise ValueError(
                    "inventory line %d: pos must be one of %s, got %r" % (lineno, POS_VALUES, pos))
            raw_senses = raw.get("senses")
            if not isinstance(raw_senses, list) or not raw_senses:
                raise ValueError("inventory line %d: senses must be a non-empty list" % lineno)
            if (lemma, pos) in entries:
                raise ValueError(
                    "inventory line %d: duplicate entry for (%s, %s)" % (lineno, lemma, pos))
            seen_ids = set()
            senses = tuple(_parse_sense(s, lineno, seen_ids) for s in raw_senses)
            wt = WordType(lemma, pos, senses)
            entries[(lemma, pos)] = wt
            for sense in senses:
                if sense.id in global_index:
                    raise ValueError(
                        "inventory line %d: sense id %r already defined elsewhere"
                        % (lineno, sense.id))
                global_index[sense.id] = (wt, sense)
    for wt in entries.values():
        for sense in wt.senses:
            for nid in sense.neighbors:
                if nid not in global_index:
                    raise ValueError(
                        "dangling neighbor id %r (referenced by sense %r)" % (nid, sense.id))
    return SenseInventory(entries, global_index)


def dump_inventory(inv, path):
    """Serialize the inventory back to JSON Lines, preserving entry order."""
    with open(path, "w", encoding="utf-8") as fh:
        for wt in inv.entries.values():
            record = {
                "lemma": wt.lemma,
                "pos": wt.pos,
                "senses": [
                    {
                        "id": s.id,
                        "definition": list(s.definition),
                        "examples": [list(ex) for ex in s.examples],
                        "neighbors": list(s.neighbors),
                    }
                    for s in wt.senses
                ],
            }
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def ambiguous_types(inv, min_senses=2):
    """Word types with at least ``min_senses`` senses, lemma/pos sorted."""
    if min_senses < 2:
        raise ValueError("min_senses must be >= 2, got %d" % min_senses)
    selected = [wt for wt in inv.entries.values() if len(wt.senses) >= min_senses]
    selected.sort(key=lambda wt: (wt.lemma, wt.pos))
    return selected


def senses_with_definition(wt):
    """Senses that carry a definition, in inventory order."""
    return [s for s in wt.senses if s.has_definition()]


def senses_with_example(wt):
    """Senses that carry at least one usage example, in inventory order."""
    return [s for s in wt.senses if s.has_example()]
