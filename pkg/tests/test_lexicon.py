import json

import pytest

from senseforge.lexicon import (ambiguous_types, dump_inventory, load_inventory,
                                senses_with_definition, senses_with_example)


def write_inventory(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def sense(sid, definition=(), examples=(), neighbors=()):
    return {"id": sid, "definition": list(definition),
            "examples": [list(e) for e in examples], "neighbors": list(neighbors)}


ROCK = {
    "lemma": "rock",
    "pos": "noun",
    "senses": [
        sense("rock.n.01", ["a", "lump", "of", "stone"],
              [["he", "threw", "a", "rock"]], ["stone.n.01"]),
        sense("rock.n.02", ["a", "genre", "of", "music"]),
    ],
}
STONE = {"lemma": "stone", "pos": "noun",
         "senses": [sense("stone.n.01", ["hard", "mineral", "matter"])]}


def test_empty_file_gives_empty_inventory(tmp_path):
    path = tmp_path / "inv.jsonl"
    path.write_text("")
    inv = load_inventory(path)
    assert len(inv) == 0
    assert inv.global_index == {}


def test_one_record_preserves_sense_order(tmp_path):
    path = tmp_path / "inv.jsonl"
    write_inventory(path, [ROCK, STONE])
    inv = load_inventory(path)
    wt = inv.word_type("rock", "noun")
    assert wt is not None
    assert [s.id for s in wt.senses] == ["rock.n.01", "rock.n.02"]
    assert wt.senses[0].definition == ("a", "lump", "of", "stone")
    assert wt.senses[0].examples == (("he", "threw", "a", "rock"),)


def test_dangling_neighbor_is_named(tmp_path):
    record = {"lemma": "rock", "pos": "noun",
              "senses": [sense("rock.n.01", ["stone"], neighbors=["x.v.99"])]}
    path = tmp_path / "inv.jsonl"
    write_inventory(path, [record])
    with pytest.raises(ValueError, match="x.v.99"):
        load_inventory(path)


def test_malformed_line_names_line_number(tmp_path):
    path = tmp_path / "inv.jsonl"
    path.write_text(json.dumps(STONE) + "\n{not json\n")
    with pytest.raises(ValueError, match="line 2"):
        load_inventory(path)


def test_duplicate_lemma_pos_rejected(tmp_path):
    path = tmp_path / "inv.jsonl"
    write_inventory(path, [STONE, STONE])
    with pytest.raises(ValueError, match="duplicate"):
        load_inventory(path)


def test_unsupported_pos_rejected(tmp_path):
    bad = {"lemma": "quickly", "pos": "adverb", "senses": [sense("quickly.r.01")]}
    path = tmp_path / "inv.jsonl"
    write_inventory(path, [bad])
    with pytest.raises(ValueError, match="pos"):
        load_inventory(path)


def test_self_loop_neighbor_rejected(tmp_path):
    bad = {"lemma": "loop", "pos": "noun",
           "senses": [sense("loop.n.01", ["a", "loop"], neighbors=["loop.n.01"])]}
    path = tmp_path / "inv.jsonl"
    write_inventory(path, [bad])
    with pytest.raises(ValueError, match="neighbor"):
        load_inventory(path)


def test_empty_senses_rejected(tmp_path):
    path = tmp_path / "inv.jsonl"
    write_inventory(path, [{"lemma": "void", "pos": "noun", "senses": []}])
    with pytest.raises(ValueError, match="senses"):
        load_inventory(path)


def test_duplicate_sense_id_within_word_rejected(tmp_path):
    bad = {"lemma": "twin", "pos": "noun",
           "senses": [sense("twin.n.01"), sense("twin.n.01")]}
    path = tmp_path / "inv.jsonl"
    write_inventory(path, [bad])
    with pytest.raises(ValueError, match="duplicate sense id"):
        load_inventory(path)


def make_inventory(tmp_path, records):
    path = tmp_path / "inv.jsonl"
    write_inventory(path, records)
    return load_inventory(path)


def n_senses(lemma, pos, n):
    return {"lemma": lemma, "pos": pos,
            "senses": [sense("%s.%s.%02d" % (lemma, pos[0], i), ["gloss", str(i)])
                       for i in range(1, n + 1)]}


def test_ambiguous_types_empty_when_all_monosemous(tmp_path):
    inv = make_inventory(tmp_path, [n_senses("cat", "noun", 1), n_senses("run", "verb", 1)])
    assert ambiguous_types(inv) == []


def test_ambiguous_types_filters_and_sorts(tmp_path):
    inv = make_inventory(tmp_path, [n_senses("deal", "noun", 3), n_senses("cat", "noun", 1)])
    assert [wt.lemma for wt in ambiguous_types(inv)] == ["deal"]

    inv = make_inventory(tmp_path, [n_senses("zebra", "noun", 2), n_senses("apple", "noun", 2),
                                    n_senses("apple", "verb", 2)])
    assert [(wt.lemma, wt.pos) for wt in ambiguous_types(inv)] == [
        ("apple", "noun"), ("apple", "verb"), ("zebra", "noun")]


def test_ambiguous_types_min_senses_boundary(tmp_path):
    inv = make_inventory(tmp_path, [n_senses("deal", "noun", 3)])
    assert ambiguous_types(inv, min_senses=4) == []
    assert len(ambiguous_types(inv, min_senses=3)) == 1
    with pytest.raises(ValueError):
        ambiguous_types(inv, min_senses=1)


def test_ambiguous_and_monosemous_partition_entries(tmp_path):
    records = [n_senses("w%d" % i, "noun", 1 + i % 4) for i in range(10)]
    inv = make_inventory(tmp_path, records)
    ambiguous = {wt.key for wt in ambiguous_types(inv)}
    single = {wt.key for wt in inv.entries.values() if len(wt.senses) == 1}
    assert ambiguous | single == {wt.key for wt in inv.entries.values()}
    assert ambiguous & single == set()


def test_sense_filters_preserve_order(tmp_path):
    record = {"lemma": "mix", "pos": "verb", "senses": [
        sense("mix.v.01", ["blend"], [["mix", "it"]]),
        sense("mix.v.02", []),
        sense("mix.v.03", ["combine"], [["they", "mix"]]),
        sense("mix.v.04", ["stir"]),
    ]}
    inv = make_inventory(tmp_path, [record])
    wt = inv.word_type("mix", "verb")
    assert [s.id for s in senses_with_definition(wt)] == ["mix.v.01", "mix.v.03", "mix.v.04"]
    assert [s.id for s in senses_with_example(wt)] == ["mix.v.01", "mix.v.03"]
    assert len(senses_with_definition(wt)) <= len(wt.senses)
    assert len(senses_with_example(wt)) <= len(wt.senses)


def test_all_senses_have_definitions(tmp_path):
    inv = make_inventory(tmp_path, [n_senses("deal", "noun", 3)])
    wt = inv.word_type("deal", "noun")
    assert senses_with_definition(wt) == list(wt.senses)
    assert senses_with_example(wt) == []


def test_round_trip_is_fixed_point(tmp_path):
    inv = make_inventory(tmp_path, [ROCK, STONE, n_senses("deal", "verb", 3)])
    out = tmp_path / "dumped.jsonl"
    dump_inventory(inv, out)
    reloaded = load_inventory(out)
    assert reloaded == inv
    out2 = tmp_path / "dumped2.jsonl"
    dump_inventory(reloaded, out2)
    assert out2.read_text() == out.read_text()
