import math
import struct
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import load, prepared
from strategies import marked_trees
from treegram.history import HistoryDep, HistoryH, dep_history, history_from_text
from treegram.model import (MAGIC, CountTable, ModelFormatError, adjacency_flag, load_model,
                            observe_corpus, prob, read_model, save_model, train, write_model)
from treegram.parser import NodeState
from treegram.tgram import ExtractionConfig, Role, extract_node, extract_treebank, parse_tgram
from treegram.treebank import build_tag_lexicon, prepare_treebank
from treegram.trees import parse_bracketed

D1 = ExtractionConfig(max_depth=1)


def _table(trees, cfg=D1, markov=False):
    return train(trees, cfg, markov, {"note": "test"}, build_tag_lexicon(trees))


def test_unique_contexts_have_probability_one():
    (tree,) = prepare_treebank(parse_bracketed("(S (NP (NN a)) (VP (VB b)))"), 0)
    table = _table([tree], ExtractionConfig(max_depth=1, max_open=0))
    assert len(table) > 0
    for t, hist, _ in table.events():
        assert table.prob(t.role, hist, t) == 1.0


def test_figure2_head_probability(figure2):
    table = _table([figure2])
    deal = parse_tgram('H: ([NN] "deal")')
    hist = HistoryH("NN", "NP")
    assert table.fraction(Role.HEAD, hist, deal) == Fraction(1, 2)
    assert prob(table, Role.HEAD, hist, deal) == 0.5
    assert table.count(Role.HEAD, hist, parse_tgram('H: ([NN] "week")')) == 1


def test_duplicated_corpus_same_probabilities(figure2):
    once = _table([figure2], ExtractionConfig())
    thrice = _table([figure2] * 3, ExtractionConfig())
    for t, hist, n in once.events():
        assert thrice.count(t.role, hist, t) == 3 * n
        assert thrice.fraction(t.role, hist, t) == once.fraction(t.role, hist, t)


def test_unseen_is_zero(figure2):
    table = _table([figure2])
    pt = parse_tgram('H: ([NN] "deal")')
    assert table.prob(Role.HEAD, HistoryH("NN", "VP"), pt) == 0.0
    assert table.logprob(Role.HEAD, HistoryH("NN", "VP"), pt) == -math.inf
    assert table.prob(Role.HEAD, HistoryH("NN", "NP"), parse_tgram('H: ([NN] "dog")')) == 0.0
    assert table.distribution(Role.HEAD, HistoryH("XX", "YY")) == {}


def test_distribution_sums_to_one(figure2):
    table = _table([figure2], ExtractionConfig())
    for role, hist in table.keys():
        dist = table.distribution(role, hist)
        assert math.isclose(math.fsum(math.exp(lp) for lp in dist.values()), 1.0,
                            abs_tol=1e-12)


def _state(left_material=False, right_material=False):
    return NodeState((), (), False, False, left_material, right_material, "NP", "VP")


def test_adjacency_flag():
    t = parse_tgram("L: ([S +NP)")
    assert adjacency_flag(t, _state()) is True
    assert adjacency_flag(t, _state(left_material=True)) is False
    assert adjacency_flag(parse_tgram("R: (S] PP)"), _state(left_material=True)) is True
    with pytest.raises(ValueError):
        adjacency_flag(parse_tgram('H: ([NN] "a")'), _state())


def test_markov_gate():
    assert dep_history("L", "S", "VP", ("NP",), True, "VP", True).ADJ is None
    assert dep_history("L", "S", "VP", (), True, "VP", True).ADJ == "VP"
    assert dep_history("L", "S", "VP", (), True, "VP", False).ADJ is None
    assert dep_history("R", "VP", "VBD", ("NP", "ADJP"), False, "NP", False).SC == ("ADJP", "NP")


@pytest.mark.parametrize("hist", [
    HistoryH("S^VBD/VP", "TOP"),
    HistoryDep("L", "S", "VP", ("NP", "NP"), True, None),
    HistoryDep("R", "VP^VBD", "VBD", (), False, "NP"),
])
def test_history_text_round_trip(hist):
    assert history_from_text(hist.to_text()) == hist


def test_empty_model_round_trip():
    table = CountTable()
    again = load_model(save_model(table))
    assert again == table and len(again) == 0


def test_figure2_model_round_trip(tmp_path, figure2):
    table = _table([figure2], ExtractionConfig(), markov=True)
    path = tmp_path / "m.tgm"
    write_model(table, path)
    again = read_model(path)
    assert again == table
    assert again.markov is True
    for t, hist, _ in table.events():
        assert again.fraction(t.role, hist, t) == table.fraction(t.role, hist, t)


def test_text_dump_round_trip(figure2):
    table = _table([figure2], ExtractionConfig())
    again = CountTable.from_text(table.to_text(), table.meta, table.lexicon)
    assert again == table
    lines = table.to_text().splitlines()
    assert lines == sorted(lines)


def test_corrupted_inputs(figure2):
    blob = save_model(_table([figure2]))
    with pytest.raises(ModelFormatError):
        load_model(b"XXXXXXXX" + blob[8:])
    with pytest.raises(ModelFormatError):
        load_model(blob[:-5])
    with pytest.raises(ModelFormatError):
        load_model(blob[:6])
    bumped = struct.pack(">8sH", MAGIC, 99) + blob[10:]
    with pytest.raises(ModelFormatError, match="version"):
        load_model(bumped)
    flipped = bytearray(blob)
    flipped[-1] ^= 0xFF
    with pytest.raises(ModelFormatError):
        load_model(bytes(flipped))


def test_observe_corpus_accepts_iterables(figure2):
    events = extract_treebank([figure2], D1)
    expanded = [e for e, n in events.items() for _ in range(n)]
    assert observe_corpus(expanded) == observe_corpus(events)


def test_save_is_independent_of_insertion_order(figure2):
    events = list(extract_treebank([figure2], ExtractionConfig()).items())
    a = observe_corpus(dict(events))
    b = observe_corpus(dict(reversed(events)))
    assert save_model(a) == save_model(b)


def test_restricted_keeps_only_selected(figure2):
    table = _table([figure2], ExtractionConfig())
    pos_only = table.restricted(lambda t: t.root.is_pos)
    assert pos_only.tgrams() == {t for t in table.tgrams() if t.root.is_pos}


@settings(max_examples=40, deadline=None)
@given(marked_trees)
def test_normalization_property(tree):
    for markov in (False, True):
        table = train([tree], ExtractionConfig(max_depth=3), markov)
        for (role, hist), bucket in table.counts.items():
            assert sum(table.fraction(role, hist, t) for t in bucket) == 1


def test_markov_histories_carry_siblings(toy20_raw):
    tb = prepare_treebank(toy20_raw, 1)
    plain = _table(tb, ExtractionConfig(max_depth=2))
    markov = _table(tb, ExtractionConfig(max_depth=2), markov=True)
    assert all(h.ADJ is None for (r, h) in plain.keys() if r is not Role.HEAD)
    adj = [h for (r, h) in markov.keys() if r is not Role.HEAD and h.ADJ is not None]
    assert adj and all(not h.SC for h in adj)
    # same events, only the conditioning differs
    assert Counter(t for t, _, n in plain.events() for _ in range(n)) == \
        Counter(t for t, _, n in markov.events() for _ in range(n))


def test_top_events(toy20_raw):
    tb = prepare_treebank(toy20_raw, 0)
    table = _table(tb)
    tops = [h for (r, h) in table.keys() if r is Role.HEAD and h.P == "TOP"]
    assert tops == [HistoryH("S", "TOP")]
    # one event per head fragment of each root
    expected = sum(len(extract_node(t.children[0], D1)[0]) for t in tb)
    assert sum(table.counts[(Role.HEAD, tops[0])].values()) == expected
