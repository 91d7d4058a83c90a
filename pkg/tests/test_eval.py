import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA, load
from strategies import raw_trees
from treegram.eval import (AlignmentError, height_curve, node_height, read_parses, score)
from treegram.trees import parse_bracketed


def _one(text):
    (tree,) = parse_bracketed(text)
    return tree


GOLD = _one("(S (NP a b) (VP c))")
TEST = _one("(S (NP a) (VP b c))")


def test_identity():
    card = score([GOLD], [GOLD])
    assert (card.recall, card.precision, card.crossing, card.zero_cb) == (1.0, 1.0, 0.0, 100.0)


def test_crossing_example():
    card = score([GOLD], [TEST])
    assert (card.matched, card.gold, card.test) == (1, 3, 3)
    assert card.crossing == 1
    assert card.zero_cb == 0.0 and card.two_cb == 100.0


def test_crossing_is_not_symmetric_but_lr_lp_swap():
    gold = _one("(S (A a b) (B c d))")
    test = _one("(S (Y a) (X b c) (Z d))")
    forward, backward = score([gold], [test]), score([test], [gold])
    assert forward.recall == backward.precision and forward.precision == backward.recall
    # X crosses both gold brackets but counts once; each gold bracket crosses X
    assert (forward.crossing, backward.crossing) == (1, 2)


def test_failed_parse():
    card = score([GOLD, GOLD], [None, GOLD])
    assert card.failures == 1
    assert card.matched == 3 and card.gold == 6 and card.test == 3
    assert card.recall == 0.5 and card.precision == 1.0
    assert card.sentences[0].precision == 0.0


def test_punctuation_and_labels_follow_evalb():
    gold = _one("(S (NP (DT the) (NN dog)) (VP (VBD ran) (PRT (RP off))) (. .))")
    test = _one("(S (NP (DT the) (NN dog)) (VP (VBD ran) (ADVP (RP off))) (. .))")
    card = score([gold], [test])
    assert card.recall == 1.0 and card.precision == 1.0
    # the final period is not a word for bracket spans
    card = score([gold], [_one("(S (NP (DT the) (NN dog)) (VP (VBD ran) (PRT (RP off) (. .))))")])
    assert card.recall == 1.0


def test_functags_ignored():
    card = score([_one("(S (NP-SBJ (NN it)) (VP (VBD ran)))")],
                 [_one("(S (NP (NN it)) (VP (VBD ran)))")])
    assert card.recall == 1.0


def test_alignment_errors():
    with pytest.raises(AlignmentError):
        score([GOLD], [_one("(S (NP a b) (VP d))")])
    with pytest.raises(ValueError):
        score([GOLD], [])


def test_length_cutoff_counts_punctuation():
    long = _one("(S (NP (NN a)) (VP (VBD b)) (. .))")
    assert len(score([long], [long], max_length=2).sentences) == 0
    assert len(score([long], [long], max_length=3).sentences) == 1


def test_node_height(figure2):
    s = figure2.children[0]
    assert node_height(s) == pytest.approx(19 / 6)
    assert node_height(s.children[1]) == 2.0
    assert node_height(s.children[1].children[0]) == 1.0
    with pytest.raises(ValueError):
        node_height(s.children[1].children[0].children[0])


def test_height_curve_examples():
    gold = [_one("(S (NP (DT a) (NN b)) (VP (VBD c) (NP (DT d) (NN e))))"),
            _one("(S (NP (NN a)) (VP (VBD b) (NP (NN c)) (PP (IN d) (NP (NN e)))))")]
    # one high error: PP attached under the object NP
    test = [gold[0],
            _one("(S (NP (NN a)) (VP (VBD b) (NP (NP (NN c)) (PP (IN d) (NP (NN e))))))")]
    report = height_curve(gold, test, [1, 2, 3, 4, math.inf])
    assert report.f[1] > report.f[-1]
    assert report.f[-1] == pytest.approx(score(gold, test).f, abs=1e-12)
    # below every phrasal height nothing is scored
    assert report.f[0] == 1.0
    assert report.to_csv().splitlines()[0] == "threshold,F"
    assert report.to_csv().splitlines()[-1].startswith("inf,")
    with pytest.raises(ValueError):
        height_curve(gold, test, [])


def test_read_parses():
    parses = read_parses("(S (NN a))\n\n(())\n( )\n")
    assert parses[0] is not None and parses[1] is None and parses[2] is None
    with pytest.raises(ValueError):
        read_parses("(S (NN a)) (S (NN b))")


def test_csv(toy20_raw):
    card = score(toy20_raw, toy20_raw)
    lines = card.to_csv().splitlines()
    assert lines[0] == "sentence_id,LR,LP,CB" and lines[-1] == "all,100.00,100.00,0.00"
    assert len(lines) == 22
    assert "LR 100.0  LP 100.0" in card.summary()


@settings(max_examples=100, deadline=None)
@given(raw_trees)
def test_self_score_is_perfect(tree):
    card = score([tree], [tree])
    assert card.recall == card.precision == 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(raw_trees, raw_trees), min_size=1, max_size=4), st.randoms())
def test_swap_and_reorder(pairs, rnd):
    # rebuild the second tree over the first tree's words so yields align
    golds, tests = [], []
    for g, t in pairs:
        words = g.words()
        leaves = t.leaves()
        if len(leaves) != len(words):
            continue
        for leaf, w in zip(leaves, words):
            leaf.word = leaf.label = w
        golds.append(g)
        tests.append(t)
    if not golds:
        return
    a, b = score(golds, tests), score(tests, golds)
    assert a.recall == b.precision and a.precision == b.recall
    order = list(range(len(golds)))
    rnd.shuffle(order)
    c = score([golds[i] for i in order], [tests[i] for i in order])
    assert (c.recall, c.precision, c.crossing) == pytest.approx((a.recall, a.precision, a.crossing))
    assert height_curve(golds, tests, [math.inf]).f[0] == pytest.approx(a.f, abs=1e-12)


def test_data_files_match_inline_example():
    gold = read_parses((DATA / "crossing_gold.mrg").read_text())
    assert gold[0].to_string() == GOLD.to_string()
