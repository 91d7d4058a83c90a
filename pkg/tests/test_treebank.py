from collections import Counter

import pytest
from hypothesis import given, settings

from conftest import GOLDEN, load
from strategies import corpora, raw_trees
from treegram.treebank import (ComplementRules, HeadRuleSet, TagLexicon, build_tag_lexicon,
                               enrich_preheads, mark_complements, mark_heads, prepare_treebank,
                               rename_unknown_words, unknown_signature)
from treegram.trees import TOP, ParseTree, parse_bracketed

RULES = HeadRuleSet.load()


def _golden(name):
    rows = []
    for line in (GOLDEN / name).read_text().splitlines():
        if line and not line.startswith("#"):
            rows.append(line.split("\t"))
    return rows


def _one_level(lhs: str) -> ParseTree:
    """``VP -> *VBD NP-CLR ADVP`` as a tree, head marked where starred."""
    parent, kids = lhs.split(" -> ")
    text = "(" + parent + " " + " ".join(
        f"({k.lstrip('*')} w{i})" for i, k in enumerate(kids.split())) + ")"
    (tree,) = parse_bracketed(text)
    starred = [i for i, k in enumerate(kids.split()) if k.startswith("*")]
    if starred:
        tree.children[0].head_child = starred[0] + 1
    return tree


def test_head_rule_golden():
    for lhs, head in _golden("headrules.txt"):
        parent, kids = lhs.split(" -> ")
        assert RULES.find(parent, kids.split()) == int(head), lhs


def test_figure2_heads(figure2):
    s = figure2.children[0]
    assert s.head_child == 3
    assert [c.head_child for c in s.children] == [2, 2, 1]


def test_single_child_is_head():
    assert RULES.find("FRAG", ["NP"]) == 1
    assert RULES.find("UNKNOWN-LABEL", ["X"]) == 1


def test_unlisted_parent_uses_default_rule():
    # "*" rule or leftmost child
    assert 1 <= RULES.find("XYZ", ["A", "B", "C"]) <= 3


def test_head_rules_text_round_trip():
    again = HeadRuleSet.from_text(RULES.to_text())
    assert again.rules == RULES.rules


def test_bad_head_rule_line():
    with pytest.raises(ValueError):
        HeadRuleSet.from_text("NP sideways NN")


@settings(max_examples=100, deadline=None)
@given(raw_trees)
def test_mark_heads_total_and_idempotent(tree):
    once = mark_heads(tree, RULES)
    assert all(n.head_child is not None for n in once.subtrees())
    twice = mark_heads(once, RULES)
    assert [n.head_child for n in twice.subtrees()] == [n.head_child for n in once.subtrees()]


def test_preheads_order1_np():
    (tree,) = parse_bracketed("(NP (DET a) (NN deal))")
    tree = enrich_preheads(mark_heads(tree, RULES), 1)
    assert tree.children[0].symbol == "NP^NN"


def test_preheads_order2_figure2():
    tb = prepare_treebank(load("figure2.mrg"), 2)
    s = tb[0].children[0]
    assert s.symbol == "S^VBD/VP"
    assert s.children[0].symbol == "NP^NN/NP"
    # POS nodes stay undecorated
    assert s.children[0].children[0].symbol == "JJ"


@settings(max_examples=100, deadline=None)
@given(raw_trees)
def test_prehead_orders_refine(tree):
    tree = mark_heads(tree, RULES)
    zero, one, two = (enrich_preheads(tree, k) for k in (0, 1, 2))
    for n0, n1, n2, raw in zip(zero.subtrees(), one.subtrees(), two.subtrees(), tree.subtrees()):
        assert n0.symbol == raw.label
        if n2.prehead is not None and n2.prehead.order == 2:
            assert n2.symbol.rsplit("/", 1)[0] == n1.symbol


def test_bad_prehead_order():
    with pytest.raises(ValueError):
        enrich_preheads(parse_bracketed("(S (NN a))")[0], 3)


def test_complement_golden():
    comps = ComplementRules.load()
    for lhs, frames in _golden("complements.txt"):
        tree = mark_complements(mark_heads(_one_level(lhs), RULES), comps)
        node = tree.children[0]
        left, right = frames.split("|")
        assert ",".join(node.sc_left) == left, lhs
        assert ",".join(node.sc_right) == right, lhs


def test_figure4_subject_is_complement(figure4):
    s = figure4.children[0]
    assert s.sc_left == ("NP",) and s.sc_right == ()
    assert s.children[0].complement and not s.head.complement


def test_pos_frames_empty(figure2):
    for node in figure2.subtrees():
        if node.is_pos:
            assert node.sc_left == node.sc_right == ()


@settings(max_examples=100, deadline=None)
@given(raw_trees)
def test_frames_are_submultisets_of_non_head_children(tree):
    tree = mark_complements(mark_heads(tree, RULES))
    for node in tree.subtrees():
        if node.is_phrasal:
            others = Counter(c.label for i, c in enumerate(node.children)
                             if i != node.head_child - 1)
            assert not Counter(node.sc_left + node.sc_right) - others
            assert not node.head.complement


def test_unknown_signatures():
    # longest listed suffix wins, otherwise the last letter
    assert unknown_signature("Gargantuan") == "1+UNKNOWN+n"
    assert unknown_signature("walking") == "0+UNKNOWN+ing"
    assert unknown_signature("Zorp") == "1+UNKNOWN+p"
    assert unknown_signature("quickly") == "0+UNKNOWN+ly"
    assert unknown_signature("s") == "0+UNKNOWN+s"


def test_rename_unknown_words():
    trees = parse_bracketed("(S (NNP Gargantuan) (NN deal))\n(S (NNP Gargantuan) (NN deal))\n"
                            "(S (NN deal) (NN deal) (NN deal))")
    out = rename_unknown_words(trees, 5)
    assert out[0].words() == ["1+UNKNOWN+n", "deal"]
    assert rename_unknown_words(trees, 0)[0].words() == ["Gargantuan", "deal"]
    # input untouched
    assert trees[0].words() == ["Gargantuan", "deal"]


def test_lexicon_examples(figure2):
    lex = build_tag_lexicon([figure2])
    assert lex.lookup("deal") == Counter({"NN": 1})
    two = parse_bracketed("(S (NN run))\n(S (VB run))")
    assert set(build_tag_lexicon(two).lookup("run")) == {"NN", "VB"}


def test_lexicon_unknown_fallback():
    lex = TagLexicon({"1+UNKNOWN+p": Counter({"NNP": 3})})
    assert lex.lookup("Zorp") == Counter({"NNP": 3})
    with pytest.raises(KeyError):
        lex.lookup("zorp")


@settings(max_examples=50, deadline=None)
@given(corpora)
def test_lexicon_text_round_trip(trees):
    lex = build_tag_lexicon(trees)
    assert TagLexicon.from_text(lex.to_text()) == lex


def test_prepare_treebank_drops_empty_trees():
    trees = parse_bracketed("(S (-NONE- *))\n(S (NN a))")
    assert len(prepare_treebank(trees, 0)) == 1


def test_rules_directory_override(tmp_path, monkeypatch):
    (tmp_path / "headrules.txt").write_text("* right\n")
    (tmp_path / "complements.txt").write_text("parents S\nlabels NP\n")
    monkeypatch.setenv("TREEGRAM_RULES_DIR", str(tmp_path))
    (tree,) = prepare_treebank(parse_bracketed("(S (NN a) (NN b))"), 0)
    assert tree.children[0].head_child == 2
    assert tree.label == TOP
