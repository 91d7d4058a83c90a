import pytest
from hypothesis import given, settings

from strategies import raw_trees
from treegram.trees import (TOP, BracketError, ParseTree, PreHead, parse_bracketed, raw_label,
                            read_treebank, split_label, split_symbol, strip_empty,
                            write_treebank)


def test_reads_simple_tree_under_top():
    (tree,) = parse_bracketed("(S (NP (DET a) (NN deal)) (VP (VBD was)))")
    assert tree.label == TOP
    assert tree.children[0].label == "S"
    assert tree.words() == ["a", "deal", "was"]


def test_reads_figure2(figure2):
    s = figure2.children[0]
    assert " ".join(figure2.words()) == "last week a deal was sealed"
    assert [c.label for c in s.children] == ["NP", "NP", "VP"]


def test_malformed_input_reports_offset():
    with pytest.raises(BracketError) as err:
        parse_bracketed("((S")
    assert err.value.offset == 3


@pytest.mark.parametrize("text", ["(S a))", "(S )", "()", "a (S b)", "(S (NP a)"])
def test_other_malformed_inputs(text):
    with pytest.raises(BracketError):
        parse_bracketed(text)


def test_wrapper_bracket_becomes_top():
    (tree,) = parse_bracketed("( (S (NP-SBJ (NN it)) (VP (VBD rained)) (. .)) )")
    assert tree.label == TOP and tree.children[0].label == "S"
    subject = tree.children[0].children[0]
    assert subject.label == "NP" and subject.functags == ("SBJ",)
    assert subject.full_label() == "NP-SBJ"


def test_several_trees_per_file():
    trees = parse_bracketed("(S (NN a))\n\n(S (NN b))  (S (NN c))")
    assert [t.words() for t in trees] == [["a"], ["b"], ["c"]]


@pytest.mark.parametrize("full, expected", [
    ("NP-SBJ-1", ("NP", ("SBJ",), "-1")),
    ("NP=2", ("NP", (), "=2")),
    ("-NONE-", ("-NONE-", (), None)),
    ("-LRB-", ("-LRB-", (), None)),
    ("PP-LOC-CLR", ("PP", ("LOC", "CLR"), None)),
])
def test_split_label(full, expected):
    assert split_label(full) == expected


def test_prehead_symbols():
    assert split_symbol("NP^NN/NP") == ("NP", PreHead(2, "NN", "NP"))
    assert split_symbol("S^VBD") == ("S", PreHead(1, "VBD"))
    assert split_symbol("VP") == ("VP", None)
    assert raw_label("S^VBD/VP") == "S"
    with pytest.raises(ValueError):
        PreHead(1)


def test_strip_empty_removes_traces():
    (tree,) = parse_bracketed("(S (NP-SBJ (-NONE- *T*-1)) (VP (VBD ran)))")
    out = strip_empty(tree)
    assert out.to_string() == "(TOP (S (VP (VBD ran))))"
    (only_trace,) = parse_bracketed("(S (-NONE- *))")
    assert strip_empty(only_trace) is None


def test_spans(figure2):
    s = figure2.children[0]
    assert s.span == (0, 6)
    assert [c.span for c in s.children] == [(0, 2), (2, 4), (4, 6)]


def test_file_round_trip(tmp_path, toy20_raw):
    path = tmp_path / "out.mrg"
    write_treebank(toy20_raw, path)
    again = read_treebank(path)
    assert [t.to_string() for t in again] == [t.to_string() for t in toy20_raw]


@settings(max_examples=200, deadline=None)
@given(raw_trees)
def test_print_parse_round_trip(tree):
    text = tree.to_string()
    (again,) = parse_bracketed(text)
    assert again.to_string() == text
    assert again.same_shape(tree)


def test_leaf_helpers():
    leaf = ParseTree.leaf("dog")
    assert leaf.is_leaf and not leaf.is_pos and leaf.words() == ["dog"]
