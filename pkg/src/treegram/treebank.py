"""Treebank preprocessing: heads, complements, pre-heads, unknown words, tag lexicon."""
from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .trees import TOP, ParseTree, PreHead, strip_empty

RULES_ENV = "TREEGRAM_RULES_DIR"
DATA_DIR = Path(__file__).parent / "data"

DIRECTIONS = ("left", "right", "leftdis", "rightdis")


def rules_dir() -> Path:
    return Path(os.environ.get(RULES_ENV) or DATA_DIR)


@dataclass
class HeadRuleSet:
    """Per-parent lists of (direction, labels) search stages."""

    rules: dict[str, list[tuple[str, tuple[str, ...]]]] = field(default_factory=dict)

    @classmethod
    def from_text(cls, text: str) -> "HeadRuleSet":
        rules: dict[str, list] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parent, *rest = line.split()
            if not rest or rest[0] not in DIRECTIONS:
                raise ValueError(f"head rules line {lineno}: bad direction in {line!r}")
            rules.setdefault(parent, []).append((rest[0], tuple(rest[1:])))
        return cls(rules)

    @classmethod
    def load(cls, path=None) -> "HeadRuleSet":
        path = Path(path) if path else rules_dir() / "headrules.txt"
        return cls.from_text(path.read_text(encoding="utf-8"))

    def to_text(self) -> str:
        return "".join(f"{parent}\t{d}\t{' '.join(labels)}".rstrip() + "\n"
                       for parent, stages in self.rules.items()
                       for d, labels in stages)

    def find(self, parent: str, children: list[str]) -> int:
        """1-based index of the head among ``children`` labels."""
        if len(children) == 1:
            return 1
        stages = self.rules.get(parent) or self.rules.get("*") or [("left", ())]
        for direction, labels in stages:
            order = list(range(len(children)))
            if direction.startswith("right"):
                order.reverse()
            if direction.endswith("dis"):
                wanted = set(labels)
                for i in order:
                    if children[i] in wanted:
                        return i + 1
            else:
                for label in labels:
                    for i in order:
                        if children[i] == label:
                            return i + 1
        return 1 if stages[0][0].startswith("left") else len(children)


@dataclass
class ComplementRules:
    parents: frozenset = frozenset({"S", "VP", "SBAR"})
    labels: frozenset = frozenset({"NP", "SBAR", "S"})
    exclude: frozenset = frozenset()

    @classmethod
    def from_text(cls, text: str) -> "ComplementRules":
        fields = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                key, *values = line.split()
                if key not in ("parents", "labels", "exclude"):
                    raise ValueError(f"unknown complement rule key {key!r}")
                fields[key] = frozenset(values)
        return cls(**fields)

    @classmethod
    def load(cls, path=None) -> "ComplementRules":
        path = Path(path) if path else rules_dir() / "complements.txt"
        return cls.from_text(path.read_text(encoding="utf-8"))

    def is_complement(self, parent: ParseTree, child: ParseTree) -> bool:
        return (parent.label in self.parents and child.label in self.labels
                and not self.exclude.intersection(child.functags))


def mark_heads(tree: ParseTree, rules: HeadRuleSet) -> ParseTree:
    """Return a copy with ``head_child`` set on every non-leaf node.

    Heads already present are kept, so the operation is idempotent.
    """
    out = tree.copy()
    for node in out.subtrees():
        if node.head_child is None:
            if node.label == TOP:
                node.head_child = 1
            else:
                node.head_child = rules.find(node.label, [c.label for c in node.children])
    return out


def enrich_preheads(tree: ParseTree, order: int) -> ParseTree:
    """Attach pre-heads of the given order to every phrasal node below TOP."""
    if order not in (0, 1, 2):
        raise ValueError("pre-head order must be 0, 1 or 2")
    out = tree.copy()
    for node in out.subtrees():
        if not node.is_phrasal or node.label == TOP:
            continue
        if order == 0:
            node.prehead = PreHead(0)
            continue
        mother, pos = node, node.head
        while not pos.is_pos:
            mother, pos = pos, pos.head
        if order == 1:
            node.prehead = PreHead(1, pos.label)
        else:
            node.prehead = PreHead(2, pos.label, mother.label)
    return out


def mark_complements(tree: ParseTree, rules: Optional[ComplementRules] = None) -> ParseTree:
    rules = rules or ComplementRules.load()
    out = tree.copy()
    for node in out.subtrees():
        node.sc_left = node.sc_right = ()
        for child in node.children:
            child.complement = False
        if not node.is_phrasal:
            continue
        h = node.head_child - 1
        for i, child in enumerate(node.children):
            if i != h and not child.is_leaf and rules.is_complement(node, child):
                child.complement = True
        node.sc_left = tuple(sorted(c.label for c in node.children[:h] if c.complement))
        node.sc_right = tuple(sorted(c.label for c in node.children[h + 1:] if c.complement))
    return out


SUFFIXES = ("ing", "ed", "ion", "er", "est", "ly", "ity", "s")


def unknown_signature(word: str) -> str:
    """``CAP+UNKNOWN+SUFF`` for a rare or unseen word."""
    cap = "1" if word[:1].isupper() else "0"
    low = word.lower()
    matches = [s for s in SUFFIXES if low.endswith(s) and len(low) > len(s)]
    suffix = max(matches, key=len) if matches else low[-1:]
    return f"{cap}+UNKNOWN+{suffix}"


def word_counts(treebank: Iterable[ParseTree]) -> Counter:
    counts: Counter = Counter()
    for tree in treebank:
        counts.update(tree.words())
    return counts


def rename_unknown_words(treebank: list[ParseTree], threshold: int) -> list[ParseTree]:
    counts = word_counts(treebank)
    out = []
    for tree in treebank:
        tree = tree.copy()
        for leaf in tree.leaves():
            if counts[leaf.word] < threshold:
                leaf.word = leaf.label = unknown_signature(leaf.word)
        out.append(tree)
    return out


class UntaggableWord(KeyError):
    def __init__(self, word: str, position: Optional[int] = None):
        where = "" if position is None else f" at position {position}"
        super().__init__(f"untaggable word {word!r}{where}")
        self.word = word
        self.position = position


@dataclass
class TagLexicon:
    tags: dict[str, Counter] = field(default_factory=dict)

    def normalize(self, word: str) -> str:
        """The form under which ``word`` is known: itself or its unknown signature."""
        if word in self.tags:
            return word
        return unknown_signature(word)

    def lookup(self, word: str) -> Counter:
        form = self.normalize(word)
        if form not in self.tags:
            raise UntaggableWord(word)
        return self.tags[form]

    def signatures(self) -> dict[str, Counter]:
        return {w: c for w, c in self.tags.items() if "+UNKNOWN+" in w}

    def to_text(self) -> str:
        lines = []
        for word in sorted(self.tags):
            counts = self.tags[word]
            lines.append(word + "\t" + ",".join(f"{t}:{counts[t]}" for t in sorted(counts)))
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "TagLexicon":
        tags = {}
        for line in text.splitlines():
            if not line:
                continue
            word, _, entries = line.partition("\t")
            counts = Counter()
            for entry in entries.split(","):
                tag, _, n = entry.rpartition(":")
                counts[tag] = int(n)
            tags[word] = counts
        return cls(tags)

    def __eq__(self, other) -> bool:
        return isinstance(other, TagLexicon) and self.tags == other.tags


def build_tag_lexicon(treebank: Iterable[ParseTree]) -> TagLexicon:
    tags: dict[str, Counter] = {}
    for tree in treebank:
        for node in tree.subtrees():
            if node.is_pos:
                tags.setdefault(node.children[0].word, Counter())[node.label] += 1
    return TagLexicon({w: tags[w] for w in sorted(tags)})


def preprocess(tree: ParseTree, heads: HeadRuleSet, comps: ComplementRules,
               order: int) -> Optional[ParseTree]:
    """Empty elements removed, heads and complements marked, pre-heads attached."""
    tree = strip_empty(tree)
    if tree is None:
        return None
    tree = mark_heads(tree, heads)
    tree = mark_complements(tree, comps)
    tree = enrich_preheads(tree, order)
    tree.set_spans()
    return tree


def prepare_treebank(trees: Iterable[ParseTree], order: int = 2, unknown_threshold: int = 0,
                     heads: Optional[HeadRuleSet] = None,
                     comps: Optional[ComplementRules] = None) -> list[ParseTree]:
    heads = heads or HeadRuleSet.load()
    comps = comps or ComplementRules.load()
    out = [t for t in (preprocess(t, heads, comps, order) for t in trees) if t is not None]
    if unknown_threshold > 0:
        out = rename_unknown_words(out, unknown_threshold)
    return out
