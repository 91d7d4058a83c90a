"""PARSEVAL scoring in the style of evalb, and the node-height breakdown."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .trees import TOP, ParseTree, parse_bracketed

# evalb's default parameter file deletes these preterminals before scoring
PUNCTUATION = frozenset({",", ":", "``", "''", ".", "-NONE-"})
# and treats these labels as equal
EQUIVALENT = {"PRT": "ADVP"}


class AlignmentError(ValueError):
    def __init__(self, index: int, gold, test):
        super().__init__(f"sentence {index + 1}: yields differ: {' '.join(gold)!r} vs "
                         f"{' '.join(test)!r}")
        self.index = index


def _tagged(tree: ParseTree) -> bool:
    """True when every word sits alone under its own preterminal."""
    return all(len(node.children) == 1 for node in tree.subtrees()
               if any(c.is_leaf for c in node.children))


def _strip_top(tree: ParseTree) -> ParseTree:
    return tree.children[0] if tree.label == TOP and len(tree.children) == 1 else tree


class _Brackets:
    """Scorable constituents of one tree, over punctuation-free word offsets."""

    def __init__(self, tree: Optional[ParseTree]):
        self.spans: list[tuple[str, int, int, float]] = []
        self.words: list[str] = []
        if tree is None:
            return
        tree = _strip_top(tree)
        tagged = _tagged(tree)
        self._walk(tree, tagged)

    def _walk(self, node: ParseTree, tagged: bool):
        """Returns (start, end, path lengths to the words below)."""
        start = len(self.words)
        paths = []
        if tagged and node.is_pos:
            if node.label not in PUNCTUATION:
                self.words.append(node.children[0].word)
            return start, len(self.words), [1]
        for child in node.children:
            if child.is_leaf:
                self.words.append(child.word)
                paths.append(1)
            else:
                _, _, sub = self._walk(child, tagged)
                paths.extend(p + 1 for p in sub)
        end = len(self.words)
        if end > start:
            label = EQUIVALENT.get(node.label, node.label)
            self.spans.append((label, start, end, sum(paths) / len(paths)))
        return start, end, paths

    def select(self, max_height: float = math.inf) -> Counter:
        return Counter((label, a, b) for label, a, b, h in self.spans if h <= max_height)


def node_height(node: ParseTree) -> float:
    """Mean edge count from ``node`` down to each word it dominates."""
    if node.is_leaf:
        raise ValueError("node height is undefined for a leaf")
    total = count = 0
    stack = [(node, 0)]
    while stack:
        n, d = stack.pop()
        if n.is_leaf:
            total += d
            count += 1
        else:
            stack.extend((c, d + 1) for c in n.children)
    return total / count


def _crossing(test: Counter, gold: Counter) -> int:
    gold_spans = {(a, b) for _, a, b in gold}
    n = 0
    for (_, a, b), k in test.items():
        if any(c < a < d < b or a < c < b < d for c, d in gold_spans):
            n += k
    return n


def _ratio(num: int, den: int) -> float:
    return num / den if den else 1.0


def f_score(lp: float, lr: float) -> float:
    return 2 * lp * lr / (lp + lr) if lp + lr > 0 else 0.0


@dataclass
class SentenceScore:
    index: int
    length: int
    matched: int
    gold: int
    test: int
    crossing: int
    failed: bool = False

    @property
    def recall(self) -> float:
        return _ratio(self.matched, self.gold)

    @property
    def precision(self) -> float:
        if self.failed:
            return 0.0 if self.gold else 1.0
        return _ratio(self.matched, self.test)


@dataclass
class Scorecard:
    sentences: list[SentenceScore] = field(default_factory=list)

    @property
    def matched(self) -> int:
        return sum(s.matched for s in self.sentences)

    @property
    def gold(self) -> int:
        return sum(s.gold for s in self.sentences)

    @property
    def test(self) -> int:
        return sum(s.test for s in self.sentences)

    @property
    def recall(self) -> float:
        return _ratio(self.matched, self.gold)

    @property
    def precision(self) -> float:
        return _ratio(self.matched, self.test)

    @property
    def f(self) -> float:
        return f_score(self.precision, self.recall)

    @property
    def crossing(self) -> float:
        """Mean crossing brackets per sentence."""
        if not self.sentences:
            return 0.0
        return sum(s.crossing for s in self.sentences) / len(self.sentences)

    def _share(self, limit: int) -> float:
        if not self.sentences:
            return 100.0
        return 100.0 * sum(s.crossing <= limit for s in self.sentences) / len(self.sentences)

    @property
    def zero_cb(self) -> float:
        return self._share(0)

    @property
    def two_cb(self) -> float:
        return self._share(2)

    @property
    def failures(self) -> int:
        return sum(s.failed for s in self.sentences)

    def summary(self) -> str:
        return (f"sentences {len(self.sentences)}  failed {self.failures}\n"
                f"LR {100 * self.recall:.1f}  LP {100 * self.precision:.1f}  "
                f"F {100 * self.f:.1f}\n"
                f"CB {self.crossing:.2f}  0CB {self.zero_cb:.1f}  2CB {self.two_cb:.1f}\n")

    def to_csv(self) -> str:
        lines = ["sentence_id,LR,LP,CB"]
        lines += [f"{s.index + 1},{100 * s.recall:.2f},{100 * s.precision:.2f},{s.crossing}"
                  for s in self.sentences]
        lines.append(f"all,{100 * self.recall:.2f},{100 * self.precision:.2f},"
                     f"{self.crossing:.2f}")
        return "\n".join(lines) + "\n"


def _pairs(gold: Sequence, test: Sequence, max_length: Optional[int]):
    if len(gold) != len(test):
        raise ValueError(f"{len(gold)} gold trees but {len(test)} test trees")
    for i, (g, t) in enumerate(zip(gold, test)):
        gb, tb = _Brackets(g), _Brackets(t)
        if t is not None and gb.words != tb.words:
            raise AlignmentError(i, gb.words, tb.words)
        if max_length is not None and len(_strip_top(g).words()) > max_length:
            continue
        yield i, g, gb, tb, t is None


def score(gold: Sequence[ParseTree], test: Sequence[Optional[ParseTree]],
          max_length: Optional[int] = None) -> Scorecard:
    """Labeled bracket scores; a None test tree is a failed parse."""
    card = Scorecard()
    for i, g, gb, tb, failed in _pairs(gold, test, max_length):
        gs, ts = gb.select(), tb.select()
        card.sentences.append(SentenceScore(
            i, len(gb.words), sum((gs & ts).values()), sum(gs.values()), sum(ts.values()),
            _crossing(ts, gs), failed))
    return card


@dataclass
class HeightReport:
    thresholds: list[float]
    f: list[float]

    def to_csv(self) -> str:
        return "threshold,F\n" + "".join(f"{_fmt(h)},{v:.6f}\n"
                                         for h, v in zip(self.thresholds, self.f))


def _fmt(h: float) -> str:
    return "inf" if math.isinf(h) else f"{h:g}"


def height_curve(gold: Sequence[ParseTree], test: Sequence[Optional[ParseTree]],
                 thresholds: Sequence[float], max_length: Optional[int] = None) -> HeightReport:
    """Corpus F over constituents whose node height is at most each threshold.

    The filter is applied to gold and test brackets independently.
    """
    if not thresholds:
        raise ValueError("no thresholds given")
    thresholds = sorted(float(h) for h in thresholds)
    pairs = [(gb, tb) for _, _, gb, tb, _ in _pairs(gold, test, max_length)]
    out = []
    for h in thresholds:
        m = g = t = 0
        for gb, tb in pairs:
            gs, ts = gb.select(h), tb.select(h)
            m += sum((gs & ts).values())
            g += sum(gs.values())
            t += sum(ts.values())
        out.append(f_score(_ratio(m, t), _ratio(m, g)))
    return HeightReport(thresholds, out)


def read_parses(text: str) -> list[Optional[ParseTree]]:
    """One tree per non-empty line; ``(())`` or ``()`` marks a failed parse."""
    out = []
    for line in text.splitlines():
        stripped = "".join(line.split())
        if not stripped:
            continue
        if stripped in ("(())", "()"):
            out.append(None)
        else:
            trees = parse_bracketed(line)
            if len(trees) != 1:
                raise ValueError(f"expected one tree per line, got {len(trees)}: {line!r}")
            out.append(trees[0])
    return out
