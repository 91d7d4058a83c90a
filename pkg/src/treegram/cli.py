"""``treegram`` command line: train, parse, eval, inspect.

Exit codes: 0 success (parse failures are reported, not fatal), 1 internal
error, 2 usage or I/O problems.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import RunConfig
from .eval import AlignmentError, height_curve, read_parses, score
from .model import ModelFormatError, load_model, save_model, train
from .parser import ParserConfig, Parser
from .tgram import Role, TGram, format_tgram, parse_fragment, tgram_depth
from .treebank import build_tag_lexicon, prepare_treebank
from .trees import BracketError, ParseTree, parse_bracketed, raw_label

log = logging.getLogger("treegram")


class UsageError(Exception):
    pass


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, data, binary=False):
    try:
        if binary:
            Path(path).write_bytes(data)
        else:
            Path(path).write_text(data, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    # override options default to SUPPRESS, so only flags actually given appear
    changes = {k: getattr(args, k) for k in _OVERRIDES if hasattr(args, k)}
    if getattr(args, "markov", False):
        changes["markov"] = True
    if getattr(args, "no_prune", False):
        changes["prune"] = False
    return replace(cfg, **changes)


_OVERRIDES = ("prehead_order", "max_depth", "max_branching", "max_open", "max_words",
              "min_freq", "depth_mode", "unknown_threshold", "beam_width", "beam_margin",
              "jobs", "treebank", "model", "input", "output")


def _load_model(path):
    data = Path(path).read_bytes() if Path(path).is_file() else None
    if data is None:
        raise UsageError(f"cannot read model {path}")
    return load_model(data)


# -- train ------------------------------------------------------------------

def cmd_train(args) -> int:
    cfg = _config(args)
    if not cfg.treebank or not cfg.model:
        raise UsageError("train needs --treebank and --model")
    try:
        trees = parse_bracketed(_read_text(cfg.treebank))
    except BracketError as exc:
        raise UsageError(f"{cfg.treebank}: {exc}") from None
    tb = prepare_treebank(trees, cfg.prehead_order, cfg.unknown_threshold)
    table = train(tb, cfg.extraction(), cfg.markov, cfg.model_meta(), build_tag_lexicon(tb))
    _write(cfg.model, save_model(table), binary=True)
    print(training_report(table, len(tb)), end="", file=sys.stderr)
    phrasal = sum(1 for t in table.tgrams() if not t.root.is_pos)
    if phrasal == 0:
        log.warning("no phrasal T-grams survived the size and frequency limits")
    return 0


def training_report(table, n_trees: int) -> str:
    kinds: Counter = Counter()
    events: Counter = Counter()
    for t, _, n in table.events():
        events[t.role] += n
    for t in table.tgrams():
        kinds[t.role] += 1
    lines = [f"trees {n_trees}"]
    for role in Role:
        lines.append(f"{role.value} T-grams {kinds[role]} events {events[role]}")
    lex = table.lexicon
    if lex is not None:
        tags = {tag for counts in lex.tags.values() for tag in counts}
        lines.append(f"vocabulary {len(lex.tags)} tags {len(tags)} "
                     f"unknown signatures {len(lex.signatures())}")
    return "\n".join(lines) + "\n"


# -- parse ------------------------------------------------------------------

_WORKER = {}


def _init_worker(model_bytes, parser_cfg, fallback):
    _WORKER["parser"] = Parser(load_model(model_bytes), parser_cfg)
    _WORKER["fallback"] = fallback


def _parse_line(words):
    result = _WORKER["parser"].parse(words)
    if result.ok:
        text = result.bracketed()
    elif _WORKER["fallback"] and words:
        text = right_branching(words, _WORKER["parser"].table.lexicon).to_string()
    else:
        text = "(())"
    trace = ""
    if result.ok:
        trace = " ; ".join(f"{'.'.join(map(str, s.address))} {format_tgram(s.tgram)}"
                           for s in result.derivation.steps)
    return text, result.logprob, trace, result.error


def right_branching(words, lexicon) -> ParseTree:
    """Fallback for corpus runs: each word's most frequent tag, nested to the right."""
    def tag(w):
        if lexicon is None:
            return "X"
        try:
            counts = lexicon.lookup(w)
        except KeyError:
            return "X"
        return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]

    node = None
    for w in reversed(words):
        pos = ParseTree(tag(w), [ParseTree.leaf(w)], head_child=1)
        node = pos if node is None else ParseTree("S", [pos, node], head_child=1)
    return ParseTree("TOP", [node], head_child=1)


def cmd_parse(args) -> int:
    cfg = _config(args)
    if not cfg.model:
        raise UsageError("parse needs --model")
    model_bytes = Path(cfg.model).read_bytes() if Path(cfg.model).is_file() else None
    if model_bytes is None:
        raise UsageError(f"cannot read model {cfg.model}")
    load_model(model_bytes)  # fail early on a bad file
    text = _read_text(cfg.input) if cfg.input else sys.stdin.read()
    sentences = [line.split() for line in text.splitlines()]
    pcfg = ParserConfig(cfg.beam_width, cfg.beam_margin, cfg.prune)
    if cfg.jobs > 1 and len(sentences) > 1:
        with ProcessPoolExecutor(cfg.jobs, initializer=_init_worker,
                                 initargs=(model_bytes, pcfg, args.fallback_rightbranch)) as pool:
            results = list(pool.map(_parse_line, sentences, chunksize=4))
    else:
        _init_worker(model_bytes, pcfg, args.fallback_rightbranch)
        results = [_parse_line(s) for s in sentences]
    out = "".join(r[0] + "\n" for r in results)
    if cfg.output:
        _write(cfg.output, out)
    else:
        sys.stdout.write(out)
    if args.report:
        side = "".join(f"{i + 1}\t{_lp(r[1])}\t{r[3] or 'ok'}\t{r[2]}\n"
                       for i, r in enumerate(results))
        _write(args.report, side)
    failed = sum(r[0] == "(())" for r in results)
    print(f"parsed {len(results) - failed} of {len(results)} sentences, {failed} failed",
          file=sys.stderr)
    return 0


def _lp(x: float) -> str:
    return "-inf" if x == -math.inf else repr(x)


# -- eval -------------------------------------------------------------------

def cmd_eval(args) -> int:
    gold = read_parses(_read_text(args.gold))
    test = read_parses(_read_text(args.test))
    if any(g is None for g in gold):
        raise UsageError("gold file contains an empty tree")
    try:
        card = score(gold, test, args.len_cutoff)
        heights = None
        if args.heights:
            values = [float(x) for x in args.heights.split(",") if x.strip()]
            heights = height_curve(gold, test, values, args.len_cutoff)
    except AlignmentError as exc:
        raise UsageError(str(exc)) from None
    print(card.summary(), end="")
    if args.csv:
        _write(args.csv, card.to_csv())
    if heights is not None:
        if args.heights_csv:
            _write(args.heights_csv, heights.to_csv())
        else:
            print(heights.to_csv(), end="")
    return 0


# -- inspect ----------------------------------------------------------------

def cmd_inspect(args) -> int:
    table = _load_model(args.model)
    mode = table.meta.get("depth_mode", "flat")
    if args.histories:
        lines = [row for row in table.to_text().splitlines()
                 if _keep(args, _row_tgram(row), mode)]
    else:
        totals: Counter = Counter()
        for t, _, n in table.events():
            totals[t] += n
        lines = sorted(f"{format_tgram(t)}\t{n}" for t, n in totals.items()
                       if _keep(args, t, mode))
    sys.stdout.write("".join(line + "\n" for line in lines))
    return 0


def _row_tgram(row: str) -> TGram:
    role, _, frag, _ = row.split("\t")
    return TGram(Role(role), parse_fragment(frag))


def _keep(args, t: TGram, mode: str) -> bool:
    if args.role and t.role.value != args.role:
        return False
    if args.label and args.label not in (t.root.label, raw_label(t.root.label)):
        return False
    return args.depth is None or tgram_depth(t, mode) == args.depth


# -- entry point --------------------------------------------------------------

def _int_or_none(text: str):
    return None if text.lower() in ("none", "inf", "unlimited") else int(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treegram", description="Tree-gram parsing toolkit")
    keep = dict(default=argparse.SUPPRESS)
    p.add_argument("--version", action="version", version=f"treegram {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="extract T-grams and write a model")
    t.add_argument("--config")
    t.add_argument("--treebank", **keep)
    t.add_argument("--model", **keep)
    t.add_argument("--order", dest="prehead_order", type=int, choices=(0, 1, 2), **keep)
    t.add_argument("--max-depth", type=_int_or_none, **keep)
    t.add_argument("--max-branching", type=_int_or_none, **keep)
    t.add_argument("--max-open", type=_int_or_none, **keep)
    t.add_argument("--max-words", type=_int_or_none, **keep)
    t.add_argument("--min-freq", type=int, **keep)
    t.add_argument("--depth-mode", choices=("flat", "spine"), **keep)
    t.add_argument("--unknown-threshold", type=int, **keep)
    t.add_argument("--markov", action="store_true")
    t.set_defaults(func=cmd_train)

    q = sub.add_parser("parse", help="parse one pre-tokenized sentence per line")
    q.add_argument("--config")
    q.add_argument("--model", **keep)
    q.add_argument("--input", **keep)
    q.add_argument("--output", **keep)
    q.add_argument("--report", help="write log-probabilities and derivations here")
    q.add_argument("--jobs", type=int, **keep)
    q.add_argument("--beam-width", type=int, **keep)
    q.add_argument("--beam-margin", type=float, **keep)
    q.add_argument("--no-prune", action="store_true", help="skip the first pass")
    q.add_argument("--fallback-rightbranch", action="store_true")
    q.set_defaults(func=cmd_parse)

    e = sub.add_parser("eval", help="PARSEVAL scores of test trees against gold trees")
    e.add_argument("gold")
    e.add_argument("test")
    e.add_argument("--len-cutoff", type=int)
    e.add_argument("--heights", help="comma-separated node-height thresholds")
    e.add_argument("--csv", help="per-sentence scores")
    e.add_argument("--heights-csv")
    e.set_defaults(func=cmd_eval)

    i = sub.add_parser("inspect", help="list T-grams in a model")
    i.add_argument("model")
    i.add_argument("--role", choices=("H", "L", "R"))
    i.add_argument("--label")
    i.add_argument("--depth", type=int)
    i.add_argument("--histories", action="store_true", help="one line per (history, T-gram)")
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ModelFormatError, ValueError) as exc:
        print(f"treegram: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"treegram: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
