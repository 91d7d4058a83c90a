"""Tree-gram parsing: T-gram extraction, direct-estimate models, MPD chart parsing."""
__version__ = "0.1.0"

from .config import RunConfig
from .model import CountTable, load_model, observe_corpus, save_model, train
from .tgram import ExtractionConfig, Role, TGram, extract_node, extract_treebank
from .treebank import HeadRuleSet, ComplementRules, build_tag_lexicon, prepare_treebank
from .trees import ParseTree, parse_bracketed

__all__ = [
    "ComplementRules", "CountTable", "ExtractionConfig", "HeadRuleSet", "ParseTree", "Role",
    "RunConfig", "TGram", "build_tag_lexicon", "extract_node", "extract_treebank", "load_model",
    "observe_corpus", "parse_bracketed", "prepare_treebank", "save_model", "train",
]
