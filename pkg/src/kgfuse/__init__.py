"""Knowledge-graph embeddings with gated fusion of structure and literals."""

__version__ = "0.1.0"

from .data import DatasetStats, Triple, TripleSet, Vocabulary, build_vocab, \
    load_triples, make_clustered, make_synthetic
from .errors import DataError, KgfuseError, NumericError
from .evaluation import EvalReport, KnownTriples, evaluate, joint_scorer, \
    rank_query, structural_scorer
from .joint import GruParams, JointModel, gru_backward, gru_forward, \
    joint_score, train_joint
from .literals import LiteralProjection, LiteralStore, load_literal_file, \
    write_literal_file
from .numeric import SgdConfig, grad_check, init_uniform, sgd_step
from .structural import StructuralModel, corrupt, margin_term, score, \
    train_structural
